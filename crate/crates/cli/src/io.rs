//! JSON input and output formats and CSV tables.
//!
//! Domain file: `{"radii": [..], "psi": [..]}` for a circle domain, with an
//! optional `"phi": [..]` of gate angles for a blocked one, or
//! `{"center": [x, y], "radius": R}` for a disk. Angles are in radians and
//! `psi` holds half arclengths. Step file: `{"radii": [..], "values": [..]}`.
//! Function file: `{"breakpoints": [..], "values": [..], "kinds": [..]}`
//! with kinds `"constant"` or `"linear"`.

use std::path::Path;

use hmdf::geometry::{BlockedCircleDomain, CircleDomain, OffCenterDisk};
use hmdf::hfunction::{CandidateH, StepH};
use hmdf::SegmentKind;
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::{CliError, CliResult};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DomainFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radii: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psi: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    /// Signed residuals `h(r_k) − v_k` left by an inversion.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residuals: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub converged: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweeps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepFile {
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionFile {
    pub breakpoints: Vec<f64>,
    pub values: Vec<f64>,
    pub kinds: Vec<SegmentKind>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LoadedDomain {
    Circle(CircleDomain<f64>),
    Blocked(BlockedCircleDomain<f64>),
    Disk(OffCenterDisk<f64>),
}

impl LoadedDomain {
    pub fn outer_radius(&self) -> f64 {
        match self {
            LoadedDomain::Circle(x) => *x.radii().last().unwrap(),
            LoadedDomain::Blocked(o) => *o.base().radii().last().unwrap(),
            LoadedDomain::Disk(d) => d.center.norm() + d.radius,
        }
    }

    /// Boundary radii of circle domains, the extreme moduli of a disk.
    pub fn natural_radii(&self) -> Vec<f64> {
        match self {
            LoadedDomain::Circle(x) => x.radii().to_vec(),
            LoadedDomain::Blocked(o) => o.base().radii().to_vec(),
            LoadedDomain::Disk(d) => vec![d.radius - d.center.norm(), d.radius + d.center.norm()],
        }
    }
}

impl DomainFile {
    pub fn from_circle(x: &CircleDomain<f64>) -> Self {
        DomainFile { radii: Some(x.radii().to_vec()), psi: Some(x.psi().to_vec()), ..Default::default() }
    }

    pub fn from_blocked(o: &BlockedCircleDomain<f64>) -> Self {
        DomainFile { phi: Some(o.gate_angles().to_vec()), ..DomainFile::from_circle(o.base()) }
    }

    pub fn into_domain(self) -> CliResult<LoadedDomain> {
        match (self.radii, self.psi, self.center, self.radius) {
            (Some(radii), Some(psi), None, None) => {
                let x = CircleDomain::new(radii, psi)?;
                match self.phi {
                    Some(phi) => Ok(LoadedDomain::Blocked(BlockedCircleDomain::new(x, phi)?)),
                    None => Ok(LoadedDomain::Circle(x)),
                }
            }
            (None, None, Some([a, b]), Some(r)) if self.phi.is_none() => {
                Ok(LoadedDomain::Disk(OffCenterDisk::new(Complex::new(a, b), r)?))
            }
            _ => Err(CliError::input("domain file needs radii and psi (and optionally phi), or center and radius")),
        }
    }
}

impl StepFile {
    pub fn into_steps(self) -> CliResult<StepH<f64>> {
        Ok(StepH::new(self.radii, self.values)?)
    }
}

impl FunctionFile {
    pub fn into_function(self) -> CliResult<CandidateH<f64>> {
        Ok(CandidateH::new(self.breakpoints, self.values, self.kinds)?)
    }
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> CliResult<T> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

pub fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

/// Seventeen significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Serializes a header and rows with the `csv` writer.
pub fn csv_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

pub fn write_out(dir: &Path, name: &str, contents: &str) -> CliResult<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(name), contents)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn domain_files_round_trip() {
        let x = CircleDomain::new(vec![1.0, 2.0], vec![0.3, std::f64::consts::PI]).unwrap();
        let f = DomainFile::from_circle(&x);
        let back: DomainFile = serde_json::from_str(&to_json(&f)).unwrap();
        assert_eq!(back.into_domain().unwrap(), LoadedDomain::Circle(x));
        let o = BlockedCircleDomain::new(
            CircleDomain::new(vec![1.0, 2.0], vec![0.3, std::f64::consts::PI]).unwrap(),
            vec![0.1],
        )
        .unwrap();
        let back: DomainFile = serde_json::from_str(&to_json(&DomainFile::from_blocked(&o))).unwrap();
        assert_eq!(back.into_domain().unwrap(), LoadedDomain::Blocked(o));
    }

    #[test]
    fn disk_and_mixed_files() {
        let d: DomainFile = serde_json::from_str(r#"{"center": [0.5, 0], "radius": 1}"#).unwrap();
        assert!(matches!(d.into_domain().unwrap(), LoadedDomain::Disk(_)));
        let bad: DomainFile = serde_json::from_str(r#"{"center": [0.5, 0], "radius": 1, "psi": [1]}"#).unwrap();
        assert_eq!(bad.into_domain().unwrap_err().code, 2);
    }

    #[test]
    fn numbers_keep_full_precision() {
        let x = 0.1f64 + 0.2;
        assert_eq!(num(x).parse::<f64>().unwrap(), x);
        assert_eq!(csv_table(&["a", "b"], &[vec!["1".into(), "2".into()]]), "a,b\n1,2\n");
    }
}
