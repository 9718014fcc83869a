//! Harmonic measure engines: walk-on-spheres, a log-polar finite volume
//! solver and closed-form oracles.

pub mod exact;
pub mod fd;
pub mod wos;

use serde::Serialize;

use crate::geometry::FeatureKind;

pub use exact::{beurling_lower_bound, exact_offcenter_disk_h, exact_slit_disk_gate};
pub use fd::{fd_harmonic_measure, fd_with_error, BoundaryMeasure, FdConfig, FdLayout, FdSolver};
pub use wos::{estimate_h, wos_ensemble, wos_exit_sample, Exit, ExitEnsemble, WosConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Wos,
    Fd,
    Exact,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Wos => "wos",
            Method::Fd => "fd",
            Method::Exact => "exact",
        }
    }
}

/// A harmonic measure value with its error and provenance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeasureEstimate {
    pub value: f64,
    /// Binomial standard error for walk-on-spheres, zero otherwise.
    pub std_error: f64,
    pub method: Method,
    /// Completed walks, or angular nodes on the full circle for `Fd`.
    pub samples: usize,
    /// Walks stopped by the step cap.
    pub discards: usize,
}

impl MeasureEstimate {
    pub fn exact(value: f64) -> Self {
        MeasureEstimate { value, std_error: 0.0, method: Method::Exact, samples: 0, discards: 0 }
    }
}

/// A boundary subset whose harmonic measure is requested.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Target {
    Feature { kind: FeatureKind, index: usize },
    /// All boundary points of modulus at most the given radius.
    ModulusAtMost(f64),
}

impl Target {
    pub fn matches(&self, kind: FeatureKind, index: usize, modulus: f64) -> bool {
        match *self {
            Target::Feature { kind: k, index: i } => k == kind && i == index,
            Target::ModulusAtMost(r) => modulus <= r,
        }
    }
}

/// Tabulated h-function.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HFunctionTable {
    pub radii: Vec<f64>,
    pub estimates: Vec<MeasureEstimate>,
}

impl HFunctionTable {
    pub fn values(&self) -> Vec<f64> {
        self.estimates.iter().map(|e| e.value).collect()
    }

    pub fn value_at(&self, r: f64) -> Option<MeasureEstimate> {
        self.radii.iter().position(|&x| x == r).map(|i| self.estimates[i])
    }
}
