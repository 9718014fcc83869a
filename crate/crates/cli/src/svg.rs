//! Plain SVG output. Coordinates are printed with fixed precision so the
//! bytes depend only on the input.

use std::f64::consts::PI;
use std::fmt::Write;

use num_complex::Complex;

use crate::io::LoadedDomain;

const SIZE: f64 = 480.0;
const HALF: f64 = SIZE / 2.0;

fn header(w: f64, h: f64) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w:.0}\" height=\"{h:.0}\" viewBox=\"0 0 {w:.0} {h:.0}\">\n\
         <rect width=\"{w:.0}\" height=\"{h:.0}\" fill=\"white\"/>\n"
    )
}

struct Frame {
    scale: f64,
}

impl Frame {
    fn at(&self, r: f64, t: f64) -> (f64, f64) {
        (HALF + self.scale * r * t.cos(), HALF - self.scale * r * t.sin())
    }
}

fn arc(out: &mut String, fr: &Frame, r: f64, psi: f64) {
    if psi <= 0.0 {
        let (x, y) = fr.at(r, 0.0);
        let _ = writeln!(out, "<circle cx=\"{x:.3}\" cy=\"{y:.3}\" r=\"2\" fill=\"black\"/>");
    } else if psi >= PI {
        let _ = writeln!(
            out,
            "<circle cx=\"{HALF:.3}\" cy=\"{HALF:.3}\" r=\"{:.3}\" fill=\"none\" stroke=\"black\" stroke-width=\"1.5\"/>",
            fr.scale * r
        );
    } else {
        let (x0, y0) = fr.at(r, -psi);
        let (x1, y1) = fr.at(r, psi);
        let large = u8::from(2.0 * psi > PI);
        let _ = writeln!(
            out,
            "<path d=\"M {x0:.3} {y0:.3} A {rr:.3} {rr:.3} 0 {large} 0 {x1:.3} {y1:.3}\" fill=\"none\" stroke=\"black\" stroke-width=\"1.5\"/>",
            rr = fr.scale * r
        );
    }
}

fn segment(out: &mut String, a: (f64, f64), b: (f64, f64), color: &str) {
    let _ = writeln!(
        out,
        "<line x1=\"{:.3}\" y1=\"{:.3}\" x2=\"{:.3}\" y2=\"{:.3}\" stroke=\"{color}\" stroke-width=\"1.5\"/>",
        a.0, a.1, b.0, b.1
    );
}

/// Arcs in black, gates in red, the base point `0` in blue.
pub fn domain_svg(d: &LoadedDomain) -> String {
    let fr = Frame { scale: (HALF - 20.0) / d.outer_radius() };
    let mut out = header(SIZE, SIZE);
    match d {
        LoadedDomain::Circle(x) => {
            for (r, p) in x.radii().iter().zip(x.psi()) {
                arc(&mut out, &fr, *r, *p);
            }
        }
        LoadedDomain::Blocked(o) => {
            let x = o.base();
            for (r, p) in x.radii().iter().zip(x.psi()) {
                arc(&mut out, &fr, *r, *p);
            }
            for (k, &phi) in o.gate_angles().iter().enumerate() {
                let (r0, r1) = (x.radii()[k], x.radii()[k + 1]);
                segment(&mut out, fr.at(r0, phi), fr.at(r1, phi), "red");
                if phi > 0.0 {
                    segment(&mut out, fr.at(r0, -phi), fr.at(r1, -phi), "red");
                }
            }
        }
        LoadedDomain::Disk(disk) => {
            let _ = writeln!(
                out,
                "<circle cx=\"{:.3}\" cy=\"{:.3}\" r=\"{:.3}\" fill=\"none\" stroke=\"black\" stroke-width=\"1.5\"/>",
                HALF + fr.scale * disk.center.re,
                HALF - fr.scale * disk.center.im,
                fr.scale * disk.radius
            );
        }
    }
    let _ = writeln!(out, "<circle cx=\"{HALF:.3}\" cy=\"{HALF:.3}\" r=\"3\" fill=\"blue\"/>");
    out.push_str("</svg>\n");
    out
}

/// Closed boundary curve through `points`.
pub fn curve_svg(points: &[Complex<f64>]) -> String {
    let m = points.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let fr = Frame { scale: (HALF - 20.0) / m };
    let mut out = header(SIZE, SIZE);
    let mut d = String::new();
    for (i, z) in points.iter().enumerate() {
        let _ = write!(d, "{}{:.3} {:.3} ", if i == 0 { "M " } else { "L " }, HALF + fr.scale * z.re, HALF - fr.scale * z.im);
    }
    d.push('Z');
    let _ = writeln!(out, "<path d=\"{d}\" fill=\"none\" stroke=\"black\" stroke-width=\"1.5\"/>");
    let _ = writeln!(out, "<circle cx=\"{HALF:.3}\" cy=\"{HALF:.3}\" r=\"3\" fill=\"blue\"/>");
    out.push_str("</svg>\n");
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Style {
    Line,
    Dots,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub color: &'static str,
    pub style: Style,
    pub points: Vec<(f64, f64)>,
}

const PW: f64 = 560.0;
const PH: f64 = 400.0;
const LEFT: f64 = 60.0;
const BOTTOM: f64 = 40.0;
const TOP: f64 = 20.0;
const RIGHT: f64 = 140.0;

/// Plot of functions of `r` with values in `[0, 1]`.
pub fn plot_svg(x_range: (f64, f64), series: &[Series]) -> String {
    let (x0, x1) = x_range;
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * (PW - LEFT - RIGHT);
    let sy = |y: f64| PH - BOTTOM - y * (PH - BOTTOM - TOP);
    let mut out = header(PW, PH);
    segment(&mut out, (sx(x0), sy(0.0)), (sx(x1), sy(0.0)), "black");
    segment(&mut out, (sx(x0), sy(0.0)), (sx(x0), sy(1.0)), "black");
    for i in 0..=4 {
        let t = i as f64 / 4.0;
        let x = x0 + t * (x1 - x0);
        let _ = writeln!(
            out,
            "<text x=\"{:.3}\" y=\"{:.3}\" font-size=\"11\" text-anchor=\"middle\">{x:.4}</text>",
            sx(x),
            PH - BOTTOM + 16.0
        );
        let _ = writeln!(
            out,
            "<text x=\"{:.3}\" y=\"{:.3}\" font-size=\"11\" text-anchor=\"end\">{t:.2}</text>",
            LEFT - 6.0,
            sy(t) + 4.0
        );
    }
    for (i, s) in series.iter().enumerate() {
        match s.style {
            Style::Line => {
                let pts: Vec<String> = s.points.iter().map(|&(x, y)| format!("{:.3},{:.3}", sx(x), sy(y))).collect();
                let _ = writeln!(
                    out,
                    "<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"/>",
                    pts.join(" "),
                    s.color
                );
            }
            Style::Dots => {
                for &(x, y) in &s.points {
                    let _ = writeln!(out, "<circle cx=\"{:.3}\" cy=\"{:.3}\" r=\"2.5\" fill=\"{}\"/>", sx(x), sy(y), s.color);
                }
            }
        }
        let ly = TOP + 16.0 * i as f64 + 8.0;
        segment(&mut out, (PW - RIGHT + 12.0, ly), (PW - RIGHT + 30.0, ly), s.color);
        let _ = writeln!(out, "<text x=\"{:.3}\" y=\"{:.3}\" font-size=\"11\">{}</text>", PW - RIGHT + 36.0, ly + 4.0, s.label);
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use hmdf::geometry::{BlockedCircleDomain, CircleDomain};

    fn blocked(phi: Vec<f64>) -> LoadedDomain {
        let x = CircleDomain::new(vec![1.0, 1.5, 2.0], vec![1.0, 2.0, PI]).unwrap();
        LoadedDomain::Blocked(BlockedCircleDomain::new(x, phi).unwrap())
    }

    #[test]
    fn arcs_and_gates() {
        let s = domain_svg(&blocked(vec![0.5, 0.0]));
        assert_eq!(s.matches("<path").count(), 2);
        assert_eq!(s.matches("stroke=\"red\"").count(), 3);
        assert!(s.ends_with("</svg>\n"));
        assert_eq!(s, domain_svg(&blocked(vec![0.5, 0.0])));
    }

    #[test]
    fn circle_domains_have_no_gates() {
        let x = CircleDomain::new(vec![1.0, 2.0], vec![0.0, PI]).unwrap();
        let s = domain_svg(&LoadedDomain::Circle(x));
        assert!(!s.contains("red"));
        assert!(s.contains("r=\"2\" fill=\"black\""));
    }

    #[test]
    fn arc_orientation() {
        // the arc of half angle 1 at radius 1 starts below the axis
        let fr = Frame { scale: 100.0 };
        let mut s = String::new();
        arc(&mut s, &fr, 1.0, 1.0);
        let (x0, y0) = fr.at(1.0, -1.0);
        assert!(y0 > HALF);
        assert!(s.contains(&format!("M {x0:.3} {y0:.3} A 100.000 100.000 0 0 0")));
    }
}
