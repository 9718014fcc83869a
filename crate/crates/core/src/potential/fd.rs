//! Finite volume Dirichlet solver on a log-polar grid.
//!
//! In `s = ln|z|` the Laplacian is `u_ss + u_θθ`, so circles and rays are
//! coordinate lines. The grid is cell centred in `θ` on the upper half plane
//! (`θ_j = (j + ½)Δθ`, mirror conditions at `0` and `π`), every boundary
//! radius is a grid circle, and the origin is one extra node coupled to the
//! innermost ring. Arc tips, gates and curved boundaries between nodes use
//! cut cells: the link to the boundary keeps the cell face but uses the true
//! distance, which keeps the matrix symmetric and makes the solution depend
//! continuously on the boundary angles.
//!
//! Instead of one solve per boundary value, the solver computes the
//! discrete harmonic measure once: with `A y = e_origin`, the value at the
//! origin for boundary data `g` is `Σ y_P c_P g_P` over boundary links.

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::{Llt, SymbolicLlt};
use faer::sparse::{Argsort, Pair, SparseColMat, SymbolicSparseColMat};
use faer::{Mat, Side};

use super::{HFunctionTable, MeasureEstimate, Method, Target};
use crate::error::{Error, Result};
use crate::geometry::{BlockedCircleDomain, CircleDomain, FeatureKind, OffCenterDisk};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdConfig {
    /// Angular nodes on the full circle; the solver stores half of them.
    pub angular_nodes: usize,
    /// Minimum number of radial cells between consecutive boundary radii.
    pub min_cells_per_gap: usize,
    /// Log-radius covered by the stretched rings inside the innermost boundary.
    pub inner_extent: f64,
    pub inner_growth: f64,
}

impl Default for FdConfig {
    fn default() -> Self {
        FdConfig { angular_nodes: 512, min_cells_per_gap: 4, inner_extent: 4.0, inner_growth: 1.15 }
    }
}

impl FdConfig {
    /// Twice the resolution in every direction.
    pub fn refined(&self) -> Self {
        FdConfig {
            angular_nodes: 2 * self.angular_nodes,
            min_cells_per_gap: 2 * self.min_cells_per_gap,
            inner_growth: 1.0 + (self.inner_growth - 1.0) / 2.0,
            ..*self
        }
    }
}

/// Boundary geometry understood by the solver.
#[derive(Debug, Clone, PartialEq)]
pub enum FdLayout {
    /// Concentric arcs, optionally with gates.
    Circles { radii: Vec<f64>, psi: Vec<f64>, phi: Option<Vec<f64>> },
    /// `B(a, R)` with the centre rotated onto the positive real axis.
    Disk { center: f64, radius: f64 },
}

impl From<&CircleDomain<f64>> for FdLayout {
    fn from(d: &CircleDomain<f64>) -> Self {
        FdLayout::Circles { radii: d.radii().to_vec(), psi: d.psi().to_vec(), phi: None }
    }
}

impl From<&BlockedCircleDomain<f64>> for FdLayout {
    fn from(d: &BlockedCircleDomain<f64>) -> Self {
        FdLayout::Circles {
            radii: d.base().radii().to_vec(),
            psi: d.base().psi().to_vec(),
            phi: Some(d.gate_angles().to_vec()),
        }
    }
}

impl From<&OffCenterDisk<f64>> for FdLayout {
    fn from(d: &OffCenterDisk<f64>) -> Self {
        FdLayout::Disk { center: d.center.norm(), radius: d.radius }
    }
}

impl FdLayout {
    /// Radii the grid must contain as rings.
    fn key(&self) -> GridKey {
        match self {
            FdLayout::Circles { radii, .. } => GridKey::Circles(radii.clone()),
            FdLayout::Disk { center, radius } => GridKey::Disk(*center, *radius),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum GridKey {
    Circles(Vec<f64>),
    Disk(f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Ring {
    Inner,
    Arc(usize),
    Channel(usize),
}

#[derive(Debug, Clone)]
struct Grid {
    rho: Vec<f64>,
    s: Vec<f64>,
    role: Vec<Ring>,
    theta: Vec<f64>,
    dtheta: f64,
}

impl Grid {
    fn nodes(&self) -> usize {
        1 + self.rho.len() * self.theta.len()
    }

    fn idx(&self, i: usize, j: usize) -> usize {
        1 + i * self.theta.len() + j
    }
}

/// Rings placed inward from `s_top` with steps growing from `h0` by `growth`.
fn inner_rings(s_top: f64, h0: f64, growth: f64, extent: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut s = s_top;
    let mut h = h0;
    while s_top - s < extent {
        s -= h;
        out.push(s);
        h *= growth;
    }
    out.reverse();
    out
}

fn build_grid(key: &GridKey, cfg: &FdConfig) -> Result<Grid> {
    if cfg.angular_nodes < 8 || cfg.angular_nodes & 1 == 1 || cfg.min_cells_per_gap == 0 {
        return Err(Error::OutOfRange("need an even angular node count >= 8".into()));
    }
    let half = cfg.angular_nodes / 2;
    let dtheta = std::f64::consts::PI / half as f64;
    let theta = (0..half).map(|j| (j as f64 + 0.5) * dtheta).collect();
    let mut s = Vec::new();
    let mut role = Vec::new();
    let mut rho = Vec::new();
    match key {
        GridKey::Circles(radii) => {
            let ls: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
            let gap = |k: usize| {
                let w = ls[k + 1] - ls[k];
                let m = ((w / dtheta).ceil() as usize).max(cfg.min_cells_per_gap);
                (m, w / m as f64)
            };
            let h0 = if radii.len() > 1 { gap(0).1 } else { dtheta };
            for x in inner_rings(ls[0], h0, cfg.inner_growth, cfg.inner_extent) {
                s.push(x);
                rho.push(x.exp());
                role.push(Ring::Inner);
            }
            for k in 0..radii.len() {
                s.push(ls[k]);
                rho.push(radii[k]);
                role.push(Ring::Arc(k));
                if k + 1 < radii.len() {
                    let (m, h) = gap(k);
                    for q in 1..m {
                        let x = ls[k] + h * q as f64;
                        s.push(x);
                        rho.push(x.exp());
                        role.push(Ring::Channel(k));
                    }
                }
            }
        }
        GridKey::Disk(a, big_r) => {
            let (lo, hi) = ((big_r - a).ln(), (big_r + a).ln());
            let m = (((hi - lo) / dtheta).ceil() as usize).max(1);
            let h = if hi > lo { (hi - lo) / m as f64 } else { dtheta };
            for x in inner_rings(lo, h, cfg.inner_growth, cfg.inner_extent) {
                s.push(x);
                rho.push(x.exp());
                role.push(Ring::Inner);
            }
            for q in 0..=m {
                let x = if q == m { hi } else { lo + h * q as f64 };
                if q > 0 && x <= *s.last().unwrap() {
                    continue;
                }
                s.push(x);
                rho.push(if q == m { big_r + a } else { x.exp() });
                role.push(Ring::Inner);
            }
        }
    }
    Ok(Grid { rho, s, role, theta, dtheta })
}

/// A boundary link: distance, feature and modulus of the boundary point.
type Cut = (f64, FeatureKind, usize, f64);

struct Classifier<'a> {
    layout: &'a FdLayout,
    grid: &'a Grid,
}

impl Classifier<'_> {
    fn disk_boundary(a: f64, big_r: f64, t: f64) -> f64 {
        let st = t.sin();
        a * t.cos() + (big_r * big_r - a * a * st * st).sqrt()
    }

    fn free(&self, i: usize, j: usize) -> bool {
        let th = self.grid.theta[j];
        match self.layout {
            FdLayout::Circles { psi, phi, .. } => match self.grid.role[i] {
                Ring::Inner => true,
                Ring::Arc(k) => k + 1 < psi.len() && th > psi[k],
                Ring::Channel(k) => phi.as_ref().is_none_or(|p| th > p[k]),
            },
            FdLayout::Disk { center, radius } => {
                self.grid.rho[i] < Self::disk_boundary(*center, *radius, th)
            }
        }
    }

    fn radial_cut(&self, i: usize, j: usize, outward: bool) -> Result<Cut> {
        let g = self.grid;
        match self.layout {
            FdLayout::Circles { radii, .. } => {
                let nb = if outward { i + 1 } else { i - 1 };
                let d = (g.s[nb] - g.s[i]).abs();
                match g.role[nb] {
                    Ring::Arc(k) if k + 1 == radii.len() => Ok((d, FeatureKind::OuterCircle, k, radii[k])),
                    Ring::Arc(k) => Ok((d, FeatureKind::Arc, k, radii[k])),
                    _ => Err(Error::Engine("radial link into a pocket".into())),
                }
            }
            FdLayout::Disk { center, radius } => {
                if !outward {
                    return Err(Error::Engine("disk boundary below a free node".into()));
                }
                let rb = Self::disk_boundary(*center, *radius, g.theta[j]);
                Ok((rb.ln() - g.s[i], FeatureKind::OuterCircle, 0, rb))
            }
        }
    }

    fn angular_cut(&self, i: usize, j: usize, up: bool) -> Result<Cut> {
        let g = self.grid;
        let th = g.theta[j];
        match self.layout {
            FdLayout::Circles { radii, psi, phi } => {
                if up {
                    return Err(Error::Engine("boundary above a free node".into()));
                }
                match (g.role[i], phi) {
                    (Ring::Arc(k), _) => Ok((th - psi[k], FeatureKind::Arc, k, radii[k])),
                    (Ring::Channel(k), Some(p)) => Ok((th - p[k], FeatureKind::Gate, k, g.rho[i])),
                    _ => Err(Error::Engine("angular link into the boundary".into())),
                }
            }
            FdLayout::Disk { center, radius } => {
                if !up {
                    return Err(Error::Engine("disk boundary below a free node".into()));
                }
                let r = g.rho[i];
                let c = (r * r + center * center - radius * radius) / (2.0 * center * r);
                let tc = c.clamp(-1.0, 1.0).acos().clamp(th, th + g.dtheta);
                Ok((tc - th, FeatureKind::OuterCircle, 0, r))
            }
        }
    }

    /// Boundary crossed between `θ_0` and its mirror image `−θ_0`.
    fn axis_cut(&self, i: usize) -> Option<Cut> {
        let g = self.grid;
        let th = g.theta[0];
        match self.layout {
            FdLayout::Circles { radii, psi, phi } => match (g.role[i], phi) {
                (Ring::Arc(k), _) if psi[k] > 0.0 => Some((th - psi[k], FeatureKind::Arc, k, radii[k])),
                (Ring::Arc(k), Some(_)) => Some((th, FeatureKind::Gate, k.min(radii.len() - 2), radii[k])),
                (Ring::Channel(k), Some(p)) => Some((th - p[k], FeatureKind::Gate, k, g.rho[i])),
                _ => None,
            },
            FdLayout::Disk { .. } => None,
        }
    }
}

/// Coefficients of the assembled system.
struct System {
    free: Vec<bool>,
    diag: Vec<f64>,
    /// Coupling from node `(i, j)` to `(i + 1, j)`.
    east: Vec<f64>,
    /// Coupling from node `(i, j)` to `(i, j + 1)`.
    north: Vec<f64>,
    /// Coupling from the origin to `(0, j)`.
    origin: Vec<f64>,
    cuts: Vec<(usize, f64, FeatureKind, usize, f64)>,
}

fn assemble(layout: &FdLayout, grid: &Grid) -> Result<System> {
    let cls = Classifier { layout, grid };
    let nr = grid.rho.len();
    let nt = grid.theta.len();
    let n = grid.nodes();
    let dt = grid.dtheta;
    let floor_t = 1e-9 * dt;
    let mut free = vec![false; n];
    free[0] = true;
    for i in 0..nr {
        for j in 0..nt {
            free[grid.idx(i, j)] = cls.free(i, j);
        }
    }
    let mut sys = System {
        diag: vec![0.0; n],
        east: vec![0.0; n],
        north: vec![0.0; n],
        origin: vec![0.0; nt],
        cuts: Vec::new(),
        free,
    };
    let c0 = dt / 2.0;
    for i in 0..nr {
        if i + 1 == nr {
            if (0..nt).any(|j| sys.free[grid.idx(i, j)]) {
                return Err(Error::Engine("outermost ring is not boundary".into()));
            }
            break;
        }
        let hp = grid.s[i + 1] - grid.s[i];
        let (hm, width) = if i == 0 {
            (f64::NAN, std::f64::consts::LN_2 + hp / 2.0)
        } else {
            let hm = grid.s[i] - grid.s[i - 1];
            (hm, (hm + hp) / 2.0)
        };
        let floor_s = 1e-9 * hp;
        for j in 0..nt {
            let p = grid.idx(i, j);
            if !sys.free[p] {
                continue;
            }
            let mut diag = 0.0;
            let cut = |sys: &mut System, c: Cut, coef_of: &dyn Fn(f64) -> f64| {
                let w = coef_of(c.0);
                sys.cuts.push((p, w, c.1, c.2, c.3));
                w
            };
            // outward
            if sys.free[grid.idx(i + 1, j)] {
                sys.east[p] = dt / hp;
                diag += dt / hp;
            } else {
                diag += cut(&mut sys, cls.radial_cut(i, j, true)?, &|d| dt / d.max(floor_s));
            }
            // inward
            if i == 0 {
                sys.origin[j] = c0;
                diag += c0;
            } else if sys.free[grid.idx(i - 1, j)] {
                diag += dt / hm;
            } else {
                diag += cut(&mut sys, cls.radial_cut(i, j, false)?, &|d| dt / d.max(floor_s));
            }
            // increasing angle
            if j + 1 < nt {
                if sys.free[grid.idx(i, j + 1)] {
                    sys.north[p] = width / dt;
                    diag += width / dt;
                } else {
                    diag += cut(&mut sys, cls.angular_cut(i, j, true)?, &|d| width / d.max(floor_t));
                }
            }
            // decreasing angle
            if j > 0 {
                if sys.free[grid.idx(i, j - 1)] {
                    diag += width / dt;
                } else {
                    diag += cut(&mut sys, cls.angular_cut(i, j, false)?, &|d| width / d.max(floor_t));
                }
            } else if let Some(c) = cls.axis_cut(i) {
                diag += cut(&mut sys, c, &|d| width / d.max(floor_t));
            }
            sys.diag[p] = diag;
        }
    }
    sys.diag[0] = sys.origin.iter().sum();
    Ok(sys)
}

/// Discrete harmonic measure from the origin, as weighted boundary points.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryMeasure {
    pub kinds: Vec<FeatureKind>,
    pub indices: Vec<usize>,
    pub moduli: Vec<f64>,
    pub weights: Vec<f64>,
    /// Max-norm residual of the linear solve.
    pub residual: f64,
    pub angular_nodes: usize,
}

impl BoundaryMeasure {
    fn estimate(&self, value: f64) -> MeasureEstimate {
        MeasureEstimate {
            value,
            std_error: 0.0,
            method: Method::Fd,
            samples: self.angular_nodes,
            discards: 0,
        }
    }

    pub fn measure(&self, target: &Target) -> MeasureEstimate {
        let v = (0..self.weights.len())
            .filter(|&q| target.matches(self.kinds[q], self.indices[q], self.moduli[q]))
            .map(|q| self.weights[q])
            .sum();
        self.estimate(v)
    }

    /// Measure of boundary points with modulus at most each radius.
    pub fn h_table(&self, radii: &[f64]) -> HFunctionTable {
        let mut order: Vec<usize> = (0..self.weights.len()).collect();
        order.sort_by(|&a, &b| self.moduli[a].total_cmp(&self.moduli[b]));
        let mut cum = Vec::with_capacity(order.len());
        let mut acc = 0.0;
        for &q in &order {
            acc += self.weights[q];
            cum.push(acc);
        }
        let estimates = radii
            .iter()
            .map(|&r| {
                let k = order.partition_point(|&q| self.moduli[q] <= r);
                self.estimate(if k == 0 { 0.0 } else { cum[k - 1] })
            })
            .collect();
        HFunctionTable { radii: radii.to_vec(), estimates }
    }

    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// Grid and symbolic factorization for a fixed set of boundary radii, reused
/// across changes of arc and gate angles.
pub struct FdSolver {
    key: GridKey,
    cfg: FdConfig,
    grid: Grid,
    pattern: Vec<(usize, usize)>,
    symbolic: SymbolicSparseColMat<usize>,
    argsort: Argsort<usize>,
    llt: SymbolicLlt<usize>,
}

impl FdSolver {
    pub fn new(layout: &FdLayout, cfg: &FdConfig) -> Result<Self> {
        check_layout(layout)?;
        let key = layout.key();
        let grid = build_grid(&key, cfg)?;
        let nr = grid.rho.len();
        let nt = grid.theta.len();
        let n = grid.nodes();
        let mut pattern = Vec::with_capacity(4 * n);
        pattern.push((0, 0));
        for j in 0..nt {
            pattern.push((grid.idx(0, j), 0));
        }
        for i in 0..nr {
            for j in 0..nt {
                let p = grid.idx(i, j);
                pattern.push((p, p));
                if i + 1 < nr {
                    pattern.push((grid.idx(i + 1, j), p));
                }
                if j + 1 < nt {
                    pattern.push((grid.idx(i, j + 1), p));
                }
            }
        }
        let pairs: Vec<Pair<usize, usize>> = pattern.iter().map(|&(row, col)| Pair { row, col }).collect();
        let (symbolic, argsort) = SymbolicSparseColMat::try_new_from_indices(n, n, &pairs)
            .map_err(|e| Error::Engine(format!("sparse pattern: {e:?}")))?;
        let llt = SymbolicLlt::try_new(symbolic.as_ref(), Side::Lower)
            .map_err(|e| Error::Engine(format!("symbolic factorization: {e:?}")))?;
        Ok(FdSolver { key, cfg: *cfg, grid, pattern, symbolic, argsort, llt })
    }

    pub fn config(&self) -> &FdConfig {
        &self.cfg
    }

    pub fn unknowns(&self) -> usize {
        self.grid.nodes()
    }

    /// Whether `layout` can reuse this grid.
    pub fn accepts(&self, layout: &FdLayout) -> bool {
        self.key == layout.key()
    }

    pub fn solve(&self, layout: &FdLayout) -> Result<BoundaryMeasure> {
        if !self.accepts(layout) {
            return Err(Error::Engine("layout radii differ from the solver grid".into()));
        }
        check_layout(layout)?;
        let g = &self.grid;
        let sys = assemble(layout, g)?;
        let nt = g.theta.len();
        let values: Vec<f64> = self
            .pattern
            .iter()
            .map(|&(row, col)| {
                if row == col {
                    if sys.free[row] {
                        sys.diag[row]
                    } else {
                        1.0
                    }
                } else if !(sys.free[row] && sys.free[col]) {
                    0.0
                } else if col == 0 {
                    -sys.origin[row - 1]
                } else if row == col + 1 && (col - 1) % nt + 1 < nt {
                    -sys.north[col]
                } else {
                    -sys.east[col]
                }
            })
            .collect();
        let mat = SparseColMat::new_from_argsort(self.symbolic.clone(), &self.argsort, &values)
            .map_err(|e| Error::Engine(format!("matrix assembly: {e:?}")))?;
        let llt = Llt::try_new_with_symbolic(self.llt.clone(), mat.as_ref(), Side::Lower)
            .map_err(|e| Error::Engine(format!("factorization: {e:?}")))?;
        let n = g.nodes();
        let mut rhs = Mat::<f64>::zeros(n, 1);
        rhs[(0, 0)] = 1.0;
        let mut y = llt.solve(&rhs);
        let mut residual = f64::INFINITY;
        for _ in 0..3 {
            let r = self.residual(&sys, &y);
            residual = r.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            if residual <= 1e-12 * sys.diag[0] {
                break;
            }
            let mut corr = Mat::<f64>::zeros(n, 1);
            for (q, v) in r.iter().enumerate() {
                corr[(q, 0)] = -v;
            }
            let dy = llt.solve(&corr);
            for q in 0..n {
                y[(q, 0)] += dy[(q, 0)];
            }
        }
        let m = sys.cuts.len();
        let mut out = BoundaryMeasure {
            kinds: Vec::with_capacity(m),
            indices: Vec::with_capacity(m),
            moduli: Vec::with_capacity(m),
            weights: Vec::with_capacity(m),
            residual,
            angular_nodes: self.cfg.angular_nodes,
        };
        for &(p, w, kind, index, modulus) in &sys.cuts {
            out.kinds.push(kind);
            out.indices.push(index);
            out.moduli.push(modulus);
            out.weights.push(y[(p, 0)] * w);
        }
        Ok(out)
    }

    /// `A y − e_origin`, applied matrix free.
    fn residual(&self, sys: &System, y: &Mat<f64>) -> Vec<f64> {
        let g = &self.grid;
        let nt = g.theta.len();
        let nr = g.rho.len();
        let mut r = vec![0.0; g.nodes()];
        for q in 0..g.nodes() {
            r[q] = if sys.free[q] { sys.diag[q] } else { 1.0 } * y[(q, 0)];
        }
        r[0] -= 1.0;
        let couple = |a: usize, b: usize, c: f64, r: &mut Vec<f64>| {
            if c != 0.0 && sys.free[a] && sys.free[b] {
                r[a] -= c * y[(b, 0)];
                r[b] -= c * y[(a, 0)];
            }
        };
        for j in 0..nt {
            couple(0, g.idx(0, j), sys.origin[j], &mut r);
        }
        for i in 0..nr {
            for j in 0..nt {
                let p = g.idx(i, j);
                if i + 1 < nr {
                    couple(p, g.idx(i + 1, j), sys.east[p], &mut r);
                }
                if j + 1 < nt {
                    couple(p, g.idx(i, j + 1), sys.north[p], &mut r);
                }
            }
        }
        r
    }
}

fn check_layout(layout: &FdLayout) -> Result<()> {
    match layout {
        FdLayout::Circles { radii, psi, phi } => {
            let v = crate::geometry::validate(radii, psi, phi.as_deref());
            if !v.is_valid() {
                return Err(Error::InvalidDomain(
                    v.violations.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; "),
                ));
            }
        }
        FdLayout::Disk { center, radius } => {
            if !(*center >= 0.0 && center < radius && radius.is_finite()) {
                return Err(Error::InvalidDomain("need 0 <= a < R".into()));
            }
        }
    }
    Ok(())
}

/// Harmonic measure from the origin of each target, by one grid solve.
pub fn fd_harmonic_measure(layout: &FdLayout, targets: &[Target], cfg: &FdConfig) -> Result<Vec<MeasureEstimate>> {
    let m = FdSolver::new(layout, cfg)?.solve(layout)?;
    Ok(targets.iter().map(|t| m.measure(t)).collect())
}

/// Values at `cfg` and at the refined grid; the error estimate is the
/// difference between the two.
pub fn fd_with_error(layout: &FdLayout, targets: &[Target], cfg: &FdConfig) -> Result<Vec<(MeasureEstimate, f64)>> {
    let coarse = fd_harmonic_measure(layout, targets, cfg)?;
    let fine = fd_harmonic_measure(layout, targets, &cfg.refined())?;
    Ok(fine.into_iter().zip(coarse).map(|(f, c)| (f, (f.value - c.value).abs())).collect())
}
