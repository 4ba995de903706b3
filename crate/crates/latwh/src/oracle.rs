//! Reference solutions of the canonical lattice scattering problems by
//! direct sparse solves on truncated domains.
//!
//! Each problem is reduced to a finite linear system for the scattered
//! field: Dirichlet screens use the even reflection symmetry and solve the
//! upper half only, the sound-hard half-plane uses the odd symmetry, the
//! staggered waveguide is solved on the full plane slit along the plates
//! (plate nodes carry independent upper- and lower-face values), and the
//! quarter-plane solves the upper half-space in three dimensions. Spectral
//! functions of the corresponding functional equation are then read off by
//! summing rows of the solution.

use std::collections::BTreeMap;

use latwh_core::catalog::{CatalogError, ProblemKind, ProblemSpec, SpectralPoint};
use latwh_core::dispersion::{q_physical, q_physical_3d, DispersionError};
use latwh_core::lattice::{planar_derivative, straight_line_derivative, Field, Node};
use latwh_core::C;

/// Errors from oracle assembly, solving, or spectra extraction.
#[derive(Clone, Debug)]
pub enum OracleError {
    /// The problem kind or side has no oracle.
    Unsupported,
    /// Nonsensical radii or tolerances.
    InvalidConfig,
    /// The iterative solver stalled above the target residual.
    NotConverged { residual: f64 },
    /// A field value needed for a spectral sum is missing.
    MissingValue(Node),
    Dispersion(DispersionError),
    Catalog(CatalogError),
}

impl std::fmt::Display for OracleError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Unsupported => write!(f, "no oracle for this problem"),
            Self::InvalidConfig => write!(f, "invalid oracle configuration"),
            Self::NotConverged { residual } => {
                write!(f, "linear solve stalled at residual {residual:e}")
            }
            Self::MissingValue(n) => write!(f, "missing field value at {n}"),
            Self::Dispersion(e) => write!(f, "{e}"),
            Self::Catalog(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for OracleError {}

impl From<DispersionError> for OracleError {
    fn from(e: DispersionError) -> Self {
        Self::Dispersion(e)
    }
}

impl From<CatalogError> for OracleError {
    fn from(e: CatalogError) -> Self {
        Self::Catalog(e)
    }
}

/// Truncation and summation radii for an oracle run.
#[derive(Clone, Copy, Debug)]
pub struct OracleConfig {
    /// Half-width of the zero-Dirichlet truncation box.
    pub box_radius: i32,
    /// Spectral sums run over `|m| ≤ sum_radius − 1`.
    pub sum_radius: i32,
    /// Target relative residual of the linear solve.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl OracleConfig {
    pub fn new(box_radius: i32, sum_radius: i32) -> Self {
        Self {
            box_radius,
            sum_radius,
            tolerance: 1e-11,
            max_iterations: 100_000,
        }
    }

    fn validate(&self) -> Result<(), OracleError> {
        if self.box_radius < 4
            || self.sum_radius < 2
            || self.sum_radius > self.box_radius
            || self.tolerance.is_nan()
            || self.tolerance <= 0.0
        {
            return Err(OracleError::InvalidConfig);
        }
        Ok(())
    }
}

/// Scattered-field values: single-valued nodes plus one-sided values on
/// duplicated plate nodes.
#[derive(Clone, Debug)]
pub struct OracleField {
    pub single: Field,
    pub upper: Field,
    pub lower: Field,
}

impl OracleField {
    /// Value seen when approaching the node from above.
    pub fn from_above(&self, node: Node) -> Option<C> {
        self.upper.get(node).or_else(|| self.single.get(node))
    }

    /// Value seen when approaching the node from below.
    pub fn from_below(&self, node: Node) -> Option<C> {
        self.lower.get(node).or_else(|| self.single.get(node))
    }
}

/// Spectral-function values extracted from an oracle solution at one point.
#[derive(Clone, Debug)]
pub struct SpectralSample {
    pub z: SpectralPoint,
    pub psi_plus: Vec<C>,
    pub psi_minus: Vec<C>,
    /// Geometric estimate of the truncated part of the sums.
    pub tail_bound: f64,
}

/// A solved oracle problem.
#[derive(Clone, Debug)]
pub struct OracleResult {
    spec: ProblemSpec,
    field: OracleField,
    sum_radius: i32,
    linear_residual: f64,
}

// ---------------------------------------------------------------------------
// sparse matrix and iterative solver

struct Csr {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C>,
}

impl Csr {
    fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, C)>) -> Self {
        triplets.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; n + 1];
        let mut cols: Vec<usize> = Vec::with_capacity(triplets.len());
        let mut vals: Vec<C> = Vec::with_capacity(triplets.len());
        let mut prev: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            if prev == Some((r, c)) {
                *vals.last_mut().unwrap() += v;
            } else {
                cols.push(c);
                vals.push(v);
                row_ptr[r + 1] = cols.len();
                prev = Some((r, c));
            }
        }
        // forward-fill pointers so empty rows span nothing
        for i in 1..=n {
            row_ptr[i] = row_ptr[i].max(row_ptr[i - 1]);
        }
        Self {
            n,
            row_ptr,
            cols,
            vals,
        }
    }

    fn matvec(&self, x: &[C], y: &mut [C]) {
        for (i, out) in y.iter_mut().enumerate() {
            let mut acc = C::new(0.0, 0.0);
            for idx in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.vals[idx] * x[self.cols[idx]];
            }
            *out = acc;
        }
    }

    fn diagonal(&self) -> Vec<C> {
        let mut d = vec![C::new(0.0, 0.0); self.n];
        for (i, entry) in d.iter_mut().enumerate() {
            for idx in self.row_ptr[i]..self.row_ptr[i + 1] {
                if self.cols[idx] == i {
                    *entry += self.vals[idx];
                }
            }
        }
        d
    }
}

fn dot(a: &[C], b: &[C]) -> C {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[C]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Preconditioned BiCGSTAB with Jacobi scaling; returns the solution and the
/// final true relative residual.
fn bicgstab(a: &Csr, b: &[C], tol: f64, max_iterations: usize) -> Result<(Vec<C>, f64), OracleError> {
    let n = a.n;
    let diag = a.diagonal();
    let precond: Vec<C> = diag
        .iter()
        .map(|&d| if d.norm() > 1e-14 { 1.0 / d } else { C::new(1.0, 0.0) })
        .collect();
    let apply_m = |v: &[C], out: &mut Vec<C>| {
        out.clear();
        out.extend(v.iter().zip(&precond).map(|(x, p)| x * p));
    };

    let bnorm = norm(b);
    if bnorm == 0.0 {
        return Ok((vec![C::new(0.0, 0.0); n], 0.0));
    }
    let mut x = vec![C::new(0.0, 0.0); n];
    let mut r = b.to_vec();
    let r_hat = r.clone();
    let mut rho = C::new(1.0, 0.0);
    let mut alpha = C::new(1.0, 0.0);
    let mut omega = C::new(1.0, 0.0);
    let mut v = vec![C::new(0.0, 0.0); n];
    let mut p = vec![C::new(0.0, 0.0); n];
    let mut p_hat = Vec::with_capacity(n);
    let mut s_hat = Vec::with_capacity(n);
    let mut t = vec![C::new(0.0, 0.0); n];
    let mut best = (x.clone(), f64::INFINITY);

    for _ in 0..max_iterations {
        let rho_new = dot(&r_hat, &r);
        if rho_new.norm() < 1e-300 {
            break;
        }
        let beta = (rho_new / rho) * (alpha / omega);
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        apply_m(&p, &mut p_hat);
        a.matvec(&p_hat, &mut v);
        let denom = dot(&r_hat, &v);
        if denom.norm() < 1e-300 {
            break;
        }
        alpha = rho_new / denom;
        let s: Vec<C> = (0..n).map(|i| r[i] - alpha * v[i]).collect();
        if norm(&s) / bnorm < tol {
            for i in 0..n {
                x[i] += alpha * p_hat[i];
            }
            break;
        }
        apply_m(&s, &mut s_hat);
        a.matvec(&s_hat, &mut t);
        let tt = dot(&t, &t);
        if tt.norm() < 1e-300 {
            break;
        }
        omega = dot(&t, &s) / tt;
        for i in 0..n {
            x[i] += alpha * p_hat[i] + omega * s_hat[i];
        }
        r = (0..n).map(|i| s[i] - omega * t[i]).collect();
        let rel = norm(&r) / bnorm;
        if rel < best.1 {
            best = (x.clone(), rel);
        }
        if rel < tol {
            break;
        }
        rho = rho_new;
    }

    // true residual of the returned iterate
    let mut ax = vec![C::new(0.0, 0.0); n];
    a.matvec(&x, &mut ax);
    let res: Vec<C> = (0..n).map(|i| b[i] - ax[i]).collect();
    let mut rel = norm(&res) / bnorm;
    if rel > best.1 {
        x = best.0;
        a.matvec(&x, &mut ax);
        let res: Vec<C> = (0..n).map(|i| b[i] - ax[i]).collect();
        rel = norm(&res) / bnorm;
    }
    if rel > tol * 10.0 {
        return Err(OracleError::NotConverged { residual: rel });
    }
    Ok((x, rel))
}

// ---------------------------------------------------------------------------
// assembly helpers

/// Which face of a (possibly duplicated) node a value lives on.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
enum Face {
    Single,
    Up,
    Down,
}

struct SystemBuilder {
    index: BTreeMap<(Node, Face), usize>,
    triplets: Vec<(usize, usize, C)>,
    rhs: Vec<C>,
}

impl SystemBuilder {
    fn new() -> Self {
        Self {
            index: BTreeMap::new(),
            triplets: Vec::new(),
            rhs: Vec::new(),
        }
    }

    fn add_unknown(&mut self, node: Node, face: Face) -> usize {
        let next = self.index.len();
        *self.index.entry((node, face)).or_insert(next)
    }

    fn unknown(&self, node: Node, face: Face) -> Option<usize> {
        self.index.get(&(node, face)).copied()
    }

    fn start_rows(&mut self) {
        self.rhs = vec![C::new(0.0, 0.0); self.index.len()];
    }

    fn coeff(&mut self, row: usize, node: Node, face: Face, w: C) {
        if let Some(col) = self.unknown(node, face) {
            self.triplets.push((row, col, w));
        }
        // absent unknowns are zero (outside the box or suppressed by
        // symmetry); known values are handled by the callers via `rhs`
    }

    fn solve(self, tol: f64, max_iterations: usize) -> Result<(Vec<C>, f64), OracleError> {
        let n = self.index.len();
        let a = Csr::from_triplets(n, self.triplets);
        bicgstab(&a, &self.rhs, tol, max_iterations)
    }
}

fn empty_field_2d() -> Field {
    Field::new_2d()
}

// ---------------------------------------------------------------------------
// oracle entry point

/// Solves the problem on a truncated lattice. Supported kinds: the two
/// half-plane screens, the finite strip, the staggered waveguide, and the
/// quarter-plane, all on the discrete side.
pub fn solve(spec: &ProblemSpec, cfg: &OracleConfig) -> Result<OracleResult, OracleError> {
    cfg.validate()?;
    match spec.kind() {
        ProblemKind::HalfPlaneDirichlet => solve_dirichlet_screen(spec, cfg, ScreenExtent::Half),
        ProblemKind::FiniteStrip => {
            let (half_width, _) = spec.discrete_geometry().ok_or(OracleError::Unsupported)?;
            solve_dirichlet_screen(spec, cfg, ScreenExtent::Strip(half_width as i32))
        }
        ProblemKind::HalfPlaneNeumann => solve_neumann_half_plane(spec, cfg),
        ProblemKind::StaggeredWaveguide => solve_staggered(spec, cfg),
        ProblemKind::QuarterPlane => solve_quarter_plane(spec, cfg),
        _ => Err(OracleError::Unsupported),
    }
}

enum ScreenExtent {
    Half,
    Strip(i32),
}

impl ScreenExtent {
    fn on_screen(&self, m: i32) -> bool {
        match self {
            Self::Half => m >= 0,
            Self::Strip(hw) => m.abs() <= *hw,
        }
    }
}

/// Dirichlet screen on row 0: even symmetry, upper-half solve, screen values
/// known.
fn solve_dirichlet_screen(
    spec: &ProblemSpec,
    cfg: &OracleConfig,
    extent: ScreenExtent,
) -> Result<OracleResult, OracleError> {
    let disp = spec.lattice_dispersion().ok_or(OracleError::Unsupported)?;
    let inc = spec.incidence_2d().ok_or(OracleError::Unsupported)?;
    let k2 = disp.k2();
    let b = cfg.box_radius;

    let known = |m: i32, n: i32| -> Option<C> {
        (n == 0 && extent.on_screen(m)).then(|| -inc.field(m, 0))
    };

    let mut sys = SystemBuilder::new();
    for m in -b..=b {
        for n in 0..=b {
            if known(m, n).is_none() {
                sys.add_unknown(Node::xy(m, n), Face::Single);
            }
        }
    }
    sys.start_rows();

    let add = |sys: &mut SystemBuilder, row: usize, m: i32, n: i32, w: C| {
        if m.abs() > b || n > b || n < 0 {
            return;
        }
        if let Some(val) = known(m, n) {
            sys.rhs[row] -= w * val;
        } else {
            sys.coeff(row, Node::xy(m, n), Face::Single, w);
        }
    };

    for (&(node, _), &row) in &sys.index.clone() {
        let (m, n) = (node.m, node.n);
        if n >= 1 {
            add(&mut sys, row, m, n, k2 - 4.0);
            add(&mut sys, row, m - 1, n, C::new(1.0, 0.0));
            add(&mut sys, row, m + 1, n, C::new(1.0, 0.0));
            add(&mut sys, row, m, n - 1, C::new(1.0, 0.0));
            add(&mut sys, row, m, n + 1, C::new(1.0, 0.0));
        } else {
            // off-screen row 0: even symmetry halves the row
            add(&mut sys, row, m, 0, k2 / 2.0 - 2.0);
            add(&mut sys, row, m - 1, 0, C::new(0.5, 0.0));
            add(&mut sys, row, m + 1, 0, C::new(0.5, 0.0));
            add(&mut sys, row, m, 1, C::new(1.0, 0.0));
        }
    }

    let index = sys.index.clone();
    let (x, linear_residual) = sys.solve(cfg.tolerance, cfg.max_iterations)?;

    let mut single = empty_field_2d();
    for m in -b..=b {
        for n in 0..=b {
            let val = if let Some(v) = known(m, n) {
                v
            } else {
                x[index[&(Node::xy(m, n), Face::Single)]]
            };
            single.insert(Node::xy(m, n), val);
            if n > 0 {
                single.insert(Node::xy(m, -n), val);
            }
        }
    }

    Ok(OracleResult {
        spec: *spec,
        field: OracleField {
            single,
            upper: empty_field_2d(),
            lower: empty_field_2d(),
        },
        sum_radius: cfg.sum_radius,
        linear_residual,
    })
}

/// Sound-hard half-plane: odd symmetry, upper-half solve, plate row carries
/// the unknown upper-face values, off-plate row 0 vanishes.
fn solve_neumann_half_plane(
    spec: &ProblemSpec,
    cfg: &OracleConfig,
) -> Result<OracleResult, OracleError> {
    let disp = spec.lattice_dispersion().ok_or(OracleError::Unsupported)?;
    let inc = spec.incidence_2d().ok_or(OracleError::Unsupported)?;
    let k2 = disp.k2();
    let b = cfg.box_radius;
    let on_plate = |m: i32, n: i32| n == 0 && m >= 0;

    let mut sys = SystemBuilder::new();
    for m in -b..=b {
        for n in 0..=b {
            if n >= 1 || on_plate(m, n) {
                sys.add_unknown(Node::xy(m, n), Face::Single);
            }
        }
    }
    sys.start_rows();

    for (&(node, _), &row) in &sys.index.clone() {
        let (m, n) = (node.m, node.n);
        if n >= 1 {
            sys.coeff(row, Node::xy(m, n), Face::Single, k2 - 4.0);
            for (dm, dn) in [(-1, 0), (1, 0), (0, -1), (0, 1)] {
                // off-plate row-0 neighbors are zero by oddness and simply
                // have no unknown
                sys.coeff(row, Node::xy(m + dm, n + dn), Face::Single, C::new(1.0, 0.0));
            }
        } else {
            // plate row: one-sided vertical derivative of the total field
            // vanishes from above
            sys.coeff(row, Node::xy(m, 0), Face::Single, k2 / 2.0 - 2.0);
            sys.coeff(row, Node::xy(m - 1, 0), Face::Single, C::new(0.5, 0.0));
            sys.coeff(row, Node::xy(m + 1, 0), Face::Single, C::new(0.5, 0.0));
            sys.coeff(row, Node::xy(m, 1), Face::Single, C::new(1.0, 0.0));
            let dinc = straight_line_derivative(
                inc.field(m - 1, 0),
                inc.field(m + 1, 0),
                inc.field(m, 1),
                inc.field(m, 0),
                k2,
            );
            sys.rhs[row] = -dinc;
        }
    }

    let index = sys.index.clone();
    let (x, linear_residual) = sys.solve(cfg.tolerance, cfg.max_iterations)?;

    let mut single = empty_field_2d();
    let mut upper = empty_field_2d();
    let mut lower = empty_field_2d();
    for m in -b..=b {
        for n in 0..=b {
            if on_plate(m, n) {
                let v = x[index[&(Node::xy(m, 0), Face::Single)]];
                upper.insert(Node::xy(m, 0), v);
                lower.insert(Node::xy(m, 0), -v);
            } else if n == 0 {
                single.insert(Node::xy(m, 0), C::new(0.0, 0.0));
            } else {
                let v = x[index[&(Node::xy(m, n), Face::Single)]];
                single.insert(Node::xy(m, n), v);
                single.insert(Node::xy(m, -n), -v);
            }
        }
    }

    Ok(OracleResult {
        spec: *spec,
        field: OracleField {
            single,
            upper,
            lower,
        },
        sum_radius: cfg.sum_radius,
        linear_residual,
    })
}

/// Staggered pair of sound-hard plates: full-plane solve on the lattice slit
/// along the plates, every plate node carrying independent face values.
fn solve_staggered(spec: &ProblemSpec, cfg: &OracleConfig) -> Result<OracleResult, OracleError> {
    let disp = spec.lattice_dispersion().ok_or(OracleError::Unsupported)?;
    let inc = spec.incidence_2d().ok_or(OracleError::Unsupported)?;
    let (stagger, separation) = spec.discrete_geometry().ok_or(OracleError::Unsupported)?;
    let (em, en) = (stagger as i32, separation as i32);
    let k2 = disp.k2();
    let b = cfg.box_radius;
    if en + 2 > b {
        return Err(OracleError::InvalidConfig);
    }

    let is_plate = |m: i32, n: i32| (n == 0 && m >= -em) || (n == -en && m >= 0);

    let mut sys = SystemBuilder::new();
    for m in -b..=b {
        for n in -b..=b {
            if is_plate(m, n) {
                sys.add_unknown(Node::xy(m, n), Face::Up);
                sys.add_unknown(Node::xy(m, n), Face::Down);
            } else {
                sys.add_unknown(Node::xy(m, n), Face::Single);
            }
        }
    }
    sys.start_rows();

    // weight pairs for a horizontal/vertical neighbor as seen from (m, n)
    let add_neighbor = |sys: &mut SystemBuilder, row: usize, from: (i32, i32), to: (i32, i32), w: C, from_face: Face| {
        let (tm, tn) = to;
        if tm.abs() > b || tn.abs() > b {
            return;
        }
        let node = Node::xy(tm, tn);
        if !is_plate(tm, tn) {
            sys.coeff(row, node, Face::Single, w);
        } else if tn == from.1 {
            // along the slit row: plate-to-plate stays on one face,
            // off-plate sees the average of the two banks
            match from_face {
                Face::Single => {
                    sys.coeff(row, node, Face::Up, w / 2.0);
                    sys.coeff(row, node, Face::Down, w / 2.0);
                }
                f => sys.coeff(row, node, f, w),
            }
        } else if tn < from.1 {
            // looking down at the plate: its upper face
            sys.coeff(row, node, Face::Up, w);
        } else {
            sys.coeff(row, node, Face::Down, w);
        }
    };

    for (&(node, face), &row) in &sys.index.clone() {
        let (m, n) = (node.m, node.n);
        match face {
            Face::Single => {
                sys.coeff(row, node, Face::Single, k2 - 4.0);
                for (dm, dn) in [(-1, 0), (1, 0), (0, -1), (0, 1)] {
                    add_neighbor(&mut sys, row, (m, n), (m + dm, n + dn), C::new(1.0, 0.0), Face::Single);
                }
            }
            Face::Up => {
                sys.coeff(row, node, Face::Up, k2 / 2.0 - 2.0);
                add_neighbor(&mut sys, row, (m, n), (m - 1, n), C::new(0.5, 0.0), Face::Up);
                add_neighbor(&mut sys, row, (m, n), (m + 1, n), C::new(0.5, 0.0), Face::Up);
                add_neighbor(&mut sys, row, (m, n), (m, n + 1), C::new(1.0, 0.0), Face::Up);
                let dinc = straight_line_derivative(
                    inc.field(m - 1, n),
                    inc.field(m + 1, n),
                    inc.field(m, n + 1),
                    inc.field(m, n),
                    k2,
                );
                sys.rhs[row] = -dinc;
            }
            Face::Down => {
                sys.coeff(row, node, Face::Down, k2 / 2.0 - 2.0);
                add_neighbor(&mut sys, row, (m, n), (m - 1, n), C::new(0.5, 0.0), Face::Down);
                add_neighbor(&mut sys, row, (m, n), (m + 1, n), C::new(0.5, 0.0), Face::Down);
                add_neighbor(&mut sys, row, (m, n), (m, n - 1), C::new(1.0, 0.0), Face::Down);
                let dinc = straight_line_derivative(
                    inc.field(m - 1, n),
                    inc.field(m + 1, n),
                    inc.field(m, n - 1),
                    inc.field(m, n),
                    k2,
                );
                sys.rhs[row] = -dinc;
            }
        }
    }

    let index = sys.index.clone();
    let (x, linear_residual) = sys.solve(cfg.tolerance, cfg.max_iterations)?;

    let mut single = empty_field_2d();
    let mut upper = empty_field_2d();
    let mut lower = empty_field_2d();
    for (&(node, face), &col) in &index {
        match face {
            Face::Single => single.insert(node, x[col]),
            Face::Up => upper.insert(node, x[col]),
            Face::Down => lower.insert(node, x[col]),
        }
    }

    Ok(OracleResult {
        spec: *spec,
        field: OracleField {
            single,
            upper,
            lower,
        },
        sum_radius: cfg.sum_radius,
        linear_residual,
    })
}

/// Sound-soft quarter-plane screen in three dimensions: even symmetry,
/// upper-half-space solve, screen values known.
fn solve_quarter_plane(spec: &ProblemSpec, cfg: &OracleConfig) -> Result<OracleResult, OracleError> {
    let disp = spec.lattice_dispersion().ok_or(OracleError::Unsupported)?;
    let inc = spec.incidence_3d().ok_or(OracleError::Unsupported)?;
    let k2 = disp.k2();
    let b = cfg.box_radius;
    let height = b;

    let known = |m: i32, n: i32, l: i32| -> Option<C> {
        (l == 0 && m >= 0 && n >= 0).then(|| -inc.field(m, n, 0))
    };

    let mut sys = SystemBuilder::new();
    for m in -b..=b {
        for n in -b..=b {
            for l in 0..=height {
                if known(m, n, l).is_none() {
                    sys.add_unknown(Node::xyz(m, n, l), Face::Single);
                }
            }
        }
    }
    sys.start_rows();

    let add = |sys: &mut SystemBuilder, row: usize, m: i32, n: i32, l: i32, w: C| {
        if m.abs() > b || n.abs() > b || l > height || l < 0 {
            return;
        }
        if let Some(val) = known(m, n, l) {
            sys.rhs[row] -= w * val;
        } else {
            sys.coeff(row, Node::xyz(m, n, l), Face::Single, w);
        }
    };

    for (&(node, _), &row) in &sys.index.clone() {
        let (m, n, l) = (node.m, node.n, node.l);
        if l >= 1 {
            add(&mut sys, row, m, n, l, k2 - 6.0);
            add(&mut sys, row, m - 1, n, l, C::new(1.0, 0.0));
            add(&mut sys, row, m + 1, n, l, C::new(1.0, 0.0));
            add(&mut sys, row, m, n - 1, l, C::new(1.0, 0.0));
            add(&mut sys, row, m, n + 1, l, C::new(1.0, 0.0));
            add(&mut sys, row, m, n, l - 1, C::new(1.0, 0.0));
            add(&mut sys, row, m, n, l + 1, C::new(1.0, 0.0));
        } else {
            // off-screen base plane: even symmetry halves the row
            add(&mut sys, row, m, n, 0, (k2 - 6.0) / 2.0);
            add(&mut sys, row, m - 1, n, 0, C::new(0.5, 0.0));
            add(&mut sys, row, m + 1, n, 0, C::new(0.5, 0.0));
            add(&mut sys, row, m, n - 1, 0, C::new(0.5, 0.0));
            add(&mut sys, row, m, n + 1, 0, C::new(0.5, 0.0));
            add(&mut sys, row, m, n, 1, C::new(1.0, 0.0));
        }
    }

    let index = sys.index.clone();
    let (x, linear_residual) = sys.solve(cfg.tolerance, cfg.max_iterations)?;

    let mut single = Field::new_3d();
    for m in -b..=b {
        for n in -b..=b {
            for l in 0..=height {
                let node = Node::xyz(m, n, l);
                let val = if let Some(v) = known(m, n, l) {
                    v
                } else {
                    x[index[&(node, Face::Single)]]
                };
                single.insert(node, val);
            }
        }
    }

    Ok(OracleResult {
        spec: *spec,
        field: OracleField {
            single,
            upper: Field::new_3d(),
            lower: Field::new_3d(),
        },
        sum_radius: cfg.sum_radius,
        linear_residual,
    })
}

// ---------------------------------------------------------------------------
// spectra extraction

impl OracleResult {
    pub fn spec(&self) -> &ProblemSpec {
        &self.spec
    }

    pub fn field(&self) -> &OracleField {
        &self.field
    }

    pub fn sum_radius(&self) -> i32 {
        self.sum_radius
    }

    /// Final relative residual of the truncated linear solve.
    pub fn linear_residual(&self) -> f64 {
        self.linear_residual
    }

    fn value(&self, node: Node, from_above: bool) -> Result<C, OracleError> {
        let v = if from_above {
            self.field.from_above(node)
        } else {
            self.field.from_below(node)
        };
        v.ok_or(OracleError::MissingValue(node))
    }

    /// Upper-side vertical derivative of the scattered field at a row node.
    fn derivative_above(&self, m: i32, n: i32, k2: C) -> Result<C, OracleError> {
        Ok(straight_line_derivative(
            self.value(Node::xy(m - 1, n), true)?,
            self.value(Node::xy(m + 1, n), true)?,
            self.value(Node::xy(m, n + 1), false)?,
            self.value(Node::xy(m, n), true)?,
            k2,
        ))
    }

    /// Spectral functions of the problem's functional equation at `z`.
    pub fn spectra(&self, z: SpectralPoint) -> Result<SpectralSample, OracleError> {
        let disp = self.spec.lattice_dispersion().ok_or(OracleError::Unsupported)?;
        let k2 = disp.k2();
        let r = self.sum_radius;
        match (self.spec.kind(), z) {
            (ProblemKind::HalfPlaneDirichlet, SpectralPoint::One(s)) => {
                let mut plus = C::new(0.0, 0.0);
                let mut minus = C::new(0.0, 0.0);
                let mut last = 0.0f64;
                for m in 0..r {
                    let term = s.powi(m) * self.derivative_above(m, 0, k2)?;
                    plus += term;
                    if m == r - 1 {
                        last += term.norm();
                    }
                }
                for m in (-(r - 1)..=-1).rev() {
                    let term = s.powi(m) * self.value(Node::xy(m, 0), true)?;
                    minus += term;
                    if m == -(r - 1) {
                        last += term.norm();
                    }
                }
                let rho = q_physical(s, &disp)?.norm();
                Ok(SpectralSample {
                    z,
                    psi_plus: vec![plus],
                    psi_minus: vec![minus],
                    tail_bound: tail(last, rho),
                })
            }
            (ProblemKind::HalfPlaneNeumann, SpectralPoint::One(s)) => {
                let mut plus = C::new(0.0, 0.0);
                let mut minus = C::new(0.0, 0.0);
                let mut last = 0.0f64;
                for m in 0..r {
                    let term = s.powi(m) * self.value(Node::xy(m, 0), true)?;
                    plus += term;
                    if m == r - 1 {
                        last += term.norm();
                    }
                }
                for m in -(r - 1)..=-1 {
                    let term = s.powi(m) * self.derivative_above(m, 0, k2)?;
                    minus += term;
                    if m == -(r - 1) {
                        last += term.norm();
                    }
                }
                let rho = q_physical(s, &disp)?.norm();
                Ok(SpectralSample {
                    z,
                    psi_plus: vec![plus],
                    psi_minus: vec![minus],
                    tail_bound: tail(last, rho),
                })
            }
            (ProblemKind::FiniteStrip, SpectralPoint::One(s)) => {
                let inc = self.spec.incidence_2d().ok_or(OracleError::Unsupported)?;
                let (hw, _) = self.spec.discrete_geometry().ok_or(OracleError::Unsupported)?;
                let hw = hw as i32;
                let mut v = C::new(0.0, 0.0);
                for m in -hw..=hw {
                    v += s.powi(m) * self.derivative_above(m, 0, k2)?;
                }
                let mut u_minus = C::new(0.0, 0.0);
                let mut u_plus = C::new(0.0, 0.0);
                let mut last = 0.0f64;
                for m in -(r - 1)..=(-hw - 1) {
                    let term = s.powi(m) * self.value(Node::xy(m, 0), true)?;
                    u_minus += term;
                    if m == -(r - 1) {
                        last += term.norm();
                    }
                }
                for m in (hw + 1)..r {
                    let term = s.powi(m) * self.value(Node::xy(m, 0), true)?;
                    u_plus += term;
                    if m == r - 1 {
                        last += term.norm();
                    }
                }
                let s_in = inc.s_in();
                let pole = s * s_in.powi(-hw - 1) / (1.0 - s / s_in);
                let u_minus = s.powi(hw) * u_minus;
                let u_plus = s.powi(-hw) * u_plus + pole;
                let rho = q_physical(s, &disp)?.norm();
                Ok(SpectralSample {
                    z,
                    psi_plus: vec![u_plus, s.powi(hw) * v],
                    psi_minus: vec![u_minus, s.powi(-hw) * v],
                    tail_bound: tail(last, rho),
                })
            }
            (ProblemKind::StaggeredWaveguide, SpectralPoint::One(s)) => {
                let (stagger, separation) =
                    self.spec.discrete_geometry().ok_or(OracleError::Unsupported)?;
                let (em, en) = (stagger as i32, separation as i32);
                let mut d1 = C::new(0.0, 0.0);
                let mut d2 = C::new(0.0, 0.0);
                let mut j1 = C::new(0.0, 0.0);
                let mut j2 = C::new(0.0, 0.0);
                let mut last = 0.0f64;
                for m in -(r - 1)..=(-em - 1) {
                    let term = s.powi(m) * self.derivative_above(m, 0, k2)?;
                    d1 += term;
                    if m == -(r - 1) {
                        last += term.norm();
                    }
                }
                for m in -(r - 1)..=-1 {
                    let term = s.powi(m) * self.derivative_above(m, -en, k2)?;
                    d2 += term;
                    if m == -(r - 1) {
                        last += term.norm();
                    }
                }
                for m in -em..r {
                    let node = Node::xy(m, 0);
                    let term = s.powi(m)
                        * (self.value(node, true)? - self.value(node, false)?);
                    j1 += term;
                    if m == r - 1 {
                        last += term.norm();
                    }
                }
                for m in 0..r {
                    let node = Node::xy(m, -en);
                    let term = s.powi(m)
                        * (self.value(node, true)? - self.value(node, false)?);
                    j2 += term;
                    if m == r - 1 {
                        last += term.norm();
                    }
                }
                let rho = q_physical(s, &disp)?.norm();
                Ok(SpectralSample {
                    z,
                    psi_plus: vec![s.powi(em) * j1, j2],
                    psi_minus: vec![s.powi(em) * d1, d2],
                    tail_bound: tail(last, rho),
                })
            }
            (ProblemKind::QuarterPlane, SpectralPoint::Two(s1, s2)) => {
                let mut w = C::new(0.0, 0.0);
                let mut u = C::new(0.0, 0.0);
                let mut last = 0.0f64;
                for m in -(r - 1)..r {
                    for n in -(r - 1)..r {
                        let node = Node::xyz(m, n, 0);
                        let weight = s1.powi(m) * s2.powi(n);
                        let term = if m >= 0 && n >= 0 {
                            let d = planar_derivative(
                                [
                                    self.value(Node::xyz(m - 1, n, 0), true)?,
                                    self.value(Node::xyz(m + 1, n, 0), true)?,
                                    self.value(Node::xyz(m, n - 1, 0), true)?,
                                    self.value(Node::xyz(m, n + 1, 0), true)?,
                                ],
                                self.value(Node::xyz(m, n, 1), true)?,
                                self.value(node, true)?,
                                k2,
                            );
                            w += weight * d;
                            weight * d
                        } else {
                            let t = weight * self.value(node, true)?;
                            u += t;
                            t
                        };
                        if m.abs() == r - 1 || n.abs() == r - 1 {
                            last = last.max(term.norm());
                        }
                    }
                }
                let rho = q_physical_3d(s1, s2, &disp)?.norm();
                Ok(SpectralSample {
                    z,
                    psi_plus: vec![w],
                    psi_minus: vec![u],
                    tail_bound: tail(last * (2 * r) as f64, rho),
                })
            }
            _ => Err(OracleError::Unsupported),
        }
    }
}

fn tail(last: f64, rho: f64) -> f64 {
    if rho >= 1.0 {
        f64::INFINITY
    } else {
        last * rho / (1.0 - rho)
    }
}
