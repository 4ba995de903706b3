//! Numerical scalar Wiener-Hopf solver for the discrete half-plane problems.
//!
//! Kernels are factorized on the unit circle by the logarithm method: after
//! checking that the kernel neither vanishes on the contour nor winds around
//! the origin, its continuous logarithm is split by Fourier modes into parts
//! analytic inside and outside the circle. The functional equation
//! `Ψ⁻ = KΨ⁺ + F` is then solved by the standard rearrangement
//! `G = F/K⁻`, `Ψ⁺ = −G⁺/K⁺`, `Ψ⁻ = K⁻G⁻`, and the scattered field is
//! recovered from the row-0 generating function by trapezoidal quadrature.

use latwh_core::catalog::{forcing, kernel, CatalogError, ProblemKind, ProblemSpec, Side, SpectralPoint};
use latwh_core::dispersion::{q_physical, DispersionError};
use latwh_core::lattice::{Field, Node};
use latwh_core::C;
use rustfft::FftPlanner;

/// Errors from contour construction, factorization, or solving.
#[derive(Clone, Debug)]
pub enum SolverError {
    /// Contour size is not a power of two of at least 256, or data lengths
    /// disagree with it.
    InvalidContour,
    /// The kernel has a zero (or near-zero) on the contour.
    KernelVanishesOnContour,
    /// The kernel has nonzero winding number, so a scalar factorization
    /// with these analyticity regions does not exist.
    NonzeroIndex(i64),
    /// Fourier coefficients have not decayed at the grid's band edge, so the
    /// split would be dominated by truncation error.
    SlowCoefficientDecay,
    /// Field values computed on the full and half-density contours disagree.
    QuadratureNotConverged { difference: f64 },
    /// Evaluation point on the wrong side of the contour.
    WrongRegion,
    /// The problem is not a discrete scalar half-plane problem.
    Unsupported,
    Catalog(CatalogError),
    Dispersion(DispersionError),
}

impl std::fmt::Display for SolverError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::InvalidContour => write!(f, "contour size must be a power of two, at least 256"),
            Self::KernelVanishesOnContour => write!(f, "kernel vanishes on the contour"),
            Self::NonzeroIndex(w) => write!(f, "kernel has winding number {w} on the contour"),
            Self::SlowCoefficientDecay => {
                write!(f, "Fourier coefficients do not decay on this contour")
            }
            Self::QuadratureNotConverged { difference } => {
                write!(f, "quadrature not converged (difference {difference:e})")
            }
            Self::WrongRegion => write!(f, "evaluation point outside the region of analyticity"),
            Self::Unsupported => write!(f, "not a discrete scalar half-plane problem"),
            Self::Catalog(e) => write!(f, "{e}"),
            Self::Dispersion(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for SolverError {}

impl From<CatalogError> for SolverError {
    fn from(e: CatalogError) -> Self {
        Self::Catalog(e)
    }
}

impl From<DispersionError> for SolverError {
    fn from(e: DispersionError) -> Self {
        Self::Dispersion(e)
    }
}

/// Uniform sampling of the unit circle, `s_j = exp(2πij/N)`.
#[derive(Clone, Debug)]
pub struct CircleContour {
    points: Vec<C>,
}

impl CircleContour {
    /// `n` must be a power of two, at least 256.
    pub fn new(n: usize) -> Result<Self, SolverError> {
        if n < 256 || !n.is_power_of_two() {
            return Err(SolverError::InvalidContour);
        }
        let points = (0..n)
            .map(|j| C::from_polar(1.0, 2.0 * std::f64::consts::PI * j as f64 / n as f64))
            .collect();
        Ok(Self { points })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn points(&self) -> &[C] {
        &self.points
    }
}

// ---------------------------------------------------------------------------
// Fourier helpers

/// Coefficients `c_k` with `f(s_j) = Σ_k c_k s_j^k`; index `k > N/2` stands
/// for the negative power `k − N`.
fn mode_coefficients(values: &[C]) -> Vec<C> {
    let n = values.len();
    let mut buf = values.to_vec();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    for v in &mut buf {
        *v /= n as f64;
    }
    buf
}

/// Evaluates `Σ_k c_k s_j^k` at every contour point.
fn modes_to_values(coeffs: &[C]) -> Vec<C> {
    let mut buf = coeffs.to_vec();
    FftPlanner::new().plan_fft_inverse(coeffs.len()).process(&mut buf);
    buf
}

/// Splits coefficients into powers `0..=N/2` and `−N/2+1..=−1`.
fn split_modes(coeffs: &[C]) -> (Vec<C>, Vec<C>) {
    let n = coeffs.len();
    let mut plus = vec![C::new(0.0, 0.0); n];
    let mut minus = vec![C::new(0.0, 0.0); n];
    for (k, &c) in coeffs.iter().enumerate() {
        if k <= n / 2 {
            plus[k] = c;
        } else {
            minus[k] = c;
        }
    }
    (plus, minus)
}

fn max_norm(values: &[C]) -> f64 {
    values.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

/// Largest coefficient magnitude in the band nearest the Nyquist mode.
fn band_edge_magnitude(coeffs: &[C]) -> f64 {
    let n = coeffs.len();
    let band = n / 16;
    let lo = n / 2 - band;
    let hi = n / 2 + band;
    coeffs[lo..=hi.min(n - 1)]
        .iter()
        .map(|v| v.norm())
        .fold(0.0, f64::max)
}

const DECAY_TOLERANCE: f64 = 1e-8;
const PRODUCT_TOLERANCE: f64 = 1e-10;
const VANISH_TOLERANCE: f64 = 1e-12;

// ---------------------------------------------------------------------------
// multiplicative factorization

/// A factorization `K = K⁺·K⁻` with `K⁺` analytic and nonzero inside the
/// unit circle, `K⁻` outside, normalized by `K⁻(∞) = 1`.
#[derive(Clone, Debug)]
pub struct ScalarFactorization {
    plus: Vec<C>,
    minus: Vec<C>,
    log_plus_coeffs: Vec<C>,
    log_minus_coeffs: Vec<C>,
}

impl ScalarFactorization {
    /// `K⁺` at the contour points.
    pub fn plus_on_contour(&self) -> &[C] {
        &self.plus
    }

    /// `K⁻` at the contour points.
    pub fn minus_on_contour(&self) -> &[C] {
        &self.minus
    }

    /// `K⁺(z)` for `|z| ≤ 1`, by the Taylor series of its logarithm.
    pub fn plus_at(&self, z: C) -> Result<C, SolverError> {
        if z.norm() > 1.0 + 1e-12 {
            return Err(SolverError::WrongRegion);
        }
        let mut acc = C::new(0.0, 0.0);
        let mut pow = C::new(1.0, 0.0);
        for &c in &self.log_plus_coeffs {
            acc += c * pow;
            pow *= z;
        }
        Ok(acc.exp())
    }

    /// `K⁻(z)` for `|z| ≥ 1`, by the series of its logarithm in `1/z`.
    pub fn minus_at(&self, z: C) -> Result<C, SolverError> {
        if z.norm() < 1.0 - 1e-12 {
            return Err(SolverError::WrongRegion);
        }
        let w = 1.0 / z;
        let mut acc = C::new(0.0, 0.0);
        let mut pow = w;
        for &c in &self.log_minus_coeffs {
            acc += c * pow;
            pow *= w;
        }
        Ok(acc.exp())
    }
}

/// Winding number of the sampled curve around the origin.
fn winding_number(values: &[C]) -> i64 {
    let n = values.len();
    let mut total = 0.0;
    for j in 0..n {
        total += (values[(j + 1) % n] / values[j]).arg();
    }
    (total / (2.0 * std::f64::consts::PI)).round() as i64
}

/// Factorizes contour samples of a kernel by the logarithm method.
pub fn log_factorize(
    values: &[C],
    contour: &CircleContour,
) -> Result<ScalarFactorization, SolverError> {
    let n = contour.len();
    if values.len() != n {
        return Err(SolverError::InvalidContour);
    }
    let scale = max_norm(values);
    if scale == 0.0 || values.iter().any(|v| v.norm() < VANISH_TOLERANCE * scale) {
        return Err(SolverError::KernelVanishesOnContour);
    }
    let w = winding_number(values);
    if w != 0 {
        return Err(SolverError::NonzeroIndex(w));
    }

    // continuous logarithm along the contour
    let mut logs = Vec::with_capacity(n);
    let mut theta = values[0].arg();
    logs.push(C::new(values[0].norm().ln(), theta));
    for j in 1..n {
        theta += (values[j] / values[j - 1]).arg();
        logs.push(C::new(values[j].norm().ln(), theta));
    }

    let coeffs = mode_coefficients(&logs);
    if band_edge_magnitude(&coeffs) > DECAY_TOLERANCE * max_norm(&coeffs).max(1.0) {
        return Err(SolverError::SlowCoefficientDecay);
    }
    let (plus_modes, minus_modes) = split_modes(&coeffs);
    let plus: Vec<C> = modes_to_values(&plus_modes).iter().map(|v| v.exp()).collect();
    let minus: Vec<C> = modes_to_values(&minus_modes).iter().map(|v| v.exp()).collect();

    let worst = values
        .iter()
        .zip(plus.iter().zip(&minus))
        .map(|(&k, (&p, &m))| (p * m - k).norm())
        .fold(0.0, f64::max);
    if worst > PRODUCT_TOLERANCE * scale.max(1.0) {
        return Err(SolverError::SlowCoefficientDecay);
    }

    let log_plus_coeffs = plus_modes[..=n / 2].to_vec();
    // powers −1, −2, … in that order
    let log_minus_coeffs: Vec<C> = (1..n / 2).map(|k| minus_modes[n - k]).collect();
    Ok(ScalarFactorization {
        plus,
        minus,
        log_plus_coeffs,
        log_minus_coeffs,
    })
}

/// Splits contour samples into `G = G⁺ + G⁻` with `G⁺` analytic inside,
/// `G⁻` outside and vanishing at infinity.
pub fn additive_split(
    values: &[C],
    contour: &CircleContour,
) -> Result<(Vec<C>, Vec<C>), SolverError> {
    let n = contour.len();
    if values.len() != n {
        return Err(SolverError::InvalidContour);
    }
    let coeffs = mode_coefficients(values);
    if band_edge_magnitude(&coeffs) > DECAY_TOLERANCE * max_norm(&coeffs).max(1.0) {
        return Err(SolverError::SlowCoefficientDecay);
    }
    let (plus_modes, minus_modes) = split_modes(&coeffs);
    Ok((modes_to_values(&plus_modes), modes_to_values(&minus_modes)))
}

// ---------------------------------------------------------------------------
// half-plane solver

/// Spectral solution of a discrete half-plane problem on a circle contour.
#[derive(Clone, Debug)]
pub struct HalfPlaneSolution {
    spec: ProblemSpec,
    contour: CircleContour,
    psi_plus: Vec<C>,
    psi_minus: Vec<C>,
    /// Row-0 generating values `B(s_j)` used for field reconstruction.
    b_values: Vec<C>,
}

/// Solves `Ψ⁻ = KΨ⁺ + F` for the discrete sound-soft or sound-hard
/// half-plane by scalar Wiener-Hopf factorization on the given contour.
pub fn solve_half_plane(
    spec: &ProblemSpec,
    contour: &CircleContour,
) -> Result<HalfPlaneSolution, SolverError> {
    if spec.side() != Side::Discrete
        || !matches!(
            spec.kind(),
            ProblemKind::HalfPlaneDirichlet | ProblemKind::HalfPlaneNeumann
        )
    {
        return Err(SolverError::Unsupported);
    }
    let n = contour.len();
    let mut k_values = Vec::with_capacity(n);
    let mut f_values = Vec::with_capacity(n);
    for &s in contour.points() {
        let z = SpectralPoint::One(s);
        k_values.push(kernel(spec, z)?.as_scalar().ok_or(SolverError::Unsupported)?);
        let f = forcing(spec, z)?;
        if f.size() != 1 {
            return Err(SolverError::Unsupported);
        }
        f_values.push(f.at(0));
    }

    let factors = log_factorize(&k_values, contour)?;
    let g: Vec<C> = f_values
        .iter()
        .zip(factors.minus_on_contour())
        .map(|(&f, &m)| f / m)
        .collect();
    let (g_plus, g_minus) = additive_split(&g, contour)?;
    let psi_plus: Vec<C> = g_plus
        .iter()
        .zip(factors.plus_on_contour())
        .map(|(&gp, &kp)| -gp / kp)
        .collect();
    let psi_minus: Vec<C> = g_minus
        .iter()
        .zip(factors.minus_on_contour())
        .map(|(&gm, &km)| km * gm)
        .collect();

    let b_values: Vec<C> = match spec.kind() {
        // row-0 values: the minus function minus the incident row transform
        ProblemKind::HalfPlaneDirichlet => psi_minus
            .iter()
            .zip(&f_values)
            .map(|(&pm, &f)| pm - f)
            .collect(),
        // upper-face row-0 values
        _ => psi_plus.clone(),
    };

    Ok(HalfPlaneSolution {
        spec: *spec,
        contour: contour.clone(),
        psi_plus,
        psi_minus,
        b_values,
    })
}

impl HalfPlaneSolution {
    pub fn spec(&self) -> &ProblemSpec {
        &self.spec
    }

    pub fn contour(&self) -> &CircleContour {
        &self.contour
    }

    /// `Ψ⁺` at the contour points.
    pub fn psi_plus_on_contour(&self) -> &[C] {
        &self.psi_plus
    }

    /// `Ψ⁻` at the contour points.
    pub fn psi_minus_on_contour(&self) -> &[C] {
        &self.psi_minus
    }

    /// `Ψ⁺(z)` for `|z| < 1` by the trapezoidal Cauchy integral.
    pub fn psi_plus_at(&self, z: C) -> Result<C, SolverError> {
        if z.norm() >= 1.0 {
            return Err(SolverError::WrongRegion);
        }
        let n = self.contour.len() as f64;
        let mut acc = C::new(0.0, 0.0);
        for (&s, &v) in self.contour.points().iter().zip(&self.psi_plus) {
            acc += v * s / (s - z);
        }
        Ok(acc / n)
    }

    /// `Ψ⁻(z)` for `|z| > 1` by the trapezoidal Cauchy integral.
    pub fn psi_minus_at(&self, z: C) -> Result<C, SolverError> {
        if z.norm() <= 1.0 {
            return Err(SolverError::WrongRegion);
        }
        let n = self.contour.len() as f64;
        let mut acc = C::new(0.0, 0.0);
        for (&s, &v) in self.contour.points().iter().zip(&self.psi_minus) {
            acc += v * s / (s - z);
        }
        Ok(-acc / n)
    }

    /// Largest residual of `Ψ⁻ − KΨ⁺ − F` over the contour.
    pub fn functional_equation_residual(&self) -> Result<f64, SolverError> {
        let mut worst = 0.0f64;
        for (j, &s) in self.contour.points().iter().enumerate() {
            let z = SpectralPoint::One(s);
            let k = kernel(&self.spec, z)?.as_scalar().ok_or(SolverError::Unsupported)?;
            let f = forcing(&self.spec, z)?;
            if f.size() != 1 {
                return Err(SolverError::Unsupported);
            }
            worst = worst.max((self.psi_minus[j] - k * self.psi_plus[j] - f.at(0)).norm());
        }
        Ok(worst)
    }

    /// Scattered field on the window `|m| ≤ half_width`, `|n| ≤ half_height`,
    /// by quadrature over the contour. Row 0 carries the upper-face values;
    /// negative rows are filled by the problem's reflection symmetry. With
    /// `verify` set, the quadrature is repeated on the half-density contour
    /// and must agree to `1e-8` relative to the field scale.
    pub fn reconstruct_field(
        &self,
        half_width: i32,
        half_height: i32,
        verify: bool,
    ) -> Result<Field, SolverError> {
        if half_width < 0 || half_height < 0 {
            return Err(SolverError::InvalidContour);
        }
        let full = self.quadrature_field(half_width, half_height, 1)?;
        if verify {
            let half = self.quadrature_field(half_width, half_height, 2)?;
            let scale = full
                .iter()
                .map(|(_, v)| v.norm())
                .fold(0.0, f64::max)
                .max(1e-300);
            let mut difference = 0.0f64;
            for (node, v) in full.iter() {
                let w = half.get(node).unwrap_or_default();
                difference = difference.max((v - w).norm() / scale);
            }
            if difference > 1e-8 {
                return Err(SolverError::QuadratureNotConverged { difference });
            }
        }
        Ok(full)
    }

    fn quadrature_field(
        &self,
        half_width: i32,
        half_height: i32,
        stride: usize,
    ) -> Result<Field, SolverError> {
        let disp = self
            .spec
            .lattice_dispersion()
            .ok_or(SolverError::Unsupported)?;
        let odd = matches!(self.spec.kind(), ProblemKind::HalfPlaneNeumann);
        let points = self.contour.points();
        let n_used = points.len() / stride;
        let mut q_pows: Vec<Vec<C>> = Vec::with_capacity(n_used);
        for j in (0..points.len()).step_by(stride) {
            let q = q_physical(points[j], &disp)?;
            let mut pows = Vec::with_capacity(half_height as usize + 1);
            let mut p = self.b_values[j];
            pows.push(p);
            for _ in 0..half_height {
                p *= q;
                pows.push(p);
            }
            q_pows.push(pows);
        }

        let mut field = Field::new_2d();
        for m in -half_width..=half_width {
            // s^{−m} at the subsampled points
            let mut s_pows = Vec::with_capacity(n_used);
            for j in (0..points.len()).step_by(stride) {
                s_pows.push(points[j].powi(-m));
            }
            for n in 0..=half_height {
                let mut acc = C::new(0.0, 0.0);
                for (bq, sp) in q_pows.iter().zip(&s_pows) {
                    acc += bq[n as usize] * sp;
                }
                acc /= n_used as f64;
                field.insert(Node::xy(m, n), acc);
                if n > 0 {
                    field.insert(Node::xy(m, -n), if odd { -acc } else { acc });
                }
            }
        }
        Ok(field)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{solve as oracle_solve, OracleConfig};
    use latwh_core::dispersion::{Incidence2d, LatticeDispersion};
    use latwh_core::lattice::straight_line_derivative;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    #[test]
    fn contour_requires_power_of_two_of_at_least_256() {
        assert!(CircleContour::new(255).is_err());
        assert!(CircleContour::new(300).is_err());
        assert!(CircleContour::new(128).is_err());
        let contour = CircleContour::new(256).unwrap();
        assert_eq!(contour.len(), 256);
        assert!((contour.points()[64] - c(0.0, 1.0)).norm() < 1e-14);
    }

    #[test]
    fn factorization_recovers_rational_factors() {
        let contour = CircleContour::new(256).unwrap();
        let a = c(0.5, 0.1);
        let b = c(0.0, 0.3);
        let values: Vec<C> = contour
            .points()
            .iter()
            .map(|&s| (1.0 - a * s) * (1.0 - b / s))
            .collect();
        let factors = log_factorize(&values, &contour).unwrap();
        for (j, &s) in contour.points().iter().enumerate() {
            assert!((factors.plus_on_contour()[j] - (1.0 - a * s)).norm() < 1e-12);
            assert!((factors.minus_on_contour()[j] - (1.0 - b / s)).norm() < 1e-12);
        }
        // off-contour evaluation continues the same factors
        let z_in = c(0.3, -0.4);
        let z_out = c(1.7, 0.9);
        assert!((factors.plus_at(z_in).unwrap() - (1.0 - a * z_in)).norm() < 1e-12);
        assert!((factors.minus_at(z_out).unwrap() - (1.0 - b / z_out)).norm() < 1e-12);
    }

    #[test]
    fn factorization_rejects_zeros_and_nonzero_winding() {
        let contour = CircleContour::new(256).unwrap();
        let vanishing: Vec<C> = contour.points().iter().map(|&s| s - 1.0).collect();
        assert!(matches!(
            log_factorize(&vanishing, &contour),
            Err(SolverError::KernelVanishesOnContour)
        ));
        let winding: Vec<C> = contour.points().to_vec();
        assert!(matches!(
            log_factorize(&winding, &contour),
            Err(SolverError::NonzeroIndex(1))
        ));
    }

    #[test]
    fn additive_split_recovers_partial_fractions() {
        let contour = CircleContour::new(256).unwrap();
        let values: Vec<C> = contour
            .points()
            .iter()
            .map(|&s| 1.0 / (s - 2.0) + 1.0 / (s - c(0.0, 0.4)))
            .collect();
        let (plus, minus) = additive_split(&values, &contour).unwrap();
        for (j, &s) in contour.points().iter().enumerate() {
            assert!((plus[j] - 1.0 / (s - 2.0)).norm() < 1e-12);
            assert!((minus[j] - 1.0 / (s - c(0.0, 0.4))).norm() < 1e-12);
        }
    }

    fn end_to_end(dirichlet: bool) {
        let disp = LatticeDispersion::new(c(1.0, 0.3)).unwrap();
        let inc = Incidence2d::new(c(1.9, 0.3), &disp).unwrap();
        let spec = if dirichlet {
            ProblemSpec::half_plane_dirichlet(disp, inc).unwrap()
        } else {
            ProblemSpec::half_plane_neumann(disp, inc).unwrap()
        };
        let contour = CircleContour::new(512).unwrap();
        let solution = solve_half_plane(&spec, &contour).unwrap();
        assert!(solution.functional_equation_residual().unwrap() < 1e-10);

        let field = solution.reconstruct_field(8, 8, true).unwrap();
        let k2 = disp.k2();

        // interior residual and boundary condition of the reconstruction
        for m in -7..=7 {
            for n in 1..=7 {
                let mut acc = (k2 - 4.0) * field.get(Node::xy(m, n)).unwrap();
                for (dm, dn) in [(-1, 0), (1, 0), (0, -1), (0, 1)] {
                    acc += field.get(Node::xy(m + dm, n + dn)).unwrap();
                }
                assert!(acc.norm() < 1e-8, "interior residual {} at {m},{n}", acc.norm());
            }
        }
        for m in 0..=7 {
            let bc = if dirichlet {
                field.get(Node::xy(m, 0)).unwrap() + inc.field(m, 0)
            } else {
                let total = |mm: i32, nn: i32| {
                    field.get(Node::xy(mm, nn)).unwrap() + inc.field(mm, nn)
                };
                straight_line_derivative(
                    total(m - 1, 0),
                    total(m + 1, 0),
                    total(m, 1),
                    total(m, 0),
                    k2,
                )
            };
            assert!(bc.norm() < 1e-8, "boundary residual {} at {m}", bc.norm());
        }

        // spectra and field against the direct oracle
        let cfg = OracleConfig::new(40, 24);
        let oracle = oracle_solve(&spec, &cfg).unwrap();
        let mut worst = 0.0f64;
        for j in (0..contour.len()).step_by(contour.len() / 16) {
            let s = contour.points()[j];
            let sample = oracle.spectra(SpectralPoint::One(s)).unwrap();
            let rel_plus = (sample.psi_plus[0] - solution.psi_plus_on_contour()[j]).norm()
                / sample.psi_plus[0].norm();
            let rel_minus = (sample.psi_minus[0] - solution.psi_minus_on_contour()[j]).norm()
                / sample.psi_minus[0].norm();
            worst = worst.max(rel_plus).max(rel_minus);
        }
        assert!(worst < 1e-3, "spectra disagree by {worst}");

        let mut worst_field = 0.0f64;
        for m in -8..=8 {
            for n in 0..=8 {
                let o = oracle.field().from_above(Node::xy(m, n)).unwrap();
                let s = field.get(Node::xy(m, n)).unwrap();
                worst_field = worst_field.max((o - s).norm());
            }
        }
        assert!(worst_field < 1e-3, "fields disagree by {worst_field}");
    }

    #[test]
    fn dirichlet_half_plane_end_to_end() {
        end_to_end(true);
    }

    #[test]
    fn neumann_half_plane_end_to_end() {
        end_to_end(false);
    }

    #[test]
    fn wedge_and_continuous_specs_are_rejected() {
        let disp = LatticeDispersion::new(c(1.0, 0.3)).unwrap();
        let inc = Incidence2d::new(c(1.9, 0.3), &disp).unwrap();
        let spec = ProblemSpec::wedge(disp, inc).unwrap();
        let contour = CircleContour::new(256).unwrap();
        assert!(matches!(
            solve_half_plane(&spec, &contour),
            Err(SolverError::Unsupported)
        ));
    }
}
