//! Dispersion relations of the continuous and discrete Helmholtz equations.
//!
//! Continuous half-plane modes `exp(iξx − γ(ξ)y)` use `γ(ξ) = √(k² − ξ²)`
//! with the physical branch `Im γ > 0`. Discrete half-plane modes `s^m q^n`
//! tie the horizontal multiplier `s` to the vertical multiplier `q` through
//! `s + 1/s + q + 1/q + k̃² − 4 = 0`; the physical root is the one with
//! `|q| < 1`, and the symbol `Υ(s) = (q − 1/q)/2` plays the role of `iγ`.
//! Three-dimensional versions use two horizontal multipliers and
//! `s₁ + 1/s₁ + s₂ + 1/s₂ + q + 1/q + k̃² − 6 = 0`.

use core::fmt;

use num_traits::Zero;

use crate::C;

/// Errors from dispersion evaluations and incidence construction.
#[derive(Clone, Copy, PartialEq, Debug)]
pub enum DispersionError {
    /// Zero or non-finite wavenumber.
    InvalidWavenumber,
    /// Zero or non-finite spectral argument.
    InvalidArgument,
    /// Both roots of the vertical-multiplier quadratic lie on the unit
    /// circle, so the physical branch is ambiguous; carries the root that
    /// would have been returned.
    OnCut { q: C },
    /// Incidence data violates its modulus or range constraints.
    InvalidIncidence,
}

impl fmt::Display for DispersionError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::InvalidWavenumber => write!(f, "invalid wavenumber"),
            Self::InvalidArgument => write!(f, "invalid spectral argument"),
            Self::OnCut { q } => write!(f, "spectral point on the branch cut (q = {q})"),
            Self::InvalidIncidence => write!(f, "invalid incidence data"),
        }
    }
}

impl core::error::Error for DispersionError {}

/// Wavenumber of the continuous Helmholtz equation.
#[derive(Clone, Copy, Debug)]
pub struct ContinuousDispersion {
    k: C,
}

impl ContinuousDispersion {
    /// Requires a finite nonzero `k` with `Im k ≥ 0`.
    pub fn new(k: C) -> Result<Self, DispersionError> {
        if !k.re.is_finite() || !k.im.is_finite() || k.is_zero() || k.im < 0.0 {
            return Err(DispersionError::InvalidWavenumber);
        }
        Ok(Self { k })
    }

    pub fn k(&self) -> C {
        self.k
    }
}

/// Scaled wavenumber `k̃ = k·h` of the discrete Helmholtz equation.
#[derive(Clone, Copy, Debug)]
pub struct LatticeDispersion {
    ktilde: C,
}

impl LatticeDispersion {
    /// Requires a finite nonzero `k̃` with `Im k̃ ≥ 0`.
    pub fn new(ktilde: C) -> Result<Self, DispersionError> {
        if !ktilde.re.is_finite() || !ktilde.im.is_finite() || ktilde.is_zero() || ktilde.im < 0.0
        {
            return Err(DispersionError::InvalidWavenumber);
        }
        Ok(Self { ktilde })
    }

    pub fn ktilde(&self) -> C {
        self.ktilde
    }

    /// `k̃²`.
    pub fn k2(&self) -> C {
        self.ktilde * self.ktilde
    }
}

fn imag_positive_sqrt(z: C) -> C {
    let w = z.sqrt();
    if w.im > 0.0 {
        w
    } else if w.im < 0.0 {
        -w
    } else if w.re >= 0.0 {
        w
    } else {
        -w
    }
}

/// Continuous vertical wavenumber `γ(ξ) = √(k² − ξ²)` on the physical sheet
/// `Im γ > 0` (branch points map to 0).
pub fn gamma(xi: C, disp: &ContinuousDispersion) -> C {
    imag_positive_sqrt(disp.k * disp.k - xi * xi)
}

/// Three-dimensional `γ(ξ₁, ξ₂) = √(k² − ξ₁² − ξ₂²)`, physical sheet.
pub fn gamma_3d(xi1: C, xi2: C, disp: &ContinuousDispersion) -> C {
    imag_positive_sqrt(disp.k * disp.k - xi1 * xi1 - xi2 * xi2)
}

const CUT_TOLERANCE: f64 = 1e-10;

/// Root of `q² + bq + 1 = 0` with `|q| < 1`, computed against cancellation by
/// forming the large root first.
///
/// Both roots lie on the unit circle exactly when `b` lies on the real
/// segment `[−2, 2]`; proximity to that segment is the primary cut test,
/// since near the segment's endpoints (the branch points) the root moduli
/// move away from 1 only like the square root of the distance.
fn small_quadratic_root(b: C) -> Result<C, DispersionError> {
    let sq = (b * b - 4.0).sqrt();
    let big = if (b.conj() * sq).re >= 0.0 {
        -(b + sq) / 2.0
    } else {
        -(b - sq) / 2.0
    };
    if big.is_zero() {
        return Err(DispersionError::InvalidArgument);
    }
    let small = 1.0 / big;
    let segment_distance = (b - C::new(b.re.clamp(-2.0, 2.0), 0.0)).norm();
    if segment_distance < CUT_TOLERANCE
        || ((small.norm() - 1.0).abs() < CUT_TOLERANCE && (big.norm() - 1.0).abs() < CUT_TOLERANCE)
    {
        return Err(DispersionError::OnCut { q: small });
    }
    Ok(small)
}

fn check_spectral(s: C) -> Result<(), DispersionError> {
    if s.is_zero() || !s.re.is_finite() || !s.im.is_finite() {
        Err(DispersionError::InvalidArgument)
    } else {
        Ok(())
    }
}

/// Physical vertical multiplier `q(s)` with `|q| < 1`, from
/// `s + 1/s + q + 1/q + k̃² − 4 = 0`.
pub fn q_physical(s: C, disp: &LatticeDispersion) -> Result<C, DispersionError> {
    check_spectral(s)?;
    small_quadratic_root(disp.k2() - 4.0 + s + 1.0 / s)
}

/// Physical vertical multiplier for the three-dimensional dispersion.
pub fn q_physical_3d(s1: C, s2: C, disp: &LatticeDispersion) -> Result<C, DispersionError> {
    check_spectral(s1)?;
    check_spectral(s2)?;
    small_quadratic_root(disp.k2() - 6.0 + s1 + 1.0 / s1 + s2 + 1.0 / s2)
}

fn upsilon_from_root(q: Result<C, DispersionError>) -> Result<C, DispersionError> {
    match q {
        Ok(q) => Ok((q - 1.0 / q) * 0.5),
        // at the branch points q = ±1 both roots coincide and Υ = 0; the
        // computed root only reaches ±1 to the square root of the input
        // accuracy, hence the wide vicinity
        Err(DispersionError::OnCut { q }) => {
            if (q - 1.0).norm() < 1e-6 || (q + 1.0).norm() < 1e-6 {
                Ok(C::zero())
            } else {
                Err(DispersionError::OnCut { q })
            }
        }
        Err(e) => Err(e),
    }
}

/// Discrete analogue of `iγ`: `Υ(s) = (q(s) − 1/q(s))/2`. Satisfies
/// `Υ(s) = Υ(1/s)` and vanishes at the four branch points.
pub fn upsilon(s: C, disp: &LatticeDispersion) -> Result<C, DispersionError> {
    upsilon_from_root(q_physical(s, disp))
}

/// Three-dimensional `Υ(s₁, s₂) = (q − 1/q)/2`.
pub fn upsilon_3d(s1: C, s2: C, disp: &LatticeDispersion) -> Result<C, DispersionError> {
    upsilon_from_root(q_physical_3d(s1, s2, disp))
}

/// Residual of the discrete dispersion relation for a candidate pair.
pub fn dispersion_residual(s: C, q: C, disp: &LatticeDispersion) -> C {
    s + 1.0 / s + q + 1.0 / q + disp.k2() - 4.0
}

/// Residual of the three-dimensional discrete dispersion relation.
pub fn dispersion_residual_3d(s1: C, s2: C, q: C, disp: &LatticeDispersion) -> C {
    s1 + 1.0 / s1 + s2 + 1.0 / s2 + q + 1.0 / q + disp.k2() - 6.0
}

/// The four branch points of `Υ`: `η₁₁, η₂₁` (where `q = 1`) form a
/// reciprocal pair, as do `η₁₂, η₂₂` (where `q = −1`).
#[derive(Clone, Copy, Debug)]
pub struct BranchPoints {
    pub eta11: C,
    pub eta21: C,
    pub eta12: C,
    pub eta22: C,
}

impl BranchPoints {
    pub fn all(&self) -> [C; 4] {
        [self.eta11, self.eta21, self.eta12, self.eta22]
    }
}

/// Branch points of `Υ` for the given lattice dispersion: with
/// `d₁ = k̃² − 2` and `d₂ = k̃² − 6`,
/// `η₁₁ = −d₁/2 − i√(4 − d₁²)/2`, `η₂₁ = −d₁/2 + i√(4 − d₁²)/2`,
/// `η₁₂ = −d₂/2 + √(d₂² − 4)/2`, `η₂₂ = −d₂/2 − √(d₂² − 4)/2`.
pub fn branch_points(disp: &LatticeDispersion) -> BranchPoints {
    let k2 = disp.k2();
    let d1 = k2 - 2.0;
    let d2 = k2 - 6.0;
    let r1 = (4.0 - d1 * d1).sqrt();
    let r2 = (d2 * d2 - 4.0).sqrt();
    let i = C::i();
    BranchPoints {
        eta11: -d1 / 2.0 - i * r1 / 2.0,
        eta21: -d1 / 2.0 + i * r1 / 2.0,
        eta12: -d2 / 2.0 + r2 / 2.0,
        eta22: -d2 / 2.0 - r2 / 2.0,
    }
}

/// Discrete incident plane wave `u^in(m, n) = (s^in)^{−m}·(q^in)^{−n}` with
/// `|s^in| > 1` and `|q^in| < 1`, plus the two incidence constants:
/// `Υ^in = (q^in − 1/q^in)/2` (vertical, the analogue of `iγ^in`) and
/// `Υ̂^in = Υ` evaluated at the spectral point `q^in`, which equals
/// `(1/s^in − s^in)/2` (horizontal, the analogue of `iξ^in`).
#[derive(Clone, Copy, Debug)]
pub struct Incidence2d {
    s_in: C,
    q_in: C,
    upsilon_in: C,
    upsilon_hat_in: C,
}

impl Incidence2d {
    /// Incidence from the horizontal multiplier; requires `|s^in| > 1`.
    pub fn new(s_in: C, disp: &LatticeDispersion) -> Result<Self, DispersionError> {
        check_spectral(s_in)?;
        if s_in.norm() <= 1.0 {
            return Err(DispersionError::InvalidIncidence);
        }
        let q_in = q_physical(s_in, disp)?;
        Ok(Self::from_pair(s_in, q_in))
    }

    /// Incidence of the guided waveguide mode `q^in = exp(iπp/N)` for plate
    /// separation `N`, with `1 ≤ p ≤ N − 1`; `s^in` is the `|s| > 1`
    /// dispersion root at the spectral point `q^in`.
    pub fn guided_mode(p: u32, n_sep: u32, disp: &LatticeDispersion) -> Result<Self, DispersionError> {
        if p == 0 || p >= n_sep {
            return Err(DispersionError::InvalidIncidence);
        }
        let phase = core::f64::consts::PI * p as f64 / n_sep as f64;
        let q_in = C::new(0.0, phase).exp();
        let s_in = 1.0 / q_physical(q_in, disp)?;
        Ok(Self::from_pair(s_in, q_in))
    }

    fn from_pair(s_in: C, q_in: C) -> Self {
        Self {
            s_in,
            q_in,
            upsilon_in: (q_in - 1.0 / q_in) * 0.5,
            upsilon_hat_in: (1.0 / s_in - s_in) * 0.5,
        }
    }

    pub fn s_in(&self) -> C {
        self.s_in
    }

    pub fn q_in(&self) -> C {
        self.q_in
    }

    /// `Υ^in`, the vertical incidence constant.
    pub fn upsilon_in(&self) -> C {
        self.upsilon_in
    }

    /// `Υ̂^in = Υ(q^in)`, the horizontal incidence constant.
    pub fn upsilon_hat_in(&self) -> C {
        self.upsilon_hat_in
    }

    /// Incident field value at a node.
    pub fn field(&self, m: i32, n: i32) -> C {
        self.s_in.powi(-m) * self.q_in.powi(-n)
    }
}

/// Continuous incident plane wave at angle `θ^in`:
/// `ξ^in = k·cos θ^in`, `γ^in = k·sin θ^in`.
#[derive(Clone, Copy, Debug)]
pub struct ContinuousIncidence {
    theta_in: C,
    xi_in: C,
    gamma_in: C,
}

impl ContinuousIncidence {
    pub fn new(theta_in: C, disp: &ContinuousDispersion) -> Self {
        Self {
            theta_in,
            xi_in: disp.k() * theta_in.cos(),
            gamma_in: disp.k() * theta_in.sin(),
        }
    }

    /// Guided waveguide mode `sin θ^in = πp/(k·b)` for guide width `b`.
    pub fn guided_mode(p: u32, b: f64, disp: &ContinuousDispersion) -> Result<Self, DispersionError> {
        if p == 0 || b <= 0.0 {
            return Err(DispersionError::InvalidIncidence);
        }
        let sin_theta = core::f64::consts::PI * p as f64 / (disp.k() * b);
        let theta = sin_theta.asin();
        Ok(Self::new(theta, disp))
    }

    pub fn theta_in(&self) -> C {
        self.theta_in
    }

    pub fn xi_in(&self) -> C {
        self.xi_in
    }

    pub fn gamma_in(&self) -> C {
        self.gamma_in
    }
}

/// Three-dimensional discrete incidence
/// `u^in(m, n, ℓ) = (s₁^in)^{−m}(s₂^in)^{−n}(q^in)^{−ℓ}` with
/// `|s₁^in|, |s₂^in| > 1` and `q^in` the physical vertical root.
#[derive(Clone, Copy, Debug)]
pub struct Incidence3d {
    s1_in: C,
    s2_in: C,
    q_in: C,
}

impl Incidence3d {
    pub fn new(s1_in: C, s2_in: C, disp: &LatticeDispersion) -> Result<Self, DispersionError> {
        check_spectral(s1_in)?;
        check_spectral(s2_in)?;
        if s1_in.norm() <= 1.0 || s2_in.norm() <= 1.0 {
            return Err(DispersionError::InvalidIncidence);
        }
        let q_in = q_physical_3d(s1_in, s2_in, disp)?;
        Ok(Self { s1_in, s2_in, q_in })
    }

    pub fn s1_in(&self) -> C {
        self.s1_in
    }

    pub fn s2_in(&self) -> C {
        self.s2_in
    }

    pub fn q_in(&self) -> C {
        self.q_in
    }

    /// Incident field value at a node.
    pub fn field(&self, m: i32, n: i32, l: i32) -> C {
        self.s1_in.powi(-m) * self.s2_in.powi(-n) * self.q_in.powi(-l)
    }
}

/// Three-dimensional continuous incidence wavevector; `ξ₃^in = γ(ξ₁^in, ξ₂^in)`.
#[derive(Clone, Copy, Debug)]
pub struct ContinuousIncidence3d {
    xi1_in: C,
    xi2_in: C,
    xi3_in: C,
}

impl ContinuousIncidence3d {
    pub fn new(xi1_in: C, xi2_in: C, disp: &ContinuousDispersion) -> Self {
        Self {
            xi1_in,
            xi2_in,
            xi3_in: gamma_3d(xi1_in, xi2_in, disp),
        }
    }

    pub fn xi1_in(&self) -> C {
        self.xi1_in
    }

    pub fn xi2_in(&self) -> C {
        self.xi2_in
    }

    pub fn xi3_in(&self) -> C {
        self.xi3_in
    }
}
