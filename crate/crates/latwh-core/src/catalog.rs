//! Catalog of scalar and matrix Wiener-Hopf kernels for the canonical
//! half-plane, wedge, strip, waveguide, and quarter-plane diffraction
//! problems, in parallel continuous and discrete (lattice) versions.
//!
//! Each problem provides the kernel `K` and forcing `F` of its functional
//! equation `Ψ⁻ = K·Ψ⁺ + F`, transcribed per side. A shared generating
//! function `𝒦`/`ℱ` per problem abstracts both sides: substituting the
//! continuous argument list (powers of `iγ`, `iξ − iξ^in`, exponentials)
//! reproduces the continuous kernel, and substituting the discrete list
//! (powers of `Υ`, `1 − s/s^in`, spectral monomials) reproduces the discrete
//! one. `analogy_residual` measures the agreement.
//!
//! The two waveguide-flavored generating functions bind arguments by role:
//! the horizontal shift factor (`s^M` / `e^{iξa}`) feeds the second slot and
//! the vertical one (`q^N` / `e^{iγb}`) the third.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_traits::Zero;

use crate::dispersion::{
    gamma, gamma_3d, q_physical, upsilon, upsilon_3d, ContinuousDispersion, ContinuousIncidence,
    ContinuousIncidence3d, DispersionError, Incidence2d, Incidence3d, LatticeDispersion,
};
use crate::C;

/// Errors from catalog evaluations.
#[derive(Clone, Copy, PartialEq, Debug)]
pub enum CatalogError {
    /// The kernel formula divides by a vanishing quantity at this point.
    KernelSingular,
    /// The forcing is evaluated at (or within 1e-12 of) an incidence pole.
    AtIncidencePole,
    /// Wrong number of generating-function arguments, spectral components,
    /// or spectral-function components.
    ArityMismatch { expected: usize, got: usize },
    /// The requested quantity is not defined for this problem or side.
    NotApplicable,
    /// The kernel does not have the commutative two-term matrix structure.
    NotKhrapkov,
    /// Geometry parameters violate the problem's constraints.
    InvalidGeometry,
    /// Underlying dispersion failure.
    Dispersion(DispersionError),
}

impl fmt::Display for CatalogError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::KernelSingular => write!(f, "kernel singular at this spectral point"),
            Self::AtIncidencePole => write!(f, "forcing evaluated at an incidence pole"),
            Self::ArityMismatch { expected, got } => {
                write!(f, "arity mismatch: expected {expected}, got {got}")
            }
            Self::NotApplicable => write!(f, "not defined for this problem or side"),
            Self::NotKhrapkov => write!(f, "kernel lacks the two-term commutative structure"),
            Self::InvalidGeometry => write!(f, "invalid geometry parameters"),
            Self::Dispersion(e) => write!(f, "dispersion error: {e}"),
        }
    }
}

impl core::error::Error for CatalogError {}

impl From<DispersionError> for CatalogError {
    fn from(e: DispersionError) -> Self {
        Self::Dispersion(e)
    }
}

/// The canonical problems.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum ProblemKind {
    /// Sound-soft half-plane screen.
    HalfPlaneDirichlet,
    /// Sound-hard half-plane screen.
    HalfPlaneNeumann,
    /// Lattice-specific half-plane variant whose boundary row drops the
    /// vertical back-neighbor (discrete side only).
    HalfPlaneNeumannElastic,
    /// Half-plane soft on one face and hard on the other.
    SoftHardHalfPlane,
    /// Right-angled wedge with soft faces.
    RightAngledWedge,
    /// Finite soft strip of half-width `M` (length `2a`).
    FiniteStrip,
    /// Two staggered semi-infinite hard plates, offset `M`, separation `N`.
    StaggeredWaveguide,
    /// Soft strip of length `L` inside a waveguide of width `N` (`a` in `b`).
    StripInWaveguide,
    /// Sound-soft quarter-plane in three dimensions.
    QuarterPlane,
}

impl ProblemKind {
    /// Kernel (and spectral vector) size.
    pub fn size(self) -> usize {
        match self {
            Self::HalfPlaneDirichlet
            | Self::HalfPlaneNeumann
            | Self::HalfPlaneNeumannElastic
            | Self::QuarterPlane => 1,
            Self::SoftHardHalfPlane
            | Self::FiniteStrip
            | Self::StaggeredWaveguide
            | Self::StripInWaveguide => 2,
            Self::RightAngledWedge => 3,
        }
    }
}

/// Which side of the continuous/discrete analogy a spec lives on.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Side {
    Discrete,
    Continuous,
}

/// A point in the spectral domain: one variable for the 2D problems, two for
/// the quarter-plane.
#[derive(Clone, Copy, Debug)]
pub enum SpectralPoint {
    One(C),
    Two(C, C),
}

#[derive(Clone, Copy, Debug)]
enum GeometryD {
    None,
    Strip { half_width: u32 },
    Staggered { stagger: u32, separation: u32 },
    GuideStrip { strip: u32, guide: u32 },
}

#[derive(Clone, Copy, Debug)]
enum GeometryC {
    None,
    Strip { a: f64 },
    Staggered { a: f64, b: f64 },
    GuideStrip { a: f64, b: f64 },
}

#[derive(Clone, Copy, Debug)]
enum Data {
    D2 {
        disp: LatticeDispersion,
        inc: Incidence2d,
        geom: GeometryD,
    },
    C2 {
        disp: ContinuousDispersion,
        inc: ContinuousIncidence,
        geom: GeometryC,
    },
    D3 {
        disp: LatticeDispersion,
        inc: Incidence3d,
    },
    C3 {
        disp: ContinuousDispersion,
        inc: ContinuousIncidence3d,
    },
}

/// A fully specified problem: kind, side, dispersion, incidence, geometry.
#[derive(Clone, Copy, Debug)]
pub struct ProblemSpec {
    kind: ProblemKind,
    data: Data,
}

impl ProblemSpec {
    pub fn half_plane_dirichlet(
        disp: LatticeDispersion,
        inc: Incidence2d,
    ) -> Result<Self, CatalogError> {
        Ok(Self {
            kind: ProblemKind::HalfPlaneDirichlet,
            data: Data::D2 {
                disp,
                inc,
                geom: GeometryD::None,
            },
        })
    }

    pub fn half_plane_dirichlet_continuous(
        disp: ContinuousDispersion,
        inc: ContinuousIncidence,
    ) -> Result<Self, CatalogError> {
        Ok(Self {
            kind: ProblemKind::HalfPlaneDirichlet,
            data: Data::C2 {
                disp,
                inc,
                geom: GeometryC::None,
            },
        })
    }

    pub fn half_plane_neumann(
        disp: LatticeDispersion,
        inc: Incidence2d,
    ) -> Result<Self, CatalogError> {
        Ok(Self {
            kind: ProblemKind::HalfPlaneNeumann,
            data: Data::D2 {
                disp,
                inc,
                geom: GeometryD::None,
            },
        })
    }

    pub fn half_plane_neumann_continuous(
        disp: ContinuousDispersion,
        inc: ContinuousIncidence,
    ) -> Result<Self, CatalogError> {
        Ok(Self {
            kind: ProblemKind::HalfPlaneNeumann,
            data: Data::C2 {
                disp,
                inc,
                geom: GeometryC::None,
            },
        })
    }

    /// Discrete-only variant; there is no continuous constructor.
    pub fn half_plane_neumann_elastic(
        disp: LatticeDispersion,
        inc: Incidence2d,
    ) -> Result<Self, CatalogError> {
        Ok(Self {
            kind: ProblemKind::HalfPlaneNeumannElastic,
            data: Data::D2 {
                disp,
                inc,
                geom: GeometryD::None,
            },
        })
    }

    pub fn soft_hard_half_plane(
        disp: LatticeDispersion,
        inc: Incidence2d,
    ) -> Result<Self, CatalogError> {
        Ok(Self {
            kind: ProblemKind::SoftHardHalfPlane,
            data: Data::D2 {
                disp,
                inc,
                geom: GeometryD::None,
            },
        })
    }

    pub fn soft_hard_half_plane_continuous(
        disp: ContinuousDispersion,
        inc: ContinuousIncidence,
    ) -> Result<Self, CatalogError> {
        Ok(Self {
            kind: ProblemKind::SoftHardHalfPlane,
            data: Data::C2 {
                disp,
                inc,
                geom: GeometryC::None,
            },
        })
    }

    pub fn wedge(disp: LatticeDispersion, inc: Incidence2d) -> Result<Self, CatalogError> {
        Ok(Self {
            kind: ProblemKind::RightAngledWedge,
            data: Data::D2 {
                disp,
                inc,
                geom: GeometryD::None,
            },
        })
    }

    /// Requires an incidence angle with `0 ≤ Re θ^in ≤ π/2`.
    pub fn wedge_continuous(
        disp: ContinuousDispersion,
        inc: ContinuousIncidence,
    ) -> Result<Self, CatalogError> {
        let theta = inc.theta_in();
        if theta.re < 0.0 || theta.re > core::f64::consts::FRAC_PI_2 {
            return Err(CatalogError::InvalidGeometry);
        }
        Ok(Self {
            kind: ProblemKind::RightAngledWedge,
            data: Data::C2 {
                disp,
                inc,
                geom: GeometryC::None,
            },
        })
    }

    /// Strip occupying `|m| ≤ half_width` on the lattice.
    pub fn finite_strip(
        disp: LatticeDispersion,
        inc: Incidence2d,
        half_width: u32,
    ) -> Result<Self, CatalogError> {
        Ok(Self {
            kind: ProblemKind::FiniteStrip,
            data: Data::D2 {
                disp,
                inc,
                geom: GeometryD::Strip { half_width },
            },
        })
    }

    /// Strip occupying `|x| ≤ a` in the continuum.
    pub fn finite_strip_continuous(
        disp: ContinuousDispersion,
        inc: ContinuousIncidence,
        a: f64,
    ) -> Result<Self, CatalogError> {
        if a.is_nan() || a <= 0.0 {
            return Err(CatalogError::InvalidGeometry);
        }
        Ok(Self {
            kind: ProblemKind::FiniteStrip,
            data: Data::C2 {
                disp,
                inc,
                geom: GeometryC::Strip { a },
            },
        })
    }

    /// Hard plates `{m ≥ −stagger, n = 0}` and `{m ≥ 0, n = −separation}`.
    pub fn staggered_waveguide(
        disp: LatticeDispersion,
        inc: Incidence2d,
        stagger: u32,
        separation: u32,
    ) -> Result<Self, CatalogError> {
        if separation == 0 {
            return Err(CatalogError::InvalidGeometry);
        }
        Ok(Self {
            kind: ProblemKind::StaggeredWaveguide,
            data: Data::D2 {
                disp,
                inc,
                geom: GeometryD::Staggered {
                    stagger,
                    separation,
                },
            },
        })
    }

    pub fn staggered_waveguide_continuous(
        disp: ContinuousDispersion,
        inc: ContinuousIncidence,
        a: f64,
        b: f64,
    ) -> Result<Self, CatalogError> {
        if b.is_nan() || b <= 0.0 || !a.is_finite() {
            return Err(CatalogError::InvalidGeometry);
        }
        Ok(Self {
            kind: ProblemKind::StaggeredWaveguide,
            data: Data::C2 {
                disp,
                inc,
                geom: GeometryC::Staggered { a, b },
            },
        })
    }

    /// Soft strip at depth `strip` inside a guide of width `guide`
    /// (`1 ≤ strip ≤ guide − 1`).
    pub fn strip_in_waveguide(
        disp: LatticeDispersion,
        inc: Incidence2d,
        strip: u32,
        guide: u32,
    ) -> Result<Self, CatalogError> {
        if strip == 0 || strip >= guide {
            return Err(CatalogError::InvalidGeometry);
        }
        Ok(Self {
            kind: ProblemKind::StripInWaveguide,
            data: Data::D2 {
                disp,
                inc,
                geom: GeometryD::GuideStrip {
                    strip,
                    guide,
                },
            },
        })
    }

    /// Soft strip at depth `a` inside a guide of width `b` (`0 < a < b`).
    pub fn strip_in_waveguide_continuous(
        disp: ContinuousDispersion,
        inc: ContinuousIncidence,
        a: f64,
        b: f64,
    ) -> Result<Self, CatalogError> {
        if a.is_nan() || b.is_nan() || a <= 0.0 || b <= a {
            return Err(CatalogError::InvalidGeometry);
        }
        Ok(Self {
            kind: ProblemKind::StripInWaveguide,
            data: Data::C2 {
                disp,
                inc,
                geom: GeometryC::GuideStrip { a, b },
            },
        })
    }

    pub fn quarter_plane(
        disp: LatticeDispersion,
        inc: Incidence3d,
    ) -> Result<Self, CatalogError> {
        Ok(Self {
            kind: ProblemKind::QuarterPlane,
            data: Data::D3 { disp, inc },
        })
    }

    pub fn quarter_plane_continuous(
        disp: ContinuousDispersion,
        inc: ContinuousIncidence3d,
    ) -> Result<Self, CatalogError> {
        Ok(Self {
            kind: ProblemKind::QuarterPlane,
            data: Data::C3 { disp, inc },
        })
    }

    pub fn kind(&self) -> ProblemKind {
        self.kind
    }

    pub fn side(&self) -> Side {
        match self.data {
            Data::D2 { .. } | Data::D3 { .. } => Side::Discrete,
            Data::C2 { .. } | Data::C3 { .. } => Side::Continuous,
        }
    }

    /// Lattice dispersion, if this is a discrete spec.
    pub fn lattice_dispersion(&self) -> Option<LatticeDispersion> {
        match self.data {
            Data::D2 { disp, .. } | Data::D3 { disp, .. } => Some(disp),
            _ => None,
        }
    }

    /// Continuum dispersion, if this is a continuous spec.
    pub fn continuous_dispersion(&self) -> Option<ContinuousDispersion> {
        match self.data {
            Data::C2 { disp, .. } | Data::C3 { disp, .. } => Some(disp),
            _ => None,
        }
    }

    /// Discrete plane-wave incidence, if present.
    pub fn incidence_2d(&self) -> Option<Incidence2d> {
        match self.data {
            Data::D2 { inc, .. } => Some(inc),
            _ => None,
        }
    }

    /// Three-dimensional discrete incidence, if present.
    pub fn incidence_3d(&self) -> Option<Incidence3d> {
        match self.data {
            Data::D3 { inc, .. } => Some(inc),
            _ => None,
        }
    }

    /// `(stagger, separation)` or `(strip, guide)` or `(half_width, 0)`.
    pub fn discrete_geometry(&self) -> Option<(u32, u32)> {
        match self.data {
            Data::D2 { geom, .. } => match geom {
                GeometryD::None => None,
                GeometryD::Strip { half_width } => Some((half_width, 0)),
                GeometryD::Staggered {
                    stagger,
                    separation,
                } => Some((stagger, separation)),
                GeometryD::GuideStrip { strip, guide } => Some((strip, guide)),
            },
            _ => None,
        }
    }
}

/// Kernel value: a scalar or a small square matrix.
#[derive(Clone, Copy, Debug)]
pub struct KernelValue {
    n: usize,
    m: [[C; 3]; 3],
}

impl KernelValue {
    pub fn scalar(v: C) -> Self {
        let mut m = [[C::zero(); 3]; 3];
        m[0][0] = v;
        Self { n: 1, m }
    }

    pub fn matrix2(rows: [[C; 2]; 2]) -> Self {
        let mut m = [[C::zero(); 3]; 3];
        for i in 0..2 {
            for j in 0..2 {
                m[i][j] = rows[i][j];
            }
        }
        Self { n: 2, m }
    }

    pub fn matrix3(rows: [[C; 3]; 3]) -> Self {
        Self { n: 3, m: rows }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn at(&self, i: usize, j: usize) -> C {
        assert!(i < self.n && j < self.n);
        self.m[i][j]
    }

    pub fn as_scalar(&self) -> Option<C> {
        (self.n == 1).then(|| self.m[0][0])
    }

    pub fn det(&self) -> C {
        let m = &self.m;
        match self.n {
            1 => m[0][0],
            2 => m[0][0] * m[1][1] - m[0][1] * m[1][0],
            _ => {
                m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
                    - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                    + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
            }
        }
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[C]) -> Result<Vec<C>, CatalogError> {
        if v.len() != self.n {
            return Err(CatalogError::ArityMismatch {
                expected: self.n,
                got: v.len(),
            });
        }
        Ok((0..self.n)
            .map(|i| (0..self.n).map(|j| self.m[i][j] * v[j]).sum())
            .collect())
    }

    /// Largest entrywise absolute difference.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.n, other.n);
        let mut r: f64 = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                r = r.max((self.m[i][j] - other.m[i][j]).norm());
            }
        }
        r
    }
}

/// Forcing value: a scalar or a small vector.
#[derive(Clone, Copy, Debug)]
pub struct ForcingValue {
    n: usize,
    v: [C; 3],
}

impl ForcingValue {
    pub fn scalar(v: C) -> Self {
        Self {
            n: 1,
            v: [v, C::zero(), C::zero()],
        }
    }

    pub fn vector2(v: [C; 2]) -> Self {
        Self {
            n: 2,
            v: [v[0], v[1], C::zero()],
        }
    }

    pub fn vector3(v: [C; 3]) -> Self {
        Self { n: 3, v }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn at(&self, i: usize) -> C {
        assert!(i < self.n);
        self.v[i]
    }

    pub fn as_slice(&self) -> &[C] {
        &self.v[..self.n]
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.n, other.n);
        let mut r: f64 = 0.0;
        for i in 0..self.n {
            r = r.max((self.v[i] - other.v[i]).norm());
        }
        r
    }
}

const SINGULAR_TOLERANCE: f64 = 1e-12;

fn nonsingular(v: C) -> Result<C, CatalogError> {
    if v.norm() < SINGULAR_TOLERANCE {
        Err(CatalogError::KernelSingular)
    } else {
        Ok(v)
    }
}

fn pole_guard(denom: C) -> Result<C, CatalogError> {
    if denom.norm() < SINGULAR_TOLERANCE {
        Err(CatalogError::AtIncidencePole)
    } else {
        Ok(denom)
    }
}

fn expect_one(z: SpectralPoint) -> Result<C, CatalogError> {
    match z {
        SpectralPoint::One(s) => Ok(s),
        SpectralPoint::Two(..) => Err(CatalogError::ArityMismatch {
            expected: 1,
            got: 2,
        }),
    }
}

fn expect_two(z: SpectralPoint) -> Result<(C, C), CatalogError> {
    match z {
        SpectralPoint::Two(a, b) => Ok((a, b)),
        SpectralPoint::One(_) => Err(CatalogError::ArityMismatch {
            expected: 2,
            got: 1,
        }),
    }
}

fn ic() -> C {
    C::i()
}

/// Kernel of the problem's functional equation at the spectral point,
/// evaluated from the side's own closed form.
pub fn kernel(spec: &ProblemSpec, z: SpectralPoint) -> Result<KernelValue, CatalogError> {
    match spec.data {
        Data::D2 { disp, geom, .. } => kernel_d2(spec.kind, &disp, geom, expect_one(z)?),
        Data::C2 { disp, geom, .. } => kernel_c2(spec.kind, &disp, geom, expect_one(z)?),
        Data::D3 { disp, .. } => {
            let (s1, s2) = expect_two(z)?;
            let ups = upsilon_3d(s1, s2, &disp)?;
            Ok(KernelValue::scalar(1.0 / nonsingular(ups)?))
        }
        Data::C3 { disp, .. } => {
            let (xi1, xi2) = expect_two(z)?;
            let ig = ic() * gamma_3d(xi1, xi2, &disp);
            Ok(KernelValue::scalar(1.0 / nonsingular(ig)?))
        }
    }
}

fn kernel_d2(
    kind: ProblemKind,
    disp: &LatticeDispersion,
    geom: GeometryD,
    s: C,
) -> Result<KernelValue, CatalogError> {
    let ups = upsilon(s, disp)?;
    match kind {
        ProblemKind::HalfPlaneDirichlet => Ok(KernelValue::scalar(1.0 / nonsingular(ups)?)),
        ProblemKind::HalfPlaneNeumann => Ok(KernelValue::scalar(ups)),
        ProblemKind::HalfPlaneNeumannElastic => {
            let q = q_physical(s, disp)?;
            Ok(KernelValue::scalar(s + 1.0 / s + q + disp.k2() - 3.0))
        }
        ProblemKind::SoftHardHalfPlane => {
            nonsingular(ups)?;
            Ok(KernelValue::matrix2([
                [C::new(0.5, 0.0), ups / 2.0],
                [-1.0 / (2.0 * ups), C::new(0.5, 0.0)],
            ]))
        }
        ProblemKind::RightAngledWedge => {
            let p = -1.0 / (2.0 * nonsingular(ups)?);
            let u2 = ups * ups;
            Ok(KernelValue::matrix3([
                [C::zero(), p * 2.0 * ups, p * (-2.0) * u2],
                [p * ups, p * ups, p * u2],
                [-p, p, p * ups],
            ]))
        }
        ProblemKind::FiniteStrip => {
            let GeometryD::Strip { half_width } = geom else {
                return Err(CatalogError::InvalidGeometry);
            };
            let m2 = 2 * half_width as i32;
            nonsingular(ups)?;
            Ok(KernelValue::matrix2([
                [-s.powi(m2), 1.0 / ups],
                [C::zero(), s.powi(-m2)],
            ]))
        }
        ProblemKind::StaggeredWaveguide => {
            let GeometryD::Staggered {
                stagger,
                separation,
            } = geom
            else {
                return Err(CatalogError::InvalidGeometry);
            };
            let q = q_physical(s, disp)?;
            let sm = s.powi(stagger as i32);
            let qn = q.powi(separation as i32);
            Ok(KernelValue::matrix2([
                [ups / 2.0, ups / 2.0 * sm * qn],
                [ups / 2.0 * qn / sm, ups / 2.0],
            ]))
        }
        ProblemKind::StripInWaveguide => {
            let GeometryD::GuideStrip { strip, guide } = geom else {
                return Err(CatalogError::InvalidGeometry);
            };
            let (el, en) = (strip as i32, guide as i32);
            let q = q_physical(s, disp)?;
            nonsingular(ups)?;
            let qn = q.powi(en) - q.powi(-en);
            nonsingular(qn)?;
            let denom = ups * qn;
            let a = q.powi(2 * el - en) - q.powi(en - 2 * el);
            Ok(KernelValue::matrix2([
                [
                    -ups * a / denom,
                    (q.powi(el) + q.powi(-el)) * (q.powi(en - el) + q.powi(el - en)) / denom,
                ],
                [
                    ups * ups * (q.powi(el) - q.powi(-el)) * (q.powi(en - el) - q.powi(el - en))
                        / denom,
                    ups * a / denom,
                ],
            ]))
        }
        ProblemKind::QuarterPlane => Err(CatalogError::ArityMismatch {
            expected: 2,
            got: 1,
        }),
    }
}

fn kernel_c2(
    kind: ProblemKind,
    disp: &ContinuousDispersion,
    geom: GeometryC,
    xi: C,
) -> Result<KernelValue, CatalogError> {
    let g = gamma(xi, disp);
    let ig = ic() * g;
    match kind {
        ProblemKind::HalfPlaneDirichlet => Ok(KernelValue::scalar(1.0 / nonsingular(ig)?)),
        ProblemKind::HalfPlaneNeumann => Ok(KernelValue::scalar(ig)),
        ProblemKind::HalfPlaneNeumannElastic => Err(CatalogError::NotApplicable),
        ProblemKind::SoftHardHalfPlane => {
            nonsingular(ig)?;
            Ok(KernelValue::matrix2([
                [C::new(0.5, 0.0), ig / 2.0],
                [-1.0 / (2.0 * ig), C::new(0.5, 0.0)],
            ]))
        }
        ProblemKind::RightAngledWedge => {
            let p = ic() / (2.0 * nonsingular(g)?);
            let g2 = g * g;
            Ok(KernelValue::matrix3([
                [C::zero(), p * 2.0 * ig, p * 2.0 * g2],
                [p * ig, p * ig, -p * g2],
                [-p, p, p * ig],
            ]))
        }
        ProblemKind::FiniteStrip => {
            let GeometryC::Strip { a } = geom else {
                return Err(CatalogError::InvalidGeometry);
            };
            let e = (ic() * xi * a).exp();
            Ok(KernelValue::matrix2([
                [-e * e, 1.0 / nonsingular(ig)?],
                [C::zero(), 1.0 / (e * e)],
            ]))
        }
        ProblemKind::StaggeredWaveguide => {
            let GeometryC::Staggered { a, b } = geom else {
                return Err(CatalogError::InvalidGeometry);
            };
            let up = (ic() * (xi * a + g * b)).exp();
            let down = (ic() * (-xi * a + g * b)).exp();
            Ok(KernelValue::matrix2([
                [ig / 2.0, ig / 2.0 * up],
                [ig / 2.0 * down, ig / 2.0],
            ]))
        }
        ProblemKind::StripInWaveguide => {
            let GeometryC::GuideStrip { a, b } = geom else {
                return Err(CatalogError::InvalidGeometry);
            };
            let sb = (g * b).sin();
            let p = -1.0 / nonsingular(g * sb)?;
            let s2ab = (g * (2.0 * a - b)).sin();
            Ok(KernelValue::matrix2([
                [
                    p * g * s2ab,
                    p * 2.0 * (g * a).cos() * (g * (b - a)).cos(),
                ],
                [
                    p * 2.0 * g * g * (g * a).sin() * (g * (b - a)).sin(),
                    -p * g * s2ab,
                ],
            ]))
        }
        ProblemKind::QuarterPlane => Err(CatalogError::ArityMismatch {
            expected: 2,
            got: 1,
        }),
    }
}

/// Forcing of the problem's functional equation at the spectral point.
pub fn forcing(spec: &ProblemSpec, z: SpectralPoint) -> Result<ForcingValue, CatalogError> {
    match spec.data {
        Data::D2 {
            disp, inc, geom, ..
        } => forcing_d2(spec.kind, &disp, &inc, geom, expect_one(z)?),
        Data::C2 {
            disp, inc, geom, ..
        } => forcing_c2(spec.kind, &disp, &inc, geom, expect_one(z)?),
        Data::D3 { inc, .. } => {
            let (s1, s2) = expect_two(z)?;
            let d1 = pole_guard(1.0 - s1 / inc.s1_in())?;
            let d2 = pole_guard(1.0 - s2 / inc.s2_in())?;
            Ok(ForcingValue::scalar(1.0 / (d1 * d2)))
        }
        Data::C3 { inc, .. } => {
            let (xi1, xi2) = expect_two(z)?;
            let d1 = pole_guard(xi1 - inc.xi1_in())?;
            let d2 = pole_guard(xi2 - inc.xi2_in())?;
            Ok(ForcingValue::scalar(-1.0 / (d1 * d2)))
        }
    }
}

fn forcing_d2(
    kind: ProblemKind,
    disp: &LatticeDispersion,
    inc: &Incidence2d,
    geom: GeometryD,
    s: C,
) -> Result<ForcingValue, CatalogError> {
    let s_in = inc.s_in();
    let p_in = pole_guard(1.0 - s / s_in)?;
    let ups_in = inc.upsilon_in();
    match kind {
        ProblemKind::HalfPlaneDirichlet => Ok(ForcingValue::scalar(1.0 / p_in)),
        ProblemKind::HalfPlaneNeumann => Ok(ForcingValue::scalar(-ups_in / p_in)),
        ProblemKind::HalfPlaneNeumannElastic => {
            let bar_in = s_in + 1.0 / s_in + inc.q_in() + disp.k2() - 3.0;
            Ok(ForcingValue::scalar(bar_in / p_in))
        }
        ProblemKind::SoftHardHalfPlane => {
            let ups = nonsingular(upsilon(s, disp)?)?;
            let pref = -1.0 / (2.0 * p_in);
            Ok(ForcingValue::vector2([
                pref * (ups + ups_in),
                pref * (ups_in / ups - 1.0),
            ]))
        }
        ProblemKind::RightAngledWedge => {
            let ups = nonsingular(upsilon(s, disp)?)?;
            let pp_in = pole_guard(1.0 - s * s_in)?;
            Ok(ForcingValue::vector3([
                ups_in * 2.0 / pp_in,
                ups_in / p_in,
                -ups_in / (p_in * ups),
            ]))
        }
        ProblemKind::FiniteStrip => {
            let GeometryD::Strip { half_width } = geom else {
                return Err(CatalogError::InvalidGeometry);
            };
            Ok(ForcingValue::vector2([
                s_in.powi(half_width as i32) / p_in,
                C::zero(),
            ]))
        }
        ProblemKind::StaggeredWaveguide => {
            let GeometryD::Staggered {
                stagger,
                separation,
            } = geom
            else {
                return Err(CatalogError::InvalidGeometry);
            };
            let pref = -ups_in / p_in;
            Ok(ForcingValue::vector2([
                pref * s_in.powi(stagger as i32),
                pref * inc.q_in().powi(separation as i32),
            ]))
        }
        ProblemKind::StripInWaveguide => {
            let GeometryD::GuideStrip { strip, guide } = geom else {
                return Err(CatalogError::InvalidGeometry);
            };
            let (el, en) = (strip as i32, guide as i32);
            let q = q_physical(s, disp)?;
            let q_in = inc.q_in();
            let ups = nonsingular(upsilon(s, disp)?)?;
            let ups_hat_in = inc.upsilon_hat_in();
            let qn = nonsingular(q.powi(en) - q.powi(-en))?;
            let pole1 = pole_guard(1.0 - q / q_in)?;
            let pole2 = pole_guard(1.0 - q * q_in)?;
            let poles = pole1 * pole2;
            let term1 = -ups_hat_in
                * (q_in.powi(el - en) + q_in.powi(en - el))
                * (q.powi(el) - q.powi(-el))
                / (2.0 * qn * poles);
            let term2 = ups_hat_in
                * ups_in
                * ((q.powi(el) + q.powi(-el)) * (q_in.powi(el - en) - q_in.powi(en - el))
                    + 2.0 * (q_in.powi(en) + q_in.powi(-en)))
                / (2.0 * ups * qn * poles);
            let f = term1 + term2;
            Ok(ForcingValue::vector2([
                f * (q.powi(en - el) + q.powi(el - en)),
                f * (-ups) * (q.powi(en - el) - q.powi(el - en)),
            ]))
        }
        ProblemKind::QuarterPlane => Err(CatalogError::ArityMismatch {
            expected: 2,
            got: 1,
        }),
    }
}

fn forcing_c2(
    kind: ProblemKind,
    disp: &ContinuousDispersion,
    inc: &ContinuousIncidence,
    geom: GeometryC,
    xi: C,
) -> Result<ForcingValue, CatalogError> {
    let xi_in = inc.xi_in();
    let g_in = inc.gamma_in();
    let dxi = pole_guard(xi - xi_in)?;
    match kind {
        ProblemKind::HalfPlaneDirichlet => Ok(ForcingValue::scalar(ic() / dxi)),
        ProblemKind::HalfPlaneNeumann => Ok(ForcingValue::scalar(g_in / dxi)),
        ProblemKind::HalfPlaneNeumannElastic => Err(CatalogError::NotApplicable),
        ProblemKind::SoftHardHalfPlane => {
            let g = nonsingular(gamma(xi, disp))?;
            let pref = 1.0 / (2.0 * dxi);
            Ok(ForcingValue::vector2([
                pref * (g + g_in),
                pref * (ic() - ic() * g_in / g),
            ]))
        }
        ProblemKind::RightAngledWedge => {
            let g = nonsingular(gamma(xi, disp))?;
            let sxi = pole_guard(xi + xi_in)?;
            Ok(ForcingValue::vector3([
                -g_in * 2.0 / sxi,
                -g_in / dxi,
                -g_in * ic() / (dxi * g),
            ]))
        }
        ProblemKind::FiniteStrip => {
            let GeometryC::Strip { a } = geom else {
                return Err(CatalogError::InvalidGeometry);
            };
            Ok(ForcingValue::vector2([
                ic() * (ic() * xi_in * a).exp() / dxi,
                C::zero(),
            ]))
        }
        ProblemKind::StaggeredWaveguide => {
            let GeometryC::Staggered { a, b } = geom else {
                return Err(CatalogError::InvalidGeometry);
            };
            let pref = g_in / dxi;
            Ok(ForcingValue::vector2([
                pref * (ic() * xi_in * a).exp(),
                pref * (ic() * g_in * b).exp(),
            ]))
        }
        ProblemKind::StripInWaveguide => {
            let GeometryC::GuideStrip { a, b } = geom else {
                return Err(CatalogError::InvalidGeometry);
            };
            let g = gamma(xi, disp);
            let sb = nonsingular(g * (g * b).sin())?;
            let dpole = pole_guard(g - g_in)?;
            let spole = pole_guard(g + g_in)?;
            let num = g * (g_in * (a - b)).cos() * (g * a).sin()
                - g_in * ((g * a).cos() * (g_in * (a - b)).sin() + (g_in * b).sin());
            let f = 2.0 * ic() * xi_in * num / (sb * dpole * spole);
            Ok(ForcingValue::vector2([
                f * (g * (b - a)).cos(),
                f * g * (g * (b - a)).sin(),
            ]))
        }
        ProblemKind::QuarterPlane => Err(CatalogError::ArityMismatch {
            expected: 2,
            got: 1,
        }),
    }
}

/// Shared generating kernel `𝒦` of a problem, evaluated on an explicit
/// argument list. Arities: one argument for the half-plane/wedge/
/// quarter-plane family, two for the finite strip, three for the two
/// waveguide problems.
pub fn generating_kernel(kind: ProblemKind, args: &[C]) -> Result<KernelValue, CatalogError> {
    let expect = |n: usize| -> Result<(), CatalogError> {
        if args.len() == n {
            Ok(())
        } else {
            Err(CatalogError::ArityMismatch {
                expected: n,
                got: args.len(),
            })
        }
    };
    match kind {
        ProblemKind::HalfPlaneDirichlet | ProblemKind::QuarterPlane => {
            expect(1)?;
            Ok(KernelValue::scalar(1.0 / nonsingular(args[0])?))
        }
        ProblemKind::HalfPlaneNeumann => {
            expect(1)?;
            Ok(KernelValue::scalar(args[0]))
        }
        ProblemKind::HalfPlaneNeumannElastic => Err(CatalogError::NotApplicable),
        ProblemKind::SoftHardHalfPlane => {
            expect(1)?;
            let t = nonsingular(args[0])?;
            Ok(KernelValue::matrix2([
                [C::new(0.5, 0.0), t / 2.0],
                [-1.0 / (2.0 * t), C::new(0.5, 0.0)],
            ]))
        }
        ProblemKind::RightAngledWedge => {
            expect(1)?;
            let t = nonsingular(args[0])?;
            let p = -1.0 / (2.0 * t);
            Ok(KernelValue::matrix3([
                [C::zero(), p * 2.0 * t, p * (-2.0) * t * t],
                [p * t, p * t, p * t * t],
                [-p, p, p * t],
            ]))
        }
        ProblemKind::FiniteStrip => {
            expect(2)?;
            let (t1, t2) = (nonsingular(args[0])?, nonsingular(args[1])?);
            Ok(KernelValue::matrix2([
                [-t2, 1.0 / t1],
                [C::zero(), 1.0 / t2],
            ]))
        }
        ProblemKind::StaggeredWaveguide => {
            expect(3)?;
            let (t1, t2, t3) = (args[0], nonsingular(args[1])?, args[2]);
            Ok(KernelValue::matrix2([
                [t1 / 2.0, t1 / 2.0 * t2 * t3],
                [t1 / 2.0 * t3 / t2, t1 / 2.0],
            ]))
        }
        ProblemKind::StripInWaveguide => {
            expect(3)?;
            let (t1, t2, t3) = (
                nonsingular(args[0])?,
                nonsingular(args[1])?,
                nonsingular(args[2])?,
            );
            let span = nonsingular(t2 - 1.0 / t2)?;
            let p = 1.0 / (t1 * span);
            let a = t3 * t3 / t2 - t2 / (t3 * t3);
            Ok(KernelValue::matrix2([
                [
                    -p * t1 * a,
                    p * (t3 + 1.0 / t3) * (t2 / t3 + t3 / t2),
                ],
                [
                    p * t1 * t1 * (t3 - 1.0 / t3) * (t2 / t3 - t3 / t2),
                    p * t1 * a,
                ],
            ]))
        }
    }
}

/// Shared generating forcing `ℱ` of a problem. Not available for the strip
/// in a waveguide or the elastic half-plane variant.
pub fn generating_forcing(kind: ProblemKind, args: &[C]) -> Result<ForcingValue, CatalogError> {
    let expect = |n: usize| -> Result<(), CatalogError> {
        if args.len() == n {
            Ok(())
        } else {
            Err(CatalogError::ArityMismatch {
                expected: n,
                got: args.len(),
            })
        }
    };
    match kind {
        ProblemKind::HalfPlaneDirichlet | ProblemKind::QuarterPlane => {
            expect(1)?;
            Ok(ForcingValue::scalar(1.0 / pole_guard(args[0])?))
        }
        ProblemKind::HalfPlaneNeumann => {
            expect(2)?;
            Ok(ForcingValue::scalar(-args[1] / pole_guard(args[0])?))
        }
        ProblemKind::SoftHardHalfPlane => {
            expect(3)?;
            let pref = -1.0 / (2.0 * pole_guard(args[0])?);
            let t2 = nonsingular(args[1])?;
            Ok(ForcingValue::vector2([
                pref * (t2 + args[2]),
                pref * (args[2] / t2 - 1.0),
            ]))
        }
        ProblemKind::RightAngledWedge => {
            expect(4)?;
            let t1 = pole_guard(args[0])?;
            let t2 = pole_guard(args[1])?;
            let t3 = nonsingular(args[2])?;
            let t4 = args[3];
            Ok(ForcingValue::vector3([
                t4 * 2.0 / t2,
                t4 / t1,
                -t4 / (t1 * t3),
            ]))
        }
        ProblemKind::FiniteStrip => {
            expect(2)?;
            Ok(ForcingValue::vector2([
                args[1] / pole_guard(args[0])?,
                C::zero(),
            ]))
        }
        ProblemKind::StaggeredWaveguide => {
            expect(4)?;
            let pref = -args[0] / pole_guard(args[1])?;
            Ok(ForcingValue::vector2([pref * args[2], pref * args[3]]))
        }
        ProblemKind::HalfPlaneNeumannElastic | ProblemKind::StripInWaveguide => {
            Err(CatalogError::NotApplicable)
        }
    }
}

/// Argument list binding the spec's side to the generating kernel.
pub fn kernel_args(spec: &ProblemSpec, z: SpectralPoint) -> Result<Vec<C>, CatalogError> {
    match spec.data {
        Data::D2 { disp, geom, .. } => {
            let s = expect_one(z)?;
            let ups = upsilon(s, &disp)?;
            match (spec.kind, geom) {
                (ProblemKind::HalfPlaneNeumannElastic, _) => Err(CatalogError::NotApplicable),
                (ProblemKind::FiniteStrip, GeometryD::Strip { half_width }) => {
                    Ok(vec![ups, s.powi(2 * half_width as i32)])
                }
                (
                    ProblemKind::StaggeredWaveguide,
                    GeometryD::Staggered {
                        stagger,
                        separation,
                    },
                ) => {
                    let q = q_physical(s, &disp)?;
                    Ok(vec![
                        ups,
                        s.powi(stagger as i32),
                        q.powi(separation as i32),
                    ])
                }
                (ProblemKind::StripInWaveguide, GeometryD::GuideStrip { strip, guide }) => {
                    let q = q_physical(s, &disp)?;
                    Ok(vec![ups, q.powi(guide as i32), q.powi(strip as i32)])
                }
                _ => Ok(vec![ups]),
            }
        }
        Data::C2 { disp, geom, .. } => {
            let xi = expect_one(z)?;
            let ig = ic() * gamma(xi, &disp);
            match (spec.kind, geom) {
                (ProblemKind::HalfPlaneNeumannElastic, _) => Err(CatalogError::NotApplicable),
                (ProblemKind::FiniteStrip, GeometryC::Strip { a }) => {
                    Ok(vec![ig, (2.0 * ic() * xi * a).exp()])
                }
                (ProblemKind::StaggeredWaveguide, GeometryC::Staggered { a, b }) => Ok(vec![
                    ig,
                    (ic() * xi * a).exp(),
                    (ic() * gamma(xi, &disp) * b).exp(),
                ]),
                (ProblemKind::StripInWaveguide, GeometryC::GuideStrip { a, b }) => {
                    let g = gamma(xi, &disp);
                    Ok(vec![ig, (ic() * g * b).exp(), (ic() * g * a).exp()])
                }
                _ => Ok(vec![ig]),
            }
        }
        Data::D3 { disp, .. } => {
            let (s1, s2) = expect_two(z)?;
            Ok(vec![upsilon_3d(s1, s2, &disp)?])
        }
        Data::C3 { disp, .. } => {
            let (xi1, xi2) = expect_two(z)?;
            Ok(vec![ic() * gamma_3d(xi1, xi2, &disp)])
        }
    }
}

/// Argument list binding the spec's side to the generating forcing.
pub fn forcing_args(spec: &ProblemSpec, z: SpectralPoint) -> Result<Vec<C>, CatalogError> {
    match spec.data {
        Data::D2 {
            disp, inc, geom, ..
        } => {
            let s = expect_one(z)?;
            let p_in = 1.0 - s / inc.s_in();
            let ups_in = inc.upsilon_in();
            match (spec.kind, geom) {
                (ProblemKind::HalfPlaneDirichlet, _) => Ok(vec![p_in]),
                (ProblemKind::HalfPlaneNeumann, _) => Ok(vec![p_in, ups_in]),
                (ProblemKind::SoftHardHalfPlane, _) => {
                    Ok(vec![p_in, upsilon(s, &disp)?, ups_in])
                }
                (ProblemKind::RightAngledWedge, _) => Ok(vec![
                    p_in,
                    1.0 - s * inc.s_in(),
                    upsilon(s, &disp)?,
                    ups_in,
                ]),
                (ProblemKind::FiniteStrip, GeometryD::Strip { half_width }) => {
                    Ok(vec![p_in, inc.s_in().powi(half_width as i32)])
                }
                (
                    ProblemKind::StaggeredWaveguide,
                    GeometryD::Staggered {
                        stagger,
                        separation,
                    },
                ) => Ok(vec![
                    ups_in,
                    p_in,
                    inc.s_in().powi(stagger as i32),
                    inc.q_in().powi(separation as i32),
                ]),
                _ => Err(CatalogError::NotApplicable),
            }
        }
        Data::C2 {
            disp, inc, geom, ..
        } => {
            let xi = expect_one(z)?;
            let dxi = ic() * inc.xi_in() - ic() * xi;
            let ig_in = ic() * inc.gamma_in();
            match (spec.kind, geom) {
                (ProblemKind::HalfPlaneDirichlet, _) => Ok(vec![dxi]),
                (ProblemKind::HalfPlaneNeumann, _) => Ok(vec![dxi, ig_in]),
                (ProblemKind::SoftHardHalfPlane, _) => {
                    Ok(vec![dxi, ic() * gamma(xi, &disp), ig_in])
                }
                (ProblemKind::RightAngledWedge, _) => Ok(vec![
                    dxi,
                    -ic() * inc.xi_in() - ic() * xi,
                    ic() * gamma(xi, &disp),
                    ig_in,
                ]),
                (ProblemKind::FiniteStrip, GeometryC::Strip { a }) => {
                    Ok(vec![dxi, (ic() * inc.xi_in() * a).exp()])
                }
                (ProblemKind::StaggeredWaveguide, GeometryC::Staggered { a, b }) => Ok(vec![
                    ig_in,
                    dxi,
                    (ic() * inc.xi_in() * a).exp(),
                    (ic() * inc.gamma_in() * b).exp(),
                ]),
                _ => Err(CatalogError::NotApplicable),
            }
        }
        Data::D3 { inc, .. } => {
            let (s1, s2) = expect_two(z)?;
            Ok(vec![
                (1.0 - s1 / inc.s1_in()) * (1.0 - s2 / inc.s2_in()),
            ])
        }
        Data::C3 { inc, .. } => {
            let (xi1, xi2) = expect_two(z)?;
            Ok(vec![
                (ic() * xi1 - ic() * inc.xi1_in()) * (ic() * xi2 - ic() * inc.xi2_in()),
            ])
        }
    }
}

/// Largest absolute deviation between the side's own kernel (and forcing,
/// when the generating forcing exists) and the generating-function value on
/// that side's argument list. The strip-in-waveguide compares the kernel
/// only; the elastic variant has no generating form.
pub fn analogy_residual(spec: &ProblemSpec, z: SpectralPoint) -> Result<f64, CatalogError> {
    let own = kernel(spec, z)?;
    let gen = generating_kernel(spec.kind, &kernel_args(spec, z)?)?;
    let mut r = own.max_abs_diff(&gen);
    match forcing_args(spec, z).and_then(|fargs| generating_forcing(spec.kind, &fargs)) {
        Ok(gen_f) => {
            let own_f = forcing(spec, z)?;
            r = r.max(own_f.max_abs_diff(&gen_f));
        }
        Err(CatalogError::NotApplicable) => {}
        Err(e) => return Err(e),
    }
    Ok(r)
}

/// Residual `Ψ⁻ − K·Ψ⁺ − F` of the functional equation at the spectral
/// point, given candidate spectral-function values.
pub fn wh_residual(
    spec: &ProblemSpec,
    z: SpectralPoint,
    psi_plus: &[C],
    psi_minus: &[C],
) -> Result<Vec<C>, CatalogError> {
    let k = kernel(spec, z)?;
    let f = forcing(spec, z)?;
    if psi_minus.len() != k.size() {
        return Err(CatalogError::ArityMismatch {
            expected: k.size(),
            got: psi_minus.len(),
        });
    }
    let kv = k.apply(psi_plus)?;
    Ok((0..k.size())
        .map(|i| psi_minus[i] - kv[i] - f.at(i))
        .collect())
}

/// Deviator polynomial of a kernel with the two-term commutative structure
/// `K = ½·I + b·J`, `J² = Δ·I`: the squared propagation symbol cleared to a
/// monic polynomial, coefficients in ascending order.
///
/// Only the soft/hard half-plane has this structure: continuously
/// `(iγ)² = ξ² − k²` (degree 2), discretely `(2sΥ)²`, the palindromic
/// quartic whose roots are the four branch points (degree 4).
pub fn deviator_polynomial(spec: &ProblemSpec) -> Result<Vec<C>, CatalogError> {
    if spec.kind != ProblemKind::SoftHardHalfPlane {
        return Err(CatalogError::NotKhrapkov);
    }
    match spec.data {
        Data::D2 { disp, .. } => {
            let k2 = disp.k2();
            let d1 = k2 - 2.0;
            let d2 = k2 - 6.0;
            Ok(vec![
                C::new(1.0, 0.0),
                d1 + d2,
                d1 * d2 + 2.0,
                d1 + d2,
                C::new(1.0, 0.0),
            ])
        }
        Data::C2 { disp, .. } => {
            let k = disp.k();
            Ok(vec![-k * k, C::zero(), C::new(1.0, 0.0)])
        }
        _ => Err(CatalogError::NotKhrapkov),
    }
}
