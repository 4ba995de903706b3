//! Command-line interface: dispersion tables, kernel and forcing sampling,
//! analogy and Green's-identity checks, the half-plane Wiener-Hopf solver,
//! truncated-lattice reference solves, and the finite-element equivalence
//! report.
//!
//! Every subcommand writes its artifacts into `--out-dir` (CSV tables plus
//! JSON reports carrying `"schema": "v1"`) and prints a short summary; all
//! output is deterministic for fixed arguments. Exit codes: 0 on success,
//! 1 on a validation error, 2 on a numerical failure.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use latwh_core::catalog::{
    analogy_residual, forcing, kernel, wh_residual, CatalogError, ProblemKind, ProblemSpec, Side,
    SpectralPoint,
};
use latwh_core::dispersion::{
    branch_points, q_physical, upsilon, ContinuousDispersion, ContinuousIncidence,
    ContinuousIncidence3d, DispersionError, Incidence2d, Incidence3d, LatticeDispersion,
};
use latwh_core::fem::{
    square_mass, square_mass_averaged, square_mass_lumped, square_stiffness, stencil_equivalence,
    triangle_mass, triangle_stiffness, Partition, Q,
};
use latwh_core::lattice::{
    greens_residual, helmholtz_residual, Field, LatticeDomain, LatticeError, Node,
};
use latwh_core::C;

use crate::io::{
    dispersion_to_csv, domain_from_json, field_to_csv, parse_complex, spectra_to_csv,
    DispersionSample, IoError,
};
use crate::oracle::{solve as oracle_solve, OracleConfig, OracleError, SpectralSample};
use crate::solver::{solve_half_plane, CircleContour, HalfPlaneSolution, SolverError};

const SCHEMA: &str = "v1";
/// Largest relative deviation from the reference solve tolerated by
/// `solve --verify`.
const VERIFY_TOLERANCE: f64 = 5e-3;

// ---------------------------------------------------------------------------
// errors and exit codes

/// A failure with its exit-code class: validation errors exit with 1,
/// numerical failures (singular kernels, nonzero index, stalled or
/// non-convergent solves) with 2.
#[derive(Debug)]
enum CliError {
    Validation(String),
    Numerical(String),
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        Self::Validation(e.to_string())
    }
}

impl From<LatticeError> for CliError {
    fn from(e: LatticeError) -> Self {
        Self::Validation(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Validation(e.to_string())
    }
}

impl From<DispersionError> for CliError {
    fn from(e: DispersionError) -> Self {
        match e {
            DispersionError::OnCut { .. } => Self::Numerical(e.to_string()),
            _ => Self::Validation(e.to_string()),
        }
    }
}

impl From<CatalogError> for CliError {
    fn from(e: CatalogError) -> Self {
        match e {
            CatalogError::KernelSingular | CatalogError::AtIncidencePole => {
                Self::Numerical(e.to_string())
            }
            CatalogError::Dispersion(inner) => inner.into(),
            _ => Self::Validation(e.to_string()),
        }
    }
}

impl From<SolverError> for CliError {
    fn from(e: SolverError) -> Self {
        match e {
            SolverError::KernelVanishesOnContour
            | SolverError::NonzeroIndex(_)
            | SolverError::SlowCoefficientDecay
            | SolverError::QuadratureNotConverged { .. } => Self::Numerical(e.to_string()),
            SolverError::Catalog(inner) => inner.into(),
            SolverError::Dispersion(inner) => inner.into(),
            _ => Self::Validation(e.to_string()),
        }
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::NotConverged { .. } | OracleError::MissingValue(_) => {
                Self::Numerical(e.to_string())
            }
            OracleError::Catalog(inner) => inner.into(),
            OracleError::Dispersion(inner) => inner.into(),
            _ => Self::Validation(e.to_string()),
        }
    }
}

// ---------------------------------------------------------------------------
// command tree

#[derive(Parser)]
#[command(name = "latwh", version, about = "Lattice Wiener-Hopf toolkit")]
struct Cli {
    /// Directory that receives the output artifacts.
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate the vertical multiplier and the propagation symbol on the
    /// unit circle; writes dispersion.csv and branch_points.json.
    Dispersion(DispersionCmd),
    /// Sample a problem's kernel and forcing; writes kernel.csv and
    /// forcing.csv.
    Kernel(KernelCmd),
    /// Compare a side's kernel and forcing with the shared generating
    /// function; writes analogy.json.
    AnalogyCheck(AnalogyCmd),
    /// Check the summation-by-parts identity with random fields; writes
    /// greens.json.
    GreensCheck(GreensCmd),
    /// Solve a half-plane problem by Wiener-Hopf factorization; writes
    /// solve_field.csv, solve_spectra.csv, and solve_diagnostics.json.
    Solve(SolveCmd),
    /// Solve a problem directly on a truncated lattice; writes
    /// oracle_field*.csv, oracle_spectra.csv, and oracle.json.
    Oracle(OracleCmd),
    /// Print the element matrices and the row-by-row stencil equivalence
    /// report as JSON (also written to fem.json).
    FemCheck(FemCmd),
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, ValueEnum)]
enum ProblemName {
    HalfPlaneDirichlet,
    HalfPlaneNeumann,
    HalfPlaneNeumannElastic,
    SoftHard,
    Wedge,
    Strip,
    Staggered,
    StripInWaveguide,
    QuarterPlane,
}

fn problem_name(p: ProblemName) -> &'static str {
    match p {
        ProblemName::HalfPlaneDirichlet => "half-plane-dirichlet",
        ProblemName::HalfPlaneNeumann => "half-plane-neumann",
        ProblemName::HalfPlaneNeumannElastic => "half-plane-neumann-elastic",
        ProblemName::SoftHard => "soft-hard",
        ProblemName::Wedge => "wedge",
        ProblemName::Strip => "strip",
        ProblemName::Staggered => "staggered",
        ProblemName::StripInWaveguide => "strip-in-waveguide",
        ProblemName::QuarterPlane => "quarter-plane",
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, ValueEnum)]
enum SideName {
    Discrete,
    Continuous,
}

fn side_name(s: SideName) -> &'static str {
    match s {
        SideName::Discrete => "discrete",
        SideName::Continuous => "continuous",
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, ValueEnum)]
enum ShapeName {
    Rectangle,
    LShape,
    Box,
}

/// Problem selection shared by `kernel` and `analogy-check`.
#[derive(Args)]
struct SpecArgs {
    /// Problem to evaluate.
    #[arg(long, value_enum)]
    problem: ProblemName,
    /// Side of the analogy to evaluate.
    #[arg(long, value_enum, default_value = "discrete")]
    side: SideName,
    /// Lattice wavenumber `k̃` as a complex literal `a+bi` (discrete side).
    #[arg(long)]
    ktilde: Option<String>,
    /// Continuum wavenumber `k` as a complex literal (continuous side).
    #[arg(long)]
    k: Option<String>,
    /// Incident horizontal multiplier `s^in` with `|s^in| > 1` (discrete).
    #[arg(long)]
    sin: Option<String>,
    /// Second incident multiplier for the discrete quarter plane.
    #[arg(long)]
    sin2: Option<String>,
    /// Incidence angle `θ^in` as a complex literal (continuous side).
    #[arg(long)]
    theta: Option<String>,
    /// First incident spectral component (continuous quarter plane).
    #[arg(long)]
    xi1: Option<String>,
    /// Second incident spectral component (continuous quarter plane).
    #[arg(long)]
    xi2: Option<String>,
    /// Strip half-width or stagger offset (discrete geometry).
    #[arg(long = "M")]
    m: Option<u32>,
    /// Plate separation or guide half-height (discrete geometry).
    #[arg(long = "N")]
    n: Option<u32>,
    /// Strip half-thickness inside a waveguide (discrete geometry).
    #[arg(long = "L")]
    l: Option<u32>,
    /// Strip half-width or stagger offset (continuous geometry).
    #[arg(long)]
    a: Option<f64>,
    /// Plate separation or guide half-height (continuous geometry).
    #[arg(long)]
    b: Option<f64>,
}

#[derive(Args)]
struct DispersionCmd {
    /// Lattice wavenumber `k̃` as a complex literal `a+bi`.
    #[arg(long)]
    ktilde: String,
    /// Number of unit-circle samples.
    #[arg(long, default_value_t = 256)]
    samples: usize,
}

#[derive(Args)]
struct KernelCmd {
    #[command(flatten)]
    spec: SpecArgs,
    /// Number of spectral samples (laid out on a square torus grid for the
    /// quarter plane).
    #[arg(long, default_value_t = 64)]
    samples: usize,
}

#[derive(Args)]
struct AnalogyCmd {
    #[command(flatten)]
    spec: SpecArgs,
    /// Number of spectral samples (laid out on a square torus grid for the
    /// quarter plane).
    #[arg(long, default_value_t = 256)]
    samples: usize,
}

#[derive(Args)]
struct GreensCmd {
    /// Lattice wavenumber `k̃` as a complex literal `a+bi`.
    #[arg(long)]
    ktilde: String,
    /// Built-in domain shape (ignored when --domain is given).
    #[arg(long, value_enum, default_value = "rectangle")]
    shape: ShapeName,
    /// Extent along m: nodes 0..=M.
    #[arg(long = "M", default_value_t = 8)]
    m: i32,
    /// Extent along n: nodes 0..=N.
    #[arg(long = "N", default_value_t = 6)]
    n: i32,
    /// Extent along l for the box shape: nodes 0..=L.
    #[arg(long = "L", default_value_t = 5)]
    l: i32,
    /// JSON domain file overriding --shape.
    #[arg(long)]
    domain: Option<PathBuf>,
    /// Number of random field pairs.
    #[arg(long, default_value_t = 50)]
    pairs: usize,
    /// Seed of the random field generator.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct SolveCmd {
    /// Problem to solve: half-plane-dirichlet or half-plane-neumann.
    #[arg(long, value_enum)]
    problem: ProblemName,
    /// Lattice wavenumber `k̃` as a complex literal `a+bi`.
    #[arg(long)]
    ktilde: String,
    /// Incident horizontal multiplier `s^in` with `|s^in| > 1`.
    #[arg(long)]
    sin: String,
    /// Contour samples: a power of two, at least 256.
    #[arg(long, default_value_t = 1024)]
    samples: usize,
    /// Field window half-width: values are written for `|m|, |n| ≤ window`.
    #[arg(long, default_value_t = 20)]
    window: i32,
    /// Compare spectra and field against a truncated-lattice reference
    /// solve and fail on disagreement.
    #[arg(long)]
    verify: bool,
    /// Spectral sum radius of the reference solve used by --verify.
    #[arg(long, default_value_t = 24)]
    radius: i32,
}

#[derive(Args)]
struct OracleCmd {
    /// Problem to solve directly: half-plane-dirichlet, half-plane-neumann,
    /// strip, staggered, or quarter-plane.
    #[arg(long, value_enum)]
    problem: ProblemName,
    /// Lattice wavenumber `k̃` as a complex literal `a+bi`.
    #[arg(long)]
    ktilde: String,
    /// Incident horizontal multiplier `s^in` with `|s^in| > 1`.
    #[arg(long)]
    sin: Option<String>,
    /// Second incident multiplier for the quarter plane.
    #[arg(long)]
    sin2: Option<String>,
    /// Strip half-width or stagger offset.
    #[arg(long = "M")]
    m: Option<u32>,
    /// Plate separation.
    #[arg(long = "N")]
    n: Option<u32>,
    /// Half-width of the zero-Dirichlet truncation box.
    #[arg(long, default_value_t = 24)]
    box_radius: i32,
    /// Spectral sums run over `|m| ≤ radius − 1`.
    #[arg(long, default_value_t = 16)]
    radius: i32,
    /// Spectral sample count (laid out on a square torus grid for the
    /// quarter plane).
    #[arg(long, default_value_t = 64)]
    samples: usize,
}

#[derive(Args)]
struct FemCmd {
    /// Rectangle extent along m: nodes 0..=M.
    #[arg(long = "M", default_value_t = 6)]
    m: i32,
    /// Rectangle extent along n: nodes 0..=N.
    #[arg(long = "N", default_value_t = 5)]
    n: i32,
    /// Corner cut position along m, making an L-shape.
    #[arg(long)]
    cut_m: Option<i32>,
    /// Corner cut position along n, making an L-shape.
    #[arg(long)]
    cut_n: Option<i32>,
    /// JSON domain file overriding the built-in shapes.
    #[arg(long)]
    domain: Option<PathBuf>,
}

// ---------------------------------------------------------------------------
// entry point

/// Parses `argv` (including the program name) and runs the subcommand.
/// Returns the process exit code.
pub fn run(argv: Vec<String>) -> i32 {
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let out_dir = cli.out_dir.clone();
    let result = match cli.command {
        Command::Dispersion(cmd) => run_dispersion(&cmd, &out_dir),
        Command::Kernel(cmd) => run_kernel(&cmd, &out_dir),
        Command::AnalogyCheck(cmd) => run_analogy(&cmd, &out_dir),
        Command::GreensCheck(cmd) => run_greens(&cmd, &out_dir),
        Command::Solve(cmd) => run_solve(&cmd, &out_dir),
        Command::Oracle(cmd) => run_oracle(&cmd, &out_dir),
        Command::FemCheck(cmd) => run_fem(&cmd, &out_dir),
    };
    match result {
        Ok(()) => 0,
        Err(CliError::Validation(message)) => {
            eprintln!("error: {message}");
            1
        }
        Err(CliError::Numerical(message)) => {
            eprintln!("numerical failure: {message}");
            2
        }
    }
}

// ---------------------------------------------------------------------------
// shared helpers

fn required<T: Copy>(v: Option<T>, flag: &str) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::Validation(format!("{flag} is required for this problem and side")))
}

fn required_complex(v: Option<&str>, flag: &str) -> Result<C, CliError> {
    let text =
        v.ok_or_else(|| CliError::Validation(format!("{flag} is required for this problem and side")))?;
    Ok(parse_complex(text)?)
}

fn pair(z: C) -> [f64; 2] {
    [z.re, z.im]
}

fn circle_point(j: usize, n: usize) -> C {
    let t = 2.0 * std::f64::consts::PI * j as f64 / n as f64;
    C::new(t.cos(), t.sin())
}

/// Largest integer whose square does not exceed `n`, at least 1.
fn integer_square_side(n: usize) -> usize {
    let mut side = (n as f64).sqrt().floor() as usize;
    while (side + 1) * (side + 1) <= n {
        side += 1;
    }
    while side > 1 && side * side > n {
        side -= 1;
    }
    side.max(1)
}

fn write_artifact(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, CliError> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    fs::write(&path, contents)?;
    Ok(path)
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("report is serializable");
    text.push('\n');
    text
}

fn build_discrete_spec(
    problem: ProblemName,
    ktilde: Option<&str>,
    sin: Option<&str>,
    sin2: Option<&str>,
    m: Option<u32>,
    n: Option<u32>,
    l: Option<u32>,
) -> Result<ProblemSpec, CliError> {
    let disp = LatticeDispersion::new(required_complex(ktilde, "--ktilde")?)?;
    if problem == ProblemName::QuarterPlane {
        let s1 = required_complex(sin, "--sin")?;
        let s2 = required_complex(sin2, "--sin2")?;
        let inc = Incidence3d::new(s1, s2, &disp)?;
        return Ok(ProblemSpec::quarter_plane(disp, inc)?);
    }
    let inc = Incidence2d::new(required_complex(sin, "--sin")?, &disp)?;
    Ok(match problem {
        ProblemName::HalfPlaneDirichlet => ProblemSpec::half_plane_dirichlet(disp, inc)?,
        ProblemName::HalfPlaneNeumann => ProblemSpec::half_plane_neumann(disp, inc)?,
        ProblemName::HalfPlaneNeumannElastic => {
            ProblemSpec::half_plane_neumann_elastic(disp, inc)?
        }
        ProblemName::SoftHard => ProblemSpec::soft_hard_half_plane(disp, inc)?,
        ProblemName::Wedge => ProblemSpec::wedge(disp, inc)?,
        ProblemName::Strip => ProblemSpec::finite_strip(disp, inc, required(m, "--M")?)?,
        ProblemName::Staggered => {
            ProblemSpec::staggered_waveguide(disp, inc, required(m, "--M")?, required(n, "--N")?)?
        }
        ProblemName::StripInWaveguide => {
            ProblemSpec::strip_in_waveguide(disp, inc, required(l, "--L")?, required(n, "--N")?)?
        }
        ProblemName::QuarterPlane => unreachable!(),
    })
}

fn build_continuous_spec(sel: &SpecArgs) -> Result<ProblemSpec, CliError> {
    let disp = ContinuousDispersion::new(required_complex(sel.k.as_deref(), "--k")?)?;
    if sel.problem == ProblemName::QuarterPlane {
        let xi1 = required_complex(sel.xi1.as_deref(), "--xi1")?;
        let xi2 = required_complex(sel.xi2.as_deref(), "--xi2")?;
        let inc = ContinuousIncidence3d::new(xi1, xi2, &disp);
        return Ok(ProblemSpec::quarter_plane_continuous(disp, inc)?);
    }
    let inc = ContinuousIncidence::new(required_complex(sel.theta.as_deref(), "--theta")?, &disp);
    Ok(match sel.problem {
        ProblemName::HalfPlaneDirichlet => ProblemSpec::half_plane_dirichlet_continuous(disp, inc)?,
        ProblemName::HalfPlaneNeumann => ProblemSpec::half_plane_neumann_continuous(disp, inc)?,
        ProblemName::HalfPlaneNeumannElastic => {
            return Err(CliError::Validation(
                "the elastic variant exists only on the discrete side".into(),
            ))
        }
        ProblemName::SoftHard => ProblemSpec::soft_hard_half_plane_continuous(disp, inc)?,
        ProblemName::Wedge => ProblemSpec::wedge_continuous(disp, inc)?,
        ProblemName::Strip => {
            ProblemSpec::finite_strip_continuous(disp, inc, required(sel.a, "--a")?)?
        }
        ProblemName::Staggered => ProblemSpec::staggered_waveguide_continuous(
            disp,
            inc,
            required(sel.a, "--a")?,
            required(sel.b, "--b")?,
        )?,
        ProblemName::StripInWaveguide => ProblemSpec::strip_in_waveguide_continuous(
            disp,
            inc,
            required(sel.a, "--a")?,
            required(sel.b, "--b")?,
        )?,
        ProblemName::QuarterPlane => unreachable!(),
    })
}

fn build_spec(sel: &SpecArgs) -> Result<ProblemSpec, CliError> {
    match sel.side {
        SideName::Discrete => build_discrete_spec(
            sel.problem,
            sel.ktilde.as_deref(),
            sel.sin.as_deref(),
            sel.sin2.as_deref(),
            sel.m,
            sel.n,
            sel.l,
        ),
        SideName::Continuous => build_continuous_spec(sel),
    }
}

/// Sample points of the problem's spectral variable: the unit circle on the
/// discrete side, a symmetric real interval on the continuous side, and a
/// square torus (or product) grid for the quarter plane.
fn spectral_samples(spec: &ProblemSpec, requested: usize) -> Result<Vec<SpectralPoint>, CliError> {
    if requested == 0 {
        return Err(CliError::Validation("--samples must be positive".into()));
    }
    let quarter = matches!(spec.kind(), ProblemKind::QuarterPlane);
    match spec.side() {
        Side::Discrete => {
            if quarter {
                let side = integer_square_side(requested);
                let mut points = Vec::with_capacity(side * side);
                for a in 0..side {
                    for b in 0..side {
                        points.push(SpectralPoint::Two(
                            circle_point(a, side),
                            circle_point(b, side),
                        ));
                    }
                }
                Ok(points)
            } else {
                Ok((0..requested)
                    .map(|j| SpectralPoint::One(circle_point(j, requested)))
                    .collect())
            }
        }
        Side::Continuous => {
            let rho = 3.0 * spec.continuous_dispersion().expect("continuous side").k().norm();
            let line =
                |j: usize, n: usize| C::new(rho * ((2 * j + 1) as f64 / n as f64 - 1.0), 0.0);
            if quarter {
                let side = integer_square_side(requested);
                let mut points = Vec::with_capacity(side * side);
                for a in 0..side {
                    for b in 0..side {
                        points.push(SpectralPoint::Two(line(a, side), line(b, side)));
                    }
                }
                Ok(points)
            } else {
                Ok((0..requested)
                    .map(|j| SpectralPoint::One(line(j, requested)))
                    .collect())
            }
        }
    }
}

fn point_prefix(z: SpectralPoint) -> String {
    match z {
        SpectralPoint::One(s) => format!("{},{}", s.re, s.im),
        SpectralPoint::Two(s1, s2) => format!("{},{},{},{}", s1.re, s1.im, s2.re, s2.im),
    }
}

// ---------------------------------------------------------------------------
// subcommands

#[derive(Serialize)]
struct BranchPointReport {
    schema: &'static str,
    ktilde: [f64; 2],
    eta11: [f64; 2],
    eta21: [f64; 2],
    eta12: [f64; 2],
    eta22: [f64; 2],
}

fn run_dispersion(cmd: &DispersionCmd, out_dir: &Path) -> Result<(), CliError> {
    if cmd.samples == 0 {
        return Err(CliError::Validation("--samples must be positive".into()));
    }
    let ktilde = parse_complex(&cmd.ktilde)?;
    let disp = LatticeDispersion::new(ktilde)?;
    let mut rows = Vec::with_capacity(cmd.samples);
    for j in 0..cmd.samples {
        let s = circle_point(j, cmd.samples);
        // on the cut (real k̃) the multiplier is two-valued; record NaN
        let (q, ups) = match q_physical(s, &disp) {
            Ok(q) => (q, upsilon(s, &disp)?),
            Err(DispersionError::OnCut { .. }) => {
                let nan = C::new(f64::NAN, f64::NAN);
                (nan, nan)
            }
            Err(e) => return Err(e.into()),
        };
        rows.push(DispersionSample { s, q, upsilon: ups });
    }
    let bp = branch_points(&disp);
    let report = BranchPointReport {
        schema: SCHEMA,
        ktilde: pair(ktilde),
        eta11: pair(bp.eta11),
        eta21: pair(bp.eta21),
        eta12: pair(bp.eta12),
        eta22: pair(bp.eta22),
    };
    let csv = write_artifact(out_dir, "dispersion.csv", &dispersion_to_csv(&rows))?;
    let json = write_artifact(out_dir, "branch_points.json", &to_json(&report))?;
    println!("wrote {} ({} samples)", csv.display(), cmd.samples);
    println!("wrote {}", json.display());
    Ok(())
}

fn run_kernel(cmd: &KernelCmd, out_dir: &Path) -> Result<(), CliError> {
    let spec = build_spec(&cmd.spec)?;
    let points = spectral_samples(&spec, cmd.samples)?;
    let two = matches!(points.first(), Some(SpectralPoint::Two(..)));
    let zcols = if two {
        "re(z1),im(z1),re(z2),im(z2)"
    } else {
        "re(z),im(z)"
    };
    let forcing_applicable = match forcing(&spec, points[0]) {
        Ok(_) => true,
        Err(CatalogError::NotApplicable) => false,
        Err(e) => return Err(e.into()),
    };
    let mut kernel_csv = format!("{zcols},row,col,re,im\n");
    let mut forcing_csv = format!("{zcols},component,re,im\n");
    for &z in &points {
        let kv = kernel(&spec, z)?;
        let prefix = point_prefix(z);
        for i in 0..kv.size() {
            for j in 0..kv.size() {
                let v = kv.at(i, j);
                let _ = writeln!(kernel_csv, "{prefix},{i},{j},{},{}", v.re, v.im);
            }
        }
        if forcing_applicable {
            let fv = forcing(&spec, z)?;
            for i in 0..fv.size() {
                let v = fv.at(i);
                let _ = writeln!(forcing_csv, "{prefix},{i},{},{}", v.re, v.im);
            }
        }
    }
    let kpath = write_artifact(out_dir, "kernel.csv", &kernel_csv)?;
    let fpath = write_artifact(out_dir, "forcing.csv", &forcing_csv)?;
    println!("wrote {} ({} samples)", kpath.display(), points.len());
    if forcing_applicable {
        println!("wrote {}", fpath.display());
    } else {
        println!("wrote {} (no forcing for this problem)", fpath.display());
    }
    Ok(())
}

#[derive(Serialize)]
struct AnalogyReport {
    schema: &'static str,
    problem: &'static str,
    side: &'static str,
    samples: usize,
    max_residual: f64,
}

fn run_analogy(cmd: &AnalogyCmd, out_dir: &Path) -> Result<(), CliError> {
    let spec = build_spec(&cmd.spec)?;
    let points = spectral_samples(&spec, cmd.samples)?;
    let mut max_residual = 0.0f64;
    for &z in &points {
        max_residual = max_residual.max(analogy_residual(&spec, z)?);
    }
    let report = AnalogyReport {
        schema: SCHEMA,
        problem: problem_name(cmd.spec.problem),
        side: side_name(cmd.spec.side),
        samples: points.len(),
        max_residual,
    };
    let path = write_artifact(out_dir, "analogy.json", &to_json(&report))?;
    println!(
        "max residual {:.3e} over {} samples",
        max_residual,
        points.len()
    );
    println!("wrote {}", path.display());
    Ok(())
}

#[derive(Serialize)]
struct GreensReport {
    schema: &'static str,
    dim: u8,
    nodes: usize,
    pairs: usize,
    seed: u64,
    max_abs_residual: f64,
    max_rel_residual: f64,
}

fn run_greens(cmd: &GreensCmd, out_dir: &Path) -> Result<(), CliError> {
    if cmd.pairs == 0 {
        return Err(CliError::Validation("--pairs must be positive".into()));
    }
    let disp = LatticeDispersion::new(parse_complex(&cmd.ktilde)?)?;
    let k2 = disp.k2();
    let domain = match &cmd.domain {
        Some(path) => domain_from_json(&fs::read_to_string(path)?)?,
        None => match cmd.shape {
            ShapeName::Rectangle => LatticeDomain::build_rectangle((0, cmd.m), (0, cmd.n))?,
            ShapeName::LShape => {
                LatticeDomain::build_l_shape((0, cmd.m), (0, cmd.n), (cmd.m / 2, cmd.n / 2))?
            }
            ShapeName::Box => LatticeDomain::build_box((0, cmd.m), (0, cmd.n), (0, cmd.l))?,
        },
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cmd.seed);
    let mut max_abs = 0.0f64;
    let mut max_rel = 0.0f64;
    for _ in 0..cmd.pairs {
        let u = Field::from_fn(&domain, |_| {
            C::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        let w = Field::from_fn(&domain, |_| {
            C::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        let mut f = if domain.dim() == 2 {
            Field::new_2d()
        } else {
            Field::new_3d()
        };
        let mut g = f.clone();
        for v in domain.interior() {
            f.insert(v, helmholtz_residual(&u, v, k2, C::new(0.0, 0.0))?);
            g.insert(v, helmholtz_residual(&w, v, k2, C::new(0.0, 0.0))?);
        }
        let residual = greens_residual(&u, &w, &f, &g, &domain, k2)?.norm();
        let umax = u.iter().map(|(_, v)| v.norm()).fold(0.0, f64::max);
        let wmax = w.iter().map(|(_, v)| v.norm()).fold(0.0, f64::max);
        let scale = (umax * wmax * domain.node_count() as f64).max(1e-300);
        max_abs = max_abs.max(residual);
        max_rel = max_rel.max(residual / scale);
    }
    let report = GreensReport {
        schema: SCHEMA,
        dim: domain.dim(),
        nodes: domain.node_count(),
        pairs: cmd.pairs,
        seed: cmd.seed,
        max_abs_residual: max_abs,
        max_rel_residual: max_rel,
    };
    let path = write_artifact(out_dir, "greens.json", &to_json(&report))?;
    println!(
        "max relative residual {:.3e} over {} pairs",
        max_rel, cmd.pairs
    );
    println!("wrote {}", path.display());
    Ok(())
}

#[derive(Clone, Serialize)]
struct OracleComparison {
    box_radius: i32,
    sum_radius: i32,
    linear_residual: f64,
    spectra_points: usize,
    spectra_max_rel_diff: f64,
    field_half_width: i32,
    field_max_rel_diff: f64,
    max_tail_bound: f64,
}

#[derive(Serialize)]
struct SolveDiagnostics {
    schema: &'static str,
    problem: &'static str,
    ktilde: [f64; 2],
    s_in: [f64; 2],
    contour_samples: usize,
    window: i32,
    winding_index: i64,
    functional_equation_residual: f64,
    quadrature_check: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle: Option<OracleComparison>,
}

fn compare_with_oracle(
    spec: &ProblemSpec,
    solution: &HalfPlaneSolution,
    field: &Field,
    window: i32,
    sum_radius: i32,
) -> Result<OracleComparison, CliError> {
    let box_radius = sum_radius + 16;
    let reference = oracle_solve(spec, &OracleConfig::new(box_radius, sum_radius))?;
    let points = solution.contour().points();
    let step = (points.len() / 16).max(1);
    let mut diff = 0.0f64;
    let mut scale = 0.0f64;
    let mut max_tail = 0.0f64;
    let mut count = 0usize;
    for j in (0..points.len()).step_by(step) {
        let sample = reference.spectra(SpectralPoint::One(points[j]))?;
        diff = diff
            .max((solution.psi_plus_on_contour()[j] - sample.psi_plus[0]).norm())
            .max((solution.psi_minus_on_contour()[j] - sample.psi_minus[0]).norm());
        scale = scale
            .max(sample.psi_plus[0].norm())
            .max(sample.psi_minus[0].norm());
        max_tail = max_tail.max(sample.tail_bound);
        count += 1;
    }
    // the reference field is least truncated well inside the box
    let w = window.min(sum_radius / 2);
    let mut fdiff = 0.0f64;
    let mut fscale = 0.0f64;
    for m in -w..=w {
        for n in 0..=w {
            let node = Node::xy(m, n);
            let (Some(mine), Some(other)) = (field.get(node), reference.field().from_above(node))
            else {
                continue;
            };
            fdiff = fdiff.max((mine - other).norm());
            fscale = fscale.max(other.norm());
        }
    }
    Ok(OracleComparison {
        box_radius,
        sum_radius,
        linear_residual: reference.linear_residual(),
        spectra_points: count,
        spectra_max_rel_diff: diff / scale.max(1e-300),
        field_half_width: w,
        field_max_rel_diff: fdiff / fscale.max(1e-300),
        max_tail_bound: max_tail,
    })
}

fn run_solve(cmd: &SolveCmd, out_dir: &Path) -> Result<(), CliError> {
    if !matches!(
        cmd.problem,
        ProblemName::HalfPlaneDirichlet | ProblemName::HalfPlaneNeumann
    ) {
        return Err(CliError::Validation(
            "solve supports half-plane-dirichlet and half-plane-neumann".into(),
        ));
    }
    if cmd.window < 0 {
        return Err(CliError::Validation("--window must be nonnegative".into()));
    }
    let spec = build_discrete_spec(
        cmd.problem,
        Some(&cmd.ktilde),
        Some(&cmd.sin),
        None,
        None,
        None,
        None,
    )?;
    let contour = CircleContour::new(cmd.samples)?;
    let solution = solve_half_plane(&spec, &contour)?;
    let fe_residual = solution.functional_equation_residual()?;
    let field = solution.reconstruct_field(cmd.window, cmd.window, true)?;

    let spectra: Vec<SpectralSample> = contour
        .points()
        .iter()
        .enumerate()
        .map(|(j, &s)| SpectralSample {
            z: SpectralPoint::One(s),
            psi_plus: vec![solution.psi_plus_on_contour()[j]],
            psi_minus: vec![solution.psi_minus_on_contour()[j]],
            tail_bound: 0.0,
        })
        .collect();

    let comparison = if cmd.verify {
        Some(compare_with_oracle(
            &spec, &solution, &field, cmd.window, cmd.radius,
        )?)
    } else {
        None
    };

    let inc = spec.incidence_2d().expect("discrete 2d incidence");
    let diagnostics = SolveDiagnostics {
        schema: SCHEMA,
        problem: problem_name(cmd.problem),
        ktilde: pair(spec.lattice_dispersion().expect("discrete").ktilde()),
        s_in: pair(inc.s_in()),
        contour_samples: contour.len(),
        window: cmd.window,
        winding_index: 0,
        functional_equation_residual: fe_residual,
        quadrature_check: "passed",
        oracle: comparison.clone(),
    };

    let fpath = write_artifact(out_dir, "solve_field.csv", &field_to_csv(&field))?;
    let spath = write_artifact(out_dir, "solve_spectra.csv", &spectra_to_csv(&spectra)?)?;
    let dpath = write_artifact(out_dir, "solve_diagnostics.json", &to_json(&diagnostics))?;
    println!("functional equation residual {fe_residual:.3e}");
    if let Some(cmp) = &comparison {
        println!(
            "reference deviation: spectra {:.3e}, field {:.3e}",
            cmp.spectra_max_rel_diff, cmp.field_max_rel_diff
        );
    }
    println!("wrote {}", fpath.display());
    println!("wrote {}", spath.display());
    println!("wrote {}", dpath.display());
    if let Some(cmp) = &comparison {
        if cmp.spectra_max_rel_diff > VERIFY_TOLERANCE || cmp.field_max_rel_diff > VERIFY_TOLERANCE
        {
            return Err(CliError::Numerical(format!(
                "solution deviates from the reference solve beyond {VERIFY_TOLERANCE:e}"
            )));
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct OracleReport {
    schema: &'static str,
    problem: &'static str,
    box_radius: i32,
    sum_radius: i32,
    linear_residual: f64,
    spectra_samples: usize,
    max_wh_residual: f64,
    max_tail_bound: f64,
}

fn run_oracle(cmd: &OracleCmd, out_dir: &Path) -> Result<(), CliError> {
    let spec = build_discrete_spec(
        cmd.problem,
        Some(&cmd.ktilde),
        cmd.sin.as_deref(),
        cmd.sin2.as_deref(),
        cmd.m,
        cmd.n,
        None,
    )?;
    let cfg = OracleConfig::new(cmd.box_radius, cmd.radius);
    let result = oracle_solve(&spec, &cfg)?;

    let points = spectral_samples(&spec, cmd.samples)?;
    let mut samples = Vec::with_capacity(points.len());
    let mut max_wh = 0.0f64;
    let mut max_tail = 0.0f64;
    for &z in &points {
        let sample = result.spectra(z)?;
        let residual = wh_residual(&spec, z, &sample.psi_plus, &sample.psi_minus)?;
        max_wh = residual.iter().map(|r| r.norm()).fold(max_wh, f64::max);
        max_tail = max_tail.max(sample.tail_bound);
        samples.push(sample);
    }

    let report = OracleReport {
        schema: SCHEMA,
        problem: problem_name(cmd.problem),
        box_radius: cmd.box_radius,
        sum_radius: cmd.radius,
        linear_residual: result.linear_residual(),
        spectra_samples: points.len(),
        max_wh_residual: max_wh,
        max_tail_bound: max_tail,
    };

    let field = result.field();
    let fpath = write_artifact(out_dir, "oracle_field.csv", &field_to_csv(&field.single))?;
    println!("linear residual {:.3e}", result.linear_residual());
    println!("max functional-equation residual {max_wh:.3e}");
    println!("wrote {}", fpath.display());
    if !field.upper.is_empty() {
        let p = write_artifact(out_dir, "oracle_field_upper.csv", &field_to_csv(&field.upper))?;
        println!("wrote {}", p.display());
    }
    if !field.lower.is_empty() {
        let p = write_artifact(out_dir, "oracle_field_lower.csv", &field_to_csv(&field.lower))?;
        println!("wrote {}", p.display());
    }
    let spath = write_artifact(out_dir, "oracle_spectra.csv", &spectra_to_csv(&samples)?)?;
    let jpath = write_artifact(out_dir, "oracle.json", &to_json(&report))?;
    println!("wrote {}", spath.display());
    println!("wrote {}", jpath.display());
    Ok(())
}

#[derive(Serialize)]
struct FemReport {
    schema: &'static str,
    triangle_stiffness: Vec<Vec<String>>,
    triangle_mass: Vec<Vec<String>>,
    square_stiffness: Vec<Vec<String>>,
    square_mass_diag1: Vec<Vec<String>>,
    square_mass_diag2: Vec<Vec<String>>,
    square_mass_averaged: Vec<Vec<String>>,
    square_mass_lumped: Vec<Vec<String>>,
    domain_nodes: usize,
    rows_compared: usize,
    mismatches: usize,
    all_match: bool,
}

fn qmat<const N: usize>(m: [[Q; N]; N]) -> Vec<Vec<String>> {
    m.iter()
        .map(|row| row.iter().map(|v| v.to_string()).collect())
        .collect()
}

fn run_fem(cmd: &FemCmd, out_dir: &Path) -> Result<(), CliError> {
    let domain = match &cmd.domain {
        Some(path) => domain_from_json(&fs::read_to_string(path)?)?,
        None => match (cmd.cut_m, cmd.cut_n) {
            (Some(cm), Some(cn)) => LatticeDomain::build_l_shape((0, cmd.m), (0, cmd.n), (cm, cn))?,
            (None, None) => LatticeDomain::build_rectangle((0, cmd.m), (0, cmd.n))?,
            _ => {
                return Err(CliError::Validation(
                    "--cut-m and --cut-n must be given together".into(),
                ))
            }
        },
    };
    let equivalence = stencil_equivalence(&domain)?;
    let zero = Q::from_integer(0);
    let one = Q::from_integer(1);
    let reference = [(zero, zero), (one, zero), (zero, one)];
    let report = FemReport {
        schema: SCHEMA,
        triangle_stiffness: qmat(triangle_stiffness(reference)),
        triangle_mass: qmat(triangle_mass(reference)),
        square_stiffness: qmat(square_stiffness(Partition::Diag1)),
        square_mass_diag1: qmat(square_mass(Partition::Diag1)),
        square_mass_diag2: qmat(square_mass(Partition::Diag2)),
        square_mass_averaged: qmat(square_mass_averaged()),
        square_mass_lumped: qmat(square_mass_lumped()),
        domain_nodes: domain.node_count(),
        rows_compared: equivalence.rows,
        mismatches: equivalence.mismatches.len(),
        all_match: equivalence.all_match(),
    };
    let json = to_json(&report);
    print!("{json}");
    write_artifact(out_dir, "fem.json", &json)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::TempDir;

    fn run_args(args: &[&str]) -> i32 {
        run(args.iter().map(|s| s.to_string()).collect())
    }

    fn read_json(dir: &TempDir, name: &str) -> serde_json::Value {
        let text = fs::read_to_string(dir.path().join(name)).unwrap();
        serde_json::from_str(&text).unwrap()
    }

    #[test]
    fn classifies_errors_for_exit_codes() {
        assert!(matches!(
            CliError::from(SolverError::NonzeroIndex(1)),
            CliError::Numerical(_)
        ));
        assert!(matches!(
            CliError::from(CatalogError::KernelSingular),
            CliError::Numerical(_)
        ));
        assert!(matches!(
            CliError::from(OracleError::NotConverged { residual: 1.0 }),
            CliError::Numerical(_)
        ));
        assert!(matches!(
            CliError::from(SolverError::Catalog(CatalogError::KernelSingular)),
            CliError::Numerical(_)
        ));
        assert!(matches!(
            CliError::from(CatalogError::NotApplicable),
            CliError::Validation(_)
        ));
        assert!(matches!(
            CliError::from(SolverError::InvalidContour),
            CliError::Validation(_)
        ));
    }

    #[test]
    fn rejects_bad_arguments() {
        assert_eq!(run_args(&["latwh", "no-such-command"]), 1);
        assert_eq!(run_args(&["latwh", "dispersion", "--ktilde", "bogus"]), 1);
        assert_eq!(
            run_args(&["latwh", "dispersion", "--ktilde", "1+0.2i", "--samples", "0"]),
            1
        );
        // wavenumber in the lower half-plane
        assert_eq!(run_args(&["latwh", "dispersion", "--ktilde", "1-0.2i"]), 1);
        assert_eq!(
            run_args(&[
                "latwh", "solve", "--problem", "wedge", "--ktilde", "1+0.2i", "--sin", "1.5",
            ]),
            1
        );
        // missing geometry for the strip
        assert_eq!(
            run_args(&[
                "latwh",
                "analogy-check",
                "--problem",
                "strip",
                "--ktilde",
                "1+0.2i",
                "--sin",
                "1.5",
            ]),
            1
        );
        assert_eq!(run_args(&["latwh", "--help"]), 0);
    }

    #[test]
    fn dispersion_artifacts() {
        let dir = TempDir::new().unwrap();
        let out = dir.path().to_str().unwrap();
        assert_eq!(
            run_args(&[
                "latwh", "--out-dir", out, "dispersion", "--ktilde", "1+0.2i", "--samples", "16",
            ]),
            0
        );
        let csv = fs::read_to_string(dir.path().join("dispersion.csv")).unwrap();
        assert_eq!(csv.lines().count(), 17);
        let json = read_json(&dir, "branch_points.json");
        assert_eq!(json["schema"], "v1");
        assert!(json["eta11"].as_array().unwrap()[0].as_f64().is_some());
    }

    #[test]
    fn analogy_and_kernel_artifacts() {
        let dir = TempDir::new().unwrap();
        let out = dir.path().to_str().unwrap();
        assert_eq!(
            run_args(&[
                "latwh",
                "--out-dir",
                out,
                "analogy-check",
                "--problem",
                "staggered",
                "--side",
                "discrete",
                "--ktilde",
                "1+0.3i",
                "--sin",
                "1.9+0.3i",
                "--M",
                "3",
                "--N",
                "2",
                "--samples",
                "16",
            ]),
            0
        );
        let json = read_json(&dir, "analogy.json");
        assert_eq!(json["schema"], "v1");
        assert_eq!(json["problem"], "staggered");
        assert!(json["max_residual"].as_f64().unwrap() < 1e-10);

        assert_eq!(
            run_args(&[
                "latwh",
                "--out-dir",
                out,
                "kernel",
                "--problem",
                "strip-in-waveguide",
                "--ktilde",
                "1+0.3i",
                "--sin",
                "1.9+0.3i",
                "--L",
                "1",
                "--N",
                "3",
                "--samples",
                "8",
            ]),
            0
        );
        let kernel_csv = fs::read_to_string(dir.path().join("kernel.csv")).unwrap();
        assert_eq!(kernel_csv.lines().count(), 1 + 8 * 4);
        let forcing_csv = fs::read_to_string(dir.path().join("forcing.csv")).unwrap();
        assert_eq!(forcing_csv.lines().count(), 1 + 8 * 2);
    }

    #[test]
    fn greens_and_fem_artifacts() {
        let dir = TempDir::new().unwrap();
        let out = dir.path().to_str().unwrap();
        assert_eq!(
            run_args(&[
                "latwh",
                "--out-dir",
                out,
                "greens-check",
                "--ktilde",
                "1.2+0.4i",
                "--shape",
                "l-shape",
                "--M",
                "8",
                "--N",
                "6",
                "--pairs",
                "3",
                "--seed",
                "1",
            ]),
            0
        );
        let json = read_json(&dir, "greens.json");
        assert_eq!(json["schema"], "v1");
        assert!(json["max_rel_residual"].as_f64().unwrap() < 1e-12);

        assert_eq!(run_args(&["latwh", "--out-dir", out, "fem-check"]), 0);
        let json = read_json(&dir, "fem.json");
        assert_eq!(json["schema"], "v1");
        assert_eq!(json["all_match"], true);
        assert_eq!(json["mismatches"], 0);
        assert_eq!(json["square_mass_lumped"][0][0], "1/4");
    }

    #[test]
    fn solve_artifacts() {
        let dir = TempDir::new().unwrap();
        let out = dir.path().to_str().unwrap();
        assert_eq!(
            run_args(&[
                "latwh",
                "--out-dir",
                out,
                "solve",
                "--problem",
                "half-plane-neumann",
                "--ktilde",
                "1+0.3i",
                "--sin",
                "1.9+0.3i",
                "--samples",
                "256",
                "--window",
                "4",
            ]),
            0
        );
        let field = fs::read_to_string(dir.path().join("solve_field.csv")).unwrap();
        assert_eq!(field.lines().count(), 1 + 9 * 9);
        let spectra = fs::read_to_string(dir.path().join("solve_spectra.csv")).unwrap();
        assert_eq!(spectra.lines().count(), 1 + 256);
        let json = read_json(&dir, "solve_diagnostics.json");
        assert_eq!(json["schema"], "v1");
        assert!(json["functional_equation_residual"].as_f64().unwrap() < 1e-10);
        assert!(json.get("oracle").is_none());
    }

    #[test]
    fn oracle_artifacts() {
        let dir = TempDir::new().unwrap();
        let out = dir.path().to_str().unwrap();
        assert_eq!(
            run_args(&[
                "latwh",
                "--out-dir",
                out,
                "oracle",
                "--problem",
                "half-plane-dirichlet",
                "--ktilde",
                "1+0.4i",
                "--sin",
                "1.9+0.3i",
                "--box-radius",
                "12",
                "--radius",
                "6",
                "--samples",
                "8",
            ]),
            0
        );
        let spectra = fs::read_to_string(dir.path().join("oracle_spectra.csv")).unwrap();
        assert_eq!(spectra.lines().count(), 1 + 8);
        let json = read_json(&dir, "oracle.json");
        assert_eq!(json["schema"], "v1");
        assert!(json["linear_residual"].as_f64().unwrap() < 1e-9);
        assert!(json["max_wh_residual"].as_f64().unwrap() < 0.5);
        assert!(dir.path().join("oracle_field.csv").exists());
    }
}
