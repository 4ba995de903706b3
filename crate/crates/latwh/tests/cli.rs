//! End-to-end runs of the `latwh` binary: artifact layout, exit codes, and
//! byte-level determinism of the outputs.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use latwh::io::field_from_csv;
use tempfile::TempDir;

fn run_in(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_latwh"))
        .arg("--out-dir")
        .arg(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn read_json(dir: &Path, name: &str) -> serde_json::Value {
    let text = fs::read_to_string(dir.join(name)).expect("artifact exists");
    serde_json::from_str(&text).expect("valid json")
}

fn line_count(dir: &Path, name: &str) -> usize {
    fs::read_to_string(dir.join(name))
        .expect("artifact exists")
        .lines()
        .count()
}

#[test]
fn dispersion_run_is_deterministic() {
    let d1 = TempDir::new().unwrap();
    let d2 = TempDir::new().unwrap();
    let args = ["dispersion", "--ktilde", "1+0.2i", "--samples", "256"];
    assert!(run_in(d1.path(), &args).status.success());
    assert!(run_in(d2.path(), &args).status.success());
    assert_eq!(line_count(d1.path(), "dispersion.csv"), 257);
    for name in ["dispersion.csv", "branch_points.json"] {
        let a = fs::read(d1.path().join(name)).unwrap();
        let b = fs::read(d2.path().join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between runs");
    }
    let json = read_json(d1.path(), "branch_points.json");
    assert_eq!(json["schema"], "v1");
    for key in ["eta11", "eta21", "eta12", "eta22"] {
        assert!(json[key].as_array().is_some(), "missing {key}");
    }
}

#[test]
fn analogy_check_runs_on_both_sides() {
    let dir = TempDir::new().unwrap();
    let out = run_in(
        dir.path(),
        &[
            "analogy-check",
            "--problem",
            "staggered",
            "--side",
            "discrete",
            "--ktilde",
            "1+0.25i",
            "--sin",
            "1.8+0.4i",
            "--M",
            "3",
            "--N",
            "2",
        ],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let json = read_json(dir.path(), "analogy.json");
    assert_eq!(json["problem"], "staggered");
    assert_eq!(json["samples"], 256);
    assert!(json["max_residual"].as_f64().unwrap() < 1e-12);

    let out = run_in(
        dir.path(),
        &[
            "analogy-check",
            "--problem",
            "wedge",
            "--side",
            "continuous",
            "--k",
            "1.2+0.3i",
            "--theta",
            "0.7+0.1i",
        ],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let json = read_json(dir.path(), "analogy.json");
    assert_eq!(json["side"], "continuous");
    assert!(json["max_residual"].as_f64().unwrap() < 1e-12);
}

#[test]
fn solve_writes_field_spectra_and_diagnostics() {
    let dir = TempDir::new().unwrap();
    let out = run_in(
        dir.path(),
        &[
            "solve",
            "--problem",
            "half-plane-dirichlet",
            "--ktilde",
            "1+0.15i",
            "--sin",
            "1.5",
            "--window",
            "20",
        ],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(line_count(dir.path(), "solve_field.csv"), 1 + 41 * 41);
    assert_eq!(line_count(dir.path(), "solve_spectra.csv"), 1 + 1024);
    let json = read_json(dir.path(), "solve_diagnostics.json");
    assert_eq!(json["schema"], "v1");
    assert_eq!(json["winding_index"], 0);
    assert_eq!(json["quadrature_check"], "passed");
    assert!(json["functional_equation_residual"].as_f64().unwrap() < 1e-8);
    assert!(json.get("oracle").is_none());

    let text = fs::read_to_string(dir.path().join("solve_field.csv")).unwrap();
    let field = field_from_csv(&text).unwrap();
    assert_eq!(field.len(), 41 * 41);
    assert_eq!(field.dim(), 2);
}

#[test]
fn verify_against_a_truncated_reference_sets_the_exit_code() {
    let dir = TempDir::new().unwrap();
    let out = run_in(
        dir.path(),
        &[
            "solve",
            "--problem",
            "half-plane-dirichlet",
            "--ktilde",
            "1+0.3i",
            "--sin",
            "1.5",
            "--samples",
            "256",
            "--window",
            "4",
            "--verify",
            "--radius",
            "2",
        ],
    );
    assert_eq!(out.status.code(), Some(2));
    // artifacts are still written, with the comparison in the diagnostics
    let json = read_json(dir.path(), "solve_diagnostics.json");
    let cmp = &json["oracle"];
    assert_eq!(cmp["sum_radius"], 2);
    assert!(cmp["spectra_max_rel_diff"].as_f64().unwrap() > 5e-3);
}

#[test]
fn greens_check_accepts_a_domain_file() {
    let dir = TempDir::new().unwrap();
    let domain = latwh_core::lattice::LatticeDomain::build_l_shape((0, 9), (0, 8), (4, 5)).unwrap();
    let path = dir.path().join("domain.json");
    fs::write(&path, latwh::io::domain_to_json(&domain)).unwrap();
    let out = run_in(
        dir.path(),
        &[
            "greens-check",
            "--ktilde",
            "1.1+0.3i",
            "--domain",
            path.to_str().unwrap(),
            "--pairs",
            "3",
            "--seed",
            "7",
        ],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let json = read_json(dir.path(), "greens.json");
    assert_eq!(json["dim"], 2);
    assert_eq!(json["pairs"], 3);
    assert_eq!(json["nodes"].as_u64().unwrap() as usize, domain.node_count());
    assert!(json["max_rel_residual"].as_f64().unwrap() < 1e-12);
}

#[test]
fn fem_check_prints_the_report_it_writes() {
    let dir = TempDir::new().unwrap();
    let out = run_in(dir.path(), &["fem-check", "--M", "5", "--N", "4"]);
    assert!(out.status.success());
    let stdout: serde_json::Value =
        serde_json::from_slice(&out.stdout).expect("stdout is the report");
    assert_eq!(stdout["all_match"], true);
    assert_eq!(stdout["mismatches"], 0);
    assert_eq!(stdout["domain_nodes"], 30);
    assert_eq!(stdout["square_mass_lumped"][0][0], "1/4");
    assert_eq!(stdout["triangle_stiffness"][0][0], "-1");
    let file = read_json(dir.path(), "fem.json");
    assert_eq!(file, stdout);
}

#[test]
fn oracle_writes_face_fields_for_slit_problems() {
    let dir = TempDir::new().unwrap();
    let out = run_in(
        dir.path(),
        &[
            "oracle",
            "--problem",
            "staggered",
            "--ktilde",
            "1+0.5i",
            "--sin",
            "1.9+0.4i",
            "--M",
            "1",
            "--N",
            "2",
            "--box-radius",
            "14",
            "--radius",
            "7",
            "--samples",
            "8",
        ],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("oracle_field.csv").exists());
    assert!(dir.path().join("oracle_field_upper.csv").exists());
    assert!(dir.path().join("oracle_field_lower.csv").exists());
    // two kernel components per sample point
    assert_eq!(line_count(dir.path(), "oracle_spectra.csv"), 1 + 16);
    let json = read_json(dir.path(), "oracle.json");
    assert!(json["linear_residual"].as_f64().unwrap() < 1e-9);
    assert!(json["max_wh_residual"].as_f64().unwrap() < 0.5);
}

#[test]
fn invalid_arguments_exit_with_one() {
    let dir = TempDir::new().unwrap();
    // incidence must come from outside the unit circle
    let out = run_in(
        dir.path(),
        &[
            "solve",
            "--problem",
            "half-plane-dirichlet",
            "--ktilde",
            "1+0.15i",
            "--sin",
            "0.5",
        ],
    );
    assert_eq!(out.status.code(), Some(1));
    // no direct reference solve for the wedge
    let out = run_in(
        dir.path(),
        &[
            "oracle",
            "--problem",
            "wedge",
            "--ktilde",
            "1+0.3i",
            "--sin",
            "1.9+0.3i",
        ],
    );
    assert_eq!(out.status.code(), Some(1));
    // malformed complex literal
    let out = run_in(dir.path(), &["dispersion", "--ktilde", "banana"]);
    assert_eq!(out.status.code(), Some(1));
    // help reports success
    let out = run_in(dir.path(), &["--help"]);
    assert_eq!(out.status.code(), Some(0));
}
