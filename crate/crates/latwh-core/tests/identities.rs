//! Cross-module checks: lattice plane waves against the dispersion relation,
//! boundary rows against the spectral symbol, and the kernel catalog against
//! both.

use latwh_core::catalog::{kernel, ProblemSpec, SpectralPoint};
use latwh_core::dispersion::{
    q_physical, q_physical_3d, upsilon, upsilon_3d, Incidence2d, LatticeDispersion,
};
use latwh_core::lattice::{
    classify_boundary, greens_residual, helmholtz_residual, normal_derivative, BoundaryClass,
    Field, LatticeDomain, Node,
};
use latwh_core::C;

fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

fn circle_point(j: usize, n: usize) -> C {
    C::from_polar(1.0, 2.0 * std::f64::consts::PI * j as f64 / n as f64)
}

/// Deterministic pseudo-random complex field values from node coordinates.
fn trig_value(v: Node) -> C {
    let t = 0.93 * v.m as f64 - 0.61 * v.n as f64 + 0.37 * v.l as f64;
    c(t.sin() + 0.4 * (2.3 * t).cos(), (1.7 * t).cos() - 0.2)
}

#[test]
fn plane_waves_lie_in_the_stencil_kernel() {
    let disp = LatticeDispersion::new(c(1.1, 0.4)).unwrap();
    let k2 = disp.k2();

    let domain = LatticeDomain::build_rectangle((-4, 8), (0, 9)).unwrap();
    for j in [3, 57, 140] {
        let s = circle_point(j, 256);
        let q = q_physical(s, &disp).unwrap();
        let u = Field::from_fn(&domain, |v| s.powi(v.m) * q.powi(v.n));
        for v in domain.interior() {
            let r = helmholtz_residual(&u, v, k2, c(0.0, 0.0)).unwrap();
            assert!(r.norm() < 1e-13, "2d residual {} at {v:?}", r.norm());
        }
    }

    let domain = LatticeDomain::build_box((0, 6), (-3, 3), (0, 6)).unwrap();
    for j in [11, 97] {
        let s1 = circle_point(j, 256);
        let s2 = circle_point(5 * j + 9, 256);
        let q = q_physical_3d(s1, s2, &disp).unwrap();
        let u = Field::from_fn(&domain, |v| s1.powi(v.m) * s2.powi(v.n) * q.powi(v.l));
        for v in domain.interior() {
            let r = helmholtz_residual(&u, v, k2, c(0.0, 0.0)).unwrap();
            assert!(r.norm() < 1e-13, "3d residual {} at {v:?}", r.norm());
        }
    }
}

#[test]
fn boundary_rows_reproduce_the_symbol_on_plane_waves() {
    let disp = LatticeDispersion::new(c(0.9, 0.35)).unwrap();
    let k2 = disp.k2();
    let domain = LatticeDomain::build_rectangle((-6, 6), (0, 8)).unwrap();

    for j in [19, 83, 201] {
        let s = circle_point(j, 256);
        let q = q_physical(s, &disp).unwrap();
        let ups = upsilon(s, &disp).unwrap();
        let u = Field::from_fn(&domain, |v| s.powi(v.m) * q.powi(v.n));
        // bottom edge away from the corners: the half-weighted row applied to
        // a decaying plane wave is the symbol times the trace
        for m in -5..=5 {
            let v = Node::xy(m, 0);
            assert_eq!(
                classify_boundary(&domain, v).unwrap(),
                BoundaryClass::StraightLine
            );
            let d = normal_derivative(&u, v, k2, BoundaryClass::StraightLine, &domain).unwrap();
            let expect = ups * s.powi(m);
            assert!((d - expect).norm() < 1e-13, "row mismatch at m={m}");
        }
    }
}

#[test]
fn greens_identity_annihilates_source_free_waves() {
    let disp = LatticeDispersion::new(c(1.3, 0.5)).unwrap();
    let k2 = disp.k2();
    let domain = LatticeDomain::build_l_shape((0, 10), (0, 9), (5, 4)).unwrap();

    let s = circle_point(47, 256);
    let q = q_physical(s, &disp).unwrap();
    let u = Field::from_fn(&domain, |v| s.powi(v.m) * q.powi(v.n));
    let w = Field::from_fn(&domain, trig_value);

    let mut f = Field::new_2d();
    let mut g = Field::new_2d();
    for v in domain.interior() {
        f.insert(v, c(0.0, 0.0));
        g.insert(v, helmholtz_residual(&w, v, k2, c(0.0, 0.0)).unwrap());
    }
    let r = greens_residual(&u, &w, &f, &g, &domain, k2).unwrap();
    let scale = domain.node_count() as f64;
    assert!(r.norm() / scale < 1e-13, "residual {}", r.norm());
}

#[test]
fn half_plane_kernels_are_built_from_the_symbol() {
    let disp = LatticeDispersion::new(c(1.0, 0.3)).unwrap();
    let inc = Incidence2d::new(c(1.8, 0.4), &disp).unwrap();
    let dirichlet = ProblemSpec::half_plane_dirichlet(disp, inc).unwrap();
    let neumann = ProblemSpec::half_plane_neumann(disp, inc).unwrap();

    for j in [7, 91, 233] {
        let s = circle_point(j, 256);
        let ups = upsilon(s, &disp).unwrap();
        let kd = kernel(&dirichlet, SpectralPoint::One(s))
            .unwrap()
            .as_scalar()
            .unwrap();
        let kn = kernel(&neumann, SpectralPoint::One(s))
            .unwrap()
            .as_scalar()
            .unwrap();
        assert!((kd - 1.0 / ups).norm() < 1e-13);
        assert!((kn - ups).norm() < 1e-13);
    }

    let s1 = circle_point(31, 256);
    let s2 = circle_point(119, 256);
    let u3 = upsilon_3d(s1, s2, &disp).unwrap();
    assert!(u3.norm() > 0.0);
}
