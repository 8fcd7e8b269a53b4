use lie_core::mat::{self, CMat, C64};
use lie_core::CartanElement;
use path_ode::*;
use proptest::prelude::*;
use std::f64::consts::PI;

fn system(a: &CartanElement, b: &CMat) -> impl Fn(&PathPoint) -> Option<CMat> {
    let am = a.to_matrix();
    let b = b.clone();
    move |p: &PathPoint| {
        let z = p.z();
        Some(&am / (z * z) + &b / z)
    }
}

fn sample_b() -> CMat {
    mat::from_rows(&[
        vec![C64::new(0.1, 0.05), C64::new(0.2, 0.0), C64::new(-0.1, 0.1)],
        vec![C64::new(-0.15, 0.0), C64::new(-0.05, 0.0), C64::new(0.1, 0.0)],
        vec![C64::new(0.05, -0.1), C64::new(0.2, 0.0), C64::new(0.0, 0.0)],
    ])
}

#[test]
fn diagonal_system_matches_closed_form_across_sheets() {
    // with B diagonal the formal solution is exact: e^{-A/z} z^B
    let a = CartanElement::real(&[-1.0, 0.0, 1.5]);
    let b = mat::diag(&[C64::new(0.2, 0.1), C64::new(-0.3, 0.0), C64::new(0.05, 0.0)]);
    let p0 = PathPoint::new(0.8, 0.3);
    let path = Path::starting_at(p0).radial_to(2.0).arc_to(0.3 + 2.0 * PI + 1.0).radial_to(1.1);
    let p1 = path.end().unwrap();
    let y0 = seed_irregular(&a, &b, &p0, 4).unwrap();
    let y1 = integrate_linear(system(&a, &b), &path, &y0, &IntegratorConfig::default()).unwrap();
    let expect = seed_irregular(&a, &b, &p1, 4).unwrap();
    let err = mat::frob(&(&y1 - &expect)) / mat::frob(&expect);
    assert!(err < 1e-11, "{err}");
}

#[test]
fn seeded_solution_transports_consistently() {
    // along an oscillatory direction the truncated seed at two radii agree
    let a = CartanElement::real(&[-1.0, 0.5, 2.0]);
    let b = sample_b();
    let h = formal_series_zero(&a, &b, 10).unwrap();
    let p0 = PathPoint::new(0.01, PI / 2.0);
    let p1 = PathPoint::new(0.02, PI / 2.0);
    let y0 = seed_irregular_with(&h, &a, &b, &p0);
    let path = Path::starting_at(p0).radial_to(p1.modulus);
    let y1 = integrate_linear(system(&a, &b), &path, &y0, &IntegratorConfig::default()).unwrap();
    let expect = seed_irregular_with(&h, &a, &b, &p1);
    let err = mat::frob(&(&y1 - &expect)) / mat::frob(&expect);
    assert!(err < 1e-9, "{err}");
}

#[test]
fn infinity_seed_transports_consistently() {
    let a = CartanElement::real(&[-1.0, 0.5, 2.0]);
    let b = sample_b();
    let p0 = PathPoint::new(6.0, 0.7);
    let p1 = PathPoint::new(2.0, -0.4);
    let path = Path::starting_at(p0).arc_to(p1.arg).radial_to(p1.modulus);
    let y0 = seed_regular_infinity(&a, &b, &p0).unwrap();
    let y1 = integrate_linear(system(&a, &b), &path, &y0, &IntegratorConfig::default()).unwrap();
    let expect = seed_regular_infinity(&a, &b, &p1).unwrap();
    let err = mat::frob(&(&y1 - &expect)) / mat::frob(&expect);
    assert!(err < 1e-11, "{err}");
}

#[test]
fn step_underflow_is_reported() {
    // the solution blows up at a pole on the path
    let path = Path::starting_at(PathPoint::new(1.0, 0.0)).radial_to(3.0);
    let f = |p: &PathPoint| {
        let w = p.z() - C64::new(2.0, 0.0);
        Some(CMat::from_element(1, 1, C64::new(-1.0, 0.0) / (w * w * w)))
    };
    let r = integrate_linear(f, &path, &mat::eye(1), &IntegratorConfig::default());
    assert!(matches!(r, Err(OdeError::StepUnderflow { .. }) | Err(OdeError::SingularOnPath { .. })), "{r:?}");
}

fn arb_path() -> impl Strategy<Value = Path> {
    (
        0.5f64..2.0,
        -3.0f64..3.0,
        prop::collection::vec((0usize..2, -1.5f64..1.5, 0.5f64..2.5), 1..4),
    )
        .prop_map(|(r0, a0, steps)| {
            let mut p = Path::starting_at(PathPoint::new(r0, a0));
            for (kind, da, r) in steps {
                let e = p.end().unwrap();
                p = if kind == 0 { p.arc_to(e.arg + da) } else { p.radial_to(r) };
            }
            p
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn concatenation_composes(p1 in arb_path(), extra in -1.0f64..1.0, r in 0.6f64..2.0) {
        let a = CartanElement::real(&[-0.5, 0.0, 0.7]);
        let b = sample_b();
        let e = p1.end().unwrap();
        let p2 = Path::starting_at(e).arc_to(e.arg + extra).radial_to(r);
        let cfg = IntegratorConfig::default();
        let y0 = mat::eye(3);
        let y_mid = integrate_linear(system(&a, &b), &p1, &y0, &cfg).unwrap();
        let y_seq = integrate_linear(system(&a, &b), &p2, &y_mid, &cfg).unwrap();
        let y_cat = integrate_linear(system(&a, &b), &p1.clone().concat(&p2), &y0, &cfg).unwrap();
        let err = mat::frob(&(&y_seq - &y_cat)) / mat::frob(&y_cat);
        prop_assert!(err < 1e-10, "{}", err);
    }

    #[test]
    fn reversal_inverts(p in arb_path()) {
        let a = CartanElement::real(&[-0.5, 0.0, 0.7]);
        let b = sample_b();
        let cfg = IntegratorConfig::default();
        let y = integrate_linear(system(&a, &b), &p, &mat::eye(3), &cfg).unwrap();
        let back = integrate_linear(system(&a, &b), &p.reversed(), &y, &cfg).unwrap();
        prop_assert!(mat::frob(&(back - mat::eye(3))) < 1e-9);
    }

    #[test]
    fn power_branch_follows_path(p in arb_path(), c in (-1.0f64..1.0, -1.0f64..1.0)) {
        let c = C64::new(c.0, c.1);
        let start = p.segments[0].start();
        let end = p.end().unwrap();
        let y0 = CMat::from_element(1, 1, start.pow(c));
        let y = integrate_linear(|q| Some(CMat::from_element(1, 1, c / q.z())), &p, &y0, &IntegratorConfig::default()).unwrap();
        prop_assert!((y[(0, 0)] - end.pow(c)).norm() < 1e-10 * end.pow(c).norm().max(1.0));
    }
}
