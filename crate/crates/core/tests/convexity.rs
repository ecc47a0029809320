mod common;

use common::*;
use cone_scoring::convexity::{
    analytic_directional_derivative, certify_prop22, certify_subgradient, certify_sublinearity, default_steps,
    prop22_directions, right_directional_derivative, run_suite, symmetric_derivative, two_sided_derivative, GridShape,
    Sampler, Suite, Tolerances,
};
use cone_scoring::densities::{Bump, Density, Field};
use cone_scoring::pairing::QuadratureScheme;
use cone_scoring::rules::{entropy, ScoringRuleId};
use cone_scoring::Error;
use proptest::prelude::*;
use ScoringRuleId::*;

fn scheme() -> QuadratureScheme {
    QuadratureScheme::default()
}

fn f(d: Density) -> Field {
    Field::from(d)
}

fn n(m: f64, v: f64) -> Field {
    f(Density::gaussian(m, v).unwrap())
}

fn uniform() -> Field {
    f(Density::uniform_grid(401).unwrap())
}

fn triangle() -> Field {
    let v = (0..401).map(|i| 2.0 - 4.0 * (i as f64 / 400.0 - 0.5).abs()).collect();
    f(Density::grid(0.0, 1.0, v).unwrap())
}

#[test]
fn right_derivatives_of_reference_cases() {
    let steps = default_steps();
    let d = right_directional_derivative(&Logarithmic, &n(0.0, 1.0), &n(0.0, 1.0), &steps, &scheme()).unwrap();
    assert_close(d.value, shannon_gauss(1.0), 1e-8, "Shannon p = q");
    let d = right_directional_derivative(&Logarithmic, &n(0.0, 1.0), &n(1.0, 1.0), &steps, &scheme()).unwrap();
    assert_close(d.value, shannon_gauss(1.0) - 0.5, 1e-7, "Shannon shifted");
    assert_eq!(d.monotonicity_violations, 0);
    assert!(d.converged);
    let d = right_directional_derivative(&Quadratic, &uniform(), &uniform(), &steps, &scheme()).unwrap();
    assert_close(d.value, 1.0, 1e-10, "quadratic uniform");
}

#[test]
fn closed_form_derivatives() {
    let a = analytic_directional_derivative(Logarithmic, &n(0.0, 1.0), &n(1.0, 1.0), &scheme()).unwrap();
    assert_close(a, -1.918_938_533_204_672_7, 1e-9, "log");
    let a = analytic_directional_derivative(Hyvarinen, &n(1.0, 1.0), &n(0.0, 1.0), &scheme()).unwrap();
    assert_close(a, 0.0, 1e-10, "Hyvarinen");
    let a = analytic_directional_derivative(Quadratic, &uniform(), &uniform(), &scheme()).unwrap();
    assert_close(a, 1.0, 1e-12, "quadratic");
}

#[test]
fn two_sided_shannon_derivative() {
    let q = n(0.0, 1.0);
    // N(0.5, 0.5) - N(0,1) is bounded by a multiple of q, so both signs are feasible.
    let r = n(0.5, 0.5).sub(&q).unwrap();
    let ts = two_sided_derivative(&Logarithmic, &q, &r, &default_steps(), &scheme()).unwrap();
    assert!((ts.right.value - ts.left.value).abs() <= 1e-5);
    let v = ts.value.expect("two-sided");
    let a = analytic_directional_derivative(Logarithmic, &q, &r, &scheme()).unwrap();
    assert_close(v, a, 1e-6, "against the score");
}

#[test]
fn shift_direction_is_one_sided() {
    let q = n(0.0, 1.0);
    let r = n(1.0, 1.0).sub(&q).unwrap();
    let err = two_sided_derivative(&Logarithmic, &q, &r, &default_steps(), &scheme()).unwrap_err();
    assert!(matches!(err, Error::OneSidedOnly { .. }), "{err:?}");
}

#[test]
fn quadratic_two_sided_on_a_bump_difference() {
    let q = uniform();
    let p = Field::from(Bump::new(0.3, 0.1))
        .sub(&Field::from(Bump::new(0.7, 0.1)))
        .unwrap();
    let ts = two_sided_derivative(&Quadratic, &q, &p.scale(0.2), &default_steps(), &scheme()).unwrap();
    assert_close(ts.value.expect("two-sided"), 0.0, 1e-8, "zero-mass bump");
    let s = symmetric_derivative(&Quadratic, &q, &p.scale(0.2), &default_steps(), &scheme()).unwrap();
    assert_close(s.value, 0.0, 1e-10, "symmetric");
    let s = symmetric_derivative(&Quadratic, &q, &q.scale(0.5), &default_steps(), &scheme()).unwrap();
    assert_close(s.value, 0.5, 1e-10, "Euler direction");
}

#[test]
fn supremum_has_a_kink() {
    let ts = two_sided_derivative(&Supremum, &uniform(), &triangle(), &default_steps(), &scheme()).unwrap();
    assert_close(ts.right.value, 2.0, 1e-10, "right = sup p");
    assert_close(ts.left.value, 0.0, 1e-10, "left = min p");
    assert!(ts.value.is_none());
}

#[test]
fn logarithmic_certificate_over_fifty_pairs() {
    let r = run_suite(Suite::Propriety, Logarithmic, 50, 42, &Tolerances::default(), &scheme()).unwrap();
    assert!(r.passed(), "{:?}", r.failures().collect::<Vec<_>>());
    assert_eq!(r.cases.iter().filter(|c| c.id.ends_with("/certificate")).count(), 50);
    assert_eq!(r.strictness.as_deref(), Some("strict"));
}

#[test]
fn quadratic_certificate_on_grids() {
    let mut s = Sampler::new(7);
    let shapes = [GridShape::Smooth, GridShape::Plateau, GridShape::Tent];
    let pairs: Vec<_> = (0..12)
        .map(|i| (s.grid(shapes[i % 3]).unwrap(), s.grid(shapes[(i + 1) % 3]).unwrap()))
        .collect();
    let r = certify_subgradient(Quadratic, &pairs, &Tolerances::default(), &scheme());
    assert!(r.passed(), "{:?}", r.failures().collect::<Vec<_>>());
}

#[test]
fn supremum_dirac_regime_is_labelled() {
    let q = Density::grid(
        0.0,
        1.0,
        (0..401).map(|i| 2.0 - 4.0 * (i as f64 / 400.0 - 0.5).abs()).collect(),
    )
    .unwrap();
    let p = Density::grid(0.0, 1.0, (0..401).map(|i| 1.0 + (i as f64 / 400.0)).collect()).unwrap();
    let r = certify_subgradient(Supremum, &[(p, q)], &Tolerances::default(), &scheme());
    assert!(r.passed());
    let cert = r.cases.iter().find(|c| c.id.ends_with("/certificate")).unwrap();
    assert!(cert.note.as_deref().unwrap().contains("no P-integrable subgradient"));
    assert_eq!(r.strictness.as_deref(), Some("not strict"));
}

#[test]
fn sublinearity_examples() {
    let tol = Tolerances::default();
    let a = Density::gaussian(-1.0, 0.7).unwrap();
    let b = Density::mixture(&[(1.0, 1.0), (2.5, 0.4)], &[1.0, 0.5]).unwrap();
    let r = certify_sublinearity(Logarithmic, &[a, b], &[0.5, 2.0, 10.0], &tol, &scheme());
    assert!(r.passed());
    assert!(r.cases.iter().any(|c| c.id.ends_with("strict_subadditive")));

    let g = Density::gaussian(0.0, 1.0).unwrap();
    let r = certify_sublinearity(Hyvarinen, &[g.clone(), g.clone()], &[2.0], &tol, &scheme());
    assert!(r.passed());
    let sub = r.cases.iter().find(|c| c.id.ends_with("/subadditive")).unwrap();
    assert!(sub.residual <= 1e-8);

    let u = Density::uniform_grid(401).unwrap();
    let sum = entropy(Quadratic, &u.scaled(3.0), &scheme()).unwrap();
    let parts = entropy(Quadratic, &u, &scheme()).unwrap() + entropy(Quadratic, &u.scaled(2.0), &scheme()).unwrap();
    assert_close(sum, 3.0, 1e-13, "collinear sum");
    assert_close(parts, 3.0, 1e-13, "parts");
}

#[test]
fn derivative_properties_at_the_standard_normal() {
    let q = Density::gaussian(0.0, 1.0).unwrap();
    let others = vec![
        Density::gaussian(1.0, 1.0).unwrap(),
        Density::gaussian(0.0, 0.8).unwrap(),
        Density::mixture(&[(-0.5, 0.5), (0.7, 0.6)], &[1.0, 1.0]).unwrap(),
    ];
    let dirs = prop22_directions(&q, &others).unwrap();
    let cases = certify_prop22(Logarithmic, &q, &dirs, &Tolerances::default(), &scheme());
    let failures: Vec<_> = cases.iter().filter(|c| !c.pass).collect();
    assert!(failures.is_empty(), "{failures:?}");
    for prefix in ["a/", "b/", "c/", "d/", "e/", "f/"] {
        assert!(cases.iter().any(|c| c.id.starts_with(prefix)), "{prefix}");
    }
    let inv7 = cases.iter().filter(|c| c.id.contains("lambda_7")).count();
    assert_eq!(inv7, 3);
    let eq = cases.iter().find(|c| c.id == "d/equality").unwrap();
    assert!(eq.residual <= 1e-8);
}

#[test]
fn gateaux_derivative_on_the_uniform() {
    let q = uniform();
    let p = Field::from(Bump::new(0.5, 0.1))
        .sub(&Field::from(Bump::new(0.5, 0.2)).scale(0.5))
        .unwrap();
    let a = analytic_directional_derivative(Quadratic, &q, &p, &scheme()).unwrap();
    let s = symmetric_derivative(&Quadratic, &q, &p.scale(0.1), &default_steps(), &scheme()).unwrap();
    // On the uniform, p·S(q) = ∫p; trapezoid sampling on the grid leaves a mass of order 1e-9.
    assert_close(a, 0.0, 1e-8, "zero mass bump");
    assert_close(s.value, 0.1 * a, 1e-10, "symmetric");
    let s = symmetric_derivative(&Quadratic, &q, &q.scale(0.5), &default_steps(), &scheme()).unwrap();
    assert_close(2.0 * s.value, 1.0, 1e-10, "along q");
}

#[test]
fn verification_reports_are_reproducible() {
    let tol = Tolerances::default();
    let a = run_suite(Suite::Euler, Quadratic, 6, 42, &tol, &scheme())
        .unwrap()
        .to_json();
    let b = run_suite(Suite::Euler, Quadratic, 6, 42, &tol, &scheme())
        .unwrap()
        .to_json();
    assert_eq!(a, b);
    let c = run_suite(Suite::Euler, Quadratic, 6, 43, &tol, &scheme())
        .unwrap()
        .to_json();
    assert_ne!(a, c);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn right_quotients_are_monotone(
        m1 in -1.0..1.0f64, v1 in 0.5..2.0f64, m2 in -1.0..1.0f64, v2 in 0.5..2.0f64, w in 0.2..2.0f64
    ) {
        let q = f(Density::mixture(&[(m1, v1), (m1 + 1.0, 1.0)], &[1.0, w]).unwrap());
        let p = n(m2, v2.min(v1));
        for rule in [Logarithmic, Hyvarinen, Quadratic] {
            let d = right_directional_derivative(&rule, &q, &p, &default_steps(), &scheme()).unwrap();
            prop_assert_eq!(d.monotonicity_violations, 0, "{}", rule);
        }
    }
}
