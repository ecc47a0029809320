//! Independent oracles: composite Simpson quadrature and Gaussian closed forms.
#![allow(dead_code)]

use std::f64::consts::{E, PI};

/// Composite Simpson rule with `n` (even) subintervals.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    assert!(n.is_multiple_of(2));
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// Simpson over `[-40, 40]`, fine enough for unit-scale Gaussians.
pub fn simpson_line<F: Fn(f64) -> f64>(f: F) -> f64 {
    simpson(f, -40.0, 40.0, 80_000)
}

pub fn npdf(x: f64, m: f64, v: f64) -> f64 {
    (-(x - m) * (x - m) / (2.0 * v)).exp() / (2.0 * PI * v).sqrt()
}

/// `(mean, var, weight)` components, normalised by the weight sum.
pub fn mixture_pdf(c: &[(f64, f64, f64)], x: f64) -> f64 {
    let w: f64 = c.iter().map(|t| t.2).sum();
    c.iter().map(|&(m, v, wi)| wi * npdf(x, m, v)).sum::<f64>() / w
}

pub fn mixture_dpdf(c: &[(f64, f64, f64)], x: f64) -> f64 {
    let w: f64 = c.iter().map(|t| t.2).sum();
    c.iter()
        .map(|&(m, v, wi)| -wi * (x - m) / v * npdf(x, m, v))
        .sum::<f64>()
        / w
}

/// `∫ p ln p` for `N(m, v)`.
pub fn shannon_gauss(v: f64) -> f64 {
    -0.5 * (2.0 * PI * E * v).ln()
}

/// `KL(N(m1, v1) ‖ N(m2, v2))`.
pub fn kl_gauss(m1: f64, v1: f64, m2: f64, v2: f64) -> f64 {
    0.5 * ((v2 / v1).ln() + (v1 + (m1 - m2).powi(2)) / v2 - 1.0)
}

/// `∫ N(m1, v1) N(m2, v2) = N(m1 - m2; 0, v1 + v2)`.
pub fn gauss_overlap(m1: f64, v1: f64, m2: f64, v2: f64) -> f64 {
    npdf(m1, m2, v1 + v2)
}

/// `∫ (p - q)²` for two Gaussians.
pub fn quadratic_divergence_gauss(m1: f64, v1: f64, m2: f64, v2: f64) -> f64 {
    gauss_overlap(m1, v1, m1, v1) + gauss_overlap(m2, v2, m2, v2) - 2.0 * gauss_overlap(m1, v1, m2, v2)
}

/// `∫ p |∂ ln p - ∂ ln q|²` for `p = N(m1, v1)`, `q = N(m2, v2)`.
pub fn fisher_divergence_gauss(m1: f64, v1: f64, m2: f64, v2: f64) -> f64 {
    // ∂ln p - ∂ln q = a x + b with a = 1/v2 - 1/v1, b = m1/v1 - m2/v2.
    let a = 1.0 / v2 - 1.0 / v1;
    let b = m1 / v1 - m2 / v2;
    a * a * (v1 + m1 * m1) + 2.0 * a * b * m1 + b * b
}

pub fn assert_close(got: f64, want: f64, tol: f64, what: &str) {
    assert!(
        (got - want).abs() <= tol,
        "{what}: got {got:.12e}, want {want:.12e}, |diff| {:.3e} > {tol:.1e}",
        (got - want).abs()
    );
}

pub fn assert_rel(got: f64, want: f64, tol: f64, what: &str) {
    let r = (got - want).abs() / want.abs().max(f64::MIN_POSITIVE);
    assert!(
        r <= tol,
        "{what}: got {got:.12e}, want {want:.12e}, rel {r:.3e} > {tol:.1e}"
    );
}
