//! Directional derivatives of entropies by difference quotients, and the
//! verification suites built on them.

mod report;
mod sampling;
mod suites;

use serde::Serialize;

pub use report::{CaseRecord, Summary, VerificationReport};
pub use sampling::{grid_density, mixture_density, GridShape, Sampler, GRID_POINTS};
pub use suites::{
    certify_prop22, certify_subgradient, certify_sublinearity, euler_suite, gateaux_check, gateaux_directions,
    homogeneity_suite, interior_quadratic_cone, prop22_directions, run_suite, sup_nonstrict_witness, DirectionSet,
    Suite, Tolerances,
};

use crate::densities::Field;
use crate::error::{invalid, Error, Result};
use crate::pairing::{mesh_for, QuadratureScheme, Sampled};
use crate::rules::{entropy_sampled, pair_score_sampled, ScoringRuleId};

/// Slack allowed in the monotonicity of right quotients.
pub const MONOTONE_SLACK: f64 = 1e-9;
/// Last two quotients must agree this closely for convergence.
pub const CONVERGENCE_TOL: f64 = 1e-5;

/// An entropy evaluated on sampled values.
pub trait Entropy: Sync {
    fn eval(&self, f: &Sampled) -> Result<f64>;
}

impl Entropy for ScoringRuleId {
    fn eval(&self, f: &Sampled) -> Result<f64> {
        entropy_sampled(*self, f)
    }
}

impl<F> Entropy for F
where
    F: Fn(&Sampled) -> Result<f64> + Sync,
{
    fn eval(&self, f: &Sampled) -> Result<f64> {
        self(f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Right,
    Left,
    TwoSided,
    Symmetric,
}

/// A directional derivative with the quotients it was extrapolated from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DerivativeEstimate {
    pub value: f64,
    /// `(t, quotient)` in schedule order.
    pub trace: Vec<(f64, f64)>,
    pub side: Side,
    pub converged: bool,
    pub monotonicity_violations: usize,
}

/// `t_j = 2^-j`, `j = 3..=18`.
pub fn default_steps() -> Vec<f64> {
    (3..=18).map(|j| 2f64.powi(-j)).collect()
}

fn check_steps(steps: &[f64]) -> Result<()> {
    if steps.len() < 2 {
        return Err(invalid("steps", "need at least two steps"));
    }
    if steps.iter().any(|t| !(*t > 0.0) || !t.is_finite()) {
        return Err(invalid("steps", "steps must be positive"));
    }
    if steps.windows(2).any(|w| w[1] >= w[0]) {
        return Err(invalid("steps", "steps must decrease"));
    }
    Ok(())
}

/// Richardson tableau over the last quotients, eliminating error terms
/// `t^order` and `t^(2 order)`; exact for geometric schedules.
fn richardson(trace: &[(f64, f64)], order: i32) -> f64 {
    let k = trace.len().min(3);
    let tail = &trace[trace.len() - k..];
    let mut col: Vec<f64> = tail.iter().map(|e| e.1).collect();
    for level in 1..k {
        let p = order * level as i32;
        col = (0..col.len() - 1)
            .map(|i| {
                let r = (tail[i].0 / tail[i + level].0).powf(p as f64 / level as f64);
                (r * col[i + 1] - col[i]) / (r - 1.0)
            })
            .collect();
    }
    col[0]
}

fn quotients<F>(steps: &[f64], mut f: F) -> Result<Vec<(f64, f64)>>
where
    F: FnMut(f64) -> Result<f64>,
{
    steps
        .iter()
        .map(|&t| {
            f(t).map(|d| (t, d)).map_err(|e| Error::InfeasibleStep {
                t,
                reason: e.to_string(),
            })
        })
        .collect()
}

/// `Φ′₊(p, q)` for `q` and `p` sampled on one mesh.
pub fn right_derivative_sampled(
    phi: &dyn Entropy,
    q: &Sampled,
    p: &Sampled,
    steps: &[f64],
) -> Result<DerivativeEstimate> {
    check_steps(steps)?;
    let phi0 = phi.eval(q)?;
    let trace = quotients(steps, |t| Ok((phi.eval(&q.lin(1.0, p, t))? - phi0) / t))?;
    let monotonicity_violations = trace
        .windows(2)
        .filter(|w| w[1].1 > w[0].1 + MONOTONE_SLACK * w[0].1.abs().max(1.0))
        .count();
    let n = trace.len();
    Ok(DerivativeEstimate {
        value: richardson(&trace, 1),
        converged: (trace[n - 1].1 - trace[n - 2].1).abs() < CONVERGENCE_TOL,
        trace,
        side: Side::Right,
        monotonicity_violations,
    })
}

/// `Φ′₊(p, q) = lim_{t↓0} (Φ(q + tp) - Φ(q)) / t`.
pub fn right_directional_derivative(
    phi: &dyn Entropy,
    q: &Field,
    p: &Field,
    steps: &[f64],
    scheme: &QuadratureScheme,
) -> Result<DerivativeEstimate> {
    let mesh = mesh_for(&[q, p], scheme)?;
    let sq = Sampled::new(q, mesh.clone())?;
    let sp = Sampled::new(p, mesh)?;
    right_derivative_sampled(phi, &sq, &sp, steps)
}

/// `-Φ′₊(-p, q)`.
pub fn left_derivative_sampled(
    phi: &dyn Entropy,
    q: &Sampled,
    p: &Sampled,
    steps: &[f64],
) -> Result<DerivativeEstimate> {
    let mut d = right_derivative_sampled(phi, q, &p.scale(-1.0), steps)?;
    d.value = -d.value;
    for e in &mut d.trace {
        e.1 = -e.1;
    }
    d.side = Side::Left;
    Ok(d)
}

/// Right and left derivatives along a direction feasible in both signs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TwoSidedEstimate {
    pub right: DerivativeEstimate,
    pub left: DerivativeEstimate,
    /// Set when both sides agree within the convergence tolerance.
    pub value: Option<f64>,
}

pub fn two_sided_sampled(phi: &dyn Entropy, q: &Sampled, p: &Sampled, steps: &[f64]) -> Result<TwoSidedEstimate> {
    let right = right_derivative_sampled(phi, q, p, steps)?;
    let left = left_derivative_sampled(phi, q, p, steps).map_err(|e| Error::OneSidedOnly {
        reason: format!("-p is not feasible: {e}"),
    })?;
    let value = ((right.value - left.value).abs() < CONVERGENCE_TOL).then_some(0.5 * (right.value + left.value));
    Ok(TwoSidedEstimate { right, left, value })
}

/// Both one-sided derivatives of `Φ` at `q` along `±p`.
pub fn two_sided_derivative(
    phi: &dyn Entropy,
    q: &Field,
    p: &Field,
    steps: &[f64],
    scheme: &QuadratureScheme,
) -> Result<TwoSidedEstimate> {
    let mesh = mesh_for(&[q, p], scheme)?;
    let sq = Sampled::new(q, mesh.clone())?;
    let sp = Sampled::new(p, mesh)?;
    two_sided_sampled(phi, &sq, &sp, steps)
}

/// Central quotients `(Φ(q + tp) - Φ(q - tp)) / 2t` with second-order extrapolation.
pub fn symmetric_derivative_sampled(
    phi: &dyn Entropy,
    q: &Sampled,
    p: &Sampled,
    steps: &[f64],
) -> Result<DerivativeEstimate> {
    check_steps(steps)?;
    let trace = quotients(steps, |t| {
        Ok((phi.eval(&q.lin(1.0, p, t))? - phi.eval(&q.lin(1.0, p, -t))?) / (2.0 * t))
    })?;
    let n = trace.len();
    Ok(DerivativeEstimate {
        value: richardson(&trace, 2),
        converged: (trace[n - 1].1 - trace[n - 2].1).abs() < CONVERGENCE_TOL,
        trace,
        side: Side::Symmetric,
        monotonicity_violations: 0,
    })
}

pub fn symmetric_derivative(
    phi: &dyn Entropy,
    q: &Field,
    p: &Field,
    steps: &[f64],
    scheme: &QuadratureScheme,
) -> Result<DerivativeEstimate> {
    let mesh = mesh_for(&[q, p], scheme)?;
    let sq = Sampled::new(q, mesh.clone())?;
    let sp = Sampled::new(p, mesh)?;
    symmetric_derivative_sampled(phi, &sq, &sp, steps)
}

/// The closed form `Φ′₊(p, q) = p·S(q)`; `p` may be signed or massless.
pub fn analytic_directional_derivative(
    rule: ScoringRuleId,
    q: &Field,
    p: &Field,
    scheme: &QuadratureScheme,
) -> Result<f64> {
    if rule == ScoringRuleId::Supremum && q.is_smooth() {
        return Err(Error::Unsupported(
            "the supremum rule is evaluated on grid densities".into(),
        ));
    }
    let mesh = mesh_for(&[q, p], scheme)?;
    let sq = Sampled::new(q, mesh.clone())?;
    let sp = Sampled::new(p, mesh)?;
    Ok(pair_score_sampled(rule, &sp, &sq)?.value)
}
