//! Boundary phenomena of the positive cone: the gradient of binary Shannon
//! entropy blowing up at the boundary, the nowhere-density of the positive
//! cone of L¹, and the two regimes of subgradients of the supremum entropy.

use std::fmt;

use serde::Serialize;

use crate::convexity::{default_steps, right_directional_derivative};
use crate::densities::{Bump, Density, Field};
use crate::error::{invalid, Error, Result};
use crate::pairing::QuadratureScheme;
use crate::rules::{mode_set, sup_subgradient, ScoringRuleId, DEFAULT_MODE_TOL};

// ---------------------------------------------------------------------------
// Binary Shannon entropy

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BinaryShannon {
    pub value: f64,
    /// `(∂Φ/∂x, ∂Φ/∂y) = (ln(x/(x+y)), ln(y/(x+y)))`.
    pub partials: (f64, f64),
}

/// `Φ(x, y) = x ln(x/(x+y)) + y ln(y/(x+y))` and its gradient.
pub fn binary_shannon(x: f64, y: f64) -> Result<BinaryShannon> {
    if !(x > 0.0 && y > 0.0) || !x.is_finite() || !y.is_finite() {
        return Err(Error::NonPositiveArgument { x, y });
    }
    // ln(x/(x+y)) = -ln(1 + y/x), accurate for either ratio extreme.
    let dx = -(y / x).ln_1p();
    let dy = -(x / y).ln_1p();
    Ok(BinaryShannon {
        value: x * dx + y * dy,
        partials: (dx, dy),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlowupTrace {
    pub y: f64,
    /// `(x_k, ∂Φ/∂x(x_k, y))` along the path.
    pub points: Vec<(f64, f64)>,
    pub strictly_decreasing: bool,
    pub threshold: Option<f64>,
    /// First path index whose partial lies below the threshold.
    pub crossed_at: Option<usize>,
}

/// `∂Φ/∂x` along `(x_k, y)` with `x_k ↓ 0`.
pub fn boundary_blowup_trace(xs: &[f64], y: f64, threshold: Option<f64>) -> Result<BlowupTrace> {
    if xs.is_empty() {
        return Err(invalid("path", "empty path"));
    }
    if xs.windows(2).any(|w| w[1] >= w[0]) {
        return Err(invalid("path", "x_k must strictly decrease"));
    }
    let points = xs
        .iter()
        .map(|&x| binary_shannon(x, y).map(|b| (x, b.partials.0)))
        .collect::<Result<Vec<_>>>()?;
    let strictly_decreasing = points.windows(2).all(|w| w[1].1 < w[0].1);
    let crossed_at = threshold.and_then(|t| points.iter().position(|p| p.1 < t));
    Ok(BlowupTrace {
        y,
        points,
        strictly_decreasing,
        threshold,
        crossed_at,
    })
}

/// `x_k = 10^-k`, `k = 1..=k_max`.
pub fn decimal_path(k_max: usize) -> Vec<f64> {
    (1..=k_max as i32).map(|k| 10f64.powi(-k)).collect()
}

impl fmt::Display for BlowupTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "binary Shannon entropy, y = {}", self.y)?;
        writeln!(f, "{:>12}  {:>14}", "x", "dPhi/dx")?;
        for (x, d) in &self.points {
            writeln!(f, "{x:>12.3e}  {d:>14.6}")?;
        }
        writeln!(f, "strictly decreasing: {}", self.strictly_decreasing)?;
        if let Some(t) = self.threshold {
            match self.crossed_at {
                Some(i) => writeln!(f, "below {t} from x = {:e}", self.points[i].0)?,
                None => writeln!(f, "never below {t}")?,
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Nowhere density of the positive cone

/// Shell masses `a_k` with tails `r_k = Σ_{i≥k} a_i` and `b_k = a_k / √r_k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DyadicSequence {
    pub a: Vec<f64>,
    pub r: Vec<f64>,
    pub b: Vec<f64>,
    /// Bound on `Σ_{k>K} b_k`, when known.
    pub b_tail_bound: Option<f64>,
}

impl DyadicSequence {
    /// `a_k = a0 ρ^k`, `k = 0..=k_max`, with exact tails.
    pub fn geometric(a0: f64, ratio: f64, k_max: usize) -> Result<Self> {
        if !(a0 > 0.0) || !a0.is_finite() {
            return Err(invalid("a0", "must be positive"));
        }
        if !(ratio > 0.0 && ratio < 1.0) {
            return Err(invalid("ratio", "must lie in (0, 1)"));
        }
        let a: Vec<f64> = (0..=k_max).map(|k| a0 * ratio.powi(k as i32)).collect();
        let r: Vec<f64> = a.iter().map(|ak| ak / (1.0 - ratio)).collect();
        let b: Vec<f64> = a.iter().zip(&r).map(|(ak, rk)| ak / rk.sqrt()).collect();
        // b_k decays with ratio √ρ.
        let sq = ratio.sqrt();
        let b_tail_bound = Some(b[k_max] * sq / (1.0 - sq));
        Self::checked(a, r, b, b_tail_bound)
    }

    /// Finite terms plus a bound on the mass beyond them.
    pub fn from_terms(a: Vec<f64>, tail: f64) -> Result<Self> {
        if a.is_empty() {
            return Err(invalid("a", "empty sequence"));
        }
        if a.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(invalid("a", "terms must be positive and finite"));
        }
        if !(tail >= 0.0) || !tail.is_finite() {
            return Err(invalid("tail", "must be nonnegative"));
        }
        let mut r = vec![0.0; a.len()];
        let mut acc = tail;
        for k in (0..a.len()).rev() {
            acc += a[k];
            r[k] = acc;
        }
        let b = a.iter().zip(&r).map(|(ak, rk)| ak / rk.sqrt()).collect();
        Self::checked(a, r, b, None)
    }

    fn checked(a: Vec<f64>, r: Vec<f64>, b: Vec<f64>, b_tail_bound: Option<f64>) -> Result<Self> {
        if r.windows(2).any(|w| w[1] >= w[0]) {
            return Err(invalid("a", "tails r_k are not strictly decreasing in floating point"));
        }
        Ok(DyadicSequence { a, r, b, b_tail_bound })
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    /// `Σ_{i≤k} b_i` for every `k`.
    pub fn partial_sums(&self) -> Vec<f64> {
        self.b
            .iter()
            .scan(0.0, |s, b| {
                *s += b;
                Some(*s)
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Witness {
    pub alpha: f64,
    /// First `k` with `a_k - α b_k < 0`.
    pub k: usize,
    pub a_k: f64,
    pub b_k: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NowhereDenseReport {
    pub witnesses: Vec<Witness>,
    pub b_partial_sum: f64,
    pub b_tail_bound: Option<f64>,
    /// Partial sums at `k = 0, 1, 2, 4, 8, ...` and at `K`.
    pub convergence: Vec<(usize, f64)>,
}

/// For each `α`, the first shell where `f - αg` has negative mass.
pub fn nowhere_dense_witness(a: &DyadicSequence, alphas: &[f64]) -> Result<NowhereDenseReport> {
    let witnesses = alphas
        .iter()
        .map(|&alpha| {
            if !(alpha > 0.0) || !alpha.is_finite() {
                return Err(invalid("alpha", "must be positive"));
            }
            let k = (0..a.len())
                .find(|&k| a.a[k] - alpha * a.b[k] < 0.0)
                .ok_or(Error::NoWitness { k: a.len() - 1, alpha })?;
            Ok(Witness {
                alpha,
                k,
                a_k: a.a[k],
                b_k: a.b[k],
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let sums = a.partial_sums();
    let last = sums.len() - 1;
    let mut convergence: Vec<(usize, f64)> = std::iter::once(0)
        .chain((0..).map(|i| 1usize << i).take_while(|&k| k < last))
        .map(|k| (k, sums[k]))
        .collect();
    convergence.push((last, sums[last]));
    Ok(NowhereDenseReport {
        witnesses,
        b_partial_sum: sums[last],
        b_tail_bound: a.b_tail_bound,
        convergence,
    })
}

impl fmt::Display for NowhereDenseReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "shell sign changes of f - alpha g")?;
        writeln!(f, "{:>10}  {:>4}  {:>14}  {:>14}", "alpha", "k", "a_k", "alpha b_k")?;
        for w in &self.witnesses {
            writeln!(
                f,
                "{:>10}  {:>4}  {:>14.6e}  {:>14.6e}",
                w.alpha,
                w.k,
                w.a_k,
                w.alpha * w.b_k
            )?;
        }
        writeln!(f, "partial sums of b_k:")?;
        for (k, s) in &self.convergence {
            writeln!(f, "  k = {k:>4}: {s:.10}")?;
        }
        if let Some(t) = self.b_tail_bound {
            writeln!(f, "remaining tail below {t:.3e}")?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Supremum entropy: integrable subgradient or Dirac regime

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SupRegime {
    /// Mode set of positive measure; `q* = 1_M / μ(M)` is a subgradient.
    Integrable,
    /// Isolated modes only; no integrable subgradient.
    Dirac,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeRecord {
    pub name: String,
    pub max_p: f64,
    /// `p·q*` in the integrable regime, the mean of `p` over the modes otherwise.
    pub pairing: f64,
    /// Right derivative of `sup` at `q` along `p` by difference quotients.
    pub derivative: f64,
    pub pass: bool,
}

/// A candidate `q*₀ = 1_N / |N|` on a neighbourhood of an isolated mode.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CandidateRecord {
    /// Half width of the neighbourhood in cells.
    pub cells: usize,
    pub q_pairing: f64,
    pub probe: String,
    pub p_pairing: f64,
    pub derivative: f64,
    /// `p·q*₀ > Φ′₊(p, q)`: the candidate is not a subgradient.
    pub violates: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupDemoReport {
    pub regime: SupRegime,
    pub max_q: f64,
    pub mode_measure: f64,
    pub mode_points: Vec<f64>,
    /// `q·q*` in the integrable regime.
    pub q_pairing: Option<f64>,
    pub probes: Vec<ProbeRecord>,
    pub candidates: Vec<CandidateRecord>,
    pub pass: bool,
}

const PAIRING_TOL: f64 = 1e-12;

fn grid_like(q: &Density, f: impl Fn(f64) -> f64) -> Result<Density> {
    let g = q.grid_data().expect("grid density");
    let values = (0..g.len()).map(|i| f(g.node(i))).collect();
    Density::grid(g.lo, g.hi, values)
}

fn bump_values(c: f64, h: f64) -> impl Fn(f64) -> f64 {
    let b = Field::from(Bump::new(c, h));
    move |x| b.value(&[x]).unwrap_or(0.0)
}

/// Twenty probe densities on the grid of `q`.
pub fn sup_probes(q: &Density) -> Result<Vec<(String, Density)>> {
    let g = q
        .grid_data()
        .ok_or_else(|| Error::Unsupported("probes need a grid density".into()))?;
    let (lo, w) = (g.lo, g.hi - g.lo);
    let at = |u: f64| lo + u * w;
    let mut out = vec![("uniform".to_string(), grid_like(q, |_| 1.0)?)];
    for k in 1..=9 {
        let c = at(k as f64 / 10.0);
        out.push((format!("bump@{c:.2}"), grid_like(q, bump_values(c, 0.1 * w))?));
    }
    for k in 1..=5 {
        let c = at(k as f64 / 6.0);
        out.push((
            format!("tent@{c:.2}"),
            grid_like(q, move |x| (1.0 - (x - c).abs() / (0.2 * w)).max(0.0))?,
        ));
    }
    out.push(("q".into(), q.clone()));
    out.push(("q^2".into(), grid_like(q, |x| q.value(&[x]).unwrap_or(0.0).powi(2))?));
    out.push(("ramp_up".into(), grid_like(q, |x| 0.1 + (x - lo) / w)?));
    out.push(("ramp_down".into(), grid_like(q, |x| 1.1 - (x - lo) / w)?));
    out.push((
        "left_step".into(),
        grid_like(q, |x| if x <= at(0.5) { 1.0 } else { 0.0 })?,
    ));
    Ok(out)
}

fn sup_derivative(q: &Field, p: &Field, scheme: &QuadratureScheme) -> Result<f64> {
    Ok(right_directional_derivative(&ScoringRuleId::Supremum, q, p, &default_steps(), scheme)?.value)
}

/// Constructs `q*` when the mode set has positive measure and checks it
/// against twenty probes; otherwise shows that indicator candidates near an
/// isolated mode fail the subgradient inequality for an off-mode bump.
pub fn sup_dichotomy_demo(q: &Density, scheme: &QuadratureScheme) -> Result<SupDemoReport> {
    let modes = mode_set(q, DEFAULT_MODE_TOL)?;
    let g = q.grid_data().expect("grid density");
    let fq = Field::from(q);
    let probes = sup_probes(q)?;
    let mode_points = modes.mode_nodes.iter().map(|&i| modes.node(i)).collect();
    let tol = PAIRING_TOL * modes.max.abs().max(1.0);

    if !modes.is_null() {
        let qstar = sup_subgradient(q, DEFAULT_MODE_TOL)?;
        let q_pairing = qstar.pair(&fq)?;
        let mut records = Vec::new();
        for (name, p) in &probes {
            let fp = Field::from(p);
            let max_p = p
                .grid_data()
                .expect("grid")
                .values
                .iter()
                .copied()
                .fold(f64::NEG_INFINITY, f64::max)
                * p.scale();
            let pairing = qstar.pair(&fp)?;
            let derivative = sup_derivative(&fq, &fp, scheme)?;
            records.push(ProbeRecord {
                name: name.clone(),
                max_p,
                pairing,
                derivative,
                pass: pairing <= max_p + tol && pairing <= derivative + 1e-9,
            });
        }
        let pass = (q_pairing - modes.max).abs() <= tol && records.iter().all(|r| r.pass);
        return Ok(SupDemoReport {
            regime: SupRegime::Integrable,
            max_q: modes.max,
            mode_measure: modes.measure,
            mode_points,
            q_pairing: Some(q_pairing),
            probes: records,
            candidates: Vec::new(),
            pass,
        });
    }

    let mut records = Vec::new();
    for (name, p) in &probes {
        let fp = Field::from(p);
        let pv: Vec<f64> = modes
            .isolated
            .iter()
            .map(|&i| p.value(&[g.node(i)]))
            .collect::<Result<_>>()?;
        let max_p = p
            .grid_data()
            .expect("grid")
            .values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
            * p.scale();
        let top = pv.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let derivative = sup_derivative(&fq, &fp, scheme)?;
        records.push(ProbeRecord {
            name: name.clone(),
            max_p,
            pairing: pv.iter().sum::<f64>() / pv.len() as f64,
            derivative,
            pass: (derivative - top).abs() <= 1e-9 * top.abs().max(1.0),
        });
    }

    let m = modes.isolated[0];
    let h = g.spacing();
    let n = g.len();
    // Off-mode bump: vanishes at the mode, positive at its neighbour.
    let side = if m + 1 < n { 1.0 } else { -1.0 };
    let c = g.node(m) + side * h;
    let probe = grid_like(q, bump_values(c, h))?;
    let fp = Field::from(&probe);
    let derivative = sup_derivative(&fq, &fp, scheme)?;
    let mut candidates = Vec::new();
    for j in 1..=5usize {
        let lo_i = m.saturating_sub(j);
        let hi_i = (m + j).min(n - 1);
        let width = (hi_i - lo_i) as f64 * h;
        let pair = |d: &Density| -> Result<f64> {
            let mut s = 0.0;
            for i in lo_i..hi_i {
                s += 0.5 * h * (d.value(&[g.node(i)])? + d.value(&[g.node(i + 1)])?);
            }
            Ok(s / width)
        };
        let p_pairing = pair(&probe)?;
        candidates.push(CandidateRecord {
            cells: j,
            q_pairing: pair(q)?,
            probe: format!("bump@{c:.4}"),
            p_pairing,
            derivative,
            violates: p_pairing > derivative + 1e-9,
        });
    }
    let pass = records.iter().all(|r| r.pass) && candidates.iter().all(|c| c.violates);
    Ok(SupDemoReport {
        regime: SupRegime::Dirac,
        max_q: modes.max,
        mode_measure: 0.0,
        mode_points,
        q_pairing: None,
        probes: records,
        candidates,
        pass,
    })
}

/// Constant, plateau (mode set `[1/4, 3/4]`) and triangle grids on `[0, 1]`.
pub fn demo_grids(points: usize) -> Result<Vec<(&'static str, Density)>> {
    if points < 5 {
        return Err(invalid("grid-points", "need at least 5 points"));
    }
    let xs: Vec<f64> = (0..points).map(|i| i as f64 / (points - 1) as f64).collect();
    let constant = Density::grid(0.0, 1.0, vec![1.0; points])?;
    let plateau = Density::grid(
        0.0,
        1.0,
        xs.iter()
            .map(|&x| if (0.25..=0.75).contains(&x) { 1.0 } else { 0.5 })
            .collect(),
    )?;
    let triangle = Density::grid(0.0, 1.0, xs.iter().map(|&x| 1.0 - (2.0 * x - 1.0).abs()).collect())?;
    Ok(vec![
        ("constant", constant),
        ("plateau", plateau),
        ("triangle", triangle),
    ])
}

impl fmt::Display for SupDemoReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.regime {
            SupRegime::Integrable => writeln!(
                f,
                "integrable regime: mode measure {:.6}, q* = {:.6} on the modes, q.q* = {:.15} (max q = {:.15})",
                self.mode_measure,
                1.0 / self.mode_measure,
                self.q_pairing.unwrap_or(f64::NAN),
                self.max_q
            )?,
            SupRegime::Dirac => writeln!(
                f,
                "Dirac regime: isolated mode(s) at {:?}; no integrable subgradient",
                self.mode_points
            )?,
        }
        writeln!(
            f,
            "{:<12}  {:>12}  {:>12}  {:>12}  pass",
            "probe", "max p", "pairing", "deriv"
        )?;
        for p in &self.probes {
            writeln!(
                f,
                "{:<12}  {:>12.6}  {:>12.6}  {:>12.6}  {}",
                p.name, p.max_p, p.pairing, p.derivative, p.pass
            )?;
        }
        for c in &self.candidates {
            writeln!(
                f,
                "candidate 1_N/|N|, N = {} cells each side: q.q*0 = {:.6} < max q; {}: p.q*0 = {:.6} > deriv {:.6}: {}",
                c.cells, c.q_pairing, c.probe, c.p_pairing, c.derivative, c.violates
            )?;
        }
        writeln!(f, "pass: {}", self.pass)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_shannon_values() {
        let b = binary_shannon(1.0, 1.0).unwrap();
        assert!((b.value + 2.0 * std::f64::consts::LN_2).abs() < 1e-15);
        assert!((b.partials.0 + std::f64::consts::LN_2).abs() < 1e-15);
        let d = binary_shannon(1e-6, 1.0).unwrap().partials.0;
        assert!((d + 13.815_511_557_963_774).abs() < 1e-6);
        assert!(matches!(
            binary_shannon(0.0, 1.0),
            Err(Error::NonPositiveArgument { .. })
        ));
    }

    #[test]
    fn blowup_reaches_threshold() {
        let t = boundary_blowup_trace(&decimal_path(50), 1.0, Some(-100.0)).unwrap();
        assert!(t.strictly_decreasing);
        assert_eq!(t.crossed_at, Some(43));
        assert!(boundary_blowup_trace(&[0.1, 0.2], 1.0, None).is_err());
    }

    #[test]
    fn geometric_witnesses() {
        let a = DyadicSequence::geometric(1.0, 0.5, 200).unwrap();
        let r = nowhere_dense_witness(&a, &[1.0, 0.1]).unwrap();
        assert_eq!(r.witnesses[0].k, 2);
        assert_eq!(r.witnesses[1].k, 8);
        let short = DyadicSequence::geometric(1.0, 0.5, 5).unwrap();
        assert!(matches!(
            nowhere_dense_witness(&short, &[0.01]),
            Err(Error::NoWitness { .. })
        ));
    }

    #[test]
    fn finite_terms_match_geometric() {
        let k = 60;
        let a: Vec<f64> = (0..=k).map(|i| 0.5f64.powi(i)).collect();
        let tail = 0.5f64.powi(k);
        let s = DyadicSequence::from_terms(a, tail).unwrap();
        let g = DyadicSequence::geometric(1.0, 0.5, k as usize).unwrap();
        for (x, y) in s.b.iter().zip(&g.b) {
            assert!((x - y).abs() < 1e-14 * y);
        }
    }

    #[test]
    fn sup_regimes() {
        let s = QuadratureScheme::default();
        let grids = demo_grids(401).unwrap();
        for (name, q) in &grids {
            let r = sup_dichotomy_demo(q, &s).unwrap();
            assert!(r.pass, "{name}\n{r}");
            assert_eq!(r.probes.len(), 20);
        }
        let plateau = sup_dichotomy_demo(&grids[1].1, &s).unwrap();
        assert_eq!(plateau.regime, SupRegime::Integrable);
        assert!((plateau.mode_measure - 0.5).abs() < 1e-12);
        assert_eq!(sup_dichotomy_demo(&grids[2].1, &s).unwrap().regime, SupRegime::Dirac);
    }
}
