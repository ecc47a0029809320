//! Prediction-cone membership on a finite probe set and feasible-direction
//! probing.

use serde::{Deserialize, Serialize};

use super::{Density, Field, Jet};
use crate::error::{invalid, Result};
use crate::pairing::{QuadratureScheme, Sampled};

/// Membership constraints of a prediction cone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ConeSpec {
    /// `c1 (1+|x|)^(-a) ≤ q(x) ≤ c2 (1+|x|)^(-(d+1))`, `a ≥ d+1`.
    ShannonEnvelope {
        c1: f64,
        c2: f64,
        a: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        probes: Option<Vec<f64>>,
    },
    /// `|∇q/q| + |Δq/q| ≤ c1 (1+|x|)^k` and `q ≤ c2 (1+|x|)^(-(d+1+k²))`.
    HyvarinenGrowth {
        c1: f64,
        c2: f64,
        k: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        probes: Option<Vec<f64>>,
    },
    /// Normalised elements within distance `delta` (weighted L² norm,
    /// weight `(1+|x|)^(d+1)`) of a nonnegative density whose weighted norm
    /// lies in `[k1, k2]`.
    QuadraticNorm { k1: f64, k2: f64, delta: f64, epsilon: f64 },
    /// Nonnegative values at every grid node and positive mass.
    GridPositive,
}

impl ConeSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            ConeSpec::ShannonEnvelope { .. } => "shannon_envelope",
            ConeSpec::HyvarinenGrowth { .. } => "hyvarinen_growth",
            ConeSpec::QuadraticNorm { .. } => "quadratic_norm",
            ConeSpec::GridPositive => "grid_positive",
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| crate::Error::Parse(e.to_string()))
    }

    /// Checks the constants for dimension `dim`.
    pub fn validate(&self, dim: usize) -> Result<()> {
        let pos = |v: f64, f: &str| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(invalid(f, format!("must be positive, got {v}")))
            }
        };
        match *self {
            ConeSpec::ShannonEnvelope { c1, c2, a, .. } => {
                pos(c1, "c1")?;
                pos(c2, "c2")?;
                if !(a >= dim as f64 + 1.0) {
                    return Err(invalid("a", format!("exponent must be at least d+1 = {}", dim + 1)));
                }
            }
            ConeSpec::HyvarinenGrowth { c1, c2, k, .. } => {
                pos(c1, "c1")?;
                pos(c2, "c2")?;
                pos(k, "k")?;
            }
            ConeSpec::QuadraticNorm { k1, k2, delta, epsilon } => {
                pos(k1, "k1")?;
                pos(k2, "k2")?;
                pos(delta, "delta")?;
                if k2 < k1 {
                    return Err(invalid("k2", "must be at least k1"));
                }
                if !(epsilon > 0.0 && epsilon < k1.min(1.0)) {
                    return Err(invalid("epsilon", "must satisfy 0 < epsilon < min(1, k1)"));
                }
                // ‖f‖₁ ≤ C‖f‖_{2,w} with C² = ∫ w⁻¹; the ball must sit inside ‖·‖₁ ≤ ε.
                let c = if dim == 1 {
                    2f64.sqrt()
                } else {
                    std::f64::consts::PI.sqrt()
                };
                if delta > epsilon / c {
                    return Err(invalid("delta", format!("must be at most epsilon/{c:.6}")));
                }
            }
            ConeSpec::GridPositive => {}
        }
        Ok(())
    }
}

/// One failed inequality at one probe point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub x: Vec<f64>,
    pub condition: &'static str,
    /// Size of the violation (log-ratio for envelopes, relative excess for growth bounds).
    pub residual: f64,
}

/// Outcome of a membership check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConeReport {
    pub kind: &'static str,
    pub member: bool,
    pub violations: Vec<Violation>,
    /// Largest residual seen (negative when every inequality holds with room).
    pub worst_residual: f64,
    /// Distance to the cone boundary where it is meaningful (quadratic cone).
    pub margin: Option<f64>,
    pub note: Option<String>,
}

impl ConeReport {
    fn new(kind: &'static str) -> Self {
        ConeReport {
            kind,
            member: true,
            violations: Vec::new(),
            worst_residual: f64::NEG_INFINITY,
            margin: None,
            note: None,
        }
    }

    fn reject(kind: &'static str, note: impl Into<String>) -> Self {
        ConeReport {
            member: false,
            note: Some(note.into()),
            worst_residual: f64::INFINITY,
            ..ConeReport::new(kind)
        }
    }

    fn record(&mut self, x: &[f64], condition: &'static str, residual: f64) {
        let residual = if residual.is_nan() { f64::INFINITY } else { residual };
        if residual > self.worst_residual {
            self.worst_residual = residual;
        }
        if residual > SLACK {
            self.member = false;
            self.violations.push(Violation {
                x: x.to_vec(),
                condition,
                residual,
            });
        }
    }
}

/// Tolerated relative slack in the pointwise inequalities.
const SLACK: f64 = 1e-9;

/// 401 points on `[-20, 20]` plus `±2^k`, `k = 0..=10`, sorted.
pub fn default_probes() -> Vec<f64> {
    let mut v: Vec<f64> = (0..401).map(|i| -20.0 + 0.1 * i as f64).collect();
    for k in 0..=10 {
        let t = (1u32 << k) as f64;
        v.push(t);
        v.push(-t);
    }
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

fn probe_points(dim: usize, probes: &Option<Vec<f64>>) -> Vec<[f64; 2]> {
    let radii = probes.clone().unwrap_or_else(default_probes);
    if dim == 1 {
        return radii.iter().map(|&x| [x, 0.0]).collect();
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let dirs = [[1.0, 0.0], [0.0, 1.0], [s, s], [s, -s]];
    let mut out = Vec::new();
    for r in radii {
        for d in &dirs {
            out.push([r * d[0], r * d[1]]);
        }
    }
    out
}

fn abs_norm(dim: usize, x: &[f64; 2]) -> f64 {
    (0..dim).map(|k| x[k] * x[k]).sum::<f64>().sqrt()
}

/// Checks membership of `q` in the cone described by `spec`.
pub fn cone_check(q: impl Into<Field>, spec: &ConeSpec, scheme: &QuadratureScheme) -> ConeReport {
    let q: Field = q.into();
    let kind = spec.kind();
    if q.terms().is_empty() {
        return ConeReport::reject(kind, "zero function");
    }
    let dim = q.dim();
    if let Err(e) = spec.validate(dim) {
        return ConeReport::reject(kind, e.to_string());
    }
    let grid = q.terms().iter().find_map(|(_, t)| match t {
        super::Term::Density(d) => d.grid_data().cloned(),
        _ => None,
    });
    match spec {
        ConeSpec::ShannonEnvelope { c1, c2, a, probes } => {
            let mut rep = ConeReport::new(kind);
            for x in probe_points(dim, probes) {
                if let Some(g) = &grid {
                    if !g.contains(x[0]) {
                        continue;
                    }
                }
                let j = match q.jet_at(&x) {
                    Ok(j) => j,
                    Err(e) => return ConeReport::reject(kind, e.to_string()),
                };
                let l = (1.0 + abs_norm(dim, &x)).ln();
                let lq = if j.value > 0.0 { j.ln_abs() } else { f64::NEG_INFINITY };
                rep.record(&x[..dim], "lower_envelope", c1.ln() - a * l - lq);
                rep.record(&x[..dim], "upper_envelope", lq - (c2.ln() - (dim as f64 + 1.0) * l));
            }
            rep
        }
        ConeSpec::HyvarinenGrowth { c1, c2, k, probes } => {
            if !q.is_smooth() {
                return ConeReport::reject(kind, "growth bounds need an analytic density");
            }
            let mut rep = ConeReport::new(kind);
            for x in probe_points(dim, probes) {
                let j: Jet = match q.jet_at(&x) {
                    Ok(j) => j,
                    Err(e) => return ConeReport::reject(kind, e.to_string()),
                };
                if !(j.value > 0.0) {
                    rep.record(&x[..dim], "positivity", f64::INFINITY);
                    continue;
                }
                let r = 1.0 + abs_norm(dim, &x);
                let g = j.grad_ratio();
                let gn = (0..dim).map(|i| g[i] * g[i]).sum::<f64>().sqrt();
                let bound = c1 * r.powf(*k);
                rep.record(&x[..dim], "growth", (gn + j.laplacian_ratio().abs() - bound) / bound);
                let decay = dim as f64 + 1.0 + k * k;
                rep.record(&x[..dim], "decay", j.ln_abs() - (c2.ln() - decay * r.ln()));
            }
            rep
        }
        ConeSpec::GridPositive => {
            let Some(_) = grid else {
                return ConeReport::reject(kind, "grid_positive applies to grid densities");
            };
            let s = match Sampled::on_own_mesh(&q, scheme) {
                Ok(s) => s,
                Err(e) => return ConeReport::reject(kind, e.to_string()),
            };
            let mut rep = ConeReport::new(kind);
            for (x, j) in s.mesh.points.iter().zip(&s.jets) {
                rep.record(&x[..1], "nonnegative", -j.raw_value());
            }
            let m = s.mass();
            if !(m > 0.0) {
                rep.member = false;
                rep.note = Some(format!("mass {m} is not positive"));
            }
            rep
        }
        ConeSpec::QuadraticNorm { k1, k2, delta, .. } => {
            quadratic_check(&q, *k1, *k2, *delta, scheme).unwrap_or_else(|e| ConeReport::reject(kind, e.to_string()))
        }
    }
}

fn quadratic_check(q: &Field, k1: f64, k2: f64, delta: f64, scheme: &QuadratureScheme) -> Result<ConeReport> {
    let kind = "quadratic_norm";
    let s = Sampled::on_own_mesh(q, scheme)?;
    let dim = s.mesh.dim;
    let m = s.mass();
    if !(m > 0.0) {
        return Ok(ConeReport::reject(kind, format!("mass {m} is not positive")));
    }
    let w = |x: &[f64; 2]| (1.0 + abs_norm(dim, x)).powi(dim as i32 + 1);
    let pos_mass = s.mesh.integrate(|i, _| s.jets[i].raw_value().max(0.0));
    // Witness q' = r̂₊ / (r̂₊·1) and distance ‖r̂ - q'‖_{2,w}.
    let dist = s
        .mesh
        .integrate(|i, x| {
            let v = s.jets[i].raw_value();
            let d = v / m - v.max(0.0) / pos_mass;
            d * d * w(x)
        })
        .sqrt();
    let wn = s
        .mesh
        .integrate(|i, x| {
            let v = s.jets[i].raw_value().max(0.0) / pos_mass;
            v * v * w(x)
        })
        .sqrt();
    let mut rep = ConeReport::new(kind);
    let x0 = vec![0.0; dim];
    rep.record(&x0, "norm_lower", (k1 - wn) / k1);
    rep.record(&x0, "norm_upper", (wn - k2) / k2);
    rep.record(&x0, "ball_radius", (dist - delta) / delta);
    rep.margin = Some((delta - dist).min(wn - k1).min(k2 - wn));
    Ok(rep)
}

/// Result of probing `q + εr` along a schedule of steps.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionProbe {
    pub base: Density,
    pub direction: Field,
    /// Largest scheduled step with `q + εr` in the cone; 0 when none is.
    pub epsilon: f64,
    /// Largest scheduled step with `q - εr` in the cone.
    pub epsilon_backward: f64,
    /// Whether `-r` is feasible too, i.e. `r ∈ 𝒪(q)`.
    pub two_sided: bool,
    /// `(ε, forward member, backward member)` for every scheduled step.
    pub trace: Vec<(f64, bool, bool)>,
}

impl DirectionProbe {
    pub fn feasible(&self) -> bool {
        self.epsilon > 0.0
    }
}

/// Default step schedule `2, 1, 1/2, …, 2^-10`.
pub fn default_schedule() -> Vec<f64> {
    (-1..=10).map(|j| 2f64.powi(-j)).collect()
}

/// Probes the direction `r` at `q` against `spec` along the (decreasing) `schedule`.
pub fn feasible_direction(
    q: &Density,
    r: &Field,
    spec: &ConeSpec,
    schedule: &[f64],
    scheme: &QuadratureScheme,
) -> DirectionProbe {
    let base = Field::from(q);
    let mut eps = 0.0f64;
    let mut back = 0.0f64;
    let mut trace = Vec::with_capacity(schedule.len());
    for &e in schedule {
        let fwd = base
            .lin(1.0, r, e)
            .map(|f| cone_check(f, spec, scheme).member)
            .unwrap_or(false);
        let bwd = base
            .lin(1.0, r, -e)
            .map(|f| cone_check(f, spec, scheme).member)
            .unwrap_or(false);
        if fwd {
            eps = eps.max(e);
        }
        if bwd {
            back = back.max(e);
        }
        trace.push((e, fwd, bwd));
    }
    DirectionProbe {
        base: q.clone(),
        direction: r.clone(),
        epsilon: eps,
        epsilon_backward: back,
        two_sided: eps > 0.0 && back > 0.0,
        trace,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_spec_validation() {
        let ok = ConeSpec::QuadraticNorm {
            k1: 0.1,
            k2: 5.0,
            delta: 0.05,
            epsilon: 0.09,
        };
        assert!(ok.validate(1).is_ok());
        let bad = ConeSpec::QuadraticNorm {
            k1: 0.1,
            k2: 5.0,
            delta: 0.05,
            epsilon: 0.2,
        };
        assert!(bad.validate(1).is_err());
    }

    #[test]
    fn shannon_exponent_must_reach_d_plus_one() {
        let s = ConeSpec::ShannonEnvelope {
            c1: 1.0,
            c2: 1.0,
            a: 1.5,
            probes: None,
        };
        assert!(s.validate(1).is_err());
        let r = cone_check(Density::gaussian(0.0, 1.0).unwrap(), &s, &QuadratureScheme::default());
        assert!(!r.member && r.note.is_some());
    }

    #[test]
    fn default_probe_set() {
        let p = default_probes();
        assert!(p.contains(&1024.0) && p.contains(&-1024.0) && p.contains(&0.0));
        assert_eq!(p.len(), 401 + 2 * 6); // 1..16 already on the uniform grid
    }

    #[test]
    fn spec_json_round_trip() {
        let s = ConeSpec::from_json(r#"{"kind":"hyvarinen_growth","c1":2,"c2":40,"k":2}"#).unwrap();
        assert_eq!(
            s,
            ConeSpec::HyvarinenGrowth {
                c1: 2.0,
                c2: 40.0,
                k: 2.0,
                probes: None
            }
        );
        assert_eq!(
            ConeSpec::from_json(r#"{"kind":"grid_positive"}"#).unwrap(),
            ConeSpec::GridPositive
        );
    }
}
