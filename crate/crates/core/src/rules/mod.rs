//! The logarithmic, Hyvärinen, quadratic and supremum entropies with their
//! scores and divergences, all in 1-homogeneous (denormalised) form.

mod modes;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use modes::{mode_set, sup_subgradient, CellFunction, ModeSet, DEFAULT_MODE_TOL};

use crate::densities::{Density, Field, Jet};
use crate::error::{invalid, Error, Result};
use crate::pairing::{mesh_for, Mesh, QuadratureScheme, Sampled};

/// Floor applied inside the logarithm of the log score.
pub const LOG_FLOOR: f64 = 1e-300;

/// Mass of normalised `p` above which a clamped log score is counted.
const CLAMP_REPORT: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ScoringRuleId {
    #[serde(rename = "log")]
    Logarithmic,
    #[serde(rename = "hyvarinen")]
    Hyvarinen,
    #[serde(rename = "quadratic")]
    Quadratic,
    #[serde(rename = "sup")]
    Supremum,
}

impl ScoringRuleId {
    pub const ALL: [ScoringRuleId; 4] = [
        ScoringRuleId::Logarithmic,
        ScoringRuleId::Hyvarinen,
        ScoringRuleId::Quadratic,
        ScoringRuleId::Supremum,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScoringRuleId::Logarithmic => "log",
            ScoringRuleId::Hyvarinen => "hyvarinen",
            ScoringRuleId::Quadratic => "quadratic",
            ScoringRuleId::Supremum => "sup",
        }
    }

    /// Strictly proper up to positive scaling.
    pub fn is_strict(self) -> bool {
        self != ScoringRuleId::Supremum
    }
}

impl fmt::Display for ScoringRuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScoringRuleId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "log" | "logarithmic" | "shannon" => Ok(ScoringRuleId::Logarithmic),
            "hyvarinen" | "hyvärinen" => Ok(ScoringRuleId::Hyvarinen),
            "quadratic" | "brier" => Ok(ScoringRuleId::Quadratic),
            "sup" | "supremum" => Ok(ScoringRuleId::Supremum),
            _ => Err(invalid(
                "rule",
                format!("unknown rule `{s}`; expected log|hyvarinen|quadratic|sup"),
            )),
        }
    }
}

fn check_family(rule: ScoringRuleId, q: &Field) -> Result<()> {
    match rule {
        ScoringRuleId::Hyvarinen if !q.is_smooth() => Err(Error::HyvarinenOnGrid),
        ScoringRuleId::Supremum if q.is_smooth() => Err(Error::Unsupported(
            "the supremum rule is evaluated on grid densities".into(),
        )),
        _ => Ok(()),
    }
}

/// `Φ(q)`.
pub fn entropy(rule: ScoringRuleId, q: &Density, scheme: &QuadratureScheme) -> Result<f64> {
    entropy_field(rule, &Field::from(q), scheme)
}

/// `Φ(f)` for a field in the cone, on the field's own mesh.
pub fn entropy_field(rule: ScoringRuleId, f: &Field, scheme: &QuadratureScheme) -> Result<f64> {
    check_family(rule, f)?;
    entropy_sampled(rule, &Sampled::on_own_mesh(f, scheme)?)
}

fn first_negative(s: &Sampled) -> Option<Vec<f64>> {
    s.jets
        .iter()
        .position(|j| j.value < 0.0)
        .map(|i| s.mesh.points[i][..s.mesh.dim].to_vec())
}

/// `Φ` of sampled values by the mesh's quadrature.
pub fn entropy_sampled(rule: ScoringRuleId, s: &Sampled) -> Result<f64> {
    let m = s.mass();
    if !(m > 0.0) || !m.is_finite() {
        return Err(Error::ZeroMass { mass: m });
    }
    match rule {
        ScoringRuleId::Logarithmic => {
            if let Some(x) = first_negative(s) {
                return Err(Error::NegativeDensity { x });
            }
            let lm = m.ln();
            Ok(s.mesh.integrate(|i, _| {
                let j = &s.jets[i];
                if j.value == 0.0 {
                    0.0
                } else {
                    j.raw_value() * (j.ln_abs() - lm)
                }
            }))
        }
        ScoringRuleId::Hyvarinen => {
            if !s.is_smooth() {
                return Err(Error::HyvarinenOnGrid);
            }
            if let Some(x) = first_negative(s) {
                return Err(Error::NegativeDensity { x });
            }
            Ok(s.mesh.integrate(|i, _| {
                let j = &s.jets[i];
                if j.value == 0.0 {
                    0.0
                } else {
                    let g = j.grad_ratio();
                    j.raw_value() * (g[0] * g[0] + g[1] * g[1])
                }
            }))
        }
        ScoringRuleId::Quadratic => Ok(s.mesh.integrate(|i, _| {
            let v = s.jets[i].raw_value();
            v * v
        }) / m),
        ScoringRuleId::Supremum => {
            if s.mesh.grid.is_none() {
                return Err(Error::Unsupported(
                    "the supremum rule is evaluated on grid densities".into(),
                ));
            }
            Ok(s.jets.iter().map(Jet::raw_value).fold(f64::NEG_INFINITY, f64::max))
        }
    }
}

/// `S(q)` as a function, with the mass and self-pairing of `q` fixed.
#[derive(Debug, Clone)]
pub struct ScoreFunction {
    rule: ScoringRuleId,
    q: Field,
    mass: f64,
    /// `q·q`, used by the quadratic score.
    self_pair: f64,
    subgradient: Option<CellFunction>,
}

impl ScoreFunction {
    pub fn new(rule: ScoringRuleId, q: &Density, scheme: &QuadratureScheme) -> Result<Self> {
        Self::from_field(rule, &Field::from(q), scheme)
    }

    pub fn from_field(rule: ScoringRuleId, q: &Field, scheme: &QuadratureScheme) -> Result<Self> {
        check_family(rule, q)?;
        let s = Sampled::on_own_mesh(q, scheme)?;
        let mass = s.mass();
        if !(mass > 0.0) || !mass.is_finite() {
            return Err(Error::ZeroMass { mass });
        }
        let self_pair = match rule {
            ScoringRuleId::Quadratic => s.mesh.integrate(|i, _| {
                let v = s.jets[i].raw_value();
                v * v
            }),
            _ => f64::NAN,
        };
        let subgradient = match rule {
            ScoringRuleId::Supremum => {
                let d = q
                    .as_density()
                    .ok_or_else(|| Error::Unsupported("the supremum score needs a single grid density".into()))?;
                Some(sup_subgradient(&d, DEFAULT_MODE_TOL)?)
            }
            _ => None,
        };
        Ok(ScoreFunction {
            rule,
            q: q.clone(),
            mass,
            self_pair,
            subgradient,
        })
    }

    pub fn rule(&self) -> ScoringRuleId {
        self.rule
    }

    /// `q·1` as integrated by the scheme.
    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// `S(q)(x)`; a log score at a zero of `q` is an error here.
    pub fn at(&self, x: &[f64]) -> Result<f64> {
        if let Some(s) = &self.subgradient {
            return Ok(s.at(x[0]));
        }
        let j = self.q.jet(x)?;
        if j.value <= 0.0 && self.rule != ScoringRuleId::Quadratic {
            return Err(Error::ZeroDensity { x: x.to_vec() });
        }
        Ok(score_from_jet(self.rule, &j, self.mass, self.self_pair))
    }

    /// `S(q)(x)` with the log floor applied; the flag reports clamping.
    pub fn at_clamped(&self, x: &[f64]) -> Result<(f64, bool)> {
        if self.rule == ScoringRuleId::Logarithmic {
            let j = self.q.jet(x)?;
            if j.value <= 0.0 {
                return Ok((LOG_FLOOR.ln() - self.mass.ln(), true));
            }
            return Ok((score_from_jet(self.rule, &j, self.mass, self.self_pair), false));
        }
        Ok((self.at(x)?, false))
    }
}

fn score_from_jet(rule: ScoringRuleId, j: &Jet, mass: f64, self_pair: f64) -> f64 {
    match rule {
        ScoringRuleId::Logarithmic => j.ln_abs() - mass.ln(),
        ScoringRuleId::Hyvarinen => {
            let g = j.grad_ratio();
            -2.0 * j.laplacian_ratio() + g[0] * g[0] + g[1] * g[1]
        }
        ScoringRuleId::Quadratic => 2.0 * j.raw_value() / mass - self_pair / (mass * mass),
        ScoringRuleId::Supremum => f64::NAN,
    }
}

/// `S(q)(x)`.
pub fn score_at(rule: ScoringRuleId, q: &Density, x: &[f64], scheme: &QuadratureScheme) -> Result<f64> {
    ScoreFunction::new(rule, q, scheme)?.at(x)
}

/// Expected score with its diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExpectedScore {
    pub value: f64,
    /// Nodes where the log floor fired while `p̂ > 1e-12`.
    pub clamped: usize,
    /// The supremum rule paired `p` against a point mass at the modes of `q`;
    /// that functional is not integrable against the prediction set.
    pub dirac: bool,
}

/// `p̂·S(q)` with `p̂ = p/(p·1)`.
pub fn expected_score(rule: ScoringRuleId, p: &Density, q: &Density, scheme: &QuadratureScheme) -> Result<f64> {
    Ok(expected_score_detailed(rule, &Field::from(p), &Field::from(q), scheme)?.value)
}

pub fn expected_score_detailed(
    rule: ScoringRuleId,
    p: &Field,
    q: &Field,
    scheme: &QuadratureScheme,
) -> Result<ExpectedScore> {
    check_family(rule, q)?;
    let mesh = mesh_for(&[p, q], scheme)?;
    let sp = Sampled::new(p, mesh.clone())?;
    let sq = Sampled::new(q, mesh)?;
    expected_score_sampled(rule, &sp, &sq)
}

/// `p̂·S(q)` for two fields sampled on the same mesh.
pub fn expected_score_sampled(rule: ScoringRuleId, sp: &Sampled, sq: &Sampled) -> Result<ExpectedScore> {
    let mp = sp.mass();
    if !(mp > 0.0) || !mp.is_finite() {
        return Err(Error::ZeroMass { mass: mp });
    }
    let mut e = pair_score_sampled(rule, sp, sq)?;
    e.value /= mp;
    Ok(e)
}

/// `p·S(q)` without normalising `p`; `p` may be signed.
pub fn pair_score_sampled(rule: ScoringRuleId, sp: &Sampled, sq: &Sampled) -> Result<ExpectedScore> {
    debug_assert!(Arc::ptr_eq(&sp.mesh, &sq.mesh));
    let mesh: &Mesh = &sp.mesh;
    let mq = sq.mass();
    if !(mq > 0.0) || !mq.is_finite() {
        return Err(Error::ZeroMass { mass: mq });
    }
    if rule == ScoringRuleId::Supremum {
        return sup_pairing(sp, sq);
    }
    if rule == ScoringRuleId::Hyvarinen && !sq.is_smooth() {
        return Err(Error::HyvarinenOnGrid);
    }
    let self_pair = match rule {
        ScoringRuleId::Quadratic => mesh.integrate(|i, _| {
            let v = sq.jets[i].raw_value();
            v * v
        }),
        _ => f64::NAN,
    };
    let mp = sp.mass().abs();
    let mut clamped = 0;
    let mut err = None;
    let value = mesh.integrate(|i, x| {
        let pv = sp.jets[i].raw_value();
        if pv == 0.0 {
            return 0.0;
        }
        let j = &sq.jets[i];
        let s = match rule {
            ScoringRuleId::Logarithmic if j.value <= 0.0 => {
                if j.value < 0.0 && err.is_none() {
                    err = Some(Error::NegativeDensity {
                        x: x[..mesh.dim].to_vec(),
                    });
                }
                if pv.abs() > CLAMP_REPORT * mp {
                    clamped += 1;
                }
                LOG_FLOOR.ln() - mq.ln()
            }
            ScoringRuleId::Hyvarinen if j.value <= 0.0 => {
                if err.is_none() {
                    err = Some(Error::ZeroDensity {
                        x: x[..mesh.dim].to_vec(),
                    });
                }
                0.0
            }
            _ => score_from_jet(rule, j, mq, self_pair),
        };
        pv * s
    });
    if let Some(e) = err {
        return Err(e);
    }
    Ok(ExpectedScore {
        value,
        clamped,
        dirac: false,
    })
}

fn sup_pairing(sp: &Sampled, sq: &Sampled) -> Result<ExpectedScore> {
    let grid = sq
        .mesh
        .grid
        .as_ref()
        .ok_or_else(|| Error::Unsupported("the supremum rule is evaluated on grid densities".into()))?;
    let modes = ModeSet::from_values(grid.lo, grid.spacing(), &sq.raw_values(), DEFAULT_MODE_TOL);
    let pv = sp.raw_values();
    if modes.is_null() {
        let at: Vec<f64> = modes.isolated.iter().map(|&i| pv[i]).collect();
        return Ok(ExpectedScore {
            value: at.iter().sum::<f64>() / at.len() as f64,
            clamped: 0,
            dirac: true,
        });
    }
    let cf = CellFunction {
        height: 1.0 / modes.measure,
        modes,
    };
    Ok(ExpectedScore {
        value: cf.pair_values(&pv),
        clamped: 0,
        dirac: false,
    })
}

/// `Φ(p̂) - p̂·S(q̂)`.
pub fn divergence(rule: ScoringRuleId, p: &Density, q: &Density, scheme: &QuadratureScheme) -> Result<f64> {
    divergence_field(rule, &Field::from(p), &Field::from(q), scheme)
}

pub fn divergence_field(rule: ScoringRuleId, p: &Field, q: &Field, scheme: &QuadratureScheme) -> Result<f64> {
    check_family(rule, p)?;
    check_family(rule, q)?;
    let mesh = mesh_for(&[p, q], scheme)?;
    let sp = Sampled::new(p, mesh.clone())?;
    let sq = Sampled::new(q, mesh)?;
    divergence_sampled(rule, &sp, &sq)
}

pub fn divergence_sampled(rule: ScoringRuleId, sp: &Sampled, sq: &Sampled) -> Result<f64> {
    let phi = entropy_sampled(rule, sp)? / sp.mass();
    Ok(phi - expected_score_sampled(rule, sp, sq)?.value)
}

/// `∫ |∇ln p - ∇ln q|² p̂ dx`.
pub fn hyvarinen_divergence_direct(p: &Density, q: &Density, scheme: &QuadratureScheme) -> Result<f64> {
    let (fp, fq) = (Field::from(p), Field::from(q));
    if !fp.is_smooth() || !fq.is_smooth() {
        return Err(Error::HyvarinenOnGrid);
    }
    let mesh = mesh_for(&[&fp, &fq], scheme)?;
    let sp = Sampled::new(&fp, mesh.clone())?;
    let sq = Sampled::new(&fq, mesh.clone())?;
    let mp = sp.mass();
    Ok(mesh.integrate(|i, _| {
        let (a, b) = (&sp.jets[i], &sq.jets[i]);
        let (ga, gb) = (a.grad_ratio(), b.grad_ratio());
        let d0 = ga[0] - gb[0];
        let d1 = ga[1] - gb[1];
        a.raw_value() / mp * (d0 * d0 + d1 * d1)
    }))
}

/// `∫ |p̂ - q̂|`.
pub fn l1_distance(p: &Field, q: &Field, scheme: &QuadratureScheme) -> Result<f64> {
    let mesh = mesh_for(&[p, q], scheme)?;
    let sp = Sampled::new(p, mesh.clone())?;
    let sq = Sampled::new(q, mesh.clone())?;
    let (mp, mq) = (sp.mass(), sq.mass());
    Ok(mesh.integrate(|i, _| (sp.jets[i].raw_value() / mp - sq.jets[i].raw_value() / mq).abs()))
}
