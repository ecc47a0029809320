//! Certification suites: propriety and the subgradient certificate, Euler,
//! homogeneity and sublinearity, the properties of the directional
//! derivative, and Gâteaux differentiability of the quadratic entropy.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use super::report::{CaseRecord, VerificationReport};
use super::sampling::{GridShape, Sampler};
use super::{
    default_steps, right_derivative_sampled, symmetric_derivative_sampled, two_sided_sampled, DerivativeEstimate,
};
use crate::densities::{cone_check, Bump, ConeSpec, Density, Family, Field};
use crate::error::{invalid, Error, Result};
use crate::pairing::{mesh_for, Mesh, QuadratureScheme, Sampled};
use crate::rules::{
    divergence_sampled, entropy_sampled, expected_score_sampled, pair_score_sampled, ModeSet, ScoreFunction,
    ScoringRuleId, DEFAULT_MODE_TOL,
};

/// Tolerances of the suites.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    /// Quadrature-level identities (propriety, Euler, homogeneity).
    pub quad: f64,
    /// Finite-difference derivative against its closed form.
    pub fd: f64,
    /// Minimum divergence of a separated pair under a strict rule.
    pub strict_margin: f64,
    /// Normalised L¹ distance beyond which a pair counts as separated.
    pub separation: f64,
    /// Properties of the directional derivative.
    pub prop22: f64,
    /// Symmetric derivative against the Gâteaux gradient.
    pub gateaux: f64,
    /// Additivity and homogeneity of the Gâteaux derivative.
    pub linearity: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            quad: 1e-8,
            fd: 1e-4,
            strict_margin: 1e-6,
            separation: 0.1,
            prop22: 1e-6,
            gateaux: 1e-5,
            linearity: 1e-7,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Propriety,
    Euler,
    Homogeneity,
    Prop22,
    Gateaux,
    All,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Propriety => "propriety",
            Suite::Euler => "euler",
            Suite::Homogeneity => "homogeneity",
            Suite::Prop22 => "prop22",
            Suite::Gateaux => "gateaux",
            Suite::All => "all",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "propriety" => Suite::Propriety,
            "euler" => Suite::Euler,
            "homogeneity" => Suite::Homogeneity,
            "prop22" => Suite::Prop22,
            "gateaux" => Suite::Gateaux,
            "all" => Suite::All,
            _ => {
                return Err(invalid(
                    "suite",
                    format!("unknown suite `{s}`; expected propriety|euler|homogeneity|prop22|gateaux|all"),
                ))
            }
        })
    }
}

fn digest_of(parts: &[String]) -> String {
    crate::digest(&parts.join("|"))
}

fn field_digest(f: &Field) -> String {
    crate::digest(&format!("{f:?}"))
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn sample_on(mesh: &Arc<Mesh>, f: &Field) -> Result<Sampled> {
    Sampled::new(f, mesh.clone())
}

// ---------------------------------------------------------------------------
// Propriety and the subgradient certificate

/// Checks, per pair: (i) `Φ(p̂) ≥ p̂·S(q̂)`, (ii) equality at `p = q`,
/// (iii) `p̂·S(q̂) ≤ Φ′₊(p̂, q̂)` and (iv) equality of the two, with the
/// derivative estimated by difference quotients. Strict rules also need a
/// positive divergence on separated pairs.
pub fn certify_subgradient(
    rule: ScoringRuleId,
    pairs: &[(Density, Density)],
    tol: &Tolerances,
    scheme: &QuadratureScheme,
) -> VerificationReport {
    let mut report = VerificationReport::new("propriety", Some(rule), 0, scheme);
    report.strictness = Some(if rule.is_strict() { "strict" } else { "not strict" }.to_string());
    let cases: Vec<Vec<CaseRecord>> = pairs
        .par_iter()
        .enumerate()
        .map(|(k, (p, q))| subgradient_cases(rule, k, p, q, tol, scheme))
        .collect();
    report.extend(cases.into_iter().flatten());
    report
}

fn subgradient_cases(
    rule: ScoringRuleId,
    k: usize,
    p: &Density,
    q: &Density,
    tol: &Tolerances,
    scheme: &QuadratureScheme,
) -> Vec<CaseRecord> {
    let id = |s: &str| format!("pair{k:03}/{s}");
    let dg = digest_of(&[p.digest(), q.digest()]);
    let run = || -> Result<Vec<CaseRecord>> {
        let fp = Field::from(p.normalized());
        let fq = Field::from(q.normalized());
        let mesh = mesh_for(&[&fp, &fq], scheme)?;
        let sp = sample_on(&mesh, &fp)?;
        let sq = sample_on(&mesh, &fq)?;
        let mut out = Vec::new();

        let d = divergence_sampled(rule, &sp, &sq)?;
        out.push(CaseRecord::check(id("propriety"), &dg, (-d).max(0.0), tol.quad));
        let d0 = divergence_sampled(rule, &sq, &sq)?;
        out.push(CaseRecord::check(id("equality"), &dg, d0.abs(), tol.quad));

        let e = expected_score_sampled(rule, &sp, &sq)?;
        let fd = right_derivative_sampled(&rule, &sq, &sp, &default_steps())?;
        out.push(CaseRecord::check(
            id("support"),
            &dg,
            (e.value - fd.value).max(0.0),
            tol.fd,
        ));

        if rule == ScoringRuleId::Supremum {
            let grid = mesh.grid.as_ref().expect("grid mesh");
            let modes = ModeSet::from_values(grid.lo, grid.spacing(), &sq.raw_values(), DEFAULT_MODE_TOL);
            let pv = sp.raw_values();
            let top = modes
                .mode_nodes
                .iter()
                .map(|&i| pv[i])
                .fold(f64::NEG_INFINITY, f64::max);
            let note = if modes.is_null() {
                "no P-integrable subgradient: measure-zero mode set, Dirac pairing; derivative is max of p over the modes"
            } else {
                "integrable subgradient 1_M/|M| exists but is not unique; derivative is max of p over M"
            };
            out.push(CaseRecord::check(id("certificate"), &dg, (fd.value - top).abs(), tol.fd).with_note(note));
        } else {
            out.push(CaseRecord::check(
                id("certificate"),
                &dg,
                (fd.value - e.value).abs(),
                tol.fd,
            ));
        }

        if rule.is_strict() {
            let l1 = mesh.integrate(|i, _| (sp.jets[i].raw_value() - sq.jets[i].raw_value()).abs());
            if l1 >= tol.separation {
                out.push(
                    CaseRecord::check(id("strict"), &dg, (tol.strict_margin - d).max(0.0), 0.0)
                        .with_note(format!("L1 distance {l1:.4}")),
                );
            }
        }
        Ok(out)
    };
    run().unwrap_or_else(|e| vec![CaseRecord::error(id("evaluation"), &dg, tol.quad, e)])
}

/// A pair `p ≠ q` with the same plateau of modes and zero supremum divergence.
pub fn sup_nonstrict_witness(tol: &Tolerances, scheme: &QuadratureScheme) -> CaseRecord {
    let n = super::GRID_POINTS;
    let shape = |off: f64| -> Vec<f64> {
        (0..n)
            .map(|i| {
                let x = i as f64 / (n - 1) as f64;
                if (0.4..=0.6).contains(&x) {
                    2.0
                } else {
                    off * (1.0 + x)
                }
            })
            .collect()
    };
    let run = || -> Result<(f64, f64, String)> {
        let q = Density::grid(0.0, 1.0, shape(1.0))?;
        let p = Density::grid(0.0, 1.0, shape(0.25))?;
        let (fp, fq) = (Field::from(p.normalized()), Field::from(q.normalized()));
        let mesh = mesh_for(&[&fp, &fq], scheme)?;
        let sp = sample_on(&mesh, &fp)?;
        let sq = sample_on(&mesh, &fq)?;
        let d = divergence_sampled(ScoringRuleId::Supremum, &sp, &sq)?;
        let l1 = mesh.integrate(|i, _| (sp.jets[i].raw_value() - sq.jets[i].raw_value()).abs());
        Ok((d, l1, digest_of(&[p.digest(), q.digest()])))
    };
    match run() {
        Ok((d, l1, dg)) => CaseRecord::check("nonstrict_witness", dg, d.abs(), tol.quad)
            .with_note(format!("p != q (L1 distance {l1:.4}) with zero divergence: not strict")),
        Err(e) => CaseRecord::error("nonstrict_witness", "", tol.quad, e),
    }
}

// ---------------------------------------------------------------------------
// Euler identity

/// `|q·S(q) - Φ(q)| / |Φ(q)|` per density.
pub fn euler_suite(
    rule: ScoringRuleId,
    densities: &[Density],
    tol: &Tolerances,
    scheme: &QuadratureScheme,
) -> VerificationReport {
    let mut report = VerificationReport::new("euler", Some(rule), 0, scheme);
    let cases: Vec<CaseRecord> = densities
        .par_iter()
        .enumerate()
        .map(|(k, q)| {
            let id = format!("q{k:03}/{}", q.family().tag());
            let run = || -> Result<CaseRecord> {
                let sq = Sampled::on_own_mesh(&Field::from(q), scheme)?;
                let phi = entropy_sampled(rule, &sq)?;
                let qs = pair_score_sampled(rule, &sq, &sq)?;
                let c = CaseRecord::check(&id, q.digest(), rel(qs.value, phi), tol.quad);
                Ok(if qs.dirac {
                    c.with_note("Dirac pairing at the modes")
                } else {
                    c
                })
            };
            run().unwrap_or_else(|e| CaseRecord::error(&id, q.digest(), tol.quad, e))
        })
        .collect();
    report.extend(cases);
    report
}

// ---------------------------------------------------------------------------
// Homogeneity and sublinearity

fn probe_points(q: &Density) -> Vec<f64> {
    match q.grid_data() {
        Some(g) => vec![
            g.lo + 0.1 * (g.hi - g.lo),
            g.lo + 0.5 * (g.hi - g.lo),
            g.lo + 0.9 * (g.hi - g.lo),
        ],
        None => vec![-1.0, 0.0, 0.5, 1.5],
    }
}

/// `Φ(λq) = λΦ(q)`, `S(λq) = S(q)`, subadditivity with a strict margin on
/// separated pairs, additivity on rays, and convexity along segments.
pub fn certify_sublinearity(
    rule: ScoringRuleId,
    samples: &[Density],
    lambdas: &[f64],
    tol: &Tolerances,
    scheme: &QuadratureScheme,
) -> VerificationReport {
    let mut report = VerificationReport::new("homogeneity", Some(rule), 0, scheme);
    let cases: Vec<Vec<CaseRecord>> = samples
        .par_iter()
        .enumerate()
        .map(|(k, f)| {
            let mut out = scaling_cases(rule, k, f, lambdas, tol, scheme);
            if samples.len() > 1 {
                let g = &samples[(k + 1) % samples.len()];
                out.extend(subadditivity_cases(rule, k, f, g, tol, scheme));
            }
            out
        })
        .collect();
    report.extend(cases.into_iter().flatten());
    report
}

fn scaling_cases(
    rule: ScoringRuleId,
    k: usize,
    q: &Density,
    lambdas: &[f64],
    tol: &Tolerances,
    scheme: &QuadratureScheme,
) -> Vec<CaseRecord> {
    let dg = q.digest();
    let mut out = Vec::new();
    let phi = crate::rules::entropy(rule, q, scheme);
    let score = ScoreFunction::new(rule, q, scheme);
    for &l in lambdas {
        let id = format!("q{k:03}/entropy_lambda_{l}");
        let ql = q.scaled(l);
        match (&phi, crate::rules::entropy(rule, &ql, scheme)) {
            (Ok(a), Ok(b)) => out.push(CaseRecord::check(id, &dg, rel(b, l * a), tol.quad)),
            (Err(e), _) => out.push(CaseRecord::error(id, &dg, tol.quad, e)),
            (_, Err(e)) => out.push(CaseRecord::error(id, &dg, tol.quad, e)),
        }
        let id = format!("q{k:03}/score_lambda_{l}");
        match (&score, ScoreFunction::new(rule, &ql, scheme)) {
            (Err(Error::MeasureZeroMode), _) => {}
            (Ok(s0), Ok(s1)) => {
                let mut worst = 0.0f64;
                for x in probe_points(q) {
                    match (s0.at(&[x]), s1.at(&[x])) {
                        (Ok(a), Ok(b)) => worst = worst.max((a - b).abs() / a.abs().max(1.0)),
                        _ => worst = f64::INFINITY,
                    }
                }
                out.push(CaseRecord::check(id, &dg, worst, tol.quad));
            }
            (Err(e), _) => out.push(CaseRecord::error(id, &dg, tol.quad, e)),
            (_, Err(e)) => out.push(CaseRecord::error(id, &dg, tol.quad, e)),
        }
    }
    out
}

fn subadditivity_cases(
    rule: ScoringRuleId,
    k: usize,
    f: &Density,
    g: &Density,
    tol: &Tolerances,
    scheme: &QuadratureScheme,
) -> Vec<CaseRecord> {
    let dg = digest_of(&[f.digest(), g.digest()]);
    let id = |s: &str| format!("q{k:03}/{s}");
    let run = || -> Result<Vec<CaseRecord>> {
        let (ff, fg) = (Field::from(f), Field::from(g));
        let mesh = mesh_for(&[&ff, &fg], scheme)?;
        let sf = sample_on(&mesh, &ff)?;
        let sg = sample_on(&mesh, &fg)?;
        let phi = |s: &Sampled| entropy_sampled(rule, s);
        let (a, b) = (phi(&sf)?, phi(&sg)?);
        let scale = a.abs() + b.abs();
        let mut out = Vec::new();
        let gap = a + b - phi(&sf.lin(1.0, &sg, 1.0))?;
        out.push(CaseRecord::check(
            id("subadditive"),
            &dg,
            (-gap).max(0.0) / scale,
            tol.quad,
        ));
        if rule.is_strict() {
            let (mf, mg) = (sf.mass(), sg.mass());
            let l1 = mesh.integrate(|i, _| (sf.jets[i].raw_value() / mf - sg.jets[i].raw_value() / mg).abs());
            if l1 >= tol.separation {
                out.push(
                    CaseRecord::check(id("strict_subadditive"), &dg, (tol.strict_margin - gap).max(0.0), 0.0)
                        .with_note(format!("L1 distance {l1:.4}")),
                );
            }
        }
        let ray = a + 2.0 * a - phi(&sf.lin(1.0, &sf, 2.0))?;
        out.push(CaseRecord::check(
            id("ray_additive"),
            &dg,
            ray.abs() / (3.0 * a.abs()),
            tol.quad,
        ));
        for t in [0.25, 0.5, 0.75] {
            let mid = phi(&sf.lin(1.0 - t, &sg, t))?;
            let excess = mid - ((1.0 - t) * a + t * b);
            out.push(CaseRecord::check(
                id(&format!("convex_t{t}")),
                &dg,
                excess.max(0.0) / scale,
                tol.quad,
            ));
        }
        Ok(out)
    };
    run().unwrap_or_else(|e| vec![CaseRecord::error(id("subadditivity"), &dg, tol.quad, e)])
}

/// Homogeneity of entropy and score under `λ ∈ {0.5, 2, 10}` plus sublinearity.
pub fn homogeneity_suite(
    rule: ScoringRuleId,
    samples: &[Density],
    tol: &Tolerances,
    scheme: &QuadratureScheme,
) -> VerificationReport {
    certify_sublinearity(rule, samples, &[0.5, 2.0, 10.0], tol, scheme)
}

// ---------------------------------------------------------------------------
// Properties of the right directional derivative

/// Directions used at one base point.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionSet {
    /// Elements of the cone; always feasible.
    pub cone: Vec<Field>,
    /// Directions feasible with both signs for the steps used.
    pub two_sided: Vec<Field>,
}

fn gaussian(mean: f64, var: f64) -> Result<Field> {
    Ok(Field::from(Density::gaussian(mean, var)?))
}

/// Cone directions from `others` and two two-sided probes adapted to `q`.
///
/// For a mixture, a probe is `(w/2)(g - q̂)` with `g` a narrowed, shifted
/// copy of one component of weight `w`; then `q ± t·probe` stays positive
/// for `t ≤ 1`. For grids the probes are bumps scaled below `min q`.
pub fn prop22_directions(q: &Density, others: &[Density]) -> Result<DirectionSet> {
    let cone = others.iter().map(|d| Field::from(d.normalized())).collect();
    let qn = Field::from(q.normalized());
    let two_sided = match q.family() {
        Family::Mixture { components, weights } => {
            let total: f64 = weights.iter().sum();
            let dominant = (0..weights.len())
                .max_by(|&a, &b| weights[a].total_cmp(&weights[b]))
                .expect("non-empty mixture");
            let widest = (0..weights.len())
                .max_by(|&a, &b| components[a].var.total_cmp(&components[b].var))
                .expect("non-empty mixture");
            let probe = |i: usize, shift: f64| -> Result<Field> {
                let c = &components[i];
                let sd = c.var.sqrt();
                let g = gaussian(c.mean[0] + shift * sd, 0.5 * c.var)?;
                g.lin(0.5 * weights[i] / total, &qn, -0.5 * weights[i] / total)
            };
            vec![probe(dominant, -0.3)?, probe(widest, 0.3)?]
        }
        Family::Gaussian(c) => {
            let sd = c.var.sqrt();
            vec![
                gaussian(c.mean[0] - 0.3 * sd, 0.5 * c.var)?.lin(0.5, &qn, -0.5)?,
                gaussian(c.mean[0] + 0.3 * sd, 0.5 * c.var)?.lin(0.5, &qn, -0.5)?,
            ]
        }
        Family::Grid(g) => {
            let lo = g.values.iter().copied().fold(f64::INFINITY, f64::min) * q.scale() / q.mass();
            let w = g.hi - g.lo;
            let b = |c: f64, h: f64| Field::from(Bump::new(g.lo + c * w, h * w));
            vec![
                b(0.3, 0.1).scale(0.5 * lo),
                b(0.6, 0.1).lin(0.25 * lo, &b(0.8, 0.05), -0.25 * lo)?,
            ]
        }
        Family::PowerLaw { .. } => return Err(Error::Unsupported("two-sided probes for power laws".into())),
    };
    Ok(DirectionSet { cone, two_sided })
}

/// One record per property of `Φ′₊(·, q)`: (a) monotone quotients,
/// (b) positive homogeneity and subadditivity, (c) invariance under
/// `q ↦ λq`, (d) `Φ(p) ≥ Φ′₊(p, q)` with equality at `p = q`,
/// (e) left ≤ right, (f) additivity of two-sided derivatives.
pub fn certify_prop22(
    rule: ScoringRuleId,
    q: &Density,
    dirs: &DirectionSet,
    tol: &Tolerances,
    scheme: &QuadratureScheme,
) -> Vec<CaseRecord> {
    let dg = q.digest();
    let run = || -> Result<Vec<CaseRecord>> {
        let fq = Field::from(q);
        let mut all: Vec<&Field> = vec![&fq];
        all.extend(dirs.cone.iter());
        all.extend(dirs.two_sided.iter());
        let mesh = mesh_for(&all, scheme)?;
        let sq = sample_on(&mesh, &fq)?;
        let cone: Vec<Sampled> = dirs.cone.iter().map(|f| sample_on(&mesh, f)).collect::<Result<_>>()?;
        let two: Vec<Sampled> = dirs
            .two_sided
            .iter()
            .map(|f| sample_on(&mesh, f))
            .collect::<Result<_>>()?;
        let steps = default_steps();
        let deriv = |base: &Sampled, p: &Sampled| -> Result<DerivativeEstimate> {
            right_derivative_sampled(&rule, base, p, &steps)
        };
        let mut out = Vec::new();
        let fd: Vec<DerivativeEstimate> = cone.iter().map(|p| deriv(&sq, p)).collect::<Result<_>>()?;

        for (j, d) in fd.iter().enumerate() {
            out.push(CaseRecord::check(
                format!("a/monotone_c{j}"),
                &dg,
                d.monotonicity_violations as f64,
                0.0,
            ));
        }
        for (j, p) in cone.iter().enumerate() {
            let d2 = deriv(&sq, &p.scale(2.0))?;
            out.push(CaseRecord::check(
                format!("b/homogeneous_c{j}"),
                &dg,
                (d2.value - 2.0 * fd[j].value).abs(),
                tol.prop22,
            ));
            if cone.len() > 1 {
                let k = (j + 1) % cone.len();
                let ds = deriv(&sq, &p.lin(1.0, &cone[k], 1.0))?;
                let excess = ds.value - fd[j].value - fd[k].value;
                out.push(CaseRecord::check(
                    format!("b/subadditive_c{j}_c{k}"),
                    &dg,
                    excess.max(0.0),
                    tol.prop22,
                ));
            }
            for l in [0.5, 2.0, 7.0] {
                let dl = deriv(&sq.scale(l), p)?;
                out.push(CaseRecord::check(
                    format!("c/invariant_c{j}_lambda_{l}"),
                    &dg,
                    (dl.value - fd[j].value).abs(),
                    tol.prop22,
                ));
            }
            let phi_p = entropy_sampled(rule, p)?;
            out.push(CaseRecord::check(
                format!("d/bound_c{j}"),
                &dg,
                (fd[j].value - phi_p).max(0.0),
                tol.prop22,
            ));
        }
        let dq = deriv(&sq, &sq)?;
        let phi_q = entropy_sampled(rule, &sq)?;
        out.push(CaseRecord::check("d/equality", &dg, (dq.value - phi_q).abs(), tol.quad));

        let mut values = Vec::new();
        for (j, r) in two.iter().enumerate() {
            let ts = two_sided_sampled(&rule, &sq, r, &steps)?;
            out.push(CaseRecord::check(
                format!("a/monotone_r{j}"),
                &dg,
                ts.right.monotonicity_violations as f64,
                0.0,
            ));
            out.push(CaseRecord::check(
                format!("e/left_le_right_r{j}"),
                &dg,
                (ts.left.value - ts.right.value).max(0.0),
                tol.prop22,
            ));
            values.push(ts.value);
        }
        for j in 0..two.len() {
            let k = (j + 1) % two.len();
            if k == j {
                continue;
            }
            let sum = two_sided_sampled(&rule, &sq, &two[j].lin(1.0, &two[k], 1.0), &steps)?;
            if let (Some(a), Some(b), Some(s)) = (values[j], values[k], sum.value) {
                out.push(CaseRecord::check(
                    format!("f/additive_r{j}_r{k}"),
                    &dg,
                    (s - a - b).abs(),
                    tol.prop22,
                ));
            }
            if two.len() == 2 {
                break;
            }
        }
        Ok(out)
    };
    run().unwrap_or_else(|e| vec![CaseRecord::error("prop22", &dg, tol.prop22, e)])
}

// ---------------------------------------------------------------------------
// Gâteaux differentiability of the quadratic entropy

/// Cone used to confirm that Gâteaux base points are interior.
pub fn interior_quadratic_cone() -> ConeSpec {
    ConeSpec::QuadraticNorm {
        k1: 0.05,
        k2: 20.0,
        delta: 0.02,
        epsilon: 0.04,
    }
}

/// Twenty directions around `q`: bumps, sign-changing bump differences
/// (some with nonzero integral), densities and differences of densities.
pub fn gateaux_directions(q: &Density) -> Result<Vec<Field>> {
    let (lo, hi) = match q.grid_data() {
        Some(g) => (g.lo, g.hi),
        None => {
            let m = q.normalized();
            let mean = crate::pairing::pair(|x| x[0], &m, &QuadratureScheme::default())?;
            let var = crate::pairing::pair(|x| (x[0] - mean).powi(2), &m, &QuadratureScheme::default())?;
            // Snap to sixteenths so bump edges fall on panel breakpoints.
            let c = (mean * 16.0).round() / 16.0;
            let s = (var.sqrt() * 4.0).round().max(1.0) / 4.0;
            (c - 2.0 * s, c + 2.0 * s)
        }
    };
    let w = hi - lo;
    let at = |u: f64| lo + u * w;
    let bump = |u: f64, h: f64| Field::from(Bump::new(at(u), h * w));
    let mut out = vec![
        bump(0.5, 0.25),
        bump(0.25, 0.125),
        bump(0.75, 0.125),
        bump(0.375, 0.25).scale(-1.0),
        bump(0.25, 0.125).sub(&bump(0.75, 0.125))?,
        bump(0.5, 0.25).lin(1.0, &bump(0.5, 0.125), -2.0)?,
        bump(0.25, 0.125).lin(1.0, &bump(0.625, 0.25), -0.5)?,
        bump(0.375, 0.125).lin(2.0, &bump(0.625, 0.125), -3.0)?,
        bump(0.125, 0.125).lin(-1.0, &bump(0.875, 0.125), 0.5)?,
        bump(0.5, 0.0625).scale(3.0),
    ];
    let mid = at(0.5);
    let spread = w / 4.0;
    let g1 = gaussian(mid, spread * spread)?;
    let g2 = gaussian(mid + spread, 0.25 * spread * spread)?;
    let g3 = gaussian(mid - spread, 2.0 * spread * spread)?;
    out.push(g1.clone());
    out.push(g2.clone());
    out.push(g1.sub(&g2)?);
    out.push(g2.lin(2.0, &g3, -1.0)?);
    out.push(g3.scale(-0.5));
    out.push(Field::from(q.normalized()));
    out.push(Field::from(q.normalized()).sub(&g1)?);
    out.push(g1.lin(1.0, &bump(0.75, 0.125), -1.0)?);
    out.push(bump(0.25, 0.25).lin(1.0, &g3, 1.0)?);
    out.push(g2.lin(-1.0, &bump(0.5, 0.25), 0.25)?);
    Ok(out)
}

/// Symmetric derivatives of the quadratic entropy at `q` against
/// `p·∇Φ(q)`, `∇Φ(q) = 2q/(q·1) - (q·q)/(q·1)²`, plus additivity and
/// homogeneity over the directions.
pub fn gateaux_check(
    q: &Density,
    directions: &[Field],
    tol: &Tolerances,
    scheme: &QuadratureScheme,
) -> Vec<CaseRecord> {
    let rule = ScoringRuleId::Quadratic;
    let dg = q.digest();
    let run = || -> Result<Vec<CaseRecord>> {
        let mut out = Vec::new();
        let cone = cone_check(q, &interior_quadratic_cone(), scheme);
        let margin = cone.margin.unwrap_or(f64::NEG_INFINITY);
        out.push(
            CaseRecord::check("interior", &dg, if cone.member { 0.0 } else { f64::INFINITY }, 0.0)
                .with_note(format!("quadratic cone margin {margin:.4}")),
        );
        let fq = Field::from(q);
        let mut all: Vec<&Field> = vec![&fq];
        all.extend(directions.iter());
        let mesh = mesh_for(&all, scheme)?;
        let sq = sample_on(&mesh, &fq)?;
        // Directions are rescaled to L¹ norm `q·1 / 2` so `q ± tp` keeps positive mass.
        let ps: Vec<Sampled> = directions
            .iter()
            .map(|f| {
                let p = sample_on(&mesh, f)?;
                let l1 = mesh.integrate(|i, _| p.jets[i].raw_value().abs());
                Ok(p.scale(0.5 * sq.mass() / l1))
            })
            .collect::<Result<_>>()?;
        let steps = default_steps();
        let sym = |p: &Sampled| symmetric_derivative_sampled(&rule, &sq, p, &steps).map(|d| d.value);
        let d: Vec<f64> = ps.iter().map(sym).collect::<Result<_>>()?;
        for (j, p) in ps.iter().enumerate() {
            let dgj = digest_of(&[dg.clone(), field_digest(&directions[j])]);
            let grad = pair_score_sampled(rule, p, &sq)?.value;
            out.push(CaseRecord::check(
                format!("d{j:02}/gradient"),
                &dgj,
                (d[j] - grad).abs(),
                tol.gateaux,
            ));
            let h = sym(&p.scale(-3.0))?;
            out.push(CaseRecord::check(
                format!("d{j:02}/homogeneous"),
                &dgj,
                (h + 3.0 * d[j]).abs(),
                tol.linearity,
            ));
            let k = (j + 1) % ps.len();
            let s = sym(&p.lin(1.0, &ps[k], 1.0))?;
            out.push(CaseRecord::check(
                format!("d{j:02}/additive_d{k:02}"),
                &dgj,
                (s - d[j] - d[k]).abs(),
                tol.linearity,
            ));
        }
        Ok(out)
    };
    run().unwrap_or_else(|e| vec![CaseRecord::error("gateaux", &dg, tol.gateaux, e)])
}

// ---------------------------------------------------------------------------
// Sampling and dispatch

/// Largest component variance of a Gaussian or mixture.
fn max_var(d: &Density) -> Option<f64> {
    match d.family() {
        Family::Gaussian(c) => Some(c.var),
        Family::Mixture { components, .. } => components.iter().map(|c| c.var).reduce(f64::max),
        _ => None,
    }
}

/// Orders a mixture pair so the forecast has the heavier tails.
///
/// With `var_p ≥ 1.5 var_q` the second and third variations of the log and
/// Hyvärinen entropies along `p` diverge and right quotients converge like
/// `t^α`, `α < 1`, far too slowly for any step schedule.
fn orient(p: Density, q: Density) -> (Density, Density) {
    match (max_var(&p), max_var(&q)) {
        (Some(vp), Some(vq)) if vp > TAIL_RATIO * vq => (q, p),
        _ => (p, q),
    }
}

const TAIL_RATIO: f64 = 1.0;

/// `d` with component variances clipped to `vmax`.
fn temper(d: &Density, vmax: f64) -> Result<Density> {
    let Family::Mixture { components, weights } = d.family() else {
        return Ok(d.clone());
    };
    let comps: Vec<(f64, f64)> = components.iter().map(|c| (c.mean[0], c.var.min(vmax))).collect();
    crate::densities::make_density(&crate::densities::DensityConfig::mixture(&comps, weights, d.scale()))
}

fn sample_pairs(rule: ScoringRuleId, n: usize, s: &mut Sampler) -> Result<Vec<(Density, Density)>> {
    const SHAPES: [GridShape; 3] = [GridShape::Plateau, GridShape::Tent, GridShape::Smooth];
    (0..n)
        .map(|i| match rule {
            ScoringRuleId::Hyvarinen => Ok(orient(s.mixture()?, s.mixture()?)),
            ScoringRuleId::Supremum => Ok((s.grid(SHAPES[(i + 1) % 3])?, s.grid(SHAPES[i % 3])?)),
            _ if i % 4 == 3 => Ok((s.grid(SHAPES[(i / 4 + 1) % 3])?, s.grid(SHAPES[(i / 4) % 3])?)),
            _ => Ok(orient(s.mixture()?, s.mixture()?)),
        })
        .collect()
}

fn sample_densities(rule: ScoringRuleId, n: usize, s: &mut Sampler) -> Result<Vec<Density>> {
    const SHAPES: [GridShape; 3] = [GridShape::Smooth, GridShape::Plateau, GridShape::Tent];
    let mut out = if rule == ScoringRuleId::Supremum {
        Vec::new()
    } else {
        s.mixtures(n)?
    };
    if rule != ScoringRuleId::Hyvarinen {
        out.extend(s.grids(n.min(20), &SHAPES)?);
    }
    Ok(out)
}

/// Runs `suite` for `rule` on `samples` seeded cases.
pub fn run_suite(
    suite: Suite,
    rule: ScoringRuleId,
    samples: usize,
    seed: u64,
    tol: &Tolerances,
    scheme: &QuadratureScheme,
) -> Result<VerificationReport> {
    if samples == 0 {
        return Err(invalid("samples", "must be positive"));
    }
    scheme.validate()?;
    let mut report = match suite {
        Suite::Propriety => {
            let pairs = sample_pairs(rule, samples, &mut Sampler::new(seed))?;
            let mut r = certify_subgradient(rule, &pairs, tol, scheme);
            if rule == ScoringRuleId::Supremum {
                r.push(sup_nonstrict_witness(tol, scheme));
            }
            r
        }
        Suite::Euler => euler_suite(
            rule,
            &sample_densities(rule, samples, &mut Sampler::new(seed))?,
            tol,
            scheme,
        ),
        Suite::Homogeneity => homogeneity_suite(
            rule,
            &sample_densities(rule, samples, &mut Sampler::new(seed))?,
            tol,
            scheme,
        ),
        Suite::Prop22 => {
            let n = samples.min(10);
            let mut s = Sampler::new(seed);
            let bases: Vec<(Density, Vec<Density>)> = (0..n)
                .map(|i| -> Result<_> {
                    let grid = rule == ScoringRuleId::Supremum || (rule != ScoringRuleId::Hyvarinen && i % 2 == 1);
                    if grid {
                        let shapes = [GridShape::Plateau, GridShape::Tent, GridShape::Smooth];
                        Ok((s.grid(shapes[i % 3])?, s.grids(2, &shapes)?))
                    } else {
                        let q = s.mixture()?;
                        let vmax = max_var(&q).expect("mixture");
                        let others = s.mixtures(2)?.iter().map(|o| temper(o, vmax)).collect::<Result<_>>()?;
                        Ok((q, others))
                    }
                })
                .collect::<Result<_>>()?;
            let cases: Vec<Vec<CaseRecord>> = bases
                .par_iter()
                .enumerate()
                .map(|(k, (q, others))| {
                    let mut cs = match prop22_directions(q, others) {
                        Ok(dirs) => certify_prop22(rule, q, &dirs, tol, scheme),
                        Err(e) => vec![CaseRecord::error("directions", q.digest(), tol.prop22, e)],
                    };
                    for c in &mut cs {
                        c.id = format!("q{k:03}/{}", c.id);
                    }
                    cs
                })
                .collect();
            let mut r = VerificationReport::new("prop22", Some(rule), seed, scheme);
            r.extend(cases.into_iter().flatten());
            r
        }
        Suite::Gateaux => {
            if rule != ScoringRuleId::Quadratic {
                return Err(invalid("suite", "the gateaux suite applies to the quadratic rule"));
            }
            let n = samples.min(10);
            let mut s = Sampler::new(seed);
            let shapes = [GridShape::Smooth, GridShape::Tent, GridShape::Plateau];
            let bases: Vec<Density> = (0..n)
                .map(|i| {
                    if i % 2 == 0 {
                        s.mixture()
                    } else {
                        s.grid(shapes[(i / 2) % 3])
                    }
                })
                .collect::<Result<_>>()?;
            let cases: Vec<Vec<CaseRecord>> = bases
                .par_iter()
                .enumerate()
                .map(|(k, q)| {
                    let mut cs = match gateaux_directions(q) {
                        Ok(dirs) => gateaux_check(q, &dirs, tol, scheme),
                        Err(e) => vec![CaseRecord::error("directions", q.digest(), tol.gateaux, e)],
                    };
                    for c in &mut cs {
                        c.id = format!("q{k:03}/{}", c.id);
                    }
                    cs
                })
                .collect();
            let mut r = VerificationReport::new("gateaux", Some(rule), seed, scheme);
            r.extend(cases.into_iter().flatten());
            r
        }
        Suite::All => {
            let mut all = VerificationReport::new("all", Some(rule), seed, scheme);
            let mut suites = vec![Suite::Propriety, Suite::Euler, Suite::Homogeneity, Suite::Prop22];
            if rule == ScoringRuleId::Quadratic {
                suites.push(Suite::Gateaux);
            }
            for s in suites {
                all.absorb(run_suite(s, rule, samples, seed, tol, scheme)?);
            }
            all
        }
    };
    report.seed = seed;
    Ok(report)
}
