//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any failure.

mod common;

use std::process::Command;
use std::time::{Duration, Instant};

use common::*;
use cone_scoring::boundary_lab::{
    binary_shannon, boundary_blowup_trace, decimal_path, demo_grids, nowhere_dense_witness, sup_dichotomy_demo,
    DyadicSequence, SupRegime,
};
use cone_scoring::convexity::{run_suite, CaseRecord, Sampler, Suite, Tolerances, VerificationReport};
use cone_scoring::densities::Density;
use cone_scoring::pairing::{boundary_term, QuadratureScheme};
use cone_scoring::rules::{divergence, entropy, hyvarinen_divergence_direct, ScoringRuleId};
use ScoringRuleId::*;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn near(got: f64, want: f64, tol: f64, what: &str) -> Result<(), String> {
    ensure((got - want).abs() <= tol, || {
        format!("{what}: got {got:.12e}, want {want:.12e} ± {tol:e}")
    })
}

fn suite(s: Suite, rule: ScoringRuleId, samples: usize) -> Result<VerificationReport, String> {
    run_suite(
        s,
        rule,
        samples,
        42,
        &Tolerances::default(),
        &QuadratureScheme::default(),
    )
    .map_err(|e| format!("{rule} {s}: {e}"))
}

fn with_suffix<'a>(r: &'a VerificationReport, suffix: &str) -> Vec<&'a CaseRecord> {
    r.cases.iter().filter(|c| c.id.ends_with(suffix)).collect()
}

/// All cases pass, there are `count` of them and none is looser than `tol`.
fn cases_hold(rule: ScoringRuleId, cases: &[&CaseRecord], count: usize, tol: f64) -> Result<(), String> {
    ensure(cases.len() == count, || {
        format!("{rule}: {} cases, expected {count}", cases.len())
    })?;
    if let Some(c) = cases.iter().find(|c| !c.pass || c.tol > tol) {
        return Err(format!("{rule} {}: residual {:e}, tol {:e}", c.id, c.residual, c.tol));
    }
    Ok(())
}

fn euler() -> Outcome {
    let start = Instant::now();
    let mut n = 0;
    for rule in ScoringRuleId::ALL {
        let r = suite(Suite::Euler, rule, 50)?;
        let mixtures = if rule == Supremum { 0 } else { 50 };
        let grids = if rule == Hyvarinen { 0 } else { 20 };
        cases_hold(rule, &with_suffix(&r, "/mixture"), mixtures, 1e-8)?;
        cases_hold(rule, &with_suffix(&r, "/grid"), grids, 1e-8)?;
        n += r.cases.len();
    }
    let t = start.elapsed();
    ensure(t < Duration::from_secs(30), || format!("took {t:?}"))?;
    Ok(format!("{n} Euler identities within 1e-8 in {t:.1?}"))
}

fn propriety() -> Outcome {
    let start = Instant::now();
    let mut strict = 0;
    for rule in ScoringRuleId::ALL {
        let r = suite(Suite::Propriety, rule, 200)?;
        cases_hold(rule, &with_suffix(&r, "/propriety"), 200, 1e-8)?;
        cases_hold(rule, &with_suffix(&r, "/equality"), 200, 1e-8)?;
        let s = with_suffix(&r, "/strict");
        if let Some(c) = s.iter().find(|c| !c.pass) {
            return Err(format!("{rule} {}: {}", c.id, c.note.as_deref().unwrap_or("")));
        }
        strict += s.len();
    }
    let t = start.elapsed();
    ensure(t < Duration::from_secs(120), || format!("took {t:?}"))?;
    Ok(format!(
        "800 pairs, divergence >= -1e-8, {strict} separated pairs >= 1e-6, in {t:.1?}"
    ))
}

fn certificate() -> Outcome {
    for rule in [Logarithmic, Hyvarinen, Quadratic] {
        let r = suite(Suite::Propriety, rule, 100)?;
        cases_hold(rule, &with_suffix(&r, "/certificate"), 100, 1e-4)?;
    }
    Ok("|FD - p·S(q)| <= 1e-4 on 100 pairs for log, hyvarinen, quadratic".into())
}

fn closed_forms() -> Outcome {
    let scheme = QuadratureScheme::default();
    let g = |m: f64, v: f64| Density::gaussian(m, v).unwrap();
    let e = |e: cone_scoring::Error| e.to_string();

    let kl = simpson_line(|x| {
        let p = npdf(x, 0.0, 1.0);
        p * (-x * x / 2.0 + (x - 1.0) * (x - 1.0) / 2.0)
    });
    near(kl, kl_gauss(0.0, 1.0, 1.0, 1.0), 1e-9, "KL oracle")?;
    near(
        divergence(Logarithmic, &g(0.0, 1.0), &g(1.0, 1.0), &scheme).map_err(e)?,
        0.5,
        1e-6,
        "KL",
    )?;

    for dm in [0.5, 1.0, 2.0] {
        let oracle = simpson_line(|x| npdf(x, 0.0, 1.0) * dm * dm);
        near(
            oracle,
            fisher_divergence_gauss(0.0, 1.0, dm, 1.0),
            1e-9,
            "Fisher oracle",
        )?;
        near(
            divergence(Hyvarinen, &g(0.0, 1.0), &g(dm, 1.0), &scheme).map_err(e)?,
            dm * dm,
            1e-6,
            "Fisher",
        )?;
    }

    let quad = simpson_line(|x| (npdf(x, 0.0, 1.0) - npdf(x, 1.0, 1.0)).powi(2));
    near(
        quad,
        quadratic_divergence_gauss(0.0, 1.0, 1.0, 1.0),
        1e-9,
        "quadratic oracle",
    )?;
    near(
        divergence(Quadratic, &g(0.0, 1.0), &g(1.0, 1.0), &scheme).map_err(e)?,
        0.124_798_0,
        1e-5,
        "quadratic",
    )?;

    let sh = simpson_line(|x| {
        let p = npdf(x, 0.0, 1.0);
        p * p.max(1e-300).ln()
    });
    near(sh, shannon_gauss(1.0), 1e-9, "Shannon oracle")?;
    near(
        entropy(Logarithmic, &g(0.0, 1.0), &scheme).map_err(e)?,
        -1.418_938_5,
        1e-7,
        "Shannon",
    )?;

    for v in [0.25, 1.0, 4.0] {
        let oracle = simpson(|x| npdf(x, 0.0, v) * (x / v).powi(2), -80.0, 80.0, 160_000);
        near(oracle, 1.0 / v, 1e-9, "Hyvarinen oracle")?;
        near(
            entropy(Hyvarinen, &g(0.0, v), &scheme).map_err(e)?,
            1.0 / v,
            1e-7,
            "Hyvarinen",
        )?;
    }
    Ok("KL, Fisher, quadratic, Shannon and Hyvarinen closed forms".into())
}

fn integration_by_parts() -> Outcome {
    let scheme = QuadratureScheme::default();
    let mut pairs = Vec::new();
    for i in 0..25 {
        let t = i as f64;
        let p = Density::gaussian(-1.0 + 0.08 * t, 0.6 + 0.05 * t).unwrap();
        let q = Density::gaussian(0.7 - 0.05 * t, 1.8 - 0.04 * t).unwrap();
        pairs.push((p, q));
    }
    let mut s = Sampler::new(42);
    let mix = s.mixtures(50).map_err(|e| e.to_string())?;
    pairs.extend(mix.chunks(2).map(|c| (c[0].clone(), c[1].clone())));

    let mut worst: f64 = 0.0;
    for (k, (p, q)) in pairs.iter().enumerate() {
        let direct = hyvarinen_divergence_direct(p, q, &scheme).map_err(|e| format!("pair {k}: {e}"))?;
        let via_rule = divergence(Hyvarinen, p, q, &scheme).map_err(|e| format!("pair {k}: {e}"))?;
        near(direct, via_rule, 1e-6, &format!("pair {k}"))?;
        worst = worst.max((direct - via_rule).abs());
    }

    let n0 = Density::gaussian(0.0, 1.0).unwrap();
    let n1 = Density::gaussian(1.0, 1.0).unwrap();
    let e = |e: cone_scoring::Error| e.to_string();
    for (p, r, bound) in [(&n0, 6.0, 1e-7), (&n1, 8.0, 1e-10), (&n0, 10.0, 1e-20)] {
        let t = boundary_term(p, &n0, r).map_err(e)?;
        ensure(t.abs() < bound, || format!("boundary term at R = {r}: {t:e}"))?;
    }
    Ok(format!(
        "{} pairs, worst |direct - rule| = {worst:.1e}; boundary terms vanish",
        pairs.len()
    ))
}

fn prop22() -> Outcome {
    let mut n = 0;
    for rule in ScoringRuleId::ALL {
        let r = suite(Suite::Prop22, rule, 50)?;
        if let Some(c) = r.failures().next() {
            return Err(format!("{rule} {}: residual {:e}, tol {:e}", c.id, c.residual, c.tol));
        }
        for (part, tol) in [
            ("/a/", 0.0),
            ("/c/", 1e-6),
            ("/d/bound", 1e-6),
            ("/d/equality", 1e-8),
            ("/e/", 1e-6),
        ] {
            let cases: Vec<_> = r.cases.iter().filter(|c| format!("/{}", c.id).contains(part)).collect();
            ensure(!cases.is_empty(), || format!("{rule}: no {part} cases"))?;
            ensure(cases.iter().all(|c| c.tol <= tol), || {
                format!("{rule}: {part} looser than {tol:e}")
            })?;
        }
        for lambda in ["lambda_0.5", "lambda_2", "lambda_7"] {
            ensure(r.cases.iter().any(|c| c.id.ends_with(lambda)), || {
                format!("{rule}: no {lambda}")
            })?;
        }
        n += r.cases.len();
    }
    Ok(format!("{n} directional-derivative properties across four rules"))
}

fn gateaux() -> Outcome {
    let r = suite(Suite::Gateaux, Quadratic, 10)?;
    cases_hold(Quadratic, &with_suffix(&r, "/gradient"), 200, 1e-5)?;
    let additive: Vec<_> = r.cases.iter().filter(|c| c.id.contains("/additive")).collect();
    cases_hold(Quadratic, &additive, 200, 1e-7)?;
    ensure(r.passed(), || format!("{:?}", r.failures().next()))?;
    Ok("10 interior q x 20 directions: gradient within 1e-5, additive within 1e-7".into())
}

fn boundary_demos() -> Outcome {
    let e = |e: cone_scoring::Error| e.to_string();
    let b = binary_shannon(1e-12, 1.0).map_err(e)?;
    ensure(b.partials.0 < -27.0, || format!("dx = {}", b.partials.0))?;
    let trace = boundary_blowup_trace(&decimal_path(12), 1.0, Some(-27.0)).map_err(e)?;
    ensure(trace.strictly_decreasing, || {
        "partial not strictly decreasing along the path".into()
    })?;

    let seq = DyadicSequence::geometric(1.0, 0.5, 200).map_err(e)?;
    let w = &nowhere_dense_witness(&seq, &[1.0]).map_err(e)?.witnesses[0];
    ensure(w.k == 2 && w.a_k == 0.25, || {
        format!("witness k = {}, a_k = {}", w.k, w.a_k)
    })?;

    let scheme = QuadratureScheme::default();
    for (name, q) in demo_grids(401).map_err(e)? {
        let rep = sup_dichotomy_demo(&q, &scheme).map_err(e)?;
        ensure(rep.pass && rep.probes.len() == 20, || format!("{name}: demo failed"))?;
        match name {
            "plateau" => {
                ensure(rep.regime == SupRegime::Integrable, || "plateau not integrable".into())?;
                near(rep.q_pairing.unwrap_or(f64::NAN), rep.max_q, 1e-12, "q·q*")?;
                if let Some(p) = rep.probes.iter().find(|p| p.pairing > p.max_p + 1e-12) {
                    return Err(format!("probe {}: p·q* = {} > max p = {}", p.name, p.pairing, p.max_p));
                }
            }
            "triangle" => ensure(rep.regime == SupRegime::Dirac, || "triangle not flagged Dirac".into())?,
            _ => {}
        }
    }
    Ok(format!(
        "dx(1e-12, 1) = {:.4}, witness k = 2, plateau integrable, triangle Dirac",
        b.partials.0
    ))
}

fn determinism() -> Outcome {
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_cone-scoring"))
            .args(["verify", "--suite", "all", "--seed", "42"])
            .output()
            .map_err(|e| e.to_string())
    };
    let (a, b) = (run()?, run()?);
    ensure(a.status.success(), || {
        format!("exit {:?}: {}", a.status.code(), String::from_utf8_lossy(&a.stderr))
    })?;
    ensure(!a.stdout.is_empty() && a.stdout == b.stdout, || "reports differ".into())?;
    Ok(format!("two runs, {} identical bytes", a.stdout.len()))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("Euler identity", euler),
        ("propriety", propriety),
        ("subgradient certificate", certificate),
        ("closed forms", closed_forms),
        ("integration by parts", integration_by_parts),
        ("directional derivative properties", prop22),
        ("Gateaux derivative", gateaux),
        ("boundary demos", boundary_demos),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let t = start.elapsed();
        match outcome {
            Ok(msg) => println!("PASS criterion {} ({name}): {msg} [{t:.1?}]", i + 1),
            Err(msg) => {
                failed += 1;
                println!("FAIL criterion {} ({name}): {msg} [{t:.1?}]", i + 1);
            }
        }
    }
    println!(
        "acceptance: {}/{} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
