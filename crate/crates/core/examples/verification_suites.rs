//! Run the seeded verification suites and summarise their reports.
//!
//! cargo run --release --example verification_suites

use cone_scoring::convexity::{run_suite, Suite, Tolerances};
use cone_scoring::{QuadratureScheme, ScoringRuleId};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let scheme = QuadratureScheme::default();
    let tol = Tolerances::default();
    for rule in ScoringRuleId::ALL {
        for suite in [Suite::Propriety, Suite::Euler, Suite::Homogeneity, Suite::Prop22] {
            let r = run_suite(suite, rule, 20, 42, &tol, &scheme)?;
            let worst = r
                .cases
                .iter()
                .filter(|c| c.tol > 0.0)
                .map(|c| c.residual / c.tol)
                .fold(0.0, f64::max);
            println!(
                "{:10} {:12} {:4}/{:<4} worst residual/tol {:.2e}{}",
                rule.name(),
                suite.name(),
                r.summary.pass,
                r.summary.total,
                worst,
                r.strictness.as_deref().map(|s| format!("  ({s})")).unwrap_or_default()
            );
        }
    }
    let g = run_suite(Suite::Gateaux, ScoringRuleId::Quadratic, 10, 42, &tol, &scheme)?;
    println!("quadratic  gateaux      {:4}/{:<4}", g.summary.pass, g.summary.total);

    let r = run_suite(Suite::Propriety, ScoringRuleId::Supremum, 5, 42, &tol, &scheme)?;
    if let Some(c) = r.cases.iter().find(|c| c.note.is_some()) {
        println!("\n{}: {}", c.id, c.note.as_deref().unwrap_or(""));
    }
    Ok(())
}
