//! Entropies, scores, expected scores and divergences for the four rules.
//!
//! cargo run --example rules_and_scores

use cone_scoring::rules::{
    divergence, entropy, expected_score, hyvarinen_divergence_direct, mode_set, sup_subgradient, ScoreFunction,
};
use cone_scoring::{Density, QuadratureScheme, ScoringRuleId};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let scheme = QuadratureScheme::default();
    let n0 = Density::gaussian(0.0, 1.0)?;
    let n1 = Density::gaussian(1.0, 1.0)?;

    for rule in [
        ScoringRuleId::Logarithmic,
        ScoringRuleId::Hyvarinen,
        ScoringRuleId::Quadratic,
    ] {
        let s = ScoreFunction::new(rule, &n0, &scheme)?;
        println!(
            "{:10} entropy {:+.9}  entropy(3q) {:+.9}  S(0) {:+.7}  S(1) {:+.7}  E_N(1,1) S {:+.9}  D {:.9}",
            rule.name(),
            entropy(rule, &n0, &scheme)?,
            entropy(rule, &n0.scaled(3.0), &scheme)?,
            s.at(&[0.0])?,
            s.at(&[1.0])?,
            expected_score(rule, &n1, &n0, &scheme)?,
            divergence(rule, &n1, &n0, &scheme)?,
        );
    }
    println!(
        "Fisher divergence by direct integral: {:.9}",
        hyvarinen_divergence_direct(&n1, &n0, &scheme)?
    );

    // The supremum rule lives on grids.
    let tri = Density::grid(
        0.0,
        1.0,
        (0..401).map(|i| 2.0 - 4.0 * (i as f64 / 400.0 - 0.5).abs()).collect(),
    )?;
    let plateau = Density::grid(0.0, 1.0, (0..401).map(|i| if i >= 200 { 2.0 } else { 1.0 }).collect())?;
    let sup = ScoringRuleId::Supremum;
    println!(
        "\nsup entropy: triangle {:.6}  plateau {:.6}",
        entropy(sup, &tri, &scheme)?,
        entropy(sup, &plateau, &scheme)?
    );
    let m = mode_set(&plateau, 1e-12)?;
    println!("plateau modes: {} nodes, measure {:.4}", m.mode_nodes.len(), m.measure);
    let g = sup_subgradient(&plateau, 1e-12)?;
    println!("subgradient height {:.4}", g.height);
    let m = mode_set(&tri, 1e-12)?;
    println!(
        "triangle modes: nodes {:?}, measure {} (null: {})",
        m.mode_nodes,
        m.measure,
        m.is_null()
    );
    match sup_subgradient(&tri, 1e-12) {
        Ok(g) => println!("triangle subgradient height {}", g.height),
        Err(e) => println!("triangle: {e}"),
    }
    Ok(())
}
