//! Right, left and symmetric derivatives of the entropy against the score pairing.
//!
//! cargo run --example directional_derivatives

use cone_scoring::convexity::{
    analytic_directional_derivative, default_steps, right_directional_derivative, symmetric_derivative,
    two_sided_derivative,
};
use cone_scoring::{Density, Field, QuadratureScheme, ScoringRuleId};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let scheme = QuadratureScheme::default();
    let steps = default_steps();
    let q = Field::from(Density::gaussian(0.0, 1.0)?);
    let p = Field::from(Density::mixture(&[(-0.5, 0.5), (0.7, 0.6)], &[1.0, 1.0])?);

    for rule in [
        ScoringRuleId::Logarithmic,
        ScoringRuleId::Hyvarinen,
        ScoringRuleId::Quadratic,
    ] {
        let d = right_directional_derivative(&rule, &q, &p, &steps, &scheme)?;
        let a = analytic_directional_derivative(rule, &q, &p, &scheme)?;
        println!(
            "{:10} FD {:+.10}  p.S(q) {:+.10}  |diff| {:.1e}  converged {}  violations {}",
            rule.name(),
            d.value,
            a,
            (d.value - a).abs(),
            d.converged,
            d.monotonicity_violations
        );
    }

    let d = right_directional_derivative(&ScoringRuleId::Logarithmic, &q, &p, &steps, &scheme)?;
    println!("\nlog-rule difference quotients:");
    for (t, v) in d.trace.iter().take(6) {
        println!("  t = {t:.3e}  {v:+.12}");
    }

    // Two-sided where the direction stays inside the cone, one-sided otherwise.
    let r = Field::from(Density::gaussian(0.5, 0.5)?).sub(&q)?;
    let ts = two_sided_derivative(&ScoringRuleId::Logarithmic, &q, &r, &steps, &scheme)?;
    println!(
        "\nN(0.5,0.5) - N(0,1): right {:+.9}  left {:+.9}",
        ts.right.value, ts.left.value
    );
    let shift = Field::from(Density::gaussian(1.0, 1.0)?).sub(&q)?;
    if let Err(e) = two_sided_derivative(&ScoringRuleId::Logarithmic, &q, &shift, &steps, &scheme) {
        println!("N(1,1) - N(0,1): {e}");
    }

    // The supremum entropy has a kink at the uniform.
    let u = Field::from(Density::uniform_grid(401)?);
    let tri = Field::from(Density::grid(
        0.0,
        1.0,
        (0..401).map(|i| 2.0 - 4.0 * (i as f64 / 400.0 - 0.5).abs()).collect(),
    )?);
    let ts = two_sided_derivative(&ScoringRuleId::Supremum, &u, &tri, &steps, &scheme)?;
    println!(
        "\nsup at the uniform along a triangle: right {}  left {}  two-sided {:?}",
        ts.right.value, ts.left.value, ts.value
    );

    let s = symmetric_derivative(&ScoringRuleId::Quadratic, &u, &u.scale(0.5), &steps, &scheme)?;
    println!("quadratic symmetric derivative along q/2: {:.12}", s.value);
    Ok(())
}
