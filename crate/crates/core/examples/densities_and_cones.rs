//! Build densities, check cone membership and probe feasible directions.
//!
//! cargo run --example densities_and_cones

use cone_scoring::densities::{cone_check, default_schedule, feasible_direction, Bump};
use cone_scoring::{make_density, ConeSpec, Density, DensityConfig, Field, QuadratureScheme};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let scheme = QuadratureScheme::default();

    let n = Density::gaussian(0.0, 1.0)?;
    let mix = make_density(&DensityConfig::from_json(
        r#"{"family":"mixture","components":[{"mean":[-1],"var":0.5},{"mean":[1.5],"var":2}],"weights":[1,2],"scale":3}"#,
    )?)?;
    let cauchy = Density::power_law(2.0)?;
    let grid = Density::grid(0.0, 1.0, (0..101).map(|i| 1.0 + (i as f64 / 100.0)).collect())?;
    for (name, q) in [
        ("N(0,1)", &n),
        ("3 x mixture", &mix),
        ("Cauchy", &cauchy),
        ("grid", &grid),
    ] {
        println!(
            "{name:12} mass {:.10}  q(0.5) = {:.6}  digest {}",
            q.mass(),
            q.value(&[0.5])?,
            &q.digest()[..12]
        );
    }

    let hyv = ConeSpec::HyvarinenGrowth {
        c1: 2.0,
        c2: 40.0,
        k: 2.0,
        probes: None,
    };
    let rep = cone_check(&n, &hyv, &scheme);
    println!(
        "\nN(0,1) in the Hyvarinen cone (C2 = 40): {}  margin {:?}",
        rep.member, rep.margin
    );
    let tight = ConeSpec::HyvarinenGrowth {
        c1: 2.0,
        c2: 10.0,
        k: 2.0,
        probes: None,
    };
    let rep = cone_check(&n, &tight, &scheme);
    println!("with C2 = 10: {} ({} violations)", rep.member, rep.violations.len());

    let pi = std::f64::consts::PI;
    let env = ConeSpec::ShannonEnvelope {
        c1: 1.0 / (2.0 * pi),
        c2: 2.0 / pi,
        a: 2.0,
        probes: None,
    };
    println!(
        "Cauchy in the Shannon envelope: {}",
        cone_check(&cauchy, &env, &scheme).member
    );
    let rep = cone_check(&n, &env, &scheme);
    if let Some(v) = rep.violations.first() {
        println!("N(0,1) leaves it at x = {:?} ({})", v.x, v.condition);
    }
    println!(
        "grid_positive: {}",
        cone_check(&grid, &ConeSpec::GridPositive, &scheme).member
    );

    // Segment towards another cone member.
    let wide = ConeSpec::HyvarinenGrowth {
        c1: 2.0,
        c2: 250.0,
        k: 2.0,
        probes: None,
    };
    let r = Field::from(Density::gaussian(1.0, 1.0)?).sub(&Field::from(&n))?;
    let probe = feasible_direction(&n, &r, &wide, &default_schedule(), &scheme);
    println!(
        "\nN(0,1) -> N(1,1): epsilon {}  two-sided {}",
        probe.epsilon, probe.two_sided
    );

    // A zero-mass bump perturbation of the uniform grid.
    let u = Density::uniform_grid(401)?;
    let bump = Field::from(Bump::new(0.3, 0.1))
        .sub(&Field::from(Bump::new(0.7, 0.1)))?
        .scale(0.2);
    let probe = feasible_direction(&u, &bump, &ConeSpec::GridPositive, &default_schedule(), &scheme);
    println!(
        "uniform +/- bump: epsilon {}  backward {}",
        probe.epsilon, probe.epsilon_backward
    );
    Ok(())
}
