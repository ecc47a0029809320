//! Pair functions with densities, weighted norms and surface terms.
//!
//! cargo run --example pairing

use cone_scoring::pairing::{boundary_term, pair, total_mass, weighted_norm, NormDomain};
use cone_scoring::{Density, QuadratureScheme};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let scheme = QuadratureScheme::default();
    let n0 = Density::gaussian(0.0, 1.0)?;
    let n1 = Density::gaussian(1.0, 1.0)?;

    println!("E[x^2] under N(0,1)      {:.12}", pair(|x| x[0] * x[0], &n0, &scheme)?);
    println!(
        "E[ln N(0,1)] under N(1,1) {:.12}",
        pair(|x| n0.value(x).unwrap().ln(), &n1, &scheme)?
    );
    println!(
        "mass of 3 x Cauchy        {:.9}",
        total_mass(&Density::power_law(2.0)?.scaled(3.0), &scheme)?
    );

    let box01 = NormDomain::Box {
        lo: 0.0,
        hi: 1.0,
        dim: 1,
    };
    println!(
        "\n|1|_2 on [0,1] with weight (1+|x|)^2   {:.12}",
        weighted_norm(|_| 1.0, 2.0, &box01, &scheme)?
    );
    let whole = NormDomain::Whole { dim: 1 };
    let g = |x: &[f64]| n0.value(x).unwrap();
    println!(
        "|N(0,1)|_2 on the line                  {:.12}",
        weighted_norm(g, 2.0, &whole, &scheme)?
    );
    match weighted_norm(|_| 1.0, 2.0, &whole, &scheme) {
        Ok(v) => println!("constant on the line: {v}"),
        Err(e) => println!("constant on the line: {e}"),
    }

    println!("\nsurface term of the Fisher identity");
    for r in [4.0, 6.0, 8.0, 10.0] {
        println!(
            "  R = {r:4}  p = q = N(0,1): {:10.3e}   p = N(1,1): {:10.3e}",
            boundary_term(&n0, &n0, r)?,
            boundary_term(&n1, &n0, r)?
        );
    }

    let refined = scheme.refined();
    let q = Density::mixture(&[(-1.0, 0.5), (1.5, 2.0)], &[0.3, 0.9])?;
    let f = |x: &[f64]| x[0].sin() + x[0] * x[0];
    println!(
        "\nrefinement: {:.14} vs {:.14}",
        pair(f, &q, &scheme)?,
        pair(f, &q, &refined)?
    );
    Ok(())
}
