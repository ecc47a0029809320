//! Boundary behaviour: binary Shannon gradient blow-up, nowhere-dense
//! witnesses and the supremum mode dichotomy.
//!
//! cargo run --example boundary_demos

use cone_scoring::boundary_lab::{
    binary_shannon, boundary_blowup_trace, decimal_path, demo_grids, nowhere_dense_witness, sup_dichotomy_demo,
    DyadicSequence,
};
use cone_scoring::QuadratureScheme;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let b = binary_shannon(1.0, 1.0)?;
    println!(
        "binary Shannon at (1, 1): {:.12}, gradient ({:.6}, {:.6})",
        b.value, b.partials.0, b.partials.1
    );
    let t = boundary_blowup_trace(&decimal_path(12), 1.0, Some(-27.0))?;
    for (x, dx) in &t.points {
        println!("  x = {x:7.0e}  d/dx = {dx:+.6}");
    }
    println!(
        "strictly decreasing {}  crosses -27 at step {:?}",
        t.strictly_decreasing, t.crossed_at
    );

    let seq = DyadicSequence::geometric(1.0, 0.5, 200)?;
    let rep = nowhere_dense_witness(&seq, &[1.0, 0.1, 0.01])?;
    println!("\nalpha  k  a_k  b_k");
    for w in &rep.witnesses {
        println!("{} {} {:.3e} {:.3e}", w.alpha, w.k, w.a_k, w.b_k);
    }
    println!("sum b_k = {:.9} (tail <= {:?})", rep.b_partial_sum, rep.b_tail_bound);
    let short = DyadicSequence::geometric(1.0, 0.5, 5)?;
    if let Err(e) = nowhere_dense_witness(&short, &[0.01]) {
        println!("K = 5, alpha = 0.01: {e}");
    }

    let scheme = QuadratureScheme::default();
    for (name, q) in demo_grids(401)? {
        let rep = sup_dichotomy_demo(&q, &scheme)?;
        println!(
            "\n{name}: {:?} regime, max q {:.4}, mode measure {:.4}, q.q* {:?}, {} probes, pass {}",
            rep.regime,
            rep.max_q,
            rep.mode_measure,
            rep.q_pairing,
            rep.probes.len(),
            rep.pass
        );
        for c in rep.candidates.iter().take(3) {
            println!(
                "  candidate {} cells vs {}: p.q* {:.4} > derivative {:.4}: {}",
                c.cells, c.probe, c.p_pairing, c.derivative, c.violates
            );
        }
    }
    Ok(())
}
