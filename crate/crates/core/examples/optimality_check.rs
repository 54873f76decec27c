//! Alternance check on a converged factorization and on a perturbed one.
//!
//! Run with `cargo run --release --example optimality_check`.

use chebyshev_lowrank::synth::{synth_matrix, Spectrum, SpectrumSpec};
use chebyshev_lowrank::{alternating_minimize, verify_local_optimality, AlternatingOptions};

fn main() -> chebyshev_lowrank::Result<()> {
    let a = synth_matrix(10, 10, &SpectrumSpec::new(Spectrum::UniformInterval { lo: 1.0, hi: 2.0 }, 4))?;
    let res = alternating_minimize(&a, 2, &AlternatingOptions::default())?;

    let report = verify_local_optimality(&a, &res.u, &res.v)?;
    println!("converged: error {:.10}, hint {}", report.error, report.locally_optimal_hint);
    for c in &report.per_row {
        println!("  row {:2}: {} maximizers at {:?}, {:?}", c.index, c.maximizers, c.positions, c.status);
    }
    for c in &report.per_col {
        println!("  col {:2}: {} maximizers at {:?}, {:?}", c.index, c.maximizers, c.positions, c.status);
    }

    let mut u = res.u.clone();
    u[(0, 0)] += 0.1;
    let bad = verify_local_optimality(&a, &u, &res.v)?;
    println!("perturbed: error {:.10}, hint {}", bad.error, bad.locally_optimal_hint);
    Ok(())
}
