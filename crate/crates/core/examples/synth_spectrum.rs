//! Random matrices with a prescribed spectrum.
//!
//! Run with `cargo run --example synth_spectrum`.

use chebyshev_lowrank::linalg::max_abs_norm;
use chebyshev_lowrank::synth::{synth_matrix, Spectrum, SpectrumSpec};

fn main() -> chebyshev_lowrank::Result<()> {
    let explicit = synth_matrix(3, 3, &SpectrumSpec::new(Spectrum::Explicit(vec![3.0, 2.0, 1.0]), 1))?;
    println!("sum of squares {:.12} (expect 14)", explicit.frobenius_norm_sq());

    for n in [10, 50, 100, 200] {
        let spec = SpectrumSpec::new(Spectrum::UniformInterval { lo: 1.0, hi: 2.0 }, n as u64);
        let a = synth_matrix(n, n, &spec)?;
        // Frobenius² = Σσ² ~ 2.33 n, so a typical entry is O(1/√n)
        println!(
            "n = {:3}  max|a_ij| = {:.4}  rms = {:.4}",
            n,
            max_abs_norm(&a)?,
            (a.frobenius_norm_sq() / (n * n) as f64).sqrt()
        );
    }
    Ok(())
}
