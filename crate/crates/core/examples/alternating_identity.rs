//! Rank-r approximation of the identity by alternating minimization.
//!
//! Run with `cargo run --release --example alternating_identity -- [n]`.

use chebyshev_lowrank::{alternating_minimize, AlternatingOptions, Matrix};

fn main() -> chebyshev_lowrank::Result<()> {
    let n = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(16);
    let a = Matrix::identity(n);
    let opts = AlternatingOptions { inits: 5, seed: 0, ..Default::default() };
    println!(" r  error          outer  termination");
    for r in 1..=(n / 4).max(1) {
        let res = alternating_minimize(&a, r, &opts)?;
        println!("{:2}  {:.12} {:5}  {}", r, res.error, res.outer_iters, res.termination.as_str());
    }
    Ok(())
}
