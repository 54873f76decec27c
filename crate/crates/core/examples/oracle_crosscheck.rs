//! Exchange solver against subset enumeration and grid search.
//!
//! Run with `cargo run --release --example oracle_crosscheck -- [cases]`.

use chebyshev_lowrank::oracle::{combinatorial_mu, grid_min, is_chebyshev_system};
use chebyshev_lowrank::{remez_solve, seed, Matrix, RemezOptions};
use rand::Rng;
use rand_distr::StandardNormal;

fn main() -> chebyshev_lowrank::Result<()> {
    let cases: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(50);
    let mut worst: f64 = 0.0;
    for s in 0..cases {
        let mut rng = seed::rng(s);
        let n = rng.random_range(5..=12);
        let r = rng.random_range(1..=3);
        let v = Matrix::from_fn(n, r, |_, _| rng.sample(StandardNormal));
        let a: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();

        let fast = remez_solve(&v, &a, &RemezOptions::default())?.mu;
        let (slow, _) = combinatorial_mu(&v, &a)?;
        let rel = (fast - slow).abs() / slow.max(f64::MIN_POSITIVE);
        worst = worst.max(rel);
        if r <= 2 {
            let grid = grid_min(&v, &a, 10.0, 8)?;
            println!("seed {:3} n={:2} r={} remez {:.12} subsets {:.12} grid {:.12}", s, n, r, fast, slow, grid);
        } else {
            let (cheb, _) = is_chebyshev_system(&v)?;
            println!("seed {:3} n={:2} r={} remez {:.12} subsets {:.12} chebyshev {}", s, n, r, fast, slow, cheb);
        }
    }
    println!("worst relative difference {:.2e}", worst);
    Ok(())
}
