//! Remez exchange on one vector, checked against subset enumeration.
//!
//! Run with `cargo run --example remez_row -- [n] [r] [seed]`.

use chebyshev_lowrank::oracle::combinatorial_mu;
use chebyshev_lowrank::remez::remez_certificate;
use chebyshev_lowrank::{remez_solve, seed, Matrix, RemezOptions};
use rand::Rng;
use rand_distr::StandardNormal;

fn main() -> chebyshev_lowrank::Result<()> {
    let args: Vec<usize> = std::env::args().skip(1).filter_map(|s| s.parse().ok()).collect();
    let n = args.first().copied().unwrap_or(10);
    let r = args.get(1).copied().unwrap_or(3);
    let mut rng = seed::rng(args.get(2).copied().unwrap_or(0) as u64);

    let v = Matrix::from_fn(n, r, |_, _| rng.sample(StandardNormal));
    let a: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();

    let out = remez_solve(&v, &a, &RemezOptions::default())?;
    for (t, step) in out.trace.iter().enumerate() {
        println!("step {:2}  set {:?}  E = {:.12}", t, step.active_set, step.deviation);
    }
    println!("mu = {:.15}  u = {:?}", out.mu, out.u);

    let cert = remez_certificate(&v, &a, &out.active_set, &out.u)?;
    println!("certificate holds: {} (balance {:.2e})", cert.holds, cert.balance);

    let (mu, set) = combinatorial_mu(&v, &a)?;
    println!("subset enumeration: mu = {:.15} on {:?}", mu, set);
    Ok(())
}
