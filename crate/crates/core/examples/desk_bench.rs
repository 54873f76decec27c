//! Error-versus-size benchmark, written as Bench CSV.
//!
//! Run with `cargo run --release --example desk_bench -- [max_n] [out.csv]`.
//! The full protocol uses 200; smaller values are quicker.

use chebyshev_lowrank::io::write_atomic;
use chebyshev_lowrank::synth::{aggregate, format_bench_csv, run_bench, BenchConfig};

fn main() -> chebyshev_lowrank::Result<()> {
    let max_n: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(80);
    let out = std::env::args().nth(2).unwrap_or_else(|| "bench.csv".into());

    let mut config = BenchConfig::desk_scale(0);
    config.sizes.retain(|&n| n <= max_n);
    let records = run_bench(&config)?;
    write_atomic(out.as_ref(), format_bench_csv(&records).as_bytes())?;

    println!("   n   r  mu_n      sigma_n   fit       secs/run");
    for s in aggregate(&records) {
        let n = s.n as f64;
        let fit = 0.995139 * n.ln().powf(0.604346) / n.powf(0.495001);
        println!("{:4} {:3}  {:.6}  {:.2e}  {:.6}  {:.3}", s.n, s.r, s.mu, s.sigma, fit, s.mean_wall_time);
    }
    println!("wrote {}", out);
    Ok(())
}
