//! Test matrices with a prescribed singular spectrum, and the benchmark
//! protocol built on them: square matrices with singular values uniform on
//! `[1, 2]`, rank `round(√n)`, several matrices per size and several random
//! starts per matrix.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::alternating::{alternating_minimize, AlternatingOptions};
use crate::error::{Error, Result};
use crate::io::format_f64;
use crate::linalg::{qr_orthonormal, Matrix};
use crate::seed;

#[derive(Clone, Debug, PartialEq)]
pub enum Spectrum {
    UniformInterval { lo: f64, hi: f64 },
    Explicit(Vec<f64>),
    Identity,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumSpec {
    pub kind: Spectrum,
    pub seed: u64,
}

impl SpectrumSpec {
    pub fn new(kind: Spectrum, seed: u64) -> Self {
        SpectrumSpec { kind, seed }
    }

    pub fn validate(&self, count: usize) -> Result<()> {
        match &self.kind {
            Spectrum::UniformInterval { lo, hi } => {
                if !(lo.is_finite() && hi.is_finite()) || lo > hi {
                    return Err(Error::usage(format!("invalid interval [{}, {}]", lo, hi)));
                }
            }
            Spectrum::Explicit(values) => {
                if values.len() != count {
                    return Err(Error::usage(format!("expected {} singular values, got {}", count, values.len())));
                }
                if values.iter().any(|x| !x.is_finite() || *x < 0.0) {
                    return Err(Error::usage("singular values must be finite and nonnegative"));
                }
            }
            Spectrum::Identity => {}
        }
        Ok(())
    }

    fn values(&self, count: usize) -> Vec<f64> {
        match &self.kind {
            Spectrum::UniformInterval { lo, hi } => {
                let mut rng = seed::rng(seed::hash64(self.seed, 3));
                (0..count).map(|_| lo + (hi - lo) * rng.random::<f64>()).collect()
            }
            Spectrum::Explicit(values) => values.clone(),
            Spectrum::Identity => vec![1.0; count],
        }
    }
}

/// Orthogonal factor of the QR decomposition of a seeded Gaussian matrix.
pub fn random_orthogonal(n: usize, seed: u64) -> Result<Matrix> {
    if n == 0 {
        return Err(Error::usage("orthogonal matrix of size 0"));
    }
    let mut rng = seed::rng(seed);
    let g = Matrix::from_fn(n, n, |_, _| rng.sample(StandardNormal));
    qr_orthonormal(&g)
}

/// `Q1 Σ Q2^T` with independent orthogonal `Q1` (m×m), `Q2` (n×n).
pub fn synth_matrix(m: usize, n: usize, spec: &SpectrumSpec) -> Result<Matrix> {
    let k = m.min(n);
    spec.validate(k)?;
    let q1 = random_orthogonal(m, seed::hash64(spec.seed, 1))?;
    let q2 = random_orthogonal(n, seed::hash64(spec.seed, 2))?;
    let sigma = spec.values(k);
    let left = Matrix::from_fn(m, k, |i, j| q1[(i, j)] * sigma[j]);
    let right = Matrix::from_fn(n, k, |i, j| q2[(i, j)]);
    left.matmul_transpose(&right)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RankRule {
    SqrtN,
    Fixed(usize),
}

impl RankRule {
    pub fn rank_for(&self, n: usize) -> usize {
        match self {
            RankRule::SqrtN => (n as f64).sqrt().round() as usize,
            RankRule::Fixed(r) => *r,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRecord {
    pub n: usize,
    pub r: usize,
    pub matrix_seed: u64,
    pub init_seed: u64,
    /// NaN when the run failed.
    pub error: f64,
    pub wall_time: f64,
    pub outer_iters: usize,
}

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub sizes: Vec<usize>,
    pub rank_rule: RankRule,
    pub matrices_per_size: usize,
    pub inits: usize,
    pub seed: u64,
    /// Solver settings; `inits` and `seed` here are overridden per matrix.
    pub solver: AlternatingOptions,
}

impl BenchConfig {
    /// Sizes 10..=200 step 10, 3 matrices, 5 starts.
    pub fn desk_scale(seed: u64) -> Self {
        BenchConfig {
            sizes: (1..=20).map(|k| 10 * k).collect(),
            rank_rule: RankRule::SqrtN,
            matrices_per_size: 3,
            inits: 5,
            seed,
            solver: AlternatingOptions::default(),
        }
    }
}

pub fn matrix_seed(seed: u64, n: usize, matrix_index: usize) -> u64 {
    seed::hash64(seed::hash64(seed, n as u64), matrix_index as u64)
}

pub fn run_bench(config: &BenchConfig) -> Result<Vec<BenchRecord>> {
    if config.sizes.is_empty() || config.matrices_per_size == 0 || config.inits == 0 {
        return Err(Error::usage("benchmark needs sizes, matrices and inits"));
    }
    for &n in &config.sizes {
        let r = config.rank_rule.rank_for(n);
        if n < 10 {
            return Err(Error::usage(format!("benchmark sizes must be at least 10, got {}", n)));
        }
        if r == 0 || r + 1 > n {
            return Err(Error::usage(format!("rank {} infeasible for size {}", r, n)));
        }
    }
    let cells: Vec<(usize, usize)> = config
        .sizes
        .iter()
        .flat_map(|&n| (0..config.matrices_per_size).map(move |i| (n, i)))
        .collect();

    let per_cell: Vec<Result<Vec<BenchRecord>>> = cells
        .par_iter()
        .map(|&(n, i)| {
            let r = config.rank_rule.rank_for(n);
            let ms = matrix_seed(config.seed, n, i);
            let a = synth_matrix(n, n, &SpectrumSpec::new(Spectrum::UniformInterval { lo: 1.0, hi: 2.0 }, ms))?;
            let opts = AlternatingOptions { inits: config.inits, seed: ms, ..config.solver.clone() };
            let records = match alternating_minimize(&a, r, &opts) {
                Ok(res) => res
                    .per_init
                    .iter()
                    .map(|run| BenchRecord {
                        n,
                        r,
                        matrix_seed: ms,
                        init_seed: run.init_seed,
                        error: run.error,
                        wall_time: run.elapsed_seconds,
                        outer_iters: run.outer_iters,
                    })
                    .collect(),
                Err(e) if e.is_degenerate() || matches!(e, Error::NonTermination(_)) => {
                    log::warn!("size {} matrix {} failed: {}", n, i, e);
                    (0..config.inits)
                        .map(|k| BenchRecord {
                            n,
                            r,
                            matrix_seed: ms,
                            init_seed: seed::hash64(ms, k as u64),
                            error: f64::NAN,
                            wall_time: 0.0,
                            outer_iters: 0,
                        })
                        .collect()
                }
                Err(e) => return Err(e),
            };
            Ok(records)
        })
        .collect();

    let mut out = Vec::with_capacity(cells.len() * config.inits);
    for cell in per_cell {
        out.extend(cell?);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SizeSummary {
    pub n: usize,
    pub r: usize,
    /// Mean over matrices of the per-matrix mean error.
    pub mu: f64,
    /// Mean over matrices of the per-matrix population variance.
    pub sigma: f64,
    pub matrices: usize,
    pub mean_wall_time: f64,
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Per-size averages; failed (NaN) runs are left out and a size with no
/// finite run at all is dropped with a warning.
pub fn aggregate(records: &[BenchRecord]) -> Vec<SizeSummary> {
    let mut by_size: BTreeMap<usize, Vec<&BenchRecord>> = BTreeMap::new();
    for rec in records {
        by_size.entry(rec.n).or_default().push(rec);
    }
    let mut out = Vec::new();
    for (n, recs) in by_size {
        let mut order: Vec<u64> = Vec::new();
        let mut by_matrix: BTreeMap<u64, Vec<&BenchRecord>> = BTreeMap::new();
        for rec in &recs {
            if !by_matrix.contains_key(&rec.matrix_seed) {
                order.push(rec.matrix_seed);
            }
            by_matrix.entry(rec.matrix_seed).or_default().push(rec);
        }
        let mut means = Vec::new();
        let mut vars = Vec::new();
        let mut times = Vec::new();
        for ms in order {
            let errs: Vec<f64> = by_matrix[&ms].iter().map(|r| r.error).filter(|e| e.is_finite()).collect();
            if errs.is_empty() {
                continue;
            }
            let m = mean(&errs);
            means.push(m);
            vars.push(errs.iter().map(|e| (e - m) * (e - m)).sum::<f64>() / errs.len() as f64);
            times.extend(by_matrix[&ms].iter().filter(|r| r.error.is_finite()).map(|r| r.wall_time));
        }
        if means.is_empty() {
            log::warn!("size {}: no successful runs, excluded from aggregation", n);
            continue;
        }
        out.push(SizeSummary {
            n,
            r: recs[0].r,
            mu: mean(&means),
            sigma: mean(&vars),
            matrices: means.len(),
            mean_wall_time: mean(&times),
        });
    }
    out
}

pub const BENCH_CSV_HEADER: &str = "n,r,matrix_seed,init_seed,error,wall_time,outer_iters";

pub fn format_bench_csv(records: &[BenchRecord]) -> String {
    let mut out = String::new();
    out.push_str(BENCH_CSV_HEADER);
    out.push('\n');
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.n,
            r.r,
            r.matrix_seed,
            r.init_seed,
            format_f64(r.error),
            format_f64(r.wall_time),
            r.outer_iters
        )
        .unwrap();
    }
    out
}

pub fn parse_bench_csv(text: &str) -> Result<Vec<BenchRecord>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == BENCH_CSV_HEADER => {}
        _ => return Err(Error::Parse { line: 1, reason: "missing bench header".into() }),
    }
    let mut out = Vec::new();
    for (k, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let bad = |what: &str| Error::Parse { line: k + 2, reason: format!("bad {}", what) };
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 7 {
            return Err(bad("field count"));
        }
        let float = |s: &str, what: &str| -> Result<f64> {
            if s == "nan" {
                Ok(f64::NAN)
            } else {
                s.parse().map_err(|_| bad(what))
            }
        };
        out.push(BenchRecord {
            n: f[0].parse().map_err(|_| bad("n"))?,
            r: f[1].parse().map_err(|_| bad("r"))?,
            matrix_seed: f[2].parse().map_err(|_| bad("matrix_seed"))?,
            init_seed: f[3].parse().map_err(|_| bad("init_seed"))?,
            error: float(f[4], "error")?,
            wall_time: float(f[5], "wall_time")?,
            outer_iters: f[6].parse().map_err(|_| bad("outer_iters"))?,
        });
    }
    Ok(out)
}
