//! The `cheblr` command line: generate, approximate, verify, benchmark.
//!
//! [`run`] parses arguments and returns the process exit code:
//! 0 ok, 1 I/O, 2 usage, 3 degenerate, 4 certificate failed.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::alternating::{
    alternating_minimize, verify_local_optimality, AlternatingOptions, LineStatus, OptimalityReport, IMPROVEMENT_TOLERANCE,
};
use crate::error::{Error, Result};
use crate::io::{format_f64, parse_csvm, read_csvm, write_atomic, write_csvm};
use crate::linalg::Matrix;
use crate::oracle::{binomial, combinatorial_mu, SUBSET_GUARD};
use crate::remez::{fixed_factor_solve, RemezOptions};
use crate::synth::{aggregate, format_bench_csv, run_bench, synth_matrix, BenchConfig, RankRule, Spectrum, SpectrumSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DEGENERATE: i32 = 3;
pub const EXIT_CERTIFICATE: i32 = 4;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser, Debug)]
#[command(name = "cheblr", version, about = "Chebyshev-norm low-rank approximation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Write a matrix Q1 Σ Q2^T with a prescribed singular spectrum.
    Gen(GenArgs),
    /// Alternating minimization for a rank-R approximation.
    Approx(ApproxArgs),
    /// Best U for a fixed factor V.
    Fixed(FixedArgs),
    /// Alternance check of a factorization.
    Check(CheckArgs),
    /// Error-versus-size benchmark on random matrices.
    Bench(BenchArgs),
}

#[derive(Args, Debug)]
pub struct GenArgs {
    #[arg(long)]
    pub m: usize,
    #[arg(long)]
    pub n: usize,
    /// uniform:LO,HI | explicit:FILE | identity
    #[arg(long, default_value = "uniform:1,2")]
    pub spectrum: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct ApproxArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub rank: usize,
    #[arg(long, default_value_t = 5)]
    pub inits: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 200)]
    pub max_outer: usize,
    /// Relative decrease below which the iteration stops.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long)]
    pub out_u: Option<PathBuf>,
    #[arg(long)]
    pub out_v: Option<PathBuf>,
    /// Report path; printed to standard output when omitted.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct FixedArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub factor: PathBuf,
    #[arg(long)]
    pub out_u: Option<PathBuf>,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub u: PathBuf,
    #[arg(long)]
    pub v: PathBuf,
    /// Cross-check flagged lines by subset enumeration.
    #[arg(long)]
    pub oracle: bool,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    /// LO:HI:STEP
    #[arg(long, default_value = "10:200:10")]
    pub sizes: String,
    /// sqrt or a fixed rank
    #[arg(long, default_value = "sqrt")]
    pub rank: String,
    #[arg(long, default_value_t = 3)]
    pub matrices: usize,
    #[arg(long, default_value_t = 5)]
    pub inits: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 200)]
    pub max_outer: usize,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    /// Worker threads; 0 uses the rayon default.
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
    /// Write wall_time as 0 so reruns are byte-identical.
    #[arg(long)]
    pub no_timing: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunReport {
    pub error: f64,
    pub rank: usize,
    pub outer_iters: usize,
    pub per_init_errors: Vec<f64>,
    pub termination: String,
    pub elapsed_seconds: f64,
    pub tool_version: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FixedReport {
    pub error: f64,
    pub rank: usize,
    pub rows: usize,
    pub exchange_iterations: usize,
    pub elapsed_seconds: f64,
    pub tool_version: String,
}

/// Subset-enumeration verdict on one flagged line.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleLine {
    /// `"row"` or `"col"`.
    pub kind: &'static str,
    pub index: usize,
    pub residual: f64,
    pub mu: f64,
    pub optimal: bool,
}

#[derive(Serialize)]
struct CheckOutput<'a> {
    #[serde(flatten)]
    report: &'a OptimalityReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle: Option<Vec<OracleLine>>,
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Usage(_) => EXIT_USAGE,
        Error::Io(_) | Error::Parse { .. } => EXIT_IO,
        Error::DegenerateSystem(_) | Error::DegenerateRow { .. } | Error::NonTermination(_) => EXIT_DEGENERATE,
    }
}

/// Parses `args` (program name first) and runs the command, writing
/// normal output to `out` and diagnostics to standard error.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let rendered = e.render().to_string();
            if code == EXIT_OK {
                let _ = write!(out, "{}", rendered);
            } else {
                eprint!("{}", rendered);
            }
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("cheblr: {}", e);
            exit_code(&e)
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Gen(a) => cmd_gen(&a).map(|_| EXIT_OK),
        Command::Approx(a) => cmd_approx(&a, out).map(|_| EXIT_OK),
        Command::Fixed(a) => cmd_fixed(&a, out).map(|_| EXIT_OK),
        Command::Check(a) => cmd_check(&a, out),
        Command::Bench(a) => cmd_bench(&a, out).map(|_| EXIT_OK),
    }
}

pub fn parse_spectrum(text: &str) -> Result<Spectrum> {
    let (kind, rest) = text.split_once(':').unwrap_or((text, ""));
    match kind {
        "identity" if rest.is_empty() => Ok(Spectrum::Identity),
        "uniform" => {
            let (lo, hi) = rest
                .split_once(',')
                .ok_or_else(|| Error::usage(format!("expected uniform:LO,HI, got {:?}", text)))?;
            let lo: f64 = lo.trim().parse().map_err(|_| Error::usage(format!("bad lower bound {:?}", lo)))?;
            let hi: f64 = hi.trim().parse().map_err(|_| Error::usage(format!("bad upper bound {:?}", hi)))?;
            if !(lo.is_finite() && hi.is_finite()) || lo > hi {
                return Err(Error::usage(format!("interval [{}, {}] is empty or not finite", lo, hi)));
            }
            Ok(Spectrum::UniformInterval { lo, hi })
        }
        "explicit" if !rest.is_empty() => {
            let text = std::fs::read_to_string(rest).map_err(|e| Error::Io(format!("{}: {}", rest, e)))?;
            Ok(Spectrum::Explicit(parse_csvm(&text)?.into_vec()))
        }
        _ => Err(Error::usage(format!("unknown spectrum {:?}; use uniform:LO,HI, explicit:FILE or identity", text))),
    }
}

/// `LO:HI:STEP`, inclusive of `HI` when it lies on the grid.
pub fn parse_sizes(text: &str) -> Result<Vec<usize>> {
    let parts: Vec<&str> = text.split(':').collect();
    let bad = || Error::usage(format!("expected LO:HI:STEP, got {:?}", text));
    if parts.len() != 3 {
        return Err(bad());
    }
    let nums: Vec<usize> = parts.iter().map(|p| p.trim().parse().map_err(|_| bad())).collect::<Result<_>>()?;
    let (lo, hi, step) = (nums[0], nums[1], nums[2]);
    if step == 0 || lo > hi {
        return Err(Error::usage(format!("size range {} needs LO <= HI and STEP > 0", text)));
    }
    Ok((lo..=hi).step_by(step).collect())
}

pub fn parse_rank_rule(text: &str) -> Result<RankRule> {
    if text == "sqrt" {
        return Ok(RankRule::SqrtN);
    }
    match text.parse::<usize>() {
        Ok(r) if r >= 1 => Ok(RankRule::Fixed(r)),
        _ => Err(Error::usage(format!("rank must be 'sqrt' or a positive integer, got {:?}", text))),
    }
}

fn write_json<T: Serialize>(path: Option<&Path>, value: &T, out: &mut dyn Write) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.to_string()))?;
    text.push('\n');
    match path {
        Some(p) => write_atomic(p, text.as_bytes()),
        None => out.write_all(text.as_bytes()).map_err(Error::from),
    }
}

pub fn cmd_gen(args: &GenArgs) -> Result<()> {
    if args.m == 0 || args.n == 0 {
        return Err(Error::usage("matrix dimensions must be positive"));
    }
    let spec = SpectrumSpec::new(parse_spectrum(&args.spectrum)?, args.seed);
    let a = synth_matrix(args.m, args.n, &spec)?;
    write_csvm(&args.out, &a)
}

pub fn cmd_approx(args: &ApproxArgs, out: &mut dyn Write) -> Result<RunReport> {
    if !(args.tol.is_finite() && args.tol >= 0.0) {
        return Err(Error::usage("--tol must be a nonnegative number"));
    }
    let a = read_csvm(&args.input)?;
    let t0 = Instant::now();
    let opts = AlternatingOptions {
        inits: args.inits,
        seed: args.seed,
        max_outer: args.max_outer,
        rel_tol: args.tol,
        ..Default::default()
    };
    let res = alternating_minimize(&a, args.rank, &opts)?;
    let per_init_errors = res.per_init_errors();
    let error = per_init_errors.iter().copied().filter(|x| !x.is_nan()).fold(f64::INFINITY, f64::min);
    let report = RunReport {
        error,
        rank: args.rank,
        outer_iters: res.outer_iters,
        per_init_errors,
        termination: res.termination.as_str().to_string(),
        elapsed_seconds: t0.elapsed().as_secs_f64(),
        tool_version: TOOL_VERSION.to_string(),
    };
    if let Some(p) = &args.out_u {
        write_csvm(p, &res.u)?;
    }
    if let Some(p) = &args.out_v {
        write_csvm(p, &res.v)?;
    }
    write_json(args.report.as_deref(), &report, out)?;
    Ok(report)
}

pub fn cmd_fixed(args: &FixedArgs, out: &mut dyn Write) -> Result<FixedReport> {
    let a = read_csvm(&args.input)?;
    let v = read_csvm(&args.factor)?;
    let t0 = Instant::now();
    let sol = fixed_factor_solve(&a, &v, &RemezOptions::default(), None)?;
    let report = FixedReport {
        error: sol.mu,
        rank: v.cols(),
        rows: a.rows(),
        exchange_iterations: sol.per_row.iter().map(|o| o.iterations).sum(),
        elapsed_seconds: t0.elapsed().as_secs_f64(),
        tool_version: TOOL_VERSION.to_string(),
    };
    if let Some(p) = &args.out_u {
        write_csvm(p, &sol.u)?;
    }
    write_json(args.report.as_deref(), &report, out)?;
    Ok(report)
}

fn oracle_lines(a: &Matrix, u: &Matrix, v: &Matrix, report: &OptimalityReport) -> Result<Vec<OracleLine>> {
    let at = a.transpose();
    let mut lines = Vec::new();
    let groups = [("row", &report.per_row, a, v), ("col", &report.per_col, &at, u)];
    for (kind, checks, data, factor) in groups {
        for c in checks.iter().filter(|c| c.status != LineStatus::Pass) {
            let (mu, _) = combinatorial_mu(factor, data.row(c.index))?;
            let optimal = report.error <= mu / (1.0 - IMPROVEMENT_TOLERANCE);
            lines.push(OracleLine { kind, index: c.index, residual: report.error, mu, optimal });
        }
    }
    Ok(lines)
}

pub fn cmd_check(args: &CheckArgs, out: &mut dyn Write) -> Result<i32> {
    let a = read_csvm(&args.input)?;
    let u = read_csvm(&args.u)?;
    let v = read_csvm(&args.v)?;
    let report = verify_local_optimality(&a, &u, &v)?;
    let oracle = if args.oracle {
        let (m, n) = a.shape();
        let r = u.cols();
        if binomial(n, r + 1) > SUBSET_GUARD || binomial(m, r + 1) > SUBSET_GUARD {
            return Err(Error::usage(format!("--oracle: {}x{} with rank {} exceeds the subset guard", m, n, r)));
        }
        Some(oracle_lines(&a, &u, &v, &report)?)
    } else {
        None
    };
    let oracle_ok = oracle.as_ref().map_or(true, |lines| lines.iter().all(|l| l.optimal));
    write_json(None, &CheckOutput { report: &report, oracle }, out)?;
    Ok(if report.locally_optimal_hint && oracle_ok { EXIT_OK } else { EXIT_CERTIFICATE })
}

pub fn cmd_bench(args: &BenchArgs, out: &mut dyn Write) -> Result<()> {
    let config = BenchConfig {
        sizes: parse_sizes(&args.sizes)?,
        rank_rule: parse_rank_rule(&args.rank)?,
        matrices_per_size: args.matrices,
        inits: args.inits,
        seed: args.seed,
        solver: AlternatingOptions { max_outer: args.max_outer, rel_tol: args.tol, ..Default::default() },
    };
    let mut records = if args.threads > 0 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(args.threads)
            .build()
            .map_err(|e| Error::usage(format!("thread pool: {}", e)))?;
        pool.install(|| run_bench(&config))?
    } else {
        run_bench(&config)?
    };
    if args.no_timing {
        records.iter_mut().for_each(|r| r.wall_time = 0.0);
    }
    write_atomic(&args.out, format_bench_csv(&records).as_bytes())?;
    writeln!(out, "n,r,mu_n,sigma_n")?;
    for s in aggregate(&records) {
        writeln!(out, "{},{},{},{}", s.n, s.r, format_f64(s.mu), format_f64(s.sigma))?;
    }
    Ok(())
}
