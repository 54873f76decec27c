//! Alternating minimization of `‖A - U V^T‖_C` over both factors, and a
//! necessary-condition check for local optimality of a factor pair.

use std::time::Instant;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::equidistant::{alternates, deleted_row_determinants, equidistant_by_signs};
use crate::error::{Error, Result};
use crate::linalg::{max_abs_norm, Matrix};
use crate::remez::{fixed_factor_solve, remez_solve, FixedFactorSolution, RemezOptions};
use crate::seed;

/// Extra draws allowed after a degenerate half-sweep, per initialization.
pub const MAX_REDRAWS: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Termination {
    Converged,
    MaxIters,
    Degenerate,
}

impl Termination {
    pub fn as_str(&self) -> &'static str {
        match self {
            Termination::Converged => "converged",
            Termination::MaxIters => "max_iters",
            Termination::Degenerate => "degenerate",
        }
    }
}

/// Which factor is drawn at random to start the iteration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum StartFactor {
    #[default]
    V,
    U,
}

#[derive(Clone, Debug)]
pub struct AlternatingOptions {
    pub inits: usize,
    pub seed: u64,
    pub max_outer: usize,
    pub rel_tol: f64,
    pub start: StartFactor,
    /// Start each row problem from the active set it ended with on the
    /// previous solve for the same factor.
    pub warm_start: bool,
    pub remez: RemezOptions,
}

impl Default for AlternatingOptions {
    fn default() -> Self {
        AlternatingOptions {
            inits: 5,
            seed: 0,
            max_outer: 200,
            rel_tol: 1e-8,
            start: StartFactor::V,
            warm_start: true,
            remez: RemezOptions::default(),
        }
    }
}

/// Summary of one initialization.
#[derive(Clone, Debug)]
pub struct InitRun {
    pub init_index: usize,
    pub init_seed: u64,
    /// Final error, NaN when the run failed outright.
    pub error: f64,
    pub outer_iters: usize,
    pub termination: Termination,
    pub redraws: usize,
    pub elapsed_seconds: f64,
    pub failure: Option<Error>,
}

#[derive(Clone, Debug)]
pub struct AlternatingResult {
    pub u: Matrix,
    pub v: Matrix,
    /// `‖A - U V^T‖_C` of the returned factors.
    pub error: f64,
    /// `ρ` after every half-sweep of the winning initialization.
    pub history: Vec<f64>,
    pub outer_iters: usize,
    pub termination: Termination,
    pub init_seed: u64,
    /// All initializations, in index order.
    pub per_init: Vec<InitRun>,
}

impl AlternatingResult {
    pub fn per_init_errors(&self) -> Vec<f64> {
        self.per_init.iter().map(|r| r.error).collect()
    }
}

struct Descent {
    u: Matrix,
    v: Matrix,
    history: Vec<f64>,
    outer_iters: usize,
    termination: Termination,
}

struct Stuck {
    partial: Option<Descent>,
    error: Error,
}

fn gaussian(rows: usize, cols: usize, rng: &mut impl Rng) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

fn warm_sets(sol: &FixedFactorSolution) -> Vec<Vec<usize>> {
    sol.per_row.iter().map(|o| o.active_set.clone()).collect()
}

fn descend(a: &Matrix, at: &Matrix, start: Matrix, opts: &AlternatingOptions) -> std::result::Result<Descent, Stuck> {
    let (mut u, mut v) = match opts.start {
        StartFactor::V => (None, Some(start)),
        StartFactor::U => (Some(start), None),
    };
    let mut solve_u = opts.start == StartFactor::V;
    let mut warm_u: Option<Vec<Vec<usize>>> = None;
    let mut warm_v: Option<Vec<Vec<usize>>> = None;
    let mut history: Vec<f64> = Vec::new();
    let mut outer = 0;

    let partial = |u: &Option<Matrix>, v: &Option<Matrix>, history: &[f64], outer: usize| match (u, v) {
        (Some(u), Some(v)) => Some(Descent {
            u: u.clone(),
            v: v.clone(),
            history: history.to_vec(),
            outer_iters: outer,
            termination: Termination::Degenerate,
        }),
        _ => None,
    };

    loop {
        if history.len() % 2 == 0 {
            if outer == opts.max_outer {
                break;
            }
            outer += 1;
        }
        let step = if solve_u {
            let warm = if opts.warm_start { warm_u.as_deref() } else { None };
            fixed_factor_solve(a, v.as_ref().unwrap(), &opts.remez, warm).map(|sol| {
                warm_u = Some(warm_sets(&sol));
                u = Some(sol.u);
                sol.mu
            })
        } else {
            let warm = if opts.warm_start { warm_v.as_deref() } else { None };
            fixed_factor_solve(at, u.as_ref().unwrap(), &opts.remez, warm).map(|sol| {
                warm_v = Some(warm_sets(&sol));
                v = Some(sol.u);
                sol.mu
            })
        };
        let rho = match step {
            Ok(rho) => rho,
            Err(error) => return Err(Stuck { partial: partial(&u, &v, &history, outer), error }),
        };
        let prev = history.last().copied();
        history.push(rho);
        solve_u = !solve_u;

        // ρ = 0 ends the run even before the other factor has been computed.
        if rho == 0.0 {
            let (u, v) = complete_pair(a, u, v);
            return Ok(Descent { u, v, history, outer_iters: outer, termination: Termination::Converged });
        }
        if let Some(prev) = prev {
            if (prev - rho) / prev.max(1e-300) < opts.rel_tol {
                return Ok(Descent {
                    u: u.unwrap(),
                    v: v.unwrap(),
                    history,
                    outer_iters: outer,
                    termination: Termination::Converged,
                });
            }
        }
    }
    Ok(Descent { u: u.unwrap(), v: v.unwrap(), history, outer_iters: outer, termination: Termination::MaxIters })
}

fn complete_pair(a: &Matrix, u: Option<Matrix>, v: Option<Matrix>) -> (Matrix, Matrix) {
    match (u, v) {
        (Some(u), Some(v)) => (u, v),
        (Some(u), None) => {
            let r = u.cols();
            (u, Matrix::zeros(a.cols(), r))
        }
        (None, Some(v)) => {
            let r = v.cols();
            (Matrix::zeros(a.rows(), r), v)
        }
        (None, None) => unreachable!("at least one factor exists after a half-sweep"),
    }
}

fn run_init(a: &Matrix, at: &Matrix, r: usize, opts: &AlternatingOptions, init_index: usize) -> (InitRun, Option<Descent>) {
    let t0 = Instant::now();
    let init_seed = seed::hash64(opts.seed, init_index as u64);
    let mut rng = seed::rng(init_seed);
    let start_rows = match opts.start {
        StartFactor::V => a.cols(),
        StartFactor::U => a.rows(),
    };
    let mut outcome = None;
    let mut failure = None;
    let mut redraws = 0;
    for attempt in 0..=MAX_REDRAWS {
        redraws = attempt;
        let start = gaussian(start_rows, r, &mut rng);
        match descend(a, at, start, opts) {
            Ok(d) => {
                outcome = Some(d);
                failure = None;
                break;
            }
            Err(stuck) => {
                log::debug!("init {} attempt {} degenerate: {}", init_index, attempt, stuck.error);
                outcome = stuck.partial;
                failure = Some(stuck.error);
            }
        }
    }
    let elapsed_seconds = t0.elapsed().as_secs_f64();
    let run = match &outcome {
        Some(d) => InitRun {
            init_index,
            init_seed,
            error: d.history.last().copied().unwrap_or(f64::NAN),
            outer_iters: d.outer_iters,
            termination: d.termination,
            redraws,
            elapsed_seconds,
            failure: failure.clone(),
        },
        None => InitRun {
            init_index,
            init_seed,
            error: f64::NAN,
            outer_iters: 0,
            termination: Termination::Degenerate,
            redraws,
            elapsed_seconds,
            failure,
        },
    };
    (run, outcome)
}

/// Best rank-`r` factorization found from `opts.inits` random starts.
///
/// Every start is driven by its own generator seeded with
/// `hash64(opts.seed, index)`, so the result does not depend on how the
/// starts are scheduled. Ties go to the lowest start index.
pub fn alternating_minimize(a: &Matrix, r: usize, opts: &AlternatingOptions) -> Result<AlternatingResult> {
    let (m, n) = a.shape();
    if r == 0 {
        return Err(Error::usage("rank must be at least 1"));
    }
    if m.min(n) < r + 1 {
        return Err(Error::usage(format!("rank {} needs min(m, n) >= {}, matrix is {}x{}", r, r + 1, m, n)));
    }
    if opts.max_outer == 0 {
        return Err(Error::usage("max_outer must be at least 1"));
    }
    if opts.inits == 0 {
        return Err(Error::usage("at least one initialization is required"));
    }
    let at = a.transpose();
    let runs: Vec<(InitRun, Option<Descent>)> =
        (0..opts.inits).into_par_iter().map(|k| run_init(a, &at, r, opts, k)).collect();

    let mut best: Option<usize> = None;
    for (k, (run, d)) in runs.iter().enumerate() {
        if d.is_none() || run.error.is_nan() {
            continue;
        }
        if best.map_or(true, |b| run.error < runs[b].0.error) {
            best = Some(k);
        }
    }
    let Some(b) = best else {
        return Err(runs
            .into_iter()
            .find_map(|(run, _)| run.failure)
            .unwrap_or_else(|| Error::degenerate("no initialization produced factors")));
    };

    let per_init: Vec<InitRun> = runs.iter().map(|(run, _)| run.clone()).collect();
    let (run, descent) = runs.into_iter().nth(b).unwrap();
    let d = descent.unwrap();
    let error = max_abs_norm(&a.sub(&d.u.matmul_transpose(&d.v)?)?)?;
    Ok(AlternatingResult {
        u: d.u,
        v: d.v,
        error,
        history: d.history,
        outer_iters: d.outer_iters,
        termination: d.termination,
        init_seed: run.init_seed,
        per_init,
    })
}

/// Relative tolerance for an entry to count as attaining the max residual.
pub const MAXIMIZER_TOLERANCE: f64 = 1e-9;

/// Relative margin by which a line's own optimum must undercut the global
/// max residual before the line counts as improvable.
pub const IMPROVEMENT_TOLERANCE: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LineStatus {
    Pass,
    Fail,
    Indeterminate,
}

/// Check of one row (or column) that contains a global maximizer.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LineCheck {
    pub index: usize,
    pub maximizers: usize,
    /// Positions within the line that attain the global maximum.
    pub positions: Vec<usize>,
    pub alternance: bool,
    /// Best attainable max residual of the line with its factor fixed;
    /// computed only when the maximizer count is not `r+1`.
    pub line_optimum: Option<f64>,
    pub status: LineStatus,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OptimalityReport {
    pub error: f64,
    pub rank: usize,
    pub per_row: Vec<LineCheck>,
    pub per_col: Vec<LineCheck>,
    pub locally_optimal_hint: bool,
}

/// `line` holds the data entries, `residual` the residual of the same line,
/// `factor` the fixed factor whose rows pair with the line's positions.
fn check_line(index: usize, line: &[f64], residual: &[f64], factor: &Matrix, positions: Vec<usize>, g: f64) -> LineCheck {
    let r = factor.cols();
    let maximizers = positions.len();
    let mut check =
        LineCheck { index, maximizers, positions, alternance: false, line_optimum: None, status: LineStatus::Indeterminate };
    if maximizers != r + 1 {
        // The count alone decides nothing; a line that can still be
        // lowered with its factor fixed is not at a local minimum.
        if let Ok(best) = remez_solve(factor, line, &RemezOptions::default()) {
            check.line_optimum = Some(best.mu);
            if best.mu < g * (1.0 - IMPROVEMENT_TOLERANCE) {
                check.status = LineStatus::Fail;
            }
        }
        return check;
    }
    let block = factor.select_rows(&check.positions);
    let w: Vec<f64> = check.positions.iter().map(|&p| residual[p]).collect();
    let Ok(d) = deleted_row_determinants(&block) else {
        return check;
    };
    check.alternance = alternates(&w, &d);
    let sub: Vec<f64> = check.positions.iter().map(|&p| line[p]).collect();
    match equidistant_by_signs(&block, &sub) {
        Ok(eq) => {
            let signs_match = w.iter().zip(&eq.signs).all(|(x, s)| (*x < 0.0) == (*s < 0));
            let level_match = (eq.rho - g).abs() <= 1e-8 * (1.0 + g);
            check.status = if check.alternance && signs_match && level_match {
                LineStatus::Pass
            } else {
                LineStatus::Fail
            };
        }
        // not a Chebyshev block: the alternance test alone is not conclusive
        Err(_) => {}
    }
    check
}

/// Necessary-condition check for a local minimum of `‖A - U V^T‖_C`.
///
/// Every row and every column holding an entry of maximal residual must
/// attain that maximum at `r+1` positions with `w_j D_j` alternating in
/// sign, `D_j` being the deleted-row determinants of the paired factor
/// rows. Any other maximizer count is indeterminate unless re-solving the
/// line against its fixed factor lowers it below the global maximum.
pub fn verify_local_optimality(a: &Matrix, u: &Matrix, v: &Matrix) -> Result<OptimalityReport> {
    let (m, n) = a.shape();
    if u.rows() != m || v.rows() != n || u.cols() != v.cols() {
        return Err(Error::usage(format!(
            "factor shapes {}x{} and {}x{} do not match a {}x{} matrix",
            u.rows(),
            u.cols(),
            v.rows(),
            v.cols(),
            m,
            n
        )));
    }
    let r = u.cols();
    let resid = a.sub(&u.matmul_transpose(v)?)?;
    let g = max_abs_norm(&resid)?;
    let scale = max_abs_norm(a)?;
    if g == 0.0 || g <= 1e-12 * scale {
        return Ok(OptimalityReport { error: g, rank: r, per_row: vec![], per_col: vec![], locally_optimal_hint: true });
    }
    let thresh = g * (1.0 - MAXIMIZER_TOLERANCE);
    let is_max = |x: f64| x.abs() >= thresh;

    let mut per_row = Vec::new();
    for i in 0..m {
        let positions: Vec<usize> = (0..n).filter(|&j| is_max(resid[(i, j)])).collect();
        if !positions.is_empty() {
            per_row.push(check_line(i, a.row(i), resid.row(i), v, positions, g));
        }
    }
    let at = a.transpose();
    let rt = resid.transpose();
    let mut per_col = Vec::new();
    for j in 0..n {
        let positions: Vec<usize> = (0..m).filter(|&i| is_max(rt[(j, i)])).collect();
        if !positions.is_empty() {
            per_col.push(check_line(j, at.row(j), rt.row(j), u, positions, g));
        }
    }
    let locally_optimal_hint =
        per_row.iter().chain(&per_col).all(|c| c.status != LineStatus::Fail);
    Ok(OptimalityReport { error: g, rank: r, per_row, per_col, locally_optimal_hint })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_matrix() {
        let a = Matrix::zeros(5, 4);
        let res = alternating_minimize(&a, 2, &AlternatingOptions { inits: 2, ..Default::default() }).unwrap();
        assert_eq!(res.error, 0.0);
        assert_eq!(res.history, vec![0.0]);
        assert!(res.u.as_slice().iter().all(|&x| x == 0.0));
        assert_eq!(res.termination, Termination::Converged);
    }

    #[test]
    fn rank_preconditions() {
        let a = Matrix::identity(3);
        let opts = AlternatingOptions::default();
        assert!(matches!(alternating_minimize(&a, 0, &opts), Err(Error::Usage(_))));
        assert!(matches!(alternating_minimize(&a, 3, &opts), Err(Error::Usage(_))));
        let none = AlternatingOptions { inits: 0, ..Default::default() };
        assert!(matches!(alternating_minimize(&a, 1, &none), Err(Error::Usage(_))));
    }

    #[test]
    fn identity_rank_one() {
        let a = Matrix::identity(8);
        let res = alternating_minimize(&a, 1, &AlternatingOptions { inits: 5, ..Default::default() }).unwrap();
        assert!(res.error <= 0.5 + 1e-6, "error {}", res.error);
        assert_eq!(res.per_init.len(), 5);
    }

    #[test]
    fn exact_factors_pass_trivially() {
        let u = Matrix::from_rows(&[[1.0, 2.0], [0.5, -1.0], [3.0, 0.0], [1.0, 1.0]]).unwrap();
        let v = Matrix::from_rows(&[[2.0, 1.0], [-1.0, 0.5], [0.0, 3.0]]).unwrap();
        let a = u.matmul_transpose(&v).unwrap();
        let rep = verify_local_optimality(&a, &u, &v).unwrap();
        assert!(rep.locally_optimal_hint);
        assert!(rep.per_row.is_empty() && rep.per_col.is_empty());
    }

    #[test]
    fn single_maximizer_fails() {
        let a = Matrix::from_rows(&[[1.0, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 0.0]]).unwrap();
        let u = Matrix::zeros(3, 1);
        let v = Matrix::column(&[1.0, 1.0, 1.0]);
        let rep = verify_local_optimality(&a, &u, &v).unwrap();
        assert!(!rep.locally_optimal_hint);
        assert_eq!(rep.per_row[0].maximizers, 1);
        assert_eq!(rep.per_row[0].status, LineStatus::Fail);
    }

    #[test]
    fn shape_mismatch() {
        let a = Matrix::zeros(3, 3);
        assert!(verify_local_optimality(&a, &Matrix::zeros(2, 1), &Matrix::zeros(3, 1)).is_err());
    }
}
