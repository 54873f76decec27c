//! Remez exchange for `min_u ‖a - V u‖∞` and the row-separable fixed-factor
//! problem `min_U ‖A - U V^T‖_C`.
//!
//! The exchange keeps an active set of `r+1` rows, solves the equidistant
//! problem on it, and swaps in the row of largest residual until that row
//! is no worse than the active deviation. Each swap strictly increases the
//! active deviation, so no set is ever revisited. When the active set is
//! not a Chebyshev system the equidistant point can be far from optimal;
//! the result is then replaced by a linear-programming solve.

use rayon::prelude::*;

use crate::equidistant::{left_null_vector, solve_subsystem, EquidistantSolution};
use crate::error::{Error, Result};
use crate::linalg::{dot, lu_factor, vec_max_abs, Matrix, PIVOT_TOLERANCE};

/// How the `r+1` replacement candidates of an exchange step are scored.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ExchangeScoring {
    /// Solve every candidate subsystem from scratch, `O(r^4)` per step.
    Resolve,
    /// Score all candidates from a two-dimensional left null space of the
    /// `(r+2)×r` union block, `O(r^3)` per step. Falls back to `Resolve`
    /// when the union block is not a Chebyshev system.
    #[default]
    NullSpace,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RemezOptions {
    /// Starting active set; defaults to the rows of the `r+1` largest `|a_i|`.
    pub init_set: Option<Vec<usize>>,
    /// Iteration cap; defaults to `50·n`.
    pub max_iters: Option<usize>,
    /// Relative slack in the stopping test `|w(j)| ≤ E·(1 + tie_eps)`.
    pub tie_eps: f64,
    pub scoring: ExchangeScoring,
}

impl Default for RemezOptions {
    fn default() -> Self {
        RemezOptions { init_set: None, max_iters: None, tie_eps: 1e-10, scoring: ExchangeScoring::default() }
    }
}

/// One visited active set and the deviation of its equidistant point.
#[derive(Clone, Debug, PartialEq)]
pub struct ExchangeStep {
    pub active_set: Vec<usize>,
    pub deviation: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RemezOutcome {
    pub u: Vec<f64>,
    /// `‖a - V u‖∞` of the returned coefficients.
    pub mu: f64,
    /// Final active set, sorted.
    pub active_set: Vec<usize>,
    /// Number of active sets visited (`trace.len()`); one more than the
    /// number of exchanges performed.
    pub iterations: usize,
    pub trace: Vec<ExchangeStep>,
    /// The best replacement failed to raise the deviation in floating
    /// point, so the loop stopped on the current set.
    pub stalled: bool,
    /// `u` came from the linear-programming fallback rather than the
    /// equidistant point of the final set.
    pub polished: bool,
}

/// Indices of the `r+1` largest `|a_i|`, ties by lowest index, sorted.
pub fn default_init_set(a: &[f64], r: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..a.len()).collect();
    idx.sort_by(|&i, &j| a[j].abs().total_cmp(&a[i].abs()).then(i.cmp(&j)));
    idx.truncate(r + 1);
    idx.sort_unstable();
    idx
}

fn validate_init_set(set: &[usize], n: usize, r: usize) -> Result<Vec<usize>> {
    let mut s = set.to_vec();
    s.sort_unstable();
    s.dedup();
    if s.len() != r + 1 || s.iter().any(|&i| i >= n) {
        return Err(Error::usage(format!("initial set must hold {} distinct row indices below {}", r + 1, n)));
    }
    Ok(s)
}

fn solve_on(v: &Matrix, a: &[f64], set: &[usize]) -> Result<EquidistantSolution> {
    let sub_a: Vec<f64> = set.iter().map(|&i| a[i]).collect();
    solve_subsystem(&v.select_rows(set), &sub_a)
}

/// Picks `r` linearly independent rows greedily by decreasing `|a_i|`, then
/// the first further row that yields a solvable subsystem.
fn rank_revealing_init(v: &Matrix, a: &[f64]) -> Result<(Vec<usize>, EquidistantSolution)> {
    let (n, r) = v.shape();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j].abs().total_cmp(&a[i].abs()).then(i.cmp(&j)));

    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(r);
    let mut chosen = Vec::with_capacity(r + 1);
    for &i in &order {
        if chosen.len() == r {
            break;
        }
        let row = v.row(i);
        let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt();
        let mut q = row.to_vec();
        for b in &basis {
            let c = dot(&q, b);
            for (x, y) in q.iter_mut().zip(b) {
                *x -= c * y;
            }
        }
        let qn = q.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 && qn > 1e-10 * norm {
            q.iter_mut().for_each(|x| *x /= qn);
            basis.push(q);
            chosen.push(i);
        }
    }
    if chosen.len() < r {
        return Err(Error::degenerate("columns of V are linearly dependent"));
    }
    for &i in &order {
        if chosen.contains(&i) {
            continue;
        }
        let mut set = chosen.clone();
        set.push(i);
        set.sort_unstable();
        if let Ok(sol) = solve_on(v, a, &set) {
            return Ok((set, sol));
        }
    }
    Err(Error::degenerate("no solvable initial set"))
}

/// Deviations `|z·a| / ‖z‖₁` of every replacement candidate, computed from
/// the null vector `s` of the active block and one extra null vector `y` of
/// the union block. `None` if the union block is not a Chebyshev system.
fn score_by_null_space(
    v: &Matrix,
    a: &[f64],
    set: &[usize],
    s: &[f64],
    j: usize,
) -> Option<Vec<f64>> {
    let r = v.cols();
    // y: zero at some active position m, 1 at j, null for the union block.
    let mut y = None;
    for m in 0..=r {
        let rows: Vec<usize> = set.iter().enumerate().filter(|&(k, _)| k != m).map(|(_, &i)| i).collect();
        let f = lu_factor(&v.select_rows(&rows).transpose()).ok()?;
        if f.singular_flag {
            continue;
        }
        let rhs: Vec<f64> = v.row(j).iter().map(|x| -x).collect();
        let rest = f.solve(&rhs).ok()?;
        let mut full = Vec::with_capacity(r + 2);
        let mut it = rest.into_iter();
        for k in 0..=r {
            full.push(if k == m { 0.0 } else { it.next().unwrap() });
        }
        full.push(1.0);
        y = Some(full);
        break;
    }
    let y = y?;
    let a_union: Vec<f64> = set.iter().map(|&i| a[i]).chain(std::iter::once(a[j])).collect();

    let mut scores = Vec::with_capacity(r + 1);
    let mut z = vec![0.0; r + 2];
    for k in 0..=r {
        let c = y[k] / s[k];
        for p in 0..=r {
            z[p] = y[p] - c * s[p];
        }
        z[r + 1] = y[r + 1];
        z[k] = 0.0;
        let zmax = vec_max_abs(&z);
        if z.iter().enumerate().any(|(p, x)| p != k && x.abs() <= PIVOT_TOLERANCE * zmax) {
            return None;
        }
        let l1: f64 = z.iter().map(|x| x.abs()).sum();
        scores.push(dot(&z, &a_union).abs() / l1);
    }
    Some(scores)
}

fn replace(set: &[usize], k: usize, j: usize) -> Vec<usize> {
    let mut s: Vec<usize> = set.iter().enumerate().filter(|&(p, _)| p != k).map(|(_, &i)| i).collect();
    s.push(j);
    s.sort_unstable();
    s
}

/// First index of the maximum among the present scores.
fn first_argmax<T>(scores: &[Option<(f64, T)>]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (k, s) in scores.iter().enumerate() {
        if let Some((x, _)) = s {
            if best.map_or(true, |(_, b)| *x > b) {
                best = Some((k, *x));
            }
        }
    }
    best.map(|(k, _)| k)
}

pub fn remez_solve(v: &Matrix, a: &[f64], opts: &RemezOptions) -> Result<RemezOutcome> {
    let (n, r) = v.shape();
    if r == 0 {
        return Err(Error::usage("approximating system has no columns"));
    }
    if a.len() != n {
        return Err(Error::usage(format!("vector has length {}, matrix has {} rows", a.len(), n)));
    }
    if n < r + 1 {
        return Err(Error::usage(format!("need at least r+1 = {} rows, got {}", r + 1, n)));
    }
    let max_iters = opts.max_iters.unwrap_or(50 * n);
    let a_scale = vec_max_abs(a);

    let init = match &opts.init_set {
        Some(s) => validate_init_set(s, n, r)?,
        None => default_init_set(a, r),
    };
    let (mut set, mut sol) = match solve_on(v, a, &init) {
        Ok(sol) => (init, sol),
        Err(e) if e.is_degenerate() => rank_revealing_init(v, a)?,
        Err(e) => return Err(e),
    };

    let mut trace = Vec::new();
    let mut stalled = false;
    loop {
        trace.push(ExchangeStep { active_set: set.clone(), deviation: sol.rho });
        if trace.len() > max_iters {
            return Err(Error::NonTermination(max_iters));
        }

        let fitted = v.matvec(&sol.u);
        let mut j = 0;
        let mut wmax = -1.0;
        for (i, (f, ai)) in fitted.iter().zip(a).enumerate() {
            let w = (f - ai).abs();
            if w > wmax {
                wmax = w;
                j = i;
            }
        }
        let floor = 1e-13 * a_scale.max(vec_max_abs(&fitted));
        if set.contains(&j) || wmax <= sol.rho * (1.0 + opts.tie_eps) + floor {
            break;
        }

        let fast = match (opts.scoring, &sol.null_vector) {
            (ExchangeScoring::NullSpace, Some(s)) => score_by_null_space(v, a, &set, s, j),
            _ => None,
        };
        let next = match fast {
            Some(scores) => {
                let mut best = 0;
                for k in 1..scores.len() {
                    if scores[k] > scores[best] {
                        best = k;
                    }
                }
                let cand = replace(&set, best, j);
                let cand_sol = solve_on(v, a, &cand)?;
                Some((cand, cand_sol))
            }
            None => {
                let candidates: Vec<Option<(f64, (Vec<usize>, EquidistantSolution))>> = (0..=r)
                    .map(|k| {
                        let cand = replace(&set, k, j);
                        solve_on(v, a, &cand).ok().map(|s| (s.rho, (cand, s)))
                    })
                    .collect();
                first_argmax(&candidates).and_then(|l| candidates.into_iter().nth(l).flatten().map(|(_, c)| c))
            }
        };
        let Some((cand, cand_sol)) = next else {
            return Err(Error::degenerate("every replacement subsystem is degenerate"));
        };
        if cand_sol.rho <= sol.rho {
            stalled = true;
            break;
        }
        set = cand;
        sol = cand_sol;
    }

    let deviation = |u: &[f64]| (0..n).fold(0.0f64, |m, i| m.max((a[i] - dot(v.row(i), u)).abs()));
    let mut u = sol.u;
    let mut mu = deviation(&u);
    let mut polished = false;
    // On a set that is not a Chebyshev system the equidistant point is not
    // unique and the one found may miss the optimum by a wide margin.
    let slack = sol.rho * (1.0 + opts.tie_eps) + 1e-13 * a_scale.max(mu);
    if stalled || mu > slack {
        if let Ok(lp_u) = minimax_lp(v, a) {
            let lp_mu = deviation(&lp_u);
            if lp_mu < mu {
                u = lp_u;
                mu = lp_mu;
                polished = true;
            }
        }
    }
    Ok(RemezOutcome { u, mu, active_set: set, iterations: trace.len(), trace, stalled, polished })
}

/// `argmin_u ‖a - V u‖∞` as the linear program `min t` subject to
/// `-t ≤ a_i - (v^i, u) ≤ t`.
pub fn minimax_lp(v: &Matrix, a: &[f64]) -> Result<Vec<f64>> {
    use microlp::{ComparisonOp, OptimizationDirection, Problem};
    let (n, r) = v.shape();
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let vars: Vec<_> = (0..r).map(|_| lp.add_var(0.0, (f64::NEG_INFINITY, f64::INFINITY))).collect();
    let t = lp.add_var(1.0, (0.0, f64::INFINITY));
    for i in 0..n {
        let mut row: Vec<_> = vars.iter().zip(v.row(i)).map(|(&x, &c)| (x, c)).collect();
        row.push((t, -1.0));
        lp.add_constraint(row.as_slice(), ComparisonOp::Le, a[i]);
        row[r].1 = 1.0;
        lp.add_constraint(row.as_slice(), ComparisonOp::Ge, a[i]);
    }
    let sol = lp
        .solve()
        .map_err(|e| Error::degenerate(format!("linear program failed: {}", e)))?
        .into_solution()
        .map_err(|_| Error::degenerate("linear program was interrupted"))?;
    Ok(vars.iter().map(|&x| sol.var_value(x)).collect())
}

/// Outcome of the Remez optimality criterion on a final active set.
#[derive(Clone, Debug, PartialEq)]
pub struct RemezCertificate {
    /// `δ_k = |s_k|` from the left null vector of the active block.
    pub weights: Vec<f64>,
    /// Residual signs `sign(a_k - (v^k, u))` on the active set.
    pub signs: Vec<i8>,
    /// `‖Σ δ_k σ_k v^k‖∞`, zero when the criterion holds exactly.
    pub balance: f64,
    /// Every active row attains the max residual within the tolerance.
    pub active_rows_maximal: bool,
    pub holds: bool,
}

/// Checks that nonnegative multipliers on the active set annihilate the
/// columns of `V` when weighted by the residual signs.
pub fn remez_certificate(v: &Matrix, a: &[f64], active_set: &[usize], u: &[f64]) -> Result<RemezCertificate> {
    let r = v.cols();
    if active_set.len() != r + 1 {
        return Err(Error::usage("certificate needs an active set of r+1 rows"));
    }
    let block = v.select_rows(active_set);
    let mut s = left_null_vector(&block)?;
    let scale = vec_max_abs(&s);
    s.iter_mut().for_each(|x| *x /= scale);
    let weights: Vec<f64> = s.iter().map(|x| x.abs()).collect();

    let residual: Vec<f64> = (0..v.rows()).map(|i| a[i] - dot(v.row(i), u)).collect();
    let mu = vec_max_abs(&residual);
    let signs: Vec<i8> = active_set.iter().map(|&i| if residual[i] < 0.0 { -1 } else { 1 }).collect();

    let mut sum = vec![0.0; r];
    for (k, &i) in active_set.iter().enumerate() {
        let c = weights[k] * signs[k] as f64;
        for (acc, x) in sum.iter_mut().zip(v.row(i)) {
            *acc += c * x;
        }
    }
    let vscale = vec_max_abs(block.as_slice()).max(f64::MIN_POSITIVE);
    let balance = vec_max_abs(&sum);

    let tol = 1e-9 * (1.0 + mu);
    let active_rows_maximal = active_set.iter().all(|&i| (residual[i].abs() - mu).abs() <= tol);
    let positive = weights.iter().all(|&d| d > PIVOT_TOLERANCE);
    let holds = positive && active_rows_maximal && balance <= 1e-8 * vscale * (r as f64 + 1.0);
    Ok(RemezCertificate { weights, signs, balance, active_rows_maximal, holds })
}

#[derive(Clone, Debug, PartialEq)]
pub struct FixedFactorSolution {
    /// `m×r` coefficient factor, row `i` solving row `i` of `A`.
    pub u: Matrix,
    /// `‖A - U V^T‖_C`.
    pub mu: f64,
    pub per_row: Vec<RemezOutcome>,
}

/// Solves `min_U ‖A - U V^T‖_C` row by row.
///
/// `warm`, when given, supplies a starting active set per row (for example
/// the final sets of a previous solve); an entry of the wrong size is
/// ignored in favor of the default start.
pub fn fixed_factor_solve(
    a: &Matrix,
    v: &Matrix,
    opts: &RemezOptions,
    warm: Option<&[Vec<usize>]>,
) -> Result<FixedFactorSolution> {
    let (m, n) = a.shape();
    let (vn, r) = v.shape();
    if vn != n {
        return Err(Error::usage(format!("factor has {} rows but the matrix has {} columns", vn, n)));
    }
    if r == 0 || n < r + 1 {
        return Err(Error::usage(format!("need n >= r+1, got n = {}, r = {}", n, r)));
    }
    if let Some(w) = warm {
        if w.len() != m {
            return Err(Error::usage("warm start must supply one set per row"));
        }
    }

    let results: Vec<Result<RemezOutcome>> = (0..m)
        .into_par_iter()
        .map(|i| {
            let mut row_opts = opts.clone();
            if let Some(w) = warm {
                if w[i].len() == r + 1 {
                    row_opts.init_set = Some(w[i].clone());
                }
            }
            remez_solve(v, a.row(i), &row_opts)
        })
        .collect();

    let mut u = Matrix::zeros(m, r);
    let mut per_row = Vec::with_capacity(m);
    let mut mu: f64 = 0.0;
    for (i, res) in results.into_iter().enumerate() {
        let out = res.map_err(|e| match e {
            Error::DegenerateSystem(reason) => Error::DegenerateRow { row: i, reason },
            other => other,
        })?;
        u.row_mut(i).copy_from_slice(&out.u);
        mu = mu.max(out.mu);
        per_row.push(out);
    }
    Ok(FixedFactorSolution { u, mu, per_row })
}
