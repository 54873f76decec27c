//! Brute-force ground truth for the exchange solver.
//!
//! Nothing here tries to be fast. [`combinatorial_mu`] enumerates every
//! `(r+1)`-row subset and takes the largest best-equidistant deviation,
//! which equals the optimal `min_u ‖a - V u‖∞` when `V` has full column rank.

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::linalg::{determinant, dot, lu_factor, vec_max_abs, Matrix};

/// Largest subset count any enumeration here will accept.
pub const SUBSET_GUARD: u128 = 1_000_000;

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for i in 0..k {
        c = c.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    c
}

#[derive(Clone, Debug, PartialEq)]
pub struct SubsetScore {
    pub indices: Vec<usize>,
    /// `|det [V(J) a(J)]|`
    pub numerator: f64,
    /// `Σ_k |det V(J) without row k|`
    pub denominator: f64,
    pub value: Option<f64>,
}

pub fn subset_score(v: &Matrix, a: &[f64], indices: &[usize]) -> Result<SubsetScore> {
    let r = v.cols();
    if indices.len() != r + 1 {
        return Err(Error::usage(format!("subset must have {} rows", r + 1)));
    }
    let block = v.select_rows(indices);
    let augmented = Matrix::from_fn(r + 1, r + 1, |i, j| if j < r { block[(i, j)] } else { a[indices[i]] });
    let numerator = determinant(&augmented)?.abs();
    let mut denominator = 0.0;
    for k in 0..=r {
        denominator += determinant(&block.without_row(k))?.abs();
    }
    let value = (denominator > 0.0).then(|| numerator / denominator);
    Ok(SubsetScore { indices: indices.to_vec(), numerator, denominator, value })
}

/// Best possible `‖a - V u‖∞` and the lexicographically first subset attaining it.
pub fn combinatorial_mu(v: &Matrix, a: &[f64]) -> Result<(f64, Vec<usize>)> {
    let (n, r) = v.shape();
    if r == 0 || n < r + 1 || a.len() != n {
        return Err(Error::usage(format!("oracle needs n >= r+1 and matching vector, got {}x{}", n, r)));
    }
    if binomial(n, r + 1) > SUBSET_GUARD {
        return Err(Error::usage(format!("C({}, {}) subsets exceeds the oracle guard", n, r + 1)));
    }
    let mut best: Option<(f64, Vec<usize>)> = None;
    for subset in (0..n).combinations(r + 1) {
        let score = subset_score(v, a, &subset)?;
        if let Some(x) = score.value {
            if best.as_ref().map_or(true, |(b, _)| x > *b) {
                best = Some((x, subset));
            }
        }
    }
    best.ok_or_else(|| Error::degenerate("every (r+1)-subset has zero denominator"))
}

/// Whether every `r×r` row block of `V` is nonsingular, with the first
/// failing block as witness.
pub fn is_chebyshev_system(v: &Matrix) -> Result<(bool, Option<Vec<usize>>)> {
    let (n, r) = v.shape();
    if binomial(n, r) > SUBSET_GUARD {
        return Err(Error::usage(format!("C({}, {}) subsets exceeds the oracle guard", n, r)));
    }
    let row_scale: Vec<f64> = (0..n).map(|i| vec_max_abs(v.row(i))).collect();
    for subset in (0..n).combinations(r) {
        let scale = subset.iter().map(|&i| row_scale[i]).product::<f64>().max(1.0);
        let det = lu_factor(&v.select_rows(&subset))?.determinant();
        if det.abs() <= 1e-12 * scale {
            return Ok((false, Some(subset)));
        }
    }
    Ok((true, None))
}

fn deviation(v: &Matrix, a: &[f64], u: &[f64]) -> f64 {
    (0..v.rows()).fold(0.0, |m, i| m.max((a[i] - dot(v.row(i), u)).abs()))
}

/// Nested grid search of `max_j |a_j - (v^j, u)|` for `r ≤ 2`.
///
/// Each round evaluates 41 points per axis over a box centered on the
/// incumbent, then shrinks the box tenfold. The first box is centered at 0.
pub fn grid_min(v: &Matrix, a: &[f64], box_halfwidth: f64, levels: usize) -> Result<f64> {
    let r = v.cols();
    if r == 0 || r > 2 {
        return Err(Error::usage("grid search supports r = 1 or r = 2 only"));
    }
    const POINTS: i32 = 41;
    let half = (POINTS - 1) / 2;
    let mut center = vec![0.0; r];
    let mut best = deviation(v, a, &center);
    let mut width = box_halfwidth;
    for _ in 0..levels {
        let step = width / half as f64;
        let c = center.clone();
        let second: Vec<i32> = if r == 2 { (-half..=half).collect() } else { vec![0] };
        for p in -half..=half {
            for &q in &second {
                let mut u = vec![c[0] + p as f64 * step];
                if r == 2 {
                    u.push(c[1] + q as f64 * step);
                }
                let f = deviation(v, a, &u);
                if f < best {
                    best = f;
                    center = u;
                }
            }
        }
        width /= 10.0;
    }
    Ok(best)
}
