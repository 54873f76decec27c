//! Best equidistant point of an inconsistent `(r+1)×r` system `V u = a`.
//!
//! Two independent routes are provided. [`equidistant_by_determinants`]
//! weights the `r+1` square subsystem solutions by the absolute values of
//! their determinants `D_j`. [`equidistant_by_signs`] first finds the left
//! null vector `s` of `V` (its signs are the residual signs at the optimum)
//! and then solves one square system in `(u, ρ)`. Each checks the other.

use crate::error::{Error, Result};
use crate::linalg::{dot, lu_factor, vec_max_abs, Matrix, PIVOT_TOLERANCE};

#[derive(Clone, Debug, PartialEq)]
pub struct EquidistantSolution {
    pub u: Vec<f64>,
    /// Common absolute residual at the `r+1` rows.
    pub rho: f64,
    /// `sign(a_j - (v^j, u))`, with `+1` used for an exactly zero residual.
    pub signs: Vec<i8>,
    /// The determinants `D_j` of `V` with row `j` deleted (determinant route only).
    pub cofactors: Option<Vec<f64>>,
    /// Left null vector of `V`, scaled to unit max norm with a positive
    /// leading entry (sign route only).
    pub null_vector: Option<Vec<f64>>,
}

impl EquidistantSolution {
    /// `a - V u` for the system this solution came from.
    pub fn residual(&self, v: &Matrix, a: &[f64]) -> Vec<f64> {
        (0..v.rows()).map(|j| a[j] - dot(v.row(j), &self.u)).collect()
    }
}

fn check_shape(v: &Matrix, a: &[f64]) -> Result<usize> {
    let r = v.cols();
    if r == 0 || v.rows() != r + 1 {
        return Err(Error::usage(format!(
            "equidistant point needs an (r+1)xr system, got {}x{}",
            v.rows(),
            v.cols()
        )));
    }
    if a.len() != r + 1 {
        return Err(Error::usage(format!("right-hand side has length {}, expected {}", a.len(), r + 1)));
    }
    Ok(r)
}

fn residual_signs(v: &Matrix, a: &[f64], u: &[f64]) -> Vec<i8> {
    (0..v.rows()).map(|j| if a[j] - dot(v.row(j), u) < 0.0 { -1 } else { 1 }).collect()
}

/// `(-1)^j` for the 1-based index `j0 + 1`.
fn alternating_sign(j0: usize) -> f64 {
    if j0 % 2 == 0 {
        -1.0
    } else {
        1.0
    }
}

/// The determinants `D_j = det(V without row j)` of an `(r+1)×r` matrix.
pub fn deleted_row_determinants(v: &Matrix) -> Result<Vec<f64>> {
    (0..v.rows()).map(|j| Ok(lu_factor(&v.without_row(j))?.determinant())).collect()
}

/// `Σ_j (-1)^j D_j a_j`, the numerator of the deviation formula.
pub fn signed_cofactor_sum(d: &[f64], a: &[f64]) -> f64 {
    d.iter().zip(a).enumerate().map(|(j, (dj, aj))| alternating_sign(j) * dj * aj).sum()
}

pub fn equidistant_by_determinants(v: &Matrix, a: &[f64]) -> Result<EquidistantSolution> {
    let r = check_shape(v, a)?;
    let mut d = Vec::with_capacity(r + 1);
    let mut factors = Vec::with_capacity(r + 1);
    for j in 0..=r {
        let f = lu_factor(&v.without_row(j))?;
        d.push(f.determinant());
        factors.push(f);
    }
    let total: f64 = d.iter().map(|x| x.abs()).sum();
    if total == 0.0 {
        return Err(Error::degenerate("all deleted-row determinants vanish"));
    }
    let rho = signed_cofactor_sum(&d, a).abs() / total;

    let mut u = vec![0.0; r];
    for j in 0..=r {
        if d[j] == 0.0 {
            continue;
        }
        let rhs: Vec<f64> = (0..=r).filter(|&k| k != j).map(|k| a[k]).collect();
        let uj = factors[j].solve(&rhs)?;
        let w = d[j].abs() / total;
        for (ui, x) in u.iter_mut().zip(&uj) {
            *ui += w * x;
        }
    }
    let signs = residual_signs(v, a, &u);
    Ok(EquidistantSolution { u, rho, signs, cofactors: Some(d), null_vector: None })
}

/// Nontrivial `s` with `V^T s = 0`, found by pinning one component to 1.
///
/// The last component is pinned first; if the remaining square system is
/// singular the pinned position moves to `0, 1, ...` in turn.
pub fn left_null_vector(v: &Matrix) -> Result<Vec<f64>> {
    let r = v.cols();
    let order = std::iter::once(r).chain(0..r);
    for pinned in order {
        let m = v.without_row(pinned).transpose();
        let f = lu_factor(&m)?;
        if f.singular_flag {
            continue;
        }
        let rhs: Vec<f64> = v.row(pinned).iter().map(|x| -x).collect();
        let rest = f.solve(&rhs)?;
        let mut s = Vec::with_capacity(r + 1);
        let mut it = rest.into_iter();
        for k in 0..=r {
            s.push(if k == pinned { 1.0 } else { it.next().unwrap() });
        }
        return Ok(s);
    }
    Err(Error::degenerate("no square subsystem of the null space problem is regular"))
}

pub fn equidistant_by_signs(v: &Matrix, a: &[f64]) -> Result<EquidistantSolution> {
    let r = check_shape(v, a)?;
    let mut s = left_null_vector(v)?;
    let scale = vec_max_abs(&s);
    if s.iter().any(|x| x.abs() <= PIVOT_TOLERANCE * scale) {
        return Err(Error::degenerate("null vector has a zero component (not a Chebyshev system)"));
    }
    let flip = if s[0] < 0.0 { -1.0 } else { 1.0 };
    for x in s.iter_mut() {
        *x *= flip / scale;
    }
    let sigma: Vec<f64> = s.iter().map(|x| x.signum()).collect();

    let system = Matrix::from_fn(r + 1, r + 1, |k, c| if c < r { v[(k, c)] } else { sigma[k] });
    let f = lu_factor(&system)?;
    if f.singular_flag {
        return Err(Error::degenerate("signed equidistant system is singular"));
    }
    let mut sol = f.solve(a)?;
    let rho_signed = sol.pop().unwrap();
    let flip = if rho_signed < 0.0 { -1 } else { 1 };
    let signs = sigma.iter().map(|&x| flip * x as i8).collect();
    Ok(EquidistantSolution {
        u: sol,
        rho: rho_signed.abs(),
        signs,
        cofactors: None,
        null_vector: Some(s),
    })
}

/// Sign route, falling back to the determinant route when the subsystem is
/// not a Chebyshev system but still has full column rank.
pub fn solve_subsystem(v: &Matrix, a: &[f64]) -> Result<EquidistantSolution> {
    match equidistant_by_signs(v, a) {
        Ok(sol) => Ok(sol),
        Err(e) if e.is_degenerate() => equidistant_by_determinants(v, a),
        Err(e) => Err(e),
    }
}

/// True when `w_j · D_j` is nonzero and strictly alternates in sign.
pub fn alternates(w: &[f64], d: &[f64]) -> bool {
    let p: Vec<f64> = w.iter().zip(d).map(|(x, y)| x * y).collect();
    p.iter().all(|x| *x != 0.0) && p.windows(2).all(|q| q[0].signum() != q[1].signum())
}
