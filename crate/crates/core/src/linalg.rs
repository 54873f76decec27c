//! Dense row-major matrices and the handful of factorizations the solvers need.

use std::fmt;
use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};

/// Relative pivot size below which an LU factorization is flagged singular.
pub const PIVOT_TOLERANCE: f64 = 1e-13;

/// A dense real matrix stored row by row.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::usage(format!(
                "matrix data has {} entries, expected {}x{}",
                data.len(),
                rows,
                cols
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Builds a matrix from a slice of equally long rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::usage(format!(
                    "row {} has {} entries, expected {}",
                    i,
                    r.len(),
                    cols
                )));
            }
            data.extend_from_slice(r);
        }
        Matrix::new(rows.len(), cols, data)
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    /// Column vector (n×1) from a slice.
    pub fn column(values: &[f64]) -> Self {
        Matrix { rows: values.len(), cols: 1, data: values.to_vec() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// Submatrix made of the given rows, in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        Matrix { rows: indices.len(), cols: self.cols, data }
    }

    /// Copy with row `skip` removed.
    pub fn without_row(&self, skip: usize) -> Matrix {
        let keep: Vec<usize> = (0..self.rows).filter(|&i| i != skip).collect();
        self.select_rows(&keep)
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::usage(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == 0.0 {
                    continue;
                }
                for (o, b) in out_row.iter_mut().zip(other.row(k)) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    /// `self · other^T`, the product used for skeleton factors `U V^T`.
    pub fn matmul_transpose(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.cols {
            return Err(Error::usage(format!(
                "cannot form {}x{} times transpose of {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(Matrix::from_fn(self.rows, other.rows, |i, j| dot(self.row(i), other.row(j))))
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols, "matvec dimension mismatch");
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    pub fn sub(&self, other: &Matrix) -> Result<Matrix> {
        if self.shape() != other.shape() {
            return Err(Error::usage("cannot subtract matrices of different shape"));
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Ok(Matrix { rows: self.rows, cols: self.cols, data })
    }

    pub fn scale(&self, c: f64) -> Matrix {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| c * x).collect() }
    }

    pub fn frobenius_norm_sq(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum()
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Largest absolute value of a slice; 0 for an empty slice.
pub fn vec_max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// The Chebyshev norm `max |a_ij|`.
pub fn max_abs_norm(a: &Matrix) -> Result<f64> {
    if a.is_empty() {
        return Err(Error::usage("max norm of an empty matrix"));
    }
    Ok(vec_max_abs(a.as_slice()))
}

/// Packed `L\U` factors of `P·A = L·U` with unit lower-triangular `L`.
#[derive(Clone, Debug)]
pub struct LuFactorization {
    pub lu: Matrix,
    /// `perm[i]` is the input row that ended up in position `i`.
    pub perm: Vec<usize>,
    pub sign: f64,
    pub singular_flag: bool,
}

pub fn lu_factor(a: &Matrix) -> Result<LuFactorization> {
    if !a.is_square() {
        return Err(Error::usage(format!("LU of non-square {}x{} matrix", a.rows, a.cols)));
    }
    let n = a.rows;
    let mut lu = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut sign = 1.0;
    let mut singular = false;

    let col_scale: Vec<f64> =
        (0..n).map(|j| (0..n).fold(0.0f64, |m, i| m.max(a[(i, j)].abs())).max(1.0)).collect();

    for k in 0..n {
        let mut p = k;
        let mut best = lu[(k, k)].abs();
        for i in k + 1..n {
            let v = lu[(i, k)].abs();
            if v > best {
                best = v;
                p = i;
            }
        }
        if p != k {
            for j in 0..n {
                lu.data.swap(k * n + j, p * n + j);
            }
            perm.swap(k, p);
            sign = -sign;
        }
        if best <= PIVOT_TOLERANCE * col_scale[k] {
            singular = true;
            if best == 0.0 {
                continue;
            }
        }
        let pivot = lu[(k, k)];
        for i in k + 1..n {
            let factor = lu[(i, k)] / pivot;
            lu[(i, k)] = factor;
            if factor == 0.0 {
                continue;
            }
            for j in k + 1..n {
                let ukj = lu[(k, j)];
                lu[(i, j)] -= factor * ukj;
            }
        }
    }

    Ok(LuFactorization { lu, perm, sign, singular_flag: singular })
}

impl LuFactorization {
    pub fn dim(&self) -> usize {
        self.lu.rows
    }

    pub fn determinant(&self) -> f64 {
        if self.singular_flag {
            return 0.0;
        }
        (0..self.dim()).fold(self.sign, |d, i| d * self.lu[(i, i)])
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        lu_solve(self, b)
    }
}

pub fn determinant(a: &Matrix) -> Result<f64> {
    Ok(lu_factor(a)?.determinant())
}

pub fn lu_solve(f: &LuFactorization, b: &[f64]) -> Result<Vec<f64>> {
    let n = f.dim();
    if b.len() != n {
        return Err(Error::usage(format!("right-hand side has length {}, expected {}", b.len(), n)));
    }
    if f.singular_flag {
        return Err(Error::degenerate("singular matrix in linear solve"));
    }
    let mut x: Vec<f64> = f.perm.iter().map(|&p| b[p]).collect();
    for i in 0..n {
        let row = f.lu.row(i);
        let s: f64 = row[..i].iter().zip(&x[..i]).map(|(l, y)| l * y).sum();
        x[i] -= s;
    }
    for i in (0..n).rev() {
        let row = f.lu.row(i);
        let s: f64 = row[i + 1..].iter().zip(&x[i + 1..]).map(|(u, y)| u * y).sum();
        x[i] = (x[i] - s) / row[i];
    }
    Ok(x)
}

/// Factor and solve `A x = b` in one go.
pub fn solve(a: &Matrix, b: &[f64]) -> Result<Vec<f64>> {
    lu_solve(&lu_factor(a)?, b)
}

/// Orthogonal factor of a Householder QR, with columns signed so that `R`
/// has a nonnegative diagonal.
pub fn qr_orthonormal(a: &Matrix) -> Result<Matrix> {
    if !a.is_square() {
        return Err(Error::usage(format!("QR of non-square {}x{} matrix", a.rows, a.cols)));
    }
    let n = a.rows;
    let mut r = a.clone();
    let mut q = Matrix::identity(n);
    let mut v = vec![0.0; n];

    for k in 0..n.saturating_sub(1) {
        let norm = (k..n).map(|i| r[(i, k)] * r[(i, k)]).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let x0 = r[(k, k)];
        let alpha = if x0 >= 0.0 { -norm } else { norm };
        for i in k..n {
            v[i] = r[(i, k)];
        }
        v[k] -= alpha;
        let vnorm2: f64 = (k..n).map(|i| v[i] * v[i]).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        let beta = 2.0 / vnorm2;
        // R <- H R
        for j in k..n {
            let s: f64 = (k..n).map(|i| v[i] * r[(i, j)]).sum();
            let s = s * beta;
            for i in k..n {
                r[(i, j)] -= s * v[i];
            }
        }
        // Q <- Q H
        for i in 0..n {
            let s: f64 = (k..n).map(|l| q[(i, l)] * v[l]).sum();
            let s = s * beta;
            for l in k..n {
                q[(i, l)] -= s * v[l];
            }
        }
    }
    for k in 0..n {
        if r[(k, k)] < 0.0 {
            for i in 0..n {
                q[(i, k)] = -q[(i, k)];
            }
        }
    }
    Ok(q)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[f64]]) -> Matrix {
        Matrix::from_rows(rows).unwrap()
    }

    #[test]
    fn max_norm_examples() {
        assert_eq!(max_abs_norm(&m(&[&[1.0, -3.0], &[2.0, 0.0]])).unwrap(), 3.0);
        assert_eq!(max_abs_norm(&m(&[&[0.0]])).unwrap(), 0.0);
        let a = m(&[&[1.5, -2.0], &[7.0, 0.25]]);
        assert_eq!(max_abs_norm(&a.sub(&a).unwrap()).unwrap(), 0.0);
        assert!(matches!(max_abs_norm(&Matrix::zeros(0, 0)), Err(Error::Usage(_))));
    }

    #[test]
    fn lu_identity() {
        let f = lu_factor(&Matrix::identity(3)).unwrap();
        assert_eq!(f.lu, Matrix::identity(3));
        assert_eq!(f.sign, 1.0);
        assert!(!f.singular_flag);
    }

    #[test]
    fn lu_swap_and_singular() {
        let f = lu_factor(&m(&[&[0.0, 1.0], &[1.0, 0.0]])).unwrap();
        assert_eq!(f.sign, -1.0);
        assert_eq!(f.perm, vec![1, 0]);
        assert!(!f.singular_flag);

        let f = lu_factor(&m(&[&[1.0, 2.0], &[2.0, 4.0]])).unwrap();
        assert!(f.singular_flag);
        assert!(matches!(lu_solve(&f, &[1.0, 1.0]), Err(Error::DegenerateSystem(_))));
    }

    #[test]
    fn lu_rejects_non_square() {
        assert!(matches!(lu_factor(&Matrix::zeros(2, 3)), Err(Error::Usage(_))));
        assert!(matches!(determinant(&Matrix::zeros(3, 2)), Err(Error::Usage(_))));
        assert!(qr_orthonormal(&Matrix::zeros(3, 2)).is_err());
    }

    #[test]
    fn determinant_examples() {
        assert_eq!(determinant(&Matrix::identity(4)).unwrap(), 1.0);
        assert!((determinant(&m(&[&[1.0, 2.0], &[3.0, 4.0]])).unwrap() + 2.0).abs() < 1e-14);
        assert_eq!(determinant(&m(&[&[1.0, 2.0], &[2.0, 4.0]])).unwrap(), 0.0);
    }

    #[test]
    fn solve_examples() {
        assert_eq!(solve(&Matrix::identity(2), &[5.0, 7.0]).unwrap(), vec![5.0, 7.0]);
        assert_eq!(solve(&m(&[&[2.0, 0.0], &[0.0, 4.0]]), &[2.0, 8.0]).unwrap(), vec![1.0, 2.0]);
        let x = solve(&m(&[&[1.0, 1.0], &[1.0, -1.0]]), &[3.0, 1.0]).unwrap();
        assert!((x[0] - 2.0).abs() < 1e-15 && (x[1] - 1.0).abs() < 1e-15);
        let f = lu_factor(&Matrix::identity(2)).unwrap();
        assert!(matches!(lu_solve(&f, &[1.0]), Err(Error::Usage(_))));
    }

    #[test]
    fn lu_reconstructs_input() {
        let a = m(&[&[2.0, -1.0, 0.5], &[4.0, 3.0, -2.0], &[-1.0, 0.25, 6.0]]);
        let f = lu_factor(&a).unwrap();
        let n = 3;
        let l = Matrix::from_fn(n, n, |i, j| match i.cmp(&j) {
            std::cmp::Ordering::Greater => f.lu[(i, j)],
            std::cmp::Ordering::Equal => 1.0,
            std::cmp::Ordering::Less => 0.0,
        });
        let u = Matrix::from_fn(n, n, |i, j| if i <= j { f.lu[(i, j)] } else { 0.0 });
        let pa = a.select_rows(&f.perm);
        let diff = l.matmul(&u).unwrap().sub(&pa).unwrap();
        assert!(max_abs_norm(&diff).unwrap() <= 1e-10 * 6.0);
    }

    #[test]
    fn qr_small_cases() {
        assert_eq!(qr_orthonormal(&Matrix::identity(3)).unwrap(), Matrix::identity(3));
        let q = qr_orthonormal(&m(&[&[0.0, 1.0], &[1.0, 0.0]])).unwrap();
        let qtq = q.transpose().matmul(&q).unwrap();
        assert!(max_abs_norm(&qtq.sub(&Matrix::identity(2)).unwrap()).unwrap() < 1e-15);
        for x in q.as_slice() {
            assert!(x.abs() < 1e-15 || (x.abs() - 1.0).abs() < 1e-15);
        }
        let one = qr_orthonormal(&m(&[&[-3.0]])).unwrap();
        assert_eq!(one.as_slice(), &[-1.0]);
    }

    #[test]
    fn qr_has_nonnegative_r_diagonal() {
        let a = m(&[&[1.0, 2.0, -1.0], &[-3.0, 0.5, 2.0], &[0.25, -4.0, 1.0]]);
        let q = qr_orthonormal(&a).unwrap();
        let r = q.transpose().matmul(&a).unwrap();
        for k in 0..3 {
            assert!(r[(k, k)] >= 0.0);
            for i in k + 1..3 {
                assert!(r[(i, k)].abs() < 1e-12);
            }
        }
    }
}
