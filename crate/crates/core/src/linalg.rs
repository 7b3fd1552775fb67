//! Small dense linear-algebra layer.
//!
//! Storage is row-major `Vec<f64>`. Every reduction runs in a fixed index
//! order so results are deterministic. Inverses are never formed
//! explicitly; everything goes through a Cholesky factor.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Panics if `data.len() != rows * cols`.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data length mismatch");
        Matrix { rows, cols, data }
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

    /// Stacks equal-length rows.
    pub fn from_rows(rows: &[Vec<f64>], cols: usize) -> Result<Self> {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(Error::arg(alloc::format!(
                    "row {i} has length {}, expected {cols}",
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        Ok(Matrix {
            rows: rows.len(),
            cols,
            data,
        })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for (k, &a) in self.row(i).iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                axpy(a, other.row(k), out_row);
            }
        }
        out
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, v.len(), "matvec shape mismatch");
        (0..self.rows).map(|i| dot(self.row(i), v)).collect()
    }

    /// `selfᵀ v`.
    pub fn t_matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.rows, v.len(), "t_matvec shape mismatch");
        let mut out = vec![0.0; self.cols];
        for (i, &vi) in v.iter().enumerate() {
            if vi != 0.0 {
                axpy(vi, self.row(i), &mut out);
            }
        }
        out
    }

    pub fn scale(&mut self, c: f64) {
        for v in &mut self.data {
            *v *= c;
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

/// A square matrix whose symmetry was checked (or enforced) on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix(Matrix);

impl SymmetricMatrix {
    /// Accepts `m` if `max |m - mᵀ| <= 1e-12 * max |m|`, then stores the
    /// exactly symmetric average.
    pub fn new(m: Matrix) -> Result<Self> {
        if m.rows != m.cols {
            return Err(Error::arg("symmetric matrix must be square"));
        }
        let scale = m.max_abs();
        let n = m.rows;
        for i in 0..n {
            for j in 0..i {
                if (m[(i, j)] - m[(j, i)]).abs() > 1e-12 * scale {
                    return Err(Error::arg(alloc::format!(
                        "matrix is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(Self::symmetrize(m))
    }

    /// `(m + mᵀ) / 2` without any check.
    pub fn symmetrize(mut m: Matrix) -> Self {
        assert_eq!(m.rows, m.cols, "symmetric matrix must be square");
        let n = m.rows;
        for i in 0..n {
            for j in 0..i {
                let avg = 0.5 * (m[(i, j)] + m[(j, i)]);
                m[(i, j)] = avg;
                m[(j, i)] = avg;
            }
        }
        SymmetricMatrix(m)
    }

    /// Builds from the lower triangle `f(i, j)` with `j <= i`.
    pub fn from_lower_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let v = f(i, j);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        SymmetricMatrix(m)
    }

    pub fn identity(n: usize) -> Self {
        SymmetricMatrix(Matrix::identity(n))
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.0.rows
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.0[(i, i)]).sum()
    }

    pub fn scaled(&self, c: f64) -> Self {
        let mut m = self.0.clone();
        m.scale(c);
        SymmetricMatrix(m)
    }
}

impl Index<(usize, usize)> for SymmetricMatrix {
    type Output = f64;

    #[inline]
    fn index(&self, idx: (usize, usize)) -> &f64 {
        &self.0[idx]
    }
}

/// Diagonal regularization used when a factorization fails.
///
/// The first attempt is always unregularized. After that the jitter starts
/// at `relative * trace / dim` and doubles, at most `max_doublings` times.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JitterPolicy {
    pub relative: f64,
    pub max_doublings: u32,
}

impl Default for JitterPolicy {
    fn default() -> Self {
        JitterPolicy {
            relative: 1e-10,
            max_doublings: 10,
        }
    }
}

impl JitterPolicy {
    /// Never regularize.
    pub const NONE: JitterPolicy = JitterPolicy {
        relative: 0.0,
        max_doublings: 0,
    };
}

/// Lower Cholesky factor `L` with `L Lᵀ = A + εI`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cholesky {
    factor: Matrix,
    jitter: f64,
}

impl Cholesky {
    pub fn new(a: &SymmetricMatrix, policy: JitterPolicy) -> Result<Self> {
        let n = a.dim();
        if let Some(factor) = factor_with_shift(a.as_matrix(), 0.0) {
            return Ok(Cholesky {
                factor,
                jitter: 0.0,
            });
        }
        let base = policy.relative * a.trace() / n.max(1) as f64;
        if base > 0.0 && base.is_finite() {
            let mut eps = base;
            for _ in 0..=policy.max_doublings {
                if let Some(factor) = factor_with_shift(a.as_matrix(), eps) {
                    return Ok(Cholesky {
                        factor,
                        jitter: eps,
                    });
                }
                eps *= 2.0;
            }
        }
        Err(Error::Conditioning(alloc::format!(
            "{n}x{n} matrix is not positive definite after jitter"
        )))
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.factor.rows
    }

    pub fn lower(&self) -> &Matrix {
        &self.factor
    }

    /// Diagonal shift that was added before factoring.
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    /// Solves `L y = b` in place.
    pub fn solve_lower_in_place(&self, b: &mut [f64]) {
        let n = self.dim();
        assert_eq!(b.len(), n);
        for i in 0..n {
            let row = self.factor.row(i);
            let s = b[i] - dot(&row[..i], &b[..i]);
            b[i] = s / row[i];
        }
    }

    /// Solves `Lᵀ x = y` in place.
    pub fn solve_upper_in_place(&self, y: &mut [f64]) {
        let n = self.dim();
        assert_eq!(y.len(), n);
        for i in (0..n).rev() {
            y[i] /= self.factor[(i, i)];
            let yi = y[i];
            let row = self.factor.row(i);
            for k in 0..i {
                y[k] -= row[k] * yi;
            }
        }
    }

    /// `(A + εI)⁻¹ b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_lower_in_place(&mut x);
        self.solve_upper_in_place(&mut x);
        x
    }

    /// Solves column by column.
    pub fn solve_matrix(&self, b: &Matrix) -> Matrix {
        assert_eq!(b.rows(), self.dim());
        let mut out = Matrix::zeros(b.rows(), b.cols());
        for j in 0..b.cols() {
            let x = self.solve(&b.column(j));
            for (i, v) in x.into_iter().enumerate() {
                out[(i, j)] = v;
            }
        }
        out
    }

    /// `L⁻¹ B`, column by column.
    pub fn solve_lower_matrix(&self, b: &Matrix) -> Matrix {
        assert_eq!(b.rows(), self.dim());
        let mut out = Matrix::zeros(b.rows(), b.cols());
        for j in 0..b.cols() {
            let mut x = b.column(j);
            self.solve_lower_in_place(&mut x);
            for (i, v) in x.into_iter().enumerate() {
                out[(i, j)] = v;
            }
        }
        out
    }

    /// `L w`.
    pub fn mul_lower(&self, w: &[f64]) -> Vec<f64> {
        let n = self.dim();
        assert_eq!(w.len(), n);
        (0..n)
            .map(|i| dot(&self.factor.row(i)[..=i], &w[..=i]))
            .collect()
    }

    /// `Lᵀ v`.
    pub fn mul_upper(&self, v: &[f64]) -> Vec<f64> {
        let n = self.dim();
        assert_eq!(v.len(), n);
        let mut out = vec![0.0; n];
        for (i, &vi) in v.iter().enumerate() {
            if vi != 0.0 {
                axpy(vi, &self.factor.row(i)[..=i], &mut out[..=i]);
            }
        }
        out
    }

    /// `vᵀ (A + εI)⁻¹ v`.
    pub fn quad_form_inv(&self, v: &[f64]) -> f64 {
        let mut y = v.to_vec();
        self.solve_lower_in_place(&mut y);
        dot(&y, &y)
    }

    /// Diagonal of `(A + εI)⁻¹`.
    pub fn inverse_diagonal(&self) -> Vec<f64> {
        let n = self.dim();
        let mut diag = vec![0.0; n];
        let mut e = vec![0.0; n];
        for i in 0..n {
            e.iter_mut().for_each(|v| *v = 0.0);
            e[i] = 1.0;
            self.solve_lower_in_place(&mut e);
            // column i of L⁻¹ lives in e[i..]
            diag[i] = dot(&e[i..], &e[i..]);
        }
        diag
    }

    pub fn log_det(&self) -> f64 {
        (0..self.dim())
            .map(|i| 2.0 * libm::log(self.factor[(i, i)]))
            .sum()
    }
}

/// Rank-revealing factor `A ≈ L Lᵀ` of a positive semidefinite matrix by
/// Cholesky with diagonal pivoting. `L` is `n × r`; in pivot order it is
/// lower trapezoidal. Elimination stops once every remaining diagonal entry
/// is at most `rel_tol · max_i A_ii`.
#[derive(Debug, Clone, PartialEq)]
pub struct PivotedCholesky {
    factor: Matrix,
    pivots: Vec<usize>,
}

impl PivotedCholesky {
    pub fn new(a: &SymmetricMatrix, rel_tol: f64) -> Result<Self> {
        let m = a.as_matrix();
        let n = a.dim();
        let mut diag: Vec<f64> = (0..n).map(|i| m[(i, i)]).collect();
        if diag.iter().any(|d| !d.is_finite()) {
            return Err(Error::Conditioning("non-finite diagonal".into()));
        }
        let floor = rel_tol * diag.iter().fold(0.0f64, |acc, &d| acc.max(d));
        let mut cols: Vec<Vec<f64>> = Vec::new();
        let mut pivots = Vec::new();
        let mut done = vec![false; n];
        for _ in 0..n {
            let mut q = None;
            for i in 0..n {
                if !done[i] && q.is_none_or(|j: usize| diag[i] > diag[j]) {
                    q = Some(i);
                }
            }
            let q = q.expect("remaining index");
            if !(diag[q] > floor) {
                break;
            }
            done[q] = true;
            let lqq = libm::sqrt(diag[q]);
            let mut col = vec![0.0; n];
            col[q] = lqq;
            for i in 0..n {
                if done[i] {
                    continue;
                }
                let s: f64 = cols.iter().map(|c| c[i] * c[q]).sum();
                let v = (m[(i, q)] - s) / lqq;
                col[i] = v;
                diag[i] -= v * v;
            }
            cols.push(col);
            pivots.push(q);
        }
        let r = cols.len();
        let factor = Matrix::from_fn(n, r, |i, k| cols[k][i]);
        Ok(PivotedCholesky { factor, pivots })
    }

    pub fn dim(&self) -> usize {
        self.factor.rows
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// Row `i` of `L` (length `rank`).
    pub fn row(&self, i: usize) -> &[f64] {
        self.factor.row(i)
    }

    /// `L w` for `w` of length `rank`.
    pub fn mul(&self, w: &[f64]) -> Vec<f64> {
        assert_eq!(w.len(), self.rank());
        (0..self.dim())
            .map(|i| dot(self.factor.row(i), w))
            .collect()
    }

    /// The `z` with `L z = v` for `v` in the range of `L`, read off the
    /// pivot rows.
    pub fn solve_range(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.dim());
        let r = self.rank();
        let mut z = vec![0.0; r];
        for (k, &p) in self.pivots.iter().enumerate() {
            let row = self.factor.row(p);
            z[k] = (v[p] - dot(&row[..k], &z[..k])) / row[k];
        }
        z
    }
}

fn factor_with_shift(a: &Matrix, shift: f64) -> Option<Matrix> {
    let n = a.rows;
    let mut l = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let s = dot(&l.row(i)[..j], &l.row(j)[..j]);
            if i == j {
                let d = a[(i, i)] + shift - s;
                if !(d > 0.0) || !d.is_finite() {
                    return None;
                }
                l[(i, i)] = libm::sqrt(d);
            } else {
                l[(i, j)] = (a[(i, j)] - s) / l[(j, j)];
            }
        }
    }
    Some(l)
}

pub fn chol(a: &SymmetricMatrix, policy: JitterPolicy) -> Result<Cholesky> {
    Cholesky::new(a, policy)
}

/// `X` with `A X = B`.
pub fn solve_spd(a: &SymmetricMatrix, b: &Matrix, policy: JitterPolicy) -> Result<Matrix> {
    if b.rows() != a.dim() {
        return Err(Error::arg("right-hand side has wrong number of rows"));
    }
    Ok(Cholesky::new(a, policy)?.solve_matrix(b))
}

/// `vᵀ A⁻¹ v`.
pub fn quad_form(a: &SymmetricMatrix, v: &[f64], policy: JitterPolicy) -> Result<f64> {
    if v.len() != a.dim() {
        return Err(Error::arg("vector length does not match matrix"));
    }
    Ok(Cholesky::new(a, policy)?.quad_form_inv(v))
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut s = 0.0;
    for (x, y) in a.iter().zip(b) {
        s += x * y;
    }
    s
}

/// `y += a x`
#[inline]
pub fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

pub fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn norm2(v: &[f64]) -> f64 {
    libm::sqrt(dot(v, v))
}
