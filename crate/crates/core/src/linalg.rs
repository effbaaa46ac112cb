//! Dense complex vectors and matrices.
//!
//! The solvers only ever factor the small K×K Gram matrix, so a plain
//! row-major layout with a hand-rolled Cholesky is all that is needed here.

use std::ops::{Deref, DerefMut, Index, IndexMut};

use num_complex::Complex;

use crate::error::{PrecodeError, Result};
use crate::scalar::{czero, is_finite, Real};

/// Complex column vector.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CVector<T>(Vec<Complex<T>>);

impl<T: Real> CVector<T> {
    /// Wraps `data`, rejecting NaN and infinite entries.
    pub fn new(data: Vec<Complex<T>>) -> Result<Self> {
        if let Some(i) = data.iter().position(|z| !is_finite(z)) {
            return Err(PrecodeError::NonFinite(i));
        }
        Ok(Self(data))
    }

    pub fn zeros(len: usize) -> Self {
        Self(vec![czero(); len])
    }

    pub fn into_inner(self) -> Vec<Complex<T>> {
        self.0
    }

    pub fn norm_sqr(&self) -> T {
        norm_sqr(&self.0)
    }
}

impl<T> Deref for CVector<T> {
    type Target = [Complex<T>];
    fn deref(&self) -> &Self::Target {
        &self.0
    }
}

impl<T> DerefMut for CVector<T> {
    fn deref_mut(&mut self) -> &mut Self::Target {
        &mut self.0
    }
}

impl<T: Real> From<CVector<T>> for Vec<Complex<T>> {
    fn from(v: CVector<T>) -> Self {
        v.0
    }
}

pub fn norm_sqr<T: Real>(v: &[Complex<T>]) -> T {
    v.iter().map(|z| z.norm_sqr()).sum()
}

/// `a^H b`.
pub fn dot_conj<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> Complex<T> {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .fold(czero(), |acc, (x, y)| acc + x.conj() * y)
}

/// Row-major dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> CMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![czero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex::new(T::one(), T::zero());
        }
        m
    }

    /// Builds a matrix from row-major data, rejecting NaN and infinite entries.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<Complex<T>>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(PrecodeError::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|z| !is_finite(z)) {
            return Err(PrecodeError::NonFinite(i));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<Complex<T>>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(PrecodeError::DimensionMismatch("ragged rows".into()));
        }
        Self::from_row_major(r, c, rows.concat())
    }

    pub fn from_fn(
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> Complex<T>,
    ) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn diagonal(diag: &[Complex<T>]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, d) in diag.iter().enumerate() {
            m[(i, i)] = *d;
        }
        m
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

    pub fn as_slice(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Complex<T>] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<Complex<T>> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn scaled(&self, s: T) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn add_diagonal(&mut self, d: T) {
        for i in 0..self.rows.min(self.cols) {
            self[(i, i)].re += d;
        }
    }

    pub fn trace(&self) -> Complex<T> {
        (0..self.rows.min(self.cols)).fold(czero(), |acc, i| acc + self[(i, i)])
    }

    pub fn frobenius_norm_sqr(&self) -> T {
        norm_sqr(&self.data)
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        assert_eq!(self.shape(), other.shape());
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(T::zero(), T::max)
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(PrecodeError::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = self[(i, l)];
                let orow = other.row(l);
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, b) in dst.iter_mut().zip(orow) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    /// `A v`.
    pub fn mul_vec(&self, v: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
        if v.len() != self.cols {
            return Err(PrecodeError::DimensionMismatch(format!(
                "{}x{} matrix times vector of length {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        Ok(self.mul_vec_unchecked(v))
    }

    pub(crate) fn mul_vec_unchecked(&self, v: &[Complex<T>]) -> Vec<Complex<T>> {
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(czero(), |acc, (a, b)| acc + a * b)
            })
            .collect()
    }

    /// `A^H v`.
    pub fn adjoint_mul_vec(&self, v: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
        if v.len() != self.rows {
            return Err(PrecodeError::DimensionMismatch(format!(
                "adjoint of {}x{} matrix times vector of length {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        Ok(self.adjoint_mul_vec_unchecked(v))
    }

    pub(crate) fn adjoint_mul_vec_unchecked(&self, v: &[Complex<T>]) -> Vec<Complex<T>> {
        let mut out = vec![czero(); self.cols];
        for (i, vi) in v.iter().enumerate() {
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += a.conj() * vi;
            }
        }
        out
    }

    /// `A A^H`, the row Gram matrix.
    pub fn gram_rows(&self) -> Self {
        let n = self.rows;
        let mut g = Self::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = dot_conj(self.row(j), self.row(i));
                g[(i, j)] = v;
                g[(j, i)] = v.conj();
            }
        }
        g
    }

    /// Diagonal of `A^H A` (squared column norms).
    pub fn column_norms_sqr(&self) -> Vec<T> {
        let mut out = vec![T::zero(); self.cols];
        for i in 0..self.rows {
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += a.norm_sqr();
            }
        }
        out
    }

    /// Maximum absolute column sum.
    pub fn norm1(&self) -> T {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self[(i, j)].norm()).sum::<T>())
            .fold(T::zero(), T::max)
    }
}

impl<T> Index<(usize, usize)> for CMatrix<T> {
    type Output = Complex<T>;
    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for CMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        &mut self.data[i * self.cols + j]
    }
}

/// Lower Cholesky factor `L` of a Hermitian positive definite matrix, `A = L L^H`.
#[derive(Debug, Clone)]
pub struct Cholesky<T> {
    l: CMatrix<T>,
}

impl<T: Real> Cholesky<T> {
    pub fn new(a: &CMatrix<T>) -> Result<Self> {
        let n = a.rows();
        if a.cols() != n {
            return Err(PrecodeError::DimensionMismatch(format!(
                "Cholesky of a {}x{} matrix",
                n,
                a.cols()
            )));
        }
        let mut l = CMatrix::zeros(n, n);
        for j in 0..n {
            let mut d = a[(j, j)].re;
            for k in 0..j {
                d -= l[(j, k)].norm_sqr();
            }
            if !(d > T::zero()) {
                return Err(PrecodeError::NotPositiveDefinite {
                    pivot: j,
                    value: d.to_f64_lossy(),
                });
            }
            let djj = d.sqrt();
            l[(j, j)] = Complex::new(djj, T::zero());
            for i in (j + 1)..n {
                let mut v = a[(i, j)];
                for k in 0..j {
                    v -= l[(i, k)] * l[(j, k)].conj();
                }
                l[(i, j)] = v / djj;
            }
        }
        Ok(Self { l })
    }

    pub fn dim(&self) -> usize {
        self.l.rows()
    }

    pub fn factor(&self) -> &CMatrix<T> {
        &self.l
    }

    /// `L^{-1} b`.
    pub fn forward(&self, b: &[Complex<T>]) -> Vec<Complex<T>> {
        let n = self.dim();
        let mut y = b.to_vec();
        for i in 0..n {
            let mut v = y[i];
            let row = self.l.row(i);
            for k in 0..i {
                v -= row[k] * y[k];
            }
            y[i] = v / row[i].re;
        }
        y
    }

    /// `L^{-H} y`.
    pub fn backward(&self, y: &[Complex<T>]) -> Vec<Complex<T>> {
        let n = self.dim();
        let mut x = y.to_vec();
        for i in (0..n).rev() {
            let mut v = x[i];
            for k in (i + 1)..n {
                v -= self.l[(k, i)].conj() * x[k];
            }
            x[i] = v / self.l[(i, i)].re;
        }
        x
    }

    /// `A^{-1} b`.
    pub fn solve(&self, b: &[Complex<T>]) -> Vec<Complex<T>> {
        self.backward(&self.forward(b))
    }

    /// `A^{-1} B`, column by column.
    pub fn solve_matrix(&self, b: &CMatrix<T>) -> CMatrix<T> {
        let mut out = CMatrix::zeros(b.rows(), b.cols());
        for j in 0..b.cols() {
            let col = self.solve(&b.column(j));
            for (i, v) in col.into_iter().enumerate() {
                out[(i, j)] = v;
            }
        }
        out
    }

    pub fn inverse(&self) -> CMatrix<T> {
        self.solve_matrix(&CMatrix::identity(self.dim()))
    }
}

/// 1-norm condition number of `a` given its inverse.
pub fn condition_number_1<T: Real>(a: &CMatrix<T>, inv: &CMatrix<T>) -> T {
    a.norm1() * inv.norm1()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cx;

    fn sample() -> CMatrix<f64> {
        CMatrix::from_rows(&[
            vec![cx(1.0, 0.5), cx(-0.3, 0.2), cx(0.7, -1.1)],
            vec![cx(0.0, 1.0), cx(2.0, 0.0), cx(-0.4, 0.4)],
        ])
        .unwrap()
    }

    #[test]
    fn rejects_non_finite() {
        let err = CMatrix::<f64>::from_row_major(1, 2, vec![cx(1.0, 0.0), cx(f64::NAN, 0.0)]);
        assert_eq!(err, Err(PrecodeError::NonFinite(1)));
        assert!(CVector::new(vec![cx(f64::INFINITY, 0.0)]).is_err());
    }

    #[test]
    fn gram_and_column_norms_match_products() {
        let h = sample();
        let g = h.matmul(&h.adjoint()).unwrap();
        assert!(g.max_abs_diff(&h.gram_rows()) < 1e-14);
        let full = h.adjoint().matmul(&h).unwrap();
        for (j, d) in h.column_norms_sqr().iter().enumerate() {
            assert!((full[(j, j)].re - d).abs() < 1e-14);
        }
    }

    #[test]
    fn adjoint_mul_vec_matches_explicit_adjoint() {
        let h = sample();
        let v = vec![cx(0.2, -1.0), cx(1.5, 0.5)];
        let a = h.adjoint_mul_vec(&v).unwrap();
        let b = h.adjoint().mul_vec(&v).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).norm() < 1e-14);
        }
        assert!(h.mul_vec(&v).is_err());
    }

    #[test]
    fn cholesky_inverse() {
        let h = sample();
        let mut g = h.gram_rows();
        g.add_diagonal(0.1);
        let ch = Cholesky::new(&g).unwrap();
        let l = ch.factor();
        assert!(l.matmul(&l.adjoint()).unwrap().max_abs_diff(&g) < 1e-13);
        let prod = g.matmul(&ch.inverse()).unwrap();
        assert!(prod.max_abs_diff(&CMatrix::identity(2)) < 1e-13);
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let a = CMatrix::from_rows(&[
            vec![cx(1.0, 0.0), cx(2.0, 0.0)],
            vec![cx(2.0, 0.0), cx(1.0, 0.0)],
        ])
        .unwrap();
        assert!(matches!(
            Cholesky::new(&a),
            Err(PrecodeError::NotPositiveDefinite { pivot: 1, .. })
        ));
    }
}
