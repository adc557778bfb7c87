//! Small dense linear algebra for state dimensions of one or two and
//! regression designs of a few columns.

use std::ops::{Index, IndexMut};

use serde::Serialize;
use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinalgError {
    #[error("design matrix is rank deficient (column {column})")]
    RankDeficient { column: usize },
    #[error("need more rows ({rows}) than columns ({cols})")]
    Underdetermined { rows: usize, cols: usize },
    #[error("dimension mismatch")]
    Dimension,
}

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diag(&vec![T::one(); n])
    }

    pub fn from_diag(d: &[T]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, &v) in d.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Self {
            rows: r,
            cols: c,
            data: rows.iter().flatten().copied().collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn diag(&self) -> Vec<T> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == T::zero() {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] = out[(i, j)] + a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.cols, v.len(), "mul_vec dimension mismatch");
        (0..self.rows)
            .map(|i| dot(self.row(i), v))
            .collect()
    }

    /// `v' M` for a row vector `v`.
    pub fn vec_mul(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.rows, v.len(), "vec_mul dimension mismatch");
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| v[i] * self[(i, j)]).sum())
            .collect()
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, s: T) -> Self {
        Self {
            data: self.data.iter().map(|&v| v * s).collect(),
            ..self.clone()
        }
    }

    fn zip_with(&self, other: &Self, f: impl Fn(T, T) -> T) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    /// `(M + M') / 2`.
    pub fn symmetrize(&self) -> Self {
        self.add(&self.transpose()).scale(T::lit(0.5))
    }

    pub fn max_asymmetry(&self) -> T {
        let mut worst = T::zero();
        for i in 0..self.rows {
            for j in 0..i {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }

    /// Moore-Penrose inverse of a symmetric matrix via cyclic Jacobi
    /// eigendecomposition. Eigenvalues below `rel_tol * max|lambda|` count as zero.
    pub fn pinv_symmetric(&self, rel_tol: T) -> Self {
        let (vals, vecs) = self.symmetric_eigen();
        let n = self.rows;
        let top = vals.iter().fold(T::zero(), |a, &v| a.max(v.abs()));
        let mut out = Self::zeros(n, n);
        if top == T::zero() {
            return out;
        }
        for (k, &lam) in vals.iter().enumerate() {
            if lam.abs() <= rel_tol * top {
                continue;
            }
            let inv = T::one() / lam;
            for i in 0..n {
                for j in 0..n {
                    out[(i, j)] = out[(i, j)] + vecs[(i, k)] * inv * vecs[(j, k)];
                }
            }
        }
        out
    }

    /// Eigenvalues and column eigenvectors of a symmetric matrix.
    pub fn symmetric_eigen(&self) -> (Vec<T>, Self) {
        assert!(self.is_square());
        let n = self.rows;
        let mut a = self.symmetrize();
        let mut v = Self::identity(n);
        for _sweep in 0..100 {
            let mut off = T::zero();
            for i in 0..n {
                for j in 0..i {
                    off = off + a[(i, j)] * a[(i, j)];
                }
            }
            if off <= T::min_positive_value() {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = a[(p, q)];
                    if apq == T::zero() {
                        continue;
                    }
                    let theta = (a[(q, q)] - a[(p, p)]) / (T::lit(2.0) * apq);
                    let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                    let c = T::one() / (t * t + T::one()).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let akp = a[(k, p)];
                        let akq = a[(k, q)];
                        a[(k, p)] = c * akp - s * akq;
                        a[(k, q)] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let apk = a[(p, k)];
                        let aqk = a[(q, k)];
                        a[(p, k)] = c * apk - s * aqk;
                        a[(q, k)] = s * apk + c * aqk;
                    }
                    for k in 0..n {
                        let vkp = v[(k, p)];
                        let vkq = v[(k, q)];
                        v[(k, p)] = c * vkp - s * vkq;
                        v[(k, q)] = s * vkp + c * vkq;
                    }
                }
            }
        }
        (a.diag(), v)
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

/// Least-squares solution with the pieces needed for inference.
#[derive(Debug, Clone, PartialEq)]
pub struct Lstsq<T> {
    pub coefficients: Vec<T>,
    pub residuals: Vec<T>,
    pub rss: T,
    /// `(X'X)^{-1}`, i.e. coefficient covariance divided by the error variance.
    pub xtx_inv: Matrix<T>,
}

/// Householder-QR least squares for an `n x k` design with `n > k`.
pub fn lstsq<T: Scalar>(x: &Matrix<T>, y: &[T]) -> Result<Lstsq<T>, LinalgError> {
    let (n, k) = (x.rows(), x.cols());
    if y.len() != n {
        return Err(LinalgError::Dimension);
    }
    if n <= k {
        return Err(LinalgError::Underdetermined { rows: n, cols: k });
    }
    let mut a = x.clone();
    let mut qty = y.to_vec();
    let col_scale: Vec<T> = (0..k)
        .map(|j| (0..n).map(|i| a[(i, j)] * a[(i, j)]).sum::<T>().sqrt())
        .collect();
    let tol = T::epsilon().sqrt() * T::lit(1e-2);
    for j in 0..k {
        let norm = (j..n).map(|i| a[(i, j)] * a[(i, j)]).sum::<T>().sqrt();
        if col_scale[j] == T::zero() || norm <= tol * col_scale[j] {
            return Err(LinalgError::RankDeficient { column: j });
        }
        let alpha = if a[(j, j)] > T::zero() { -norm } else { norm };
        // v = a_j - alpha e_j, stored in place below the diagonal
        let mut v: Vec<T> = (j..n).map(|i| a[(i, j)]).collect();
        v[0] = v[0] - alpha;
        let vnorm2: T = v.iter().map(|&t| t * t).sum();
        if vnorm2 == T::zero() {
            continue;
        }
        let two = T::lit(2.0);
        for c in j..k {
            let s: T = (j..n).map(|i| v[i - j] * a[(i, c)]).sum();
            let f = two * s / vnorm2;
            for i in j..n {
                a[(i, c)] = a[(i, c)] - f * v[i - j];
            }
        }
        let s: T = (j..n).map(|i| v[i - j] * qty[i]).sum();
        let f = two * s / vnorm2;
        for i in j..n {
            qty[i] = qty[i] - f * v[i - j];
        }
    }
    // back substitution R b = Q'y
    let mut b = vec![T::zero(); k];
    for j in (0..k).rev() {
        let mut s = qty[j];
        for c in (j + 1)..k {
            s = s - a[(j, c)] * b[c];
        }
        b[j] = s / a[(j, j)];
    }
    // R^{-1} (upper triangular), then (X'X)^{-1} = R^{-1} R^{-T}
    let mut rinv = Matrix::zeros(k, k);
    for col in 0..k {
        for j in (0..=col).rev() {
            let mut s = if j == col { T::one() } else { T::zero() };
            for c in (j + 1)..=col {
                s = s - a[(j, c)] * rinv[(c, col)];
            }
            rinv[(j, col)] = s / a[(j, j)];
        }
    }
    let xtx_inv = rinv.matmul(&rinv.transpose());
    let fitted = x.mul_vec(&b);
    let residuals: Vec<T> = y.iter().zip(&fitted).map(|(&a, &f)| a - f).collect();
    let rss = residuals.iter().map(|&r| r * r).sum();
    Ok(Lstsq {
        coefficients: b,
        residuals,
        rss,
        xtx_inv,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_fit() {
        let x = Matrix::<f64>::from_rows(&[vec![1.0], vec![2.0], vec![3.0]]);
        let fit = lstsq(&x, &[2.0, 4.0, 6.0]).unwrap();
        assert!((fit.coefficients[0] - 2.0).abs() < 1e-14);
        assert!(fit.rss < 1e-25);
    }

    #[test]
    fn collinear_is_rank_deficient() {
        let x = Matrix::<f64>::from_rows(&[
            vec![1.0, 1.0],
            vec![2.0, 2.0],
            vec![3.0, 3.0],
            vec![5.0, 5.0],
        ]);
        assert!(matches!(
            lstsq(&x, &[1.0, 2.0, 3.0, 4.0]),
            Err(LinalgError::RankDeficient { column: 1 })
        ));
    }

    #[test]
    fn xtx_inverse_is_inverse() {
        let x = Matrix::<f64>::from_rows(&[
            vec![1.0, 0.3],
            vec![1.0, -1.2],
            vec![1.0, 2.5],
            vec![1.0, 0.7],
        ]);
        let fit = lstsq(&x, &[0.0, 1.0, 2.0, 3.0]).unwrap();
        let xtx = x.transpose().matmul(&x);
        let id = xtx.matmul(&fit.xtx_inv);
        for i in 0..2 {
            for j in 0..2 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((id[(i, j)] - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn pinv_of_singular_and_regular() {
        let z = Matrix::<f64>::zeros(2, 2);
        assert_eq!(z.pinv_symmetric(1e-12), z);
        let m = Matrix::<f64>::from_rows(&[vec![4.0, 1.0], vec![1.0, 3.0]]);
        let inv = m.pinv_symmetric(1e-12);
        let id = m.matmul(&inv);
        assert!((id[(0, 0)] - 1.0).abs() < 1e-12 && id[(0, 1)].abs() < 1e-12);
        // rank one: pinv(vv') = vv' / |v|^4
        let r1 = Matrix::<f64>::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]);
        let p = r1.pinv_symmetric(1e-12);
        assert!((p[(1, 1)] - 4.0 / 25.0).abs() < 1e-12);
    }
}
