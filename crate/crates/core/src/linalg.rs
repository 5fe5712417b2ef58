//! Dense row-major matrices and the cyclic Jacobi symmetric eigensolver.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Dense row-major matrix.
#[derive(Clone, PartialEq)]
pub struct Mat<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Real> Mat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), rows * cols, "data length must equal rows * cols");
        Self { rows, cols, data }
    }

    /// Builds a matrix from nested rows. Panics on ragged input.
    pub fn from_rows<R: AsRef<[T]>>(rows: &[R]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.as_ref().len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            let row = row.as_ref();
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        Self {
            rows: r,
            cols: c,
            data,
        }
    }

    pub fn diag(values: &[T]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    /// Column vector `v` as an `len × 1` matrix.
    pub fn column(values: &[T]) -> Self {
        Self::from_vec(values.len(), 1, values.to_vec())
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
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn scale(&self, s: T) -> Self {
        self.map(|x| x * s)
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "inner dimensions must agree");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == T::zero() {
                    continue;
                }
                let rhs_row = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                for (o, &b) in out_row.iter_mut().zip(rhs_row) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// `diag(left) · self · diag(right)`.
    pub fn scale_rows_cols(&self, left: &[T], right: &[T]) -> Self {
        assert_eq!(left.len(), self.rows);
        assert_eq!(right.len(), self.cols);
        Self::from_fn(self.rows, self.cols, |i, j| left[i] * self[(i, j)] * right[j])
    }

    /// `left · self · leftᵀ`.
    pub fn congruence(&self, left: &Self) -> Self {
        left.matmul(self).matmul(&left.transpose())
    }

    pub fn row_sums(&self) -> Vec<T> {
        (0..self.rows).map(|i| self.row(i).iter().copied().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<T> {
        let mut out = vec![T::zero(); self.cols];
        for i in 0..self.rows {
            for (o, &x) in out.iter_mut().zip(self.row(i)) {
                *o += x;
            }
        }
        out
    }

    pub fn trace(&self) -> T {
        self.diagonal().into_iter().sum()
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().map(|&x| x * x).sum::<T>().sqrt()
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, &x| m.max(x.abs()))
    }

    /// Frobenius inner product `Σ aᵢⱼ bᵢⱼ`.
    pub fn dot(&self, rhs: &Self) -> T {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        self.data.iter().zip(&rhs.data).map(|(&a, &b)| a * b).sum()
    }

    /// Largest absolute difference `|a_ij - a_ji|`.
    pub fn asymmetry(&self) -> T {
        assert!(self.is_square());
        let mut worst = T::zero();
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }

    pub fn symmetrized(&self) -> Self {
        let half = T::lit(0.5);
        Self::from_fn(self.rows, self.cols, |i, j| half * (self[(i, j)] + self[(j, i)]))
    }

    pub fn max_abs_diff(&self, rhs: &Self) -> T {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        self.data
            .iter()
            .zip(&rhs.data)
            .fold(T::zero(), |m, (&a, &b)| m.max((a - b).abs()))
    }

    pub fn cast<U: Real>(&self) -> Mat<U> {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| U::lit(x.as_f64())).collect(),
        }
    }
}

impl<T: Copy> Index<(usize, usize)> for Mat<T> {
    type Output = T;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<T: Copy> IndexMut<(usize, usize)> for Mat<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl<T: Real> Add for &Mat<T> {
    type Output = Mat<T>;
    fn add(self, rhs: &Mat<T>) -> Mat<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a + b).collect(),
        }
    }
}

impl<T: Real> Sub for &Mat<T> {
    type Output = Mat<T>;
    fn sub(self, rhs: &Mat<T>) -> Mat<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a - b).collect(),
        }
    }
}

impl<T: Real> Mul for &Mat<T> {
    type Output = Mat<T>;
    fn mul(self, rhs: &Mat<T>) -> Mat<T> {
        self.matmul(rhs)
    }
}

impl<T: Real> fmt::Debug for Mat<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Mat {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}

impl<T: Real> Serialize for Mat<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_rows().serialize(s)
    }
}

/// Eigen-decomposition of a symmetric matrix, eigenvalues sorted descending.
#[derive(Debug, Clone)]
pub struct SymEigen<T: Real> {
    pub values: Vec<T>,
    /// Eigenvectors as columns, aligned with `values`.
    pub vectors: Option<Mat<T>>,
    pub sweeps: usize,
}

pub const JACOBI_MAX_SWEEPS: usize = 100;
pub const JACOBI_REL_THRESHOLD: f64 = 1e-12;

/// Symmetric eigen-decomposition by cyclic Jacobi rotations.
///
/// Stops once the off-diagonal Frobenius norm falls below
/// `1e-12 · ‖M‖_F` or after 100 sweeps. Rejects input whose asymmetry exceeds
/// `1e-10 · ‖M‖_F`; the symmetric part is what gets diagonalized.
pub fn sym_eigen<T: Real>(m: &Mat<T>, want_vectors: bool) -> Result<SymEigen<T>> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch {
            what: "eigensolver input columns",
            expected: m.rows(),
            found: m.cols(),
        });
    }
    let n = m.rows();
    let fro = m.frobenius_norm();
    let asym = m.asymmetry();
    if asym > T::tol(1e-10) * fro {
        return Err(Error::NotSymmetric {
            asymmetry: asym.as_f64(),
        });
    }
    let mut a = m.symmetrized();
    let mut v = want_vectors.then(|| Mat::<T>::identity(n));
    let threshold = T::lit(JACOBI_REL_THRESHOLD) * fro;

    let mut sweeps = 0;
    while sweeps < JACOBI_MAX_SWEEPS {
        let off = off_diagonal_norm(&a);
        if off <= threshold {
            break;
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == T::zero() {
                    continue;
                }
                let (c, s) = jacobi_rotation(a[(p, p)], a[(q, q)], apq);
                rotate(&mut a, p, q, c, s);
                if let Some(v) = v.as_mut() {
                    rotate_columns(v, p, q, c, s);
                }
            }
        }
    }

    let raw: Vec<T> = a.diagonal();
    let mut order: Vec<usize> = (0..n).collect();
    // Stable sort: ties keep original index order.
    order.sort_by(|&i, &j| raw[j].partial_cmp(&raw[i]).unwrap_or(std::cmp::Ordering::Equal));
    let values = order.iter().map(|&i| raw[i]).collect();
    let vectors = v.map(|v| Mat::from_fn(n, n, |r, c| v[(r, order[c])]));
    Ok(SymEigen {
        values,
        vectors,
        sweeps,
    })
}

/// Eigenvalues only, sorted descending.
pub fn sym_eigenvalues<T: Real>(m: &Mat<T>) -> Result<Vec<T>> {
    Ok(sym_eigen(m, false)?.values)
}

fn off_diagonal_norm<T: Real>(a: &Mat<T>) -> T {
    let n = a.rows();
    let mut acc = T::zero();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                acc += a[(i, j)] * a[(i, j)];
            }
        }
    }
    acc.sqrt()
}

/// Rotation `(c, s)` annihilating `a_pq` in the 2×2 block `[[app, apq], [apq, aqq]]`.
fn jacobi_rotation<T: Real>(app: T, aqq: T, apq: T) -> (T, T) {
    let two = T::lit(2.0);
    let theta = (aqq - app) / (two * apq);
    let t = if theta.abs() > T::lit(1e150).min(T::max_value().sqrt()) {
        T::one() / (two * theta)
    } else {
        let sign = if theta >= T::zero() { T::one() } else { -T::one() };
        sign / (theta.abs() + (theta * theta + T::one()).sqrt())
    };
    let c = T::one() / (t * t + T::one()).sqrt();
    (c, t * c)
}

/// `a ← Jᵀ a J` for the plane rotation on indices `(p, q)`.
fn rotate<T: Real>(a: &mut Mat<T>, p: usize, q: usize, c: T, s: T) {
    rotate_columns(a, p, q, c, s);
    let n = a.cols();
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = c * apk - s * aqk;
        a[(q, k)] = s * apk + c * aqk;
    }
    a[(p, q)] = T::zero();
    a[(q, p)] = T::zero();
}

fn rotate_columns<T: Real>(a: &mut Mat<T>, p: usize, q: usize, c: T, s: T) {
    for k in 0..a.rows() {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = c * akp - s * akq;
        a[(k, q)] = s * akp + c * akq;
    }
}

/// Spectral norm (largest singular value) via the eigenvalues of `MᵀM`.
pub fn spectral_norm<T: Real>(m: &Mat<T>) -> Result<T> {
    let gram = if m.rows() < m.cols() {
        m.matmul(&m.transpose())
    } else {
        m.transpose().matmul(m)
    };
    let top = sym_eigenvalues(&gram)?.first().copied().unwrap_or(T::zero());
    Ok(top.max(T::zero()).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn all_ones_plus_identity_spectrum() {
        let s = Mat::from_rows(&[[2.0, 1.0, 1.0], [1.0, 2.0, 1.0], [1.0, 1.0, 2.0]]);
        let vals = sym_eigenvalues(&s).unwrap();
        assert!(close(vals[0], 4.0, 1e-12));
        assert!(close(vals[1], 1.0, 1e-12));
        assert!(close(vals[2], 1.0, 1e-12));
    }

    #[test]
    fn identity_spectrum() {
        let vals = sym_eigenvalues(&Mat::<f64>::identity(3)).unwrap();
        assert_eq!(vals, vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn two_by_two_characteristic_polynomial() {
        // trace 5/3, determinant 4/9 -> roots 4/3 and 1/3
        let r2 = 2f64.sqrt();
        let u = Mat::from_rows(&[[2.0, r2], [r2, 3.0]]).scale(1.0 / 3.0);
        let vals = sym_eigenvalues(&u).unwrap();
        assert!(close(vals[0], 4.0 / 3.0, 1e-12));
        assert!(close(vals[1], 1.0 / 3.0, 1e-12));
    }

    #[test]
    fn rejects_asymmetric_input() {
        let m = Mat::from_rows(&[[1.0, 2.0], [0.0, 1.0]]);
        assert!(matches!(sym_eigen(&m, false), Err(Error::NotSymmetric { .. })));
    }

    #[test]
    fn reconstruction_and_orthogonality() {
        let n = 9;
        let m = Mat::from_fn(n, n, |i, j| {
            let (a, b) = (i.min(j) as f64, i.max(j) as f64);
            ((a * 1.7 + b * 0.3).sin() * 3.0).round() / 2.0 + if i == j { 1.5 } else { 0.0 }
        });
        let eig = sym_eigen(&m, true).unwrap();
        let q = eig.vectors.unwrap();
        let recon = q.matmul(&Mat::diag(&eig.values)).matmul(&q.transpose());
        assert!((&m - &recon).frobenius_norm() <= 1e-9 * m.frobenius_norm());
        let qtq = q.transpose().matmul(&q);
        assert!(qtq.max_abs_diff(&Mat::identity(n)) < 1e-12);
        assert!(eig.values.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn works_in_single_precision() {
        let s = Mat::<f32>::from_rows(&[[2.0, 1.0], [1.0, 2.0]]);
        let vals = sym_eigenvalues(&s).unwrap();
        assert!((vals[0] - 3.0).abs() < 1e-5 && (vals[1] - 1.0).abs() < 1e-5);
    }

    #[test]
    fn spectral_norm_of_rank_one() {
        let m = Mat::from_rows(&[[3.0, 4.0]]);
        assert!(close(spectral_norm(&m).unwrap(), 5.0, 1e-12));
    }
}
