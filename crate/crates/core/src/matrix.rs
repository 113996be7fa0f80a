//! Dense square matrices over [`Scalar`].

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Index, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::linalg;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MatrixError {
    #[error("matrix must have at least one row")]
    Empty,
    #[error("matrix is not square: row {row} has {len} entries, expected {n}")]
    NotSquare { row: usize, len: usize, n: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is singular")]
    Singular,
}

/// Numerators over the lcm of the denominators.
pub(crate) fn integer_form(v: &[Scalar]) -> (Vec<BigInt>, BigInt) {
    let d = v.iter().fold(BigInt::one(), |acc, x| if x.denom().is_one() { acc } else { acc.lcm(x.denom()) });
    let nums = v.iter().map(|x| if x.denom() == &d { x.numer().clone() } else { x.numer() * (&d / x.denom()) }).collect();
    (nums, d)
}

pub(crate) fn from_integer_form(nums: Vec<BigInt>, d: &BigInt) -> Vec<Scalar> {
    nums.into_iter().map(|x| Scalar::from_bigints(x, d.clone()).expect("nonzero denominator")).collect()
}

/// An `n x n` matrix with exact rational entries, stored row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Matrix {
    n: usize,
    entries: Vec<Scalar>,
}

impl Matrix {
    pub fn zero(n: usize) -> Self {
        assert!(n >= 1, "matrix dimension must be at least 1");
        Matrix { n, entries: vec![Scalar::zero(); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, |i, j| if i == j { Scalar::one() } else { Scalar::zero() })
    }

    /// The all-ones matrix `J = e e^t`.
    pub fn ones(n: usize) -> Self {
        Self::from_fn(n, |_, _| Scalar::one())
    }

    /// `E_{ij}`: a single 1 at `(i, j)`.
    pub fn unit(n: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zero(n);
        m.set(i, j, Scalar::one());
        m
    }

    pub fn diagonal(diag: &[Scalar]) -> Self {
        Self::from_fn(diag.len(), |i, j| if i == j { diag[i].clone() } else { Scalar::zero() })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Scalar) -> Self {
        assert!(n >= 1, "matrix dimension must be at least 1");
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                entries.push(f(i, j));
            }
        }
        Matrix { n, entries }
    }

    pub fn from_rows(rows: Vec<Vec<Scalar>>) -> Result<Self, MatrixError> {
        let n = rows.len();
        if n == 0 {
            return Err(MatrixError::Empty);
        }
        let mut entries = Vec::with_capacity(n * n);
        for (row, r) in rows.into_iter().enumerate() {
            if r.len() != n {
                return Err(MatrixError::NotSquare { row, len: r.len(), n });
            }
            entries.extend(r);
        }
        Ok(Matrix { n, entries })
    }

    /// Convenience constructor from small integers.
    pub fn from_ints(rows: &[&[i64]]) -> Result<Self, MatrixError> {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&v| Scalar::from_int(v)).collect())
                .collect(),
        )
    }

    /// `u v^t`.
    pub fn outer(u: &[Scalar], v: &[Scalar]) -> Self {
        assert_eq!(u.len(), v.len(), "outer product of vectors of different length");
        Self::from_fn(u.len(), |i, j| &u[i] * &v[j])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> Option<&Scalar> {
        if i < self.n && j < self.n {
            Some(&self.entries[i * self.n + j])
        } else {
            None
        }
    }

    pub fn set(&mut self, i: usize, j: usize, v: Scalar) {
        assert!(i < self.n && j < self.n, "index ({i}, {j}) out of bounds for n = {}", self.n);
        self.entries[i * self.n + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Scalar] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Scalar]> {
        self.entries.chunks(self.n)
    }

    pub fn column(&self, j: usize) -> Vec<Scalar> {
        (0..self.n).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn entries(&self) -> &[Scalar] {
        &self.entries
    }

    pub fn to_rows(&self) -> Vec<Vec<Scalar>> {
        self.rows().map(|r| r.to_vec()).collect()
    }

    pub fn row_sum(&self, i: usize) -> Scalar {
        self.row(i).iter().sum()
    }

    pub fn col_sum(&self, j: usize) -> Scalar {
        (0..self.n).map(|i| &self[(i, j)]).sum()
    }

    pub fn total(&self) -> Scalar {
        self.entries.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Scalar::is_zero)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.entries.iter().all(|v| !v.is_negative())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n, |i, j| self[(j, i)].clone())
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        Matrix { n: self.n, entries: self.entries.iter().map(|v| v * c).collect() }
    }

    pub fn map(&self, f: impl FnMut(&Scalar) -> Scalar) -> Self {
        Matrix { n: self.n, entries: self.entries.iter().map(f).collect() }
    }

    pub fn trace(&self) -> Scalar {
        (0..self.n).map(|i| &self[(i, i)]).sum()
    }

    /// `A v`.
    pub fn mul_vec(&self, v: &[Scalar]) -> Vec<Scalar> {
        assert_eq!(v.len(), self.n);
        self.rows()
            .map(|r| r.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `v^t A`.
    pub fn vec_mul(&self, v: &[Scalar]) -> Vec<Scalar> {
        assert_eq!(v.len(), self.n);
        (0..self.n)
            .map(|j| (0..self.n).map(|i| &v[i] * &self[(i, j)]).sum())
            .collect()
    }

    pub fn checked_mul(&self, rhs: &Matrix) -> Result<Matrix, MatrixError> {
        if self.n != rhs.n {
            return Err(MatrixError::DimensionMismatch { expected: self.n, found: rhs.n });
        }
        let n = self.n;
        // Multiply numerators over common denominators, reduce once per entry.
        let (a, da) = integer_form(&self.entries);
        let (b, db) = integer_form(&rhs.entries);
        let mut out = vec![BigInt::zero(); n * n];
        for i in 0..n {
            for k in 0..n {
                let x = &a[i * n + k];
                if x.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let y = &b[k * n + j];
                    if !y.is_zero() {
                        out[i * n + j] += x * y;
                    }
                }
            }
        }
        Ok(Matrix { n, entries: from_integer_form(out, &(da * db)) })
    }

    pub fn pow(&self, k: u32) -> Matrix {
        (0..k).fold(Matrix::identity(self.n), |acc, _| &acc * self)
    }

    /// Determinant by fraction-free (Bareiss) elimination.
    pub fn det(&self) -> Scalar {
        let n = self.n;
        let mut a = self.to_rows();
        let mut sign = false;
        let mut prev = Scalar::one();
        for k in 0..n {
            if a[k][k].is_zero() {
                match (k + 1..n).find(|&r| !a[r][k].is_zero()) {
                    Some(r) => {
                        a.swap(k, r);
                        sign = !sign;
                    }
                    None => return Scalar::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = &(&a[i][j] * &a[k][k]) - &(&a[i][k] * &a[k][j]);
                    a[i][j] = &v / &prev;
                }
            }
            prev = a[k][k].clone();
        }
        let d = a[n - 1][n - 1].clone();
        if sign {
            -d
        } else {
            d
        }
    }

    pub fn is_invertible(&self) -> bool {
        !self.det().is_zero()
    }

    /// Exact inverse by Gauss-Jordan elimination.
    pub fn inverse(&self) -> Result<Matrix, MatrixError> {
        let n = self.n;
        let b: Vec<Vec<Scalar>> = Matrix::identity(n).to_rows();
        let x = linalg::solve(&self.to_rows(), &b).ok_or(MatrixError::Singular)?;
        Matrix::from_rows(x)
    }

    pub fn rank(&self) -> usize {
        linalg::rank(&self.to_rows())
    }

    /// Row-major flattening, used as coordinates in `M_n`.
    pub fn vectorize(&self) -> Vec<Scalar> {
        self.entries.clone()
    }

    pub fn from_vector(n: usize, v: Vec<Scalar>) -> Result<Matrix, MatrixError> {
        if v.len() != n * n || n == 0 {
            return Err(MatrixError::DimensionMismatch { expected: n * n, found: v.len() });
        }
        Ok(Matrix { n, entries: v })
    }

    /// Product of a nonempty sequence of matrices, left to right.
    pub fn product<'a>(factors: impl IntoIterator<Item = &'a Matrix>) -> Option<Matrix> {
        let mut it = factors.into_iter();
        let first = it.next()?.clone();
        Some(it.fold(first, |acc, m| &acc * m))
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = Scalar;

    fn index(&self, (i, j): (usize, usize)) -> &Scalar {
        assert!(i < self.n && j < self.n, "index ({i}, {j}) out of bounds for n = {}", self.n);
        &self.entries[i * self.n + j]
    }
}

impl<'a, 'b> Mul<&'b Matrix> for &'a Matrix {
    type Output = Matrix;

    /// Panics on a dimension mismatch; use [`Matrix::checked_mul`] otherwise.
    fn mul(self, rhs: &'b Matrix) -> Matrix {
        self.checked_mul(rhs).expect("matrix dimensions differ")
    }
}

impl<'a, 'b> Add<&'b Matrix> for &'a Matrix {
    type Output = Matrix;

    fn add(self, rhs: &'b Matrix) -> Matrix {
        assert_eq!(self.n, rhs.n, "matrix dimensions differ");
        Matrix {
            n: self.n,
            entries: self.entries.iter().zip(&rhs.entries).map(|(a, b)| a + b).collect(),
        }
    }
}

impl<'a, 'b> Sub<&'b Matrix> for &'a Matrix {
    type Output = Matrix;

    fn sub(self, rhs: &'b Matrix) -> Matrix {
        assert_eq!(self.n, rhs.n, "matrix dimensions differ");
        Matrix {
            n: self.n,
            entries: self.entries.iter().zip(&rhs.entries).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &Matrix {
    type Output = Matrix;

    fn neg(self) -> Matrix {
        self.map(|v| -v)
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, r) in self.rows().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            f.write_str("[")?;
            for (j, v) in r.iter().enumerate() {
                if j > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{v}")?;
            }
            f.write_str("]")?;
        }
        f.write_str("]")
    }
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}
