//! Permutations of `{0, .., n-1}` and their 0/1 matrices.
//!
//! Convention: the matrix of `p` has its row-`i` one in column `p.image()[i]`,
//! so `P e_{p(i)} = e_i` and `(P A P^t)_{ij} = A_{p(i) p(j)}`.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::matrix::Matrix;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PermutationError {
    #[error("not a permutation matrix")]
    NotPermutation,
    #[error("image {0:?} is not a bijection on 0..n")]
    NotBijection(Vec<usize>),
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    image: Vec<usize>,
}

impl Permutation {
    pub fn new(image: Vec<usize>) -> Result<Self, PermutationError> {
        let n = image.len();
        let mut seen = vec![false; n];
        for &v in &image {
            if v >= n || seen[v] {
                return Err(PermutationError::NotBijection(image));
            }
            seen[v] = true;
        }
        if n == 0 {
            return Err(PermutationError::NotBijection(image));
        }
        Ok(Permutation { image })
    }

    /// Accepts a 1-based image list, as used in the JSON formats.
    pub fn from_one_based(image: &[usize]) -> Result<Self, PermutationError> {
        if image.contains(&0) {
            return Err(PermutationError::NotBijection(image.to_vec()));
        }
        Self::new(image.iter().map(|v| v - 1).collect())
    }

    pub fn identity(n: usize) -> Self {
        Permutation { image: (0..n).collect() }
    }

    /// Transposition of `i` and `j`.
    pub fn swap(n: usize, i: usize, j: usize) -> Self {
        let mut image: Vec<usize> = (0..n).collect();
        image.swap(i, j);
        Permutation { image }
    }

    pub fn n(&self) -> usize {
        self.image.len()
    }

    pub fn image(&self) -> &[usize] {
        &self.image
    }

    pub fn apply(&self, i: usize) -> usize {
        self.image[i]
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.image.iter().map(|v| v + 1).collect()
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.n()];
        for (i, &v) in self.image.iter().enumerate() {
            inv[v] = i;
        }
        Permutation { image: inv }
    }

    /// The permutation whose matrix is `self.to_matrix() * other.to_matrix()`.
    pub fn then(&self, other: &Permutation) -> Self {
        assert_eq!(self.n(), other.n());
        Permutation { image: self.image.iter().map(|&k| other.image[k]).collect() }
    }

    pub fn fixed_points(&self) -> usize {
        self.image.iter().enumerate().filter(|(i, v)| i == *v).count()
    }

    pub fn is_identity(&self) -> bool {
        self.image.iter().enumerate().all(|(i, &v)| i == v)
    }

    pub fn to_matrix(&self) -> Matrix {
        perm_to_matrix(self)
    }

    /// All `n!` permutations in lexicographic order of their images.
    pub fn all(n: usize) -> AllPermutations {
        AllPermutations { next: Some((0..n).collect()) }
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Permutation{:?}", self.one_based())
    }
}

/// Lexicographic permutation iterator.
pub struct AllPermutations {
    next: Option<Vec<usize>>,
}

impl Iterator for AllPermutations {
    type Item = Permutation;

    fn next(&mut self) -> Option<Permutation> {
        let cur = self.next.take()?;
        if cur.is_empty() {
            return None;
        }
        let mut succ = cur.clone();
        let n = succ.len();
        let pivot = (0..n.saturating_sub(1)).rev().find(|&i| succ[i] < succ[i + 1]);
        if let Some(i) = pivot {
            let j = (i + 1..n).rev().find(|&j| succ[j] > succ[i]).expect("successor exists");
            succ.swap(i, j);
            succ[i + 1..].reverse();
            self.next = Some(succ);
        }
        Some(Permutation { image: cur })
    }
}

pub fn perm_to_matrix(p: &Permutation) -> Matrix {
    Matrix::from_fn(p.n(), |i, j| if p.image[i] == j { Scalar::one() } else { Scalar::zero() })
}

/// Succeeds iff `a` has exactly one 1 in each row and column and 0 elsewhere.
pub fn matrix_to_perm(a: &Matrix) -> Result<Permutation, PermutationError> {
    let n = a.n();
    let mut image = Vec::with_capacity(n);
    for r in a.rows() {
        let mut hit = None;
        for (j, v) in r.iter().enumerate() {
            if v.is_zero() {
                continue;
            }
            if !v.is_one() || hit.is_some() {
                return Err(PermutationError::NotPermutation);
            }
            hit = Some(j);
        }
        image.push(hit.ok_or(PermutationError::NotPermutation)?);
    }
    Permutation::new(image).map_err(|_| PermutationError::NotPermutation)
}

pub fn is_permutation_matrix(a: &Matrix) -> bool {
    matrix_to_perm(a).is_ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_maps_to_identity_matrix() {
        assert_eq!(perm_to_matrix(&Permutation::identity(3)), Matrix::identity(3));
    }

    #[test]
    fn swap_matrix() {
        let a = Matrix::from_ints(&[&[0, 1], &[1, 0]]).unwrap();
        assert_eq!(matrix_to_perm(&a).unwrap(), Permutation::swap(2, 0, 1));
    }

    #[test]
    fn fractional_is_not_permutation() {
        let h = Scalar::frac(1, 2);
        let a = Matrix::from_rows(vec![vec![h.clone(), h.clone()], vec![h.clone(), h]]).unwrap();
        assert_eq!(matrix_to_perm(&a), Err(PermutationError::NotPermutation));
        let b = Matrix::from_ints(&[&[1, 0], &[1, 0]]).unwrap();
        assert_eq!(matrix_to_perm(&b), Err(PermutationError::NotPermutation));
        let c = Matrix::from_ints(&[&[2, 0], &[0, 1]]).unwrap();
        assert_eq!(matrix_to_perm(&c), Err(PermutationError::NotPermutation));
    }

    #[test]
    fn enumerates_factorial_many() {
        assert_eq!(Permutation::all(1).count(), 1);
        assert_eq!(Permutation::all(4).count(), 24);
        let v: Vec<_> = Permutation::all(3).map(|p| p.one_based()).collect();
        assert_eq!(v[0], vec![1, 2, 3]);
        assert_eq!(v[5], vec![3, 2, 1]);
    }

    #[test]
    fn composition_matches_matrix_product() {
        for p in Permutation::all(4) {
            for q in Permutation::all(4).step_by(5) {
                assert_eq!(p.then(&q).to_matrix(), &p.to_matrix() * &q.to_matrix());
            }
            assert_eq!(p.inverse().to_matrix(), p.to_matrix().transpose());
            assert_eq!(p.to_matrix().trace(), Scalar::from_int(p.fixed_points() as i64));
        }
    }

    #[test]
    fn rejects_bad_images() {
        assert!(Permutation::new(vec![0, 0]).is_err());
        assert!(Permutation::new(vec![0, 2]).is_err());
        assert!(Permutation::from_one_based(&[0, 1]).is_err());
    }
}
