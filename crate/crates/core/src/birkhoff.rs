//! Birkhoff-von Neumann decomposition and seeded generation of matrices in
//! every stochastic class.

use alloc::vec::Vec;

use crate::matching::perfect_matching;
use crate::matrix::Matrix;
use crate::permutation::Permutation;
use crate::rng::SplitMix64;
use crate::scalar::Scalar;
use crate::stochastic::{is_member, span_basis, StochasticClass};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BirkhoffError {
    #[error("matrix is not doubly stochastic")]
    NotDoublyStochastic,
    /// Unreachable on valid input; reported rather than panicking.
    #[error("internal error: no perfect matching in the positive support after {terms} terms")]
    MatchingFailure { terms: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BirkhoffTerm {
    pub weight: Scalar,
    pub perm: Permutation,
}

/// `A = sum weight_k * P_k` with positive weights summing to one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BirkhoffDecomposition {
    pub n: usize,
    pub terms: Vec<BirkhoffTerm>,
}

impl BirkhoffDecomposition {
    pub fn reconstruct(&self) -> Matrix {
        self.terms.iter().fold(Matrix::zero(self.n), |acc, t| &acc + &t.perm.to_matrix().scale(&t.weight))
    }

    pub fn weight_sum(&self) -> Scalar {
        self.terms.iter().map(|t| &t.weight).sum()
    }

    /// `(n-1)^2 + 1`.
    pub fn term_bound(n: usize) -> usize {
        (n - 1) * (n - 1) + 1
    }
}

/// Greedy peeling: match inside the positive support, subtract the smallest
/// matched entry, repeat until nothing is left.
pub fn birkhoff_decompose(a: &Matrix) -> Result<BirkhoffDecomposition, BirkhoffError> {
    if !is_member(a, StochasticClass::DS) {
        return Err(BirkhoffError::NotDoublyStochastic);
    }
    let n = a.n();
    let mut residual = a.clone();
    let mut terms: Vec<BirkhoffTerm> = Vec::new();
    while !residual.is_zero() {
        let adj: Vec<Vec<usize>> = residual
            .rows()
            .map(|r| (0..n).filter(|&j| r[j].is_positive()).collect())
            .collect();
        let image = perfect_matching(&adj).ok_or(BirkhoffError::MatchingFailure { terms: terms.len() })?;
        let weight = image
            .iter()
            .enumerate()
            .map(|(i, &j)| residual[(i, j)].clone())
            .min()
            .expect("n >= 1");
        for (i, &j) in image.iter().enumerate() {
            let v = &residual[(i, j)] - &weight;
            residual.set(i, j, v);
        }
        let perm = Permutation::new(image).expect("matching is a bijection");
        match terms.iter_mut().find(|t| t.perm == perm) {
            Some(t) => t.weight += &weight,
            None => terms.push(BirkhoffTerm { weight, perm }),
        }
    }
    Ok(BirkhoffDecomposition { n, terms })
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SampleError {
    #[error("support_terms must be at least 1")]
    NoTerms,
    #[error("denominator_bound must be at least 1")]
    ZeroBound,
    #[error("dimension must be at least 1")]
    ZeroDimension,
    #[error("no invertible sample after {0} attempts")]
    ImprobableFailure(usize),
}

/// Parameters for deterministic generation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RandomSpec {
    pub space: StochasticClass,
    pub n: usize,
    /// Number of permutations mixed for `DS`.
    pub support_terms: usize,
    pub seed: u64,
    pub denominator_bound: u64,
}

impl RandomSpec {
    pub fn new(space: StochasticClass, n: usize, seed: u64) -> Self {
        RandomSpec { space, n, support_terms: n + 1, seed, denominator_bound: 6 }
    }

    pub fn with_terms(mut self, k: usize) -> Self {
        self.support_terms = k;
        self
    }

    pub fn with_bound(mut self, bound: u64) -> Self {
        self.denominator_bound = bound;
        self
    }
}

pub fn random_matrix(spec: &RandomSpec) -> Result<Matrix, SampleError> {
    validate(spec)?;
    let mut rng = SplitMix64::new(spec.seed);
    Ok(sample(spec.space, spec.n, spec.support_terms, spec.denominator_bound, &mut rng))
}

fn validate(spec: &RandomSpec) -> Result<(), SampleError> {
    if spec.support_terms < 1 {
        return Err(SampleError::NoTerms);
    }
    if spec.denominator_bound < 1 {
        return Err(SampleError::ZeroBound);
    }
    if spec.n < 1 {
        return Err(SampleError::ZeroDimension);
    }
    Ok(())
}

fn random_rational(rng: &mut SplitMix64, bound: u64) -> Scalar {
    let b = bound as i64;
    let p = rng.range_i64(-b, b);
    let q = rng.range_i64(1, b);
    Scalar::frac(p, q)
}

fn random_stochastic_rows(n: usize, bound: u64, rng: &mut SplitMix64) -> Matrix {
    let rows = (0..n)
        .map(|_| {
            let mut w: Vec<i64> = (0..n).map(|_| rng.range_i64(0, bound as i64)).collect();
            if w.iter().all(|&v| v == 0) {
                w[rng.index(n)] = 1;
            }
            let s: i64 = w.iter().sum();
            w.into_iter().map(|v| Scalar::frac(v, s)).collect()
        })
        .collect();
    Matrix::from_rows(rows).expect("square")
}

/// Draws one matrix of `space` from an existing stream.
pub fn sample(space: StochasticClass, n: usize, k: usize, bound: u64, rng: &mut SplitMix64) -> Matrix {
    use StochasticClass::*;
    let out = match space {
        DS => {
            let weights: Vec<i64> = (0..k).map(|_| rng.range_i64(1, bound as i64)).collect();
            let total: i64 = weights.iter().sum();
            let mut acc = Matrix::zero(n);
            for w in weights {
                let p = Permutation::new(rng.shuffled(n)).expect("shuffle is a bijection");
                acc = &acc + &p.to_matrix().scale(&Scalar::frac(w, total));
            }
            acc
        }
        RS => random_stochastic_rows(n, bound, rng),
        CS => random_stochastic_rows(n, bound, rng).transpose(),
        SpanDS | SpanRS | SpanCS => {
            let basis = span_basis(space, n).expect("span algebra");
            let coords: Vec<Scalar> = (0..basis.dim()).map(|_| random_rational(rng, bound)).collect();
            basis.combine(&coords).expect("coordinate count")
        }
        SpanR | SpanC => {
            let mut v: Vec<Scalar> = (0..n).map(|_| random_rational(rng, bound)).collect();
            let s: Scalar = v[..n - 1].iter().sum();
            v[n - 1] = -s;
            let ones: Vec<Scalar> = (0..n).map(|_| Scalar::one()).collect();
            if space == SpanR {
                Matrix::outer(&ones, &v)
            } else {
                Matrix::outer(&v, &ones)
            }
        }
        General => Matrix::from_fn(n, |_, _| random_rational(rng, bound)),
    };
    debug_assert!(is_member(&out, space));
    out
}

const INVERTIBLE_ATTEMPTS: usize = 64;

/// Rejection-samples `spec` until the determinant is nonzero.
pub fn random_invertible_with(spec: &RandomSpec) -> Result<Matrix, SampleError> {
    validate(spec)?;
    let mut rng = SplitMix64::new(spec.seed);
    for _ in 0..INVERTIBLE_ATTEMPTS {
        let m = sample(spec.space, spec.n, spec.support_terms, spec.denominator_bound, &mut rng);
        if m.is_invertible() {
            return Ok(m);
        }
    }
    Err(SampleError::ImprobableFailure(INVERTIBLE_ATTEMPTS))
}

pub fn random_invertible(space: StochasticClass, n: usize, seed: u64) -> Result<Matrix, SampleError> {
    random_invertible_with(&RandomSpec::new(space, n, seed))
}
