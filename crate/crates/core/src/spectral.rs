//! Identities linking a product of matrices in `<RS_n>` or `<CS_n>` to the
//! product of their doubly stochastic parts.

use alloc::vec::Vec;

use crate::charpoly::charpoly;
use crate::matrix::{Matrix, MatrixError};
use crate::permutation::{matrix_to_perm, Permutation};
use crate::scalar::Scalar;
use crate::stochastic::{ds_part, is_member, StochasticClass};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SpectralError {
    #[error("chain has no factors")]
    EmptyChain,
    #[error("factor {index} has dimension {found}, expected {expected}")]
    DimensionMismatch { index: usize, expected: usize, found: usize },
    #[error("factor {index} is not in {space}")]
    NotMember { index: usize, space: StochasticClass },
    #[error("operation does not accept space {0}")]
    UnsupportedSpace(StochasticClass),
    #[error("matrix is not in <RS_n> or <CS_n>")]
    NotInSpan,
    #[error("matrix is singular")]
    SingularMatrix,
    #[error("doubly stochastic part is singular although the matrix is not")]
    SingularDsPart,
}

/// A validated list of same-size factors, all members of `space`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProductChain {
    factors: Vec<Matrix>,
    space: StochasticClass,
}

impl ProductChain {
    pub fn new(factors: Vec<Matrix>, space: StochasticClass) -> Result<Self, SpectralError> {
        let n = factors.first().ok_or(SpectralError::EmptyChain)?.n();
        for (index, f) in factors.iter().enumerate() {
            if f.n() != n {
                return Err(SpectralError::DimensionMismatch { index, expected: n, found: f.n() });
            }
            if !is_member(f, space) {
                return Err(SpectralError::NotMember { index, space });
            }
        }
        Ok(ProductChain { factors, space })
    }

    pub fn factors(&self) -> &[Matrix] {
        &self.factors
    }

    pub fn space(&self) -> StochasticClass {
        self.space
    }

    pub fn n(&self) -> usize {
        self.factors[0].n()
    }

    pub fn product(&self) -> Matrix {
        Matrix::product(&self.factors).expect("nonempty, validated")
    }

    fn require_span_of_rs_or_cs(&self) -> Result<(), SpectralError> {
        match self.space.span() {
            StochasticClass::SpanDS | StochasticClass::SpanRS | StochasticClass::SpanCS => Ok(()),
            s => Err(SpectralError::UnsupportedSpace(s)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DsProductCheck {
    pub lhs: Matrix,
    pub rhs: Matrix,
    pub equal: bool,
}

/// `(A_1 ... A_m)_DS` against `(A_1)_DS ... (A_m)_DS`.
pub fn ds_part_of_product(chain: &ProductChain) -> Result<DsProductCheck, SpectralError> {
    chain.require_span_of_rs_or_cs()?;
    let lhs = ds_part(&chain.product());
    let parts: Vec<Matrix> = chain.factors.iter().map(ds_part).collect();
    let rhs = Matrix::product(&parts).expect("nonempty");
    let equal = lhs == rhs;
    Ok(DsProductCheck { lhs, rhs, equal })
}

/// Which of the transfer identities held.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransferReport {
    pub full_charpoly: bool,
    pub full_trace: bool,
    /// One entry per factor: product with that factor replaced by its DS part.
    pub mixed_charpoly: Vec<bool>,
    pub mixed_trace: Vec<bool>,
}

impl TransferReport {
    pub fn holds(&self) -> bool {
        self.full_charpoly
            && self.full_trace
            && self.mixed_charpoly.iter().all(|&b| b)
            && self.mixed_trace.iter().all(|&b| b)
    }
}

pub fn spectrum_transfer_report(chain: &ProductChain) -> Result<TransferReport, SpectralError> {
    chain.require_span_of_rs_or_cs()?;
    let product = chain.product();
    let reference = charpoly(&product);
    let reference_trace = product.trace();
    let parts: Vec<Matrix> = chain.factors.iter().map(ds_part).collect();
    let all_ds = Matrix::product(&parts).expect("nonempty");

    let mut mixed_charpoly = Vec::with_capacity(parts.len());
    let mut mixed_trace = Vec::with_capacity(parts.len());
    for i in 0..parts.len() {
        let mixed = Matrix::product(chain.factors.iter().enumerate().map(|(k, f)| if k == i { &parts[k] } else { f }))
            .expect("nonempty");
        mixed_charpoly.push(charpoly(&mixed) == reference);
        mixed_trace.push(mixed.trace() == reference_trace);
    }
    Ok(TransferReport {
        full_charpoly: charpoly(&all_ds) == reference,
        full_trace: all_ds.trace() == reference_trace,
        mixed_charpoly,
        mixed_trace,
    })
}

pub fn spectrum_transfer_check(chain: &ProductChain) -> Result<bool, SpectralError> {
    spectrum_transfer_report(chain).map(|r| r.holds())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InverseCheck {
    pub inv: Matrix,
    pub ds_of_inv: Matrix,
    pub inv_of_ds: Matrix,
    /// `A^{-1}` lies in the same span algebra as `A`.
    pub same_space: bool,
}

impl InverseCheck {
    pub fn holds(&self) -> bool {
        self.ds_of_inv == self.inv_of_ds && self.same_space
    }
}

pub fn ds_inverse_check(a: &Matrix) -> Result<InverseCheck, SpectralError> {
    let space = [StochasticClass::SpanDS, StochasticClass::SpanRS, StochasticClass::SpanCS]
        .into_iter()
        .find(|&s| is_member(a, s))
        .ok_or(SpectralError::NotInSpan)?;
    let inv = a.inverse().map_err(|e| match e {
        MatrixError::Singular => SpectralError::SingularMatrix,
        _ => SpectralError::NotInSpan,
    })?;
    let inv_of_ds = ds_part(a).inverse().map_err(|_| SpectralError::SingularDsPart)?;
    Ok(InverseCheck { ds_of_inv: ds_part(&inv), same_space: is_member(&inv, space), inv, inv_of_ds })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PermutationProductCheck {
    pub product_perm: Option<Permutation>,
    pub all_factors_perm: bool,
}

impl PermutationProductCheck {
    /// A permutation product forces permutation factors.
    pub fn holds(&self) -> bool {
        self.product_perm.is_none() || self.all_factors_perm
    }
}

pub fn product_is_permutation(chain: &ProductChain) -> Result<PermutationProductCheck, SpectralError> {
    if !matches!(chain.space, StochasticClass::DS | StochasticClass::RS | StochasticClass::CS) {
        return Err(SpectralError::UnsupportedSpace(chain.space));
    }
    let product_perm = matrix_to_perm(&chain.product()).ok();
    let all_factors_perm = chain.factors.iter().all(|f| matrix_to_perm(f).is_ok());
    Ok(PermutationProductCheck { product_perm, all_factors_perm })
}

/// `tr(A B)` for the trace pairing used throughout.
pub fn trace_pairing(a: &Matrix, b: &Matrix) -> Scalar {
    (a * b).trace()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::birkhoff::{random_matrix, RandomSpec};
    use alloc::vec;

    fn chain(space: StochasticClass, n: usize, m: usize, seed: u64) -> ProductChain {
        let fs = (0..m).map(|k| random_matrix(&RandomSpec::new(space, n, seed * 31 + k as u64)).unwrap()).collect();
        ProductChain::new(fs, space).unwrap()
    }

    #[test]
    fn rejects_bad_chains() {
        assert_eq!(ProductChain::new(vec![], StochasticClass::RS), Err(SpectralError::EmptyChain));
        let bad = Matrix::from_ints(&[&[2, 0], &[0, 1]]).unwrap();
        assert_eq!(
            ProductChain::new(vec![Matrix::identity(2), bad], StochasticClass::RS),
            Err(SpectralError::NotMember { index: 1, space: StochasticClass::RS })
        );
        assert!(matches!(
            ProductChain::new(vec![Matrix::identity(2), Matrix::identity(3)], StochasticClass::DS),
            Err(SpectralError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn three_row_stochastic_factors() {
        let c = chain(StochasticClass::RS, 3, 3, 5);
        let r = ds_part_of_product(&c).unwrap();
        assert!(r.equal);
    }

    #[test]
    fn single_row_stochastic_keeps_spectrum_of_ds_part() {
        let a = Matrix::from_rows(vec![
            vec![Scalar::one(), Scalar::zero(), Scalar::zero()],
            vec![Scalar::one(), Scalar::zero(), Scalar::zero()],
            vec![Scalar::frac(1, 2), Scalar::frac(1, 2), Scalar::zero()],
        ])
        .unwrap();
        assert!(!crate::stochastic::decompose(&a).a_r.is_zero());
        assert_eq!(charpoly(&a), charpoly(&ds_part(&a)));
        let c = ProductChain::new(vec![a], StochasticClass::RS).unwrap();
        assert!(spectrum_transfer_check(&c).unwrap());
    }

    #[test]
    fn column_span_pair() {
        let c = chain(StochasticClass::SpanCS, 4, 2, 8);
        assert!(spectrum_transfer_check(&c).unwrap());
    }

    #[test]
    fn rank_one_update_inverse() {
        let t = Scalar::frac(1, 3);
        let v = vec![t.clone(), -t, Scalar::zero()];
        let e = vec![Scalar::one(); 3];
        let ev = Matrix::outer(&e, &v);
        let a = &Matrix::identity(3) + &ev;
        let r = ds_inverse_check(&a).unwrap();
        assert_eq!(r.inv, &Matrix::identity(3) - &ev);
        assert_eq!(r.ds_of_inv, Matrix::identity(3));
        assert_eq!(r.inv_of_ds, Matrix::identity(3));
        assert!(r.holds());
    }

    #[test]
    fn singular_rejected() {
        let a = Matrix::ones(3);
        assert_eq!(ds_inverse_check(&a), Err(SpectralError::SingularMatrix));
        let g = Matrix::from_ints(&[&[1, 2], &[3, 5]]).unwrap();
        assert_eq!(ds_inverse_check(&g), Err(SpectralError::NotInSpan));
    }

    #[test]
    fn permutation_products() {
        let p = Permutation::new(vec![1, 2, 0]).unwrap().to_matrix();
        let q = Permutation::swap(3, 0, 2).to_matrix();
        let r = product_is_permutation(&ProductChain::new(vec![p.clone(), q], StochasticClass::DS).unwrap()).unwrap();
        assert!(r.product_perm.is_some() && r.all_factors_perm);

        let h = Matrix::from_fn(2, |_, _| Scalar::frac(1, 2));
        let r = product_is_permutation(&ProductChain::new(vec![h.clone(), h], StochasticClass::DS).unwrap()).unwrap();
        assert!(r.product_perm.is_none() && !r.all_factors_perm);

        let pos = Matrix::from_fn(3, |i, j| if i == j { Scalar::frac(1, 2) } else { Scalar::frac(1, 4) });
        let r = product_is_permutation(&ProductChain::new(vec![p, pos], StochasticClass::DS).unwrap()).unwrap();
        assert!(r.product_perm.is_none());
        assert!(r.holds());
    }
}
