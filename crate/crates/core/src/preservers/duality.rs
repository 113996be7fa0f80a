use super::maps::LinearMap;
use super::PreserverError;
use crate::matrix::Matrix;
use crate::stochastic::{span_basis, SpaceError, StochasticClass};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GramReport {
    /// `G_kl = tr(B_k B_l)` over the span basis.
    pub gram: Matrix,
    pub invertible: bool,
}

/// Gram matrix of the trace form on a span algebra.
pub fn gram_nondegenerate(space: StochasticClass, n: usize) -> Result<GramReport, PreserverError> {
    let basis = span_basis(space, n)?;
    let b = &basis.elements;
    let gram = Matrix::from_fn(b.len(), |k, l| (&b[k] * &b[l]).trace());
    let invertible = gram.is_invertible();
    Ok(GramReport { gram, invertible })
}

/// The unique linear `psi` with `tr(phi(A) psi(B)) = tr(AB)` on the domain
/// of `phi`.
///
/// With `R` the matrix of `phi` and `G` the Gram matrix, the condition on
/// basis pairs reads `R^t G S = G`, so `S = (R^t G)^{-1} G`.
pub fn dual_partner(phi: &LinearMap) -> Result<LinearMap, PreserverError> {
    let space = phi.domain_space();
    let n = phi.basis().n;
    let g = gram_nondegenerate(space, n)?;
    if !g.invertible {
        return Err(SpaceError::Unsupported(space).into());
    }
    let lhs = &phi.rep().transpose() * &g.gram;
    let inv = lhs.inverse().map_err(|_| PreserverError::SingularMap)?;
    LinearMap::from_rep(space, n, &inv * &g.gram)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::preservers::MatrixMap;
    use crate::scalar::Scalar;

    #[test]
    fn two_by_two_gram() {
        // Basis {[[1,-1],[-1,1]], I}: tr(D^2) = 4, tr(D) = 2, tr(I) = 2.
        let g = gram_nondegenerate(StochasticClass::SpanDS, 2).unwrap();
        assert_eq!(g.gram, Matrix::from_ints(&[&[4, 2], &[2, 2]]).unwrap());
        assert_eq!(g.gram.det(), Scalar::from_int(4));
        assert!(g.invertible);
        assert!(!gram_nondegenerate(StochasticClass::SpanRS, 2).unwrap().invertible);
        assert!(!gram_nondegenerate(StochasticClass::SpanCS, 3).unwrap().invertible);
    }

    #[test]
    fn partners_of_simple_maps() {
        let id = LinearMap::identity(StochasticClass::SpanDS, 3).unwrap();
        assert_eq!(dual_partner(&id).unwrap(), id);
        let two = id.scale(&Scalar::from_int(2));
        assert_eq!(dual_partner(&two).unwrap(), id.scale(&Scalar::frac(1, 2)));
        let t = LinearMap::from_fn(StochasticClass::SpanDS, 3, |a| a.transpose()).unwrap();
        assert_eq!(dual_partner(&t).unwrap(), t);
    }

    #[test]
    fn singular_map_rejected() {
        let zero = LinearMap::from_fn(StochasticClass::SpanDS, 2, |_| Matrix::zero(2)).unwrap();
        assert_eq!(dual_partner(&zero), Err(PreserverError::SingularMap));
    }

    #[test]
    fn defining_identity_on_basis() {
        let p = crate::birkhoff::random_invertible(StochasticClass::SpanDS, 3, 5).unwrap();
        let pi = p.inverse().unwrap();
        let phi = LinearMap::from_fn(StochasticClass::SpanDS, 3, |a| &(&p * a) * &pi).unwrap();
        let psi = dual_partner(&phi).unwrap();
        for a in &phi.basis().elements {
            for b in &phi.basis().elements {
                assert_eq!((&phi.apply(a) * &psi.apply(b)).trace(), (a * b).trace());
            }
        }
    }
}
