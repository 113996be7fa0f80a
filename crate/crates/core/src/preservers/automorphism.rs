use alloc::format;

use super::maps::LinearMap;
use super::{MatrixMap, PreserverError};
use crate::birkhoff::sample;
use crate::matrix::Matrix;
use crate::rng::SplitMix64;
use crate::scalar::Scalar;
use crate::stochastic::{is_member, StochasticClass};

/// `A -> P A P^{-1}` on a span algebra. On `<DS_2>` only `P = I` and
/// `P = diag(1, -1)` are accepted; elsewhere `P` must be an invertible member.
pub fn automorphism(space: StochasticClass, p: &Matrix) -> Result<LinearMap, PreserverError> {
    if !space.is_span_algebra() {
        return Err(PreserverError::InvalidP(format!("{space} is not a span algebra")));
    }
    let n = p.n();
    if space == StochasticClass::SpanDS && n == 2 {
        let flip = Matrix::diagonal(&[Scalar::one(), Scalar::from_int(-1)]);
        if *p != Matrix::identity(2) && *p != flip {
            return Err(PreserverError::InvalidP("on <DS_2> P must be I or diag(1,-1)".into()));
        }
    } else if !is_member(p, space) {
        return Err(PreserverError::InvalidP(format!("P is not in {space}")));
    }
    let p_inv = p.inverse().map_err(|_| PreserverError::InvalidP("P is singular".into()))?;
    LinearMap::from_fn(space, n, |a| &(p * a) * &p_inv)
}

/// Unitality, then multiplicativity on `pairs` seeded random pairs. Closure
/// is structural: a [`LinearMap`] cannot leave its domain.
pub fn automorphism_check(map: &LinearMap, pairs: usize, seed: u64) -> bool {
    let space = map.domain_space();
    let n = map.n();
    if map.apply(&Matrix::identity(n)) != Matrix::identity(n) || !map.is_bijective() {
        return false;
    }
    let mut rng = SplitMix64::new(seed);
    (0..pairs).all(|_| {
        let a = sample(space, n, 1, 6, &mut rng);
        let b = sample(space, n, 1, 6, &mut rng);
        map.apply(&(&a * &b)) == &map.apply(&a) * &map.apply(&b)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    #[test]
    fn identity_conjugation() {
        for space in [StochasticClass::SpanDS, StochasticClass::SpanRS, StochasticClass::SpanCS] {
            let m = automorphism(space, &Matrix::identity(3)).unwrap();
            assert_eq!(m, LinearMap::identity(space, 3).unwrap());
            assert!(automorphism_check(&m, 10, 1));
        }
    }

    #[test]
    fn two_by_two_flip() {
        let flip = Matrix::diagonal(&[Scalar::one(), Scalar::from_int(-1)]);
        let m = automorphism(StochasticClass::SpanDS, &flip).unwrap();
        assert!(automorphism_check(&m, 20, 2));
        let a = Matrix::from_ints(&[&[1, 4], &[4, 1]]).unwrap();
        assert_eq!(m.apply(&a), Matrix::from_ints(&[&[1, -4], &[-4, 1]]).unwrap());
        let other = Matrix::from_ints(&[&[2, 1], &[1, 2]]).unwrap();
        assert!(matches!(automorphism(StochasticClass::SpanDS, &other), Err(PreserverError::InvalidP(_))));
    }

    #[test]
    fn rank_one_update_in_row_span() {
        let t = Scalar::frac(1, 2);
        let v: Vec<Scalar> = [t.clone(), -t, Scalar::zero()].into();
        let e: Vec<Scalar> = (0..3).map(|_| Scalar::one()).collect();
        let p = &Matrix::identity(3) + &Matrix::outer(&e, &v);
        let m = automorphism(StochasticClass::SpanRS, &p).unwrap();
        assert!(automorphism_check(&m, 100, 3));
    }

    #[test]
    fn rejects_outside_or_singular() {
        let g = Matrix::from_ints(&[&[1, 2, 0], &[0, 1, 0], &[0, 0, 1]]).unwrap();
        assert!(automorphism(StochasticClass::SpanDS, &g).is_err());
        assert!(automorphism(StochasticClass::SpanDS, &Matrix::ones(3)).is_err());
    }
}
