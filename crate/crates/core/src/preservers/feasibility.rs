use alloc::vec::Vec;

use crate::matrix::Matrix;
use crate::scalar::Scalar;

/// Outcome of the search for `w` with `sum w = 0` and `M + e w^t >= 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Feasibility {
    pub feasible: bool,
    /// `bounds[j] = -min_i M_ij`, the least admissible `w_j`.
    pub bounds: Vec<Scalar>,
    pub bound_sum: Scalar,
    pub witness: Option<Vec<Scalar>>,
}

/// Adding `e w^t` shifts column `j` by `w_j`, so the constraints decouple:
/// `w_j >= bounds[j]`, and a zero-sum `w` exists iff `sum bounds <= 0`.
pub fn rs_shift_feasible(m: &Matrix) -> Feasibility {
    let n = m.n();
    let bounds: Vec<Scalar> = (0..n)
        .map(|j| -(m.column(j).into_iter().min().expect("n >= 1")))
        .collect();
    let bound_sum: Scalar = bounds.iter().sum();
    let feasible = !bound_sum.is_positive();
    let witness = feasible.then(|| {
        let mut w = bounds.clone();
        w[0] -= &bound_sum;
        w
    });
    Feasibility { feasible, bounds, bound_sum, witness }
}

/// `B = sum_{i <= floor(n/2)} E_i1 + sum_{j > floor(n/2)} E_j2`, a member of
/// `RS_n` for `n >= 2`.
pub fn example_b(n: usize) -> Matrix {
    let h = n / 2;
    Matrix::from_fn(n, |i, j| {
        let col = if i < h { 0 } else { 1 };
        if j == col {
            Scalar::one()
        } else {
            Scalar::zero()
        }
    })
}

/// `((floor((n+1)/2) - 1)/n) floor(n/2) + ((floor(n/2) - 1)/n) floor((n+1)/2)`,
/// the lower bound on `sum w` forced by `(B_DS)^t + e w^t >= 0`.
pub fn example_bound(n: usize) -> Scalar {
    let (lo, hi) = ((n / 2) as i64, n.div_ceil(2) as i64);
    let nn = n as i64;
    Scalar::frac((hi - 1) * lo, nn) + Scalar::frac((lo - 1) * hi, nn)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stochastic::{ds_part, is_member, StochasticClass};
    use alloc::vec;

    #[test]
    fn nonnegative_is_feasible_with_zero_shift() {
        let m = Matrix::from_ints(&[&[0, 1], &[2, 0]]).unwrap();
        let f = rs_shift_feasible(&m);
        assert!(f.feasible);
        assert!(f.witness.unwrap().iter().all(|w| w.is_zero()));
    }

    #[test]
    fn small_feasible_witness() {
        let m = Matrix::from_ints(&[&[-1, 2], &[0, 1]]).unwrap();
        let f = rs_shift_feasible(&m);
        assert!(f.feasible);
        assert_eq!(f.witness.unwrap(), vec![Scalar::one(), Scalar::from_int(-1)]);
    }

    #[test]
    fn example_at_three_is_infeasible() {
        let b = example_b(3);
        assert!(is_member(&b, StochasticClass::RS));
        let m = ds_part(&b).transpose();
        let t = Scalar::frac(1, 3);
        let expected = Matrix::from_rows(vec![
            vec![Scalar::one(), Scalar::zero(), Scalar::zero()],
            vec![-t.clone(), Scalar::frac(2, 3), Scalar::frac(2, 3)],
            vec![t.clone(), t.clone(), t.clone()],
        ])
        .unwrap();
        assert_eq!(m, expected);
        let f = rs_shift_feasible(&m);
        assert!(!f.feasible);
        assert_eq!(f.bound_sum, t);
        assert_eq!(example_bound(3), Scalar::frac(1, 3));
    }
}
