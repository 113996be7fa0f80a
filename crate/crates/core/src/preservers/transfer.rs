use alloc::boxed::Box;
use alloc::sync::Arc;
use alloc::vec::Vec;

use super::maps::{LinearMap, PreserverMap, ProjectedMap, Shift, ShiftedMap};
use super::verify::{verify, Property};
use super::{MatrixMap, PreserverError};
use crate::matrix::Matrix;
use crate::rng::SplitMix64;
use crate::scalar::Scalar;
use crate::stochastic::{decompose, ds_part, StochasticClass};

/// A nonlinear map `<RS_n> -> R_n` fixed by `seed`:
/// `A -> (tr(A)^2 + a_11 + <u, r_A>) e g^t` with seeded `u` and a seeded
/// zero-sum `g`, where `r_A` is the row of `A_R`.
pub fn seeded_shift(n: usize, seed: u64) -> Shift {
    let mut rng = SplitMix64::new(seed);
    let mut g: Vec<Scalar> = (0..n).map(|_| Scalar::from_int(rng.range_i64(-3, 3))).collect();
    let s: Scalar = g[..n - 1].iter().sum();
    g[n - 1] = -s;
    let u: Vec<Scalar> = (0..n).map(|_| Scalar::from_int(rng.range_i64(-2, 2))).collect();
    let ones: Vec<Scalar> = (0..n).map(|_| Scalar::one()).collect();
    let direction = Matrix::outer(&ones, &g);
    Shift::new(move |a| {
        let tr = a.trace();
        let r = decompose(a).r_vec;
        let pairing: Scalar = u.iter().zip(&r).map(|(x, y)| x * y).sum();
        let k = &(&(&tr * &tr) + &a[(0, 0)]) + &pairing;
        direction.scale(&k)
    })
}

/// `phi_i(A_DS) + gamma_i(A)` on `<RS_n>`. Checks the inputs preserve
/// `property` on `<DS_n>` and the results preserve it on `<RS_n>`.
pub fn lift_to_rs(
    phis: &[LinearMap],
    gammas: &[Shift],
    property: Property,
    trials: usize,
    seed: u64,
) -> Result<Vec<PreserverMap>, PreserverError> {
    if phis.len() != gammas.len() || phis.is_empty() {
        return Err(PreserverError::InvalidForm("need one shift per map".into()));
    }
    if phis.iter().any(|p| p.domain_space() != StochasticClass::SpanDS) {
        return Err(PreserverError::InvalidForm("lifted maps must act on <DS_n>".into()));
    }
    let before = verify(phis, property, StochasticClass::SpanDS, trials, seed);
    if !before.holds {
        return Err(PreserverError::NotAPreserver(Box::new(before)));
    }
    let lifted: Vec<PreserverMap> =
        phis.iter().zip(gammas).map(|(p, g)| ShiftedMap::new(p.clone(), g.clone()).into()).collect();
    let after = verify(&lifted, property, StochasticClass::SpanRS, trials, seed ^ 0x5EED);
    if !after.holds {
        return Err(PreserverError::NotAPreserver(Box::new(after)));
    }
    Ok(lifted)
}

/// `A -> psi_i(A)_DS` on `<DS_n>`, after checking the inputs on `<RS_n>`
/// and the projections on `<DS_n>`.
pub fn project_to_ds(
    psis: Vec<Arc<dyn MatrixMap>>,
    property: Property,
    trials: usize,
    seed: u64,
) -> Result<Vec<PreserverMap>, PreserverError> {
    if psis.is_empty() {
        return Err(PreserverError::InvalidForm("no maps to project".into()));
    }
    let before = verify(&psis, property, StochasticClass::SpanRS, trials, seed);
    if !before.holds {
        return Err(PreserverError::NotAPreserver(Box::new(before)));
    }
    let projected: Vec<PreserverMap> =
        psis.into_iter().map(|p| PreserverMap::Projected(ProjectedMap::new(p))).collect();
    let after = verify(&projected, property, StochasticClass::SpanDS, trials, seed ^ 0x5EED);
    if !after.holds {
        return Err(PreserverError::NotAPreserver(Box::new(after)));
    }
    Ok(projected)
}

/// Checks `psi(A)_DS = psi(A_DS)_DS` on `trials` random `A` in `<RS_n>` for
/// each map; returns the first violating `(map index, A)`.
pub fn decomposition_identity_check<M: MatrixMap>(
    maps: &[M],
    trials: usize,
    seed: u64,
) -> Result<(), (usize, Matrix)> {
    let mut rng = SplitMix64::new(seed);
    for _ in 0..trials {
        for (k, map) in maps.iter().enumerate() {
            let n = map.n();
            let a = crate::birkhoff::sample(StochasticClass::SpanRS, n, 1, 6, &mut rng);
            if ds_part(&map.apply(&a)) != ds_part(&map.apply(&ds_part(&a))) {
                return Err((k, a));
            }
        }
    }
    Ok(())
}
