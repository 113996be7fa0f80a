use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use super::{MatrixMap, PreserverError};
use crate::birkhoff::sample;
use crate::charpoly::{charpoly, CharPoly};
use crate::matrix::Matrix;
use crate::rng::SplitMix64;
use crate::scalar::Scalar;
use crate::stochastic::{is_member, StochasticClass};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Property {
    Trace,
    Spectrum,
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Property::Trace => "trace",
            Property::Spectrum => "spectrum",
        })
    }
}

impl FromStr for Property {
    type Err = PreserverError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "trace" => Ok(Property::Trace),
            "spectrum" => Ok(Property::Spectrum),
            _ => Err(PreserverError::InvalidForm(alloc::format!("unknown property `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Evidence {
    /// `lhs = tr(phi_1(A_1) ... phi_m(A_m))`, `rhs = tr(A_1 ... A_m)`.
    Trace { lhs: Scalar, rhs: Scalar },
    Spectrum { lhs: CharPoly, rhs: CharPoly },
    /// `phi_map(inputs[map])` left the space.
    RangeEscape { map: usize, image: Matrix },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    pub inputs: Vec<Matrix>,
    pub evidence: Evidence,
}

impl Counterexample {
    /// Recomputes the failure from scratch; true iff it is genuine.
    pub fn recheck<M: MatrixMap>(&self, maps: &[M], property: Property, space: StochasticClass) -> bool {
        check_tuple(maps, &self.inputs, property, space).is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerificationReport {
    pub property: Property,
    pub space: StochasticClass,
    /// Trials actually run; stops at the first failure.
    pub trials: usize,
    pub holds: bool,
    pub counterexample: Option<Counterexample>,
}

/// Checks one tuple; returns the failure if there is one.
fn check_tuple<M: MatrixMap>(
    maps: &[M],
    inputs: &[Matrix],
    property: Property,
    space: StochasticClass,
) -> Option<Evidence> {
    let mut images = Vec::with_capacity(maps.len());
    for (k, (map, a)) in maps.iter().zip(inputs).enumerate() {
        let image = map.apply(a);
        if !is_member(&image, space) {
            return Some(Evidence::RangeEscape { map: k, image });
        }
        images.push(image);
    }
    let lhs = Matrix::product(&images).expect("nonempty");
    let rhs = Matrix::product(inputs).expect("nonempty");
    match property {
        Property::Trace => {
            let (l, r) = (lhs.trace(), rhs.trace());
            (l != r).then_some(Evidence::Trace { lhs: l, rhs: r })
        }
        Property::Spectrum => {
            let (l, r) = (charpoly(&lhs), charpoly(&rhs));
            (l != r).then_some(Evidence::Spectrum { lhs: l, rhs: r })
        }
    }
}

const SAMPLE_BOUND: u64 = 6;

/// Draws `trials` tuples from `space` and compares exactly. A passing report
/// is evidence; a failing one carries an exact counterexample.
///
/// Panics if `maps` is empty or the maps disagree on `n`.
pub fn verify<M: MatrixMap>(
    maps: &[M],
    property: Property,
    space: StochasticClass,
    trials: usize,
    seed: u64,
) -> VerificationReport {
    assert!(!maps.is_empty(), "no maps to verify");
    let n = maps[0].n();
    assert!(maps.iter().all(|m| m.n() == n), "maps act on different sizes");
    let mut rng = SplitMix64::new(seed);
    for trial in 0..trials {
        let mut r = rng.fork();
        let inputs: Vec<Matrix> = maps
            .iter()
            .map(|_| {
                let k = 1 + r.index(n + 1);
                sample(space, n, k, SAMPLE_BOUND, &mut r)
            })
            .collect();
        if let Some(evidence) = check_tuple(maps, &inputs, property, space) {
            return VerificationReport {
                property,
                space,
                trials: trial + 1,
                holds: false,
                counterexample: Some(Counterexample { inputs, evidence }),
            };
        }
    }
    VerificationReport { property, space, trials, holds: true, counterexample: None }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::preservers::{construct, Family, LinearMap, PreserverForm};

    #[test]
    fn three_map_family_holds() {
        let form = PreserverForm::random(Family::DsConj, 4, 3, 5).unwrap();
        let maps = construct(&form).unwrap();
        let r = verify(&maps, Property::Spectrum, StochasticClass::DS, 50, 1);
        assert!(r.holds, "{r:?}");
    }

    #[test]
    fn three_transposes_fail_with_recheckable_witness() {
        let t = LinearMap::from_fn(StochasticClass::SpanDS, 3, |a| a.transpose()).unwrap();
        let maps = [t.clone(), t.clone(), t];
        let r = verify(&maps, Property::Spectrum, StochasticClass::DS, 200, 42);
        assert!(!r.holds);
        let cx = r.counterexample.unwrap();
        assert!(matches!(cx.evidence, Evidence::Spectrum { .. }));
        assert!(cx.recheck(&maps, Property::Spectrum, StochasticClass::DS));
    }

    #[test]
    fn identities_hold() {
        for m in 1..=4 {
            let id = LinearMap::identity(StochasticClass::SpanRS, 3).unwrap();
            let maps: Vec<LinearMap> = (0..m).map(|_| id.clone()).collect();
            assert!(verify(&maps, Property::Trace, StochasticClass::SpanRS, 20, m as u64).holds);
        }
    }
}
