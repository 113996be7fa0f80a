//! Multiplicative trace and spectrum preservers: the canonical families as
//! concrete maps, a sampling verifier, parameter recovery, trace duality,
//! lifting between `<DS_n>` and `<RS_n>`, algebra automorphisms, and the
//! shift feasibility test.

mod automorphism;
mod classify;
mod duality;
mod feasibility;
mod form;
mod maps;
mod transfer;
mod verify;

pub use automorphism::{automorphism, automorphism_check};
pub use classify::{classify_maps, rank_one_precheck, ClassifyOptions};
pub use duality::{dual_partner, gram_nondegenerate, GramReport};
pub use feasibility::{example_b, example_bound, rs_shift_feasible, Feasibility};
pub use form::{construct, construct_unchecked, range_probes, Family, PreserverForm, ShiftRule};
pub use maps::{LinearMap, MatrixMap, PreserverMap, ProjectedMap, Shift, ShiftedMap};
pub use transfer::{decomposition_identity_check, lift_to_rs, project_to_ds, seeded_shift};
pub use verify::{verify, Counterexample, Evidence, Property, VerificationReport};

use alloc::boxed::Box;
use alloc::string::String;

use crate::matrix::Matrix;
use crate::stochastic::SpaceError;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PreserverError {
    #[error("invalid form: {0}")]
    InvalidForm(String),
    #[error("map {map} sends a member of the space outside it: {image}")]
    RangeEscape { map: usize, probe: Matrix, image: Matrix },
    #[error("linear map is not invertible")]
    SingularMap,
    #[error("invalid conjugating matrix: {0}")]
    InvalidP(String),
    #[error("no catalogued family matches: {0}")]
    NotCanonical(String),
    #[error("maps do not form a preserver")]
    NotAPreserver(Box<VerificationReport>),
    #[error(transparent)]
    Space(#[from] SpaceError),
}
