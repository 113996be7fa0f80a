//! Exact decomposition theory for stochastic matrices and executable
//! catalogues of multiplicative trace and spectrum preservers.
//!
//! Everything is computed over the rationals: spectra are compared through
//! characteristic polynomials, so every identity check is an exact equality.
#![no_std]

extern crate alloc;

pub mod birkhoff;
pub mod charpoly;
pub mod linalg;
pub mod matching;
pub mod matrix;
pub mod permutation;
pub mod preservers;
pub mod rng;
pub mod scalar;
pub mod spectral;
pub mod stochastic;

pub use charpoly::{charpoly, same_spectrum, CharPoly};
pub use matrix::{Matrix, MatrixError};
pub use permutation::{matrix_to_perm, perm_to_matrix, Permutation, PermutationError};
pub use scalar::Scalar;
pub use stochastic::{classify, decompose, Decomposition, StochasticClass};
