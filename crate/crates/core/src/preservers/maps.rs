use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use alloc::vec;
use num_bigint::BigInt;
use num_traits::Zero;

use super::PreserverError;
use crate::matrix::{from_integer_form, integer_form, Matrix};
use crate::scalar::Scalar;
use crate::stochastic::{ds_part, span_basis, span_coordinates, SpaceError, SpanBasis, StochasticClass};

/// A map on `n x n` matrices. Implementations must be pure: the same input
/// always gives the same output.
pub trait MatrixMap: Send + Sync {
    fn n(&self) -> usize;
    fn apply(&self, a: &Matrix) -> Matrix;
}

impl<T: MatrixMap + ?Sized> MatrixMap for &T {
    fn n(&self) -> usize {
        (**self).n()
    }
    fn apply(&self, a: &Matrix) -> Matrix {
        (**self).apply(a)
    }
}

impl<T: MatrixMap + ?Sized> MatrixMap for Arc<T> {
    fn n(&self) -> usize {
        (**self).n()
    }
    fn apply(&self, a: &Matrix) -> Matrix {
        (**self).apply(a)
    }
}

/// A linear endomorphism of a span algebra, stored as its matrix in
/// [`span_basis`] coordinates: column `k` holds the coordinates of the image
/// of basis element `k`.
#[derive(Clone)]
pub struct LinearMap {
    basis: SpanBasis,
    rep: Matrix,
    images: Images,
}

/// Images of the basis elements as integer numerators (one row of `n^2`
/// entries per element) over a shared denominator, for fast application.
#[derive(Clone)]
struct Images {
    nums: Vec<Vec<BigInt>>,
    den: BigInt,
}

impl Images {
    fn new(basis: &SpanBasis, rep: &Matrix) -> Self {
        let d = basis.dim();
        let flat: Vec<Scalar> = (0..d)
            .flat_map(|k| basis.combine(&rep.column(k)).expect("coordinate count").entries().to_vec())
            .collect();
        let (all, den) = integer_form(&flat);
        let nn = basis.n * basis.n;
        let mut nums = Vec::with_capacity(d);
        let mut it = all.into_iter();
        for _ in 0..d {
            nums.push(it.by_ref().take(nn).collect());
        }
        Images { nums, den }
    }
}

impl PartialEq for LinearMap {
    fn eq(&self, other: &Self) -> bool {
        self.basis == other.basis && self.rep == other.rep
    }
}

impl Eq for LinearMap {}

impl LinearMap {
    fn build(basis: SpanBasis, rep: Matrix) -> Self {
        let images = Images::new(&basis, &rep);
        LinearMap { basis, rep, images }
    }

    pub fn from_fn(domain: StochasticClass, n: usize, f: impl Fn(&Matrix) -> Matrix) -> Result<Self, PreserverError> {
        let basis = span_basis(domain, n)?;
        let mut columns = Vec::with_capacity(basis.dim());
        for (k, b) in basis.elements.iter().enumerate() {
            let image = f(b);
            if image.n() != n {
                return Err(PreserverError::InvalidForm(alloc::format!("image of basis element {k} has wrong size")));
            }
            columns.push(span_coordinates(domain, &image).map_err(|_| {
                PreserverError::InvalidForm(alloc::format!("image of basis element {k} leaves {domain}"))
            })?);
        }
        let d = basis.dim();
        let rep = Matrix::from_fn(d, |i, j| columns[j][i].clone());
        Ok(LinearMap::build(basis, rep))
    }

    pub fn from_rep(domain: StochasticClass, n: usize, rep: Matrix) -> Result<Self, PreserverError> {
        let basis = span_basis(domain, n)?;
        if rep.n() != basis.dim() {
            return Err(SpaceError::CoordinateCount { expected: basis.dim(), found: rep.n() }.into());
        }
        Ok(LinearMap::build(basis, rep))
    }

    pub fn identity(domain: StochasticClass, n: usize) -> Result<Self, PreserverError> {
        let basis = span_basis(domain, n)?;
        let rep = Matrix::identity(basis.dim());
        Ok(LinearMap::build(basis, rep))
    }

    pub fn domain_space(&self) -> StochasticClass {
        self.basis.space
    }

    pub fn rep(&self) -> &Matrix {
        &self.rep
    }

    pub fn basis(&self) -> &SpanBasis {
        &self.basis
    }

    pub fn try_apply(&self, a: &Matrix) -> Result<Matrix, SpaceError> {
        let (coords, cden) = integer_form(&self.basis.coordinates(a)?);
        let n = self.basis.n;
        let mut out = vec![BigInt::zero(); n * n];
        for (c, image) in coords.iter().zip(&self.images.nums) {
            if c.is_zero() {
                continue;
            }
            for (o, v) in out.iter_mut().zip(image) {
                if !v.is_zero() {
                    *o += c * v;
                }
            }
        }
        let entries = from_integer_form(out, &(cden * &self.images.den));
        Ok(Matrix::from_vector(n, entries).expect("n^2 entries"))
    }

    /// `self` after `other`.
    pub fn compose(&self, other: &LinearMap) -> LinearMap {
        assert_eq!(self.basis, other.basis, "maps act on different spaces");
        LinearMap::build(self.basis.clone(), &self.rep * &other.rep)
    }

    pub fn scale(&self, c: &Scalar) -> LinearMap {
        LinearMap::build(self.basis.clone(), self.rep.scale(c))
    }

    pub fn is_bijective(&self) -> bool {
        self.rep.is_invertible()
    }

    pub fn inverse(&self) -> Result<LinearMap, PreserverError> {
        let rep = self.rep.inverse().map_err(|_| PreserverError::SingularMap)?;
        Ok(LinearMap::build(self.basis.clone(), rep))
    }
}

impl MatrixMap for LinearMap {
    fn n(&self) -> usize {
        self.basis.n
    }

    /// Panics if `a` is outside the domain.
    fn apply(&self, a: &Matrix) -> Matrix {
        self.try_apply(a).unwrap_or_else(|e| panic!("linear map applied outside its domain: {e}"))
    }
}

impl fmt::Debug for LinearMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LinearMap")
            .field("domain", &self.basis.space)
            .field("n", &self.basis.n)
            .field("rep", &self.rep)
            .finish()
    }
}

/// An arbitrary map into the shift summand, e.g. `gamma_i : <RS_n> -> R_n`.
#[derive(Clone)]
pub struct Shift(Arc<dyn Fn(&Matrix) -> Matrix + Send + Sync>);

impl Shift {
    pub fn new(f: impl Fn(&Matrix) -> Matrix + Send + Sync + 'static) -> Self {
        Shift(Arc::new(f))
    }

    pub fn zero(n: usize) -> Self {
        Shift::new(move |_| Matrix::zero(n))
    }

    pub fn eval(&self, a: &Matrix) -> Matrix {
        (self.0)(a)
    }
}

impl fmt::Debug for Shift {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Shift(..)")
    }
}

/// `A -> phi(A_DS) + gamma(A)` with `phi` linear on `<DS_n>`.
#[derive(Debug, Clone)]
pub struct ShiftedMap {
    pub ds: LinearMap,
    pub shift: Shift,
}

impl ShiftedMap {
    pub fn new(ds: LinearMap, shift: Shift) -> Self {
        assert_eq!(ds.domain_space(), StochasticClass::SpanDS, "DS component must act on <DS_n>");
        ShiftedMap { ds, shift }
    }
}

impl MatrixMap for ShiftedMap {
    fn n(&self) -> usize {
        self.ds.n()
    }

    fn apply(&self, a: &Matrix) -> Matrix {
        &self.ds.apply(&ds_part(a)) + &self.shift.eval(a)
    }
}

/// `A -> inner(A)_DS`.
#[derive(Clone)]
pub struct ProjectedMap {
    inner: Arc<dyn MatrixMap>,
}

impl ProjectedMap {
    pub fn new(inner: Arc<dyn MatrixMap>) -> Self {
        ProjectedMap { inner }
    }
}

impl MatrixMap for ProjectedMap {
    fn n(&self) -> usize {
        self.inner.n()
    }

    fn apply(&self, a: &Matrix) -> Matrix {
        ds_part(&self.inner.apply(a))
    }
}

impl fmt::Debug for ProjectedMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("ProjectedMap(..)")
    }
}

/// Everything [`construct`](super::construct) can return.
#[derive(Debug, Clone)]
pub enum PreserverMap {
    Linear(LinearMap),
    Shifted(ShiftedMap),
    Projected(ProjectedMap),
}

impl PreserverMap {
    pub fn as_linear(&self) -> Option<&LinearMap> {
        match self {
            PreserverMap::Linear(l) => Some(l),
            _ => None,
        }
    }
}

impl MatrixMap for PreserverMap {
    fn n(&self) -> usize {
        match self {
            PreserverMap::Linear(m) => m.n(),
            PreserverMap::Shifted(m) => m.n(),
            PreserverMap::Projected(m) => m.n(),
        }
    }

    fn apply(&self, a: &Matrix) -> Matrix {
        match self {
            PreserverMap::Linear(m) => m.apply(a),
            PreserverMap::Shifted(m) => m.apply(a),
            PreserverMap::Projected(m) => m.apply(a),
        }
    }
}

impl From<LinearMap> for PreserverMap {
    fn from(m: LinearMap) -> Self {
        PreserverMap::Linear(m)
    }
}

impl From<ShiftedMap> for PreserverMap {
    fn from(m: ShiftedMap) -> Self {
        PreserverMap::Shifted(m)
    }
}
