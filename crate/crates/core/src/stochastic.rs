//! Stochastic matrix sets, their spans, and the decomposition
//! `A = A_DS + A_R + A_C` of `M_n = <DS_n> (+) R_n (+) C_n`.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::matrix::Matrix;
use crate::scalar::Scalar;

/// Membership tags. `Span*` denote real spans; `SpanR` / `SpanC` are the
/// shift summands `R_n = {e v^t : v^t e = 0}` and `C_n = {v e^t : v^t e = 0}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StochasticClass {
    DS,
    RS,
    CS,
    SpanDS,
    SpanRS,
    SpanCS,
    SpanR,
    SpanC,
    General,
}

impl StochasticClass {
    pub const ALL: [StochasticClass; 9] = [
        StochasticClass::DS,
        StochasticClass::RS,
        StochasticClass::CS,
        StochasticClass::SpanDS,
        StochasticClass::SpanRS,
        StochasticClass::SpanCS,
        StochasticClass::SpanR,
        StochasticClass::SpanC,
        StochasticClass::General,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            StochasticClass::DS => "DS",
            StochasticClass::RS => "RS",
            StochasticClass::CS => "CS",
            StochasticClass::SpanDS => "SpanDS",
            StochasticClass::SpanRS => "SpanRS",
            StochasticClass::SpanCS => "SpanCS",
            StochasticClass::SpanR => "SpanR",
            StochasticClass::SpanC => "SpanC",
            StochasticClass::General => "General",
        }
    }

    /// True for the three span algebras that carry a [`span_basis`].
    pub fn is_span_algebra(self) -> bool {
        matches!(self, StochasticClass::SpanDS | StochasticClass::SpanRS | StochasticClass::SpanCS)
    }

    /// The span algebra containing this set (DS -> SpanDS, ...).
    pub fn span(self) -> StochasticClass {
        match self {
            StochasticClass::DS => StochasticClass::SpanDS,
            StochasticClass::RS => StochasticClass::SpanRS,
            StochasticClass::CS => StochasticClass::SpanCS,
            other => other,
        }
    }
}

impl fmt::Display for StochasticClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SpaceError {
    #[error("unknown class tag `{0}`")]
    UnknownTag(alloc::string::String),
    #[error("operation does not support class {0}")]
    Unsupported(StochasticClass),
    #[error("matrix is not a member of {0}")]
    NotMember(StochasticClass),
    #[error("expected {expected} coordinates, found {found}")]
    CoordinateCount { expected: usize, found: usize },
}

impl FromStr for StochasticClass {
    type Err = SpaceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        StochasticClass::ALL
            .iter()
            .copied()
            .find(|c| c.tag().eq_ignore_ascii_case(s))
            .ok_or_else(|| SpaceError::UnknownTag(s.into()))
    }
}

/// `A = a_ds + a_r + a_c` with the defining scalars.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decomposition {
    pub a_ds: Matrix,
    pub a_r: Matrix,
    pub a_c: Matrix,
    /// Mean of all entries.
    pub s_a: Scalar,
    /// Column means minus `s_a`; every row of `a_r`.
    pub r_vec: Vec<Scalar>,
    /// Row means minus `s_a`; every column of `a_c`.
    pub c_vec: Vec<Scalar>,
}

impl Decomposition {
    pub fn reconstruct(&self) -> Matrix {
        &(&self.a_ds + &self.a_r) + &self.a_c
    }
}

pub fn decompose(a: &Matrix) -> Decomposition {
    let n = a.n();
    let nn = Scalar::from_int(n as i64);
    let s_a = a.total() / Scalar::from_int((n * n) as i64);
    let r_vec: Vec<Scalar> = (0..n).map(|j| &(a.col_sum(j) / &nn) - &s_a).collect();
    let c_vec: Vec<Scalar> = (0..n).map(|i| &(a.row_sum(i) / &nn) - &s_a).collect();
    let a_r = Matrix::from_fn(n, |_, j| r_vec[j].clone());
    let a_c = Matrix::from_fn(n, |i, _| c_vec[i].clone());
    let a_ds = Matrix::from_fn(n, |i, j| &(&a[(i, j)] - &r_vec[j]) - &c_vec[i]);
    Decomposition { a_ds, a_r, a_c, s_a, r_vec, c_vec }
}

/// The DS part alone.
pub fn ds_part(a: &Matrix) -> Matrix {
    decompose(a).a_ds
}

fn constant<'a>(mut it: impl Iterator<Item = &'a Scalar>) -> Option<&'a Scalar> {
    let first = it.next()?;
    it.all(|v| v == first).then_some(first)
}

fn row_sums(a: &Matrix) -> Vec<Scalar> {
    (0..a.n()).map(|i| a.row_sum(i)).collect()
}

fn col_sums(a: &Matrix) -> Vec<Scalar> {
    (0..a.n()).map(|j| a.col_sum(j)).collect()
}

/// Every class `a` belongs to. `General` is reported only when no other class
/// applies.
pub fn classify(a: &Matrix) -> BTreeSet<StochasticClass> {
    use StochasticClass::*;
    let n = a.n();
    let rs = row_sums(a);
    let cs = col_sums(a);
    let row_const = constant(rs.iter());
    let col_const = constant(cs.iter());
    let nonneg = a.is_nonnegative();
    let mut out = BTreeSet::new();

    if row_const.is_some() {
        out.insert(SpanRS);
    }
    if col_const.is_some() {
        out.insert(SpanCS);
    }
    if let (Some(r), Some(c)) = (row_const, col_const) {
        if r == c {
            out.insert(SpanDS);
        }
    }
    let rows_stochastic = rs.iter().all(Scalar::is_one);
    let cols_stochastic = cs.iter().all(Scalar::is_one);
    if nonneg && rows_stochastic {
        out.insert(RS);
    }
    if nonneg && cols_stochastic {
        out.insert(CS);
    }
    if nonneg && rows_stochastic && cols_stochastic {
        out.insert(DS);
    }
    let rows_equal = (1..n).all(|i| a.row(i) == a.row(0));
    if rows_equal && rs[0].is_zero() {
        out.insert(SpanR);
    }
    let cols_equal = (0..n).all(|i| constant(a.row(i).iter()).is_some());
    if cols_equal && cs[0].is_zero() {
        out.insert(SpanC);
    }
    if out.is_empty() {
        out.insert(General);
    }
    debug_assert!(lattice_holds(&out));
    out
}

fn lattice_holds(set: &BTreeSet<StochasticClass>) -> bool {
    use StochasticClass::*;
    let implies = |a, b| !set.contains(&a) || set.contains(&b);
    implies(DS, RS)
        && implies(DS, CS)
        && implies(RS, SpanRS)
        && implies(CS, SpanCS)
        && implies(SpanDS, SpanRS)
        && implies(SpanDS, SpanCS)
        && implies(SpanR, SpanRS)
        && implies(SpanC, SpanCS)
}

pub fn is_member(a: &Matrix, class: StochasticClass) -> bool {
    class == StochasticClass::General || classify(a).contains(&class)
}

/// A rational basis of one of the three span algebras.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpanBasis {
    pub space: StochasticClass,
    pub n: usize,
    pub elements: Vec<Matrix>,
}

impl SpanBasis {
    pub fn dim(&self) -> usize {
        self.elements.len()
    }

    /// Coordinates of `a` in this basis; errors if `a` is not in the space.
    pub fn coordinates(&self, a: &Matrix) -> Result<Vec<Scalar>, SpaceError> {
        span_coordinates(self.space, a)
    }

    pub fn combine(&self, coords: &[Scalar]) -> Result<Matrix, SpaceError> {
        if coords.len() != self.dim() {
            return Err(SpaceError::CoordinateCount { expected: self.dim(), found: coords.len() });
        }
        let mut acc = Matrix::zero(self.n);
        for (c, b) in coords.iter().zip(&self.elements) {
            if !c.is_zero() {
                acc = &acc + &b.scale(c);
            }
        }
        Ok(acc)
    }
}

/// `D_ij = E_ij - E_in - E_nj + E_nn` (0-based, last index `n-1`).
pub fn ds_basis_element(n: usize, i: usize, j: usize) -> Matrix {
    let l = n - 1;
    Matrix::from_fn(n, |r, c| {
        let mut v = 0i64;
        if r == i && c == j {
            v += 1;
        }
        if r == i && c == l {
            v -= 1;
        }
        if r == l && c == j {
            v -= 1;
        }
        if r == l && c == l {
            v += 1;
        }
        Scalar::from_int(v)
    })
}

fn shift_vector(n: usize, i: usize) -> Vec<Scalar> {
    (0..n)
        .map(|k| {
            if k == i {
                Scalar::one()
            } else if k == n - 1 {
                Scalar::from_int(-1)
            } else {
                Scalar::zero()
            }
        })
        .collect()
}

/// Rational basis: for `SpanDS` the `(n-1)^2` matrices `D_ij` then `I_n`; for
/// `SpanRS` additionally `e (e_i - e_n)^t`; for `SpanCS` `(e_i - e_n) e^t`.
pub fn span_basis(space: StochasticClass, n: usize) -> Result<SpanBasis, SpaceError> {
    if !space.is_span_algebra() {
        return Err(SpaceError::Unsupported(space));
    }
    let mut elements = Vec::new();
    for i in 0..n - 1 {
        for j in 0..n - 1 {
            elements.push(ds_basis_element(n, i, j));
        }
    }
    elements.push(Matrix::identity(n));
    let ones: Vec<Scalar> = (0..n).map(|_| Scalar::one()).collect();
    match space {
        StochasticClass::SpanRS => {
            for i in 0..n - 1 {
                elements.push(Matrix::outer(&ones, &shift_vector(n, i)));
            }
        }
        StochasticClass::SpanCS => {
            for i in 0..n - 1 {
                elements.push(Matrix::outer(&shift_vector(n, i), &ones));
            }
        }
        _ => {}
    }
    Ok(SpanBasis { space, n, elements })
}

/// Closed-form coordinates in [`span_basis`] order.
pub fn span_coordinates(space: StochasticClass, a: &Matrix) -> Result<Vec<Scalar>, SpaceError> {
    if !space.is_span_algebra() {
        return Err(SpaceError::Unsupported(space));
    }
    if !is_member(a, space) {
        return Err(SpaceError::NotMember(space));
    }
    let n = a.n();
    let d = decompose(a);
    let ds = &d.a_ds;
    let s = ds.row_sum(0);
    let mut coords = Vec::with_capacity((n - 1) * (n - 1) + n);
    for i in 0..n - 1 {
        for j in 0..n - 1 {
            let v = if i == j { &ds[(i, j)] - &s } else { ds[(i, j)].clone() };
            coords.push(v);
        }
    }
    coords.push(s);
    match space {
        StochasticClass::SpanRS => coords.extend(d.r_vec[..n - 1].iter().cloned()),
        StochasticClass::SpanCS => coords.extend(d.c_vec[..n - 1].iter().cloned()),
        _ => {}
    }
    Ok(coords)
}

/// Component of `a` in one summand of `<DS_n> (+) R_n (+) C_n`.
pub fn direct_sum_project(a: &Matrix, space: StochasticClass) -> Result<Matrix, SpaceError> {
    let d = decompose(a);
    match space {
        StochasticClass::SpanDS => Ok(d.a_ds),
        StochasticClass::SpanR => Ok(d.a_r),
        StochasticClass::SpanC => Ok(d.a_c),
        other => Err(SpaceError::Unsupported(other)),
    }
}

/// Exact model of the orthogonal frame `U = [e/sqrt(n), X]`.
///
/// The columns are stored unnormalised (Helmert directions) together with
/// their squared norms, so `U = H diag(norms_sq)^{-1/2}` never needs a square
/// root. `H^{-1} A H` is diagonally similar to `U^{-1} A U`, hence it has the
/// same block zero pattern and the same leading entry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrthogonalFrame {
    pub n: usize,
    /// Column `k` is the `k`-th unnormalised direction; column 0 is `e`.
    pub directions: Matrix,
    pub norms_sq: Vec<Scalar>,
}

impl OrthogonalFrame {
    pub fn new(n: usize) -> Self {
        let directions = Matrix::from_fn(n, |i, k| {
            if k == 0 || i < k {
                Scalar::one()
            } else if i == k {
                Scalar::from_int(-(k as i64))
            } else {
                Scalar::zero()
            }
        });
        let norms_sq = (0..n)
            .map(|k| if k == 0 { Scalar::from_int(n as i64) } else { Scalar::from_int((k * (k + 1)) as i64) })
            .collect();
        OrthogonalFrame { n, directions, norms_sq }
    }

    /// `H^t H = diag(norms_sq)`, i.e. the normalised frame is orthogonal.
    pub fn is_orthogonal(&self) -> bool {
        let g = &self.directions.transpose() * &self.directions;
        g == Matrix::diagonal(&self.norms_sq)
    }

    /// `H^{-1} A H`, diagonally similar to `U^{-1} A U`.
    pub fn block_form(&self, a: &Matrix) -> Matrix {
        let inv_norms: Vec<Scalar> = self.norms_sq.iter().map(|v| v.recip().expect("positive")).collect();
        let h_inv = &Matrix::diagonal(&inv_norms) * &self.directions.transpose();
        &(&h_inv * a) * &self.directions
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use StochasticClass::*;

    fn fr(rows: &[&[(i64, i64)]]) -> Matrix {
        Matrix::from_rows(rows.iter().map(|r| r.iter().map(|&(p, q)| Scalar::frac(p, q)).collect()).collect())
            .unwrap()
    }

    #[test]
    fn identity_is_already_doubly_stochastic() {
        let d = decompose(&Matrix::identity(3));
        assert_eq!(d.a_ds, Matrix::identity(3));
        assert!(d.a_r.is_zero() && d.a_c.is_zero());
        assert_eq!(d.s_a, Scalar::frac(1, 3));
    }

    #[test]
    fn row_stochastic_example_with_shift() {
        let a = Matrix::from_ints(&[&[1, 0, 0], &[1, 0, 0], &[0, 0, 1]]).unwrap();
        let d = decompose(&a);
        let expected = fr(&[
            &[(2, 3), (1, 3), (0, 1)],
            &[(2, 3), (1, 3), (0, 1)],
            &[(-1, 3), (1, 3), (1, 1)],
        ]);
        assert_eq!(d.a_ds, expected);
        assert_eq!(d.r_vec, vec![Scalar::frac(1, 3), Scalar::frac(-1, 3), Scalar::zero()]);
        assert!(d.a_c.is_zero());
    }

    #[test]
    fn two_by_two_by_hand() {
        let a = Matrix::from_ints(&[&[1, 2], &[3, 4]]).unwrap();
        let d = decompose(&a);
        let h = Scalar::frac(5, 2);
        assert_eq!(d.a_ds, Matrix::from_fn(2, |_, _| h.clone()));
        assert_eq!(d.r_vec, vec![Scalar::frac(-1, 2), Scalar::frac(1, 2)]);
        assert_eq!(d.c_vec, vec![Scalar::from_int(-1), Scalar::one()]);
        assert_eq!(d.reconstruct(), a);
        assert_eq!(direct_sum_project(&a, SpanDS).unwrap(), d.a_ds);
    }

    #[test]
    fn classify_examples() {
        let i3 = classify(&Matrix::identity(3));
        assert_eq!(i3, [DS, RS, CS, SpanDS, SpanRS, SpanCS].into_iter().collect());

        let a0 = Matrix::from_ints(&[&[1, -1], &[1, -1]]).unwrap();
        assert_eq!(classify(&a0), [SpanR, SpanRS].into_iter().collect());

        let b = fr(&[&[(1, 2), (1, 2)], &[(1, 5), (4, 5)]]);
        assert_eq!(classify(&b), [RS, SpanRS].into_iter().collect());

        let g = Matrix::from_ints(&[&[1, 2], &[3, 5]]).unwrap();
        assert_eq!(classify(&g), [General].into_iter().collect());
    }

    #[test]
    fn basis_dimensions() {
        let b = span_basis(SpanDS, 2).unwrap();
        assert_eq!(b.dim(), 2);
        assert_eq!(b.elements[0], Matrix::from_ints(&[&[1, -1], &[-1, 1]]).unwrap());
        assert_eq!(b.elements[1], Matrix::identity(2));
        assert_eq!(span_basis(SpanRS, 3).unwrap().dim(), 7);
        assert_eq!(span_basis(SpanDS, 4).unwrap().dim(), 10);
        assert_eq!(span_basis(SpanDS, 1).unwrap().dim(), 1);
        assert!(matches!(span_basis(DS, 3), Err(SpaceError::Unsupported(DS))));
    }

    #[test]
    fn coordinates_roundtrip_on_basis() {
        for space in [SpanDS, SpanRS, SpanCS] {
            for n in 1..=4 {
                let b = span_basis(space, n).unwrap();
                for (k, e) in b.elements.iter().enumerate() {
                    let c = b.coordinates(e).unwrap();
                    for (l, v) in c.iter().enumerate() {
                        assert_eq!(v.is_one(), k == l, "{space} n={n} basis {k} coord {l}");
                        assert!(v.is_one() || v.is_zero());
                    }
                }
            }
        }
    }

    #[test]
    fn projection_of_shift_is_zero() {
        let r = Matrix::from_ints(&[&[2, -1, -1], &[2, -1, -1], &[2, -1, -1]]).unwrap();
        assert!(direct_sum_project(&r, SpanDS).unwrap().is_zero());
        assert_eq!(direct_sum_project(&r, SpanR).unwrap(), r);
    }

    #[test]
    fn frame_is_orthogonal_and_blocks_split() {
        for n in 1..=6 {
            assert!(OrthogonalFrame::new(n).is_orthogonal());
        }
        let f = OrthogonalFrame::new(3);
        let a = Matrix::from_ints(&[&[1, 0, 0], &[1, 0, 0], &[0, 0, 1]]).unwrap();
        let blk = f.block_form(&a);
        // Row stochastic: first column vanishes below the corner.
        assert!(blk[(1, 0)].is_zero() && blk[(2, 0)].is_zero());
        assert_eq!(blk[(0, 0)], Scalar::one());
        let ds = f.block_form(&decompose(&a).a_ds);
        assert!(ds[(0, 1)].is_zero() && ds[(0, 2)].is_zero());
    }
}
