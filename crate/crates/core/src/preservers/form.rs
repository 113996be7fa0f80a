use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use super::feasibility::rs_shift_feasible;
use super::maps::{LinearMap, PreserverMap, Shift, ShiftedMap};
use super::transfer::seeded_shift;
use super::{MatrixMap, PreserverError};
use crate::birkhoff::random_invertible;
use crate::matrix::Matrix;
use crate::permutation::{is_permutation_matrix, Permutation};
use crate::rng::SplitMix64;
use crate::scalar::Scalar;
use crate::stochastic::{decompose, is_member, StochasticClass};

/// Canonical preserver families.
///
/// With `P_{m+1} = P_1` and `T` the identity or the transpose:
///
/// | family | maps | parameters |
/// |---|---|---|
/// | `DsConj` | `P_i T(A) P_{i+1}^t` on `DS_n` | permutations; `T` transposes only for `m = 1` |
/// | `DsPairTranspose` | `P A^t Q^t`, `Q A^t P^t` on `DS_n` | permutations, `m = 2` |
/// | `SpanDsConj` | `P_i A P_{i+1}^{-1}` on `<DS_n>` | invertible `P_i` in `<DS_n>` |
/// | `SpanDsTranspose` | `P_i A^t P_{i+1}^{-1}` on `<DS_n>` | as above, `m <= 2` |
/// | `SpanDsN2` | `P A P^{-1} Q_i` on `<DS_2>` | `P in {I, diag(1,-1)}`, `Q_1 ... Q_m = I` |
/// | `RsFull` | `P_i A_DS P_{i+1}^t + gamma_i(A)` on `RS_n` | permutations, shift rules |
/// | `RsN2Scaled` | `P_i (A_DS + c A_R) P_{i+1}^t` on `RS_2` | permutations, `c` |
/// | `RsSpan` | `T_i(A_DS) + gamma_i(A)` on `<RS_n>` | a span family for `T_i`, shift rules |
///
/// For `RsSpan` the underlying span family is `SpanDsN2` when `q_factors` is
/// nonempty, otherwise `SpanDsTranspose` or `SpanDsConj` by the transpose flag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    DsConj,
    DsPairTranspose,
    SpanDsConj,
    SpanDsTranspose,
    SpanDsN2,
    RsFull,
    RsN2Scaled,
    RsSpan,
}

impl Family {
    pub const ALL: [Family; 8] = [
        Family::DsConj,
        Family::DsPairTranspose,
        Family::SpanDsConj,
        Family::SpanDsTranspose,
        Family::SpanDsN2,
        Family::RsFull,
        Family::RsN2Scaled,
        Family::RsSpan,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Family::DsConj => "DS_conj",
            Family::DsPairTranspose => "DS_pair_transpose",
            Family::SpanDsConj => "SpanDS_conj",
            Family::SpanDsTranspose => "SpanDS_transpose",
            Family::SpanDsN2 => "SpanDS_n2",
            Family::RsFull => "RS_full",
            Family::RsN2Scaled => "RS_n2_scaled",
            Family::RsSpan => "RS_span",
        }
    }

    /// The set the maps act on.
    pub fn space(self) -> StochasticClass {
        match self {
            Family::DsConj | Family::DsPairTranspose => StochasticClass::DS,
            Family::SpanDsConj | Family::SpanDsTranspose | Family::SpanDsN2 => StochasticClass::SpanDS,
            Family::RsFull | Family::RsN2Scaled => StochasticClass::RS,
            Family::RsSpan => StochasticClass::SpanRS,
        }
    }

    /// Whether `perms` holds permutation matrices rather than general
    /// invertible elements of `<DS_n>`.
    pub fn uses_permutations(self) -> bool {
        matches!(self, Family::DsConj | Family::DsPairTranspose | Family::RsFull | Family::RsN2Scaled)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Family {
    type Err = PreserverError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Family::ALL
            .iter()
            .copied()
            .find(|f| f.tag().eq_ignore_ascii_case(s))
            .ok_or_else(|| PreserverError::InvalidForm(format!("unknown family `{s}`")))
    }
}

/// How a shift `gamma_i` into `R_n` is produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ShiftRule {
    Zero,
    /// `P_i A_R P_{i+1}^t`, which makes the whole map `P_i A P_{i+1}^t`.
    Conjugate,
    /// Nonlinear: the smallest shift keeping the image nonnegative, plus the
    /// slack spread with seeded weights.
    Witness(u64),
    /// Nonlinear seeded map `<RS_n> -> R_n`, unconstrained.
    Seeded(u64),
    /// A shift recovered from a map but not described by any rule.
    Opaque,
}

impl fmt::Display for ShiftRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ShiftRule::Zero => f.write_str("zero"),
            ShiftRule::Conjugate => f.write_str("conjugate"),
            ShiftRule::Witness(s) => write!(f, "witness:{s}"),
            ShiftRule::Seeded(s) => write!(f, "seeded:{s}"),
            ShiftRule::Opaque => f.write_str("opaque"),
        }
    }
}

impl FromStr for ShiftRule {
    type Err = PreserverError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || PreserverError::InvalidForm(format!("unknown shift rule `{s}`"));
        match s {
            "zero" => Ok(ShiftRule::Zero),
            "conjugate" => Ok(ShiftRule::Conjugate),
            "opaque" => Ok(ShiftRule::Opaque),
            _ => {
                let (kind, seed) = s.split_once(':').ok_or_else(bad)?;
                let seed: u64 = seed.parse().map_err(|_| bad())?;
                match kind {
                    "witness" => Ok(ShiftRule::Witness(seed)),
                    "seeded" => Ok(ShiftRule::Seeded(seed)),
                    _ => Err(bad()),
                }
            }
        }
    }
}

/// Family tag plus parameters. `perms` lists `P_1 .. P_m`; `P_{m+1} = P_1`
/// is implicit. An empty `gamma` means the family default.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreserverForm {
    pub family: Family,
    pub m: usize,
    pub n: usize,
    pub perms: Vec<Matrix>,
    pub transpose: bool,
    pub c: Option<Scalar>,
    pub q_factors: Vec<Matrix>,
    pub gamma: Vec<ShiftRule>,
}

fn invalid(msg: impl Into<String>) -> PreserverError {
    PreserverError::InvalidForm(msg.into())
}

fn flip2() -> Matrix {
    Matrix::diagonal(&[Scalar::one(), Scalar::from_int(-1)])
}

impl PreserverForm {
    /// Bare form with the given permutations and defaults elsewhere.
    pub fn from_permutations(family: Family, perms: &[Permutation]) -> Self {
        let n = perms.first().map_or(0, |p| p.n());
        PreserverForm {
            family,
            m: perms.len(),
            n,
            perms: perms.iter().map(|p| p.to_matrix()).collect(),
            transpose: family == Family::DsPairTranspose,
            c: None,
            q_factors: Vec::new(),
            gamma: Vec::new(),
        }
    }

    pub fn from_matrices(family: Family, n: usize, perms: Vec<Matrix>) -> Self {
        PreserverForm {
            family,
            m: perms.len(),
            n,
            perms,
            transpose: matches!(family, Family::DsPairTranspose | Family::SpanDsTranspose),
            c: None,
            q_factors: Vec::new(),
            gamma: Vec::new(),
        }
    }

    /// `P_i` with the cyclic convention, 0-based.
    pub fn p(&self, i: usize) -> &Matrix {
        &self.perms[i % self.m]
    }

    /// Shift rules with family defaults filled in.
    pub fn gamma_rules(&self) -> Vec<ShiftRule> {
        if !self.gamma.is_empty() {
            return self.gamma.clone();
        }
        let default = match self.family {
            Family::RsFull => ShiftRule::Conjugate,
            _ => ShiftRule::Zero,
        };
        alloc::vec![default; self.m]
    }

    fn span_base(&self) -> Family {
        if !self.q_factors.is_empty() {
            Family::SpanDsN2
        } else if self.transpose {
            Family::SpanDsTranspose
        } else {
            Family::SpanDsConj
        }
    }

    /// Checks that the parameters describe buildable maps: sizes, counts,
    /// permutation matrices where the family needs them, invertible span
    /// parameters. Says nothing about whether the maps preserve anything.
    pub fn validate_structure(&self) -> Result<(), PreserverError> {
        let (n, m) = (self.n, self.m);
        if n == 0 || m == 0 {
            return Err(invalid("n and m must be positive"));
        }
        let n2 = self.family == Family::SpanDsN2 || (self.family == Family::RsSpan && !self.q_factors.is_empty());
        let expected_perms = if n2 { 1 } else { m };
        if self.perms.len() != expected_perms {
            return Err(invalid(format!("expected {expected_perms} matrices in perms, found {}", self.perms.len())));
        }
        if self.perms.iter().chain(&self.q_factors).any(|p| p.n() != n) {
            return Err(invalid("parameter matrix of wrong size"));
        }
        if self.family.uses_permutations() && !self.perms.iter().all(is_permutation_matrix) {
            return Err(invalid("perms must be permutation matrices"));
        }
        if !self.family.uses_permutations() && !self.perms.iter().all(Matrix::is_invertible) {
            return Err(invalid("span parameters must be invertible"));
        }
        if self.c.is_some() != (self.family == Family::RsN2Scaled) {
            return Err(invalid("c is required for RS_n2_scaled and only there"));
        }
        if n2 {
            if n != 2 {
                return Err(invalid("the n = 2 span family needs n = 2"));
            }
            if self.q_factors.len() != m {
                return Err(invalid("need one Q factor per map"));
            }
        } else if !self.q_factors.is_empty() {
            return Err(invalid("q_factors belong to the n = 2 span family only"));
        }
        let rules = self.gamma_rules();
        if rules.len() != m {
            return Err(invalid(format!("expected {m} shift rules, found {}", rules.len())));
        }
        match self.family {
            Family::RsFull => {
                if self.transpose {
                    return Err(invalid("RS_full has no transposed form"));
                }
                if rules.iter().any(|r| !matches!(r, ShiftRule::Conjugate | ShiftRule::Witness(_))) {
                    return Err(invalid("RS_full shifts must be `conjugate` or `witness:<seed>`"));
                }
            }
            Family::RsN2Scaled => {
                if n != 2 || self.transpose {
                    return Err(invalid("RS_n2_scaled needs n = 2 and no transpose"));
                }
            }
            Family::RsSpan => {
                if rules.iter().any(|r| !matches!(r, ShiftRule::Zero | ShiftRule::Seeded(_) | ShiftRule::Opaque)) {
                    return Err(invalid("RS_span shifts must be `zero`, `seeded:<seed>` or `opaque`"));
                }
            }
            _ => {
                if !self.gamma.is_empty() {
                    return Err(invalid("this family takes no shift rules"));
                }
            }
        }
        Ok(())
    }

    /// Structure plus the constraints under which the family preserves
    /// trace and spectrum: transpose arity, membership in `<DS_n>`, the
    /// `n = 2` parameter restrictions.
    pub fn validate(&self) -> Result<(), PreserverError> {
        self.validate_structure()?;
        let m = self.m;
        let span_members = |ps: &[Matrix]| ps.iter().all(|p| is_member(p, StochasticClass::SpanDS));
        match self.family {
            Family::DsConj => {
                if self.transpose && m != 1 {
                    return Err(invalid("DS_conj transposes only for a single map"));
                }
            }
            Family::DsPairTranspose => {
                if m != 2 || !self.transpose {
                    return Err(invalid("DS_pair_transpose needs m = 2 and transpose = true"));
                }
            }
            Family::SpanDsConj | Family::SpanDsTranspose => {
                let t = self.family == Family::SpanDsTranspose;
                if self.transpose != t {
                    return Err(invalid("transpose flag disagrees with the family"));
                }
                if t && m > 2 {
                    return Err(invalid("transposed span forms exist only for m <= 2"));
                }
                if !span_members(&self.perms) {
                    return Err(invalid("perms must be invertible elements of <DS_n>"));
                }
            }
            Family::SpanDsN2 => self.validate_n2()?,
            Family::RsFull | Family::RsN2Scaled => {}
            Family::RsSpan => match self.span_base() {
                Family::SpanDsN2 => self.validate_n2()?,
                base => {
                    if base == Family::SpanDsTranspose && m > 2 {
                        return Err(invalid("transposed span forms exist only for m <= 2"));
                    }
                    if !span_members(&self.perms) {
                        return Err(invalid("perms must be invertible elements of <DS_n>"));
                    }
                }
            },
        }
        Ok(())
    }

    fn validate_n2(&self) -> Result<(), PreserverError> {
        let p = &self.perms[0];
        if *p != Matrix::identity(2) && *p != flip2() {
            return Err(invalid("P must be I or diag(1,-1)"));
        }
        if !self.q_factors.iter().all(|q| is_member(q, StochasticClass::SpanDS)) {
            return Err(invalid("Q factors must be invertible elements of <DS_2>"));
        }
        if Matrix::product(&self.q_factors).expect("nonempty") != Matrix::identity(2) {
            return Err(invalid("product of Q factors must be I"));
        }
        Ok(())
    }

    /// A valid form with seeded parameters. Errors when the family does not
    /// exist for this `(n, m)`.
    pub fn random(family: Family, n: usize, m: usize, seed: u64) -> Result<Self, PreserverError> {
        let mut rng = SplitMix64::new(seed);
        let random_perm = |rng: &mut SplitMix64| Permutation::new(rng.shuffled(n)).expect("bijection").to_matrix();
        let random_span = |rng: &mut SplitMix64| {
            random_invertible(StochasticClass::SpanDS, n, rng.next_u64()).map_err(|e| invalid(format!("{e}")))
        };
        let mut form = PreserverForm {
            family,
            m,
            n,
            perms: Vec::new(),
            transpose: false,
            c: None,
            q_factors: Vec::new(),
            gamma: Vec::new(),
        };
        match family {
            Family::DsConj | Family::DsPairTranspose | Family::RsFull | Family::RsN2Scaled => {
                form.perms = (0..m).map(|_| random_perm(&mut rng)).collect();
                form.transpose = match family {
                    Family::DsPairTranspose => true,
                    Family::DsConj => m == 1 && rng.below(2) == 1,
                    _ => false,
                };
                if family == Family::RsFull {
                    form.gamma = (0..m)
                        .map(|_| if rng.below(2) == 0 { ShiftRule::Conjugate } else { ShiftRule::Witness(rng.next_u64()) })
                        .collect();
                }
                if family == Family::RsN2Scaled {
                    let q = rng.range_i64(1, 6);
                    form.c = Some(Scalar::frac(rng.range_i64(-q, q), q));
                }
            }
            Family::SpanDsConj | Family::SpanDsTranspose => {
                form.transpose = family == Family::SpanDsTranspose;
                form.perms = (0..m).map(|_| random_span(&mut rng)).collect::<Result<_, _>>()?;
            }
            Family::SpanDsN2 => {
                form.fill_n2(&mut rng)?;
            }
            Family::RsSpan => {
                if n == 2 {
                    form.fill_n2(&mut rng)?;
                } else {
                    form.transpose = m <= 2 && rng.below(2) == 1;
                    form.perms = (0..m).map(|_| random_span(&mut rng)).collect::<Result<_, _>>()?;
                }
                form.gamma = (0..m)
                    .map(|_| if rng.below(3) == 0 { ShiftRule::Zero } else { ShiftRule::Seeded(rng.next_u64()) })
                    .collect();
            }
        }
        form.validate()?;
        Ok(form)
    }

    fn fill_n2(&mut self, rng: &mut SplitMix64) -> Result<(), PreserverError> {
        if self.n != 2 {
            return Err(invalid("the n = 2 span family needs n = 2"));
        }
        self.perms = alloc::vec![if rng.below(2) == 0 { Matrix::identity(2) } else { flip2() }];
        let mut qs = Vec::with_capacity(self.m);
        for _ in 1..self.m {
            qs.push(random_invertible(StochasticClass::SpanDS, 2, rng.next_u64()).map_err(|e| invalid(format!("{e}")))?);
        }
        let last = match Matrix::product(&qs) {
            Some(p) => p.inverse().expect("product of invertibles"),
            None => Matrix::identity(2),
        };
        qs.push(last);
        self.q_factors = qs;
        Ok(())
    }
}

fn t(a: &Matrix, transpose: bool) -> Matrix {
    if transpose {
        a.transpose()
    } else {
        a.clone()
    }
}

/// The linear map `A -> L A R` on `domain`, optionally transposing first.
fn sandwich(domain: StochasticClass, n: usize, l: &Matrix, r: &Matrix, transpose: bool) -> Result<LinearMap, PreserverError> {
    LinearMap::from_fn(domain, n, |a| &(l * &t(a, transpose)) * r)
}

/// The `n = 2` span maps `A -> P A P^{-1} Q_i`.
fn n2_maps(form: &PreserverForm) -> Result<Vec<LinearMap>, PreserverError> {
    let p = &form.perms[0];
    let p_inv = p.inverse().expect("validated");
    form.q_factors
        .iter()
        .map(|q| LinearMap::from_fn(StochasticClass::SpanDS, 2, |a| &(&(p * a) * &p_inv) * q))
        .collect()
}

/// The linear `<DS_n>` part of each map of a span family.
fn span_maps(form: &PreserverForm, base: Family) -> Result<Vec<LinearMap>, PreserverError> {
    if base == Family::SpanDsN2 {
        return n2_maps(form);
    }
    (0..form.m)
        .map(|i| {
            let next_inv = form.p(i + 1).inverse().expect("validated");
            sandwich(StochasticClass::SpanDS, form.n, form.p(i), &next_inv, base == Family::SpanDsTranspose)
        })
        .collect()
}

/// Weights `pi_j >= 0` with `sum pi_j = 1`, fixed by `seed`.
fn slack_weights(n: usize, seed: u64) -> Vec<Scalar> {
    let mut rng = SplitMix64::new(seed);
    let raw: Vec<i64> = (0..n).map(|_| rng.range_i64(0, 4)).collect();
    let total: i64 = raw.iter().sum();
    if total == 0 {
        return (0..n).map(|_| Scalar::frac(1, n as i64)).collect();
    }
    raw.into_iter().map(|v| Scalar::frac(v, total)).collect()
}

/// `gamma(A) = e w^t` with `w` the feasibility witness for `L A_DS R`.
fn witness_shift(n: usize, l: Matrix, r: Matrix, seed: u64) -> Shift {
    let weights = slack_weights(n, seed);
    Shift::new(move |a| {
        let d = decompose(a);
        let base = &(&l * &d.a_ds) * &r;
        let f = rs_shift_feasible(&base);
        let w: Vec<Scalar> = if f.feasible {
            let slack = -&f.bound_sum;
            f.bounds.iter().zip(&weights).map(|(b, p)| b + &(&slack * p)).collect()
        } else {
            // Outside RS_n any shift is admissible; use the conjugate one.
            r.vec_mul(&d.r_vec)
        };
        let ones: Vec<Scalar> = (0..n).map(|_| Scalar::one()).collect();
        Matrix::outer(&ones, &w)
    })
}

/// Builds the maps a structurally sound form describes, skipping the family
/// constraints and the range check. Useful for probing non-preservers.
pub fn construct_unchecked(form: &PreserverForm) -> Result<Vec<PreserverMap>, PreserverError> {
    form.validate_structure()?;
    let n = form.n;
    let mut out = Vec::with_capacity(form.m);
    match form.family {
        Family::DsConj | Family::DsPairTranspose => {
            for i in 0..form.m {
                let r = form.p(i + 1).transpose();
                out.push(sandwich(StochasticClass::SpanDS, n, form.p(i), &r, form.transpose)?.into());
            }
        }
        Family::SpanDsConj | Family::SpanDsTranspose | Family::SpanDsN2 => {
            out.extend(span_maps(form, form.family)?.into_iter().map(PreserverMap::from));
        }
        Family::RsFull => {
            for (i, rule) in form.gamma_rules().into_iter().enumerate() {
                let l = form.p(i).clone();
                let r = form.p(i + 1).transpose();
                let map = match rule {
                    ShiftRule::Conjugate => sandwich(StochasticClass::SpanRS, n, &l, &r, false)?.into(),
                    ShiftRule::Witness(seed) => {
                        let ds = sandwich(StochasticClass::SpanDS, n, &l, &r, false)?;
                        ShiftedMap::new(ds, witness_shift(n, l, r, seed)).into()
                    }
                    _ => unreachable!("validated"),
                };
                out.push(map);
            }
        }
        Family::RsN2Scaled => {
            let c = form.c.clone().expect("validated");
            for i in 0..form.m {
                let l = form.p(i).clone();
                let r = form.p(i + 1).transpose();
                let map = LinearMap::from_fn(StochasticClass::SpanRS, n, |a| {
                    let d = decompose(a);
                    &(&l * &(&d.a_ds + &d.a_r.scale(&c))) * &r
                })?;
                out.push(map.into());
            }
        }
        Family::RsSpan => {
            let bases = span_maps(form, form.span_base())?;
            for (ds, rule) in bases.into_iter().zip(form.gamma_rules()) {
                let shift = match rule {
                    ShiftRule::Zero => Shift::zero(n),
                    ShiftRule::Seeded(seed) => seeded_shift(n, seed),
                    ShiftRule::Opaque => return Err(invalid("an opaque shift cannot be rebuilt")),
                    _ => unreachable!("validated"),
                };
                out.push(ShiftedMap::new(ds, shift).into());
            }
        }
    }
    Ok(out)
}

/// Builds the maps of `form`; for families on `RS_n` every map is checked on
/// [`range_probes`] to send `RS_n` into itself.
pub fn construct(form: &PreserverForm) -> Result<Vec<PreserverMap>, PreserverError> {
    form.validate()?;
    let maps = construct_unchecked(form)?;
    let space = form.family.space();
    if space == StochasticClass::RS {
        for probe in range_probes(form.n) {
            for (k, map) in maps.iter().enumerate() {
                let image = map.apply(&probe);
                if !is_member(&image, space) {
                    return Err(PreserverError::RangeEscape { map: k, probe, image });
                }
            }
        }
    }
    Ok(maps)
}

const EXHAUSTIVE_PROBE_N: usize = 5;
const SAMPLED_PROBES: usize = 256;

/// Vertices of `RS_n`: matrices with exactly one 1 in each row. All `n^n`
/// of them for `n <= 5`, a fixed pseudo-random subset otherwise. A linear
/// map sends `RS_n` into itself iff it does so on every vertex.
pub fn range_probes(n: usize) -> Vec<Matrix> {
    let vertex = |cols: &[usize]| Matrix::from_fn(n, |i, j| if cols[i] == j { Scalar::one() } else { Scalar::zero() });
    if n <= EXHAUSTIVE_PROBE_N {
        let total = n.pow(n as u32);
        (0..total)
            .map(|mut code| {
                let cols: Vec<usize> = (0..n)
                    .map(|_| {
                        let c = code % n;
                        code /= n;
                        c
                    })
                    .collect();
                vertex(&cols)
            })
            .collect()
    } else {
        let mut rng = SplitMix64::new(n as u64);
        (0..SAMPLED_PROBES)
            .map(|_| {
                let cols: Vec<usize> = (0..n).map(|_| rng.index(n)).collect();
                vertex(&cols)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;

    fn int(rows: &[&[i64]]) -> Matrix {
        Matrix::from_ints(rows).unwrap()
    }

    #[test]
    fn unchecked_builds_non_canonical_transposes() {
        let id = Permutation::identity(3);
        let mut form = PreserverForm::from_permutations(Family::DsConj, &[id.clone(), id.clone(), id]);
        form.transpose = true;
        assert!(matches!(construct(&form), Err(PreserverError::InvalidForm(_))));
        let maps = construct_unchecked(&form).unwrap();
        let a = int(&[&[1, 0, 0], &[0, 0, 1], &[0, 1, 0]]);
        assert_eq!(maps[0].apply(&a), a.transpose());
    }

    #[test]
    fn identity_permutations_give_identity_maps() {
        let id = Permutation::identity(4);
        let form = PreserverForm::from_permutations(Family::DsConj, &[id.clone(), id.clone(), id]);
        let maps = construct(&form).unwrap();
        assert_eq!(maps.len(), 3);
        let a = crate::birkhoff::random_matrix(&crate::birkhoff::RandomSpec::new(StochasticClass::DS, 4, 1)).unwrap();
        for map in &maps {
            assert_eq!(map.apply(&a), a);
        }
    }

    #[test]
    fn nontrivial_two_by_two_automorphism() {
        let mut form = PreserverForm::from_matrices(Family::SpanDsN2, 2, vec![flip2()]);
        form.m = 1;
        form.q_factors = vec![Matrix::identity(2)];
        let maps = construct(&form).unwrap();
        let a = int(&[&[3, 5], &[5, 3]]);
        assert_eq!(maps[0].apply(&a), int(&[&[3, -5], &[-5, 3]]));
    }

    #[test]
    fn scaled_two_by_two_example() {
        let mut form = PreserverForm::from_permutations(Family::RsN2Scaled, &[Permutation::identity(2)]);
        form.c = Some(Scalar::frac(1, 2));
        let maps = construct(&form).unwrap();
        let image = maps[0].apply(&int(&[&[1, 0], &[1, 0]]));
        let (a, b) = (Scalar::frac(3, 4), Scalar::frac(1, 4));
        let expected = Matrix::from_rows(vec![vec![a.clone(), b.clone()], vec![a, b]]).unwrap();
        assert_eq!(image, expected);
    }

    #[test]
    fn scale_beyond_one_escapes() {
        let mut form = PreserverForm::from_permutations(Family::RsN2Scaled, &[Permutation::identity(2)]);
        form.c = Some(Scalar::frac(3, 2));
        assert!(matches!(construct(&form), Err(PreserverError::RangeEscape { .. })));
        assert!(construct_unchecked(&form).is_ok());
        form.c = Some(Scalar::from_int(-1));
        assert!(construct(&form).is_ok());
    }

    #[test]
    fn invalid_forms_rejected() {
        let id = Permutation::identity(3);
        let mut form = PreserverForm::from_permutations(Family::DsConj, &[id.clone(), id.clone(), id]);
        form.transpose = true;
        assert!(matches!(construct(&form), Err(PreserverError::InvalidForm(_))));

        let mut n2 = PreserverForm::from_matrices(Family::SpanDsN2, 2, vec![Matrix::identity(2)]);
        n2.m = 2;
        n2.q_factors = vec![int(&[&[2, 0], &[0, 2]]), Matrix::identity(2)];
        assert!(matches!(construct(&n2), Err(PreserverError::InvalidForm(_))));
    }

    #[test]
    fn random_forms_are_valid() {
        for family in Family::ALL {
            for n in 2..=4 {
                for m in 1..=3 {
                    match PreserverForm::random(family, n, m, 17) {
                        Ok(form) => assert!(construct(&form).is_ok(), "{family} n={n} m={m}"),
                        Err(PreserverError::InvalidForm(_)) => {}
                        Err(e) => panic!("{family}: {e}"),
                    }
                }
            }
        }
    }

    #[test]
    fn shift_rules_round_trip() {
        for r in [ShiftRule::Zero, ShiftRule::Conjugate, ShiftRule::Witness(7), ShiftRule::Seeded(9), ShiftRule::Opaque] {
            assert_eq!(r.to_string().parse::<ShiftRule>().unwrap(), r);
        }
    }
}
