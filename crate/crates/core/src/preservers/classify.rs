use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::form::{Family, PreserverForm, ShiftRule};
use super::{MatrixMap, PreserverError};
use crate::linalg::nullspace;
use crate::matrix::Matrix;
use crate::permutation::{matrix_to_perm, Permutation};
use crate::scalar::Scalar;
use crate::stochastic::{decompose, ds_basis_element, ds_part, span_basis, StochasticClass};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ClassifyOptions {
    /// For two maps on a span algebra, require some `phi_p` to keep rank-one
    /// probes at rank at most one before attempting recovery.
    pub rank_precheck: bool,
}

const BRUTE_FORCE_MAX_N: usize = 6;

fn not_canonical(msg: impl Into<String>) -> PreserverError {
    PreserverError::NotCanonical(msg.into())
}

/// `I`, `J/n` and `(J + D_ij)/n`: doubly stochastic and spanning `<DS_n>`.
fn ds_probes(n: usize) -> Vec<Matrix> {
    let nn = Scalar::from_int(n as i64);
    let j = Matrix::ones(n).scale(&nn.recip().expect("n >= 1"));
    let mut out = vec![Matrix::identity(n), j.clone()];
    for r in 0..n - 1 {
        for c in 0..n - 1 {
            out.push(&j + &ds_basis_element(n, r, c).scale(&nn.recip().expect("n >= 1")));
        }
    }
    out
}

/// `ds_probes` plus the row-stochastic vertices `e e_k^t`.
fn rs_probes(n: usize) -> Vec<Matrix> {
    let mut out = ds_probes(n);
    out.extend((0..n).map(|k| Matrix::from_fn(n, |_, j| if j == k { Scalar::one() } else { Scalar::zero() })));
    out
}

/// `image == P T(a) Q^t`, i.e. `image_ij = T(a)_{p(i) q(j)}`.
fn matches_perm_sandwich(image: &Matrix, a: &Matrix, p: &Permutation, q: &Permutation, transpose: bool) -> bool {
    let n = a.n();
    (0..n).all(|i| {
        (0..n).all(|j| {
            let (r, c) = (p.apply(i), q.apply(j));
            let v = if transpose { &a[(c, r)] } else { &a[(r, c)] };
            image[(i, j)] == *v
        })
    })
}

/// Searches `P_1` over all permutations; the rest of the chain is forced by
/// `phi_i(I) = P_i P_{i+1}^t`. Returns `P_1 .. P_m`.
fn permutation_chain(
    ident_images: &[Matrix],
    probes: &[Matrix],
    images: &[Vec<Matrix>],
    transpose: bool,
) -> Option<Vec<Permutation>> {
    let n = probes[0].n();
    let m = ident_images.len();
    let steps: Vec<Permutation> = ident_images.iter().map(|q| matrix_to_perm(q).ok()).collect::<Option<_>>()?;
    'candidates: for p1 in Permutation::all(n) {
        let mut chain = vec![p1.clone()];
        for i in 0..m {
            let next = steps[i].inverse().then(&chain[i]);
            for (a, image) in probes.iter().zip(&images[i]) {
                if !matches_perm_sandwich(image, a, &chain[i], &next, transpose) {
                    continue 'candidates;
                }
            }
            chain.push(next);
        }
        if chain[m] == p1 {
            chain.pop();
            return Some(chain);
        }
    }
    None
}

fn transposes_for(m: usize) -> &'static [bool] {
    if m <= 2 {
        &[false, true]
    } else {
        &[false]
    }
}

fn apply_all<M: MatrixMap>(maps: &[M], probes: &[Matrix]) -> Vec<Vec<Matrix>> {
    maps.iter().map(|f| probes.iter().map(|a| f.apply(a)).collect()).collect()
}

fn blank_form(family: Family, n: usize, m: usize) -> PreserverForm {
    PreserverForm {
        family,
        m,
        n,
        perms: Vec::new(),
        transpose: false,
        c: None,
        q_factors: Vec::new(),
        gamma: Vec::new(),
    }
}

fn classify_ds<M: MatrixMap>(maps: &[M], n: usize) -> Result<PreserverForm, PreserverError> {
    let m = maps.len();
    if n > BRUTE_FORCE_MAX_N {
        return Err(not_canonical(format!("permutation search is limited to n <= {BRUTE_FORCE_MAX_N}")));
    }
    let probes = ds_probes(n);
    let images = apply_all(maps, &probes);
    let ident: Vec<Matrix> = images.iter().map(|v| v[0].clone()).collect();
    if m == 2 {
        // phi_2(A^t) = phi_1(A)^t holds for both two-map forms.
        let consistent = probes.iter().zip(&images[0]).all(|(a, img)| maps[1].apply(&a.transpose()) == img.transpose());
        if !consistent {
            return Err(not_canonical("phi_2(A^t) != phi_1(A)^t"));
        }
    }
    for &t in transposes_for(m) {
        if let Some(chain) = permutation_chain(&ident, &probes, &images, t) {
            let family = if t && m == 2 { Family::DsPairTranspose } else { Family::DsConj };
            let mut form = PreserverForm::from_permutations(family, &chain);
            form.transpose = t;
            return Ok(form);
        }
    }
    Err(not_canonical("no permutation form matches"))
}

fn classify_rs<M: MatrixMap>(maps: &[M], n: usize) -> Result<PreserverForm, PreserverError> {
    let m = maps.len();
    if n > BRUTE_FORCE_MAX_N {
        return Err(not_canonical(format!("permutation search is limited to n <= {BRUTE_FORCE_MAX_N}")));
    }
    let ds = ds_probes(n);
    let ds_images = apply_all(maps, &ds);
    let ident: Vec<Matrix> = ds_images.iter().map(|v| v[0].clone()).collect();
    let chain = permutation_chain(&ident, &ds, &ds_images, false)
        .ok_or_else(|| not_canonical("DS part is not a permutation sandwich"))?;
    let probes = rs_probes(n);
    let images = apply_all(maps, &probes);
    let nxt = |i: usize| &chain[(i + 1) % m];
    if n == 2 {
        // phi_i(V) = P_i (J/2 + c V_R) P_{i+1}^t for V = e e_1^t, V_R = e (1/2, -1/2).
        let v = &probes[probes.len() - 2];
        let v_r = decompose(v).a_r;
        let mut c: Option<Scalar> = None;
        for i in 0..m {
            let inner = &(&chain[i].to_matrix().transpose() * &maps[i].apply(v)) * &nxt(i).to_matrix();
            let ci = (&inner[(0, 0)] - &Scalar::frac(1, 2)) * Scalar::from_int(2);
            match &c {
                None => c = Some(ci),
                Some(prev) if *prev == ci => {}
                Some(_) => return Err(not_canonical("maps use different scales c")),
            }
        }
        let c = c.expect("m >= 1");
        let ok = (0..m).all(|i| {
            probes.iter().zip(&images[i]).all(|(a, img)| {
                let d = decompose(a);
                let inner = &d.a_ds + &d.a_r.scale(&c);
                matches_perm_sandwich(img, &inner, &chain[i], nxt(i), false)
            })
        });
        debug_assert!(!v_r.is_zero());
        if !ok {
            return Err(not_canonical("not of the form P_i (A_DS + c A_R) P_{i+1}^t"));
        }
        let mut form = PreserverForm::from_permutations(Family::RsN2Scaled, &chain);
        form.c = Some(c);
        return Ok(form);
    }
    let ok = (0..m).all(|i| probes.iter().zip(&images[i]).all(|(a, img)| matches_perm_sandwich(img, a, &chain[i], nxt(i), false)));
    if !ok {
        return Err(not_canonical("not of the form P_i A P_{i+1}^t"));
    }
    let mut form = PreserverForm::from_permutations(Family::RsFull, &chain);
    form.gamma = vec![ShiftRule::Conjugate; m];
    Ok(form)
}

/// All `P` in `<DS_n>` with `P T(A) = psi(A) P` for every basis element `A`,
/// as a basis of the solution space.
fn intertwiners(basis: &[Matrix], psi_images: &[Matrix], transpose: bool) -> Vec<Matrix> {
    let n = basis[0].n();
    let d = basis.len();
    let mut rows: Vec<Vec<Scalar>> = Vec::new();
    for (a, psi_a) in basis.iter().zip(psi_images) {
        let ta = if transpose { a.transpose() } else { a.clone() };
        let cols: Vec<Matrix> = basis.iter().map(|b| &(b * &ta) - &(psi_a * b)).collect();
        for r in 0..n {
            for c in 0..n {
                let row: Vec<Scalar> = cols.iter().map(|m| m[(r, c)].clone()).collect();
                if row.iter().any(|v| !v.is_zero()) {
                    rows.push(row);
                }
            }
        }
    }
    nullspace(&rows, d)
        .into_iter()
        .map(|x| {
            x.iter().zip(basis).fold(Matrix::zero(n), |acc, (c, b)| if c.is_zero() { acc } else { &acc + &b.scale(c) })
        })
        .collect()
}

/// Some invertible element of the span of `sols`, trying a fixed sequence
/// of integer combinations.
fn invertible_combination(sols: &[Matrix]) -> Option<Matrix> {
    if sols.is_empty() {
        return None;
    }
    if let Some(p) = sols.iter().find(|p| p.is_invertible()) {
        return Some(p.clone());
    }
    for k in 2..12i64 {
        let mut acc = Matrix::zero(sols[0].n());
        let mut w = Scalar::one();
        for s in sols {
            acc = &acc + &s.scale(&w);
            w = &w * &Scalar::from_int(k);
        }
        if acc.is_invertible() {
            return Some(acc);
        }
    }
    None
}

fn classify_span_general<M: MatrixMap>(maps: &[M], n: usize) -> Result<PreserverForm, PreserverError> {
    let m = maps.len();
    let basis = span_basis(StochasticClass::SpanDS, n)?.elements;
    let images = apply_all(maps, &basis);
    let ident_images: Vec<Matrix> = maps.iter().map(|f| f.apply(&Matrix::identity(n))).collect();

    if n <= BRUTE_FORCE_MAX_N {
        for &t in transposes_for(m) {
            if let Some(chain) = permutation_chain(&ident_images, &basis, &images, t) {
                let family = if t { Family::SpanDsTranspose } else { Family::SpanDsConj };
                return Ok(PreserverForm::from_matrices(family, n, chain.iter().map(|p| p.to_matrix()).collect()));
            }
        }
    }

    let q_inv: Vec<Matrix> = ident_images
        .iter()
        .map(|q| q.inverse().map_err(|_| not_canonical("phi_i(I) is singular")))
        .collect::<Result<_, _>>()?;
    let psi: Vec<Matrix> = images[0].iter().map(|img| img * &q_inv[0]).collect();
    for &t in transposes_for(m) {
        let Some(p1) = invertible_combination(&intertwiners(&basis, &psi, t)) else {
            continue;
        };
        let mut chain = vec![p1];
        for qi in &q_inv {
            let next = qi * chain.last().expect("nonempty");
            chain.push(next);
        }
        if chain[m] != chain[0] {
            continue;
        }
        let ok = (0..m).all(|i| {
            let next_inv = chain[i + 1].inverse().expect("invertible chain");
            basis.iter().zip(&images[i]).all(|(a, img)| {
                let ta = if t { a.transpose() } else { a.clone() };
                &(&chain[i] * &ta) * &next_inv == *img
            })
        });
        if ok {
            chain.pop();
            let family = if t { Family::SpanDsTranspose } else { Family::SpanDsConj };
            return Ok(PreserverForm::from_matrices(family, n, chain));
        }
    }
    Err(not_canonical("no conjugation form matches"))
}

fn classify_span_n2<M: MatrixMap>(maps: &[M]) -> Result<PreserverForm, PreserverError> {
    let m = maps.len();
    let basis = span_basis(StochasticClass::SpanDS, 2)?.elements;
    let qs: Vec<Matrix> = maps.iter().map(|f| f.apply(&Matrix::identity(2))).collect();
    if Matrix::product(&qs).expect("nonempty") != Matrix::identity(2) {
        return Err(not_canonical("product of phi_i(I) is not I"));
    }
    let flip = Matrix::diagonal(&[Scalar::one(), Scalar::from_int(-1)]);
    for p in [Matrix::identity(2), flip] {
        let ok = maps
            .iter()
            .zip(&qs)
            .all(|(f, q)| basis.iter().all(|a| f.apply(a) == &(&(&p * a) * &p) * q));
        if ok {
            let mut form = blank_form(Family::SpanDsN2, 2, m);
            form.perms = vec![p];
            form.q_factors = qs;
            return Ok(form);
        }
    }
    Err(not_canonical("not of the form P A P^{-1} Q_i"))
}

fn classify_span<M: MatrixMap>(maps: &[M], n: usize) -> Result<PreserverForm, PreserverError> {
    if n == 2 {
        classify_span_n2(maps)
    } else {
        classify_span_general(maps, n)
    }
}

/// `A -> phi(A)_DS`.
struct DsProjection<'a, M>(&'a M);

impl<M: MatrixMap> MatrixMap for DsProjection<'_, M> {
    fn n(&self) -> usize {
        self.0.n()
    }
    fn apply(&self, a: &Matrix) -> Matrix {
        ds_part(&self.0.apply(a))
    }
}

fn classify_rs_span<M: MatrixMap>(maps: &[M], n: usize) -> Result<PreserverForm, PreserverError> {
    let projected: Vec<DsProjection<'_, M>> = maps.iter().map(DsProjection).collect();
    let base = classify_span(&projected, n)?;
    let basis = span_basis(StochasticClass::SpanRS, n)?.elements;
    let mut all_zero = true;
    for (f, p) in maps.iter().zip(&projected) {
        for a in &basis {
            let d = decompose(&f.apply(a));
            if !d.a_c.is_zero() {
                return Err(not_canonical("image leaves <RS_n>"));
            }
            if d.a_ds != p.apply(&ds_part(a)) {
                return Err(not_canonical("DS part of the image depends on A_R"));
            }
            all_zero &= d.a_r.is_zero();
        }
    }
    let mut form = base;
    form.family = Family::RsSpan;
    form.gamma = vec![if all_zero { ShiftRule::Zero } else { ShiftRule::Opaque }; form.m];
    Ok(form)
}

/// Index of a map keeping every rank-one probe (`J` and the `D_ij`) at rank
/// at most one.
pub fn rank_one_precheck<M: MatrixMap>(maps: &[M]) -> Option<usize> {
    let n = maps.first()?.n();
    let mut probes = vec![Matrix::ones(n)];
    for r in 0..n - 1 {
        for c in 0..n - 1 {
            probes.push(ds_basis_element(n, r, c));
        }
    }
    maps.iter().position(|f| probes.iter().all(|a| f.apply(a).rank() <= 1))
}

/// Recovers a family and parameters from maps on `space`. Parameters are
/// exact where the family determines them; otherwise the recovered form has
/// the same action (`P` up to a central factor on span algebras, up to the
/// swap at `n = 2`).
pub fn classify_maps<M: MatrixMap>(
    maps: &[M],
    space: StochasticClass,
    options: ClassifyOptions,
) -> Result<PreserverForm, PreserverError> {
    let n = maps.first().ok_or_else(|| not_canonical("no maps"))?.n();
    if maps.iter().any(|f| f.n() != n) {
        return Err(PreserverError::InvalidForm("maps act on different sizes".into()));
    }
    if options.rank_precheck
        && maps.len() == 2
        && matches!(space, StochasticClass::SpanDS | StochasticClass::SpanRS)
        && rank_one_precheck(maps).is_none()
    {
        return Err(not_canonical("neither map keeps rank-one matrices at rank one"));
    }
    match space {
        StochasticClass::DS => classify_ds(maps, n),
        StochasticClass::RS => classify_rs(maps, n),
        StochasticClass::SpanDS => classify_span(maps, n),
        StochasticClass::SpanRS => classify_rs_span(maps, n),
        other => Err(not_canonical(format!("no catalogue for {other}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::preservers::{construct, LinearMap, PreserverMap};

    fn same_action(a: &[PreserverMap], b: &[PreserverMap], probes: &[Matrix]) -> bool {
        a.iter().zip(b).all(|(f, g)| probes.iter().all(|p| f.apply(p) == g.apply(p)))
    }

    #[test]
    fn transposed_pair_recovered() {
        let p = Permutation::new(vec![1, 2, 0]).unwrap();
        let q = Permutation::swap(3, 0, 1);
        let form = PreserverForm::from_permutations(Family::DsPairTranspose, &[p, q]);
        let maps = construct(&form).unwrap();
        let back = classify_maps(&maps, StochasticClass::DS, ClassifyOptions::default()).unwrap();
        assert_eq!(back, form);
    }

    #[test]
    fn ds_round_trips() {
        for n in 3..=5 {
            for m in 1..=3 {
                let form = PreserverForm::random(Family::DsConj, n, m, (n * 10 + m) as u64).unwrap();
                let maps = construct(&form).unwrap();
                assert_eq!(classify_maps(&maps, StochasticClass::DS, ClassifyOptions::default()).unwrap(), form);
            }
        }
    }

    #[test]
    fn span_round_trips_up_to_action() {
        for (family, n, m) in [
            (Family::SpanDsConj, 3, 1),
            (Family::SpanDsConj, 3, 3),
            (Family::SpanDsTranspose, 4, 2),
            (Family::SpanDsN2, 2, 3),
        ] {
            let form = PreserverForm::random(family, n, m, 99).unwrap();
            let maps = construct(&form).unwrap();
            let back = classify_maps(&maps, StochasticClass::SpanDS, ClassifyOptions::default()).unwrap();
            assert_eq!(back.family, family);
            let rebuilt = construct(&back).unwrap();
            let basis = span_basis(StochasticClass::SpanDS, n).unwrap().elements;
            assert!(same_action(&maps, &rebuilt, &basis));
        }
    }

    #[test]
    fn perturbed_identity_is_not_canonical() {
        let d = ds_basis_element(3, 0, 0);
        let phi = LinearMap::from_fn(StochasticClass::SpanDS, 3, |a| a + &d.scale(&a.trace())).unwrap();
        let r = classify_maps(&[phi], StochasticClass::SpanDS, ClassifyOptions::default());
        assert!(matches!(r, Err(PreserverError::NotCanonical(_))));
    }

    #[test]
    fn row_stochastic_forms_recovered() {
        let form = PreserverForm::random(Family::RsFull, 3, 2, 4).unwrap();
        let mut form = form;
        form.gamma = vec![ShiftRule::Conjugate; 2];
        let maps = construct(&form).unwrap();
        assert_eq!(classify_maps(&maps, StochasticClass::RS, ClassifyOptions::default()).unwrap(), form);

        let mut scaled = PreserverForm::from_permutations(Family::RsN2Scaled, &[Permutation::identity(2)]);
        scaled.c = Some(Scalar::frac(-1, 3));
        let maps = construct(&scaled).unwrap();
        let back = classify_maps(&maps, StochasticClass::RS, ClassifyOptions::default()).unwrap();
        assert!(same_action(&maps, &construct(&back).unwrap(), &rs_probes(2)));
    }

    #[test]
    fn rank_precheck() {
        let form = PreserverForm::random(Family::SpanDsConj, 3, 2, 6).unwrap();
        let maps = construct(&form).unwrap();
        assert!(rank_one_precheck(&maps).is_some());
        let opts = ClassifyOptions { rank_precheck: true };
        assert!(classify_maps(&maps, StochasticClass::SpanDS, opts).is_ok());
    }
}
