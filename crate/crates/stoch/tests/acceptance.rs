//! Acceptance run: one line per criterion, exact comparisons throughout.
//! Each criterion runs the matching self-test suite and then checks the
//! results against oracles written here, independent of the library code.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use stochastic::selftest::{positive_catalogue, run_suite, transpose_triple, Params, SuiteReport};
use stochastic_core::birkhoff::{birkhoff_decompose, random_invertible, random_matrix, sample, RandomSpec};
use stochastic_core::preservers::{
    construct_unchecked, example_b, gram_nondegenerate, rs_shift_feasible, verify, Evidence, Family, MatrixMap,
    Property,
};
use stochastic_core::rng::SplitMix64;
use stochastic_core::stochastic::{is_member, span_basis};
use stochastic_core::{decompose, Matrix, Permutation, Scalar, StochasticClass};

const SEED: u64 = 20240917;

fn q(p: i64, d: i64) -> Scalar {
    Scalar::frac(p, d)
}

fn int(v: i64) -> Scalar {
    Scalar::from_int(v)
}

/// `A_DS = (I - J/n) A (I - J/n) + (e^t A e / n^2) J`.
fn ds_oracle(a: &Matrix) -> Matrix {
    let n = a.n();
    let nn = n as i64;
    let p = Matrix::from_fn(n, |i, j| if i == j { q(nn - 1, nn) } else { q(-1, nn) });
    let total: Scalar = a.entries().iter().sum();
    let core = &(&p * a) * &p;
    &core + &Matrix::ones(n).scale(&(total * q(1, nn * nn)))
}

fn leibniz_det(a: &Matrix) -> Scalar {
    let n = a.n();
    Permutation::all(n)
        .map(|p| {
            let inversions = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).filter(|&(i, j)| p.apply(i) > p.apply(j)).count();
            let term: Scalar = (0..n).map(|i| a[(i, p.apply(i))].clone()).product();
            if inversions % 2 == 0 {
                term
            } else {
                -term
            }
        })
        .sum()
}

/// Two degree-n monic characteristic polynomials agree iff they agree at
/// n + 1 points.
fn same_spectrum_oracle(a: &Matrix, b: &Matrix) -> bool {
    let n = a.n();
    (0..=n as i64).all(|x| {
        let shift = Matrix::identity(n).scale(&int(x));
        leibniz_det(&(&shift - a)) == leibniz_det(&(&shift - b))
    })
}

fn is_permutation_oracle(a: &Matrix) -> bool {
    let n = a.n();
    let unit = |v: &[Scalar]| v.iter().filter(|x| x.is_one()).count() == 1 && v.iter().all(|x| x.is_zero() || x.is_one());
    (0..n).all(|i| unit(a.row(i)) && unit(&a.column(i)))
}

fn suite(name: &str, n: Option<std::ops::RangeInclusive<usize>>, trials: Option<usize>) -> Result<SuiteReport, String> {
    let report = run_suite(name, &Params { n, trials, seed: SEED }).map_err(|e| e.to_string())?;
    if !report.passed() {
        let bad: Vec<String> = report
            .invariants
            .iter()
            .filter(|i| !i.passed())
            .map(|i| format!("{} ({}/{} failed): {}", i.name, i.failed, i.checked, i.first_failure.as_deref().unwrap_or("not exercised")))
            .collect();
        return Err(bad.join("; "));
    }
    Ok(report)
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn decomposition() -> Result<String, String> {
    let report = suite("decomp", Some(2..=8), Some(1000))?;
    let mut rng = SplitMix64::new(SEED);
    for t in 0..1000 {
        let n = 2 + t % 7;
        let a = sample(StochasticClass::General, n, 1, 9, &mut rng);
        let d = decompose(&a);
        ensure(d.a_ds == ds_oracle(&a), || format!("DS part differs from the projector formula for {a}"))?;
        let nn = n as i64;
        let s: Scalar = a.entries().iter().sum::<Scalar>() * q(1, nn * nn);
        for j in 0..n {
            let col_mean: Scalar = a.column(j).iter().sum::<Scalar>() * q(1, nn);
            ensure((0..n).all(|i| d.a_r[(i, j)] == &col_mean - &s), || format!("A_R column {j} for {a}"))?;
        }
        for i in 0..n {
            let row_mean: Scalar = a.row(i).iter().sum::<Scalar>() * q(1, nn);
            ensure((0..n).all(|j| d.a_c[(i, j)] == &row_mean - &s), || format!("A_C row {i} for {a}"))?;
        }
    }
    Ok(format!("{} suite checks, 1000 matrices against the projector oracle", report.checked()))
}

fn product_chains() -> Result<String, String> {
    let report = suite("thm-2.3", Some(2..=6), Some(500))?;
    let mut rng = SplitMix64::new(SEED ^ 2);
    let mut leibniz = 0;
    for t in 0..200 {
        let space = if t % 2 == 0 { StochasticClass::SpanRS } else { StochasticClass::SpanCS };
        let n = 2 + t % 4;
        let m = 1 + t % 4;
        let factors: Vec<Matrix> = (0..m).map(|_| sample(space, n, 1, 6, &mut rng)).collect();
        let prod = Matrix::product(&factors).unwrap();
        let parts: Vec<Matrix> = factors.iter().map(ds_oracle).collect();
        let prod_parts = Matrix::product(&parts).unwrap();
        ensure(ds_oracle(&prod) == prod_parts, || format!("{space}: DS part of product for {factors:?}"))?;
        ensure(prod.trace() == prod_parts.trace(), || format!("{space}: trace for {factors:?}"))?;
        if n <= 4 {
            ensure(same_spectrum_oracle(&prod, &prod_parts), || format!("{space}: spectrum for {factors:?}"))?;
            leibniz += 1;
        }
    }
    Ok(format!("{} suite checks over 1000 chains, 200 oracle chains ({leibniz} by Leibniz)", report.checked()))
}

fn inverses() -> Result<String, String> {
    let report = suite("lemma-2.4", Some(2..=6), Some(200))?;
    let mut rng = SplitMix64::new(SEED ^ 3);
    for t in 0..200 {
        let n = 2 + t % 5;
        let a = random_invertible(StochasticClass::SpanRS, n, rng.next_u64()).map_err(|e| e.to_string())?;
        let inv = a.inverse().map_err(|e| e.to_string())?;
        ensure(&a * &inv == Matrix::identity(n), || format!("inverse of {a}"))?;
        ensure(&ds_oracle(&inv) * &ds_oracle(&a) == Matrix::identity(n), || format!("(A^-1)_DS A_DS for {a}"))?;
    }
    Ok(format!("{} suite checks, 200 inverses against the oracle", report.checked()))
}

fn permutation_products() -> Result<String, String> {
    let report = suite("lemma-2.9", Some(2..=6), Some(300))?;
    // Independent sweep: products of two factors drawn from permutations and
    // convex combinations with the identity.
    let mut checked = 0;
    for n in 2..=3 {
        let perms: Vec<Matrix> = Permutation::all(n).map(|p| p.to_matrix()).collect();
        let half = q(1, 2);
        let mut gens = perms.clone();
        gens.extend(perms.iter().skip(1).map(|p| &Matrix::identity(n).scale(&half) + &p.scale(&half)));
        for a in &gens {
            for b in &gens {
                let all_perm = is_permutation_oracle(a) && is_permutation_oracle(b);
                ensure(is_permutation_oracle(&(a * b)) == all_perm, || format!("{a} * {b}"))?;
                checked += 1;
            }
        }
    }
    Ok(format!("{} suite checks, {checked} oracle products", report.checked()))
}

fn birkhoff() -> Result<String, String> {
    let report = suite("birkhoff", Some(2..=8), Some(300))?;
    let mut rng = SplitMix64::new(SEED ^ 5);
    for t in 0..300 {
        let n = 2 + t % 7;
        let a = random_matrix(&RandomSpec::new(StochasticClass::DS, n, rng.next_u64()).with_terms(1 + t % (2 * n)))
            .map_err(|e| e.to_string())?;
        let d = birkhoff_decompose(&a).map_err(|e| e.to_string())?;
        let mut sum = Matrix::zero(n);
        let mut weight = Scalar::zero();
        for term in &d.terms {
            let pm = Matrix::from_fn(n, |i, j| if term.perm.apply(i) == j { Scalar::one() } else { Scalar::zero() });
            sum = &sum + &pm.scale(&term.weight);
            weight += &term.weight;
            ensure(term.weight.is_positive(), || format!("weight {} for {a}", term.weight))?;
        }
        ensure(sum == a && weight == Scalar::one(), || format!("reconstruction for {a}"))?;
        ensure(d.terms.len() <= (n - 1) * (n - 1) + 1, || format!("{} terms for {a}", d.terms.len()))?;
    }
    Ok(format!("{} suite checks, 300 decompositions rebuilt by hand", report.checked()))
}

fn positive_preservers() -> Result<String, String> {
    let report = suite("preservers-positive", Some(2..=5), Some(200))?;
    let catalogue = positive_catalogue(&[2, 3, 4, 5], SEED);
    for family in Family::ALL {
        for small in [true, false] {
            let exists = !(small && matches!(family, Family::SpanDsConj | Family::SpanDsTranspose))
                && !(!small && matches!(family, Family::SpanDsN2 | Family::RsN2Scaled));
            let covered = catalogue.iter().any(|c| c.form.family == family && (c.form.n == 2) == small);
            ensure(covered == exists, || format!("{family} coverage at n {} 2", if small { "=" } else { ">" }))?;
        }
    }
    Ok(format!("{} suite checks over {} forms per seed, every family and branch", report.checked(), catalogue.len()))
}

fn negative_preservers() -> Result<String, String> {
    let report = suite("preservers-negative", None, Some(200))?;
    // (a) the counterexample recomputed with the Leibniz oracle.
    let form = transpose_triple();
    let maps = construct_unchecked(&form).map_err(|e| e.to_string())?;
    let r = verify(&maps, Property::Spectrum, StochasticClass::DS, 200, SEED);
    let c = r.counterexample.ok_or("no counterexample")?;
    ensure(matches!(c.evidence, Evidence::Spectrum { .. }), || format!("{:?}", c.evidence))?;
    let images: Vec<Matrix> = maps.iter().zip(&c.inputs).map(|(f, a)| f.apply(a)).collect();
    ensure(c.inputs.iter().all(|a| is_member(a, StochasticClass::DS)), || "inputs outside DS_3".into())?;
    ensure(
        !same_spectrum_oracle(&Matrix::product(&images).unwrap(), &Matrix::product(&c.inputs).unwrap()),
        || "oracle finds equal spectra".into(),
    )?;
    // (b) the worked n = 3 matrix, the entries of B_DS and the piecewise bound.
    let m3 = Matrix::from_rows(vec![
        vec![int(1), int(0), int(0)],
        vec![q(-1, 3), q(2, 3), q(2, 3)],
        vec![q(1, 3), q(1, 3), q(1, 3)],
    ])
    .unwrap();
    ensure(ds_oracle(&example_b(3)).transpose() == m3, || "M at n = 3".into())?;
    ensure(rs_shift_feasible(&m3).bound_sum == q(1, 3), || "bound 1/3 at n = 3".into())?;
    for n in 3..=8usize {
        let (lo, hi) = ((n / 2) as i64, n.div_ceil(2) as i64);
        let nn = n as i64;
        let b_ds = ds_oracle(&example_b(n));
        ensure((lo as usize..n).all(|j| b_ds[(j, 0)] == q(1 - lo, nn)), || format!("(j,1) entries at n = {n}"))?;
        ensure((0..lo as usize).all(|i| b_ds[(i, 1)] == q(1 - hi, nn)), || format!("(i,2) entries at n = {n}"))?;
        let k = n.div_ceil(2) as i64;
        let bound = if n % 2 == 0 { int(k - 1) } else { int(k - 2) + q(k - 1, 2 * k - 1) };
        let f = rs_shift_feasible(&b_ds.transpose());
        ensure(!f.feasible && f.bound_sum == bound, || format!("n = {n}: bound {} vs {bound}", f.bound_sum))?;
    }
    // (c) the Gram matrix at n = 2 by hand, and the zero rows of the shifts.
    let g2 = gram_nondegenerate(StochasticClass::SpanDS, 2).map_err(|e| e.to_string())?;
    ensure(g2.gram == Matrix::from_ints(&[&[4, 2], &[2, 2]]).unwrap(), || format!("Gram at n = 2: {}", g2.gram))?;
    for space in [StochasticClass::SpanRS, StochasticClass::SpanCS] {
        for n in 2..=6 {
            let basis = span_basis(space, n).unwrap().elements;
            let ds_dim = (n - 1) * (n - 1) + 1;
            for shift in &basis[ds_dim..] {
                ensure(basis.iter().all(|b| (shift * b).trace().is_zero()), || format!("{space} n = {n}: shift not isotropic"))?;
            }
        }
    }
    Ok(format!("{} suite checks; counterexample, n = 3..8 bounds and Gram rechecked", report.checked()))
}

fn transfer() -> Result<String, String> {
    let report = suite("thm-2.5", Some(4..=4), Some(200))?;
    Ok(format!("{} suite checks at n = 4, m = 3, 200 trials", report.checked()))
}

fn automorphisms() -> Result<String, String> {
    let report = suite("thm-2.6", Some(2..=5), Some(100))?;
    // On <DS_2> every element commutes with S, so conjugation by one is the
    // identity map; the only other automorphism is the sign flip of S.
    let s = Permutation::swap(2, 0, 1).to_matrix();
    let flip = Matrix::diagonal(&[Scalar::one(), int(-1)]);
    ensure(&(&flip * &s) * &flip == -&s, || "diag(1,-1) does not negate S".into())?;
    Ok(format!("{} suite checks over 100 (space, P) pairs", report.checked()))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Result<String, String>); 9] = [
        ("decomposition", decomposition),
        ("DS part of products", product_chains),
        ("DS part of inverses", inverses),
        ("permutation products", permutation_products),
        ("Birkhoff decomposition", birkhoff),
        ("positive preserver catalogue", positive_preservers),
        ("negative preserver catalogue", negative_preservers),
        ("transfer between <DS_n> and <RS_n>", transfer),
        ("span algebra automorphisms", automorphisms),
    ];
    let start = Instant::now();
    let mut failures = 0;
    for (k, (title, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {}: PASS  {title} ({detail}) [{secs:.1}s]", k + 1),
            Err(detail) => {
                failures += 1;
                println!("criterion {}: FAIL  {title}: {detail} [{secs:.1}s]", k + 1);
            }
        }
    }
    println!("{} of 9 criteria passed in {:.1}s", 9 - failures, start.elapsed().as_secs_f64());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
