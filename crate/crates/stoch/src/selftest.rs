//! Named self-test suites. Each reports pass/fail per invariant with counts
//! and timings; all randomness derives from the suite seed.

use std::ops::RangeInclusive;
use std::sync::Arc;
use std::time::{Duration, Instant};

use serde_json::{json, Value};
use stochastic_core::birkhoff::{
    birkhoff_decompose, random_invertible, random_matrix, sample, BirkhoffDecomposition, RandomSpec,
};
use stochastic_core::preservers::{
    automorphism, automorphism_check, classify_maps, construct, construct_unchecked, decomposition_identity_check,
    example_b, example_bound, gram_nondegenerate, lift_to_rs, project_to_ds, rs_shift_feasible, seeded_shift,
    verify, ClassifyOptions, Evidence, Family, LinearMap, MatrixMap, PreserverError, PreserverForm, PreserverMap,
    Property, ShiftRule,
};
use stochastic_core::rng::SplitMix64;
use stochastic_core::spectral::{
    ds_inverse_check, ds_part_of_product, product_is_permutation, spectrum_transfer_report, ProductChain,
};
use stochastic_core::stochastic::{ds_part, is_member, span_basis};
use stochastic_core::{decompose, Matrix, Permutation, Scalar, StochasticClass};

pub const SUITES: [&str; 11] = [
    "decomp",
    "thm-2.3",
    "lemma-2.4",
    "lemma-2.9",
    "thm-2.5",
    "thm-2.6",
    "birkhoff",
    "preservers-positive",
    "preservers-negative",
    "example-4.4",
    "gram",
];

/// Accepts the names in [`SUITES`] and the spelled-out `theorem-` prefix.
pub fn canonical_suite(name: &str) -> Option<&'static str> {
    let lower = name.trim().to_ascii_lowercase();
    let short = lower.strip_prefix("theorem-").map(|rest| format!("thm-{rest}")).unwrap_or(lower);
    SUITES.iter().copied().find(|s| *s == short)
}

#[derive(Debug, Clone)]
pub struct Params {
    pub n: Option<RangeInclusive<usize>>,
    pub trials: Option<usize>,
    pub seed: u64,
}

impl Params {
    pub fn seeded(seed: u64) -> Self {
        Params { n: None, trials: None, seed }
    }

    fn n_range(&self, default: RangeInclusive<usize>) -> Vec<usize> {
        self.n.clone().unwrap_or(default).collect()
    }

    fn trials(&self, default: usize) -> usize {
        self.trials.unwrap_or(default)
    }
}

#[derive(Debug, Clone)]
pub struct Invariant {
    pub name: String,
    pub checked: usize,
    pub failed: usize,
    pub elapsed: Duration,
    pub first_failure: Option<String>,
}

impl Invariant {
    fn new(name: &str) -> Self {
        Invariant { name: name.into(), checked: 0, failed: 0, elapsed: Duration::ZERO, first_failure: None }
    }

    /// An invariant passes when it was exercised and never failed.
    pub fn passed(&self) -> bool {
        self.checked > 0 && self.failed == 0
    }

    fn check(&mut self, f: impl FnOnce() -> Result<(), String>) {
        let start = Instant::now();
        let outcome = f();
        self.elapsed += start.elapsed();
        self.checked += 1;
        if let Err(detail) = outcome {
            self.failed += 1;
            self.first_failure.get_or_insert(detail);
        }
    }
}

fn ensure(ok: bool, detail: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(detail())
    }
}

#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub invariants: Vec<Invariant>,
    pub elapsed: Duration,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        !self.invariants.is_empty() && self.invariants.iter().all(Invariant::passed)
    }

    pub fn checked(&self) -> usize {
        self.invariants.iter().map(|i| i.checked).sum()
    }

    pub fn to_json(&self) -> Value {
        let invariants: Vec<Value> = self
            .invariants
            .iter()
            .map(|i| {
                json!({
                    "name": i.name,
                    "passed": i.passed(),
                    "checked": i.checked,
                    "failed": i.failed,
                    "millis": i.elapsed.as_millis() as u64,
                    "first_failure": i.first_failure,
                })
            })
            .collect();
        json!({
            "suite": self.suite,
            "seed": self.seed,
            "passed": self.passed(),
            "millis": self.elapsed.as_millis() as u64,
            "invariants": invariants,
        })
    }

    pub fn to_csv(&self) -> String {
        let mut out = crate::io::csv_line(["suite", "invariant", "passed", "checked", "failed", "millis"]);
        for i in &self.invariants {
            out.push_str(&crate::io::csv_line([
                self.suite.clone(),
                i.name.clone(),
                i.passed().to_string(),
                i.checked.to_string(),
                i.failed.to_string(),
                i.elapsed.as_millis().to_string(),
            ]));
        }
        out
    }
}

#[derive(Debug, thiserror::Error)]
#[error("unknown suite `{0}`; known suites: {list}", list = SUITES.join(", "))]
pub struct UnknownSuite(pub String);

pub fn run_suite(name: &str, params: &Params) -> Result<SuiteReport, UnknownSuite> {
    let suite = canonical_suite(name).ok_or_else(|| UnknownSuite(name.into()))?;
    let start = Instant::now();
    let invariants = match suite {
        "decomp" => decomp(params),
        "thm-2.3" => product_ds(params),
        "lemma-2.4" => inverse_ds(params),
        "lemma-2.9" => permutation_products(params),
        "thm-2.5" => transfer(params),
        "thm-2.6" => automorphisms(params),
        "birkhoff" => birkhoff(params),
        "preservers-positive" => preservers_positive(params),
        "preservers-negative" => preservers_negative(params),
        "example-4.4" => example_infeasible(params),
        "gram" => gram(params),
        _ => unreachable!("canonical names cover SUITES"),
    };
    Ok(SuiteReport { suite: suite.into(), seed: params.seed, invariants, elapsed: start.elapsed() })
}

fn pick<T: Copy>(items: &[T], t: usize) -> T {
    items[t % items.len()]
}

fn decomp(p: &Params) -> Vec<Invariant> {
    let ns = p.n_range(2..=8);
    let mut rng = SplitMix64::new(p.seed);
    let mut recon = Invariant::new("reconstruction A_DS + A_R + A_C = A");
    let mut members = Invariant::new("components lie in <DS>, R, C");
    let mut idem = Invariant::new("projection is idempotent");
    for t in 0..p.trials(1000) {
        let n = pick(&ns, t);
        // Mostly unstructured matrices, with every class mixed in.
        let space = if t % 2 == 0 { StochasticClass::General } else { pick(&StochasticClass::ALL, t / 2) };
        let a = sample(space, n, 1 + rng.index(n + 1), 6, &mut rng);
        let d = decompose(&a);
        recon.check(|| ensure(d.reconstruct() == a, || format!("n={n}: reconstruction differs for {a}")));
        members.check(|| {
            ensure(
                is_member(&d.a_ds, StochasticClass::SpanDS)
                    && is_member(&d.a_r, StochasticClass::SpanR)
                    && is_member(&d.a_c, StochasticClass::SpanC),
                || format!("n={n}: component outside its summand for {a}"),
            )
        });
        idem.check(|| {
            let again = decompose(&d.a_ds);
            let r = decompose(&d.a_r);
            let c = decompose(&d.a_c);
            ensure(
                again.a_ds == d.a_ds
                    && again.a_r.is_zero()
                    && again.a_c.is_zero()
                    && r.a_r == d.a_r
                    && r.a_ds.is_zero()
                    && c.a_c == d.a_c
                    && c.a_ds.is_zero(),
                || format!("n={n}: projection not idempotent for {a}"),
            )
        });
    }
    vec![recon, members, idem]
}

fn product_ds(p: &Params) -> Vec<Invariant> {
    let ns = p.n_range(2..=6);
    let mut rng = SplitMix64::new(p.seed);
    let mut ds = Invariant::new("(prod A_i)_DS = prod (A_i)_DS");
    let mut mixed = Invariant::new("single-factor replacement keeps trace and charpoly");
    let mut full = Invariant::new("prod (A_i)_DS has the trace and charpoly of prod A_i");
    for space in [StochasticClass::SpanRS, StochasticClass::SpanCS] {
        for t in 0..p.trials(500) {
            let n = pick(&ns, t);
            let m = 1 + t % 4;
            let factors: Vec<Matrix> = (0..m).map(|_| sample(space, n, 1, 6, &mut rng)).collect();
            let chain = match ProductChain::new(factors, space) {
                Ok(c) => c,
                Err(e) => {
                    ds.check(|| Err(format!("{space} n={n} m={m}: {e}")));
                    continue;
                }
            };
            let what = || format!("{space} n={n} m={m} factors {:?}", chain.factors());
            ds.check(|| match ds_part_of_product(&chain) {
                Ok(c) => ensure(c.equal, what),
                Err(e) => Err(e.to_string()),
            });
            let report = spectrum_transfer_report(&chain);
            mixed.check(|| match &report {
                Ok(r) => ensure(r.mixed_charpoly.iter().chain(&r.mixed_trace).all(|&b| b), what),
                Err(e) => Err(e.to_string()),
            });
            full.check(|| match &report {
                Ok(r) => ensure(r.full_charpoly && r.full_trace, what),
                Err(e) => Err(e.to_string()),
            });
        }
    }
    vec![ds, mixed, full]
}

fn inverse_ds(p: &Params) -> Vec<Invariant> {
    let ns = p.n_range(2..=6);
    let mut rng = SplitMix64::new(p.seed);
    let mut ident = Invariant::new("(A^-1)_DS A_DS = I");
    let mut closed = Invariant::new("A^-1 stays in <RS_n> and (A^-1)_DS = (A_DS)^-1");
    for t in 0..p.trials(200) {
        let n = pick(&ns, t);
        let a = match random_invertible(StochasticClass::SpanRS, n, rng.next_u64()) {
            Ok(a) => a,
            Err(e) => {
                ident.check(|| Err(format!("n={n}: {e}")));
                continue;
            }
        };
        ident.check(|| {
            let inv = a.inverse().map_err(|e| e.to_string())?;
            ensure(&ds_part(&inv) * &ds_part(&a) == Matrix::identity(n), || format!("n={n}: fails for {a}"))
        });
        closed.check(|| match ds_inverse_check(&a) {
            Ok(c) => ensure(c.holds(), || format!("n={n}: fails for {a}")),
            Err(e) => Err(format!("n={n}: {e}")),
        });
    }
    vec![ident, closed]
}

/// Permutation matrices plus non-permutation members of `space`.
fn generating_set(space: StochasticClass, n: usize) -> Vec<Matrix> {
    let mut out: Vec<Matrix> = Permutation::all(n).map(|p| p.to_matrix()).collect();
    let nn = Scalar::from_int(n as i64);
    let half = Scalar::frac(1, 2);
    let cycle = Permutation::new((1..n).chain([0]).collect()).expect("cycle").to_matrix();
    let j = Matrix::ones(n).scale(&nn.recip().expect("n >= 1"));
    let blend = &Matrix::identity(n).scale(&half) + &cycle.scale(&half);
    match space {
        StochasticClass::DS => out.extend([j, blend]),
        StochasticClass::RS | StochasticClass::CS => {
            // All rows equal to e_1, and I with its last row replaced by e_1.
            let mut collapse = Matrix::zero(n);
            let mut merge = Matrix::identity(n);
            for i in 0..n {
                collapse.set(i, 0, Scalar::one());
            }
            merge.set(n - 1, n - 1, Scalar::zero());
            merge.set(n - 1, 0, Scalar::one());
            let extra = [j, blend, collapse, merge];
            if space == StochasticClass::RS {
                out.extend(extra);
            } else {
                out.extend(extra.iter().map(Matrix::transpose));
            }
        }
        _ => unreachable!("stochastic sets only"),
    }
    out
}

fn permutation_products(p: &Params) -> Vec<Invariant> {
    let spaces = [StochasticClass::DS, StochasticClass::RS, StochasticClass::CS];
    let mut perm_chains = Invariant::new("chains of permutations give permutations");
    let mut mixed_chains = Invariant::new("a non-permutation factor gives a non-permutation product");
    let mut check_chain = |space: StochasticClass, factors: Vec<Matrix>| {
        let all_perm = factors.iter().all(stochastic_core::permutation::is_permutation_matrix);
        let n = factors[0].n();
        let chain = ProductChain::new(factors, space).expect("members of the space");
        let result = product_is_permutation(&chain).expect("stochastic space");
        let target = if all_perm { &mut perm_chains } else { &mut mixed_chains };
        target.check(|| {
            ensure(result.product_perm.is_some() == all_perm, || {
                format!("{space} n={n}: factors {:?}", chain.factors())
            })
        });
    };
    // Exhaustive over the generating set for n <= 3, m <= 3.
    for space in spaces {
        for n in 2..=3 {
            let gens = generating_set(space, n);
            for m in 1..=3u32 {
                for code in 0..gens.len().pow(m) {
                    let mut c = code;
                    let factors = (0..m)
                        .map(|_| {
                            let g = gens[c % gens.len()].clone();
                            c /= gens.len();
                            g
                        })
                        .collect();
                    check_chain(space, factors);
                }
            }
        }
    }
    let ns = p.n_range(2..=6);
    let mut rng = SplitMix64::new(p.seed);
    for t in 0..p.trials(300) {
        let space = pick(&spaces, t);
        let n = pick(&ns, t / 3);
        let m = 1 + rng.index(4);
        let factors = (0..m)
            .map(|_| {
                if rng.below(2) == 0 {
                    Permutation::new(rng.shuffled(n)).expect("shuffle").to_matrix()
                } else {
                    sample(space, n, 1 + rng.index(n + 1), 6, &mut rng)
                }
            })
            .collect();
        check_chain(space, factors);
    }
    vec![perm_chains, mixed_chains]
}

fn maps_agree(a: &[PreserverMap], b: &[PreserverMap], inputs: &[Matrix]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(f, g)| inputs.iter().all(|x| f.apply(x) == g.apply(x)))
}

fn transfer(p: &Params) -> Vec<Invariant> {
    let ns = p.n_range(4..=4);
    let trials = p.trials(200);
    let m = 3;
    let mut rng = SplitMix64::new(p.seed);
    let mut lift = Invariant::new("lift with seeded shifts preserves spectrum on <RS_n>");
    let mut back = Invariant::new("projection recovers the maps on <DS_n>");
    let mut ident = Invariant::new("psi(A)_DS = psi(A_DS)_DS");
    for &n in &ns {
        let form = match PreserverForm::random(Family::DsConj, n, m, rng.next_u64()) {
            Ok(f) => f,
            Err(e) => {
                lift.check(|| Err(e.to_string()));
                continue;
            }
        };
        let maps = construct(&form).expect("random forms are valid");
        let phis: Vec<LinearMap> = maps.iter().map(|f| f.as_linear().expect("linear").clone()).collect();
        let gammas: Vec<_> = (0..m).map(|_| seeded_shift(n, rng.next_u64())).collect();
        let seed = rng.next_u64();
        let mut lifted = None;
        lift.check(|| match lift_to_rs(&phis, &gammas, Property::Spectrum, trials, seed) {
            Ok(l) => {
                lifted = Some(l);
                Ok(())
            }
            Err(e) => Err(format!("n={n}: {e}")),
        });
        let Some(lifted) = lifted else { continue };
        let psis: Vec<Arc<dyn MatrixMap>> =
            lifted.iter().map(|f| Arc::new(f.clone()) as Arc<dyn MatrixMap>).collect();
        back.check(|| {
            let projected = project_to_ds(psis, Property::Spectrum, trials, seed ^ 1).map_err(|e| e.to_string())?;
            let mut inputs = span_basis(StochasticClass::SpanDS, n).expect("span").elements;
            inputs.extend((0..trials).map(|_| sample(StochasticClass::SpanDS, n, 1, 6, &mut rng)));
            ensure(maps_agree(&projected, &maps, &inputs), || format!("n={n}: projection differs from {form:?}"))
        });
        let id_seed = rng.next_u64();
        ident.check(|| {
            decomposition_identity_check(&lifted, trials, id_seed)
                .map_err(|(k, a)| format!("n={n}: map {} fails at {a}", k + 1))
        });
    }
    vec![lift, back, ident]
}

fn flip2() -> Matrix {
    Matrix::diagonal(&[Scalar::one(), Scalar::from_int(-1)])
}

fn automorphisms(p: &Params) -> Vec<Invariant> {
    let ns = p.n_range(2..=5);
    let spans = [StochasticClass::SpanDS, StochasticClass::SpanRS, StochasticClass::SpanCS];
    let mut rng = SplitMix64::new(p.seed);
    let mut auto = Invariant::new("conjugation by invertible P is an automorphism");
    let mut reject = Invariant::new("other conjugations on <DS_2> are rejected");
    let mut only_two = Invariant::new("<DS_2> has exactly the two catalogued automorphisms");
    for t in 0..p.trials(100) {
        let space = pick(&spans, t);
        let n = pick(&ns, t / spans.len());
        let pm = if space == StochasticClass::SpanDS && n == 2 {
            if rng.below(2) == 0 {
                Matrix::identity(2)
            } else {
                flip2()
            }
        } else {
            match random_invertible(space, n, rng.next_u64()) {
                Ok(pm) => pm,
                Err(e) => {
                    auto.check(|| Err(format!("{space} n={n}: {e}")));
                    continue;
                }
            }
        };
        let seed = rng.next_u64();
        auto.check(|| match automorphism(space, &pm) {
            Ok(map) => ensure(automorphism_check(&map, 8, seed), || format!("{space} n={n}: P = {pm}")),
            Err(e) => Err(format!("{space} n={n}: {e}")),
        });
    }
    if ns.contains(&2) {
        let catalogued: Vec<LinearMap> = [Matrix::identity(2), flip2()]
            .iter()
            .map(|q| automorphism(StochasticClass::SpanDS, q).expect("catalogued"))
            .collect();
        for _ in 0..p.trials(100).div_ceil(4) {
            let q = random_invertible(StochasticClass::SpanDS, 2, rng.next_u64()).expect("invertible");
            if q == Matrix::identity(2) {
                continue;
            }
            reject.check(|| {
                ensure(matches!(automorphism(StochasticClass::SpanDS, &q), Err(PreserverError::InvalidP(_))), || {
                    format!("P = {q} accepted")
                })
            });
        }
        // Every unital linear map on <DS_2> = span{I, S} sends S to a I + b S.
        // Sweep a grid of (a, b) and compare with the catalogue.
        let s = Permutation::swap(2, 0, 1).to_matrix();
        let id = Matrix::identity(2);
        let grid: Vec<Scalar> = [-2, -1, 0, 1, 2].iter().map(|&v| Scalar::from_int(v)).chain([Scalar::frac(1, 2)]).collect();
        for a in &grid {
            for b in &grid {
                let image_s = &id.scale(a) + &s.scale(b);
                only_two.check(|| {
                    let f = LinearMap::from_fn(StochasticClass::SpanDS, 2, |x| {
                        // x = u I + v S with v = x_12.
                        let v = x[(0, 1)].clone();
                        &id.scale(&x[(0, 0)]) + &image_s.scale(&v)
                    })
                    .map_err(|e| e.to_string())?;
                    let passes = automorphism_check(&f, 8, 3);
                    let listed = catalogued.contains(&f);
                    ensure(passes == listed, || format!("a={a}, b={b}: passes={passes}, catalogued={listed}"))
                });
            }
        }
    }
    vec![auto, reject, only_two]
}

fn birkhoff(p: &Params) -> Vec<Invariant> {
    let ns = p.n_range(2..=8);
    let mut rng = SplitMix64::new(p.seed);
    let mut recon = Invariant::new("exact reconstruction");
    let mut bound = Invariant::new("term count <= (n-1)^2 + 1");
    let mut weights = Invariant::new("weights positive and summing to 1");
    for t in 0..p.trials(300) {
        let n = pick(&ns, t);
        let k = 1 + rng.index(2 * n);
        let spec = RandomSpec::new(StochasticClass::DS, n, rng.next_u64()).with_terms(k);
        let a = random_matrix(&spec).expect("valid spec");
        let d = match birkhoff_decompose(&a) {
            Ok(d) => d,
            Err(e) => {
                recon.check(|| Err(format!("n={n}: {e}")));
                continue;
            }
        };
        recon.check(|| ensure(d.reconstruct() == a, || format!("n={n}: {a}")));
        bound.check(|| {
            ensure(d.terms.len() <= BirkhoffDecomposition::term_bound(n), || format!("n={n}: {} terms", d.terms.len()))
        });
        weights.check(|| {
            ensure(d.terms.iter().all(|t| t.weight.is_positive()) && d.weight_sum() == Scalar::one(), || {
                format!("n={n}: weights {:?}", d.terms.iter().map(|t| &t.weight).collect::<Vec<_>>())
            })
        });
    }
    vec![recon, bound, weights]
}

/// One catalogue entry: a label and the form.
pub struct CatalogueItem {
    pub label: String,
    pub form: PreserverForm,
}

/// Seeded forms covering every family, with the `n = 2` and `n >= 3`
/// branches listed separately.
pub fn positive_catalogue(ns: &[usize], seed: u64) -> Vec<CatalogueItem> {
    let mut rng = SplitMix64::new(seed);
    let mut out = Vec::new();
    let mut push = |label: String, form: Result<PreserverForm, PreserverError>| {
        let form = form.unwrap_or_else(|e| panic!("catalogue entry {label}: {e}"));
        out.push(CatalogueItem { label, form });
    };
    for &n in ns {
        for m in 1..=4 {
            let tag = |what: &str| format!("{what} n={n} m={m}");
            let mut witness_seeds: Vec<u64> = (0..m).map(|_| rng.next_u64()).collect();
            let mut random = |family| PreserverForm::random(family, n, m, rng.next_u64());
            if m == 1 {
                for transpose in [false, true] {
                    let mut f = random(Family::DsConj);
                    if let Ok(f) = f.as_mut() {
                        f.transpose = transpose;
                    }
                    push(tag(if transpose { "DS_conj transposed" } else { "DS_conj" }), f);
                }
            } else {
                push(tag("DS_conj"), random(Family::DsConj));
            }
            if m == 2 {
                push(tag("DS_pair_transpose"), random(Family::DsPairTranspose));
            }
            if n == 2 {
                push(tag("SpanDS_n2"), random(Family::SpanDsN2));
                push(tag("RS_n2_scaled"), random(Family::RsN2Scaled));
            } else {
                push(tag("SpanDS_conj"), random(Family::SpanDsConj));
                if m <= 2 {
                    push(tag("SpanDS_transpose"), random(Family::SpanDsTranspose));
                }
            }
            if n >= 3 || m >= 2 {
                for (label, rule) in [("RS_full conjugate", None), ("RS_full witness", Some(()))] {
                    let mut f = random(Family::RsFull);
                    if let Ok(f) = f.as_mut() {
                        f.gamma = (0..m)
                            .map(|_| match rule {
                                None => ShiftRule::Conjugate,
                                Some(()) => ShiftRule::Witness(witness_seeds.pop().expect("one per map")),
                            })
                            .collect();
                    }
                    push(tag(label), f);
                }
            }
            push(tag("RS_span"), random(Family::RsSpan));
        }
    }
    out
}

/// Basis of the span algebra plus seeded samples of `space`.
fn probe_inputs(space: StochasticClass, n: usize, count: usize, rng: &mut SplitMix64) -> Vec<Matrix> {
    let mut inputs = span_basis(StochasticClass::SpanDS, n).expect("span").elements;
    if space.span() != StochasticClass::SpanDS {
        inputs.extend(span_basis(space.span(), n).expect("span").elements);
    }
    inputs.extend((0..count).map(|_| sample(space, n, 1 + rng.index(n + 1), 6, rng)));
    inputs
}

fn preservers_positive(p: &Params) -> Vec<Invariant> {
    let ns = p.n_range(2..=5);
    let trials = p.trials(200);
    let mut rng = SplitMix64::new(p.seed);
    let mut built = Invariant::new("catalogue forms construct with range checks");
    let mut trace = Invariant::new("verify trace");
    let mut spectrum = Invariant::new("verify spectrum");
    let mut ds_round = Invariant::new("classify recovers DS families");
    let mut span_round = Invariant::new("classify recovers span families up to action");
    let mut rs_round = Invariant::new("classify recovers linear RS families up to action");
    for item in positive_catalogue(&ns, rng.next_u64()) {
        let form = &item.form;
        let label = &item.label;
        let space = form.family.space();
        let mut maps = None;
        built.check(|| match construct(form) {
            Ok(m) => {
                maps = Some(m);
                Ok(())
            }
            Err(e) => Err(format!("{label}: {e}")),
        });
        let Some(maps) = maps else { continue };
        for (property, inv) in [(Property::Trace, &mut trace), (Property::Spectrum, &mut spectrum)] {
            let seed = rng.next_u64();
            inv.check(|| {
                let r = verify(&maps, property, space, trials, seed);
                ensure(r.holds, || format!("{label}: {:?}", r.counterexample))
            });
        }
        let n = form.n;
        let inputs = probe_inputs(space, n, 8, &mut rng);
        let recovered = classify_maps(&maps, space, ClassifyOptions::default());
        let same_action = |r: &PreserverForm| {
            construct(r).map(|rebuilt| maps_agree(&rebuilt, &maps, &inputs)).unwrap_or(false)
        };
        match form.family {
            Family::DsConj | Family::DsPairTranspose => ds_round.check(|| match &recovered {
                // DS_2 is commutative and symmetric, so parameters are only
                // determined up to action there.
                Ok(r) if n >= 3 => ensure(r == form, || format!("{label}: recovered {r:?}")),
                Ok(r) => ensure(same_action(r), || format!("{label}: recovered {r:?}")),
                Err(e) => Err(format!("{label}: {e}")),
            }),
            Family::SpanDsConj | Family::SpanDsTranspose | Family::SpanDsN2 => span_round.check(|| match &recovered {
                Ok(r) => ensure(same_action(r), || format!("{label}: recovered {r:?}")),
                Err(e) => Err(format!("{label}: {e}")),
            }),
            Family::RsN2Scaled => rs_round.check(|| match &recovered {
                Ok(r) => ensure(same_action(r), || format!("{label}: recovered {r:?}")),
                Err(e) => Err(format!("{label}: {e}")),
            }),
            Family::RsFull if form.gamma_rules().iter().all(|g| *g == ShiftRule::Conjugate) => {
                rs_round.check(|| match &recovered {
                    Ok(r) => ensure(same_action(r), || format!("{label}: recovered {r:?}")),
                    Err(e) => Err(format!("{label}: {e}")),
                })
            }
            _ => {}
        }
    }
    vec![built, trace, spectrum, ds_round, span_round, rs_round]
}

/// `A -> A^t` three times on `DS_3`.
pub fn transpose_triple() -> PreserverForm {
    let id = Permutation::identity(3);
    let mut form = PreserverForm::from_permutations(Family::DsConj, &[id.clone(), id.clone(), id]);
    form.transpose = true;
    form
}

fn preservers_negative(p: &Params) -> Vec<Invariant> {
    let trials = p.trials(200);
    let mut rng = SplitMix64::new(p.seed);
    let mut triple = Invariant::new("m = 3 transposes on DS_3 fail spectrum with a counterexample");
    let mut rejected = Invariant::new("non-canonical forms are rejected by construct");
    let mut escape = Invariant::new("|c| > 1 on RS_2 escapes the range");
    let mut infeasible = Invariant::new("Example B: shift infeasible for n = 3..8");
    let mut gram_inv = Invariant::new("Gram matrix invertible on <DS_n>, singular on <RS_n>, <CS_n>");
    let mut perturbed = Invariant::new("perturbed maps are not canonical");

    let form = transpose_triple();
    rejected.check(|| ensure(matches!(construct(&form), Err(PreserverError::InvalidForm(_))), || "accepted".into()));
    let maps = construct_unchecked(&form).expect("structurally sound");
    let seed = rng.next_u64();
    triple.check(|| {
        let r = verify(&maps, Property::Spectrum, StochasticClass::DS, trials, seed);
        let c = r.counterexample.as_ref().ok_or("no counterexample found")?;
        ensure(!r.holds && matches!(c.evidence, Evidence::Spectrum { .. }), || format!("{c:?}"))?;
        ensure(c.recheck(&maps, Property::Spectrum, StochasticClass::DS), || "counterexample does not recheck".into())
    });

    for c in [Scalar::from_int(2), Scalar::frac(-3, 2)] {
        let mut form = PreserverForm::random(Family::RsN2Scaled, 2, 2, rng.next_u64()).expect("valid");
        form.c = Some(c.clone());
        escape.check(|| {
            ensure(matches!(construct(&form), Err(PreserverError::RangeEscape { .. })), || format!("c = {c} accepted"))?;
            let maps = construct_unchecked(&form).map_err(|e| e.to_string())?;
            let r = verify(&maps, Property::Spectrum, StochasticClass::RS, trials, 7);
            ensure(
                r.counterexample.as_ref().is_some_and(|x| matches!(x.evidence, Evidence::RangeEscape { .. })),
                || format!("c = {c}: {r:?}"),
            )
        });
    }

    infeasible.extend_from(example_infeasible(&Params { n: Some(3..=8), ..p.clone() }));
    gram_inv.extend_from(gram(&Params { n: Some(2..=6), ..p.clone() }));

    for n in [3, 4] {
        let base = construct(&PreserverForm::random(Family::SpanDsConj, n, 2, rng.next_u64()).expect("valid"))
            .expect("valid");
        let f = base[0].as_linear().expect("linear").clone();
        let g = base[1].as_linear().expect("linear").clone();
        // Add a multiple of the trace functional times J to the first map.
        let j = Matrix::ones(n);
        let bent = LinearMap::from_fn(StochasticClass::SpanDS, n, |a| &f.apply(a) + &j.scale(&a[(0, 0)]))
            .expect("in span");
        perturbed.check(|| {
            let r = classify_maps(&[bent.clone(), g.clone()], StochasticClass::SpanDS, ClassifyOptions::default());
            ensure(matches!(r, Err(PreserverError::NotCanonical(_))), || format!("n={n}: {r:?}"))
        });
    }
    vec![triple, rejected, escape, infeasible, gram_inv, perturbed]
}

impl Invariant {
    /// Folds the sub-invariants of another suite into this one.
    fn extend_from(&mut self, others: Vec<Invariant>) {
        for o in others {
            self.checked += o.checked;
            self.failed += o.failed;
            self.elapsed += o.elapsed;
            if self.first_failure.is_none() {
                self.first_failure = o.first_failure.map(|d| format!("{}: {d}", o.name));
            }
        }
    }
}

fn example_infeasible(p: &Params) -> Vec<Invariant> {
    let mut member = Invariant::new("B is row stochastic");
    let mut verdict = Invariant::new("(B_DS)^t admits no zero-sum shift");
    let mut bound = Invariant::new("bound sum matches the closed form and is positive");
    for n in p.n_range(3..=8) {
        let b = example_b(n);
        member.check(|| ensure(is_member(&b, StochasticClass::RS), || format!("n={n}: {b}")));
        let m = ds_part(&b).transpose();
        let f = rs_shift_feasible(&m);
        verdict.check(|| ensure(!f.feasible && f.witness.is_none(), || format!("n={n}: feasible")));
        bound.check(|| {
            ensure(f.bound_sum == example_bound(n) && f.bound_sum.is_positive(), || {
                format!("n={n}: bound sum {} vs {}", f.bound_sum, example_bound(n))
            })
        });
    }
    vec![member, verdict, bound]
}

fn gram(p: &Params) -> Vec<Invariant> {
    let mut ds = Invariant::new("<DS_n> Gram matrix invertible");
    let mut rs = Invariant::new("<RS_n> Gram matrix singular");
    let mut cs = Invariant::new("<CS_n> Gram matrix singular");
    for n in p.n_range(2..=6) {
        for (space, inv, want) in [
            (StochasticClass::SpanDS, &mut ds, true),
            (StochasticClass::SpanRS, &mut rs, false),
            (StochasticClass::SpanCS, &mut cs, false),
        ] {
            inv.check(|| match gram_nondegenerate(space, n) {
                Ok(g) => ensure(g.invertible == want && (g.gram.det().is_zero() != want), || {
                    format!("{space} n={n}: det {}", g.gram.det())
                }),
                Err(e) => Err(e.to_string()),
            });
        }
    }
    vec![ds, rs, cs]
}
