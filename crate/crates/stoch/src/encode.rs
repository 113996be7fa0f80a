//! JSON encodings of results. Every rational is a string.

use std::collections::BTreeSet;

use serde_json::{json, Value};
use stochastic_core::birkhoff::BirkhoffDecomposition;
use stochastic_core::preservers::{Counterexample, Evidence, Feasibility, VerificationReport};
use stochastic_core::{CharPoly, Decomposition, StochasticClass};

use crate::io::{csv_line, matrix_csv, matrix_json, scalar_json, scalars_json};

pub fn decomposition_json(d: &Decomposition) -> Value {
    json!({
        "n": d.a_ds.n(),
        "a_ds": matrix_json(&d.a_ds),
        "a_r": matrix_json(&d.a_r),
        "a_c": matrix_json(&d.a_c),
        "s_a": scalar_json(&d.s_a),
        "r": scalars_json(&d.r_vec),
        "c": scalars_json(&d.c_vec),
    })
}

/// Three blocks, each a label line followed by the matrix rows.
pub fn decomposition_csv(d: &Decomposition) -> String {
    let mut out = String::new();
    for (label, a) in [("a_ds", &d.a_ds), ("a_r", &d.a_r), ("a_c", &d.a_c)] {
        out.push_str(&csv_line([label]));
        out.push_str(&matrix_csv(a));
    }
    out
}

pub fn classes_json(classes: &BTreeSet<StochasticClass>) -> Value {
    json!(classes.iter().map(|c| c.tag()).collect::<Vec<_>>())
}

pub fn charpoly_json(p: &CharPoly) -> Value {
    json!({ "coeffs": scalars_json(p.coeffs()), "display": p.to_string() })
}

pub fn birkhoff_json(d: &BirkhoffDecomposition) -> Value {
    Value::Array(d.terms.iter().map(|t| json!({ "w": scalar_json(&t.weight), "perm": t.perm.one_based() })).collect())
}

/// One line per term: the weight, then the 1-based images.
pub fn birkhoff_csv(d: &BirkhoffDecomposition) -> String {
    d.terms
        .iter()
        .map(|t| csv_line(std::iter::once(t.weight.to_string()).chain(t.perm.one_based().iter().map(|v| v.to_string()))))
        .collect()
}

pub fn counterexample_json(c: &Counterexample) -> Value {
    let inputs: Vec<Value> = c.inputs.iter().map(matrix_json).collect();
    let evidence = match &c.evidence {
        Evidence::Trace { lhs, rhs } => json!({ "kind": "trace", "lhs": scalar_json(lhs), "rhs": scalar_json(rhs) }),
        Evidence::Spectrum { lhs, rhs } => json!({ "kind": "spectrum", "lhs": charpoly_json(lhs), "rhs": charpoly_json(rhs) }),
        Evidence::RangeEscape { map, image } => json!({ "kind": "range_escape", "map": map + 1, "image": matrix_json(image) }),
    };
    json!({ "inputs": inputs, "evidence": evidence })
}

/// A passing verdict is evidence from sampling; a failing one is a
/// certificate that can be rechecked.
pub fn report_json(r: &VerificationReport) -> Value {
    json!({
        "property": r.property.to_string(),
        "space": r.space.tag(),
        "trials": r.trials,
        "holds": r.holds,
        "verdict": if r.holds { "evidence" } else { "certificate" },
        "counterexample": r.counterexample.as_ref().map(counterexample_json),
    })
}

pub fn feasibility_json(f: &Feasibility) -> Value {
    json!({
        "feasible": f.feasible,
        "bounds": scalars_json(&f.bounds),
        "bound_sum": scalar_json(&f.bound_sum),
        "witness": f.witness.as_deref().map(scalars_json),
    })
}

pub fn verdict_json(identity: &str, holds: bool, witness: Value) -> Value {
    json!({ "identity": identity, "holds": holds, "witness": witness })
}
