//! Matrix, form and map documents.
//!
//! Matrices are `{"n": 3, "entries": [["1/2", "1/2", "0"], ...]}` in JSON or
//! `n` rows of comma-separated `p/q` tokens in CSV. Entries are strings
//! (`"p/q"` or an integer); plain JSON integers are accepted on input.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use stochastic_core::preservers::{Family, LinearMap, PreserverForm, ShiftRule};
use stochastic_core::stochastic::{span_basis, StochasticClass};
use stochastic_core::{matrix_to_perm, Matrix, Permutation, Scalar};

pub const DEFAULT_MAX_N: usize = 12;

#[derive(Debug, thiserror::Error)]
pub enum InputError {
    #[error("malformed matrix: {0}")]
    Malformed(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("schema violation: {0}")]
    Schema(String),
    #[error("dimension {n} exceeds STOCH_MAX_N = {max}")]
    TooLarge { n: usize, max: usize },
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

/// The dimension cap from `STOCH_MAX_N`, default 12.
pub fn max_n() -> usize {
    std::env::var("STOCH_MAX_N").ok().and_then(|v| v.trim().parse().ok()).unwrap_or(DEFAULT_MAX_N)
}

pub fn check_n(n: usize) -> Result<(), InputError> {
    let max = max_n();
    if n > max {
        return Err(InputError::TooLarge { n, max });
    }
    Ok(())
}

/// A scalar as it appears in documents.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Token {
    Text(String),
    Int(i64),
}

impl Token {
    pub fn to_scalar(&self) -> Result<Scalar, InputError> {
        match self {
            Token::Text(s) => s.parse().map_err(|_| InputError::Malformed(format!("bad rational `{s}`"))),
            Token::Int(v) => Ok(Scalar::from_int(*v)),
        }
    }
}

pub fn scalar_json(s: &Scalar) -> Value {
    Value::String(s.to_string())
}

pub fn scalars_json(v: &[Scalar]) -> Value {
    Value::Array(v.iter().map(scalar_json).collect())
}

fn rows_json(a: &Matrix) -> Value {
    Value::Array(a.rows().map(scalars_json).collect())
}

pub fn matrix_json(a: &Matrix) -> Value {
    json!({ "n": a.n(), "entries": rows_json(a) })
}

/// Builds a square matrix from rows of tokens.
pub fn matrix_from_rows(rows: &[Vec<Token>]) -> Result<Matrix, InputError> {
    let n = rows.len();
    if n == 0 {
        return Err(InputError::Malformed("no rows".into()));
    }
    check_n(n)?;
    let mut out = Vec::with_capacity(n);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != n {
            return Err(InputError::Dimension(format!("row {} has {} entries, expected {n}", i + 1, row.len())));
        }
        out.push(row.iter().map(Token::to_scalar).collect::<Result<Vec<_>, _>>()?);
    }
    Matrix::from_rows(out).map_err(|e| InputError::Malformed(e.to_string()))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixDoc {
    n: usize,
    entries: Vec<Vec<Token>>,
}

pub fn parse_matrix_json(text: &str) -> Result<Matrix, InputError> {
    let doc: MatrixDoc = serde_json::from_str(text).map_err(|e| InputError::Schema(e.to_string()))?;
    if doc.entries.len() != doc.n {
        return Err(InputError::Dimension(format!("n = {} but {} rows given", doc.n, doc.entries.len())));
    }
    matrix_from_rows(&doc.entries)
}

pub fn parse_matrix_csv(text: &str) -> Result<Matrix, InputError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| InputError::Malformed(e.to_string()))?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        rows.push(record.iter().map(|t| Token::Text(t.to_string())).collect());
    }
    matrix_from_rows(&rows)
}

/// JSON if the text starts with `{`, CSV otherwise.
pub fn parse_matrix(text: &str) -> Result<Matrix, InputError> {
    if text.trim_start().starts_with('{') {
        parse_matrix_json(text)
    } else {
        parse_matrix_csv(text)
    }
}

/// Reads a file, or stdin for `-`.
pub fn read_text(path: &Path) -> Result<String, InputError> {
    let io_err = |source| InputError::Io { path: path.display().to_string(), source };
    if path.as_os_str() == "-" {
        std::io::read_to_string(std::io::stdin()).map_err(io_err)
    } else {
        std::fs::read_to_string(path).map_err(io_err)
    }
}

pub fn read_matrix(path: &Path) -> Result<Matrix, InputError> {
    parse_matrix(&read_text(path)?)
}

pub fn csv_line<I, S>(fields: I) -> String
where
    I: IntoIterator<Item = S>,
    S: AsRef<[u8]>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(fields).expect("in-memory write");
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

pub fn matrix_csv(a: &Matrix) -> String {
    a.rows().map(|r| csv_line(r.iter().map(|s| s.to_string()))).collect()
}

/// Form document. Permutation families list `perms` as 1-based images
/// (`[2, 1, 3]`); span families list matrices as rows.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FormDoc {
    pub family: String,
    pub m: usize,
    pub n: usize,
    pub perms: Vec<Value>,
    #[serde(default)]
    pub transpose: bool,
    #[serde(default)]
    pub c: Option<Token>,
    #[serde(default)]
    pub q_factors: Vec<Vec<Vec<Token>>>,
    #[serde(default)]
    pub gamma: Vec<String>,
}

fn schema(e: impl std::fmt::Display) -> InputError {
    InputError::Schema(e.to_string())
}

fn perm_entry(v: &Value, family: Family, n: usize) -> Result<Matrix, InputError> {
    if let Ok(image) = serde_json::from_value::<Vec<usize>>(v.clone()) {
        if !family.uses_permutations() {
            return Err(InputError::Schema(format!("{family} takes matrices, not permutations")));
        }
        let p = Permutation::from_one_based(&image).map_err(schema)?;
        if p.n() != n {
            return Err(InputError::Dimension(format!("permutation of size {}, expected {n}", p.n())));
        }
        return Ok(p.to_matrix());
    }
    let rows: Vec<Vec<Token>> = serde_json::from_value(v.clone()).map_err(schema)?;
    let a = matrix_from_rows(&rows)?;
    if a.n() != n {
        return Err(InputError::Dimension(format!("parameter matrix of size {}, expected {n}", a.n())));
    }
    Ok(a)
}

impl FormDoc {
    pub fn to_form(&self) -> Result<PreserverForm, InputError> {
        let family: Family = self.family.parse().map_err(schema)?;
        check_n(self.n)?;
        let perms = self.perms.iter().map(|v| perm_entry(v, family, self.n)).collect::<Result<_, _>>()?;
        let c = self.c.as_ref().map(Token::to_scalar).transpose()?;
        let q_factors = self.q_factors.iter().map(|q| matrix_from_rows(q)).collect::<Result<_, _>>()?;
        let gamma = self.gamma.iter().map(|g| g.parse::<ShiftRule>()).collect::<Result<_, _>>().map_err(schema)?;
        Ok(PreserverForm { family, m: self.m, n: self.n, perms, transpose: self.transpose, c, q_factors, gamma })
    }
}

pub fn parse_form(text: &str) -> Result<PreserverForm, InputError> {
    let doc: FormDoc = serde_json::from_str(text).map_err(schema)?;
    doc.to_form()
}

pub fn form_json(form: &PreserverForm) -> Value {
    let perms: Vec<Value> = form
        .perms
        .iter()
        .map(|p| match matrix_to_perm(p) {
            Ok(perm) if form.family.uses_permutations() => json!(perm.one_based()),
            _ => rows_json(p),
        })
        .collect();
    let gamma: Vec<String> = if matches!(form.family, Family::RsFull | Family::RsSpan) {
        form.gamma_rules().iter().map(ToString::to_string).collect()
    } else {
        Vec::new()
    };
    json!({
        "family": form.family.tag(),
        "m": form.m,
        "n": form.n,
        "perms": perms,
        "transpose": form.transpose,
        "c": form.c.as_ref().map(scalar_json),
        "q_factors": form.q_factors.iter().map(rows_json).collect::<Vec<_>>(),
        "gamma": gamma,
    })
}

/// Linear maps on a span algebra, each given by the images of the span
/// basis in order (for `<DS_n>`: the `D_ij` row by row, then `I`).
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MapsDoc {
    space: String,
    n: usize,
    maps: Vec<Vec<Vec<Vec<Token>>>>,
}

pub fn parse_maps(text: &str) -> Result<(StochasticClass, Vec<LinearMap>), InputError> {
    let doc: MapsDoc = serde_json::from_str(text).map_err(schema)?;
    let space: StochasticClass = doc.space.parse().map_err(schema)?;
    check_n(doc.n)?;
    let basis = span_basis(space, doc.n).map_err(schema)?;
    if doc.maps.is_empty() {
        return Err(InputError::Schema("no maps given".into()));
    }
    let mut out = Vec::with_capacity(doc.maps.len());
    for (k, images) in doc.maps.iter().enumerate() {
        if images.len() != basis.dim() {
            return Err(InputError::Dimension(format!(
                "map {} lists {} images, the basis has {}",
                k + 1,
                images.len(),
                basis.dim()
            )));
        }
        let images: Vec<Matrix> = images.iter().map(|rows| matrix_from_rows(rows)).collect::<Result<_, _>>()?;
        if images.iter().any(|a| a.n() != doc.n) {
            return Err(InputError::Dimension(format!("map {} has an image of the wrong size", k + 1)));
        }
        let mut columns = Vec::with_capacity(images.len());
        for a in &images {
            columns.push(basis.coordinates(a).map_err(|e| InputError::Schema(format!("map {}: {e}", k + 1)))?);
        }
        let rep = Matrix::from_fn(basis.dim(), |i, j| columns[j][i].clone());
        out.push(LinearMap::from_rep(space, doc.n, rep).map_err(schema)?);
    }
    Ok((space, out))
}

pub fn maps_json(space: StochasticClass, maps: &[LinearMap]) -> Value {
    let n = maps.first().map_or(0, |m| m.basis().n);
    let images: Vec<Vec<Value>> = maps
        .iter()
        .map(|f| {
            f.basis()
                .elements
                .iter()
                .map(|b| rows_json(&stochastic_core::preservers::MatrixMap::apply(f, b)))
                .collect()
        })
        .collect();
    json!({ "space": space.tag(), "n": n, "maps": images })
}
