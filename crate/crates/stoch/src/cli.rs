use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use stochastic_core::birkhoff::birkhoff_decompose;
use stochastic_core::preservers::{
    classify_maps, construct_unchecked, example_b, rs_shift_feasible, verify, ClassifyOptions, Family, LinearMap,
    PreserverError, PreserverForm, PreserverMap, Property,
};
use stochastic_core::spectral::{
    ds_inverse_check, ds_part_of_product, product_is_permutation, spectrum_transfer_report, ProductChain,
};
use stochastic_core::stochastic::{ds_part, is_member};
use stochastic_core::{charpoly, classify, decompose, Matrix, StochasticClass};

use crate::encode::*;
use crate::io::{self, check_n, form_json, matrix_json, read_matrix, read_text, InputError};
use crate::selftest::{self, Params, SuiteReport, SUITES};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILS: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "stoch", version, about = "Exact tools for stochastic matrices and their preservers")]
pub struct Cli {
    /// Output format. CSV is available for matrix-shaped results.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Split A into A_DS + A_R + A_C.
    Decompose { input: PathBuf },
    /// List the classes A belongs to.
    Classify { input: PathBuf },
    /// Characteristic polynomial det(xI - A).
    Charpoly { input: PathBuf },
    /// Convex combination of permutations for a doubly stochastic matrix.
    Birkhoff { input: PathBuf },
    /// Check an identity on concrete matrices: thm-2.3 (DS part of a
    /// product), lemma-2.4 (DS part of an inverse), lemma-2.9 (permutation
    /// products).
    IdentityCheck {
        #[arg(long)]
        identity: String,
        /// Space of the factors; inferred when omitted.
        #[arg(long)]
        space: Option<String>,
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
    /// Emit a seeded form of a preserver family.
    PreserverGen {
        #[arg(long)]
        family: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        seed: u64,
    },
    /// Sample inputs and compare trace or spectrum exactly.
    PreserverVerify {
        #[command(flatten)]
        source: MapSource,
        #[arg(long, default_value = "spectrum")]
        property: String,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long)]
        seed: u64,
    },
    /// Recover a canonical form from maps.
    PreserverClassify {
        #[command(flatten)]
        source: MapSource,
        /// Require a rank-one-preserving map for m = 2 on span algebras.
        #[arg(long)]
        rank_precheck: bool,
    },
    /// Decide whether M + e w^t >= 0 for some zero-sum w.
    Feasible {
        #[arg(required_unless_present = "example")]
        input: Option<PathBuf>,
        /// Use (B_DS)^t for the row-stochastic example B of size N.
        #[arg(long, value_name = "N", conflicts_with = "input")]
        example: Option<usize>,
    },
    /// Run a named suite, or `all`.
    Selftest {
        #[arg(long)]
        suite: String,
        /// A size or a range such as `3..8` (inclusive).
        #[arg(long)]
        n: Option<String>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Debug, clap::Args)]
#[group(required = true, multiple = false)]
pub struct MapSource {
    /// Form document; maps are built from it as given.
    #[arg(long)]
    form: Option<PathBuf>,
    /// Linear maps given by basis images.
    #[arg(long)]
    maps: Option<PathBuf>,
    /// Space to sample from / classify on. Defaults to the family's space
    /// or the maps' domain.
    #[arg(long)]
    space: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Output {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Input errors; a failing property is a normal result with exit code 1.
#[derive(Debug)]
enum Fail {
    Input(String),
}

impl From<InputError> for Fail {
    fn from(e: InputError) -> Self {
        Fail::Input(e.to_string())
    }
}

fn bad_input(e: impl std::fmt::Display) -> Fail {
    Fail::Input(e.to_string())
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> Output
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => execute(&cli),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            if e.use_stderr() {
                Output { code, stdout: String::new(), stderr: text }
            } else {
                Output { code, stdout: text, stderr: String::new() }
            }
        }
    }
}

pub fn execute(cli: &Cli) -> Output {
    match dispatch(cli) {
        Ok((holds, stdout)) => Output { code: if holds { EXIT_OK } else { EXIT_FAILS }, stdout, stderr: String::new() },
        Err(Fail::Input(msg)) => Output { code: EXIT_INPUT, stdout: String::new(), stderr: format!("error: {msg}\n") },
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialise");
    s.push('\n');
    s
}

/// JSON, or the CSV rendering when one exists for this verb.
fn emit(format: Format, json: Value, csv: Option<String>) -> Result<String, Fail> {
    match (format, csv) {
        (Format::Json, _) => Ok(pretty(&json)),
        (Format::Csv, Some(c)) => Ok(c),
        (Format::Csv, None) => Err(Fail::Input("csv output is not available for this command".into())),
    }
}

fn dispatch(cli: &Cli) -> Result<(bool, String), Fail> {
    let f = cli.format;
    match &cli.command {
        Command::Decompose { input } => {
            let d = decompose(&read_matrix(input)?);
            Ok((true, emit(f, decomposition_json(&d), Some(decomposition_csv(&d)))?))
        }
        Command::Classify { input } => {
            let c = classify(&read_matrix(input)?);
            let csv = io::csv_line(c.iter().map(|t| t.tag()));
            Ok((true, emit(f, classes_json(&c), Some(csv))?))
        }
        Command::Charpoly { input } => {
            let p = charpoly(&read_matrix(input)?);
            let csv = io::csv_line(p.coeffs().iter().map(|c| c.to_string()));
            Ok((true, emit(f, charpoly_json(&p), Some(csv))?))
        }
        Command::Birkhoff { input } => {
            let d = birkhoff_decompose(&read_matrix(input)?).map_err(bad_input)?;
            Ok((true, emit(f, birkhoff_json(&d), Some(birkhoff_csv(&d)))?))
        }
        Command::IdentityCheck { identity, space, inputs } => {
            let factors = inputs.iter().map(|p| read_matrix(p)).collect::<Result<Vec<_>, _>>()?;
            let space = space.as_deref().map(str::parse::<StochasticClass>).transpose().map_err(bad_input)?;
            let (holds, v) = identity_check(identity, space, factors)?;
            Ok((holds, emit(f, v, None)?))
        }
        Command::PreserverGen { family, n, m, seed } => {
            let family: Family = family.parse().map_err(bad_input)?;
            check_n(*n)?;
            let form = PreserverForm::random(family, *n, *m, *seed).map_err(bad_input)?;
            Ok((true, emit(f, form_json(&form), None)?))
        }
        Command::PreserverVerify { source, property, trials, seed } => {
            let property: Property = property.parse().map_err(bad_input)?;
            let loaded = load_maps(source)?;
            let report = verify(&loaded.maps, property, loaded.space, *trials, *seed);
            let mut v = report_json(&report);
            if let Some(form) = &loaded.form {
                v["form"] = form_json(form);
                v["canonical"] = json!(form.validate().is_ok());
            }
            Ok((report.holds, emit(f, v, None)?))
        }
        Command::PreserverClassify { source, rank_precheck } => {
            let loaded = load_maps(source)?;
            let options = ClassifyOptions { rank_precheck: *rank_precheck };
            match classify_maps(&loaded.maps, loaded.space, options) {
                Ok(form) => Ok((true, emit(f, json!({ "canonical": true, "form": form_json(&form) }), None)?)),
                Err(PreserverError::NotCanonical(reason)) => {
                    Ok((false, emit(f, json!({ "canonical": false, "reason": reason }), None)?))
                }
                Err(e) => Err(bad_input(e)),
            }
        }
        Command::Feasible { input: path, example } => {
            let m = match (path, example) {
                (Some(p), _) => read_matrix(p)?,
                (None, Some(n)) => {
                    if *n < 2 {
                        return Err(Fail::Input("the example needs n >= 2".into()));
                    }
                    check_n(*n)?;
                    ds_part(&example_b(*n)).transpose()
                }
                (None, None) => return Err(Fail::Input("give a matrix or --example".into())),
            };
            let feas = rs_shift_feasible(&m);
            let mut v = feasibility_json(&feas);
            v["matrix"] = matrix_json(&m);
            let csv = io::csv_line(
                [feas.feasible.to_string(), feas.bound_sum.to_string()]
                    .into_iter()
                    .chain(feas.witness.iter().flatten().map(|w| w.to_string())),
            );
            Ok((true, emit(f, v, Some(csv))?))
        }
        Command::Selftest { suite, n, trials, seed } => {
            let n = n.as_deref().map(parse_range).transpose()?;
            if let Some(r) = &n {
                check_n(*r.end())?;
            }
            let params = Params { n, trials: *trials, seed: *seed };
            let names: Vec<&str> = if suite.eq_ignore_ascii_case("all") { SUITES.to_vec() } else { vec![suite] };
            let mut reports: Vec<SuiteReport> = Vec::new();
            for name in names {
                reports.push(selftest::run_suite(name, &params).map_err(bad_input)?);
            }
            let passed = reports.iter().all(SuiteReport::passed);
            let json = if reports.len() == 1 {
                reports[0].to_json()
            } else {
                json!({ "passed": passed, "suites": reports.iter().map(SuiteReport::to_json).collect::<Vec<_>>() })
            };
            let csv = reports.iter().enumerate().map(|(k, r)| {
                let text = r.to_csv();
                // Keep a single header line across suites.
                if k == 0 { text } else { text.lines().skip(1).map(|l| format!("{l}\n")).collect() }
            });
            Ok((passed, emit(f, json, Some(csv.collect()))?))
        }
    }
}

/// `4`, `3..8` or `3..=8`, all inclusive.
fn parse_range(s: &str) -> Result<std::ops::RangeInclusive<usize>, Fail> {
    let bad = || Fail::Input(format!("bad size range `{s}`"));
    let num = |t: &str| t.trim().parse::<usize>().map_err(|_| bad());
    let range = match s.split_once("..") {
        Some((lo, hi)) => num(lo)?..=num(hi.strip_prefix('=').unwrap_or(hi))?,
        None => {
            let v = num(s)?;
            v..=v
        }
    };
    if range.is_empty() || *range.start() == 0 {
        return Err(bad());
    }
    Ok(range)
}

struct LoadedMaps {
    maps: Vec<PreserverMap>,
    space: StochasticClass,
    form: Option<PreserverForm>,
}

fn load_maps(source: &MapSource) -> Result<LoadedMaps, Fail> {
    let space_flag = source.space.as_deref().map(str::parse::<StochasticClass>).transpose().map_err(bad_input)?;
    if let Some(path) = &source.form {
        let form = io::parse_form(&read_text(path)?)?;
        let maps = construct_unchecked(&form).map_err(bad_input)?;
        let space = space_flag.unwrap_or(form.family.space());
        return Ok(LoadedMaps { maps, space, form: Some(form) });
    }
    let path = source.maps.as_ref().expect("clap enforces one source");
    let (domain, linear): (StochasticClass, Vec<LinearMap>) = io::parse_maps(&read_text(path)?)?;
    let space = space_flag.unwrap_or(domain);
    if space.span() != domain {
        return Err(Fail::Input(format!("maps act on {domain}, which does not contain {space}")));
    }
    Ok(LoadedMaps { maps: linear.into_iter().map(PreserverMap::from).collect(), space, form: None })
}

fn first_space(factors: &[Matrix], candidates: &[StochasticClass]) -> Option<StochasticClass> {
    candidates.iter().copied().find(|&s| factors.iter().all(|a| is_member(a, s)))
}

fn identity_check(name: &str, space: Option<StochasticClass>, factors: Vec<Matrix>) -> Result<(bool, Value), Fail> {
    let canonical = name.trim().to_ascii_lowercase();
    let canonical = canonical.strip_prefix("theorem-").map(|r| format!("thm-{r}")).unwrap_or(canonical);
    match canonical.as_str() {
        "thm-2.3" => {
            let spans = [StochasticClass::SpanRS, StochasticClass::SpanCS];
            let space = space
                .or_else(|| first_space(&factors, &spans))
                .ok_or_else(|| Fail::Input("factors lie in neither <RS_n> nor <CS_n>".into()))?;
            let chain = ProductChain::new(factors, space).map_err(bad_input)?;
            let ds = ds_part_of_product(&chain).map_err(bad_input)?;
            let report = spectrum_transfer_report(&chain).map_err(bad_input)?;
            let holds = ds.equal && report.holds();
            let witness = json!({
                "space": space.tag(),
                "ds_of_product": matrix_json(&ds.lhs),
                "product_of_ds": matrix_json(&ds.rhs),
                "charpoly": charpoly_json(&charpoly(&chain.product())),
                "full_charpoly": report.full_charpoly,
                "full_trace": report.full_trace,
                "mixed_charpoly": report.mixed_charpoly,
                "mixed_trace": report.mixed_trace,
            });
            Ok((holds, verdict_json("thm-2.3", holds, witness)))
        }
        "lemma-2.4" => {
            if factors.len() != 1 {
                return Err(Fail::Input("lemma-2.4 takes one matrix".into()));
            }
            let c = ds_inverse_check(&factors[0]).map_err(bad_input)?;
            let witness = json!({
                "inverse": matrix_json(&c.inv),
                "ds_of_inverse": matrix_json(&c.ds_of_inv),
                "inverse_of_ds": matrix_json(&c.inv_of_ds),
                "same_space": c.same_space,
            });
            Ok((c.holds(), verdict_json("lemma-2.4", c.holds(), witness)))
        }
        "lemma-2.9" => {
            let sets = [StochasticClass::DS, StochasticClass::RS, StochasticClass::CS];
            let space = space
                .or_else(|| first_space(&factors, &sets))
                .ok_or_else(|| Fail::Input("factors are not all DS, RS or CS".into()))?;
            let chain = ProductChain::new(factors, space).map_err(bad_input)?;
            let c = product_is_permutation(&chain).map_err(bad_input)?;
            let witness = json!({
                "space": space.tag(),
                "product_permutation": c.product_perm.as_ref().map(|p| p.one_based()),
                "all_factors_permutations": c.all_factors_perm,
            });
            Ok((c.holds(), verdict_json("lemma-2.9", c.holds(), witness)))
        }
        _ => Err(Fail::Input(format!("unknown identity `{name}`; known: thm-2.3, lemma-2.4, lemma-2.9"))),
    }
}
