//! `hmax` command-line interface.

mod config;

use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Map, Value};

use crate::analysis::{generate_field, run_ensemble, EvalOptions, Experiment, ExponentPair, FieldSpec, LambdaGrid};
use crate::covering::{cf_select, est_ratios, verify_selection, Order};
use crate::error::{Error, Result};
use crate::heisenberg::GroupParams;
use crate::lattice::io::{parse_rect_list, read_field, write_field};
use crate::lattice::{Dim, Rect, ScalarField};
use crate::maximal::{heisenberg_maximal, Alpha, Mode};
use crate::selftest::run_selftest;

use config::{parse_config, parse_list, parse_seeds, Settings};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVARIANT: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;

const DEFAULT_EXACT_CAP: usize = 16 * 16 * 16;

#[derive(Parser, Debug)]
#[command(name = "hmax", version, about = "Strong fractional maximal operators on discrete Heisenberg groups")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate M_α f on a query window and write it as a field file.
    Maximal(MaximalArgs),
    /// Run the half-overlap rectangle selection and report covering ratios.
    Cover(CoverArgs),
    /// Weak-type ratio ensemble.
    Weaktype(EnsembleArgs),
    /// Strong-norm ratio ensemble.
    Strongnorm(EnsembleArgs),
    /// Run the built-in invariant suite.
    Selftest(SelftestArgs),
    /// Write a generated test field to a field file.
    Generate(GenerateArgs),
    /// Run the command named by a config file's `command` key.
    Run {
        config: PathBuf,
    },
}

#[derive(Args, Debug, Default)]
struct MaximalArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Input field file.
    #[arg(long)]
    field: Option<String>,
    /// Generate the input instead, e.g. `spikes:size=8,count=4,n=1`.
    #[arg(long)]
    spec: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long)]
    mu: Option<String>,
    /// exact | dyadic
    #[arg(long)]
    mode: Option<String>,
    /// `lo,..:hi,..`; defaults to the field's window.
    #[arg(long)]
    query: Option<String>,
    /// Largest query (in cells) allowed in exact mode.
    #[arg(long)]
    cap: Option<String>,
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args, Debug, Default)]
struct CoverArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Rectangle list, one `lo.. hi..` per line.
    #[arg(long)]
    rects: Option<String>,
    /// Comma-separated exponents for the overlap-norm ratios.
    #[arg(long)]
    p: Option<String>,
    /// file | voldesc | shuffle:SEED
    #[arg(long)]
    order: Option<String>,
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args, Debug, Default)]
struct EnsembleArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    spec: Option<String>,
    /// `a..b` (inclusive) or a comma list.
    #[arg(long)]
    seeds: Option<String>,
    /// Comma list, paired with --q.
    #[arg(long)]
    p: Option<String>,
    #[arg(long)]
    q: Option<String>,
    /// Comma list of twist parameters.
    #[arg(long)]
    mu: Option<String>,
    /// auto | exact | dyadic
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    cap: Option<String>,
    /// Evaluation window = support hull dilated by this factor.
    #[arg(long)]
    dilation: Option<String>,
    /// Second dilation for the truncation check, or `none`.
    #[arg(long)]
    sensitivity: Option<String>,
    /// attained | quantiles:K | list:λ1,λ2,.. (weaktype only)
    #[arg(long)]
    lambda_grid: Option<String>,
    /// Record wall-clock time per run (reports are then no longer reproducible).
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    timing: Option<String>,
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args, Debug, Default)]
struct SelftestArgs {
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args, Debug, Default)]
struct GenerateArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    spec: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    out: Option<String>,
}

fn write_output(out: Option<PathBuf>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, bytes)?,
        None => std::io::stdout().write_all(bytes)?,
    }
    Ok(())
}

fn json_bytes(v: &impl serde::Serialize) -> Result<Vec<u8>> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| Error::Parse(e.to_string()))?;
    s.push('\n');
    Ok(s.into_bytes())
}

fn parse_query(text: &str) -> Result<Rect> {
    let (lo, hi) = text
        .split_once(':')
        .ok_or_else(|| Error::Parse(format!("query `{text}` is not lo,..:hi,..")))?;
    Rect::new(parse_list("query", lo)?, parse_list("query", hi)?)
}

fn load_input_field(s: &Settings, field: &Option<String>, spec: &Option<String>, seed: &Option<String>) -> Result<ScalarField> {
    if let Some(path) = s.path("field", field) {
        return Ok(read_field(BufReader::new(File::open(path)?))?.field);
    }
    let spec: FieldSpec = s.require("spec", spec)?;
    generate_field(&spec.with_seed(s.parse("seed", seed)?.unwrap_or(0)))
}

/// `Ok(true)` when every invariant checked by the command held.
type Outcome = Result<bool>;

fn cmd_maximal(a: &MaximalArgs) -> Outcome {
    let keys = ["field", "spec", "seed", "alpha", "mu", "mode", "query", "cap", "out"];
    let s = Settings::load(a.config.as_deref(), "maximal", &keys)?;
    let f = load_input_field(&s, &a.field, &a.spec, &a.seed)?;
    let n = Dim::from_ambient(f.dim())?.n();
    let alpha = Alpha::new(s.require("alpha", &a.alpha)?)?;
    let params = GroupParams::new(n, s.parse("mu", &a.mu)?.unwrap_or(0))?;
    let mode: Mode = s.parse("mode", &a.mode)?.unwrap_or(Mode::Exact);
    let query = match s.get("query", &a.query) {
        Some(q) => parse_query(&q)?,
        None => f.window().clone(),
    };
    let cap: usize = s.parse("cap", &a.cap)?.unwrap_or(DEFAULT_EXACT_CAP);
    let cells = query.cell_count()?;
    if mode == Mode::Exact && cells > cap {
        return Err(Error::ResourceLimit(format!("exact query of {cells} cells exceeds cap {cap}")));
    }
    let m = heisenberg_maximal(&f, alpha, params, &query, mode)?;
    let mut bytes = Vec::new();
    m.write(&mut bytes)?;
    write_output(s.path("out", &a.out), &bytes)?;
    let lower_ok = query.cells().all(|x| m.field.get(&x) >= f.get(&x).abs() * (1.0 - 1e-12));
    Ok(lower_ok)
}

fn cover_report(rects: &[Rect], p_list: &[f64], order: Order) -> Result<(Map<String, Value>, bool)> {
    let ordered = order.apply(rects);
    let sel = cf_select(&ordered)?;
    let v = verify_selection(&ordered, &sel)?;
    let e = est_ratios(&ordered, &sel, p_list)?;
    let mut m = Map::new();
    m.insert("order".into(), json!(order.to_string()));
    m.insert("n_input".into(), json!(ordered.len()));
    m.insert("n_selected".into(), json!(sel.selected().len()));
    m.insert("selected".into(), json!(sel.selected()));
    m.insert("union_volume".into(), json!(e.union_volume as u64));
    m.insert("selected_union_volume".into(), json!(e.selected_union_volume as u64));
    m.insert("est1_ratio".into(), json!(e.est1_ratio));
    for (p, r) in &e.est2_ratios {
        m.insert(format!("est2_ratio_p{p}"), json!(r));
    }
    m.insert("max_overlap_count".into(), json!(e.max_overlap_count));
    m.insert("skip_ok".into(), json!(v.skip_ok));
    m.insert("select_ok".into(), json!(v.select_ok));
    m.insert("disjoint_core_ok".into(), json!(v.disjoint_core_ok));
    m.insert("disjoint_core_ties".into(), json!(v.disjoint_core_ties));
    m.insert("half_bound_ok".into(), json!(v.half_bound_ok));
    Ok((m, v.all_ok()))
}

fn cmd_cover(a: &CoverArgs) -> Outcome {
    let s = Settings::load(a.config.as_deref(), "cover", &["rects", "p", "order", "out"])?;
    let path = s.path("rects", &a.rects).ok_or_else(|| Error::Parse("missing `rects`".into()))?;
    let rects = parse_rect_list(&std::fs::read_to_string(path)?)?;
    let p_list: Vec<f64> = parse_list("p", &s.get("p", &a.p).unwrap_or_else(|| "1.5,2,3".into()))?;
    let order: Order = s.parse("order", &a.order)?.unwrap_or(Order::File);
    let (mut report, mut ok) = cover_report(&rects, &p_list, order)?;
    if order == Order::File {
        for alt in [Order::VolumeDescending, Order::Shuffle(0)] {
            let tag = match alt {
                Order::VolumeDescending => "voldesc".to_string(),
                _ => "shuffle0".to_string(),
            };
            let (m, alt_ok) = cover_report(&rects, &p_list, alt)?;
            ok &= alt_ok;
            for key in m.keys().filter(|k| k.starts_with("est") || k.starts_with("n_selected")) {
                report.insert(format!("{tag}_{key}"), m[key].clone());
            }
        }
    }
    report.insert("command".into(), json!("cover"));
    write_output(s.path("out", &a.out), &json_bytes(&report)?)?;
    Ok(ok)
}

fn parse_lambda_grid(text: &str) -> Result<LambdaGrid> {
    if text == "attained" {
        return Ok(LambdaGrid::Attained);
    }
    if let Some(k) = text.strip_prefix("quantiles:") {
        return k.parse().map(LambdaGrid::Quantiles).map_err(|_| Error::Parse(format!("lambda grid `{text}`")));
    }
    if let Some(list) = text.strip_prefix("list:") {
        return Ok(LambdaGrid::Explicit(parse_list("lambda-grid", list)?));
    }
    Err(Error::Parse(format!("lambda grid `{text}`")))
}

fn cmd_ensemble(a: &EnsembleArgs, weak: bool) -> Outcome {
    let command = if weak { "weaktype" } else { "strongnorm" };
    let mut keys = vec!["spec", "seeds", "p", "q", "mu", "mode", "cap", "dilation", "sensitivity", "timing", "out"];
    if weak {
        keys.push("lambda-grid");
    }
    let s = Settings::load(a.config.as_deref(), command, &keys)?;
    let spec: FieldSpec = s.require("spec", &a.spec)?;
    let seeds = parse_seeds(&s.get("seeds", &a.seeds).unwrap_or_else(|| "1..20".into()))?;
    let ps: Vec<f64> = parse_list("p", &s.get("p", &a.p).unwrap_or_else(|| "2".into()))?;
    let qs: Vec<f64> = match s.get("q", &a.q) {
        Some(q) => parse_list("q", &q)?,
        None => ps.clone(),
    };
    if ps.len() != qs.len() {
        return Err(Error::Parse("`p` and `q` lists differ in length".into()));
    }
    let exps = ps.iter().zip(&qs).map(|(&p, &q)| ExponentPair::new(p, q)).collect::<Result<Vec<_>>>()?;
    let mus: Vec<i64> = parse_list("mu", &s.get("mu", &a.mu).unwrap_or_else(|| "0".into()))?;
    let mode = match s.get("mode", &a.mode).as_deref() {
        None | Some("auto") => None,
        Some(m) => Some(m.parse::<Mode>()?),
    };
    let sensitivity_dilation = match s.get("sensitivity", &a.sensitivity).as_deref() {
        Some("none") => None,
        Some(k) => Some(k.parse().map_err(|_| Error::Parse(format!("sensitivity `{k}`")))?),
        None => Some(5),
    };
    let opts = EvalOptions {
        dilation: s.parse("dilation", &a.dilation)?.unwrap_or(3),
        exact_cell_cap: s.parse("cap", &a.cap)?.unwrap_or(DEFAULT_EXACT_CAP),
        mode,
        sensitivity_dilation,
    };
    let experiment = if weak {
        Experiment::WeakType(parse_lambda_grid(&s.get("lambda-grid", &a.lambda_grid).unwrap_or_else(|| "attained".into()))?)
    } else {
        Experiment::StrongNorm
    };
    let timing: bool = s.parse("timing", &a.timing)?.unwrap_or(false);
    let report = run_ensemble(&spec, &seeds, &exps, &mus, &experiment, &opts, timing)?;
    let ok = report.runs.iter().all(|r| r.ratio.is_finite() && r.ratio > 0.0);
    write_output(s.path("out", &a.out), &json_bytes(&report)?)?;
    Ok(ok)
}

fn cmd_selftest(a: &SelftestArgs) -> Outcome {
    let report = run_selftest()?;
    for suite in &report.suites {
        let status = if suite.passed == suite.cases { "ok" } else { "FAILED" };
        eprintln!("{:<24} {:>6}/{:<6} {status}", suite.name, suite.passed, suite.cases);
        for f in &suite.failures {
            eprintln!("    {f}");
        }
    }
    write_output(a.out.as_ref().map(PathBuf::from), &json_bytes(&report)?)?;
    Ok(report.ok)
}

fn cmd_generate(a: &GenerateArgs) -> Outcome {
    let s = Settings::load(a.config.as_deref(), "generate", &["spec", "seed", "out"])?;
    let spec: FieldSpec = s.require("spec", &a.spec)?;
    let spec = spec.with_seed(s.parse("seed", &a.seed)?.unwrap_or(0));
    let f = generate_field(&spec)?;
    let mut bytes = Vec::new();
    let extra = [("spec", spec.to_string()), ("seed", spec.seed.to_string())];
    write_field(&mut bytes, Dim::new(spec.n)?, &f, &extra)?;
    write_output(s.path("out", &a.out), &bytes)?;
    Ok(true)
}

fn cmd_run(path: &Path) -> Outcome {
    let values = parse_config(&std::fs::read_to_string(path)?)?;
    let command = values
        .get("command")
        .ok_or_else(|| Error::Parse("config has no `command` key".into()))?;
    let config = Some(path.to_path_buf());
    match command.as_str() {
        "maximal" => cmd_maximal(&MaximalArgs { config, ..Default::default() }),
        "cover" => cmd_cover(&CoverArgs { config, ..Default::default() }),
        "weaktype" => cmd_ensemble(&EnsembleArgs { config, ..Default::default() }, true),
        "strongnorm" => cmd_ensemble(&EnsembleArgs { config, ..Default::default() }, false),
        "generate" => cmd_generate(&GenerateArgs { config, ..Default::default() }),
        "selftest" => cmd_selftest(&SelftestArgs::default()),
        other => Err(Error::Parse(format!("unknown command `{other}`"))),
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::ResourceLimit(_) => EXIT_RESOURCE,
        _ => EXIT_INPUT,
    }
}

/// Parses `args`, runs the command and returns the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    let outcome = match &cli.command {
        Command::Maximal(a) => cmd_maximal(a),
        Command::Cover(a) => cmd_cover(a),
        Command::Weaktype(a) => cmd_ensemble(a, true),
        Command::Strongnorm(a) => cmd_ensemble(a, false),
        Command::Selftest(a) => cmd_selftest(a),
        Command::Generate(a) => cmd_generate(a),
        Command::Run { config } => cmd_run(config),
    };
    match outcome {
        Ok(true) => EXIT_OK,
        Ok(false) => {
            eprintln!("hmax: invariant violation");
            EXIT_INVARIANT
        }
        Err(e) => {
            eprintln!("hmax: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn query_and_grid_syntax() {
        let q = parse_query("0,-1,2:3,4,5").unwrap();
        assert_eq!(q.lo(), &[0, -1, 2]);
        assert!(parse_query("0,0,0").is_err());
        assert_eq!(parse_lambda_grid("quantiles:8").unwrap(), LambdaGrid::Quantiles(8));
        assert_eq!(parse_lambda_grid("list:0.5,1").unwrap(), LambdaGrid::Explicit(vec![0.5, 1.0]));
        assert!(parse_lambda_grid("some").is_err());
    }

    #[test]
    fn error_classes_map_to_exit_codes() {
        assert_eq!(exit_code(&Error::ResourceLimit("x".into())), EXIT_RESOURCE);
        assert_eq!(exit_code(&Error::Parse("x".into())), EXIT_INPUT);
        assert_eq!(run(["hmax", "bogus"]), EXIT_INPUT);
    }
}
