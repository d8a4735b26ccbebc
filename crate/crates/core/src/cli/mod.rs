//! Batch front end: configs in, JSON reports and CSV tables out.
//!
//! A config is a JSON object
//!
//! ```json
//! { "command": "norm", "params": { "seq": "runs=[(1..1,3)]", "exponent": "table:2" },
//!   "tolerances": { "tol": 1e-8 }, "output": "out/", "seed": 7 }
//! ```
//!
//! Exit codes: 0 when every check passes, 1 when a check fails or the
//! scenario errors, 2 for configuration errors.

pub mod grammar;
pub mod report;
pub mod suites;

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{json, Map, Value};

use crate::diagnostics::{
    check_delta2, classify_convergence, delta2_failure_witness, run_counterexample, DEFAULT_LAMBDA_GRID,
    DEFAULT_PROBE_WINDOW,
};
use crate::dirichlet::{assemble_energy, assemble_energy_from_nodes, minimize_energy, residual_check, SolveStatus};
use crate::error::{ModtopError, Result};
use crate::exponent::ExponentSpec;
use crate::luxemburg::{minkowski_functional, scaled_luxemburg_norm, verify_norm_modular_relations, NormOptions};
use crate::modular::{modular, Element, EvalConfig};

pub use grammar::{parse_function, parse_sequence};
pub use report::{Report, Table};
pub use suites::{all_names, run_named, run_suite, SuiteEntry, SuiteReport, PROPERTY_SUITES};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Modular,
    Norm,
    Delta2,
    Converge,
    Counterexample,
    Dirichlet,
    Suite,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Modular => "modular",
            Command::Norm => "norm",
            Command::Delta2 => "delta2",
            Command::Converge => "converge",
            Command::Counterexample => "counterexample",
            Command::Dirichlet => "dirichlet",
            Command::Suite => "suite",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        serde_json::from_value(Value::String(s.to_string()))
            .map_err(|_| ModtopError::Config(format!("unknown command '{s}'")))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Check tolerance (meaning depends on the command).
    pub tol: Option<f64>,
    /// Relative bracket tolerance of the norm bisection.
    pub norm_tol: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub command: Command,
    #[serde(default)]
    pub params: Map<String, Value>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        if text.trim().is_empty() {
            return Err(ModtopError::Config("empty configuration".into()));
        }
        serde_json::from_str(text).map_err(|e| ModtopError::Config(e.to_string()))
    }
}

/// Command-line values layered over (or standing in for) a config file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub command: Option<String>,
    pub name: Option<String>,
    pub tol: Option<f64>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub parallel: Option<usize>,
    pub seq: Option<String>,
    pub fun: Option<String>,
    pub exponent: Option<String>,
    pub names: Option<Vec<String>>,
}

/// Builds the effective config from optional config-file text and flags.
pub fn build_config(file: Option<&str>, ov: &Overrides) -> Result<ScenarioConfig> {
    let mut cfg = match (file, &ov.command) {
        (Some(text), _) => ScenarioConfig::from_json(text)?,
        (None, Some(c)) => ScenarioConfig {
            command: Command::parse(c)?,
            params: Map::new(),
            tolerances: Tolerances::default(),
            output: None,
            seed: 0,
        },
        (None, None) => return Err(ModtopError::Config("no command and no --config given".into())),
    };
    if let (Some(_), Some(c)) = (file, &ov.command) {
        cfg.command = Command::parse(c)?;
    }
    let mut set = |key: &str, v: Option<Value>| {
        if let Some(v) = v {
            cfg.params.insert(key.to_string(), v);
        }
    };
    set("name", ov.name.clone().map(Value::from));
    set("seq", ov.seq.clone().map(Value::from));
    set("fun", ov.fun.clone().map(Value::from));
    set("exponent", ov.exponent.clone().map(Value::from));
    set("parallel", ov.parallel.map(Value::from));
    set("names", ov.names.clone().map(Value::from));
    if ov.tol.is_some() {
        cfg.tolerances.tol = ov.tol;
    }
    if let Some(s) = ov.seed {
        cfg.seed = s;
    }
    if ov.out.is_some() {
        cfg.output = ov.out.clone();
    }
    Ok(cfg)
}

/// Report plus the process exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub exit_code: i32,
    /// `None` only for configuration errors.
    pub report: Option<Report>,
    pub message: Option<String>,
}

impl RunOutcome {
    fn config_error(e: ModtopError) -> Self {
        Self { exit_code: 2, report: None, message: Some(e.to_string()) }
    }
}

/// Runs a config and writes its report to `config.output` when set.
pub fn run(config: &ScenarioConfig, cfg: &EvalConfig) -> RunOutcome {
    let mut report = Report::new(config.command.name(), config.seed);
    match dispatch(config, cfg, &mut report) {
        Ok(passed) => report.passed = passed,
        Err(ModtopError::Config(m)) => return RunOutcome::config_error(ModtopError::Config(m)),
        Err(e) => {
            report.passed = false;
            report.errors.push(e.to_string());
        }
    }
    if let Some(dir) = &config.output {
        if let Err(e) = report.write_to(dir) {
            return RunOutcome::config_error(e);
        }
    }
    RunOutcome { exit_code: if report.passed { 0 } else { 1 }, report: Some(report), message: None }
}

fn params<T: DeserializeOwned>(config: &ScenarioConfig) -> Result<T> {
    serde_json::from_value(Value::Object(config.params.clone()))
        .map_err(|e| ModtopError::Config(format!("{} params: {e}", config.command.name())))
}

fn exponent(s: &str) -> Result<ExponentSpec> {
    s.parse().map_err(|e: ModtopError| ModtopError::Config(e.to_string()))
}

/// Exactly one of a sequence or a function.
fn element(seq: &Option<String>, fun: &Option<String>) -> Result<Element> {
    match (seq, fun) {
        (Some(s), None) => Ok(parse_sequence(s)?.into()),
        (None, Some(f)) => Ok(parse_function(f)?.into()),
        _ => Err(ModtopError::Config("give exactly one of 'seq' and 'fun'".into())),
    }
}

fn dispatch(config: &ScenarioConfig, cfg: &EvalConfig, report: &mut Report) -> Result<bool> {
    let tol = config.tolerances.tol;
    let norm_opts = NormOptions { tol: config.tolerances.norm_tol.unwrap_or(1e-10), eval: *cfg, ..NormOptions::default() };
    match config.command {
        Command::Modular => {
            let p: ModularParams = params(config)?;
            let (x, e) = (element(&p.seq, &p.fun)?, exponent(&p.exponent)?);
            let x = x.scale(p.scale.unwrap_or(1.0));
            let v = modular(&x, &e, cfg)?;
            report.result = json!({ "exponent": e.to_string(), "element": x, "modular": v });
            Ok(!v.is_indeterminate())
        }
        Command::Norm => {
            let p: NormParams = params(config)?;
            let (x, e) = (element(&p.seq, &p.fun)?, exponent(&p.exponent)?);
            let rel = verify_norm_modular_relations(&x, &e, tol.unwrap_or(1e-8), &norm_opts)?;
            let mut out = json!({ "exponent": e.to_string(), "norm": rel.norm, "relations": rel });
            if let Some(r) = p.radius {
                out["minkowski"] = json!({ "radius": r, "result": minkowski_functional(&x, &e, r, &norm_opts)? });
            }
            if let Some(a) = p.alpha {
                out["scaled_norm"] = json!({ "alpha": a, "result": scaled_luxemburg_norm(&x, &e, a, &norm_opts)? });
            }
            report.result = out;
            Ok(rel.all_pass())
        }
        Command::Delta2 => {
            let p: Delta2Params = params(config)?;
            let e = exponent(&p.exponent)?;
            let mut verdict = check_delta2(&e, p.probe_window.unwrap_or(DEFAULT_PROBE_WINDOW), cfg)?;
            if let (Some(k), false, true) = (p.witness_count, verdict.bounded, e.is_sequence_exponent()) {
                verdict.witness = Some(delta2_failure_witness(&e, k, cfg)?);
            }
            // an inconclusive witness search carries no witness and does not pass
            let holds = verdict.bounded || verdict.witness.as_ref().is_some_and(|w| w.holds(tol.unwrap_or(1e-3)));
            report.result = json!({ "exponent": e.to_string(), "verdict": verdict });
            Ok(holds)
        }
        Command::Converge => converge(config, &norm_opts, report),
        Command::Counterexample => {
            let p: NameParams = params(config)?;
            let r = run_counterexample(&p.name, config.seed, cfg)?;
            report.result = report::to_value(&r);
            Ok(r.passed)
        }
        Command::Dirichlet => dirichlet(config, report),
        Command::Suite => {
            let p: SuiteParams = params(config)?;
            let names = p.names.unwrap_or_else(all_names);
            let r = run_suite(&names, p.parallel.unwrap_or(1), config.seed, cfg)?;
            report.result = report::to_value(&r);
            for e in r.entries.iter().filter_map(|e| e.error.as_ref().map(|m| format!("{}: {m}", e.name))) {
                report.errors.push(e);
            }
            Ok(r.passed)
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ModularParams {
    seq: Option<String>,
    fun: Option<String>,
    exponent: String,
    scale: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NormParams {
    seq: Option<String>,
    fun: Option<String>,
    exponent: String,
    radius: Option<f64>,
    alpha: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Delta2Params {
    exponent: String,
    probe_window: Option<u64>,
    witness_count: Option<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NameParams {
    name: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SuiteParams {
    names: Option<Vec<String>>,
    parallel: Option<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ConvergeParams {
    /// The limit, as a sequence or a function.
    seq: Option<String>,
    fun: Option<String>,
    exponent: String,
    /// Family members in the same space as the limit, indexed 1, 2, ...
    family: Option<Vec<String>>,
    /// Prefix lengths of a sequence limit, used as the family.
    prefixes: Option<Vec<u64>>,
    lambdas: Option<Vec<f64>>,
    expect: Option<Expect>,
}

/// Expected classification; any mismatch fails the run.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Expect {
    modular: Option<bool>,
    norm: Option<bool>,
    /// Keyed by the scale written as in the `lambdas` list, e.g. `"2"`.
    #[serde(default)]
    scaled: BTreeMap<String, bool>,
}

fn converge(config: &ScenarioConfig, opts: &NormOptions, report: &mut Report) -> Result<bool> {
    let p: ConvergeParams = params(config)?;
    let e = exponent(&p.exponent)?;
    let limit = element(&p.seq, &p.fun)?;
    let family: Vec<(u64, Element)> = match (&p.family, &p.prefixes, &limit) {
        (Some(f), None, Element::Sequence(_)) => {
            f.iter().enumerate().map(|(i, s)| Ok((i as u64 + 1, parse_sequence(s)?.into()))).collect::<Result<_>>()?
        }
        (Some(f), None, Element::Function(_)) => {
            f.iter().enumerate().map(|(i, s)| Ok((i as u64 + 1, parse_function(s)?.into()))).collect::<Result<_>>()?
        }
        (None, Some(ns), Element::Sequence(x)) => ns.iter().map(|&n| (n, x.prefix(n).into())).collect(),
        _ => {
            return Err(ModtopError::Config(
                "give 'family', or 'prefixes' of a sequence limit, but not both".into(),
            ))
        }
    };
    let lambdas = p.lambdas.unwrap_or_else(|| DEFAULT_LAMBDA_GRID.to_vec());
    let r = classify_convergence(&family, &limit, &e, &lambdas, config.tolerances.tol.unwrap_or(1e-9), opts)?;

    let mut header = vec!["index".to_string(), "rho_distance".to_string()];
    header.extend(lambdas.iter().map(|l| format!("rho_lambda_{l}")));
    header.push("norm_distance".into());
    let mut table = Table::new("convergence", header);
    for row in &r.rows {
        let mut cells = vec![row.index as f64, row.rho_distance];
        cells.extend(&row.scaled);
        cells.push(row.norm_distance);
        table.rows.push(cells);
    }
    report.tables.push(table);

    let mut ok = true;
    if let Some(x) = &p.expect {
        ok &= x.modular.is_none_or(|m| m == r.modular_converges);
        ok &= x.norm.is_none_or(|m| m == r.norm_converges);
        for (k, want) in &x.scaled {
            ok &= r.per_lambda.get(k) == Some(want);
        }
    }
    report.result = json!({ "exponent": e.to_string(), "classification": r });
    Ok(ok)
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Phi {
    Named(String),
    Nodes(Vec<f64>),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DirichletParams {
    n: usize,
    exponent: String,
    /// `linear`, `bubble`, `zero`, `sine`, or `n + 1` node values.
    phi: Phi,
    max_iter: Option<usize>,
    residual_tol: Option<f64>,
}

fn dirichlet(config: &ScenarioConfig, report: &mut Report) -> Result<bool> {
    let p: DirichletParams = params(config)?;
    let e = exponent(&p.exponent)?;
    let prob = match &p.phi {
        Phi::Nodes(v) => assemble_energy_from_nodes(p.n, &e, v.clone())?,
        Phi::Named(name) => {
            let f: fn(f64) -> f64 = match name.as_str() {
                "linear" => |x| x,
                "bubble" => |x| x * (1.0 - x),
                "zero" => |_| 0.0,
                "sine" => |x| (std::f64::consts::PI * x).sin(),
                other => return Err(ModtopError::Config(format!("unknown boundary datum '{other}'"))),
            };
            assemble_energy(p.n, &e, f)?
        }
    };
    let trace = minimize_energy(&prob, config.tolerances.tol.unwrap_or(1e-9), p.max_iter.unwrap_or(1_000_000))?;
    let res = residual_check(&prob, &trace.final_u, p.residual_tol.unwrap_or(1e-6));

    let header = ["iteration", "energy", "grad_inf", "step", "modular_distance"];
    let mut table = Table::new("dirichlet_trace", header.iter().map(|s| s.to_string()).collect());
    for (it, m) in trace.iterates.iter().zip(&trace.modular_trace) {
        table.rows.push(vec![it.iteration as f64, it.energy, it.grad_inf, it.step, *m]);
    }
    report.tables.push(table);

    let converged = trace.status == SolveStatus::Converged;
    let monotone = trace.energy_is_monotone();
    let settles = trace.modular_trace_settles();
    report.result = json!({
        "n": p.n,
        "exponent": e.to_string(),
        "status": trace.status,
        "iterations": trace.iterates.len() - 1,
        "final_energy": trace.final_energy,
        "final_grad_inf": trace.iterates.last().map(|r| r.grad_inf),
        "residual": res,
        "energy_monotone": monotone,
        "modular_trace_settles": settles,
        "final_u": trace.final_u,
    });
    Ok(converged && monotone && settles && res.pass)
}
