use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use modtop::cli::{build_config, run, Overrides};
use modtop::EvalConfig;

/// Modular, norm and Delta2 diagnostics for variable-exponent spaces.
#[derive(Parser)]
#[command(name = "modtop", version)]
struct Args {
    /// modular | norm | delta2 | converge | counterexample | dirichlet | suite
    command: Option<String>,
    /// JSON scenario config; flags given alongside override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Registry scenario name (counterexample).
    #[arg(long)]
    name: Option<String>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Directory for report.json and CSV tables (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for `suite`.
    #[arg(long)]
    parallel: Option<usize>,
    /// Sequence, e.g. "runs=[(1..2,0.5)];tail=zero".
    #[arg(long)]
    seq: Option<String>,
    /// Function, e.g. "const:0,0.5,1" or "harmonic:0.5".
    #[arg(long)]
    fun: Option<String>,
    /// Exponent, e.g. "identity", "table:2,3", "reciprocal:0,0.5".
    #[arg(long = "exp")]
    exponent: Option<String>,
    /// Comma-separated scenario names for `suite`.
    #[arg(long, value_delimiter = ',')]
    names: Option<Vec<String>>,
}

fn main() -> ExitCode {
    let a = Args::parse();
    let text = match &a.config {
        Some(path) => match std::fs::read_to_string(path) {
            Ok(t) => Some(t),
            Err(e) => {
                eprintln!("error: {}: {e}", path.display());
                return ExitCode::from(2);
            }
        },
        None => None,
    };
    let ov = Overrides {
        command: a.command,
        name: a.name,
        tol: a.tol,
        seed: a.seed,
        out: a.out,
        parallel: a.parallel,
        seq: a.seq,
        fun: a.fun,
        exponent: a.exponent,
        names: a.names,
    };
    let eval = match EvalConfig::from_env() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let config = match build_config(text.as_deref(), &ov) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let outcome = run(&config, &eval);
    if let Some(m) = &outcome.message {
        eprintln!("error: {m}");
    }
    if let (Some(r), None) = (&outcome.report, &config.output) {
        println!("{}", r.to_json());
    }
    ExitCode::from(outcome.exit_code as u8)
}
