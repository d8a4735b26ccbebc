//! Driving the batch front end from an in-memory JSON config.

use modtop::cli::{run, ScenarioConfig};
use modtop::EvalConfig;

fn main() -> modtop::Result<()> {
    let config = ScenarioConfig::from_json(
        r#"{ "command": "converge",
             "params": { "seq": "tail=const:0.5", "exponent": "identity",
                         "prefixes": [1, 2, 4, 8, 16, 32], "lambdas": [1, 2] },
             "tolerances": { "tol": 1e-6 } }"#,
    )?;
    let out = run(&config, &EvalConfig::default());
    println!("exit code {}", out.exit_code);
    if let Some(r) = out.report {
        print!("{}", r.tables[0].to_csv()?);
    }
    Ok(())
}
