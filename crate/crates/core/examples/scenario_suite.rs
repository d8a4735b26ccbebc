//! Runs the counterexample registry and the property suites in parallel.

use modtop::cli::{all_names, run_suite};
use modtop::EvalConfig;

fn main() -> modtop::Result<()> {
    let r = run_suite(&all_names(), 4, 7, &EvalConfig::default())?;
    for e in &r.entries {
        let checks = e.report.as_ref().map_or(0, |r| r.checks.len());
        println!("{:<28} {:<5} {checks} checks", e.name, e.passed);
    }
    println!("all passed: {}", r.passed);
    Ok(())
}
