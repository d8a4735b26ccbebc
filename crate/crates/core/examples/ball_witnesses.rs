//! Points inside a modular ball that are modular limits of points outside it.

use modtop::diagnostics::{ball_interior_witness, BALL_SCENARIOS};
use modtop::EvalConfig;

fn main() -> modtop::Result<()> {
    for name in BALL_SCENARIOS {
        let w = ball_interior_witness(name, 3.0, &EvalConfig::default())?;
        println!("{name}: passed = {}", w.passed());
        for c in &w.checks {
            println!("  [{}] {} {}", if c.passed { "ok" } else { "FAIL" }, c.label, c.detail);
        }
    }
    Ok(())
}
