//! Delta2 decisions and failure witnesses.

use modtop::diagnostics::{check_delta2, delta2_failure_witness, DEFAULT_PROBE_WINDOW};
use modtop::{EvalConfig, ExponentSpec};

fn main() -> modtop::Result<()> {
    let cfg = EvalConfig::default();
    for spec in ["table:2,3,2.5", "affine:0,4", "identity", "reciprocal:0,1", "custom:one-plus-log"] {
        let p: ExponentSpec = spec.parse()?;
        let v = check_delta2(&p, DEFAULT_PROBE_WINDOW, &cfg)?;
        let note = v.inconclusive.as_deref().unwrap_or("");
        println!("{spec:<22} bounded = {:<5} sup p = {:<4} {note}", v.bounded, v.p_sup);
    }

    let w = delta2_failure_witness(&ExponentSpec::identity(), 50, &cfg)?;
    println!("\nwitness for p_n = n: first indices {:?}", &w.indices[..6]);
    println!("rho(witness)        = {:?} (bound {})", w.at_one, w.finite_bound);
    for s in &w.scaled {
        println!("rho({} * witness)  = {}", s.lambda, serde_json::to_string(&s.modular).unwrap());
    }
    Ok(())
}
