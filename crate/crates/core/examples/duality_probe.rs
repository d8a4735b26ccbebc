//! A coordinate functional along a modularly null family, and the l^inf test.

use modtop::diagnostics::{check_linf_isomorphism, functional_probe};
use modtop::{EvalConfig, ExponentSpec, SequenceVec};

fn main() -> modtop::Result<()> {
    let cfg = EvalConfig::default();
    let p = ExponentSpec::identity();
    let half = SequenceVec::constant(0.5);
    let tails: Vec<SequenceVec> = (1..=30).map(|j| half.sub(&half.prefix(j))).collect();
    let e3 = SequenceVec::from_sparse(&[(3, 1.0)])?;
    let r = functional_probe(&e3, &[tails], &p, 1e-6, 50, 42, &cfg)?;
    println!("null family: rho -> 0 {}, functional -> 0 {}", r.families[0].modular_null, r.families[0].tends_to_zero);
    println!("sampled sup on the unit ball {} <= {}", r.sampled_sup, r.bound);

    for spec in ["identity", "custom:one-plus-log", "affine:0,2"] {
        println!("{spec:<20} {:?}", check_linf_isomorphism(&spec.parse()?, &cfg)?);
    }
    Ok(())
}
