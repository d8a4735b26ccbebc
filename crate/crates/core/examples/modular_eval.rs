//! Certified modular values: finite sums, divergence certificates, integrals.

use modtop::{modular, Element, EvalConfig, ExponentSpec, PiecewiseFunction, SequenceVec};

fn main() -> modtop::Result<()> {
    let cfg = EvalConfig::from_env()?;
    let id = ExponentSpec::identity();

    // (1/2, 1/2, 0, ...) against p_n = n
    let x: Element = SequenceVec::prefix_constant(2, 0.5).into();
    println!("rho(x)            = {:?}", modular(&x, &id, &cfg)?);

    // a constant tail of -1 never decays, so the sum diverges with a certificate
    let y: Element = SequenceVec::constant(-1.0).into();
    let v = modular(&y, &id, &cfg)?;
    println!("rho(-1)           = {}", serde_json::to_string(&v).unwrap());

    // the constant 1 on (0, 1/2) with p(x) = 1/x
    let p = ExponentSpec::reciprocal(0.0, 0.5)?;
    let one: Element = PiecewiseFunction::constant(0.0, 0.5, 1.0)?.into();
    println!("int 1^(1/x)       = {:?}", modular(&one, &p, &cfg)?);
    println!("int 1.1^(1/x)     = {}", serde_json::to_string(&modular(&one.scale(1.1), &p, &cfg)?).unwrap());

    // the catalog step function, scaled by 1/2, against 1/x on (0, 1)
    let q = ExponentSpec::reciprocal(0.0, 1.0)?;
    let v: Element = PiecewiseFunction::harmonic_steps(0.5).into();
    println!("rho(v / 2)        = {:?}", modular(&v, &q, &cfg)?);
    Ok(())
}
