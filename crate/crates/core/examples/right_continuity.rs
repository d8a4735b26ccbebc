//! Right-continuity of lambda -> rho(lambda x) at 1.

use modtop::diagnostics::right_continuity_probe;
use modtop::{Element, EvalConfig, ExponentSpec, PiecewiseFunction, SequenceVec};

fn main() -> modtop::Result<()> {
    let cfg = EvalConfig::default();
    let one: Element = PiecewiseFunction::constant(0.0, 0.5, 1.0)?.into();
    let p = ExponentSpec::reciprocal(0.0, 0.5)?;
    println!("1 on (0, 1/2), p = 1/x : {:?}", right_continuity_probe(&one, &p, None, 1e-4, 1e-3, &cfg)?);

    let x: Element = SequenceVec::constant(0.5).into();
    let id = ExponentSpec::identity();
    println!("(1/2, 1/2, ...), p_n = n : {:?}", right_continuity_probe(&x, &id, None, 1e-4, 1e-3, &cfg)?);
    Ok(())
}
