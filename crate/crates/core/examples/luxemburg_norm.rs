//! Luxemburg norms, Minkowski functionals and the norm/modular relations.

use modtop::luxemburg::{
    luxemburg_norm, minkowski_functional, scaled_luxemburg_norm, verify_norm_modular_relations, NormOptions,
};
use modtop::{Element, ExponentSpec, PiecewiseFunction, SequenceVec};

fn main() -> modtop::Result<()> {
    let opts = NormOptions::default();
    let sq = ExponentSpec::table(vec![2.0])?;
    let three: Element = SequenceVec::from_values(&[3.0])?.into();
    println!("||(3)||, p = 2        = {}", luxemburg_norm(&three, &sq, &opts)?.value);
    println!("mu_4((3)), p = 2      = {}", minkowski_functional(&three, &sq, 4.0, &opts)?.value);

    let p = ExponentSpec::table(vec![1.5, 4.0, 2.5])?;
    let x: Element = SequenceVec::from_values(&[0.7, -1.2, 0.3])?.into();
    let n = luxemburg_norm(&x, &p, &opts)?;
    println!("||x||                 = {} (bracket {:e}, {} evaluations)", n.value, n.bracket_width, n.evals_used);
    for alpha in [0.25, 0.5, 2.0, 4.0] {
        println!("  scaled by {alpha:<4}       = {}", scaled_luxemburg_norm(&x, &p, alpha, &opts)?.value);
    }
    let rel = verify_norm_modular_relations(&x, &p, 1e-8, &opts)?;
    println!("relations hold        = {}", rel.all_pass());

    // the norm is 1 although rho(x / lambda) is infinite for every lambda < 1
    let q = ExponentSpec::reciprocal(0.0, 0.5)?;
    let one: Element = PiecewiseFunction::constant(0.0, 0.5, 1.0)?.into();
    let rel = verify_norm_modular_relations(&one, &q, 1e-8, &opts)?;
    println!("||1||, p = 1/x        = {} with rho(1) = {}", rel.norm.value, rel.modular.as_extended());
    println!("strict equivalence    = {}", rel.strict_equivalence_probe);
    Ok(())
}
