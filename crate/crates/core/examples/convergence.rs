//! Modular vs scaled vs norm convergence of the prefixes of (1/2, 1/2, ...).

use modtop::diagnostics::{classify_convergence, truncation_density_check, DEFAULT_LAMBDA_GRID};
use modtop::luxemburg::NormOptions;
use modtop::{Element, EvalConfig, ExponentSpec, SequenceVec};

fn main() -> modtop::Result<()> {
    let p = ExponentSpec::identity();
    let x = SequenceVec::constant(0.5);
    let family: Vec<(u64, Element)> = (1..=40).map(|n| (n, x.prefix(n).into())).collect();
    let r = classify_convergence(&family, &x.clone().into(), &p, &DEFAULT_LAMBDA_GRID, 1e-9, &NormOptions::with_tol(1e-12))?;
    println!("modular: {}  norm: {}  per scale: {:?}", r.modular_converges, r.norm_converges, r.per_lambda);
    println!("{:>5} {:>12} {:>12} {:>12}", "n", "rho", "rho(2 .)", "norm");
    for row in r.rows.iter().step_by(8) {
        println!("{:>5} {:>12.3e} {:>12.3e} {:>12.3e}", row.index, row.rho_distance, row.scaled[3], row.norm_distance);
    }

    let t = truncation_density_check(&x, &p, 1e-3, &EvalConfig::default())?;
    println!("\nrho(x - prefix_N) < 1e-3 first at N = {} (distance {:e})", t.n, t.distance);
    Ok(())
}
