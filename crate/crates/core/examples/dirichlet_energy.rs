//! Minimizing a discrete variable-exponent Dirichlet energy.

use modtop::dirichlet::{assemble_energy, minimize_energy, residual_check};
use modtop::ExponentSpec;

fn main() -> modtop::Result<()> {
    let p = ExponentSpec::affine(2.0, 2.0)?; // p(x) = 2 + 2x
    let prob = assemble_energy(64, &p, |x| x)?;
    let t = minimize_energy(&prob, 1e-9, 1_000_000)?;
    println!("status {:?} after {} iterations, F* = {}", t.status, t.iterates.len() - 1, t.final_energy);
    println!("residual {:?}", residual_check(&prob, &t.final_u, 1e-6));
    println!("energy monotone {}, modular trace settles {}", t.energy_is_monotone(), t.modular_trace_settles());
    let k = t.iterates.len() / 5;
    for (it, m) in t.iterates.iter().zip(&t.modular_trace).step_by(k.max(1)) {
        println!("  it {:>6}  F = {:.12}  |grad| = {:.3e}  dist = {:.3e}", it.iteration, it.energy, it.grad_inf, m);
    }
    Ok(())
}
