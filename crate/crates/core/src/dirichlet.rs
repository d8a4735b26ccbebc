//! Discrete variable-exponent Dirichlet energy on a uniform 1D grid.
//!
//! Nodes `x_i = i h`, `h = 1/n`. The unknown `u` vanishes at both endpoints;
//! `w = u - phi` and `g_i = (w_{i+1} - w_i) / h` is the slope on cell `i`.
//!
//! `F(u) = sum_i h |g_i|^{p_i}` with `p_i = p((i + 1/2) h) >= 2`.

use serde::Serialize;

use crate::error::{ModtopError, Result};
use crate::exponent::{ExponentKind, ExponentSpec};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyProblem {
    pub n: usize,
    pub h: f64,
    /// Cell-midpoint exponents, length `n`.
    pub exponents: Vec<f64>,
    /// Boundary datum at the nodes, length `n + 1`.
    pub phi: Vec<f64>,
}

/// Samples `p` at cell midpoints and `phi` at nodes.
pub fn assemble_energy<F: Fn(f64) -> f64>(n: usize, p: &ExponentSpec, phi: F) -> Result<EnergyProblem> {
    let nodes: Vec<f64> = (0..=n).map(|i| phi(i as f64 / n.max(1) as f64)).collect();
    assemble_energy_from_nodes(n, p, nodes)
}

/// Like [`assemble_energy`] with `phi` given by its `n + 1` node values.
pub fn assemble_energy_from_nodes(n: usize, p: &ExponentSpec, phi: Vec<f64>) -> Result<EnergyProblem> {
    if n < 2 {
        return Err(ModtopError::InvalidArgument(format!("grid needs n >= 2 cells, got {n}")));
    }
    if phi.len() != n + 1 || phi.iter().any(|v| !v.is_finite()) {
        return Err(ModtopError::InvalidArgument(format!(
            "boundary datum needs {} finite node values, got {}",
            n + 1,
            phi.len()
        )));
    }
    match p.kind() {
        ExponentKind::Table(_) => {
            return Err(ModtopError::DomainMismatch(format!("'{p}' is a sequence exponent, not p(x)")))
        }
        ExponentKind::Reciprocal { lo, .. } if *lo == 0.0 => {
            return Err(ModtopError::Unsupported("unbounded exponents are excluded from the solver".into()))
        }
        _ => {}
    }
    if let Some((a, b)) = p.function_domain() {
        if a > 0.0 || b < 1.0 {
            return Err(ModtopError::DomainMismatch(format!("'{p}' is defined on ({a}, {b}), not on (0, 1)")));
        }
    }
    let h = 1.0 / n as f64;
    let mut exponents = Vec::with_capacity(n);
    for i in 0..n {
        let at = (i as f64 + 0.5) * h;
        let v = p.fun_value(at);
        if !(v.is_finite() && v >= 2.0) {
            return Err(ModtopError::ExponentBelowTwo { value: v, at });
        }
        exponents.push(v);
    }
    Ok(EnergyProblem { n, h, exponents, phi })
}

impl EnergyProblem {
    /// Cell slopes of `u - phi` for interior values `u` (length `n - 1`).
    pub fn slopes(&self, u: &[f64]) -> Vec<f64> {
        assert_eq!(u.len(), self.n - 1, "interior vector has the wrong length");
        let w = |i: usize| -> f64 {
            let ui = if i == 0 || i == self.n { 0.0 } else { u[i - 1] };
            ui - self.phi[i]
        };
        (0..self.n).map(|i| (w(i + 1) - w(i)) / self.h).collect()
    }

    /// `h |g|^p`; the power is taken in logs and only folded with `h` when it would overflow.
    fn cell_energy(&self, g: f64, p: f64) -> f64 {
        if g == 0.0 {
            return 0.0;
        }
        let lt = p * g.abs().ln();
        if lt < 700.0 {
            self.h * lt.exp()
        } else {
            (lt + self.h.ln()).exp()
        }
    }

    /// `h (|b|^p - |a|^p)` without cancellation when `a` and `b` are close.
    fn cell_change(&self, a: f64, b: f64, p: f64) -> f64 {
        let (a, b) = (a.abs(), b.abs());
        if a == 0.0 || b == 0.0 {
            return self.cell_energy(b, p) - self.cell_energy(a, p);
        }
        self.cell_energy(a, p) * (p * ((b - a) / a).ln_1p()).exp_m1()
    }

    /// `F(v) - F(u)`, summed cell by cell so that small decreases near the
    /// minimum are not lost to rounding.
    pub fn energy_change(&self, u: &[f64], v: &[f64]) -> f64 {
        let (a, b) = (self.slopes(u), self.slopes(v));
        a.iter().zip(&b).zip(&self.exponents).map(|((&x, &y), &p)| self.cell_change(x, y, p)).sum()
    }

    fn flux(g: f64, p: f64) -> f64 {
        // |g|^{p-2} g, zero at g = 0 since p >= 2
        if g == 0.0 {
            0.0
        } else {
            g.signum() * ((p - 1.0) * g.abs().ln()).exp()
        }
    }

    /// Modular distance of gradients: `sum_i h |g_i(u) - g_i(v)|^{p_i}`.
    pub fn gradient_modular_distance(&self, u: &[f64], v: &[f64]) -> f64 {
        let (a, b) = (self.slopes(u), self.slopes(v));
        a.iter().zip(&b).zip(&self.exponents).map(|((x, y), &p)| self.cell_energy(x - y, p)).sum()
    }

    /// Gershgorin bound `4 max_i p_i (p_i - 1) |g_i|^{p_i - 2} / h` on the Hessian at `u`.
    pub fn curvature_bound(&self, u: &[f64]) -> f64 {
        let c = self
            .slopes(u)
            .iter()
            .zip(&self.exponents)
            .map(|(&g, &p)| if p == 2.0 { 2.0 } else { p * (p - 1.0) * ((p - 2.0) * g.abs().ln()).exp() })
            .fold(0.0f64, f64::max);
        4.0 * c / self.h
    }

    pub fn zero_start(&self) -> Vec<f64> {
        vec![0.0; self.n - 1]
    }
}

pub fn energy_value(prob: &EnergyProblem, u: &[f64]) -> f64 {
    prob.slopes(u).iter().zip(&prob.exponents).map(|(&g, &p)| prob.cell_energy(g, p)).sum()
}

/// Exact gradient: node `i` gets `p_{i-1} |g_{i-1}|^{p-2} g_{i-1} - p_i |g_i|^{p-2} g_i`.
pub fn energy_gradient(prob: &EnergyProblem, u: &[f64]) -> Vec<f64> {
    let g = prob.slopes(u);
    let f: Vec<f64> = g.iter().zip(&prob.exponents).map(|(&g, &p)| p * EnergyProblem::flux(g, p)).collect();
    (1..prob.n).map(|i| f[i - 1] - f[i]).collect()
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IterRecord {
    pub iteration: usize,
    /// Starting energy plus the accumulated accepted decreases.
    pub energy: f64,
    pub grad_inf: f64,
    /// Accepted step length (0 for the starting point).
    pub step: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Converged,
    /// The iteration cap was hit; `final_u` is the best (last) iterate.
    MaxIterExceeded,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveTrace {
    pub iterates: Vec<IterRecord>,
    pub final_u: Vec<f64>,
    pub final_energy: f64,
    /// `sum_i h |g_i(u_k) - g_i(u_final)|^{p_i}` for each recorded iterate.
    pub modular_trace: Vec<f64>,
    pub status: SolveStatus,
}

impl SolveTrace {
    pub fn energy_is_monotone(&self) -> bool {
        self.iterates.windows(2).all(|w| w[1].energy <= w[0].energy)
    }

    /// Nonincreasing over the trailing half of the trace.
    pub fn modular_trace_settles(&self) -> bool {
        let t = &self.modular_trace[self.modular_trace.len() / 2..];
        t.windows(2).all(|w| w[1] <= w[0])
    }
}

const ARMIJO: f64 = 1e-4;

/// Gradient descent from `u = 0` with backtracking (Armijo constant `1e-4`,
/// halving, trial step capped by the curvature bound). Stops when the gradient sup-norm is `<= tol`.
pub fn minimize_energy(prob: &EnergyProblem, tol: f64, max_iter: usize) -> Result<SolveTrace> {
    minimize_energy_from(prob, prob.zero_start(), tol, max_iter)
}

pub fn minimize_energy_from(prob: &EnergyProblem, u0: Vec<f64>, tol: f64, max_iter: usize) -> Result<SolveTrace> {
    if !(tol > 0.0) {
        return Err(ModtopError::InvalidArgument(format!("tol = {tol} must be > 0")));
    }
    if u0.len() != prob.n - 1 || u0.iter().any(|v| !v.is_finite()) {
        return Err(ModtopError::InvalidArgument("starting point must be finite and interior-sized".into()));
    }
    let mut u = u0;
    let mut energy = energy_value(prob, &u);
    let mut grad = energy_gradient(prob, &u);
    let mut history = vec![u.clone()];
    let mut iterates = vec![IterRecord { iteration: 0, energy, grad_inf: inf_norm(&grad), step: 0.0 }];
    let mut step = prob.h;
    let mut status = SolveStatus::MaxIterExceeded;
    for it in 1..=max_iter {
        let gnorm = inf_norm(&grad);
        if gnorm <= tol {
            status = SolveStatus::Converged;
            break;
        }
        let g2: f64 = grad.iter().map(|g| g * g).sum();
        // Never try past the inverse Gershgorin bound of the local Hessian: for
        // p = 2 this keeps every mode contracting without sign flips.
        step = (2.0 * step).min(1.0 / prob.curvature_bound(&u));
        let (trial, change) = loop {
            let trial: Vec<f64> = u.iter().zip(&grad).map(|(x, g)| x - step * g).collect();
            let change = prob.energy_change(&u, &trial);
            if change <= -ARMIJO * step * g2 {
                break (trial, change);
            }
            step *= 0.5;
            if step < 1e-300 {
                return Err(ModtopError::InvalidArgument("line search failed to find a descent step".into()));
            }
        };
        u = trial;
        energy += change;
        grad = energy_gradient(prob, &u);
        history.push(u.clone());
        iterates.push(IterRecord { iteration: it, energy, grad_inf: inf_norm(&grad), step });
    }
    if status == SolveStatus::MaxIterExceeded && inf_norm(&grad) <= tol {
        status = SolveStatus::Converged;
    }
    let modular_trace = history.iter().map(|v| prob.gradient_modular_distance(v, &u)).collect();
    let final_energy = energy_value(prob, &u);
    Ok(SolveTrace { iterates, final_energy, final_u: u, modular_trace, status })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResidualReport {
    pub max_residual: f64,
    pub pass: bool,
}

/// Discrete weak residual at interior nodes: the energy gradient divided by `h`,
/// `r_i = (p_{i-1} |g_{i-1}|^{p-2} g_{i-1} - p_i |g_i|^{p-2} g_i) / h`.
pub fn residual_check(prob: &EnergyProblem, u: &[f64], tol: f64) -> ResidualReport {
    let max_residual = inf_norm(&energy_gradient(prob, u)) / prob.h;
    ResidualReport { max_residual, pass: max_residual <= tol }
}

/// Exact minimizer for `p = 2` on every cell: the discrete Laplace system
/// `2u_i - u_{i-1} - u_{i+1} = 2phi_i - phi_{i-1} - phi_{i+1}`, solved by the Thomas algorithm.
pub fn quadratic_oracle(prob: &EnergyProblem) -> Result<Vec<f64>> {
    if prob.exponents.iter().any(|&p| p != 2.0) {
        return Err(ModtopError::Unsupported("the linear oracle needs p = 2 on every cell".into()));
    }
    let n = prob.n;
    let phi = &prob.phi;
    let d: Vec<f64> = (1..n).map(|i| 2.0 * phi[i] - phi[i - 1] - phi[i + 1]).collect();
    let m = n - 1;
    Ok(thomas(&vec![-1.0; m], &vec![2.0; m], &vec![-1.0; m], &d))
}

/// Solves `a_i x_{i-1} + b_i x_i + c_i x_{i+1} = d_i`.
fn thomas(a: &[f64], b: &[f64], c: &[f64], d: &[f64]) -> Vec<f64> {
    let n = d.len();
    let (mut cp, mut dp) = (vec![0.0; n], vec![0.0; n]);
    cp[0] = c[0] / b[0];
    dp[0] = d[0] / b[0];
    for i in 1..n {
        let m = b[i] - a[i] * cp[i - 1];
        cp[i] = c[i] / m;
        dp[i] = (d[i] - a[i] * dp[i - 1]) / m;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = dp[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = dp[i] - cp[i] * x[i + 1];
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sampling() {
        let p = ExponentSpec::constant(2.0).unwrap();
        let prob = assemble_energy(4, &p, |x| x).unwrap();
        assert_eq!(prob.exponents, vec![2.0; 4]);
        assert_eq!(prob.phi, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        let q = ExponentSpec::affine(2.0, 2.0).unwrap();
        let prob = assemble_energy(4, &q, |_| 0.0).unwrap();
        assert_eq!(prob.exponents, vec![2.25, 2.75, 3.25, 3.75]);
        assert!(assemble_energy(1, &p, |x| x).is_err());
        let low = ExponentSpec::constant(1.5).unwrap();
        assert!(matches!(assemble_energy(4, &low, |x| x), Err(ModtopError::ExponentBelowTwo { .. })));
        assert!(assemble_energy(4, &ExponentSpec::reciprocal(0.0, 1.0).unwrap(), |x| x).is_err());
    }

    #[test]
    fn energy_examples() {
        let p = ExponentSpec::constant(2.0).unwrap();
        let prob = assemble_energy(8, &p, |x| x).unwrap();
        assert_eq!(energy_value(&prob, &prob.zero_start()), 1.0);
        let flat = assemble_energy(8, &p, |_| 0.0).unwrap();
        assert_eq!(energy_value(&flat, &flat.zero_start()), 0.0);
        // slope of u - phi equal to 2 on every cell, p = 4: each cell gives h 2^4
        let q = ExponentSpec::constant(4.0).unwrap();
        let steep = assemble_energy(4, &q, |x| -2.0 * x).unwrap();
        assert!((energy_value(&steep, &steep.zero_start()) - 16.0).abs() < 1e-12);
    }

    #[test]
    fn gradient_vanishes_at_the_global_minimum() {
        let p = ExponentSpec::constant(2.0).unwrap();
        let prob = assemble_energy(10, &p, |x| x * (1.0 - x)).unwrap();
        let u: Vec<f64> = prob.phi[1..10].to_vec();
        assert!(inf_norm(&energy_gradient(&prob, &u)) < 1e-15);
        assert_eq!(energy_value(&prob, &u), 0.0);
    }

    #[test]
    fn gradient_is_reflection_symmetric() {
        // p and phi symmetric about 1/2, u symmetric: gradient symmetric
        let p = ExponentSpec::custom("tent", |x| 2.0 + (x - 0.5).abs(), false, false);
        let prob = assemble_energy(12, &p, |x| (std::f64::consts::PI * x).sin()).unwrap();
        let u: Vec<f64> = (1..12).map(|i| ((i * (12 - i)) as f64).sqrt() / 10.0).collect();
        let g = energy_gradient(&prob, &u);
        for i in 0..g.len() {
            assert!((g[i] - g[g.len() - 1 - i]).abs() < 1e-12);
        }
    }

    #[test]
    fn linear_datum_is_already_optimal() {
        let p = ExponentSpec::constant(2.0).unwrap();
        let prob = assemble_energy(64, &p, |x| x).unwrap();
        let t = minimize_energy(&prob, 1e-10, 1000).unwrap();
        assert_eq!(t.status, SolveStatus::Converged);
        assert!(inf_norm(&t.final_u) <= 1e-6);
        assert!((t.final_energy - 1.0).abs() <= 1e-6);
    }

    #[test]
    fn quadratic_case_matches_tridiagonal_oracle() {
        let n = 16;
        let phi: Vec<f64> = (0..=n).map(|i| ((i * 7919) % 13) as f64 / 13.0 - 0.5).collect();
        let p = ExponentSpec::constant(2.0).unwrap();
        let prob = assemble_energy_from_nodes(n, &p, phi).unwrap();
        let t = minimize_energy(&prob, 1e-11, 200_000).unwrap();
        assert_eq!(t.status, SolveStatus::Converged);
        let oracle = quadratic_oracle(&prob).unwrap();
        for (a, b) in t.final_u.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-8, "{a} vs {b}");
        }
        assert!(t.energy_is_monotone());
        assert!(residual_check(&prob, &t.final_u, 1e-6).pass);
        assert!(t.modular_trace_settles());
    }

    #[test]
    fn variable_exponent_minimizer_has_small_residual() {
        let p = ExponentSpec::affine(2.0, 2.0).unwrap();
        let prob = assemble_energy(64, &p, |x| x).unwrap();
        let t = minimize_energy(&prob, 1e-9, 1_000_000).unwrap();
        assert_eq!(t.status, SolveStatus::Converged);
        assert!(residual_check(&prob, &t.final_u, 1e-6).pass);
        assert!(t.energy_is_monotone() && t.modular_trace_settles());
        assert!(*t.modular_trace.last().unwrap() == 0.0);
    }

    #[test]
    fn residual_examples() {
        let p = ExponentSpec::constant(2.0).unwrap();
        let bubble = assemble_energy(64, &p, |x| x * (1.0 - x)).unwrap();
        let r = residual_check(&bubble, &bubble.zero_start(), 1e-6);
        // gradient 2 * (second difference of phi) = -4 h at every node
        assert!(!r.pass && (r.max_residual - 4.0).abs() < 1e-9, "{r:?}");
        let flat = assemble_energy(8, &p, |_| 0.0).unwrap();
        assert_eq!(residual_check(&flat, &flat.zero_start(), 1e-12), ResidualReport { max_residual: 0.0, pass: true });
    }

    #[test]
    fn max_iter_is_flagged() {
        let p = ExponentSpec::affine(2.0, 2.0).unwrap();
        let prob = assemble_energy(32, &p, |x| x).unwrap();
        let t = minimize_energy(&prob, 1e-12, 3).unwrap();
        assert_eq!(t.status, SolveStatus::MaxIterExceeded);
        assert_eq!(t.iterates.len(), 4);
    }
}
