//! Property suites and the parallel suite runner.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

use crate::diagnostics::{run_counterexample, Check, ScenarioReport, REGISTRY};
use crate::dirichlet::{
    assemble_energy, assemble_energy_from_nodes, energy_gradient, energy_value, minimize_energy, quadratic_oracle,
    residual_check, SolveStatus,
};
use crate::error::{ModtopError, Result};
use crate::exponent::ExponentSpec;
use crate::luxemburg::{
    luxemburg_norm, minkowski_functional, scaled_luxemburg_norm, verify_norm_modular_relations, NormOptions,
};
use crate::modular::{Element, EvalConfig};
use crate::sequence::SequenceVec;

pub const PROPERTY_SUITES: [&str; 2] = ["prop-norm-relations", "prop-dirichlet"];

/// Every registry scenario followed by every property suite.
pub fn all_names() -> Vec<String> {
    REGISTRY.iter().chain(PROPERTY_SUITES.iter()).map(|s| s.to_string()).collect()
}

/// Runs one registry scenario or property suite.
pub fn run_named(name: &str, seed: u64, cfg: &EvalConfig) -> Result<ScenarioReport> {
    match name {
        "prop-norm-relations" => norm_relations(seed, cfg),
        "prop-dirichlet" => dirichlet_properties(seed),
        _ => run_counterexample(name, seed, cfg),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteEntry {
    pub name: String,
    pub passed: bool,
    pub report: Option<ScenarioReport>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub seed: u64,
    pub passed: bool,
    pub entries: Vec<SuiteEntry>,
}

/// Runs `names` on up to `parallel` threads. Entries come back in input order;
/// an unknown name fails its own entry only.
pub fn run_suite(names: &[String], parallel: usize, seed: u64, cfg: &EvalConfig) -> Result<SuiteReport> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallel.max(1))
        .build()
        .map_err(|e| ModtopError::Config(format!("thread pool: {e}")))?;
    let entries: Vec<SuiteEntry> = pool.install(|| {
        names
            .par_iter()
            .map(|name| match run_named(name, seed, cfg) {
                Ok(r) => SuiteEntry { name: name.clone(), passed: r.passed, report: Some(r), error: None },
                Err(e) => SuiteEntry { name: name.clone(), passed: false, report: None, error: Some(e.to_string()) },
            })
            .collect()
    });
    let passed = !entries.is_empty() && entries.iter().all(|e| e.passed);
    Ok(SuiteReport { seed, passed, entries })
}

struct Tally {
    checks: Vec<Check>,
    numbers: BTreeMap<String, Value>,
}

impl Tally {
    fn new() -> Self {
        Self { checks: Vec::new(), numbers: BTreeMap::new() }
    }

    fn check(&mut self, label: &str, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check::new(label, passed, detail));
    }

    fn num(&mut self, key: &str, v: impl Serialize) {
        self.numbers.insert(key.to_string(), serde_json::to_value(v).unwrap_or(Value::Null));
    }

    fn finish(self, name: &str, seed: u64) -> ScenarioReport {
        let passed = !self.checks.is_empty() && self.checks.iter().all(|c| c.passed);
        ScenarioReport { name: name.to_string(), seed, passed, checks: self.checks, numbers: self.numbers }
    }
}

/// Worst violation of `lhs <= rhs` seen so far (negative means all held).
fn worst(acc: &mut f64, lhs: f64, rhs: f64) {
    *acc = acc.max(lhs - rhs);
}

fn random_table(rng: &mut ChaCha8Rng) -> Result<ExponentSpec> {
    let dim = rng.gen_range(1..=4);
    ExponentSpec::table((0..dim).map(|_| rng.gen_range(1.0..=6.0)).collect())
}

fn random_vector(rng: &mut ChaCha8Rng, dim: usize) -> Result<Element> {
    let v: Vec<f64> =
        (0..dim).map(|_| if rng.gen_bool(0.2) { 0.0 } else { rng.gen_range(-3.0..=3.0) }).collect();
    Ok(SequenceVec::from_values(&v)?.into())
}

/// Norm/modular relations, homogeneity, triangle inequality, the scaled-norm
/// sandwich, Minkowski functional bounds and the sup-norm embedding on 100
/// random vectors over random table exponents.
fn norm_relations(seed: u64, cfg: &EvalConfig) -> Result<ScenarioReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let opts = NormOptions { tol: 1e-12, eval: *cfg, ..NormOptions::default() };
    let norm = |x: &Element, p: &ExponentSpec| luxemburg_norm(x, p, &opts).map(|r| r.value);
    let mut t = Tally::new();
    let mut relations = 0;
    let (mut homog, mut tri, mut sandwich, mut linf, mut mink) = (f64::MIN, f64::MIN, f64::MIN, f64::MIN, f64::MIN);
    for _ in 0..100 {
        let p = random_table(&mut rng)?;
        let dim = p.dimension().expect("table exponent");
        let x = random_vector(&mut rng, dim)?;
        let y = random_vector(&mut rng, dim)?;
        if verify_norm_modular_relations(&x, &p, 1e-8, &opts)?.all_pass() {
            relations += 1;
        }
        let n = norm(&x, &p)?;
        for c in [-2.0, -1.0, 0.5, 3.0] {
            let nc = norm(&x.scale(c), &p)?;
            let want = c.abs() * n;
            worst(&mut homog, (nc - want).abs(), 2e-10 * want.max(1.0));
        }
        let ny = norm(&y, &p)?;
        let nxy = norm(&Element::lin_comb(1.0, &x, 1.0, &y)?, &p)?;
        worst(&mut tri, nxy, n + ny + 2e-10 * (n + ny).max(1.0));
        for alpha in [0.25, 0.5, 2.0, 4.0] {
            let s = scaled_luxemburg_norm(&x, &p, alpha, &opts)?.value;
            let (lo, hi) = if alpha < 1.0 { (alpha * n, n) } else { (n, alpha * n) };
            worst(&mut sandwich, lo, s + 1e-8);
            worst(&mut sandwich, s, hi + 1e-8);
        }
        let sup = x.as_sequence().expect("sequence").sup_abs();
        worst(&mut linf, sup, n + 1e-10);
        let m2 = minkowski_functional(&x, &p, 2.0, &opts)?.value;
        worst(&mut mink, m2, n + 1e-10);
        worst(&mut mink, n, 2.0 * m2 + 1e-10);
    }
    t.check("norm/modular relations hold", relations == 100, format!("{relations}/100 within 1e-8"));
    t.check("absolute homogeneity", homog <= 0.0, format!("worst excess {homog:e}"));
    t.check("triangle inequality", tri <= 0.0, format!("worst excess {tri:e}"));
    t.check("scaled-norm sandwich for alpha in {1/4, 1/2, 2, 4}", sandwich <= 0.0, format!("worst excess {sandwich:e}"));
    t.check("sup norm below Luxemburg norm", linf <= 0.0, format!("worst excess {linf:e}"));
    t.check("mu_2 <= ||x|| <= 2 mu_2", mink <= 0.0, format!("worst excess {mink:e}"));
    t.num("samples", 100);
    Ok(t.finish("prop-norm-relations", seed))
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Central differences of the energy, step `1e-6`.
pub fn finite_difference_gradient(prob: &crate::dirichlet::EnergyProblem, u: &[f64]) -> Vec<f64> {
    let step = 1e-6;
    (0..u.len())
        .map(|i| {
            let (mut a, mut b) = (u.to_vec(), u.to_vec());
            a[i] += step;
            b[i] -= step;
            (energy_value(prob, &a) - energy_value(prob, &b)) / (2.0 * step)
        })
        .collect()
}

/// Solver oracles, gradient agreement, convexity and trace behavior.
fn dirichlet_properties(seed: u64) -> Result<ScenarioReport> {
    let mut t = Tally::new();
    let quad = ExponentSpec::constant(2.0)?;
    let prob = assemble_energy(64, &quad, |x| x)?;
    let s = minimize_energy(&prob, 1e-9, 1_000_000)?;
    let oracle = quadratic_oracle(&prob)?;
    let gap = s.final_u.iter().zip(&oracle).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    t.check(
        "p = 2, phi = x: u* = 0 and F* = 1",
        s.status == SolveStatus::Converged && inf_norm(&s.final_u) <= 1e-6 && (s.final_energy - 1.0).abs() <= 1e-6,
        format!("|u*| = {:e}, F* = {}", inf_norm(&s.final_u), s.final_energy),
    );
    t.check("p = 2, phi = x: matches the tridiagonal oracle", gap <= 1e-6, format!("max gap {gap:e}"));

    let var = ExponentSpec::affine(2.0, 2.0)?;
    let prob = assemble_energy(64, &var, |x| x)?;
    let v = minimize_energy(&prob, 1e-9, 1_000_000)?;
    let res = residual_check(&prob, &v.final_u, 1e-6);
    t.check(
        "p(x) = 2 + 2x: residual at the minimizer <= 1e-6",
        v.status == SolveStatus::Converged && res.pass,
        format!("residual {:e}", res.max_residual),
    );
    for (label, trace) in [("p = 2", &s), ("p(x) = 2 + 2x", &v)] {
        t.check(&format!("{label}: energy trace is monotone"), trace.energy_is_monotone(), "");
        let last = trace.modular_trace.last().copied().unwrap_or(f64::NAN);
        t.check(
            &format!("{label}: modular distance to the minimizer settles"),
            trace.modular_trace_settles() && last < 1e-9,
            format!("{} iterates", trace.iterates.len()),
        );
    }
    t.num("quadratic_iterations", s.iterates.len() - 1);
    t.num("variable_iterations", v.iterates.len() - 1);
    t.num("variable_energy", v.final_energy);
    t.num("variable_residual", res.max_residual);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst_rel = 0.0f64;
    let mut convex_excess = f64::MIN;
    for i in 0..10 {
        let n = [8, 16, 32][i % 3];
        let p = ExponentSpec::affine(rng.gen_range(0.0..=2.0), 2.0)?;
        let phi: Vec<f64> = (0..=n).map(|_| rng.gen_range(-0.5..=0.5)).collect();
        let prob = assemble_energy_from_nodes(n, &p, phi)?;
        let draw = |rng: &mut ChaCha8Rng| -> Vec<f64> { (1..n).map(|_| rng.gen_range(-0.5..=0.5)).collect() };
        let u = draw(&mut rng);
        let g = energy_gradient(&prob, &u);
        let fd = finite_difference_gradient(&prob, &u);
        let diff = g.iter().zip(&fd).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        worst_rel = worst_rel.max(diff / inf_norm(&g).max(f64::MIN_POSITIVE));
        for _ in 0..10 {
            let (a, b) = (draw(&mut rng), draw(&mut rng));
            let mid: Vec<f64> = a.iter().zip(&b).map(|(x, y)| 0.5 * (x + y)).collect();
            let lhs = energy_value(&prob, &mid);
            worst(&mut convex_excess, lhs, 0.5 * energy_value(&prob, &a) + 0.5 * energy_value(&prob, &b) + 1e-12);
        }
    }
    t.check("gradient matches central differences", worst_rel < 1e-6, format!("worst relative error {worst_rel:e}"));
    t.check("energy is midpoint convex", convex_excess <= 0.0, format!("worst excess {convex_excess:e}"));
    Ok(t.finish("prop-dirichlet", seed))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn property_suites_pass() {
        for name in PROPERTY_SUITES {
            let r = run_named(name, 11, &EvalConfig::default()).unwrap();
            assert!(r.passed, "{name}: {:#?}", r.checks);
        }
    }

    #[test]
    fn unknown_entry_does_not_abort_siblings() {
        let names = vec!["separability".to_string(), "nope".to_string()];
        let r = run_suite(&names, 2, 0, &EvalConfig::default()).unwrap();
        assert!(!r.passed);
        assert!(r.entries[0].passed);
        assert!(r.entries[1].error.as_deref().unwrap().contains("nope"));
    }
}
