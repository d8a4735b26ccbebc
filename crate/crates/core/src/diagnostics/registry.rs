use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::Value;

use super::delta2::verify_witness_scaling;
use super::{
    ball_interior_witness, check_delta2, classify_convergence, delta2_failure_witness, right_continuity_probe,
    settles_below, truncation_density_check, Check, RightContinuity, DEFAULT_LAMBDA_GRID, DEFAULT_PROBE_WINDOW,
};
use crate::error::{ModtopError, Result};
use crate::exponent::ExponentSpec;
use crate::function::PiecewiseFunction;
use crate::luxemburg::{luxemburg_norm, NormOptions};
use crate::modular::{modular, DivergenceCertificate, Element, EvalConfig, ModularValue};
use crate::sequence::SequenceVec;

pub const REGISTRY: [&str; 7] = [
    "lux-boundary-p-reciprocal",
    "seq-pn-equals-n",
    "seq-general-unbounded",
    "Lp-reciprocal",
    "delta2-witness",
    "separability",
    "finite-dim-delta2",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioReport {
    pub name: String,
    pub seed: u64,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub numbers: BTreeMap<String, Value>,
}

struct Builder {
    checks: Vec<Check>,
    numbers: BTreeMap<String, Value>,
}

impl Builder {
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

/// Runs a registry scenario end to end. `seed` drives the randomized ones.
pub fn run_counterexample(name: &str, seed: u64, cfg: &EvalConfig) -> Result<ScenarioReport> {
    let mut b = Builder::new();
    match name {
        "lux-boundary-p-reciprocal" => lux_boundary(&mut b, cfg)?,
        "seq-pn-equals-n" => seq_identity(&mut b, cfg)?,
        "seq-general-unbounded" | "Lp-reciprocal" => {
            let w = ball_interior_witness(name, 3.0, cfg)?;
            for c in &w.checks {
                b.checks.push(c.clone());
            }
            b.num("delta", w.delta);
            b.num("inner_distance", &w.inner_distance);
            if let Some(last) = w.approximants.last() {
                b.num("last_index", last.index);
                b.num("last_to_inner", &last.to_inner);
            }
            if name == "Lp-reciprocal" {
                lp_extra(&mut b, cfg)?;
            }
        }
        "delta2-witness" => delta2_scenario(&mut b, cfg)?,
        "separability" => separability(&mut b, cfg)?,
        "finite-dim-delta2" => finite_dim(&mut b, seed, cfg)?,
        _ => return Err(ModtopError::UnknownScenario(name.to_string())),
    }
    Ok(b.finish(name, seed))
}

fn is_analytic(v: &ModularValue) -> bool {
    matches!(v.certificate(), Some(DivergenceCertificate::AnalyticComparison(r)) if r.verify())
}

fn lux_boundary(b: &mut Builder, cfg: &EvalConfig) -> Result<()> {
    let p = ExponentSpec::reciprocal(0.0, 0.5)?;
    let one: Element = PiecewiseFunction::constant(0.0, 0.5, 1.0)?.into();
    let rho = modular(&one, &p, cfg)?;
    let norm = luxemburg_norm(&one, &p, &NormOptions { eval: *cfg, ..NormOptions::default() })?;
    b.num("rho_one", &rho);
    b.num("norm_one", norm.value);
    b.check("rho(1) = 1/2", rho.value().is_some_and(|v| (v - 0.5).abs() <= 1e-6), format!("{}", rho.as_extended()));
    b.check("||1|| = 1", (norm.value - 1.0).abs() <= 1e-4, format!("{}", norm.value));
    for lambda in [1.05, 1.1, 1.5] {
        let v = modular(&one.scale(lambda), &p, cfg)?;
        b.check(
            &format!("rho({lambda} * 1) is infinite by analytic comparison"),
            is_analytic(&v),
            v.certificate().map(|c| c.label()).unwrap_or("none").to_string(),
        );
        b.num(&format!("rho_scaled_{lambda}"), &v);
    }
    let rc = right_continuity_probe(&one, &p, None, 1e-4, 1e-3, cfg)?;
    b.check(
        "modular is not right-continuous at 1",
        matches!(rc, RightContinuity::NotRightContinuousAt { .. }),
        format!("{rc:?}"),
    );
    Ok(())
}

fn seq_identity(b: &mut Builder, cfg: &EvalConfig) -> Result<()> {
    let w = ball_interior_witness("seq-pn-equals-n", 3.0, cfg)?;
    for c in &w.checks {
        b.checks.push(c.clone());
    }
    b.num("inner_distance", &w.inner_distance);
    let p = ExponentSpec::identity();
    let x = SequenceVec::constant(0.5);
    let family: Vec<(u64, Element)> = (1..=40).map(|n| (n, x.prefix(n).into())).collect();
    let opts = NormOptions { tol: 1e-12, eval: *cfg, ..NormOptions::default() };
    let r = classify_convergence(&family, &x.clone().into(), &p, &DEFAULT_LAMBDA_GRID, 1e-9, &opts)?;
    let exact = r.rows.iter().all(|row| {
        let want = 2f64.powi(-(row.index as i32));
        (row.rho_distance - want).abs() <= 1e-12 * want
    });
    b.check("rho(x - x_n) = 2^-n for n <= 40", exact, "relative 1e-12");
    b.check("prefixes converge modularly", r.modular_converges, "");
    b.check("no convergence at lambda = 2", r.converges_at(2.0) == Some(false), "");
    b.check("no norm convergence", !r.norm_converges, "");
    let one: Element = SequenceVec::constant(1.0).into();
    let mut all_inf = true;
    for (_, xn) in &family {
        all_inf &= modular(&xn.sub(&one)?, &p, cfg)?.is_infinite();
    }
    b.check("rho(x_n - 1) is infinite for every n", all_inf, "");
    b.num("last_norm_distance", r.rows.last().map(|r| r.norm_distance));
    Ok(())
}

fn lp_extra(b: &mut Builder, cfg: &EvalConfig) -> Result<()> {
    let p = ExponentSpec::reciprocal(0.0, 1.0)?;
    for eps in [0.25, 0.5] {
        let v: Element = PiecewiseFunction::harmonic_steps(1.0 - eps).into();
        let r = modular(&v, &p, cfg)?;
        let bound = (1.0 - eps) / eps;
        b.check(
            &format!("rho((1 - eps) v) < (1 - eps) / eps at eps = {eps}"),
            r.upper_bound() < bound,
            format!("{} < {bound}", r.as_extended()),
        );
        b.num(&format!("rho_one_minus_eps_v_{eps}"), &r);
    }
    Ok(())
}

fn delta2_scenario(b: &mut Builder, cfg: &EvalConfig) -> Result<()> {
    let p = ExponentSpec::identity();
    let w = delta2_failure_witness(&p, 50, cfg)?;
    let bound = std::f64::consts::PI.powi(2) / 6.0;
    b.num("witness_modular", &w.at_one);
    b.check(
        "witness modular is finite and <= pi^2/6",
        w.at_one.is_finite() && w.at_one.upper_bound() <= bound + 1e-3,
        format!("{}", w.at_one.as_extended()),
    );
    b.check(
        "n_k = k^2 + 1",
        w.indices.iter().enumerate().all(|(i, &n)| n == ((i + 1) * (i + 1) + 1) as u64),
        "",
    );
    b.check(
        "scaled witness diverges at 1.1, 1.5, 2",
        w.scaled.iter().all(|s| s.modular.is_infinite()) && verify_witness_scaling(&p, &w),
        "",
    );
    let fun = check_delta2(&ExponentSpec::reciprocal(0.0, 0.5)?, DEFAULT_PROBE_WINDOW, cfg)?;
    b.check(
        "1/x on (0, 1/2) fails Delta2 with a function witness",
        !fun.bounded && fun.witness.as_ref().is_some_and(|w| w.holds(1e-6)),
        "",
    );
    let tab = check_delta2(&"table:2,3,2.5".parse()?, DEFAULT_PROBE_WINDOW, cfg)?;
    b.check("table:2,3,2.5 is bounded by 3", tab.bounded && tab.p_sup == 3.0, "");
    Ok(())
}

fn separability(b: &mut Builder, cfg: &EvalConfig) -> Result<()> {
    let p = ExponentSpec::identity();
    let t = truncation_density_check(&SequenceVec::constant(0.5), &p, 1e-3, cfg)?;
    b.check("(1/2) 1 truncates at N = 10", t.n == 10, format!("N = {}, distance {:e}", t.n, t.distance));
    b.check("truncation trace is monotone", t.trace_is_monotone(), "");
    b.num("half_ones_n", t.n);
    b.num("half_ones_distance", t.distance);

    let w = delta2_failure_witness(&p, 50, cfg)?;
    let x = w.element.as_sequence().expect("sequence witness").clone();
    let t = truncation_density_check(&x, &p, 1e-4, cfg)?;
    // partial-sum oracle: sum over k with n_k > N of 1/p_{n_k}
    let oracle: f64 = w.indices.iter().filter(|&&n| n > t.n).map(|&n| 1.0 / n as f64).sum();
    let oracle_prev: f64 = w.indices.iter().filter(|&&n| n > t.n - 1).map(|&n| 1.0 / n as f64).sum();
    b.check(
        "witness truncation matches the partial-sum oracle",
        oracle < 1e-4 && oracle_prev >= 1e-4 && (t.distance - oracle).abs() <= 1e-12,
        format!("N = {}", t.n),
    );
    b.check("witness truncation trace is monotone", t.trace_is_monotone(), "");
    let trace: Vec<f64> = t.trace.iter().map(|e| e.1).collect();
    b.check("traces decrease to 0", trace.last() == Some(&0.0) && settles_below(&trace, 1e-12), "");
    b.num("witness_n", t.n);
    Ok(())
}

/// Random table exponents of dimension 2..=8 with entries in [1, 6].
fn random_table(rng: &mut ChaCha8Rng) -> Result<ExponentSpec> {
    let dim = rng.gen_range(2..=8);
    ExponentSpec::table((0..dim).map(|_| rng.gen_range(1.0..=6.0)).collect())
}

fn finite_dim(b: &mut Builder, seed: u64, cfg: &EvalConfig) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ratio_ok = true;
    let mut doubled_null = true;
    let mut worst_ratio = 0.0f64;
    for _ in 0..20 {
        let p = random_table(&mut rng)?;
        let dim = p.dimension().unwrap();
        let p_sup = p.known_sup().unwrap();
        let dir: Vec<f64> = (0..dim).map(|_| rng.gen_range(-2.0..=2.0)).collect();
        // x_j = d / j^3 is modularly null for any direction d
        let fam: Vec<(u64, Element)> = (1..=30u64)
            .map(|j| {
                let x = SequenceVec::from_values(&dir.iter().map(|v| v / (j * j * j) as f64).collect::<Vec<_>>());
                x.map(|x| (j, x.into()))
            })
            .collect::<Result<_>>()?;
        for (_, x) in &fam {
            let r1 = modular(x, &p, cfg)?.as_extended();
            let r2 = modular(&x.scale(2.0), &p, cfg)?.as_extended();
            if r1 > 0.0 {
                let ratio = r2 / r1;
                worst_ratio = worst_ratio.max(ratio / 2f64.powf(p_sup));
                ratio_ok &= ratio <= 2f64.powf(p_sup) * (1.0 + 1e-12);
            }
        }
        let zero: Element = SequenceVec::zero().into();
        let opts = NormOptions { tol: 1e-12, eval: *cfg, ..NormOptions::default() };
        let r = classify_convergence(&fam, &zero, &p, &[1.0, 2.0], 1e-3, &opts)?;
        doubled_null &= r.modular_converges && r.converges_at(2.0) == Some(true);
    }
    b.check("rho(2 x_j) <= 2^p_sup rho(x_j)", ratio_ok, format!("max ratio / 2^p_sup = {worst_ratio}"));
    b.check("modularly null families stay null after doubling", doubled_null, "20 random table exponents");
    b.num("worst_ratio_fraction", worst_ratio);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_scenarios_pass() {
        for name in REGISTRY {
            let r = run_counterexample(name, 7, &EvalConfig::default()).unwrap();
            assert!(r.passed, "{name}: {:#?}", r.checks);
        }
    }

    #[test]
    fn unknown_name() {
        assert!(matches!(
            run_counterexample("nope", 0, &EvalConfig::default()),
            Err(ModtopError::UnknownScenario(_))
        ));
    }
}
