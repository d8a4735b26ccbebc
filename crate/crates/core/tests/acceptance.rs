//! Acceptance criteria 1-8. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use modtop::cli::{all_names, run_named, run_suite};
use modtop::diagnostics::{
    check_delta2, classify_convergence, delta2_failure_witness, run_counterexample, verify_witness_scaling,
    DEFAULT_LAMBDA_GRID, DEFAULT_PROBE_WINDOW,
};
use modtop::exponent::ExponentSpec;
use modtop::function::{step_bounds, step_height};
use modtop::luxemburg::{luxemburg_norm, NormOptions};
use modtop::modular::{eval_fun_modular, scaled_modular, AnalyticRule, DivergenceCertificate};
use modtop::{modular, Element, EvalConfig, PiecewiseFunction, SequenceVec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 20240611;

struct Outcome {
    ok: bool,
    notes: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Self { ok: true, notes: Vec::new() }
    }

    fn require(&mut self, cond: bool, what: impl Into<String>) {
        if !cond {
            self.ok = false;
            self.notes.push(what.into());
        }
    }
}

type Criterion = fn() -> Outcome;

fn cfg() -> EvalConfig {
    EvalConfig::default()
}

fn boundary_example() -> Outcome {
    let mut o = Outcome::new();
    let p = ExponentSpec::reciprocal(0.0, 0.5).unwrap();
    let one = PiecewiseFunction::constant(0.0, 0.5, 1.0).unwrap();
    let rho = eval_fun_modular(&one, &p, &cfg()).unwrap();
    o.require(rho.value().is_some_and(|v| (v - 0.5).abs() <= 1e-6), format!("rho(1) = {:?}", rho));
    let norm = luxemburg_norm(&one.clone().into(), &p, &NormOptions::default()).unwrap();
    o.require((norm.value - 1.0).abs() <= 1e-4, format!("||1|| = {}", norm.value));
    for lambda in [1.05, 1.1, 1.5] {
        let v = scaled_modular(&one.clone().into(), &p, lambda, &cfg()).unwrap();
        let analytic = matches!(
            v.certificate(),
            Some(DivergenceCertificate::AnalyticComparison(r @ AnalyticRule::ReciprocalBlowup { .. })) if r.verify()
        );
        o.require(v.is_infinite() && analytic, format!("rho({lambda} * 1) = {v:?}"));
    }
    o
}

fn delta2_dichotomy() -> Outcome {
    let mut o = Outcome::new();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    for _ in 0..20 {
        let dim = rng.gen_range(1..=10);
        let values: Vec<f64> = (0..dim).map(|_| rng.gen_range(1.0..=8.0)).collect();
        let sup = values.iter().cloned().fold(f64::MIN, f64::max);
        let p = ExponentSpec::table(values).unwrap();
        let v = check_delta2(&p, DEFAULT_PROBE_WINDOW, &cfg()).unwrap();
        o.require(v.bounded && v.p_sup == sup, format!("{p} not reported bounded by {sup}"));
    }
    let id = ExponentSpec::identity();
    let v = check_delta2(&id, DEFAULT_PROBE_WINDOW, &cfg()).unwrap();
    o.require(!v.bounded, "p_n = n reported bounded");
    let recip = ExponentSpec::reciprocal(0.0, 1.0).unwrap();
    let r = check_delta2(&recip, DEFAULT_PROBE_WINDOW, &cfg()).unwrap();
    o.require(!r.bounded, "1/x reported bounded");

    let w = delta2_failure_witness(&id, 50, &cfg()).unwrap();
    let bound = PI * PI / 6.0 + 1e-3;
    o.require(
        w.at_one.is_finite() && w.at_one.upper_bound() <= bound,
        format!("witness modular {:?} exceeds pi^2/6 + 1e-3", w.at_one),
    );
    let at_15 = w.scaled.iter().find(|s| s.lambda == 1.5);
    o.require(
        at_15.is_some_and(|s| s.modular.is_infinite()) && verify_witness_scaling(&id, &w),
        "witness is not certified infinite at lambda = 1.5",
    );
    o
}

fn non_open_ball() -> Outcome {
    let mut o = Outcome::new();
    let p = ExponentSpec::identity();
    let x = SequenceVec::constant(0.5);
    let ones: Element = SequenceVec::constant(1.0).into();
    let family: Vec<(u64, Element)> = (1..=40).map(|n| (n, x.prefix(n).into())).collect();
    for (n, xn) in &family {
        let d = modular(&Element::from(x.clone()).sub(xn).unwrap(), &p, &cfg()).unwrap();
        let want = 2f64.powi(-(*n as i32));
        o.require(
            d.value().is_some_and(|v| (v - want).abs() <= 1e-12 * want),
            format!("rho(x - x_{n}) = {d:?}, want {want:e}"),
        );
        let far = modular(&xn.sub(&ones).unwrap(), &p, &cfg()).unwrap();
        o.require(far.is_infinite() && far.certificate().is_some(), format!("rho(x_{n} - 1) = {far:?}"));
    }
    let opts = NormOptions::with_tol(1e-12);
    let r = classify_convergence(&family, &x.into(), &p, &DEFAULT_LAMBDA_GRID, 1e-9, &opts).unwrap();
    o.require(r.modular_converges, "modular convergence not detected");
    o.require(r.converges_at(2.0) == Some(false), "lambda = 2 convergence wrongly detected");
    o.require(!r.norm_converges, "norm convergence wrongly detected");
    o
}

/// Independent oracle for `rho(s (v - v_k))` under `p(x) = 1/x`: composite
/// Simpson on each step, steps `k+1 ..= k+400` (the rest is far below 1e-30).
fn tail_oracle(s: f64, k: u64) -> f64 {
    (k + 1..=k + 400)
        .map(|n| {
            let (a, b) = step_bounds(n);
            let c = s * step_height(n);
            let f = |x: f64| c.powf(1.0 / x);
            let m = 200;
            let h = (b - a) / m as f64;
            let inner: f64 = (1..m).map(|i| if i % 2 == 1 { 4.0 } else { 2.0 } * f(a + i as f64 * h)).sum();
            h / 3.0 * (f(a) + inner + f(b))
        })
        .sum()
}

fn reciprocal_bounds() -> Outcome {
    let mut o = Outcome::new();
    let p = ExponentSpec::reciprocal(0.0, 1.0).unwrap();
    for eps in [0.25, 0.5] {
        let v = PiecewiseFunction::harmonic_steps(1.0 - eps);
        let r = eval_fun_modular(&v, &p, &cfg()).unwrap();
        let bound = (1.0 - eps) / eps;
        o.require(r.is_finite() && r.upper_bound() < bound, format!("rho((1 - {eps}) v) = {r:?} vs {bound}"));
    }
    let eps = 0.5;
    for k in [5u64, 10, 20] {
        let d = PiecewiseFunction::harmonic_steps(eps).sub(&PiecewiseFunction::harmonic_steps_truncated(k, eps)).unwrap();
        let r = eval_fun_modular(&d, &p, &cfg()).unwrap();
        let bound = eps.powi(k as i32 + 1) / (1.0 - eps);
        let oracle = tail_oracle(eps, k);
        o.require(r.is_finite() && r.upper_bound() < bound, format!("k = {k}: {r:?} vs {bound:e}"));
        o.require(
            r.value().zip(r.abs_err()).is_some_and(|(v, e)| (v - oracle).abs() <= e + 1e-12 * oracle),
            format!("k = {k}: {r:?} misses the quadrature oracle {oracle:e} by more than its error bar"),
        );
    }
    o
}

fn suite_entry(name: &str) -> Outcome {
    let mut o = Outcome::new();
    match run_named(name, SEED, &cfg()) {
        Ok(r) => {
            for c in r.checks.iter().filter(|c| !c.passed) {
                o.require(false, format!("{}: {}", c.label, c.detail));
            }
            o.require(r.passed, "scenario did not pass");
        }
        Err(e) => o.require(false, e.to_string()),
    }
    o
}

fn norm_properties() -> Outcome {
    suite_entry("prop-norm-relations")
}

fn finite_dimensional() -> Outcome {
    let mut o = suite_entry("finite-dim-delta2");
    let r = run_counterexample("finite-dim-delta2", SEED, &cfg()).unwrap();
    o.require(r.checks.len() == 2, "unexpected check count");
    o
}

fn dirichlet_solver() -> Outcome {
    suite_entry("prop-dirichlet")
}

fn determinism() -> Outcome {
    let mut o = Outcome::new();
    let names = all_names();
    let a = run_suite(&names, 4, SEED, &cfg()).unwrap();
    let b = run_suite(&names, 4, SEED, &cfg()).unwrap();
    let c = run_suite(&names, 1, SEED, &cfg()).unwrap();
    let json = |r| serde_json::to_string(r).unwrap();
    o.require(a.passed, "full registry does not pass");
    o.require(json(&a) == json(&b), "two runs with the same seed differ");
    o.require(json(&a) == json(&c), "parallel and sequential runs differ");
    o
}

fn main() {
    let criteria: [(&str, Criterion, u64); 8] = [
        ("boundary example reproduction", boundary_example, 2),
        ("Delta2 dichotomy", delta2_dichotomy, 5),
        ("non-open-ball chain", non_open_ball, 2),
        ("L^p(.) counterexample bounds", reciprocal_bounds, 5),
        ("norm-modular property suite", norm_properties, 10),
        ("finite-dimensional Delta2", finite_dimensional, 5),
        ("Dirichlet solver", dirichlet_solver, 30),
        ("determinism of the suite", determinism, 60),
    ];
    let mut failed = 0;
    for (i, (label, run, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let mut o = run();
        let took = start.elapsed();
        o.require(took <= Duration::from_secs(*limit), format!("took {took:?}, limit {limit} s"));
        let verdict = if o.ok { "PASS" } else { "FAIL" };
        println!("criterion {}: {verdict} {label} ({:.2} s)", i + 1, took.as_secs_f64());
        for n in &o.notes {
            println!("    {n}");
        }
        failed += usize::from(!o.ok);
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
