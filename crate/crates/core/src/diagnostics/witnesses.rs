use serde::Serialize;

use super::{settles_below, Check};
use crate::error::{ModtopError, Result};
use crate::exponent::ExponentSpec;
use crate::function::PiecewiseFunction;
use crate::modular::{modular, verify_seq_certificate, DivergenceCertificate, Element, EvalConfig, ModularValue};
use crate::sequence::SequenceVec;

pub const BALL_SCENARIOS: [&str; 3] = ["seq-pn-equals-n", "seq-general-unbounded", "Lp-reciprocal"];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Approximant {
    pub index: u64,
    /// `rho(z_j - inner)`.
    pub to_inner: ModularValue,
    /// `rho(z_j - center)`.
    pub to_center: ModularValue,
}

/// A point inside `B_delta(center)` that is a modular limit of points outside the ball.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BallWitness {
    pub scenario: String,
    pub delta: f64,
    pub exponent: String,
    pub center: Element,
    pub inner_point: Element,
    /// `rho(inner - center)`, which must be `< delta`.
    pub inner_distance: ModularValue,
    pub approximants: Vec<Approximant>,
    pub checks: Vec<Check>,
}

impl BallWitness {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Reproduces one of the non-open modular ball constructions.
pub fn ball_interior_witness(scenario: &str, delta: f64, cfg: &EvalConfig) -> Result<BallWitness> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(ModtopError::InvalidArgument(format!("delta = {delta} must be > 0")));
    }
    match scenario {
        "seq-pn-equals-n" => seq_identity(delta, cfg),
        "seq-general-unbounded" => seq_general(delta, cfg),
        "Lp-reciprocal" => lp_reciprocal(delta, cfg),
        _ => Err(ModtopError::UnknownScenario(scenario.to_string())),
    }
}

fn approximants(
    family: &[(u64, Element)],
    inner: &Element,
    center: &Element,
    p: &ExponentSpec,
    cfg: &EvalConfig,
) -> Result<Vec<Approximant>> {
    family
        .iter()
        .map(|(index, z)| {
            Ok(Approximant {
                index: *index,
                to_inner: modular(&z.sub(inner)?, p, cfg)?,
                to_center: modular(&z.sub(center)?, p, cfg)?,
            })
        })
        .collect()
}

/// Checks shared by every scenario: inner point in the ball, approximants
/// converging to it, approximants outside the ball.
fn common_checks(w: &BallWitness, family: &[(u64, Element)], tol: f64, p: &ExponentSpec) -> Vec<Check> {
    let to_inner: Vec<f64> = w.approximants.iter().map(|a| a.to_inner.as_extended()).collect();
    let last = to_inner.last().copied().unwrap_or(f64::NAN);
    let outside = w.approximants.iter().all(|a| a.to_center.is_infinite() || a.to_center.lower_bound() >= w.delta);
    let certified = w.approximants.iter().zip(family).all(|(a, (_, z))| match a.to_center.certificate() {
        None => a.to_center.lower_bound() >= w.delta,
        Some(DivergenceCertificate::AnalyticComparison(rule)) => rule.verify(),
        Some(cert) => match z.sub(&w.center) {
            Ok(Element::Sequence(d)) => verify_seq_certificate(&d, p, cert),
            _ => false,
        },
    });
    vec![
        Check::new(
            "inner point lies in the ball",
            w.inner_distance.upper_bound() < w.delta,
            format!("rho(inner - center) = {} < {}", w.inner_distance.as_extended(), w.delta),
        ),
        Check::new(
            "approximants converge modularly to the inner point",
            settles_below(&to_inner, tol),
            format!("last rho(z_j - inner) = {last:e}"),
        ),
        Check::new(
            "approximants stay outside the ball",
            outside,
            "every rho(z_j - center) is infinite".to_string(),
        ),
        Check::new("divergence certificates re-verify", certified, String::new()),
    ]
}

fn seq_identity(delta: f64, cfg: &EvalConfig) -> Result<BallWitness> {
    let p = ExponentSpec::identity();
    // rho(theta 1) = theta / (1 - theta) < delta
    let theta = if delta > 1.0 { 0.5 } else { delta / (1.0 + 2.0 * delta) };
    let center: Element = SequenceVec::constant(1.0).into();
    let inner_seq = SequenceVec::constant(1.0 - theta);
    let inner: Element = inner_seq.clone().into();
    // spread 40 prefixes up to where the tail drops below 1e-9
    let j_max = (((1e-9 * theta).ln() / (1.0 - theta).ln()).ceil() as u64).max(40);
    let family: Vec<(u64, Element)> =
        (1..=40).map(|i| i * j_max / 40).map(|j| (j, inner_seq.prefix(j).into())).collect();
    let mut w = BallWitness {
        scenario: "seq-pn-equals-n".into(),
        delta,
        exponent: p.to_string(),
        inner_distance: modular(&inner.sub(&center)?, &p, cfg)?,
        approximants: approximants(&family, &inner, &center, &p, cfg)?,
        center,
        inner_point: inner,
        checks: Vec::new(),
    };
    w.checks = common_checks(&w, &family, 1e-6, &p);
    let exact = w.approximants.iter().all(|a| {
        let want = (1.0 - theta).powi(a.index as i32 + 1) / theta;
        a.to_inner.value().is_some_and(|v| (v - want).abs() <= 1e-12 * want)
    });
    w.checks.push(Check::new(
        "rho(z_j - inner) matches the geometric tail",
        exact,
        format!("(1 - theta)^(j+1) / theta with theta = {theta}"),
    ));
    Ok(w)
}

/// `n_k` for `p_n = 2 sqrt(n)`: the least strictly increasing indices with `p_{n_k} >= k`.
fn selected_index(k: u64) -> u64 {
    if k <= 2 {
        k
    } else {
        (k * k).div_ceil(4)
    }
}

/// The exponent `q_k = p_{n_k}` on the selected coordinates. Sequences
/// supported on `{n_k}` are isometric to `l^(q_k)`, so the construction is
/// carried out in those compressed coordinates.
pub fn compressed_two_sqrt() -> ExponentSpec {
    ExponentSpec::custom(
        "two-sqrt-selected",
        |t| 2.0 * (selected_index(t.round().max(1.0) as u64) as f64).sqrt(),
        true,
        true,
    )
}

fn seq_general(delta: f64, cfg: &EvalConfig) -> Result<BallWitness> {
    let q = compressed_two_sqrt();
    let base = ExponentSpec::named_custom("two-sqrt")?;
    let eps = 0.5f64.min(delta / (1.0 + 2.0 * delta));
    let s = SequenceVec::constant(1.0);
    let center: Element = s.clone().into();
    let inner_seq = s.scale(1.0 - eps);
    let inner: Element = inner_seq.clone().into();
    let family: Vec<(u64, Element)> = (1..=30).map(|j| (j, inner_seq.prefix(j).into())).collect();
    let mut w = BallWitness {
        scenario: "seq-general-unbounded".into(),
        delta,
        exponent: base.to_string(),
        inner_distance: modular(&inner.sub(&center)?, &q, cfg)?,
        approximants: approximants(&family, &inner, &center, &q, cfg)?,
        center,
        inner_point: inner,
        checks: Vec::new(),
    };
    w.checks = common_checks(&w, &family, 1e-3, &q);
    let selection_ok = (1..=200u64).all(|k| {
        let (n, prev) = (selected_index(k), if k == 1 { 0 } else { selected_index(k - 1) });
        let pk = base.seq_value(n);
        n > prev && pk >= k as f64 && pk >= base.seq_value(prev.max(1))
    });
    w.checks.push(Check::new(
        "selected indices satisfy p_{n_k} >= max(k, p_{n_{k-1}})",
        selection_ok,
        "k = 1..200".to_string(),
    ));
    let half = modular(&w.center.scale(0.5), &q, cfg)?;
    w.checks.push(Check::new(
        "rho(s / 2) <= sum 2^-k = 1",
        half.upper_bound() <= 1.0,
        format!("rho(s / 2) = {}", half.as_extended()),
    ));
    Ok(w)
}

fn lp_reciprocal(delta: f64, cfg: &EvalConfig) -> Result<BallWitness> {
    let p = ExponentSpec::reciprocal(0.0, 1.0)?;
    // rho((1 - eps) v) < (1 - eps) / eps <= delta
    let eps = 0.5f64.max(1.0 / (1.0 + delta));
    let v = PiecewiseFunction::harmonic_steps(1.0);
    let center: Element = v.clone().into();
    let inner: Element = v.scale(eps).into();
    let family: Vec<(u64, Element)> =
        (5..=20).map(|k| (k, PiecewiseFunction::harmonic_steps_truncated(k, eps).into())).collect();
    let mut w = BallWitness {
        scenario: "Lp-reciprocal".into(),
        delta,
        exponent: p.to_string(),
        inner_distance: modular(&inner.sub(&center)?, &p, cfg)?,
        approximants: approximants(&family, &inner, &center, &p, cfg)?,
        center,
        inner_point: inner,
        checks: Vec::new(),
    };
    w.checks = common_checks(&w, &family, 1e-5, &p);
    let bounds = w.approximants.iter().all(|a| {
        let bound = eps.powi(a.index as i32 + 1) / (1.0 - eps);
        a.to_inner.upper_bound() < bound
    });
    w.checks.push(Check::new(
        "rho(eps (v - v_k)) < eps^(k+1) / (1 - eps)",
        bounds,
        format!("eps = {eps}, k = 5..20"),
    ));
    Ok(w)
}
