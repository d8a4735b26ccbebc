use serde::Serialize;

use crate::error::{ModtopError, Result};
use crate::exponent::{ExponentKind, ExponentSpec};
use crate::function::PiecewiseFunction;
use crate::modular::{modular, serialize_extended, DivergenceCertificate, Element, EvalConfig, ModularValue};
use crate::sequence::SequenceVec;

/// Indices probed for custom exponents without a growth declaration.
pub const DEFAULT_PROBE_WINDOW: u64 = 1_000_000;
/// Largest index the witness search will visit.
pub const WITNESS_INDEX_CAP: u64 = 10_000_000;
/// Scales at which a witness must have infinite modular.
pub const WITNESS_SCALES: [f64; 3] = [1.1, 1.5, 2.0];
const WITNESS_COUNT: usize = 50;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScaledVerdict {
    pub lambda: f64,
    pub modular: ModularValue,
}

/// An element with finite modular whose scalings blow up.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Delta2Witness {
    /// For sequences, the first `K` selected coordinates; the full witness
    /// continues the same selection rule forever.
    pub element: Element,
    /// Selected indices `n_1 < n_2 < ...` (sequence witnesses only).
    pub indices: Vec<u64>,
    pub at_one: ModularValue,
    /// `sum_{k <= K} 1/k^2`, the bound `rho(witness)` must respect.
    pub finite_bound: f64,
    pub scaled: Vec<ScaledVerdict>,
}

impl Delta2Witness {
    /// Finite at scale 1 (within `tol` of the bound) and infinite at every probed scale.
    pub fn holds(&self, tol: f64) -> bool {
        self.at_one.is_finite()
            && self.at_one.upper_bound() <= self.finite_bound + tol
            && self.scaled.iter().all(|s| s.modular.is_infinite())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Delta2Verdict {
    pub bounded: bool,
    #[serde(serialize_with = "serialize_extended")]
    pub p_sup: f64,
    pub witness: Option<Delta2Witness>,
    /// Set when `p` is unbounded but the witness indices pass the search cap.
    pub inconclusive: Option<String>,
}

fn bounded(p_sup: f64) -> Delta2Verdict {
    Delta2Verdict { bounded: true, p_sup, witness: None, inconclusive: None }
}

fn unbounded(witness: Result<Delta2Witness>) -> Result<Delta2Verdict> {
    let mut v = Delta2Verdict { bounded: false, p_sup: f64::INFINITY, witness: None, inconclusive: None };
    match witness {
        Ok(w) => v.witness = Some(w),
        Err(e @ ModtopError::WitnessSearchExhausted { .. }) => v.inconclusive = Some(e.to_string()),
        Err(e) => return Err(e),
    }
    Ok(v)
}

/// Decides whether `p` is bounded (equivalently, whether the modular is Delta2).
///
/// Custom exponents that are not declared unbounded are sampled on
/// `1..=probe_window`: if the second half never exceeds the first, the
/// sampled maximum is reported as the supremum.
pub fn check_delta2(p: &ExponentSpec, probe_window: u64, cfg: &EvalConfig) -> Result<Delta2Verdict> {
    if let Some(sup) = p.known_sup() {
        return Ok(bounded(sup));
    }
    match p.kind() {
        ExponentKind::Reciprocal { hi, .. } => unbounded(reciprocal_witness(*hi, p, cfg)),
        ExponentKind::Affine { .. } => unbounded(delta2_failure_witness(p, WITNESS_COUNT, cfg)),
        ExponentKind::Custom(_) if p.is_declared_unbounded() => unbounded(delta2_failure_witness(p, WITNESS_COUNT, cfg)),
        ExponentKind::Custom(c) => {
            let w = probe_window.max(2);
            let (mut head, mut tail) = (f64::MIN, f64::MIN);
            for n in 1..=w {
                let v = p.seq_value(n);
                if !(v.is_finite() && v >= 1.0) {
                    return Err(ModtopError::InvalidExponent(format!("p_{n} = {v} is not >= 1")));
                }
                if n <= w / 2 {
                    head = head.max(v);
                } else {
                    tail = tail.max(v);
                }
            }
            if tail <= head {
                Ok(bounded(head))
            } else {
                // still growing in the second half of the window
                Err(ModtopError::UndeclaredGrowth(c.name().to_string()))
            }
        }
        _ => unreachable!("kinds with a known supremum return early"),
    }
}

/// `u = 1` on `(0, hi)` under `p(x) = 1/x`: `rho(u) = hi`, `rho(lambda u) = inf` for `lambda > 1`.
fn reciprocal_witness(hi: f64, p: &ExponentSpec, cfg: &EvalConfig) -> Result<Delta2Witness> {
    let u: Element = PiecewiseFunction::constant(0.0, hi, 1.0)?.into();
    let at_one = modular(&u, p, cfg)?;
    let scaled = WITNESS_SCALES
        .iter()
        .map(|&lambda| Ok(ScaledVerdict { lambda, modular: modular(&u.scale(lambda), p, cfg)? }))
        .collect::<Result<Vec<_>>>()?;
    Ok(Delta2Witness { element: u, indices: Vec::new(), at_one, finite_bound: hi, scaled })
}

fn is_unbounded_sequence_exponent(p: &ExponentSpec) -> bool {
    match p.kind() {
        ExponentKind::Affine { slope, .. } => *slope > 0.0,
        ExponentKind::Custom(_) => p.is_declared_unbounded(),
        _ => false,
    }
}

/// Minimal `n > after` with `p_n > bound`.
fn next_index_above(p: &ExponentSpec, after: u64, bound: f64) -> Result<u64> {
    if let ExponentKind::Affine { slope, intercept } = p.kind() {
        // slope n + intercept > bound; step forward from the closed-form guess
        let guess = ((bound - intercept) / slope).floor().max(0.0) as u64;
        let mut n = guess.saturating_sub(1).max(after + 1);
        while p.seq_value(n) <= bound {
            n += 1;
        }
        return if n > WITNESS_INDEX_CAP { Err(ModtopError::WitnessSearchExhausted { cap: WITNESS_INDEX_CAP }) } else { Ok(n) };
    }
    let mut n = after + 1;
    while n <= WITNESS_INDEX_CAP {
        if p.seq_value(n) > bound {
            return Ok(n);
        }
        n += 1;
    }
    Err(ModtopError::WitnessSearchExhausted { cap: WITNESS_INDEX_CAP })
}

/// Builds the Delta2 failure witness `a_{n_k} = p_{n_k}^{-1/p_{n_k}}` with
/// `n_k` the minimal increasing indices such that `p_{n_k} > k^2`.
///
/// `rho(a) = sum 1/p_{n_k} <= sum 1/k^2`, while `rho(lambda a) = sum lambda^{p_{n_k}} / p_{n_k}`
/// diverges for every `lambda > 1`. The scaled verdicts carry a term bound over
/// `k`: for `k >= k0 = ceil(1/sqrt(ln lambda))` each term is at least
/// `lambda^{k0^2} / k0^2`, since `t -> lambda^t / t` increases for `t >= 1/ln lambda`.
pub fn delta2_failure_witness(p: &ExponentSpec, count: usize, cfg: &EvalConfig) -> Result<Delta2Witness> {
    if count < 10 {
        return Err(ModtopError::InvalidArgument(format!("witness needs at least 10 coordinates, got {count}")));
    }
    if !p.is_sequence_exponent() {
        return Err(ModtopError::DomainMismatch(format!("exponent '{p}' does not index sequences")));
    }
    if !is_unbounded_sequence_exponent(p) {
        return Err(ModtopError::NotUnbounded);
    }
    let mut indices = Vec::with_capacity(count);
    let mut entries = Vec::with_capacity(count);
    let mut prev = 0u64;
    for k in 1..=count {
        let n = next_index_above(p, prev, (k * k) as f64)?;
        let pn = p.seq_value(n);
        indices.push(n);
        entries.push((n, pn.powf(-1.0 / pn)));
        prev = n;
    }
    let x = SequenceVec::from_sparse(&entries)?;
    let at_one = modular(&Element::Sequence(x.clone()), p, cfg)?;
    let finite_bound = (1..=count).map(|k| 1.0 / (k * k) as f64).sum();
    let scaled = WITNESS_SCALES
        .iter()
        .map(|&lambda| ScaledVerdict { lambda, modular: scaled_witness_verdict(lambda, count as u64) })
        .collect();
    Ok(Delta2Witness { element: x.into(), indices, at_one, finite_bound, scaled })
}

fn scaled_witness_verdict(lambda: f64, count: u64) -> ModularValue {
    let ll = lambda.ln();
    let k0 = ((1.0 / ll).sqrt().ceil() as u64).max(1);
    let t0 = (k0 * k0) as f64;
    let delta = (t0 * ll - t0.ln()).exp();
    ModularValue::Infinite(DivergenceCertificate::TermsBounded {
        first: k0,
        last: count.max(k0),
        delta,
        nondecreasing: true,
    })
}

/// Re-checks a scaled witness certificate against the selected exponents
/// `p_{n_k}` (in log form, with a small relative slack).
pub fn verify_witness_scaling(p: &ExponentSpec, witness: &Delta2Witness) -> bool {
    witness.scaled.iter().all(|s| {
        let Some(DivergenceCertificate::TermsBounded { first, last, delta, .. }) = s.modular.certificate() else {
            return false;
        };
        let ll = s.lambda.ln();
        let floor = (*first * *first) as f64;
        if !(ll > 0.0 && floor * ll >= 1.0 && *delta > 0.0) {
            return false;
        }
        (*first..=*last).all(|k| {
            let Some(&n) = witness.indices.get(k as usize - 1) else { return false };
            let pk = p.seq_value(n);
            pk > (k * k) as f64 && pk * ll - pk.ln() >= delta.ln() - 1e-12 * delta.ln().abs().max(1.0)
        })
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum RightContinuity {
    RightContinuousAt { limit: f64 },
    NotRightContinuousAt { base: f64, gap: f64 },
    Inconclusive { reason: String },
}

/// Probes `lambda -> rho(lambda x)` from the right at 1 along `lambdas`
/// (default `1 + 2^-i`, `i = 1..20`).
pub fn right_continuity_probe(
    x: &Element,
    p: &ExponentSpec,
    lambdas: Option<&[f64]>,
    tol: f64,
    gap: f64,
    cfg: &EvalConfig,
) -> Result<RightContinuity> {
    let default: Vec<f64> = (1..=20).map(|i| 1.0 + 2f64.powi(-i)).collect();
    let lambdas = lambdas.unwrap_or(&default);
    if lambdas.is_empty() || lambdas.iter().any(|&l| !(l > 1.0)) || lambdas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(ModtopError::InvalidArgument("lambda sequence must be strictly decreasing and > 1".into()));
    }
    let base = match modular(x, p, cfg)? {
        ModularValue::Finite { value, .. } => value,
        ModularValue::Infinite(_) => return Err(ModtopError::NotFiniteModular),
        ModularValue::Indeterminate { reason, .. } => return Ok(RightContinuity::Inconclusive { reason }),
    };
    if x.is_zero() {
        return Ok(RightContinuity::RightContinuousAt { limit: 0.0 });
    }
    let mut values = Vec::with_capacity(lambdas.len());
    for &l in lambdas {
        match modular(&x.scale(l), p, cfg)? {
            ModularValue::Indeterminate { reason, .. } => {
                return Ok(RightContinuity::Inconclusive { reason: format!("at lambda = {l}: {reason}") })
            }
            v => values.push(v.as_extended()),
        }
    }
    if values.iter().all(|&v| v > base + gap) {
        return Ok(RightContinuity::NotRightContinuousAt { base, gap });
    }
    let last = *values.last().unwrap();
    let trailing = &values[values.len() / 2..];
    if (last - base).abs() <= tol * base.max(1.0) && trailing.windows(2).all(|w| w[1] <= w[0]) {
        return Ok(RightContinuity::RightContinuousAt { limit: last });
    }
    Ok(RightContinuity::Inconclusive { reason: format!("last probe {last} vs base {base}") })
}
