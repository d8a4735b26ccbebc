use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::settles_below;
use crate::error::{ModtopError, Result};
use crate::exponent::{ExponentKind, ExponentSpec};
use crate::modular::{eval_seq_modular, modular, Element, EvalConfig, ModularValue};
use crate::sequence::SequenceVec;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilyTrend {
    /// `rho(x_j)` along the family (`inf` never occurs for a null family).
    pub modulars: Vec<f64>,
    pub modular_null: bool,
    /// `|Lambda(x_j)|` along the family.
    pub values: Vec<f64>,
    pub tends_to_zero: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DualityReport {
    pub families: Vec<FamilyTrend>,
    pub samples: usize,
    /// `|x_M| <= rho(x)^{1/p_M}` at every sampled point and coordinate.
    pub coordinate_bound_holds: bool,
    pub sampled_sup: f64,
    /// `sum |c_j|`, which bounds `|Lambda|` on `{rho <= 1}`.
    pub bound: f64,
    pub bounded_on_unit_ball: bool,
    /// Null families along which `Lambda` fails to vanish (none expected).
    pub failures: usize,
}

impl DualityReport {
    pub fn passed(&self) -> bool {
        self.coordinate_bound_holds && self.bounded_on_unit_ball && self.failures == 0
    }
}

fn apply(coeffs: &[(u64, f64)], x: &SequenceVec) -> f64 {
    coeffs.iter().map(|&(j, c)| c * x.value_at(j)).sum()
}

/// Probes the finite-support functional `Lambda(x) = sum c_j x_j` against
/// modularly null families and against `samples` seeded points of `{rho <= 1}`
/// drawn on the first `max(8, support)` coordinates (or the table dimension).
pub fn functional_probe(
    coeffs: &SequenceVec,
    families: &[Vec<SequenceVec>],
    p: &ExponentSpec,
    tol: f64,
    samples: usize,
    seed: u64,
    cfg: &EvalConfig,
) -> Result<DualityReport> {
    let Some(support) = coeffs.support_end() else {
        return Err(ModtopError::InvalidArgument("functional coefficients must have finite support".into()));
    };
    let terms: Vec<(u64, f64)> = (1..=support).map(|j| (j, coeffs.value_at(j))).filter(|t| t.1 != 0.0).collect();
    let bound: f64 = terms.iter().map(|t| t.1.abs()).sum();

    let mut families_out = Vec::with_capacity(families.len());
    let mut failures = 0;
    for fam in families {
        let mut modulars = Vec::with_capacity(fam.len());
        for x in fam {
            modulars.push(match eval_seq_modular(x, p, cfg)? {
                ModularValue::Indeterminate { .. } => f64::NAN,
                v => v.as_extended(),
            });
        }
        let values: Vec<f64> = fam.iter().map(|x| apply(&terms, x).abs()).collect();
        let modular_null = settles_below(&modulars, tol);
        let tends_to_zero = settles_below(&values, tol.max(f64::MIN_POSITIVE));
        if modular_null && !tends_to_zero {
            failures += 1;
        }
        families_out.push(FamilyTrend { modulars, modular_null, values, tends_to_zero });
    }

    let dim = match p.kind() {
        ExponentKind::Table(v) => v.len() as u64,
        _ => support.max(8),
    };
    if let Some(d) = p.dimension() {
        if support > d as u64 {
            return Err(ModtopError::DimensionExceeded { index: support, dim: d });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coordinate_bound_holds = true;
    let mut sampled_sup = 0.0f64;
    for _ in 0..samples {
        let raw: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let y = SequenceVec::from_values(&raw)?;
        let ry = eval_seq_modular(&y, p, cfg)?.upper_bound();
        // rho(t y) <= t rho(y) for t <= 1, so this lands in {rho <= 1}
        let t: f64 = rng.gen_range(0.0..=1.0) / ry.max(1.0);
        let x = y.scale(t);
        let rx = modular(&Element::Sequence(x.clone()), p, cfg)?.upper_bound();
        if rx > 1.0 + tol {
            return Err(ModtopError::InvalidArgument(format!("sampled point left the unit ball: rho = {rx}")));
        }
        for m in 1..=dim {
            let pm = p.seq_value(m);
            if x.value_at(m).abs() > rx.powf(1.0 / pm) + tol {
                coordinate_bound_holds = false;
            }
        }
        sampled_sup = sampled_sup.max(apply(&terms, &x).abs());
    }
    Ok(DualityReport {
        families: families_out,
        samples,
        coordinate_bound_holds,
        sampled_sup,
        bound,
        bounded_on_unit_ball: sampled_sup <= bound + tol,
        failures,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum LinfVerdict {
    /// `sum lambda^{p_n} < inf`, so `l^(p_n)` equals `l^inf` as sets.
    Isomorphic { lambda: f64, sum: f64, abs_err: f64 },
    NotIsomorphic { reason: String },
    Inconclusive { reason: String },
}

/// Searches `lambda = 2^-k`, `k = 1..60`, for a certified finite
/// `rho(lambda 1) = sum lambda^{p_n}`.
pub fn check_linf_isomorphism(p: &ExponentSpec, cfg: &EvalConfig) -> Result<LinfVerdict> {
    if !p.is_sequence_exponent() {
        return Err(ModtopError::DomainMismatch(format!("exponent '{p}' does not index sequences")));
    }
    if p.dimension().is_some() {
        return Err(ModtopError::InvalidArgument("l^inf comparison needs an infinite-dimensional exponent".into()));
    }
    if let Some(sup) = p.known_sup() {
        return Ok(LinfVerdict::NotIsomorphic {
            reason: format!("p is bounded by {sup}, so sum lambda^p_n diverges for every lambda > 0"),
        });
    }
    let mut undecided = 0;
    for k in 1..=60 {
        let lambda = 2f64.powi(-k);
        match eval_seq_modular(&SequenceVec::constant(lambda), p, cfg)? {
            ModularValue::Finite { value, abs_err } => {
                return Ok(LinfVerdict::Isomorphic { lambda, sum: value, abs_err })
            }
            ModularValue::Infinite(_) => {}
            ModularValue::Indeterminate { .. } => undecided += 1,
        }
    }
    Ok(LinfVerdict::Inconclusive {
        reason: format!("no certified convergence for lambda = 2^-1 .. 2^-60 ({undecided} indeterminate)"),
    })
}
