use std::collections::BTreeMap;

use serde::Serialize;

use super::settles_below;
use crate::error::{ModtopError, Result};
use crate::exponent::ExponentSpec;
use crate::luxemburg::{norm_probe, NormOptions};
use crate::modular::{eval_seq_modular, modular, serialize_extended, Element, EvalConfig, ModularValue};
use crate::sequence::SequenceVec;

/// Scales straddling 1 symmetrically in log scale.
pub const DEFAULT_LAMBDA_GRID: [f64; 5] = [0.25, 0.5, 1.0, 2.0, 4.0];

fn ser_extended_vec<S: serde::Serializer>(v: &[f64], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for x in v {
        if x.is_infinite() {
            seq.serialize_element("inf")?;
        } else {
            seq.serialize_element(x)?;
        }
    }
    seq.end()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateRow {
    pub index: u64,
    /// `rho(x_j - x)`.
    #[serde(serialize_with = "serialize_extended")]
    pub rho_distance: f64,
    /// `rho(lambda (x_j - x))` for each grid scale, in grid order.
    #[serde(serialize_with = "ser_extended_vec")]
    pub scaled: Vec<f64>,
    #[serde(serialize_with = "serialize_extended")]
    pub norm_distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub modular_converges: bool,
    pub lambdas: Vec<f64>,
    /// Keys are the grid scales formatted with `{}`.
    pub per_lambda: BTreeMap<String, bool>,
    pub norm_converges: bool,
    /// Norm threshold used: `tol / max(1, max lambda)`.
    pub norm_tol: f64,
    pub rows: Vec<RateRow>,
    /// Indeterminate modulars seen while classifying (each one makes its flag false).
    pub undecided: usize,
}

impl ConvergenceReport {
    pub fn converges_at(&self, lambda: f64) -> Option<bool> {
        self.per_lambda.get(&format!("{lambda}")).copied()
    }

    /// `(index, rho-distance)` pairs.
    pub fn rates(&self) -> Vec<(u64, f64)> {
        self.rows.iter().map(|r| (r.index, r.rho_distance)).collect()
    }
}

/// Classifies modular, scaled-modular and norm convergence of the indexed
/// family `(j, x_j)` toward `limit`.
///
/// Indeterminate modulars count as "not converged". Norm convergence uses the
/// threshold `tol / max(1, max lambda)` so that it implies every scaled flag:
/// `||y|| <= t <= 1 / lambda` gives `rho(lambda y) <= lambda ||y||`.
pub fn classify_convergence(
    family: &[(u64, Element)],
    limit: &Element,
    p: &ExponentSpec,
    lambdas: &[f64],
    tol: f64,
    opts: &NormOptions,
) -> Result<ConvergenceReport> {
    if family.is_empty() {
        return Err(ModtopError::EmptySet);
    }
    if lambdas.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
        return Err(ModtopError::InvalidArgument("lambda grid must be positive and finite".into()));
    }
    let cfg = &opts.eval;
    let mut undecided = 0usize;
    let mut extended = |v: ModularValue| -> f64 {
        if v.is_indeterminate() {
            undecided += 1;
            f64::NAN
        } else {
            v.as_extended()
        }
    };
    let mut rows = Vec::with_capacity(family.len());
    for (index, x) in family {
        let diff = x.sub(limit)?;
        let rho_distance = extended(modular(&diff, p, cfg)?);
        let mut scaled = Vec::with_capacity(lambdas.len());
        for &l in lambdas {
            scaled.push(if l == 1.0 { rho_distance } else { extended(modular(&diff.scale(l), p, cfg)?) });
        }
        let norm_distance = norm_probe(&diff, p, opts)?.value;
        rows.push(RateRow { index: *index, rho_distance, scaled, norm_distance });
    }
    // NaN (indeterminate) never satisfies `< tol`, and breaks monotonicity
    let column = |f: &dyn Fn(&RateRow) -> f64| rows.iter().map(f).collect::<Vec<_>>();
    let modular_converges = settles_below(&column(&|r| r.rho_distance), tol);
    let per_lambda = lambdas
        .iter()
        .enumerate()
        .map(|(i, l)| (format!("{l}"), settles_below(&column(&|r| r.scaled[i]), tol)))
        .collect();
    let norm_tol = tol / lambdas.iter().cloned().fold(1.0, f64::max);
    let norm_converges = settles_below(&column(&|r| r.norm_distance), norm_tol);
    Ok(ConvergenceReport {
        modular_converges,
        lambdas: lambdas.to_vec(),
        per_lambda,
        norm_converges,
        norm_tol,
        rows,
        undecided,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Truncation {
    pub n: u64,
    pub distance: f64,
    /// Probed `(N, rho(x - prefix_N(x)))`, sorted by `N`.
    pub trace: Vec<(u64, f64)>,
}

impl Truncation {
    pub fn trace_is_monotone(&self) -> bool {
        self.trace.windows(2).all(|w| w[1].1 <= w[0].1)
    }
}

/// Minimal `N` with `rho(x - prefix_N(x)) < tol`, found by doubling and then
/// bisection (the distance is nonincreasing in `N`).
pub fn truncation_density_check(x: &SequenceVec, p: &ExponentSpec, tol: f64, cfg: &EvalConfig) -> Result<Truncation> {
    if !(tol > 0.0) {
        return Err(ModtopError::InvalidArgument(format!("tol = {tol} must be > 0")));
    }
    if !eval_seq_modular(x, p, cfg)?.is_finite() {
        return Err(ModtopError::NotFiniteModular);
    }
    let mut trace: BTreeMap<u64, f64> = BTreeMap::new();
    let mut dist = |n: u64| -> Result<f64> {
        if let Some(&d) = trace.get(&n) {
            return Ok(d);
        }
        let d = match eval_seq_modular(&x.sub(&x.prefix(n)), p, cfg)? {
            ModularValue::Finite { value, .. } => value,
            _ => return Err(ModtopError::NotFiniteModular),
        };
        trace.insert(n, d);
        Ok(d)
    };
    let cap = x.support_end();
    let (mut lo, mut hi) = (0u64, 1u64);
    if dist(0)? < tol {
        hi = 0;
    } else {
        loop {
            if let Some(end) = cap {
                hi = hi.min(end);
            }
            if dist(hi)? < tol {
                break;
            }
            if cap == Some(hi) || hi >= 1 << 62 {
                return Err(ModtopError::InvalidArgument(format!(
                    "no truncation below tol = {tol} up to N = {hi}"
                )));
            }
            lo = hi;
            hi *= 2;
        }
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if dist(mid)? < tol {
                hi = mid;
            } else {
                lo = mid;
            }
        }
    }
    let distance = dist(hi)?;
    Ok(Truncation { n: hi, distance, trace: trace.into_iter().collect() })
}
