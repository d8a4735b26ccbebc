//! `rho_{p(.)}(u) = int |u(x)|^{p(x)} dx` for piecewise-constant `u`.

use super::quadrature::{integrate, integrate_graded_at_zero, CellBudget, QuadOutcome};
use super::value::{Accumulator, AnalyticRule, DivergenceCertificate, ModularValue};
use super::EvalConfig;
use crate::error::{ModtopError, Result};
use crate::exponent::{ExponentKind, ExponentSpec};
use crate::function::{step_bounds, step_height, HarmonicSteps, Piece, PiecewiseFunction};

/// Steps summed before a catalog tail must be bounded analytically.
const MAX_CATALOG_STEPS: u64 = 1_000_000;

impl AnalyticRule {
    /// Checks the rule's numeric premises.
    pub fn verify(&self) -> bool {
        match self {
            AnalyticRule::ReciprocalBlowup { theta, x0, t_star } => {
                reciprocal_premises(*theta, *t_star) && *x0 > 0.0 && *x0 <= 1.0 / t_star * (1.0 + 1e-15)
            }
            AnalyticRule::HarmonicStepsLowerBound { scale, first } => {
                // (|s| n^{1/n})^n / (n(n+1)) >= 1/(n+1) whenever |s| >= 1
                scale.abs() >= 1.0 && *first >= 1
            }
        }
    }
}

/// `g(t) = theta^t - t > 1/2` and `g'(t) = theta^t ln theta - 1 >= 0`; with `g`
/// convex this gives `theta^t > 1/2 + t` for every `t >= t_star`.
fn reciprocal_premises(theta: f64, t: f64) -> bool {
    let lt = theta.ln();
    if !(lt > 0.0) {
        return false;
    }
    let log_pow = t * lt;
    if log_pow > 700.0 {
        return true;
    }
    let pow = log_pow.exp();
    pow - t > 0.5 && pow * lt >= 1.0
}

fn reciprocal_blowup(theta: f64, hi: f64) -> ModularValue {
    let mut t = 1.0;
    while !reciprocal_premises(theta, t) {
        t *= 2.0;
    }
    ModularValue::Infinite(DivergenceCertificate::AnalyticComparison(AnalyticRule::ReciprocalBlowup {
        theta,
        x0: (1.0 / t).min(hi),
        t_star: t,
    }))
}

fn quad_to_value(o: QuadOutcome, what: &str) -> ModularValue {
    match o {
        QuadOutcome::Converged { value, abs_err } => ModularValue::finite(value.max(0.0), abs_err),
        QuadOutcome::Overflow { x, log_value } => ModularValue::Infinite(DivergenceCertificate::OverflowCap {
            location: x,
            log_term: log_value,
            cap: f64::NAN,
        }),
        QuadOutcome::BudgetExceeded { partial } => ModularValue::Indeterminate {
            lower_bound: partial.max(0.0),
            reason: format!("quadrature cell budget exceeded on {what}"),
        },
    }
}

fn with_cap(v: ModularValue, cap: f64) -> ModularValue {
    match v {
        ModularValue::Infinite(DivergenceCertificate::OverflowCap { location, log_term, .. }) => {
            ModularValue::Infinite(DivergenceCertificate::OverflowCap { location, log_term, cap })
        }
        other => other,
    }
}

fn check_exponent_at(p: &ExponentSpec, x: f64) -> Result<()> {
    let v = p.fun_value(x);
    if v.is_finite() && v >= 1.0 {
        Ok(())
    } else {
        Err(ModtopError::InvalidExponent(format!("p({x}) = {v} is not >= 1")))
    }
}

fn piece_integral(piece: &Piece, p: &ExponentSpec, tol: f64, cfg: &EvalConfig, budget: &mut CellBudget) -> Result<ModularValue> {
    let a = piece.value.abs();
    let width = piece.hi - piece.lo;
    if a == 0.0 {
        return Ok(ModularValue::zero());
    }
    if a == 1.0 {
        return Ok(ModularValue::finite(width, 0.0));
    }
    let la = a.ln();
    let cap = cfg.overflow_cap;
    let v = match p.kind() {
        ExponentKind::PiecewiseConst { breakpoints, values } => {
            let mut acc = Accumulator::default();
            for (i, &pv) in values.iter().enumerate() {
                let lo = breakpoints[i].max(piece.lo);
                let hi = breakpoints[i + 1].min(piece.hi);
                if hi <= lo {
                    continue;
                }
                let log_term = pv * la;
                if log_term > cap {
                    return Ok(ModularValue::Infinite(DivergenceCertificate::OverflowCap {
                        location: lo,
                        log_term,
                        cap,
                    }));
                }
                acc.add((hi - lo) * log_term.exp(), 0.0);
            }
            ModularValue::finite(acc.sum, acc.err)
        }
        ExponentKind::Reciprocal { .. } => {
            if piece.lo == 0.0 {
                if a > 1.0 {
                    return Ok(reciprocal_blowup(a, piece.hi));
                }
                // On (0, w): |u|^{1/x} <= |u|^{1/w}.
                quad_to_value(
                    integrate_graded_at_zero(|x| la / x, piece.hi, tol, cap, budget, |w| w * (la / w).exp()),
                    "a graded cell near 0",
                )
            } else {
                quad_to_value(integrate(|x| la / x, piece.lo, piece.hi, tol, cap, budget), "a 1/x cell")
            }
        }
        ExponentKind::Affine { .. } | ExponentKind::Custom(_) => {
            for x in [piece.lo, 0.5 * (piece.lo + piece.hi), piece.hi] {
                check_exponent_at(p, x)?;
            }
            quad_to_value(
                integrate(|x| p.fun_value(x) * la, piece.lo, piece.hi, tol, cap, budget),
                "a smooth-exponent cell",
            )
        }
        ExponentKind::Table(_) => unreachable!("tables are rejected before integration"),
    };
    Ok(with_cap(v, cap))
}

/// `int_0^{1/first} |s n^{1/n}|^{1/x}` summed over the catalog steps.
fn catalog_integral(cat: HarmonicSteps, tol: f64, cfg: &EvalConfig, budget: &mut CellBudget) -> ModularValue {
    let s = cat.scale.abs();
    if s == 0.0 {
        return ModularValue::zero();
    }
    if s >= 1.0 {
        return ModularValue::Infinite(DivergenceCertificate::AnalyticComparison(
            AnalyticRule::HarmonicStepsLowerBound { scale: cat.scale, first: cat.first },
        ));
    }
    let ls = s.ln();
    let cap = cfg.overflow_cap;
    // Once n >= 3 and s n^{1/n} < 1 (n^{1/n} decreases from n = 3 on), the n-th
    // step integral is at most s^n / (n + 1), so the tail from N is at most
    // s^N / ((N + 1)(1 - s)).
    let tail_bound = |n: u64| -> Option<f64> {
        if n >= 3 && s * step_height(n) < 1.0 {
            let nf = n as f64;
            Some((nf * ls).exp() / ((nf + 1.0) * (1.0 - s)))
        } else {
            None
        }
    };
    let mut acc = Accumulator::default();
    let mut n = cat.first;
    let step_tol = 0.5 * tol;
    loop {
        if let Some(t) = tail_bound(n) {
            if t < 0.5 * tol {
                acc.add(0.5 * t, 0.5 * t);
                return ModularValue::finite(acc.sum, acc.err);
            }
        }
        if n - cat.first >= MAX_CATALOG_STEPS {
            return ModularValue::Indeterminate {
                lower_bound: acc.sum,
                reason: format!("catalog tail not below tolerance after {MAX_CATALOG_STEPS} steps"),
            };
        }
        let (lo, hi) = step_bounds(n);
        let l = ls + (n as f64).ln() / n as f64;
        // Shares 1/(k(k+1)) telescope to at most step_tol.
        let k = (n - cat.first + 1) as f64;
        let share = step_tol / (k * (k + 1.0));
        match quad_to_value(integrate(|x| l / x, lo, hi, share, cap, budget), "a catalog step") {
            ModularValue::Finite { value, abs_err } => acc.add(value, abs_err),
            ModularValue::Infinite(c) => return with_cap(ModularValue::Infinite(c), cap),
            ModularValue::Indeterminate { lower_bound, reason } => {
                return ModularValue::Indeterminate { lower_bound: acc.sum + lower_bound, reason };
            }
        }
        n += 1;
    }
}

/// Evaluates `rho_{p(.)}(u)`.
pub fn eval_fun_modular(u: &PiecewiseFunction, p: &ExponentSpec, cfg: &EvalConfig) -> Result<ModularValue> {
    if !p.is_function_exponent() {
        return Err(ModtopError::DomainMismatch(format!("exponent '{p}' is not a function exponent")));
    }
    if let Some(d) = p.function_domain() {
        if d != u.domain() {
            return Err(ModtopError::DomainMismatch(format!(
                "function on ({}, {}) vs exponent on ({}, {})",
                u.domain().0,
                u.domain().1,
                d.0,
                d.1
            )));
        }
    }
    if u.catalog().is_some() && !matches!(p.kind(), ExponentKind::Reciprocal { lo, .. } if *lo == 0.0) {
        return Err(ModtopError::Unsupported("catalog steps are only evaluated against p(x) = 1/x on (0, b)".into()));
    }
    let parts = u.pieces().iter().filter(|q| q.value != 0.0).count() + usize::from(u.catalog().is_some());
    if parts == 0 {
        return Ok(ModularValue::zero());
    }
    let tol = cfg.quad_tol / parts as f64;
    let mut budget = CellBudget::new(cfg.cell_budget);
    let mut acc = Accumulator::default();
    let mut undecided: Option<String> = None;
    let mut absorb = |v: ModularValue, acc: &mut Accumulator| -> Option<ModularValue> {
        match v {
            ModularValue::Finite { value, abs_err } => acc.add(value, abs_err),
            ModularValue::Infinite(_) => return Some(v),
            ModularValue::Indeterminate { lower_bound, reason } => {
                acc.add(lower_bound, 0.0);
                undecided.get_or_insert(reason);
            }
        }
        None
    };
    if let Some(cat) = u.catalog() {
        if let Some(inf) = absorb(catalog_integral(cat, tol, cfg, &mut budget), &mut acc) {
            return Ok(inf);
        }
    }
    for piece in u.pieces() {
        if piece.value == 0.0 {
            continue;
        }
        if let Some(inf) = absorb(piece_integral(piece, p, tol, cfg, &mut budget)?, &mut acc) {
            return Ok(inf);
        }
    }
    if !acc.sum.is_finite() {
        return Ok(ModularValue::Infinite(DivergenceCertificate::OverflowCap {
            location: u.domain().0,
            log_term: f64::INFINITY,
            cap: cfg.overflow_cap,
        }));
    }
    Ok(match undecided {
        Some(reason) => ModularValue::Indeterminate { lower_bound: acc.sum, reason },
        None => ModularValue::finite(acc.sum, acc.err),
    })
}
