//! `rho_p(x) = sum_n |x_n|^{p_n}` over run-encoded sequences.
//!
//! Runs are summed in closed form for affine exponents and term by term
//! otherwise. Constant tails go through a fixed rule table:
//!
//! | tail `c`  | exponent            | verdict                                      |
//! |-----------|---------------------|----------------------------------------------|
//! | `|c| >= 1`| any                 | infinite, every term `>= |c|`                |
//! | `|c| < 1` | affine, slope > 0   | geometric closed form                        |
//! | `|c| < 1` | affine, slope = 0   | infinite, constant terms                     |
//! | `|c| < 1` | custom, monotone    | direct summation, then Cauchy condensation   |
//! | `|c| < 1` | custom, otherwise   | indeterminate                                |

use super::value::{Accumulator, DivergenceCertificate, ModularValue};
use super::EvalConfig;
use crate::error::{ModtopError, Result};
use crate::exponent::{ExponentKind, ExponentSpec};
use crate::sequence::{Run, SequenceVec, Tail};

/// Condensed levels with nondecreasing terms needed to certify divergence.
const CONDENSED_WINDOW: u32 = 16;
/// Highest condensation level (indices up to `2^62`).
const MAX_LEVEL: u32 = 62;
/// Terms recomputed in a `TermsBounded` certificate window.
const CERT_WINDOW: u64 = 64;
/// Ratios at or above this value count toward the indeterminate window.
const NEAR_UNIT_RATIO: f64 = 1.0 - 1e-12;

fn exponent_at(p: &ExponentSpec, n: u64) -> Result<f64> {
    let v = p.seq_value(n);
    if v.is_finite() && v >= 1.0 {
        Ok(v)
    } else {
        Err(ModtopError::InvalidExponent(format!("p_{n} = {v} is not >= 1")))
    }
}

fn overflow(location: u64, log_term: f64, cfg: &EvalConfig) -> ModularValue {
    ModularValue::Infinite(DivergenceCertificate::OverflowCap {
        location: location as f64,
        log_term,
        cap: cfg.overflow_cap,
    })
}

/// `ln(e^x - 1)` for `x > 0`, without overflow.
fn ln_expm1(x: f64) -> f64 {
    if x > 30.0 {
        x + (-(-x).exp()).ln_1p()
    } else {
        x.exp_m1().ln()
    }
}

fn check_admissible(x: &SequenceVec, p: &ExponentSpec) -> Result<()> {
    if !p.is_sequence_exponent() {
        return Err(ModtopError::DomainMismatch(format!("exponent '{p}' does not index sequences")));
    }
    if let Some(dim) = p.dimension() {
        if x.tail() != Tail::Zero {
            return Err(ModtopError::IncompatibleTail);
        }
        if let Some(end) = x.support_end() {
            if end > dim as u64 {
                return Err(ModtopError::DimensionExceeded { index: end, dim });
            }
        }
    }
    Ok(())
}

/// Evaluates `rho_p(x)`.
pub fn eval_seq_modular(x: &SequenceVec, p: &ExponentSpec, cfg: &EvalConfig) -> Result<ModularValue> {
    check_admissible(x, p)?;
    let mut acc = Accumulator::default();
    let mut undecided: Option<String> = None;
    let mut absorb = |part: ModularValue, acc: &mut Accumulator| -> Option<ModularValue> {
        match part {
            ModularValue::Finite { value, abs_err } => acc.add(value, abs_err),
            ModularValue::Infinite(_) => return Some(part),
            ModularValue::Indeterminate { lower_bound, reason } => {
                acc.add(lower_bound, 0.0);
                undecided.get_or_insert(reason);
            }
        }
        None
    };
    for run in x.runs() {
        if run.value == 0.0 {
            continue;
        }
        if let Some(inf) = absorb(run_sum(run, p, cfg)?, &mut acc) {
            return Ok(inf);
        }
    }
    if let Tail::Constant(c) = x.tail() {
        if let Some(inf) = absorb(tail_sum(c, x.runs_end() + 1, p, cfg)?, &mut acc) {
            return Ok(inf);
        }
    }
    if !acc.sum.is_finite() || acc.sum.ln() > cfg.overflow_cap {
        return Ok(overflow(x.runs_end(), acc.sum.ln(), cfg));
    }
    Ok(match undecided {
        Some(reason) => ModularValue::Indeterminate { lower_bound: acc.sum, reason },
        None => ModularValue::finite(acc.sum, acc.err),
    })
}

/// Sums `|a|^{p_n}` term by term over `first..=last`.
fn looped_sum(a: f64, first: u64, last: u64, p: &ExponentSpec, cfg: &EvalConfig) -> Result<ModularValue> {
    let la = a.abs().ln();
    let mut acc = Accumulator::default();
    for n in first..=last {
        let pn = exponent_at(p, n)?;
        let log_term = pn * la;
        if log_term > cfg.overflow_cap {
            return Ok(overflow(n, log_term, cfg));
        }
        acc.add(a.abs().powf(pn), 0.0);
    }
    Ok(ModularValue::finite(acc.sum, acc.err))
}

fn run_sum(run: &Run, p: &ExponentSpec, cfg: &EvalConfig) -> Result<ModularValue> {
    let a = run.value.abs();
    match p.kind() {
        ExponentKind::Affine { slope, intercept } => {
            let la = a.ln();
            let len = run.len() as f64;
            if la == 0.0 {
                return Ok(ModularValue::finite(len, 0.0));
            }
            let p_first = slope * run.start as f64 + intercept;
            let p_last = slope * run.end as f64 + intercept;
            if la > 0.0 && p_last * la > cfg.overflow_cap {
                return Ok(overflow(run.end, p_last * la, cfg));
            }
            let value = if *slope == 0.0 {
                len * a.powf(*intercept)
            } else {
                let q = slope * la;
                if la > 0.0 {
                    // e^{p_first la} (e^{len q} - 1) / (e^q - 1), in logs
                    (p_first * la + ln_expm1(len * q) - ln_expm1(q)).exp()
                } else {
                    (p_first * la).exp() * (len * q).exp_m1() / q.exp_m1()
                }
            };
            Ok(ModularValue::finite(value, 16.0 * f64::EPSILON * value))
        }
        ExponentKind::Table(_) => looped_sum(a, run.start, run.end, p, cfg),
        ExponentKind::Custom(_) => {
            if run.len() > cfg.run_budget {
                Ok(ModularValue::Indeterminate {
                    lower_bound: 0.0,
                    reason: format!("run of {} terms exceeds the term budget for custom exponents", run.len()),
                })
            } else {
                looped_sum(a, run.start, run.end, p, cfg)
            }
        }
        _ => Err(ModtopError::DomainMismatch(format!("exponent '{p}' does not index sequences"))),
    }
}

/// `sum_{n >= first} |c|^{p_n}`.
fn tail_sum(c: f64, first: u64, p: &ExponentSpec, cfg: &EvalConfig) -> Result<ModularValue> {
    let a = c.abs();
    if a >= 1.0 {
        // p_n >= 1 gives |c|^{p_n} >= |c| >= 1 for every n.
        for n in first..first + CERT_WINDOW {
            exponent_at(p, n)?;
        }
        return Ok(ModularValue::Infinite(DivergenceCertificate::TermsBounded {
            first,
            last: first + CERT_WINDOW - 1,
            delta: a,
            nondecreasing: p.is_monotone(),
        }));
    }
    let la = a.ln();
    match p.kind() {
        ExponentKind::Affine { slope, intercept } => {
            if *slope == 0.0 {
                return Ok(ModularValue::Infinite(DivergenceCertificate::TermsBounded {
                    first,
                    last: first + CERT_WINDOW - 1,
                    delta: a.powf(*intercept),
                    nondecreasing: true,
                }));
            }
            let p_first = slope * first as f64 + intercept;
            let value = (p_first * la).exp() / -(slope * la).exp_m1();
            Ok(ModularValue::finite(value, 16.0 * f64::EPSILON * value))
        }
        ExponentKind::Custom(_) if p.is_monotone() => custom_tail(la, first, p, cfg),
        ExponentKind::Custom(_) => Ok(ModularValue::Indeterminate {
            lower_bound: 0.0,
            reason: "constant tail against a custom exponent without a monotonicity declaration".into(),
        }),
        _ => Err(ModtopError::IncompatibleTail),
    }
}

/// Tail `sum_{n >= first} e^{p_n la}` with `la < 0` and nondecreasing `p`, so the
/// terms are nonincreasing.
fn custom_tail(la: f64, first: u64, p: &ExponentSpec, cfg: &EvalConfig) -> Result<ModularValue> {
    let term = |n: u64| -> Result<f64> { Ok((exponent_at(p, n)? * la).exp()) };
    let tol = cfg.series_tol;
    let mut acc = Accumulator::default();

    // Direct phase on [first, split).
    let split = cfg.direct_budget.max(first + 1).next_power_of_two();
    let mut prev = term(first)?;
    acc.add(prev, 0.0);
    let mut near_unit = 0u64;
    for n in first + 1..split {
        let t = term(n)?;
        acc.add(t, 0.0);
        if t == 0.0 {
            return Ok(ModularValue::finite(acc.sum, acc.err));
        }
        let r = t / prev;
        prev = t;
        if r >= NEAR_UNIT_RATIO {
            near_unit += 1;
            if near_unit >= cfg.ratio_window {
                return Ok(ModularValue::Indeterminate {
                    lower_bound: acc.sum,
                    reason: format!(
                        "term ratio >= 1 - 1e-12 over a {}-term window ending at n = {n}",
                        cfg.ratio_window
                    ),
                });
            }
            continue;
        }
        near_unit = 0;
        let remainder = t * r / (1.0 - r);
        if remainder < tol {
            return Ok(ModularValue::finite(acc.sum, acc.err + remainder));
        }
    }

    // Condensation phase: block j covers [2^j, 2^{j+1}) and lies in
    // [2^j t_{2^{j+1}}, 2^j t_{2^j}] because the terms are nonincreasing.
    let mut level = split.trailing_zeros();
    let condensed = |j: u32| -> Result<f64> { Ok((j as f64 * std::f64::consts::LN_2).exp() * term(1u64 << j)?) };
    let mut c_j = condensed(level)?;
    let mut rising_from: Option<(u32, f64)> = None;
    let mut last_ratio = f64::INFINITY;
    while level < MAX_LEVEL {
        let c_next = condensed(level + 1)?;
        let lower = 0.5 * c_next;
        let upper = c_j;
        acc.add(0.5 * (lower + upper), 0.5 * (upper - lower));
        if c_next == 0.0 {
            return Ok(ModularValue::finite(acc.sum, acc.err));
        }
        let ratio = c_next / c_j;
        if ratio >= 1.0 {
            let (start, delta) = *rising_from.get_or_insert((level, c_j));
            if level + 1 - start >= CONDENSED_WINDOW {
                return Ok(ModularValue::Infinite(DivergenceCertificate::CondensedTermsBounded {
                    first_level: start,
                    last_level: level + 1,
                    delta,
                }));
            }
        } else {
            rising_from = None;
            let remainder = c_next / (1.0 - ratio);
            if remainder < tol {
                return Ok(ModularValue::finite(acc.sum, acc.err + remainder));
            }
        }
        last_ratio = ratio;
        c_j = c_next;
        level += 1;
    }
    if last_ratio < NEAR_UNIT_RATIO {
        let remainder = c_j / (1.0 - last_ratio);
        Ok(ModularValue::finite(acc.sum, acc.err + remainder))
    } else {
        Ok(ModularValue::Indeterminate {
            lower_bound: acc.sum,
            reason: format!("condensed tail undecided at index 2^{MAX_LEVEL}"),
        })
    }
}

/// Recomputes the terms a sequence certificate refers to and checks its claim.
pub fn verify_seq_certificate(x: &SequenceVec, p: &ExponentSpec, cert: &DivergenceCertificate) -> bool {
    let log_term = |n: u64| -> f64 {
        let a = x.value_at(n).abs();
        if a == 0.0 {
            f64::NEG_INFINITY
        } else {
            p.seq_value(n) * a.ln()
        }
    };
    let slack = 1e-12;
    match cert {
        DivergenceCertificate::TermsBounded { first, last, delta, nondecreasing } => {
            let ld = delta.ln();
            let mut prev = f64::NEG_INFINITY;
            for n in *first..=*last {
                let lt = log_term(n);
                if !(lt >= ld - slack) || (*nondecreasing && lt < prev - slack) {
                    return false;
                }
                prev = lt;
            }
            true
        }
        DivergenceCertificate::CondensedTermsBounded { first_level, last_level, delta } => {
            let ld = delta.ln();
            let mut prev = f64::NEG_INFINITY;
            for j in *first_level..=*last_level {
                let n = 1u64 << j;
                if n <= x.runs_end() {
                    return false;
                }
                let lc = j as f64 * std::f64::consts::LN_2 + log_term(n);
                if !(lc >= ld - slack) || lc < prev - slack {
                    return false;
                }
                prev = lc;
            }
            true
        }
        DivergenceCertificate::OverflowCap { location, cap, .. } => log_term(*location as u64) > *cap,
        DivergenceCertificate::AnalyticComparison(_) => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> EvalConfig {
        EvalConfig::default()
    }

    fn finite(v: ModularValue) -> f64 {
        v.value().unwrap_or_else(|| panic!("expected finite, got {v:?}"))
    }

    #[test]
    fn two_halves_against_identity() {
        let x = SequenceVec::prefix_constant(2, 0.5);
        let v = eval_seq_modular(&x, &ExponentSpec::identity(), &cfg()).unwrap();
        assert!((finite(v) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn zero_vector() {
        let v = eval_seq_modular(&SequenceVec::zero(), &ExponentSpec::identity(), &cfg()).unwrap();
        assert_eq!(v, ModularValue::zero());
    }

    #[test]
    fn minus_one_tail_diverges_with_checkable_certificate() {
        let x = SequenceVec::new(vec![Run { start: 1, end: 9, value: -0.5 }], Tail::Constant(-1.0)).unwrap();
        let p = ExponentSpec::identity();
        let v = eval_seq_modular(&x, &p, &cfg()).unwrap();
        match v.certificate() {
            Some(c @ DivergenceCertificate::TermsBounded { delta, nondecreasing, .. }) => {
                assert_eq!(*delta, 1.0);
                assert!(*nondecreasing);
                assert!(verify_seq_certificate(&x, &p, c));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn table_rejects_constant_tail_and_overlong_support() {
        let p = ExponentSpec::table(vec![2.0, 3.0]).unwrap();
        assert_eq!(
            eval_seq_modular(&SequenceVec::constant(0.1), &p, &cfg()),
            Err(ModtopError::IncompatibleTail)
        );
        let x = SequenceVec::from_values(&[1.0, 1.0, 1.0]).unwrap();
        assert!(matches!(eval_seq_modular(&x, &p, &cfg()), Err(ModtopError::DimensionExceeded { .. })));
    }

    #[test]
    fn custom_exponent_below_one_is_rejected() {
        let p = ExponentSpec::custom("bad", |n| if n > 3.0 { 0.5 } else { 2.0 }, false, false);
        let x = SequenceVec::prefix_constant(5, 0.5);
        assert!(matches!(eval_seq_modular(&x, &p, &cfg()), Err(ModtopError::InvalidExponent(_))));
    }

    #[test]
    fn overflow_cap_triggers() {
        let x = SequenceVec::prefix_constant(1000, 2.0);
        let v = eval_seq_modular(&x, &ExponentSpec::identity(), &cfg()).unwrap();
        let c = v.certificate().unwrap();
        assert!(matches!(c, DivergenceCertificate::OverflowCap { .. }));
        assert!(verify_seq_certificate(&x, &ExponentSpec::identity(), c));
        // just below the cap stays finite
        let y = SequenceVec::prefix_constant(990, 2.0);
        assert!(eval_seq_modular(&y, &ExponentSpec::identity(), &cfg()).unwrap().is_finite());
    }

    #[test]
    fn affine_run_matches_loop() {
        let p = ExponentSpec::affine(0.5, 1.5).unwrap();
        for a in [0.3, 0.9, 1.0, 1.1, 1.7] {
            let x = SequenceVec::from_runs(vec![Run { start: 3, end: 40, value: a }], Tail::Zero).unwrap();
            let got = finite(eval_seq_modular(&x, &p, &cfg()).unwrap());
            let want: f64 = (3..=40).map(|n| a.powf(0.5 * n as f64 + 1.5)).sum();
            assert!((got - want).abs() <= 1e-13 * want, "a={a}: {got} vs {want}");
        }
    }

    #[test]
    fn custom_geometric_tail_matches_affine_closed_form() {
        let custom = ExponentSpec::custom("n", |n| n, true, true);
        let x = SequenceVec::constant(0.5);
        let got = finite(eval_seq_modular(&x, &custom, &cfg()).unwrap());
        assert!((got - 1.0).abs() < 1e-12);
    }

    #[test]
    fn custom_constant_exponent_tail_is_indeterminate() {
        let custom = ExponentSpec::custom("two", |_| 2.0, true, false);
        let v = eval_seq_modular(&SequenceVec::constant(0.5), &custom, &cfg()).unwrap();
        assert!(v.is_indeterminate(), "{v:?}");
    }

    #[test]
    fn custom_nonmonotone_tail_is_indeterminate() {
        let custom = ExponentSpec::custom("wiggle", |n| 2.0 + (n % 2.0), false, false);
        let v = eval_seq_modular(&SequenceVec::constant(0.5), &custom, &cfg()).unwrap();
        assert!(v.is_indeterminate());
    }

    #[test]
    fn slow_polynomial_tails_condense() {
        let p = ExponentSpec::named_custom("one-plus-log").unwrap();
        // lambda = 1/2: terms ~ n^{-ln 2}, divergent
        let div = eval_seq_modular(&SequenceVec::constant(0.5), &p, &cfg()).unwrap();
        let c = div.certificate().expect("divergent");
        assert!(matches!(c, DivergenceCertificate::CondensedTermsBounded { .. }));
        assert!(verify_seq_certificate(&SequenceVec::constant(0.5), &p, c));
        // lambda = e^{-2}: terms e^{-2} (n+1)^{-2}; sum = e^{-2} (pi^2/6 - 1)
        let lam = (-2.0f64).exp();
        let conv = eval_seq_modular(&SequenceVec::constant(lam), &p, &cfg()).unwrap();
        let want = lam * (std::f64::consts::PI.powi(2) / 6.0 - 1.0);
        let (v, e) = (conv.value().unwrap(), conv.abs_err().unwrap());
        assert!((v - want).abs() <= e, "{v} +- {e} vs {want}");
        assert!(e < 1e-5);
    }
}
