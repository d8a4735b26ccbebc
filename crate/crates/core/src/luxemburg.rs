//! Luxemburg norm `||x|| = inf { lambda > 0 : rho(x / lambda) <= 1 }` and the
//! Minkowski functionals of the modular balls `{ rho <= r }`.
//!
//! `lambda -> rho(x / lambda)` is nonincreasing, so the infimum is bracketed by
//! doubling / halving from `lambda = 1` and then bisected. An infinite modular
//! counts as "above the threshold"; an indeterminate one aborts.

use serde::Serialize;

use crate::error::{ModtopError, Result};
use crate::exponent::ExponentSpec;
use crate::modular::{modular, Element, EvalConfig, ModularValue};

/// Probe range `2^-60 ..= 2^60` for the bracketing phase.
pub const PROBE_EXPONENT: i32 = 60;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormOptions {
    /// Relative bracket tolerance: stops at `hi - lo <= tol * max(1, value)`.
    pub tol: f64,
    pub max_evals: usize,
    pub eval: EvalConfig,
}

impl Default for NormOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_evals: 200, eval: EvalConfig::default() }
    }
}

impl NormOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self { tol, ..Self::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Membership {
    InSpace,
    NotInSpaceWithinProbe,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormResult {
    /// Bracket midpoint (`inf` when outside the space).
    #[serde(serialize_with = "crate::modular::serialize_extended")]
    pub value: f64,
    /// Largest probed `lambda` with `rho(x / lambda) > r` (0 if none).
    pub lower: f64,
    /// Smallest probed `lambda` with `rho(x / lambda) <= r`.
    #[serde(serialize_with = "crate::modular::serialize_extended")]
    pub upper: f64,
    pub bracket_width: f64,
    pub evals_used: usize,
    pub membership: Membership,
}

impl NormResult {
    fn zero() -> Self {
        Self { value: 0.0, lower: 0.0, upper: 0.0, bracket_width: 0.0, evals_used: 0, membership: Membership::InSpace }
    }
}

/// Bisects `inf { lambda > 0 : rho_at(lambda) <= r }` for a nonincreasing
/// `lambda -> rho_at(lambda)`.
///
/// Returns `Ok(None)` when `rho_at` exceeds `r` on the whole probe range.
pub fn solve_threshold<F>(rho_at: F, r: f64, opts: &NormOptions) -> Result<Option<NormResult>>
where
    F: Fn(f64) -> Result<ModularValue>,
{
    if !(r > 0.0) || !(opts.tol > 0.0) {
        return Err(ModtopError::InvalidArgument(format!("threshold r = {r} and tol = {} must be > 0", opts.tol)));
    }
    let mut evals = 0usize;
    let mut above = |lambda: f64| -> Result<bool> {
        evals += 1;
        if evals > opts.max_evals {
            return Err(ModtopError::InvalidArgument(format!(
                "norm bisection exceeded {} modular evaluations",
                opts.max_evals
            )));
        }
        rho_at(lambda)?.exceeds(r).ok_or(ModtopError::NormUncertain { lambda })
    };

    let probe_max = 2f64.powi(PROBE_EXPONENT);
    let probe_min = 2f64.powi(-PROBE_EXPONENT);
    let (mut lo, mut hi);
    if above(1.0)? {
        lo = 1.0;
        hi = 2.0;
        while above(hi)? {
            lo = hi;
            if hi >= probe_max {
                return Ok(None);
            }
            hi *= 2.0;
        }
    } else {
        hi = 1.0;
        lo = 0.5;
        while !above(lo)? {
            hi = lo;
            if lo <= probe_min {
                lo = 0.0;
                break;
            }
            lo *= 0.5;
        }
    }
    while hi - lo > opts.tol * hi.max(1.0) {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if above(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(NormResult {
        value: 0.5 * (lo + hi),
        lower: lo,
        upper: hi,
        bracket_width: hi - lo,
        evals_used: evals,
        membership: Membership::InSpace,
    }))
}

fn minkowski_inner(x: &Element, p: &ExponentSpec, alpha: f64, r: f64, opts: &NormOptions) -> Result<Option<NormResult>> {
    if x.is_zero() {
        return Ok(Some(NormResult::zero()));
    }
    solve_threshold(|lambda| modular(&x.scale(alpha / lambda), p, &opts.eval), r, opts)
}

fn require_in_space(res: Option<NormResult>) -> Result<NormResult> {
    res.ok_or(ModtopError::NotInModularSpace { probe_max: 2f64.powi(PROBE_EXPONENT) })
}

/// `||x||_rho`.
pub fn luxemburg_norm(x: &Element, p: &ExponentSpec, opts: &NormOptions) -> Result<NormResult> {
    require_in_space(minkowski_inner(x, p, 1.0, 1.0, opts)?)
}

/// Like [`luxemburg_norm`] but reports elements outside the space as
/// `NotInSpaceWithinProbe` with an infinite value instead of failing.
pub fn norm_probe(x: &Element, p: &ExponentSpec, opts: &NormOptions) -> Result<NormResult> {
    Ok(minkowski_inner(x, p, 1.0, 1.0, opts)?.unwrap_or(NormResult {
        value: f64::INFINITY,
        lower: 2f64.powi(PROBE_EXPONENT),
        upper: f64::INFINITY,
        bracket_width: f64::INFINITY,
        evals_used: 0,
        membership: Membership::NotInSpaceWithinProbe,
    }))
}

/// `mu_{B_r}(x) = inf { lambda > 0 : rho(x / lambda) <= r }`.
pub fn minkowski_functional(x: &Element, p: &ExponentSpec, r: f64, opts: &NormOptions) -> Result<NormResult> {
    require_in_space(minkowski_inner(x, p, 1.0, r, opts)?)
}

/// Luxemburg norm of the scaled modular `rho_alpha(x) = rho(alpha x)`.
pub fn scaled_luxemburg_norm(x: &Element, p: &ExponentSpec, alpha: f64, opts: &NormOptions) -> Result<NormResult> {
    if !(alpha > 0.0) {
        return Err(ModtopError::InvalidArgument(format!("alpha = {alpha} must be > 0")));
    }
    require_in_space(minkowski_inner(x, p, alpha, 1.0, opts)?)
}

/// Outcome of checking the basic norm/modular relations at one element.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelationReport {
    pub norm: NormResult,
    pub modular: ModularValue,
    /// `rho(x / ||x||) <= 1`, checked at the bracket's upper end.
    pub unit_ball_at_norm: bool,
    /// `rho(x) <= 1  <=>  ||x|| <= 1`.
    pub unit_ball_equivalence: bool,
    /// `||x|| <= 1  =>  rho(x) <= ||x||`.
    pub modular_below_norm: bool,
    /// `rho(x) < 1 <=> ||x|| < 1`; only holds for right-continuous modulars,
    /// so it is reported but never part of `all_pass`.
    pub strict_equivalence_probe: bool,
}

impl RelationReport {
    pub fn all_pass(&self) -> bool {
        self.unit_ball_at_norm && self.unit_ball_equivalence && self.modular_below_norm
    }
}

/// Checks the norm/modular relations for `x` up to `tol`.
pub fn verify_norm_modular_relations(x: &Element, p: &ExponentSpec, tol: f64, opts: &NormOptions) -> Result<RelationReport> {
    let rho = modular(x, p, &opts.eval)?;
    if let ModularValue::Indeterminate { .. } = rho {
        return Err(ModtopError::NormUncertain { lambda: 1.0 });
    }
    let norm = luxemburg_norm(x, p, opts)?;
    if x.is_zero() {
        return Ok(RelationReport {
            norm,
            modular: rho,
            unit_ball_at_norm: true,
            unit_ball_equivalence: true,
            modular_below_norm: true,
            strict_equivalence_probe: true,
        });
    }
    let at_norm = modular(&x.scale(1.0 / norm.upper), p, &opts.eval)?;
    let unit_ball_at_norm = at_norm.exceeds(1.0 + tol) == Some(false);

    let rho_v = rho.as_extended();
    let n = norm.value;
    let near = |v: f64| (v - 1.0).abs() <= tol;
    let unit_ball_equivalence = near(rho_v) || near(n) || ((rho_v <= 1.0) == (n <= 1.0));
    let modular_below_norm = n > 1.0 + tol || rho_v <= n + tol;
    let strict_equivalence_probe = (rho_v < 1.0) == (n < 1.0 - tol);
    Ok(RelationReport {
        norm,
        modular: rho,
        unit_ball_at_norm,
        unit_ball_equivalence,
        modular_below_norm,
        strict_equivalence_probe,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function::PiecewiseFunction;
    use crate::sequence::SequenceVec;

    fn seq(v: &[f64]) -> Element {
        SequenceVec::from_values(v).unwrap().into()
    }

    #[test]
    fn single_coordinate_square() {
        let p = ExponentSpec::table(vec![2.0]).unwrap();
        let n = luxemburg_norm(&seq(&[3.0]), &p, &NormOptions::default()).unwrap();
        assert!((n.value - 3.0).abs() <= 1e-10 * 3.0);
        assert!(n.bracket_width <= 1e-10 * 3.0);
        let m = minkowski_functional(&seq(&[3.0]), &p, 4.0, &NormOptions::default()).unwrap();
        assert!((m.value - 1.5).abs() <= 1e-10 * 1.5);
    }

    #[test]
    fn zero_has_zero_norm() {
        let p = ExponentSpec::identity();
        let n = luxemburg_norm(&SequenceVec::zero().into(), &p, &NormOptions::default()).unwrap();
        assert_eq!(n.value, 0.0);
        assert_eq!(n.evals_used, 0);
    }

    #[test]
    fn reciprocal_unit_function_has_norm_one() {
        let p = ExponentSpec::reciprocal(0.0, 0.5).unwrap();
        let u: Element = PiecewiseFunction::constant(0.0, 0.5, 1.0).unwrap().into();
        let n = luxemburg_norm(&u, &p, &NormOptions::default()).unwrap();
        assert!((n.value - 1.0).abs() < 1e-9);
        let rel = verify_norm_modular_relations(&u, &p, 1e-8, &NormOptions::default()).unwrap();
        assert!(rel.all_pass(), "{rel:?}");
        // rho(1) = 1/2 < 1 but ||1|| = 1: the strict equivalence fails here
        assert!(!rel.strict_equivalence_probe);
    }

    #[test]
    fn minkowski_functionals_are_equivalent() {
        let p = ExponentSpec::table(vec![1.5, 2.0, 4.0]).unwrap();
        let x = seq(&[0.3, -1.2, 2.0]);
        let o = NormOptions::with_tol(1e-12);
        let m1 = minkowski_functional(&x, &p, 1.0, &o).unwrap().value;
        let m2 = minkowski_functional(&x, &p, 2.0, &o).unwrap().value;
        assert!(m2 <= m1 + 1e-12 && m1 <= 2.0 * m2 + 1e-12);
        assert_eq!(m1, luxemburg_norm(&x, &p, &o).unwrap().value);
    }

    #[test]
    fn not_in_space() {
        // rho(c 1_N) = inf for every c under a constant exponent
        let p = ExponentSpec::constant(2.0).unwrap();
        let x: Element = SequenceVec::constant(1.0).into();
        assert!(matches!(
            luxemburg_norm(&x, &p, &NormOptions::default()),
            Err(ModtopError::NotInModularSpace { .. })
        ));
        let probe = norm_probe(&x, &p, &NormOptions::default()).unwrap();
        assert_eq!(probe.membership, Membership::NotInSpaceWithinProbe);
    }

    #[test]
    fn indeterminate_blocks_bisection() {
        let p = ExponentSpec::custom("two", |_| 2.0, true, false);
        let x: Element = SequenceVec::constant(0.5).into();
        assert!(matches!(
            luxemburg_norm(&x, &p, &NormOptions::default()),
            Err(ModtopError::NormUncertain { .. })
        ));
    }

    #[test]
    fn norm_of_one_under_identity_is_two() {
        // rho(1/lambda) = 1/(lambda - 1) <= 1  <=>  lambda >= 2
        let p = ExponentSpec::identity();
        let x: Element = SequenceVec::constant(1.0).into();
        let n = luxemburg_norm(&x, &p, &NormOptions::default()).unwrap();
        assert!((n.value - 2.0).abs() < 1e-9);
    }
}
