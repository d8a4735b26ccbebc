//! Convex modulars `rho_p(x) = sum |x_n|^{p_n}` and `rho_{p(.)}(u) = int |u|^{p(x)} dx`
//! evaluated as certified extended nonnegative values.

mod integral;
pub mod quadrature;
mod series;
mod value;

use serde::Serialize;

pub use integral::eval_fun_modular;
pub use series::{eval_seq_modular, verify_seq_certificate};
pub use value::{serialize_extended, AnalyticRule, DivergenceCertificate, ModularValue};

use crate::error::{ModtopError, Result};
use crate::exponent::ExponentSpec;
use crate::function::PiecewiseFunction;
use crate::sequence::SequenceVec;

/// Default overflow cap on `ln(term)`.
pub const DEFAULT_OVERFLOW_CAP: f64 = 690.0;

/// Tolerances and work caps for modular evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvalConfig {
    /// Target absolute error for series tails.
    pub series_tol: f64,
    /// Absolute quadrature tolerance per modular evaluation.
    pub quad_tol: f64,
    /// Maximum number of quadrature cells per evaluation.
    pub cell_budget: usize,
    /// Terms with `ln(term) > overflow_cap` make the modular infinite.
    pub overflow_cap: f64,
    /// Terms summed directly for a custom-exponent tail before switching to
    /// Cauchy condensation.
    pub direct_budget: u64,
    /// Window of consecutive near-unit term ratios that makes a tail indeterminate.
    pub ratio_window: u64,
    /// Longest constant run summed term by term for custom exponents.
    pub run_budget: u64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            series_tol: 1e-13,
            quad_tol: 1e-8,
            cell_budget: 1_000_000,
            overflow_cap: DEFAULT_OVERFLOW_CAP,
            direct_budget: 1 << 17,
            ratio_window: 10_000,
            run_budget: 10_000_000,
        }
    }
}

impl EvalConfig {
    /// Defaults, with the overflow cap taken from `MODTOP_CAP` when set.
    pub fn from_env() -> Result<Self> {
        let mut cfg = Self::default();
        if let Ok(v) = std::env::var("MODTOP_CAP") {
            let cap: f64 = v
                .trim()
                .parse()
                .map_err(|_| ModtopError::Config(format!("MODTOP_CAP='{v}' is not a number")))?;
            if !(cap > 0.0 && cap <= 709.0) {
                return Err(ModtopError::Config(format!("MODTOP_CAP={cap} must lie in (0, 709]")));
            }
            cfg.overflow_cap = cap;
        }
        Ok(cfg)
    }
}

/// A vector of `l^(p_n)` or `L^{p(.)}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "space", content = "element", rename_all = "snake_case")]
pub enum Element {
    Sequence(SequenceVec),
    Function(PiecewiseFunction),
}

impl From<SequenceVec> for Element {
    fn from(x: SequenceVec) -> Self {
        Element::Sequence(x)
    }
}

impl From<PiecewiseFunction> for Element {
    fn from(u: PiecewiseFunction) -> Self {
        Element::Function(u)
    }
}

impl Element {
    pub fn scale(&self, lambda: f64) -> Element {
        match self {
            Element::Sequence(x) => Element::Sequence(x.scale(lambda)),
            Element::Function(u) => Element::Function(u.scale(lambda)),
        }
    }

    pub fn lin_comb(a: f64, x: &Element, b: f64, y: &Element) -> Result<Element> {
        match (x, y) {
            (Element::Sequence(x), Element::Sequence(y)) => Ok(Element::Sequence(SequenceVec::lin_comb(a, x, b, y))),
            (Element::Function(u), Element::Function(v)) => {
                Ok(Element::Function(PiecewiseFunction::lin_comb(a, u, b, v)?))
            }
            _ => Err(ModtopError::DomainMismatch("cannot combine a sequence with a function".into())),
        }
    }

    pub fn sub(&self, other: &Element) -> Result<Element> {
        Element::lin_comb(1.0, self, -1.0, other)
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Element::Sequence(x) => x.is_zero(),
            Element::Function(u) => u.is_zero(),
        }
    }

    pub fn as_sequence(&self) -> Option<&SequenceVec> {
        match self {
            Element::Sequence(x) => Some(x),
            Element::Function(_) => None,
        }
    }

    pub fn as_function(&self) -> Option<&PiecewiseFunction> {
        match self {
            Element::Function(u) => Some(u),
            Element::Sequence(_) => None,
        }
    }
}

/// `rho_p(x)` for either kind of element.
pub fn modular(x: &Element, p: &ExponentSpec, cfg: &EvalConfig) -> Result<ModularValue> {
    match x {
        Element::Sequence(s) => eval_seq_modular(s, p, cfg),
        Element::Function(u) => eval_fun_modular(u, p, cfg),
    }
}

/// `rho_lambda(x) = rho(lambda x)`.
pub fn scaled_modular(x: &Element, p: &ExponentSpec, lambda: f64, cfg: &EvalConfig) -> Result<ModularValue> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(ModtopError::InvalidArgument(format!("scale lambda = {lambda} must be > 0")));
    }
    if lambda == 1.0 {
        return modular(x, p, cfg);
    }
    modular(&x.scale(lambda), p, cfg)
}

/// `rho(x - y)`.
pub fn modular_distance(x: &Element, y: &Element, p: &ExponentSpec, cfg: &EvalConfig) -> Result<ModularValue> {
    modular(&x.sub(y)?, p, cfg)
}

/// `sup { rho(a - b) : a, b in set }` over a finite set.
pub fn modular_diameter(set: &[Element], p: &ExponentSpec, cfg: &EvalConfig) -> Result<ModularValue> {
    if set.is_empty() {
        return Err(ModtopError::EmptySet);
    }
    let mut best = ModularValue::zero();
    let mut undecided: Option<ModularValue> = None;
    for i in 0..set.len() {
        for j in i + 1..set.len() {
            let d = modular_distance(&set[i], &set[j], p, cfg)?;
            match d {
                ModularValue::Infinite(_) => return Ok(d),
                ModularValue::Indeterminate { .. } => {
                    if undecided.as_ref().is_none_or(|u| u.lower_bound() < d.lower_bound()) {
                        undecided = Some(d);
                    }
                }
                ModularValue::Finite { value, .. } => {
                    if value > best.value().unwrap_or(0.0) {
                        best = d;
                    }
                }
            }
        }
    }
    match undecided {
        Some(ModularValue::Indeterminate { lower_bound, reason }) => Ok(ModularValue::Indeterminate {
            lower_bound: lower_bound.max(best.lower_bound()),
            reason,
        }),
        _ => Ok(best),
    }
}
