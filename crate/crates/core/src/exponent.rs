//! Variable exponents for sequence spaces `l^(p_n)` and function spaces `L^{p(.)}`.
//!
//! An [`ExponentSpec`] is either a finite table (finite-dimensional sequence
//! space), a closed-form family, or a user-supplied evaluator with declared
//! growth flags. Sequence exponents are queried with [`ExponentSpec::seq_value`]
//! (1-based index), function exponents with [`ExponentSpec::fun_value`].

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{ModtopError, Result};

type Evaluator = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A user-supplied exponent evaluator.
#[derive(Clone)]
pub struct CustomExponent {
    name: String,
    eval: Evaluator,
}

impl CustomExponent {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn eval(&self, t: f64) -> f64 {
        (self.eval)(t)
    }
}

impl fmt::Debug for CustomExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomExponent").field("name", &self.name).finish()
    }
}

#[derive(Debug, Clone)]
pub enum ExponentKind {
    /// `p_1, ..., p_N`; the space is `R^N`.
    Table(Vec<f64>),
    /// `p(t) = slope * t + intercept`, evaluated at `t = n` for sequences
    /// and at `t = x` for functions.
    Affine { slope: f64, intercept: f64 },
    /// `p(x) = 1/x` on `(lo, hi)`.
    Reciprocal { lo: f64, hi: f64 },
    /// `p(x) = values[i]` on `[breakpoints[i], breakpoints[i + 1])`.
    PiecewiseConst { breakpoints: Vec<f64>, values: Vec<f64> },
    Custom(CustomExponent),
}

#[derive(Debug, Clone)]
pub struct ExponentSpec {
    kind: ExponentKind,
    monotone: bool,
    unbounded: bool,
}

fn check_ge_one(v: f64, what: &str) -> Result<()> {
    if v.is_finite() && v >= 1.0 {
        Ok(())
    } else {
        Err(ModtopError::InvalidExponent(format!("{what} = {v} is not >= 1")))
    }
}

impl ExponentSpec {
    pub fn table(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(ModtopError::InvalidExponent("empty table".into()));
        }
        for (i, &v) in values.iter().enumerate() {
            check_ge_one(v, &format!("p_{}", i + 1))?;
        }
        let monotone = values.windows(2).all(|w| w[0] <= w[1]);
        Ok(Self { kind: ExponentKind::Table(values), monotone, unbounded: false })
    }

    pub fn affine(slope: f64, intercept: f64) -> Result<Self> {
        if !(slope.is_finite() && slope >= 0.0) || !intercept.is_finite() {
            return Err(ModtopError::InvalidExponent(format!(
                "affine exponent needs finite slope >= 0, got slope {slope}, intercept {intercept}"
            )));
        }
        check_ge_one(slope + intercept, "p_1")?;
        Ok(Self {
            kind: ExponentKind::Affine { slope, intercept },
            monotone: true,
            unbounded: slope > 0.0,
        })
    }

    /// `p_n = n`.
    pub fn identity() -> Self {
        Self::affine(1.0, 0.0).expect("identity exponent is valid")
    }

    pub fn constant(p: f64) -> Result<Self> {
        Self::affine(0.0, p)
    }

    pub fn reciprocal(lo: f64, hi: f64) -> Result<Self> {
        if !(lo >= 0.0 && lo < hi && hi <= 1.0) {
            return Err(ModtopError::InvalidExponent(format!(
                "1/x exponent needs 0 <= lo < hi <= 1, got ({lo}, {hi})"
            )));
        }
        // 1/x decreases in x, so "monotone-nondecreasing" is false.
        Ok(Self { kind: ExponentKind::Reciprocal { lo, hi }, monotone: false, unbounded: lo == 0.0 })
    }

    pub fn piecewise(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() || breakpoints.len() != values.len() + 1 {
            return Err(ModtopError::InvalidExponent(
                "piecewise exponent needs k+1 breakpoints for k values".into(),
            ));
        }
        if !breakpoints.windows(2).all(|w| w[0] < w[1]) || breakpoints.iter().any(|b| !b.is_finite()) {
            return Err(ModtopError::InvalidExponent("breakpoints must be finite and increasing".into()));
        }
        for &v in &values {
            check_ge_one(v, "piece value")?;
        }
        let monotone = values.windows(2).all(|w| w[0] <= w[1]);
        Ok(Self { kind: ExponentKind::PiecewiseConst { breakpoints, values }, monotone, unbounded: false })
    }

    /// A custom exponent with declared growth flags. Values are checked for
    /// `p >= 1` lazily, whenever they are queried during evaluation.
    pub fn custom<F>(name: impl Into<String>, f: F, monotone: bool, unbounded: bool) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            kind: ExponentKind::Custom(CustomExponent { name: name.into(), eval: Arc::new(f) }),
            monotone,
            unbounded,
        }
    }

    /// Named custom exponents recognised by the text grammar.
    pub fn named_custom(name: &str) -> Result<Self> {
        match name {
            // p_n = 1 + ln(n + 1)
            "one-plus-log" => Ok(Self::custom(name, |n| 1.0 + (n + 1.0).ln(), true, true)),
            // p_n = 2 sqrt(n)
            "two-sqrt" => Ok(Self::custom(name, |n| 2.0 * n.sqrt(), true, true)),
            // p_n = 1 + log2(n)
            "one-plus-log2" => Ok(Self::custom(name, |n| 1.0 + n.log2(), true, true)),
            _ => Err(ModtopError::InvalidExponent(format!("unknown custom exponent '{name}'"))),
        }
    }

    pub fn kind(&self) -> &ExponentKind {
        &self.kind
    }

    pub fn is_monotone(&self) -> bool {
        self.monotone
    }

    pub fn is_declared_unbounded(&self) -> bool {
        self.unbounded
    }

    pub fn is_custom(&self) -> bool {
        matches!(self.kind, ExponentKind::Custom(_))
    }

    /// Dimension of a table exponent.
    pub fn dimension(&self) -> Option<usize> {
        match &self.kind {
            ExponentKind::Table(v) => Some(v.len()),
            _ => None,
        }
    }

    /// Whether the exponent can index sequences.
    pub fn is_sequence_exponent(&self) -> bool {
        matches!(self.kind, ExponentKind::Table(_) | ExponentKind::Affine { .. } | ExponentKind::Custom(_))
    }

    /// Whether the exponent can be evaluated as a function of `x`.
    pub fn is_function_exponent(&self) -> bool {
        !matches!(self.kind, ExponentKind::Table(_))
    }

    /// The intrinsic domain of a function exponent; `None` means any interval.
    pub fn function_domain(&self) -> Option<(f64, f64)> {
        match &self.kind {
            ExponentKind::Reciprocal { lo, hi } => Some((*lo, *hi)),
            ExponentKind::PiecewiseConst { breakpoints, .. } => {
                Some((breakpoints[0], *breakpoints.last().unwrap()))
            }
            _ => None,
        }
    }

    /// `p_n` for a 1-based index. NaN for indices outside a table and for
    /// function-only kinds.
    pub fn seq_value(&self, n: u64) -> f64 {
        match &self.kind {
            ExponentKind::Table(v) => {
                if n >= 1 && (n as usize) <= v.len() {
                    v[n as usize - 1]
                } else {
                    f64::NAN
                }
            }
            ExponentKind::Affine { slope, intercept } => slope * n as f64 + intercept,
            ExponentKind::Custom(c) => c.eval(n as f64),
            _ => f64::NAN,
        }
    }

    /// `p(x)`. NaN for tables.
    pub fn fun_value(&self, x: f64) -> f64 {
        match &self.kind {
            ExponentKind::Table(_) => f64::NAN,
            ExponentKind::Affine { slope, intercept } => slope * x + intercept,
            ExponentKind::Reciprocal { .. } => 1.0 / x,
            ExponentKind::PiecewiseConst { breakpoints, values } => {
                let i = breakpoints[1..].partition_point(|&b| b <= x).min(values.len() - 1);
                values[i]
            }
            ExponentKind::Custom(c) => c.eval(x),
        }
    }

    /// Exact supremum for kinds where it is known in closed form; `None`
    /// when the exponent is unbounded or only known through an evaluator.
    pub fn known_sup(&self) -> Option<f64> {
        match &self.kind {
            ExponentKind::Table(v) => Some(v.iter().cloned().fold(f64::MIN, f64::max)),
            ExponentKind::Affine { slope, intercept } if *slope == 0.0 => Some(*intercept),
            ExponentKind::Reciprocal { lo, .. } if *lo > 0.0 => Some(1.0 / lo),
            ExponentKind::PiecewiseConst { values, .. } => Some(values.iter().cloned().fold(f64::MIN, f64::max)),
            _ => None,
        }
    }
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(",")
}

impl fmt::Display for ExponentSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ExponentKind::Table(v) => write!(f, "table:{}", join(v)),
            ExponentKind::Affine { slope, intercept } => write!(f, "affine:{slope},{intercept}"),
            ExponentKind::Reciprocal { lo, hi } => write!(f, "reciprocal:{lo},{hi}"),
            ExponentKind::PiecewiseConst { breakpoints, values } => {
                write!(f, "piecewise:{};{}", join(breakpoints), join(values))
            }
            ExponentKind::Custom(c) => write!(f, "custom:{}", c.name),
        }
    }
}

fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| ModtopError::InvalidExponent(format!("cannot parse number '{t}'")))
        })
        .collect()
}

impl FromStr for ExponentSpec {
    type Err = ModtopError;

    /// Grammar: `table:2,3,2.5`, `affine:1,0`, `identity`, `reciprocal:0,0.5`,
    /// `piecewise:0,0.5,1;2,3`, `custom:<name>`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "identity" {
            return Ok(Self::identity());
        }
        let (head, body) = s
            .split_once(':')
            .ok_or_else(|| ModtopError::InvalidExponent(format!("missing ':' in exponent '{s}'")))?;
        match head {
            "table" => Self::table(parse_list(body)?),
            "affine" => match parse_list(body)?.as_slice() {
                [g, b] => Self::affine(*g, *b),
                _ => Err(ModtopError::InvalidExponent("affine takes slope,intercept".into())),
            },
            "reciprocal" => match parse_list(body)?.as_slice() {
                [a, b] => Self::reciprocal(*a, *b),
                _ => Err(ModtopError::InvalidExponent("reciprocal takes lo,hi".into())),
            },
            "piecewise" => {
                let (bps, vals) = body.split_once(';').ok_or_else(|| {
                    ModtopError::InvalidExponent("piecewise takes breakpoints;values".into())
                })?;
                Self::piecewise(parse_list(bps)?, parse_list(vals)?)
            }
            "custom" => Self::named_custom(body.trim()),
            _ => Err(ModtopError::InvalidExponent(format!("unknown exponent kind '{head}'"))),
        }
    }
}
