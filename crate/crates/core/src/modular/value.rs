use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

/// Why an integral was declared divergent by comparison with a known divergent integral.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum AnalyticRule {
    /// `theta^{1/x} >= 1/2 + 1/x` on `(0, x0)`, and `int_0 1/x dx = inf`.
    /// `t_star = 1/x0` satisfies `theta^t* - t* > 1/2` and `theta^t* ln theta >= 1`.
    ReciprocalBlowup { theta: f64, x0: f64, t_star: f64 },
    /// Catalog steps with `|scale| >= 1`: the `n`-th step integral is at least
    /// `1/(n+1)` for `n >= first`, a harmonic tail.
    HarmonicStepsLowerBound { scale: f64, first: u64 },
}

impl AnalyticRule {
    pub fn id(&self) -> &'static str {
        match self {
            AnalyticRule::ReciprocalBlowup { .. } => "reciprocal-blowup",
            AnalyticRule::HarmonicStepsLowerBound { .. } => "harmonic-steps-lower-bound",
        }
    }
}

/// A machine-checkable reason a modular is `+inf`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DivergenceCertificate {
    /// Terms with indices `first..=last` are all `>= delta` (and nondecreasing
    /// when flagged); the same bound holds for every later index.
    TermsBounded { first: u64, last: u64, delta: f64, nondecreasing: bool },
    /// Cauchy-condensed terms `2^j t_{2^j}` of a nonincreasing tail are
    /// nondecreasing and `>= delta` for levels `first_level..=last_level`.
    CondensedTermsBounded { first_level: u32, last_level: u32, delta: f64 },
    /// A single term (or cell integrand) has `log > cap`.
    OverflowCap { location: f64, log_term: f64, cap: f64 },
    AnalyticComparison(AnalyticRule),
}

impl DivergenceCertificate {
    pub fn label(&self) -> &'static str {
        match self {
            DivergenceCertificate::TermsBounded { .. } => "terms-eventually-nondecreasing-and-bounded-below",
            DivergenceCertificate::CondensedTermsBounded { .. } => "condensed-terms-bounded-below",
            DivergenceCertificate::OverflowCap { .. } => "overflow-cap-exceeded",
            DivergenceCertificate::AnalyticComparison(_) => "analytic-comparison",
        }
    }
}

/// A value in `[0, inf]` together with how it was certified.
#[derive(Debug, Clone, PartialEq)]
pub enum ModularValue {
    Finite { value: f64, abs_err: f64 },
    Infinite(DivergenceCertificate),
    /// Neither finiteness nor divergence could be certified; `lower_bound`
    /// is a certified partial sum.
    Indeterminate { lower_bound: f64, reason: String },
}

impl ModularValue {
    pub fn zero() -> Self {
        ModularValue::Finite { value: 0.0, abs_err: 0.0 }
    }

    pub fn finite(value: f64, abs_err: f64) -> Self {
        debug_assert!(value >= 0.0 && abs_err >= 0.0);
        ModularValue::Finite { value, abs_err }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, ModularValue::Finite { .. })
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, ModularValue::Infinite(_))
    }

    pub fn is_indeterminate(&self) -> bool {
        matches!(self, ModularValue::Indeterminate { .. })
    }

    /// The finite value, if any.
    pub fn value(&self) -> Option<f64> {
        match self {
            ModularValue::Finite { value, .. } => Some(*value),
            _ => None,
        }
    }

    pub fn abs_err(&self) -> Option<f64> {
        match self {
            ModularValue::Finite { abs_err, .. } => Some(*abs_err),
            _ => None,
        }
    }

    pub fn certificate(&self) -> Option<&DivergenceCertificate> {
        match self {
            ModularValue::Infinite(c) => Some(c),
            _ => None,
        }
    }

    /// Largest value consistent with the verdict.
    pub fn upper_bound(&self) -> f64 {
        match self {
            ModularValue::Finite { value, abs_err } => value + abs_err,
            _ => f64::INFINITY,
        }
    }

    pub fn lower_bound(&self) -> f64 {
        match self {
            ModularValue::Finite { value, abs_err } => (value - abs_err).max(0.0),
            ModularValue::Infinite(_) => f64::INFINITY,
            ModularValue::Indeterminate { lower_bound, .. } => *lower_bound,
        }
    }

    /// Whether the modular exceeds `threshold`; `None` when undecidable.
    pub fn exceeds(&self, threshold: f64) -> Option<bool> {
        match self {
            ModularValue::Finite { value, .. } => Some(*value > threshold),
            ModularValue::Infinite(_) => Some(true),
            ModularValue::Indeterminate { lower_bound, .. } => {
                if *lower_bound > threshold {
                    Some(true)
                } else {
                    None
                }
            }
        }
    }

    /// The value as an extended real (`inf` for divergent, NaN for indeterminate).
    pub fn as_extended(&self) -> f64 {
        match self {
            ModularValue::Finite { value, .. } => *value,
            ModularValue::Infinite(_) => f64::INFINITY,
            ModularValue::Indeterminate { .. } => f64::NAN,
        }
    }
}

impl Serialize for ModularValue {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(None)?;
        match self {
            ModularValue::Finite { value, abs_err } => {
                m.serialize_entry("verdict", "finite")?;
                m.serialize_entry("value", value)?;
                m.serialize_entry("abs_err", abs_err)?;
            }
            ModularValue::Infinite(c) => {
                m.serialize_entry("verdict", "infinite")?;
                m.serialize_entry("value", "inf")?;
                m.serialize_entry("certificate", c)?;
            }
            ModularValue::Indeterminate { lower_bound, reason } => {
                m.serialize_entry("verdict", "indeterminate")?;
                m.serialize_entry("lower_bound", lower_bound)?;
                m.serialize_entry("reason", reason)?;
            }
        }
        m.end()
    }
}

/// Serializes an extended real, writing `+inf` as the string `"inf"`.
pub fn serialize_extended<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if *v == f64::INFINITY {
        s.serialize_str("inf")
    } else {
        s.serialize_f64(*v)
    }
}

/// Running sum of finite parts with an absolute error budget.
#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct Accumulator {
    pub sum: f64,
    pub err: f64,
}

impl Accumulator {
    pub fn add(&mut self, value: f64, err: f64) {
        self.sum += value;
        self.err += err + f64::EPSILON * value.abs();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn infinite_serializes_as_string_with_certificate() {
        let v = ModularValue::Infinite(DivergenceCertificate::TermsBounded {
            first: 3,
            last: 10,
            delta: 1.0,
            nondecreasing: true,
        });
        let j = serde_json::to_value(&v).unwrap();
        assert_eq!(j["value"], "inf");
        assert_eq!(j["certificate"]["kind"], "terms-bounded");
    }

    #[test]
    fn exceeds_never_guesses_on_indeterminate() {
        let v = ModularValue::Indeterminate { lower_bound: 0.5, reason: "slow".into() };
        assert_eq!(v.exceeds(1.0), None);
        assert_eq!(v.exceeds(0.25), Some(true));
    }
}
