use thiserror::Error;

/// Errors raised by the modular toolkit.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum ModtopError {
    #[error("invalid exponent: {0}")]
    InvalidExponent(String),

    #[error("nonzero constant tail is not admissible against a finite table exponent")]
    IncompatibleTail,

    #[error("vector support reaches index {index} but the table exponent has dimension {dim}")]
    DimensionExceeded { index: u64, dim: usize },

    #[error("invalid sequence: {0}")]
    InvalidSequence(String),

    #[error("invalid function: {0}")]
    InvalidFunction(String),

    #[error("domain mismatch: {0}")]
    DomainMismatch(String),

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("modular diameter of an empty set")]
    EmptySet,

    #[error("element is not in the modular space: rho(x/lambda) is infinite up to lambda = {probe_max:e}")]
    NotInModularSpace { probe_max: f64 },

    #[error("an indeterminate modular verdict at lambda = {lambda:e} blocks the norm bisection")]
    NormUncertain { lambda: f64 },

    #[error("custom exponent '{0}' lacks growth declarations and the probe is inconclusive")]
    UndeclaredGrowth(String),

    #[error("exponent is bounded; no Delta2 failure witness exists")]
    NotUnbounded,

    #[error("witness index search exceeded the cap of {cap} indices")]
    WitnessSearchExhausted { cap: u64 },

    #[error("unknown scenario '{0}'")]
    UnknownScenario(String),

    #[error("modular of the element is not finite")]
    NotFiniteModular,

    #[error("energy exponents must be >= 2, found {value} at x = {at}")]
    ExponentBelowTwo { value: f64, at: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, ModtopError>;
