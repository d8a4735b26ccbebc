//! Certified computations in variable-exponent modular spaces `l^(p_n)` and `L^{p(.)}`.
//!
//! * [`modular`] evaluates `rho(x)` with finite / infinite / indeterminate verdicts.
//! * [`luxemburg`] solves for the Luxemburg norm and Minkowski functionals.
//! * [`diagnostics`] decides Delta2 / right-continuity, builds failure witnesses and
//!   reproduces the counterexample registry.
//! * [`dirichlet`] minimizes a discrete variable-exponent Dirichlet energy.
//! * [`cli`] is the batch front end used by the `modtop` binary.

pub mod cli;
pub mod diagnostics;
pub mod dirichlet;
pub mod error;
pub mod exponent;
pub mod function;
pub mod luxemburg;
pub mod modular;
pub mod sequence;

pub use error::{ModtopError, Result};
pub use exponent::ExponentSpec;
pub use function::PiecewiseFunction;
pub use modular::{modular, Element, EvalConfig, ModularValue};
pub use sequence::SequenceVec;
