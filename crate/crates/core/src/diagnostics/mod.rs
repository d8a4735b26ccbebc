//! Delta2 and right-continuity decisions, failure witnesses, convergence
//! classification and the counterexample registry.

mod convergence;
mod delta2;
mod duality;
mod registry;
mod witnesses;

use serde::Serialize;

pub use convergence::{
    classify_convergence, truncation_density_check, ConvergenceReport, RateRow, Truncation, DEFAULT_LAMBDA_GRID,
};
pub use delta2::{
    verify_witness_scaling,
    check_delta2, delta2_failure_witness, right_continuity_probe, Delta2Verdict, Delta2Witness, RightContinuity,
    ScaledVerdict, DEFAULT_PROBE_WINDOW, WITNESS_INDEX_CAP, WITNESS_SCALES,
};
pub use duality::{check_linf_isomorphism, functional_probe, DualityReport, FamilyTrend, LinfVerdict};
pub use registry::{run_counterexample, ScenarioReport, REGISTRY};
pub use witnesses::{ball_interior_witness, compressed_two_sqrt, Approximant, BallWitness, BALL_SCENARIOS};

/// One verified inequality inside a scenario.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub label: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(label: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self { label: label.into(), passed, detail: detail.into() }
    }
}

/// A finite prefix "converges" when its last value is below `tol` and the
/// trailing half is nonincreasing.
pub(crate) fn settles_below(values: &[f64], tol: f64) -> bool {
    let Some(&last) = values.last() else { return false };
    if !(last < tol) {
        return false;
    }
    let tail = &values[values.len() / 2..];
    tail.windows(2).all(|w| w[1] <= w[0])
}
