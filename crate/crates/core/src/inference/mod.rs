//! Outcome measurement, relative treatment effects, and the statistical
//! testing suite.

mod fdr;
mod outcomes;
mod report;
mod rte;
mod stats;

pub use fdr::{fdr_adjust, fdr_adjust_with_alpha};
pub use outcomes::{
    measure_outcomes, standard_outcomes, MeasurementResources, OutcomeCategory, OutcomeKind,
    OutcomeMatrix, OutcomeRow, OutcomeSpec,
};
pub use report::{estimate_effects, significance_stars, OutcomeReport};
pub use rte::{relative_treatment_effect, RteEstimate};
pub use stats::{cohens_d, cohens_kappa, ks_two_sample, t_test, welch_t_test, TTestResult};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum InferenceError {
    #[error("{test} requires at least {min} values per sample")]
    SampleTooSmall { test: &'static str, min: usize },
    #[error("samples must be non-empty")]
    EmptySample,
    #[error("rater label lists must have equal, non-zero length")]
    LabelLengthMismatch,
    #[error("outcome rows carry no stratum assignments; measure with a stratification first")]
    MissingStrata,
}
