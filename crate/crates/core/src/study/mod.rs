//! End-to-end study runs: pipeline orchestration, artifacts, reports.

mod pipeline;

pub use pipeline::{run_cohort_study, FeatureResources, StudyError, StudyOutput};
