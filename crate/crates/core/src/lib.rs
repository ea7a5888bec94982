//! Stratified propensity-score causal-effect studies over longitudinal
//! text-post corpora.
//!
//! The crate covers the full study pipeline: timeline ingestion and cohort
//! construction ([`corpus`]), per-text linguistic measurement
//! ([`text_features`]), covariate assembly, propensity modelling and
//! stratification ([`cohort`]), outcome measurement and effect estimation
//! ([`inference`]), a synthetic-cohort generator with known ground truth
//! ([`synth`]), and the end-to-end study runner ([`study`]).

pub mod cohort;
pub mod config;
pub mod corpus;
pub mod inference;
pub mod rng;
pub mod study;
pub mod synth;
pub mod text_features;

pub use config::{StudyConfig, StudyParams};
pub use corpus::{Group, IndividualRecord, Post};
