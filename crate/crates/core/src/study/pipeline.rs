//! The study pipeline over in-memory records.
//!
//! Sequencing: treatment-event extraction, placebo assignment, window
//! carving, covariates, propensity fit, stratification, balance,
//! outcome measurement, and effect estimation. File ingestion and
//! artifact emission live in the runner on top of this.

use std::collections::HashSet;
use std::path::Path;

use chrono::{DateTime, Datelike, Utc};
use rayon::prelude::*;
use thiserror::Error;

use crate::cohort::{
    balance_report, build_covariates, fit_propensity, stratify, BalanceReport, CohortError,
    CovariateSchema, CovariateVector, PropensityFit, Stratification,
};
use crate::config::{ConfigError, ResourcePaths, StudyParams};
use crate::corpus::{
    assign_placebo_dates, carve_windows, extract_treatment_event, CorpusError, IndividualRecord,
    PostId, TreatmentEvent,
};
use crate::inference::{
    estimate_effects, ks_two_sample, measure_outcomes, standard_outcomes, InferenceError,
    MeasurementResources, OutcomeMatrix, OutcomeReport, OutcomeSpec,
};
use crate::synth::SynthError;
use crate::text_features::{EmbeddingTable, FeatureError, Lexicon, LinearTextModel};

#[derive(Debug, Error)]
pub enum StudyError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Cohort(#[from] CohortError),
    #[error(transparent)]
    Inference(#[from] InferenceError),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("no treatment individual has a usable anchor event")]
    NoUsableTreatment,
    #[error(
        "covariate balance failed: max matched SMD {max:.4} is not below {threshold}; \
         rerun with --allow-imbalanced to proceed anyway"
    )]
    Imbalanced { max: f64, threshold: f64 },
    #[error("artifact {path} is missing or malformed: {detail}")]
    Artifact { path: String, detail: String },
}

impl StudyError {
    /// CLI exit code: 2 config, 4 zero retained strata, 3 other data
    /// problems.
    pub fn exit_code(&self) -> i32 {
        match self {
            StudyError::Config(_) => 2,
            StudyError::Cohort(CohortError::ZeroRetainedStrata { .. }) => 4,
            _ => 3,
        }
    }
}

/// Loaded measurement resources.
pub struct FeatureResources {
    pub lexicon: Lexicon,
    pub models: Vec<LinearTextModel>,
    pub embeddings: EmbeddingTable,
}

impl FeatureResources {
    pub fn load(paths: &ResourcePaths) -> Result<Self, StudyError> {
        let lexicon = Lexicon::from_path(&paths.lexicon)?;
        let embeddings = EmbeddingTable::from_path(&paths.embeddings)?;
        let models = paths
            .classifiers
            .iter()
            .map(|p| LinearTextModel::from_path(p))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            lexicon,
            models,
            embeddings,
        })
    }

    pub fn measurement(&self) -> MeasurementResources<'_> {
        MeasurementResources {
            lexicon: &self.lexicon,
            models: &self.models,
            embeddings: &self.embeddings,
        }
    }
}

/// Everything a finished pipeline run produced.
pub struct StudyOutput {
    pub records: Vec<IndividualRecord>,
    pub schema: CovariateSchema,
    pub vectors: Vec<CovariateVector>,
    pub fit: PropensityFit,
    pub strat: Stratification,
    pub balance: BalanceReport,
    pub specs: Vec<OutcomeSpec>,
    pub matrix: OutcomeMatrix,
    pub reports: Vec<OutcomeReport>,
    /// KS statistic between assigned placebo days and treatment days.
    pub placebo_ks: f64,
    pub diagnostics: Vec<String>,
}

fn day_number(ts: DateTime<Utc>) -> f64 {
    f64::from(ts.date_naive().num_days_from_ce())
}

/// Run the full pipeline over already-ingested records.
pub fn run_cohort_study(
    treatment: Vec<IndividualRecord>,
    control: Vec<IndividualRecord>,
    story_ids: &HashSet<PostId>,
    resources: &FeatureResources,
    params: &StudyParams,
) -> Result<StudyOutput, StudyError> {
    params.validate()?;
    let mut diagnostics = Vec::new();

    // Anchor the treatment group on its unique story replies.
    let mut anchored_treatment = Vec::with_capacity(treatment.len());
    let mut dropped_absent = 0usize;
    let mut dropped_multiple = 0usize;
    for mut record in treatment {
        match extract_treatment_event(&record, story_ids) {
            TreatmentEvent::Unique(ts) => {
                record.anchor_date = Some(ts);
                anchored_treatment.push(record);
            }
            TreatmentEvent::Absent => dropped_absent += 1,
            TreatmentEvent::Multiple(_) => dropped_multiple += 1,
        }
    }
    if anchored_treatment.is_empty() {
        return Err(StudyError::NoUsableTreatment);
    }
    if dropped_absent + dropped_multiple > 0 {
        diagnostics.push(format!(
            "treatment exclusions: {dropped_absent} without a story reply, \
             {dropped_multiple} replying to multiple stories"
        ));
    }

    let treatment_dates: Vec<DateTime<Utc>> =
        anchored_treatment.iter().filter_map(|r| r.anchor_date).collect();

    // Placebo anchors for the controls.
    let placebo = assign_placebo_dates(control, &treatment_dates, params.rng_seed)?;
    if !placebo.excluded.is_empty() {
        diagnostics.push(format!(
            "controls excluded for having no reply posts: {}",
            placebo.excluded.len()
        ));
    }
    let placebo_days: Vec<f64> = placebo
        .records
        .iter()
        .filter_map(|r| r.anchor_date)
        .map(day_number)
        .collect();
    let treatment_days: Vec<f64> = treatment_dates.iter().copied().map(day_number).collect();
    let placebo_ks = ks_two_sample(&placebo_days, &treatment_days)?;
    diagnostics.push(format!("placebo KS statistic: {placebo_ks:.4}"));

    let mut records = anchored_treatment;
    records.extend(placebo.records);
    records
        .par_iter_mut()
        .for_each(|record| carve_windows(record, params.window_days));

    // Covariates, propensity, strata, balance.
    let build = build_covariates(&records, &resources.lexicon, &resources.models, params)?;
    if !build.excluded.is_empty() {
        diagnostics.push(format!(
            "individuals excluded from matching: {}",
            build.excluded.len()
        ));
    }
    let fit = fit_propensity(&build.schema, &build.vectors, params.l2_penalty, params.rng_seed)?;
    if !fit.model.converged {
        diagnostics.push("warning: propensity fit did not converge".into());
    }
    let strat = stratify(&fit.scores, params)?;
    let (retained_t, retained_c) = strat.retained_population();
    diagnostics.push(format!(
        "retained {} strata holding {retained_t} treatment / {retained_c} control individuals",
        strat.retained_strata().len()
    ));
    let balance = balance_report(&build.schema, &build.vectors, &strat, params.smd_threshold)?;

    // Outcomes over the matched population.
    let specs = standard_outcomes(&resources.lexicon, &resources.models);
    let matrix = measure_outcomes(&records, Some(&strat), &specs, &resources.measurement(), params);
    if !matrix.excluded.is_empty() {
        diagnostics.push(format!(
            "individuals excluded from outcomes for empty post-windows: {}",
            matrix.excluded.len()
        ));
    }
    let reports = estimate_effects(&matrix, &strat, params)?;

    Ok(StudyOutput {
        records,
        schema: build.schema,
        vectors: build.vectors,
        fit,
        strat,
        balance,
        specs,
        matrix,
        reports,
        placebo_ks,
        diagnostics,
    })
}

pub(crate) fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> StudyError + '_ {
    move |source| StudyError::Io {
        path: path.display().to_string(),
        source,
    }
}
