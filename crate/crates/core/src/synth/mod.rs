//! Synthetic cohort generator with known ground truth.
//!
//! Each individual carries a latent trait; treatment assignment odds
//! depend on the trait through `confounder_strength` (inducing
//! pre-matching covariate imbalance) and content/behavior rates depend on
//! it through `outcome_confounding` (biasing naive group comparisons).
//! Injected effects multiply the post-anchor generation rates of
//! treatment members, so the true relative treatment effect of an
//! injected outcome equals the injected factor by construction.

mod generator;
mod vocab;

pub use generator::{generate_records, SynthCohort};
pub use vocab::{
    build_classifiers, build_embeddings, build_lexicon, SYMPTOM_LABELS,
};

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{ResourcePaths, StudyConfig, StudyInputs, StudyParams};
use crate::corpus::{AuthorId, Group, IndividualRecord, PostId};

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("infeasible synthetic spec: {0}")]
    Infeasible(String),
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Feature(#[from] crate::text_features::FeatureError),
}

/// Outcomes the generator can inject a multiplicative effect on.
pub const INJECTABLE_OUTCOMES: [&str; 7] = [
    "liwc_affect",
    "anxiety",
    "depression",
    "stress",
    "suicidal_ideation",
    "activity",
    "interactivity",
];

fn default_n_treatment() -> usize {
    500
}
fn default_n_control() -> usize {
    1500
}
fn default_confounder_strength() -> f64 {
    1.0
}
fn default_outcome_confounding() -> f64 {
    0.5
}
fn default_synth_seed() -> u64 {
    7
}
fn default_period_days() -> u32 {
    21
}
fn default_window_days() -> u32 {
    14
}
fn default_rate_ln_mean() -> f64 {
    0.1
}
fn default_rate_ln_sd() -> f64 {
    0.3
}
fn default_reply_prob() -> f64 {
    0.4
}
fn default_affect_rate() -> f64 {
    0.07
}
fn default_symptom_rates() -> BTreeMap<String, f64> {
    [
        ("anxiety", 0.18),
        ("depression", 0.22),
        ("stress", 0.30),
        ("suicidal_ideation", 0.15),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SynthSpec {
    #[serde(default = "default_n_treatment")]
    pub n_treatment: usize,
    #[serde(default = "default_n_control")]
    pub n_control: usize,
    /// Latent-trait coefficient in the treatment-assignment log-odds.
    #[serde(default = "default_confounder_strength")]
    pub confounder_strength: f64,
    /// Latent-trait coefficient in the log content/behavior rates.
    #[serde(default = "default_outcome_confounding")]
    pub outcome_confounding: f64,
    /// Outcome name to multiplicative effect on post-anchor generation.
    #[serde(default)]
    pub effect_map: BTreeMap<String, f64>,
    #[serde(default = "default_synth_seed")]
    pub seed: u64,
    /// Span of treatment anchor dates, in days.
    #[serde(default = "default_period_days")]
    pub period_days: u32,
    /// Generation horizon around anchors; match the study window.
    #[serde(default = "default_window_days")]
    pub window_days: u32,
    /// Log-normal posting-rate distribution (posts per day).
    #[serde(default = "default_rate_ln_mean")]
    pub posting_rate_ln_mean: f64,
    #[serde(default = "default_rate_ln_sd")]
    pub posting_rate_ln_sd: f64,
    /// Baseline probability that a post is a reply.
    #[serde(default = "default_reply_prob")]
    pub reply_prob: f64,
    /// Baseline per-token probability of an affect word.
    #[serde(default = "default_affect_rate")]
    pub affect_rate: f64,
    /// Baseline per-post probability of each symptomatic expression.
    #[serde(default = "default_symptom_rates")]
    pub symptom_rates: BTreeMap<String, f64>,
}

impl Default for SynthSpec {
    fn default() -> Self {
        toml::from_str("").expect("defaults are valid")
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<(), SynthError> {
        if self.n_treatment == 0 || self.n_control == 0 {
            return Err(SynthError::Infeasible("cohort counts must be positive".into()));
        }
        if self.period_days == 0 || self.window_days == 0 {
            return Err(SynthError::Infeasible("period and window must be positive".into()));
        }
        if !self.posting_rate_ln_mean.is_finite() || self.posting_rate_ln_sd < 0.0 {
            return Err(SynthError::Infeasible("bad posting-rate distribution".into()));
        }
        if self.posting_rate_ln_mean.exp() <= 0.0 {
            return Err(SynthError::Infeasible("zero posting rate".into()));
        }
        if !(0.0 < self.reply_prob && self.reply_prob < 1.0) {
            return Err(SynthError::Infeasible("reply_prob must lie in (0, 1)".into()));
        }
        if !(0.0 < self.affect_rate && self.affect_rate < 0.5) {
            return Err(SynthError::Infeasible("affect_rate must lie in (0, 0.5)".into()));
        }
        for (label, rate) in &self.symptom_rates {
            if !SYMPTOM_LABELS.contains(&label.as_str()) {
                return Err(SynthError::Infeasible(format!("unknown symptom label {label}")));
            }
            if !(0.0 < *rate && *rate < 1.0) {
                return Err(SynthError::Infeasible(format!(
                    "symptom rate for {label} must lie in (0, 1)"
                )));
            }
        }
        for (outcome, effect) in &self.effect_map {
            if !INJECTABLE_OUTCOMES.contains(&outcome.as_str()) {
                return Err(SynthError::Infeasible(format!(
                    "effect on {outcome} is not injectable; supported: {INJECTABLE_OUTCOMES:?}"
                )));
            }
            if !(*effect > 0.0) {
                return Err(SynthError::Infeasible(format!(
                    "effect on {outcome} must be positive"
                )));
            }
        }
        Ok(())
    }

    pub fn effect(&self, outcome: &str) -> f64 {
        self.effect_map.get(outcome).copied().unwrap_or(1.0)
    }
}

/// What the generator knows and the pipeline is supposed to recover.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroundTruth {
    pub effects: BTreeMap<String, f64>,
    pub confounder_strength: f64,
    pub outcome_confounding: f64,
    pub seed: u64,
    pub story_ids: Vec<PostId>,
    /// Per-individual latent traits.
    pub traits: Vec<TraitRow>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraitRow {
    pub author_id: AuthorId,
    pub group: Group,
    pub latent_trait: f64,
}

/// Paths of everything `generate_cohort` wrote.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SynthFiles {
    pub treatment_timelines: PathBuf,
    pub treatment_individuals: PathBuf,
    pub control_timelines: PathBuf,
    pub control_individuals: PathBuf,
    pub story_ids: PathBuf,
    pub manifest: PathBuf,
    pub lexicon: PathBuf,
    pub embeddings: PathBuf,
    pub classifiers: Vec<PathBuf>,
    pub study_config: PathBuf,
}

fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<(), SynthError> {
    let mut out = String::new();
    for item in items {
        out.push_str(&serde_json::to_string(item).expect("serializable synth record"));
        out.push('\n');
    }
    fs::File::create(path)
        .and_then(|mut f| f.write_all(out.as_bytes()))
        .map_err(|source| SynthError::Io {
            path: path.display().to_string(),
            source,
        })
}

#[derive(Serialize)]
struct MetadataOut<'a> {
    author_id: &'a AuthorId,
    n_posts: u64,
    n_likes: u64,
    n_followers: u64,
    n_followees: u64,
    account_created: chrono::DateTime<chrono::Utc>,
}

fn metadata_row(record: &IndividualRecord) -> MetadataOut<'_> {
    MetadataOut {
        author_id: &record.author_id,
        n_posts: record.n_posts,
        n_likes: record.n_likes,
        n_followers: record.n_followers,
        n_followees: record.n_followees,
        account_created: record.account_created,
    }
}

/// Study parameters sized to a synthetic cohort: enough strata for
/// resolution, small enough that middle strata clear the minimum size.
pub fn suggested_params(spec: &SynthSpec) -> StudyParams {
    StudyParams {
        window_days: spec.window_days,
        n_strata: (spec.n_treatment / 100).clamp(8, 50),
        min_stratum_size: 50.min((spec.n_treatment / 10).max(10)),
        top_k_unigrams: 30,
        rng_seed: spec.seed,
        ..StudyParams::default()
    }
}

/// Generate the cohort and write every file a study run needs: timelines
/// and metadata for both groups, the story-id list, measurement
/// resources, a ready-to-run study config, and the ground-truth manifest.
pub fn generate_cohort(spec: &SynthSpec, dir: &Path) -> Result<SynthFiles, SynthError> {
    let cohort = generate_records(spec)?;
    fs::create_dir_all(dir).map_err(|source| SynthError::Io {
        path: dir.display().to_string(),
        source,
    })?;

    let files = SynthFiles {
        treatment_timelines: dir.join("treatment_timelines.jsonl"),
        treatment_individuals: dir.join("treatment_individuals.jsonl"),
        control_timelines: dir.join("control_timelines.jsonl"),
        control_individuals: dir.join("control_individuals.jsonl"),
        story_ids: dir.join("story_ids.txt"),
        manifest: dir.join("manifest.toml"),
        lexicon: dir.join("lexicon.txt"),
        embeddings: dir.join("embeddings.txt"),
        classifiers: SYMPTOM_LABELS
            .iter()
            .map(|l| dir.join(format!("classifier_{l}.txt")))
            .collect(),
        study_config: dir.join("study_config.toml"),
    };

    let posts_of = |records: &[IndividualRecord]| -> Vec<crate::corpus::Post> {
        records.iter().flat_map(|r| r.timeline.iter().cloned()).collect()
    };
    write_jsonl(&files.treatment_timelines, &posts_of(&cohort.treatment))?;
    write_jsonl(&files.control_timelines, &posts_of(&cohort.control))?;
    let meta_t: Vec<MetadataOut> = cohort.treatment.iter().map(metadata_row).collect();
    let meta_c: Vec<MetadataOut> = cohort.control.iter().map(metadata_row).collect();
    write_jsonl(&files.treatment_individuals, &meta_t)?;
    write_jsonl(&files.control_individuals, &meta_c)?;

    let mut story_list = String::from("# synthetic story posts\n");
    for id in &cohort.truth.story_ids {
        story_list.push_str(&id.0);
        story_list.push('\n');
    }
    fs::write(&files.story_ids, story_list).map_err(|source| SynthError::Io {
        path: files.story_ids.display().to_string(),
        source,
    })?;

    write_lexicon_file(&files.lexicon)?;
    build_embeddings().write_to(&files.embeddings)?;
    for (model, path) in build_classifiers().iter().zip(&files.classifiers) {
        model.write_to(path)?;
    }

    let study_config = StudyConfig {
        study: suggested_params(spec),
        inputs: StudyInputs {
            treatment_timelines: files.treatment_timelines.clone(),
            treatment_individuals: files.treatment_individuals.clone(),
            control_timelines: files.control_timelines.clone(),
            control_individuals: files.control_individuals.clone(),
            story_ids: Some(files.story_ids.clone()),
            story_candidates: None,
            keywords_a: Vec::new(),
            keywords_b: Vec::new(),
        },
        resources: ResourcePaths {
            lexicon: files.lexicon.clone(),
            embeddings: files.embeddings.clone(),
            classifiers: files.classifiers.clone(),
        },
        synth: Some(spec.clone()),
    };
    fs::write(&files.study_config, study_config.to_toml()).map_err(|source| SynthError::Io {
        path: files.study_config.display().to_string(),
        source,
    })?;

    let manifest = toml::to_string_pretty(&cohort.truth).expect("manifest serializes");
    fs::write(&files.manifest, manifest).map_err(|source| SynthError::Io {
        path: files.manifest.display().to_string(),
        source,
    })?;

    Ok(files)
}

fn write_lexicon_file(path: &Path) -> Result<(), SynthError> {
    let lexicon = build_lexicon();
    let mut out = String::new();
    for cat in lexicon.categories() {
        out.push_str(&format!("%category {}\n", cat.name));
        for pattern in &cat.patterns {
            out.push_str(pattern);
            out.push('\n');
        }
    }
    fs::write(path, out).map_err(|source| SynthError::Io {
        path: path.display().to_string(),
        source,
    })
}
