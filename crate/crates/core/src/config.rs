//! Study configuration.
//!
//! One TOML file holds every knob of a study run: `[study]` for the
//! numeric parameters, `[inputs]` for the cohort files, `[resources]` for
//! lexicon/embedding/classifier paths, and an optional `[synth]` section
//! consumed by the synthetic-cohort generator. CLI flags and environment
//! variables override file values.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::synth::SynthSpec;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot parse config {path}: {source}")]
    Parse {
        path: String,
        #[source]
        source: Box<toml::de::Error>,
    },
    #[error("invalid config: {0}")]
    Invalid(String),
}

/// How report p-values are passed through the multiple-testing correction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum FdrScope {
    /// Adjust only the lexicon-category outcomes as one family.
    #[default]
    Liwc,
    /// Adjust every outcome in the table as one family.
    All,
}

/// Corpus used for the topic-diversity centroid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum DiversityScope {
    /// One centroid per group (treatment corpus, control corpus).
    #[default]
    Group,
    /// One centroid per (stratum, group) cell.
    Stratum,
}

fn default_window_days() -> u32 {
    14
}
fn default_n_strata() -> usize {
    50
}
fn default_trim_sd() -> f64 {
    2.0
}
fn default_min_stratum_size() -> usize {
    50
}
fn default_smd_threshold() -> f64 {
    0.2
}
fn default_top_k_unigrams() -> usize {
    100
}
fn default_seed() -> u64 {
    42
}
fn default_l2_penalty() -> f64 {
    1.0
}
fn default_min_pre_posts() -> usize {
    1
}
fn default_fdr_alpha() -> f64 {
    0.05
}
fn default_true() -> bool {
    true
}

/// The numeric knobs of a cohort study.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StudyParams {
    /// Observation-window length on each side of the anchor, in days.
    #[serde(default = "default_window_days")]
    pub window_days: u32,
    /// Number of equal-width propensity strata.
    #[serde(default = "default_n_strata")]
    pub n_strata: usize,
    /// Propensity trimming: keep scores within `mean ± trim_sd · sd`.
    #[serde(default = "default_trim_sd")]
    pub trim_sd: f64,
    /// Minimum individuals of each group per retained stratum.
    #[serde(default = "default_min_stratum_size")]
    pub min_stratum_size: usize,
    /// Balance passes when the maximum matched SMD is below this.
    #[serde(default = "default_smd_threshold")]
    pub smd_threshold: f64,
    /// Size of the unigram covariate family.
    #[serde(default = "default_top_k_unigrams")]
    pub top_k_unigrams: usize,
    /// Root seed; every stage draws from a named sub-stream of it.
    #[serde(default = "default_seed")]
    pub rng_seed: u64,
    /// L2 penalty of the propensity model, on the mean log-likelihood
    /// scale so fits are invariant under sample duplication.
    #[serde(default = "default_l2_penalty")]
    pub l2_penalty: f64,
    /// Individuals with fewer pre-window posts are excluded from matching.
    #[serde(default = "default_min_pre_posts")]
    pub min_pre_posts: usize,
    /// Use Welch's t-test instead of the pooled-variance test.
    #[serde(default)]
    pub welch_t: bool,
    /// Center outcome samples by stratum before testing, so significance
    /// reflects the matched comparison rather than cross-strata
    /// composition differences.
    #[serde(default = "default_true")]
    pub center_t_by_stratum: bool,
    #[serde(default)]
    pub fdr_scope: FdrScope,
    #[serde(default = "default_fdr_alpha")]
    pub fdr_alpha: f64,
    #[serde(default)]
    pub diversity_scope: DiversityScope,
}

impl Default for StudyParams {
    fn default() -> Self {
        toml::from_str("").expect("defaults are valid")
    }
}

impl StudyParams {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = [
            ("window_days", self.window_days as f64),
            ("n_strata", self.n_strata as f64),
            ("trim_sd", self.trim_sd),
            ("min_stratum_size", self.min_stratum_size as f64),
            ("smd_threshold", self.smd_threshold),
            ("top_k_unigrams", self.top_k_unigrams as f64),
            ("l2_penalty", self.l2_penalty),
            ("fdr_alpha", self.fdr_alpha),
        ];
        for (name, value) in positive {
            if !(value > 0.0) {
                return Err(ConfigError::Invalid(format!("{name} must be strictly positive")));
            }
        }
        Ok(())
    }
}

/// Cohort input files.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct StudyInputs {
    pub treatment_timelines: PathBuf,
    pub treatment_individuals: PathBuf,
    pub control_timelines: PathBuf,
    pub control_individuals: PathBuf,
    /// Externally produced story-post id list (one id per line).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub story_ids: Option<PathBuf>,
    /// Candidate story posts to run through the keyword pre-filter.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub story_candidates: Option<PathBuf>,
    /// Conjunctive phrase sets for the candidate pre-filter.
    #[serde(default)]
    pub keywords_a: Vec<String>,
    #[serde(default)]
    pub keywords_b: Vec<String>,
}

/// Lexicon, embedding, and classifier weight files.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ResourcePaths {
    pub lexicon: PathBuf,
    pub embeddings: PathBuf,
    /// One weights file per symptomatic-expression label.
    #[serde(default)]
    pub classifiers: Vec<PathBuf>,
}

/// Full study configuration as read from one TOML file.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct StudyConfig {
    #[serde(default)]
    pub study: StudyParams,
    #[serde(default)]
    pub inputs: StudyInputs,
    #[serde(default)]
    pub resources: ResourcePaths,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub synth: Option<SynthSpec>,
}

impl StudyConfig {
    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let mut cfg: StudyConfig = toml::from_str(&text).map_err(|source| ConfigError::Parse {
            path: path.display().to_string(),
            source: Box::new(source),
        })?;
        cfg.study.validate()?;
        // Relative paths resolve against the config file's directory.
        if let Some(base) = path.parent() {
            cfg.resolve_paths(base);
        }
        Ok(cfg)
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if !p.as_os_str().is_empty() && p.is_relative() {
                *p = base.join(&p);
            }
        };
        fix(&mut self.inputs.treatment_timelines);
        fix(&mut self.inputs.treatment_individuals);
        fix(&mut self.inputs.control_timelines);
        fix(&mut self.inputs.control_individuals);
        if let Some(p) = self.inputs.story_ids.as_mut() {
            fix(p);
        }
        if let Some(p) = self.inputs.story_candidates.as_mut() {
            fix(p);
        }
        fix(&mut self.resources.lexicon);
        fix(&mut self.resources.embeddings);
        for p in self.resources.classifiers.iter_mut() {
            fix(p);
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_study_conventions() {
        let p = StudyParams::default();
        assert_eq!(p.window_days, 14);
        assert_eq!(p.n_strata, 50);
        assert_eq!(p.trim_sd, 2.0);
        assert_eq!(p.min_stratum_size, 50);
        assert_eq!(p.smd_threshold, 0.2);
        assert_eq!(p.top_k_unigrams, 100);
        assert!(p.center_t_by_stratum);
    }

    #[test]
    fn zero_valued_knob_is_rejected() {
        let mut p = StudyParams::default();
        p.trim_sd = 0.0;
        assert!(p.validate().is_err());
    }

    #[test]
    fn file_round_trip_with_overridden_values() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("study.toml");
        std::fs::write(
            &path,
            r#"
[study]
n_strata = 20
rng_seed = 7

[inputs]
treatment_timelines = "t.jsonl"
treatment_individuals = "ti.jsonl"
control_timelines = "c.jsonl"
control_individuals = "ci.jsonl"

[resources]
lexicon = "lex.txt"
embeddings = "emb.txt"
classifiers = ["dep.txt"]
"#,
        )
        .unwrap();
        let cfg = StudyConfig::from_path(&path).unwrap();
        assert_eq!(cfg.study.n_strata, 20);
        assert_eq!(cfg.study.window_days, 14);
        assert_eq!(cfg.inputs.treatment_timelines, dir.path().join("t.jsonl"));
        assert_eq!(cfg.resources.classifiers[0], dir.path().join("dep.txt"));
    }
}
