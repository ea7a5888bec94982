//! Pre-treatment covariate assembly.
//!
//! Four families, in fixed schema order: platform metadata (posts, likes,
//! followers, followees, posting frequency), relative frequencies of the
//! top-k pooled pre-window unigrams, lexicon-category proportions, and
//! per-label symptomatic-expression proportions. All families are
//! computed from pre-window data only; values are raw measurements and
//! standardization happens inside the propensity fit.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::CohortError;
use crate::config::StudyParams;
use crate::corpus::{AuthorId, Group, IndividualRecord};
use crate::text_features::{
    lexicon_proportion, ngram_features, tokenize, Lexicon, LinearTextModel, TokenizedText,
};

/// Unigrams too common to carry matching signal, removed before the
/// top-k ranking.
const STOP_WORDS: &[&str] = &[
    "the", "a", "an", "and", "or", "but", "of", "to", "in", "on", "at", "is", "are", "was",
    "were", "be", "been", "it", "this", "that", "with", "for", "as", "by", "from", "not",
];

/// Ordered covariate names, shared by every individual in a study.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CovariateSchema {
    pub names: Vec<String>,
}

impl CovariateSchema {
    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}

/// One individual's covariate values, aligned to the schema.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CovariateVector {
    pub author_id: AuthorId,
    pub group: Group,
    pub values: Vec<f64>,
}

/// Assembled covariates plus exclusion diagnostics.
#[derive(Debug)]
pub struct CovariateBuild {
    pub schema: CovariateSchema,
    pub vectors: Vec<CovariateVector>,
    pub excluded: Vec<(AuthorId, String)>,
}

struct PreWindowFeatures {
    token_counts: HashMap<String, usize>,
    total_tokens: usize,
    lexicon_props: Vec<f64>,
    symptom_props: Vec<f64>,
    posting_frequency: f64,
}

fn pre_window_features(
    record: &IndividualRecord,
    lexicon: &Lexicon,
    models: &[LinearTextModel],
    window_days: u32,
) -> Option<PreWindowFeatures> {
    let docs: Vec<TokenizedText> =
        record.pre_window.iter().map(|p| tokenize(&p.text)).collect();
    let merged = TokenizedText::merged(&docs);
    if merged.tokens.is_empty() {
        return None;
    }

    let mut token_counts: HashMap<String, usize> = HashMap::new();
    for token in &merged.tokens {
        *token_counts.entry(token.clone()).or_insert(0) += 1;
    }

    let lexicon_props = lexicon
        .categories()
        .iter()
        .map(|cat| lexicon_proportion(&merged, lexicon, &cat.name).unwrap_or(0.0))
        .collect();

    let mut positives = vec![0usize; models.len()];
    for doc in &docs {
        let counts = ngram_features(doc, 3);
        for (i, model) in models.iter().enumerate() {
            if model.classify_counts(&counts) {
                positives[i] += 1;
            }
        }
    }
    let symptom_props = positives
        .iter()
        .map(|&p| p as f64 / record.pre_window.len() as f64)
        .collect();

    Some(PreWindowFeatures {
        total_tokens: merged.tokens.len(),
        token_counts,
        lexicon_props,
        symptom_props,
        posting_frequency: record.pre_window.len() as f64 / f64::from(window_days),
    })
}

/// Build the covariate schema and one vector per eligible individual.
///
/// Individuals with fewer than `min_pre_posts` pre-window posts, or with
/// no pre-window tokens at all, are excluded with a diagnostic. The
/// unigram family ranks tokens by pooled pre-window frequency across both
/// groups, ties broken lexicographically, stop words removed.
pub fn build_covariates(
    records: &[IndividualRecord],
    lexicon: &Lexicon,
    models: &[LinearTextModel],
    params: &StudyParams,
) -> Result<CovariateBuild, CohortError> {
    let mut excluded = Vec::new();
    let mut eligible = Vec::new();
    for record in records {
        if record.pre_window.len() < params.min_pre_posts {
            excluded.push((record.author_id.clone(), "too few pre-window posts".into()));
        } else {
            eligible.push(record);
        }
    }

    let features: Vec<(usize, Option<PreWindowFeatures>)> = eligible
        .par_iter()
        .enumerate()
        .map(|(i, record)| {
            (i, pre_window_features(record, lexicon, models, params.window_days))
        })
        .collect();

    let mut per_individual = Vec::with_capacity(eligible.len());
    for (i, feats) in features {
        let record = eligible[i];
        match feats {
            Some(f) => per_individual.push((record, f)),
            None => excluded.push((record.author_id.clone(), "empty pre-window text".into())),
        }
    }
    if per_individual.is_empty() {
        return Err(CohortError::EmptyCovariates);
    }

    let mut pooled: HashMap<&str, usize> = HashMap::new();
    for (_, f) in &per_individual {
        for (token, count) in &f.token_counts {
            *pooled.entry(token.as_str()).or_insert(0) += count;
        }
    }
    let mut ranked: Vec<(&str, usize)> = pooled
        .into_iter()
        .filter(|(token, _)| !STOP_WORDS.contains(token))
        .collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    let top_k: Vec<String> = ranked
        .into_iter()
        .take(params.top_k_unigrams)
        .map(|(token, _)| token.to_owned())
        .collect();

    let mut names = vec![
        "n_posts".to_owned(),
        "n_likes".to_owned(),
        "n_followers".to_owned(),
        "n_followees".to_owned(),
        "posting_frequency".to_owned(),
    ];
    names.extend(top_k.iter().map(|t| format!("unigram:{t}")));
    names.extend(lexicon.categories().iter().map(|c| format!("lexicon:{}", c.name)));
    names.extend(models.iter().map(|m| format!("symptom:{}", m.label)));
    let schema = CovariateSchema { names };

    let vectors = per_individual
        .into_iter()
        .map(|(record, f)| {
            let mut values = Vec::with_capacity(schema.len());
            values.push(record.n_posts as f64);
            values.push(record.n_likes as f64);
            values.push(record.n_followers as f64);
            values.push(record.n_followees as f64);
            values.push(f.posting_frequency);
            for token in &top_k {
                let count = f.token_counts.get(token).copied().unwrap_or(0);
                values.push(count as f64 / f.total_tokens as f64);
            }
            values.extend_from_slice(&f.lexicon_props);
            values.extend_from_slice(&f.symptom_props);
            CovariateVector {
                author_id: record.author_id.clone(),
                group: record.group,
                values,
            }
        })
        .collect();

    Ok(CovariateBuild {
        schema,
        vectors,
        excluded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::test_support::{post, record};
    use crate::text_features::train_linear_model;
    use approx::assert_relative_eq;
    use chrono::Duration;

    fn lexicon() -> Lexicon {
        Lexicon::new(
            "test",
            vec![("affect".into(), vec!["happy".into(), "sad".into()])],
        )
        .unwrap()
    }

    fn models() -> Vec<LinearTextModel> {
        let samples: Vec<(String, bool)> = (0..10)
            .map(|i| {
                if i % 2 == 0 {
                    ("gloomy dread".to_string(), true)
                } else {
                    ("garden party".to_string(), false)
                }
            })
            .collect();
        vec![train_linear_model("dread", &samples, 0.05, 10, 3).unwrap()]
    }

    fn windowed_record(author: &str, texts: &[&str], group: Group) -> IndividualRecord {
        let anchor: chrono::DateTime<chrono::Utc> = "2021-03-15T00:00:00Z".parse().unwrap();
        let posts: Vec<_> = texts
            .iter()
            .enumerate()
            .map(|(i, t)| {
                let ts = anchor - Duration::hours(12 * (i as i64 + 1));
                post(&format!("{author}-p{i}"), author, &ts.to_rfc3339(), t)
            })
            .collect();
        let mut r = record(author, posts.clone(), group);
        r.anchor_date = Some(anchor);
        r.pre_window = posts;
        r
    }

    fn params() -> StudyParams {
        StudyParams {
            top_k_unigrams: 3,
            ..StudyParams::default()
        }
    }

    #[test]
    fn posting_frequency_hand_arithmetic() {
        let texts: Vec<&str> = std::iter::repeat("hello world").take(28).collect();
        let rec = windowed_record("a", &texts, Group::Treatment);
        let ctl = windowed_record("b", &["happy day", "sad day"], Group::Control);
        let build = build_covariates(&[rec, ctl], &lexicon(), &models(), &params()).unwrap();
        let idx = build.schema.names.iter().position(|n| n == "posting_frequency").unwrap();
        assert_relative_eq!(build.vectors[0].values[idx], 2.0, epsilon = 1e-12);
    }

    #[test]
    fn tokens_outside_top_k_contribute_nothing() {
        let a = windowed_record("a", &["alpha alpha alpha beta beta rare"], Group::Treatment);
        let b = windowed_record("b", &["alpha beta gamma gamma"], Group::Control);
        let build = build_covariates(&[a, b], &lexicon(), &models(), &params()).unwrap();
        // top 3 by pooled count: alpha(4), beta(3), gamma(2); "rare" excluded
        assert!(build.schema.names.contains(&"unigram:alpha".into()));
        assert!(!build.schema.names.contains(&"unigram:rare".into()));
        let idx = build.schema.names.iter().position(|n| n == "unigram:alpha").unwrap();
        // individual a: 3 of its 6 pre-window tokens are "alpha"
        assert_relative_eq!(build.vectors[0].values[idx], 0.5, epsilon = 1e-12);
    }

    #[test]
    fn identical_individuals_get_identical_vectors() {
        let a = windowed_record("a", &["happy garden day", "sad river walk"], Group::Treatment);
        let b = windowed_record("b", &["happy garden day", "sad river walk"], Group::Control);
        let build = build_covariates(&[a, b], &lexicon(), &models(), &params()).unwrap();
        assert_eq!(build.vectors[0].values, build.vectors[1].values);
    }

    #[test]
    fn empty_pre_window_is_excluded() {
        let mut empty = windowed_record("a", &[], Group::Treatment);
        empty.pre_window.clear();
        let ok = windowed_record("b", &["happy day"], Group::Control);
        let build = build_covariates(&[empty, ok], &lexicon(), &models(), &params()).unwrap();
        assert_eq!(build.vectors.len(), 1);
        assert_eq!(build.excluded.len(), 1);
        assert_eq!(build.excluded[0].0 .0, "a");
    }

    #[test]
    fn schema_orders_families_deterministically() {
        let a = windowed_record("a", &["happy day"], Group::Treatment);
        let b = windowed_record("b", &["sad night"], Group::Control);
        let build = build_covariates(&[a, b], &lexicon(), &models(), &params()).unwrap();
        assert_eq!(build.schema.names[0], "n_posts");
        assert_eq!(build.schema.names[4], "posting_frequency");
        assert!(build.schema.names.last().unwrap().starts_with("symptom:"));
        for v in &build.vectors {
            assert_eq!(v.values.len(), build.schema.len());
        }
    }
}
