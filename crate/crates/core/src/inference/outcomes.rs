//! Psychosocial outcome measurement over post-windows.
//!
//! Outcomes fall into the affective / behavioral / cognitive grouping.
//! Lexicon proportions and the readability / complexity / repeatability
//! measures are computed over the concatenation of an individual's
//! post-window posts; symptomatic measures are per-post classification
//! proportions; activity and interactivity come from post counts; topic
//! diversity is the mean cosine distance of the individual's post vectors
//! from the corpus centroid of their group (or stratum-group cell).

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cohort::Stratification;
use crate::config::{DiversityScope, StudyParams};
use crate::corpus::{AuthorId, Group, IndividualRecord};
use crate::text_features::{
    complexity, corpus_centroid, lexicon_proportion, ngram_features, readability_cli,
    repeatability, tokenize, EmbeddingTable, Lexicon, LinearTextModel, TokenizedText,
};

/// Table grouping of an outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutcomeCategory {
    Affective,
    Behavioral,
    Cognitive,
}

impl fmt::Display for OutcomeCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OutcomeCategory::Affective => f.write_str("affective"),
            OutcomeCategory::Behavioral => f.write_str("behavioral"),
            OutcomeCategory::Cognitive => f.write_str("cognitive"),
        }
    }
}

/// The measurement behind an outcome.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum OutcomeKind {
    /// Proportion of post-window tokens in a lexicon category.
    LexiconProportion(String),
    /// Proportion of post-window posts flagged by a symptomatic
    /// classifier label.
    Symptom(String),
    /// Posts per day over the post-window.
    Activity,
    /// Replies per original (non-reply) post in the post-window.
    Interactivity,
    /// Mean cosine distance from the corpus centroid.
    TopicDiversity,
    Readability,
    Complexity,
    Repeatability,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutcomeSpec {
    pub name: String,
    pub category: OutcomeCategory,
    pub kind: OutcomeKind,
}

/// Lexicon categories reported as cognitive outcomes when present.
const AGGREGATE_CATEGORIES: &[&str] = &[
    "cognition_perception",
    "social_context",
    "lexical_density_awareness",
    "interpersonal_focus",
    "temporal_references",
];

/// The standard outcome battery: affect words, one symptomatic outcome
/// per classifier label, activity, interactivity, topic diversity,
/// readability, complexity, repeatability, and the aggregated lexicon
/// categories found in the lexicon.
pub fn standard_outcomes(lexicon: &Lexicon, models: &[LinearTextModel]) -> Vec<OutcomeSpec> {
    let mut specs = Vec::new();
    if lexicon.category("affect").is_some() {
        specs.push(OutcomeSpec {
            name: "liwc_affect".into(),
            category: OutcomeCategory::Affective,
            kind: OutcomeKind::LexiconProportion("affect".into()),
        });
    }
    for model in models {
        specs.push(OutcomeSpec {
            name: model.label.clone(),
            category: OutcomeCategory::Affective,
            kind: OutcomeKind::Symptom(model.label.clone()),
        });
    }
    specs.push(OutcomeSpec {
        name: "activity".into(),
        category: OutcomeCategory::Behavioral,
        kind: OutcomeKind::Activity,
    });
    specs.push(OutcomeSpec {
        name: "interactivity".into(),
        category: OutcomeCategory::Behavioral,
        kind: OutcomeKind::Interactivity,
    });
    specs.push(OutcomeSpec {
        name: "topic_diversity".into(),
        category: OutcomeCategory::Behavioral,
        kind: OutcomeKind::TopicDiversity,
    });
    specs.push(OutcomeSpec {
        name: "readability".into(),
        category: OutcomeCategory::Cognitive,
        kind: OutcomeKind::Readability,
    });
    specs.push(OutcomeSpec {
        name: "complexity".into(),
        category: OutcomeCategory::Cognitive,
        kind: OutcomeKind::Complexity,
    });
    specs.push(OutcomeSpec {
        name: "repeatability".into(),
        category: OutcomeCategory::Cognitive,
        kind: OutcomeKind::Repeatability,
    });
    for &cat in AGGREGATE_CATEGORIES {
        if lexicon.category(cat).is_some() {
            specs.push(OutcomeSpec {
                name: format!("liwc_{cat}"),
                category: OutcomeCategory::Cognitive,
                kind: OutcomeKind::LexiconProportion(cat.into()),
            });
        }
    }
    specs
}

/// Read-only measurement inputs.
pub struct MeasurementResources<'a> {
    pub lexicon: &'a Lexicon,
    pub models: &'a [LinearTextModel],
    pub embeddings: &'a EmbeddingTable,
}

/// One individual's outcome values; `None` marks measures undefined for
/// that individual (excluded from aggregation for that outcome only).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OutcomeRow {
    pub author_id: AuthorId,
    pub group: Group,
    pub stratum: Option<usize>,
    pub values: Vec<Option<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OutcomeMatrix {
    pub specs: Vec<OutcomeSpec>,
    pub rows: Vec<OutcomeRow>,
    /// Individuals excluded from all outcomes, with the reason.
    pub excluded: Vec<(AuthorId, String)>,
}

impl OutcomeMatrix {
    pub fn spec_index(&self, name: &str) -> Option<usize> {
        self.specs.iter().position(|s| s.name == name)
    }

    /// Defined values of one outcome for one group.
    pub fn group_values(&self, outcome: usize, group: Group) -> Vec<f64> {
        self.rows
            .iter()
            .filter(|r| r.group == group)
            .filter_map(|r| r.values[outcome])
            .collect()
    }
}

struct MeasuredIndividual {
    index: usize,
    values: Vec<Option<f64>>,
    post_vectors: Vec<Vec<f64>>,
}

/// Measure every outcome for the eligible individuals.
///
/// With a stratification, only individuals in retained strata are
/// measured (the matched population); without one, every record with a
/// post-window is measured, which is what the naive unmatched comparison
/// uses. Individuals with an empty post-window are excluded outright.
pub fn measure_outcomes(
    records: &[IndividualRecord],
    strat: Option<&Stratification>,
    specs: &[OutcomeSpec],
    resources: &MeasurementResources<'_>,
    params: &StudyParams,
) -> OutcomeMatrix {
    let mut excluded = Vec::new();
    let mut eligible: Vec<(&IndividualRecord, Option<usize>)> = Vec::new();
    for record in records {
        let stratum = match strat {
            Some(s) => match s.retained_stratum_of(&record.author_id) {
                Some(stratum) => Some(stratum),
                None => continue, // trimmed or unretained: not part of the matched cohort
            },
            None => None,
        };
        if record.post_window.is_empty() {
            excluded.push((record.author_id.clone(), "empty post-window".into()));
            continue;
        }
        eligible.push((record, stratum));
    }

    let mut measured: Vec<MeasuredIndividual> = eligible
        .par_iter()
        .enumerate()
        .map(|(index, (record, _))| {
            measure_individual(index, record, specs, resources, params)
        })
        .collect();

    // Topic diversity needs corpus centroids, so it runs as a second pass
    // once every post vector is known.
    if let Some(diversity_idx) = specs.iter().position(|s| s.kind == OutcomeKind::TopicDiversity) {
        let cell_of = |m: &MeasuredIndividual| -> (Group, Option<usize>) {
            let (record, stratum) = eligible[m.index];
            match params.diversity_scope {
                DiversityScope::Group => (record.group, None),
                DiversityScope::Stratum => (record.group, stratum),
            }
        };
        let mut cells: BTreeMap<(Group, Option<usize>), Vec<Vec<f64>>> = BTreeMap::new();
        for m in &measured {
            cells.entry(cell_of(m)).or_default().extend(m.post_vectors.iter().cloned());
        }
        let centroids: BTreeMap<_, Option<Vec<f64>>> = cells
            .into_iter()
            .map(|(cell, vectors)| (cell, corpus_centroid(&vectors)))
            .collect();
        for m in measured.iter_mut() {
            let centroid = centroids.get(&cell_of(m)).and_then(|c| c.as_ref());
            m.values[diversity_idx] = match centroid {
                Some(centroid) => {
                    diversity_of_vectors(&m.post_vectors, centroid)
                }
                None => None,
            };
        }
    }

    let rows = measured
        .into_iter()
        .map(|m| {
            let (record, stratum) = eligible[m.index];
            OutcomeRow {
                author_id: record.author_id.clone(),
                group: record.group,
                stratum,
                values: m.values,
            }
        })
        .collect();

    OutcomeMatrix {
        specs: specs.to_vec(),
        rows,
        excluded,
    }
}

fn diversity_of_vectors(post_vectors: &[Vec<f64>], centroid: &[f64]) -> Option<f64> {
    let mut sum = 0.0;
    let mut n = 0usize;
    for v in post_vectors {
        let dot: f64 = v.iter().zip(centroid).map(|(a, b)| a * b).sum();
        let nv: f64 = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        let nc: f64 = centroid.iter().map(|a| a * a).sum::<f64>().sqrt();
        if nv == 0.0 || nc == 0.0 {
            continue;
        }
        sum += 1.0 - dot / (nv * nc);
        n += 1;
    }
    if n == 0 {
        None
    } else {
        Some(sum / n as f64)
    }
}

fn measure_individual(
    index: usize,
    record: &IndividualRecord,
    specs: &[OutcomeSpec],
    resources: &MeasurementResources<'_>,
    params: &StudyParams,
) -> MeasuredIndividual {
    let docs: Vec<TokenizedText> =
        record.post_window.iter().map(|p| tokenize(&p.text)).collect();
    let merged = TokenizedText::merged(&docs);
    let n_posts = record.post_window.len();

    let mut symptom_positive: BTreeMap<&str, usize> = BTreeMap::new();
    let needs_symptoms = specs.iter().any(|s| matches!(s.kind, OutcomeKind::Symptom(_)));
    if needs_symptoms {
        for doc in &docs {
            let counts = ngram_features(doc, 3);
            for model in resources.models {
                if model.classify_counts(&counts) {
                    *symptom_positive.entry(model.label.as_str()).or_insert(0) += 1;
                }
            }
        }
    }

    let post_vectors: Vec<Vec<f64>> = if specs
        .iter()
        .any(|s| s.kind == OutcomeKind::TopicDiversity)
    {
        docs.iter()
            .filter_map(|doc| resources.embeddings.post_vector(doc))
            .collect()
    } else {
        Vec::new()
    };

    let replies = record.post_window.iter().filter(|p| p.is_reply).count();
    let originals = n_posts - replies;

    let values = specs
        .iter()
        .map(|spec| match &spec.kind {
            OutcomeKind::LexiconProportion(category) => {
                lexicon_proportion(&merged, resources.lexicon, category)
            }
            OutcomeKind::Symptom(label) => {
                let positive = symptom_positive.get(label.as_str()).copied().unwrap_or(0);
                Some(positive as f64 / n_posts as f64)
            }
            OutcomeKind::Activity => {
                Some(n_posts as f64 / f64::from(params.window_days))
            }
            OutcomeKind::Interactivity => {
                if originals == 0 {
                    None
                } else {
                    Some(replies as f64 / originals as f64)
                }
            }
            OutcomeKind::TopicDiversity => None, // second pass
            OutcomeKind::Readability => readability_cli(&merged),
            OutcomeKind::Complexity => complexity(&merged),
            OutcomeKind::Repeatability => repeatability(&merged),
        })
        .collect();

    MeasuredIndividual {
        index,
        values,
        post_vectors,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::test_support::{post, record, reply};
    use crate::text_features::train_linear_model;
    use approx::assert_relative_eq;
    use chrono::{DateTime, Duration, Utc};
    use std::collections::HashMap;

    fn resources_fixture() -> (Lexicon, Vec<LinearTextModel>, EmbeddingTable) {
        let lexicon = Lexicon::new(
            "test",
            vec![("affect".into(), vec!["happy".into(), "sad".into()])],
        )
        .unwrap();
        let samples: Vec<(String, bool)> = (0..10)
            .map(|i| {
                if i % 2 == 0 {
                    ("gloomy dread awful".to_string(), true)
                } else {
                    ("garden party fun".to_string(), false)
                }
            })
            .collect();
        let models = vec![train_linear_model("gloom", &samples, 0.05, 15, 3).unwrap()];
        let mut vectors = HashMap::new();
        vectors.insert("happy".to_string(), vec![1.0, 0.0]);
        vectors.insert("sad".to_string(), vec![0.0, 1.0]);
        vectors.insert("garden".to_string(), vec![0.5, 0.5]);
        let embeddings = EmbeddingTable::new(2, vectors).unwrap();
        (lexicon, models, embeddings)
    }

    fn anchored_record(author: &str, texts: &[(&str, bool)]) -> IndividualRecord {
        let anchor: DateTime<Utc> = "2021-03-10T00:00:00Z".parse().unwrap();
        let posts: Vec<_> = texts
            .iter()
            .enumerate()
            .map(|(i, (t, is_reply))| {
                let ts = anchor + Duration::hours(i as i64 + 1);
                if *is_reply {
                    let mut p = reply(&format!("{author}-p{i}"), author, &ts.to_rfc3339(), "x");
                    p.text = t.to_string();
                    p
                } else {
                    post(&format!("{author}-p{i}"), author, &ts.to_rfc3339(), t)
                }
            })
            .collect();
        let mut r = record(author, posts.clone(), Group::Treatment);
        r.anchor_date = Some(anchor);
        r.post_window = posts;
        r
    }

    fn measure_one(rec: &IndividualRecord) -> (Vec<OutcomeSpec>, OutcomeRow) {
        let (lexicon, models, embeddings) = resources_fixture();
        let specs = standard_outcomes(&lexicon, &models);
        let resources = MeasurementResources {
            lexicon: &lexicon,
            models: &models,
            embeddings: &embeddings,
        };
        let matrix = measure_outcomes(
            std::slice::from_ref(rec),
            None,
            &specs,
            &resources,
            &StudyParams::default(),
        );
        (specs, matrix.rows.into_iter().next().unwrap())
    }

    #[test]
    fn activity_hand_arithmetic() {
        let texts: Vec<(&str, bool)> = std::iter::repeat(("hello world", false)).take(28).collect();
        let rec = anchored_record("a", &texts);
        let (specs, row) = measure_one(&rec);
        let idx = specs.iter().position(|s| s.kind == OutcomeKind::Activity).unwrap();
        assert_relative_eq!(row.values[idx].unwrap(), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn interactivity_hand_arithmetic() {
        let mut texts: Vec<(&str, bool)> = vec![("reply text", true); 6];
        texts.extend(vec![("original text", false); 3]);
        let rec = anchored_record("a", &texts);
        let (specs, row) = measure_one(&rec);
        let idx = specs.iter().position(|s| s.kind == OutcomeKind::Interactivity).unwrap();
        assert_relative_eq!(row.values[idx].unwrap(), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn interactivity_undefined_without_originals() {
        let rec = anchored_record("a", &[("reply one", true), ("reply two", true)]);
        let (specs, row) = measure_one(&rec);
        let idx = specs.iter().position(|s| s.kind == OutcomeKind::Interactivity).unwrap();
        assert!(row.values[idx].is_none());
    }

    #[test]
    fn symptom_proportion_counts_flagged_posts() {
        let rec = anchored_record(
            "a",
            &[("gloomy dread awful", false), ("garden party fun", false)],
        );
        let (specs, row) = measure_one(&rec);
        let idx = specs.iter().position(|s| s.kind == OutcomeKind::Symptom("gloom".into())).unwrap();
        assert_relative_eq!(row.values[idx].unwrap(), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn empty_post_window_is_excluded() {
        let mut rec = anchored_record("a", &[("hello", false)]);
        rec.post_window.clear();
        let (lexicon, models, embeddings) = resources_fixture();
        let specs = standard_outcomes(&lexicon, &models);
        let resources = MeasurementResources {
            lexicon: &lexicon,
            models: &models,
            embeddings: &embeddings,
        };
        let matrix = measure_outcomes(&[rec], None, &specs, &resources, &StudyParams::default());
        assert!(matrix.rows.is_empty());
        assert_eq!(matrix.excluded.len(), 1);
    }

    #[test]
    fn standard_battery_has_table_shape() {
        let (lexicon, models, _) = resources_fixture();
        let specs = standard_outcomes(&lexicon, &models);
        // affect + 1 symptom + activity/interactivity/diversity + 3 cognitive
        assert_eq!(specs.len(), 8);
        assert_eq!(specs[0].category, OutcomeCategory::Affective);
        assert!(specs.iter().any(|s| s.name == "topic_diversity"));
    }
}
