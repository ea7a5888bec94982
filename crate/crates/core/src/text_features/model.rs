//! Linear n-gram text classifiers.
//!
//! Binary models over bag-of-n-gram counts (n = 1..3): a score is the
//! bias plus the weighted counts of known n-grams, and the decision is
//! `score > 0` (ties are negative). Production models arrive as weight
//! files; `train_linear_model` provides deterministic desk-scale training
//! for tests and stand-ins.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;

use super::{ngram_features, tokenize, FeatureError, TokenizedText};
use crate::rng::substream;

/// A binary linear model over n-gram counts.
#[derive(Debug, Clone)]
pub struct LinearTextModel {
    pub label: String,
    vocabulary: HashMap<String, usize>,
    weights: Vec<f64>,
    pub bias: f64,
}

impl LinearTextModel {
    pub fn new(
        label: impl Into<String>,
        vocabulary: HashMap<String, usize>,
        weights: Vec<f64>,
        bias: f64,
    ) -> Result<Self, FeatureError> {
        let label = label.into();
        if weights.len() != vocabulary.len() {
            return Err(FeatureError::InvalidModel(
                label,
                format!("{} weights for {} vocabulary entries", weights.len(), vocabulary.len()),
            ));
        }
        if !bias.is_finite() || weights.iter().any(|w| !w.is_finite()) {
            return Err(FeatureError::InvalidModel(label, "non-finite weight".into()));
        }
        Ok(Self {
            label,
            vocabulary,
            weights,
            bias,
        })
    }

    /// Raw decision score for precomputed n-gram counts. Unknown n-grams
    /// contribute nothing.
    pub fn score_counts(&self, counts: &HashMap<String, usize>) -> f64 {
        let mut score = self.bias;
        for (gram, &count) in counts {
            if let Some(&idx) = self.vocabulary.get(gram) {
                score += self.weights[idx] * count as f64;
            }
        }
        score
    }

    pub fn score(&self, tok: &TokenizedText) -> f64 {
        self.score_counts(&ngram_features(tok, 3))
    }

    /// Positive iff the score is strictly greater than zero.
    pub fn classify(&self, tok: &TokenizedText) -> bool {
        self.score(tok) > 0.0
    }

    pub fn classify_counts(&self, counts: &HashMap<String, usize>) -> bool {
        self.score_counts(counts) > 0.0
    }

    /// Parse the plain-text weights format: a `label <name>` line, a
    /// `bias <real>` line, then `ngram<TAB>weight` lines.
    pub fn from_path(path: &Path) -> Result<Self, FeatureError> {
        let text = fs::read_to_string(path).map_err(|source| FeatureError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let malformed = |detail: String| FeatureError::Malformed {
            what: "classifier weights",
            path: path.display().to_string(),
            detail,
        };
        let mut label: Option<String> = None;
        let mut bias: Option<f64> = None;
        let mut vocabulary = HashMap::new();
        let mut weights = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim_end();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(rest) = line.strip_prefix("label ") {
                label = Some(rest.trim().to_owned());
            } else if let Some(rest) = line.strip_prefix("bias ") {
                bias = Some(
                    rest.trim()
                        .parse()
                        .map_err(|_| malformed(format!("line {}: bad bias", lineno + 1)))?,
                );
            } else {
                let (gram, weight) = line
                    .split_once('\t')
                    .ok_or_else(|| malformed(format!("line {}: expected ngram<TAB>weight", lineno + 1)))?;
                let weight: f64 = weight
                    .trim()
                    .parse()
                    .map_err(|_| malformed(format!("line {}: bad weight", lineno + 1)))?;
                if vocabulary.insert(gram.to_owned(), weights.len()).is_some() {
                    return Err(malformed(format!("line {}: duplicate ngram {gram}", lineno + 1)));
                }
                weights.push(weight);
            }
        }
        let label = label.ok_or_else(|| malformed("missing label line".into()))?;
        let bias = bias.ok_or_else(|| malformed("missing bias line".into()))?;
        Self::new(label, vocabulary, weights, bias)
    }

    /// Write the model in the same format `from_path` reads, n-grams in
    /// sorted order so output is reproducible.
    pub fn write_to(&self, path: &Path) -> Result<(), FeatureError> {
        let mut entries: Vec<(&str, f64)> = self
            .vocabulary
            .iter()
            .map(|(g, &i)| (g.as_str(), self.weights[i]))
            .collect();
        entries.sort_by(|a, b| a.0.cmp(b.0));
        let mut out = String::new();
        out.push_str(&format!("label {}\nbias {}\n", self.label, self.bias));
        for (gram, w) in entries {
            out.push_str(&format!("{gram}\t{w}\n"));
        }
        let mut f = fs::File::create(path).map_err(|source| FeatureError::Io {
            path: path.display().to_string(),
            source,
        })?;
        f.write_all(out.as_bytes()).map_err(|source| FeatureError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn vocabulary_len(&self) -> usize {
        self.vocabulary.len()
    }
}

/// Train a binary linear model with hinge loss and L2 regularization
/// (pegasos-style SGD) over n-gram counts.
///
/// `samples` pairs each text with its class; both classes must be
/// present. Deterministic for a fixed seed: the vocabulary is built in
/// sorted order and the per-epoch shuffles come from a seeded stream.
pub fn train_linear_model(
    label: &str,
    samples: &[(String, bool)],
    regularization: f64,
    epochs: usize,
    seed: u64,
) -> Result<LinearTextModel, FeatureError> {
    if regularization <= 0.0 || epochs == 0 {
        return Err(FeatureError::BadTrainingParams);
    }
    let n_pos = samples.iter().filter(|(_, y)| *y).count();
    if n_pos == 0 || n_pos == samples.len() {
        return Err(FeatureError::SingleClass);
    }

    let docs: Vec<HashMap<String, usize>> = samples
        .iter()
        .map(|(text, _)| ngram_features(&tokenize(text), 3))
        .collect();
    let mut grams: Vec<&String> = docs.iter().flat_map(|d| d.keys()).collect();
    grams.sort_unstable();
    grams.dedup();
    let vocabulary: HashMap<String, usize> =
        grams.iter().enumerate().map(|(i, g)| ((*g).clone(), i)).collect();

    let features: Vec<Vec<(usize, f64)>> = docs
        .iter()
        .map(|doc| {
            let mut row: Vec<(usize, f64)> =
                doc.iter().map(|(g, &c)| (vocabulary[g], c as f64)).collect();
            row.sort_unstable_by_key(|&(i, _)| i);
            row
        })
        .collect();

    let lambda = regularization;
    let mut w = vec![0.0f64; vocabulary.len()];
    let mut bias = 0.0f64;
    let mut order: Vec<usize> = (0..samples.len()).collect();
    let mut rng = substream(seed, "train-shuffle");
    let mut t = 0usize;

    for _ in 0..epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            t += 1;
            // offset step size keeps the first updates bounded, which
            // matters for the unregularized bias term
            let eta = 1.0 / (lambda * t as f64 + 1.0);
            let y = if samples[i].1 { 1.0 } else { -1.0 };
            let margin = y * (features[i].iter().map(|&(j, x)| w[j] * x).sum::<f64>() + bias);
            let shrink = 1.0 - eta * lambda;
            for v in w.iter_mut() {
                *v *= shrink;
            }
            if margin < 1.0 {
                for &(j, x) in &features[i] {
                    w[j] += eta * y * x;
                }
                bias += eta * y;
            }
        }
    }

    LinearTextModel::new(label, vocabulary, w, bias)
}
