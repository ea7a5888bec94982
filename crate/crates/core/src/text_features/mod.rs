//! Per-text and per-individual linguistic measurements.
//!
//! Tokenization, lexicon-category proportions, readability, complexity,
//! repeatability, n-gram features, linear text classification, and
//! embedding-based topic diversity. Everything here is a pure function
//! over immutable inputs; lexicons, models, and embedding tables are
//! read-only shared state.

mod embedding;
mod lexicon;
mod model;

pub use embedding::{corpus_centroid, topic_diversity, EmbeddingTable};
pub use lexicon::{lexicon_proportion, Lexicon, LexiconCategory};
pub use model::{train_linear_model, LinearTextModel};

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed {what} file {path}: {detail}")]
    Malformed {
        what: &'static str,
        path: String,
        detail: String,
    },
    #[error("lexicon {0}: {1}")]
    InvalidLexicon(String, String),
    #[error("model {0}: {1}")]
    InvalidModel(String, String),
    #[error("training data must contain both classes")]
    SingleClass,
    #[error("regularization and epochs must be positive")]
    BadTrainingParams,
}

/// Tokenized text: lowercased word tokens, sentence spans over the token
/// list, and the total count of alphabetic characters in the tokens.
///
/// Tokens are maximal runs of alphanumeric characters plus apostrophes
/// (runs without any alphanumeric character are dropped). Sentences split
/// on `.`, `!`, or `?` followed by whitespace or end of text; the spans
/// `(start, end)` partition the token list.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TokenizedText {
    pub tokens: Vec<String>,
    pub sentences: Vec<(usize, usize)>,
    pub letter_count: usize,
}

pub fn tokenize(text: &str) -> TokenizedText {
    let mut out = TokenizedText::default();
    let mut current = String::new();
    let mut has_alnum = false;
    let mut letters_in_current = 0usize;
    let mut sentence_start = 0usize;

    let flush = |out: &mut TokenizedText,
                 current: &mut String,
                 has_alnum: &mut bool,
                 letters: &mut usize| {
        if *has_alnum {
            out.tokens.push(std::mem::take(current));
            out.letter_count += *letters;
        } else {
            current.clear();
        }
        *has_alnum = false;
        *letters = 0;
    };

    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        if c.is_alphanumeric() || c == '\'' {
            for lc in c.to_lowercase() {
                current.push(lc);
            }
            if c.is_alphabetic() {
                letters_in_current += 1;
            }
            if c.is_alphanumeric() {
                has_alnum = true;
            }
        } else {
            flush(&mut out, &mut current, &mut has_alnum, &mut letters_in_current);
            if matches!(c, '.' | '!' | '?') {
                let at_boundary = chars.peek().map_or(true, |n| n.is_whitespace());
                if at_boundary && out.tokens.len() > sentence_start {
                    out.sentences.push((sentence_start, out.tokens.len()));
                    sentence_start = out.tokens.len();
                }
            }
        }
    }
    flush(&mut out, &mut current, &mut has_alnum, &mut letters_in_current);
    if out.tokens.len() > sentence_start {
        out.sentences.push((sentence_start, out.tokens.len()));
    }
    out
}

impl TokenizedText {
    /// Concatenate tokenizations, shifting sentence spans; used to pool an
    /// individual's window posts into one measurable document.
    pub fn merged(parts: &[TokenizedText]) -> TokenizedText {
        let mut out = TokenizedText::default();
        for part in parts {
            let offset = out.tokens.len();
            out.tokens.extend(part.tokens.iter().cloned());
            out.sentences
                .extend(part.sentences.iter().map(|&(s, e)| (s + offset, e + offset)));
            out.letter_count += part.letter_count;
        }
        out
    }
}

/// Coleman-Liau index: `0.0588 * L - 0.296 * S - 15.8` with `L` letters
/// and `S` sentences per 100 words. Undefined on empty token lists.
pub fn readability_cli(tok: &TokenizedText) -> Option<f64> {
    if tok.tokens.is_empty() {
        return None;
    }
    let words = tok.tokens.len() as f64;
    let l = 100.0 * tok.letter_count as f64 / words;
    let s = 100.0 * tok.sentences.len() as f64 / words;
    Some(0.0588 * l - 0.296 * s - 15.8)
}

/// Average words per sentence. Undefined without sentences.
pub fn complexity(tok: &TokenizedText) -> Option<f64> {
    if tok.sentences.is_empty() {
        return None;
    }
    Some(tok.tokens.len() as f64 / tok.sentences.len() as f64)
}

/// Normalized count of non-unique words: `1 - distinct/total`, in [0, 1].
pub fn repeatability(tok: &TokenizedText) -> Option<f64> {
    if tok.tokens.is_empty() {
        return None;
    }
    let distinct: HashSet<&str> = tok.tokens.iter().map(String::as_str).collect();
    Some(1.0 - distinct.len() as f64 / tok.tokens.len() as f64)
}

/// Counts of all contiguous n-grams for `n = 1..=n_max`, never crossing a
/// sentence boundary. Gram tokens are joined with `_`.
pub fn ngram_features(tok: &TokenizedText, n_max: usize) -> HashMap<String, usize> {
    let mut counts = HashMap::new();
    for &(start, end) in &tok.sentences {
        let sentence = &tok.tokens[start..end];
        for n in 1..=n_max.min(sentence.len()) {
            for gram in sentence.windows(n) {
                *counts.entry(gram.join("_")).or_insert(0) += 1;
            }
        }
    }
    counts
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn tokenize_hand_counted_example() {
        let tok = tokenize("Hello world. Good.");
        assert_eq!(tok.tokens, vec!["hello", "world", "good"]);
        assert_eq!(tok.sentences, vec![(0, 2), (2, 3)]);
        assert_eq!(tok.letter_count, 14);
    }

    #[test]
    fn tokenize_empty_text() {
        let tok = tokenize("");
        assert!(tok.tokens.is_empty());
        assert!(tok.sentences.is_empty());
        assert_eq!(tok.letter_count, 0);
    }

    #[test]
    fn tokenize_keeps_apostrophes() {
        let tok = tokenize("don't stop");
        assert_eq!(tok.tokens, vec!["don't", "stop"]);
    }

    #[test]
    fn tokenize_terminator_inside_word_is_not_a_boundary() {
        let tok = tokenize("version 3.5 shipped! done");
        assert_eq!(tok.tokens, vec!["version", "3", "5", "shipped", "done"]);
        assert_eq!(tok.sentences, vec![(0, 4), (4, 5)]);
    }

    #[test]
    fn tokenize_drops_bare_apostrophe_runs() {
        let tok = tokenize("'' hello ''");
        assert_eq!(tok.tokens, vec!["hello"]);
    }

    #[test]
    fn sentence_spans_partition_tokens() {
        for text in [
            "One two. Three four! Five?",
            "no terminal punctuation at all",
            "Weird?! spacing .. here",
        ] {
            let tok = tokenize(text);
            let mut covered = 0;
            for &(s, e) in &tok.sentences {
                assert_eq!(s, covered);
                assert!(e > s);
                covered = e;
            }
            assert_eq!(covered, tok.tokens.len());
        }
    }

    #[test]
    fn readability_hand_arithmetic() {
        // 100 words, 500 letters, 5 sentences.
        let tok = TokenizedText {
            tokens: vec!["word".into(); 100],
            sentences: (0..5).map(|i| (i * 20, (i + 1) * 20)).collect(),
            letter_count: 500,
        };
        assert_relative_eq!(readability_cli(&tok).unwrap(), 12.12, epsilon = 1e-9);
    }

    #[test]
    fn readability_degenerate_zero_rates() {
        let tok = TokenizedText {
            tokens: vec!["0".into(); 100],
            sentences: vec![],
            letter_count: 0,
        };
        assert_relative_eq!(readability_cli(&tok).unwrap(), -15.8, epsilon = 1e-9);
        assert!(readability_cli(&tokenize("")).is_none());
    }

    #[test]
    fn readability_invariant_under_duplication() {
        let tok = tokenize("The cat sat on the mat. A dog barked loudly!");
        let doubled = TokenizedText::merged(&[tok.clone(), tok.clone()]);
        assert_relative_eq!(
            readability_cli(&tok).unwrap(),
            readability_cli(&doubled).unwrap(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn complexity_hand_counts() {
        let tok = TokenizedText {
            tokens: vec!["a".into(), "b".into(), "c".into()],
            sentences: vec![(0, 2), (2, 3)],
            letter_count: 3,
        };
        assert_relative_eq!(complexity(&tok).unwrap(), 1.5, epsilon = 1e-12);
        let seven = tokenize("one two three four five six seven.");
        assert_relative_eq!(complexity(&seven).unwrap(), 7.0, epsilon = 1e-12);
        assert!(complexity(&tokenize("")).is_none());
    }

    #[test]
    fn repeatability_hand_counts() {
        assert_relative_eq!(
            repeatability(&tokenize("the cat the dog")).unwrap(),
            0.25,
            epsilon = 1e-12
        );
        assert_relative_eq!(
            repeatability(&tokenize("all tokens are distinct")).unwrap(),
            0.0,
            epsilon = 1e-12
        );
        assert_relative_eq!(
            repeatability(&tokenize("echo echo echo echo echo")).unwrap(),
            0.8,
            epsilon = 1e-12
        );
        assert!(repeatability(&tokenize("...")).is_none());
    }

    #[test]
    fn ngram_enumeration_single_sentence() {
        let tok = tokenize("a b c.");
        let grams = ngram_features(&tok, 3);
        let expected = ["a", "b", "c", "a_b", "b_c", "a_b_c"];
        assert_eq!(grams.len(), expected.len());
        for g in expected {
            assert_eq!(grams[g], 1, "missing {g}");
        }
    }

    #[test]
    fn ngram_single_token() {
        let grams = ngram_features(&tokenize("alone"), 3);
        assert_eq!(grams.len(), 1);
        assert_eq!(grams["alone"], 1);
    }

    #[test]
    fn ngrams_do_not_cross_sentence_boundaries() {
        let grams = ngram_features(&tokenize("a b. c"), 3);
        assert!(grams.contains_key("a_b"));
        assert!(!grams.contains_key("b_c"));
    }

    #[test]
    fn ngram_count_formula_for_m_tokens() {
        for m in 3..10 {
            let text = (0..m).map(|i| format!("tok{i}")).collect::<Vec<_>>().join(" ");
            let grams = ngram_features(&tokenize(&text), 3);
            let total: usize = grams.values().sum();
            assert_eq!(total, m + (m - 1) + (m - 2));
        }
    }
}
