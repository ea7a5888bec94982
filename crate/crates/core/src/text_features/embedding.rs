//! Pretrained word embeddings and topic-diversity measurement.
//!
//! Embedding file format: a `<vocab_size> <dimension>` header line, then
//! one `token v1 ... v_d` line per token. A post embeds as the unweighted
//! mean of its known-token vectors; topic diversity is the mean cosine
//! distance of post vectors from a corpus centroid.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use super::{FeatureError, TokenizedText};

#[derive(Debug, Clone)]
pub struct EmbeddingTable {
    dimension: usize,
    vectors: HashMap<String, Vec<f64>>,
}

impl EmbeddingTable {
    pub fn new(dimension: usize, vectors: HashMap<String, Vec<f64>>) -> Result<Self, FeatureError> {
        for (token, v) in &vectors {
            if v.len() != dimension || v.iter().any(|x| x.is_nan()) {
                return Err(FeatureError::InvalidModel(
                    "embedding".into(),
                    format!("vector for {token} has wrong dimension or NaN entries"),
                ));
            }
        }
        Ok(Self { dimension, vectors })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn get(&self, token: &str) -> Option<&[f64]> {
        self.vectors.get(token).map(Vec::as_slice)
    }

    /// Mean vector of the known tokens; None when no token is known.
    pub fn post_vector(&self, tok: &TokenizedText) -> Option<Vec<f64>> {
        let mut sum = vec![0.0; self.dimension];
        let mut known = 0usize;
        for token in &tok.tokens {
            if let Some(v) = self.vectors.get(token) {
                for (s, x) in sum.iter_mut().zip(v) {
                    *s += x;
                }
                known += 1;
            }
        }
        if known == 0 {
            return None;
        }
        for s in sum.iter_mut() {
            *s /= known as f64;
        }
        Some(sum)
    }

    pub fn from_path(path: &Path) -> Result<Self, FeatureError> {
        let text = fs::read_to_string(path).map_err(|source| FeatureError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let malformed = |detail: String| FeatureError::Malformed {
            what: "embedding",
            path: path.display().to_string(),
            detail,
        };
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| malformed("empty file".into()))?;
        let mut parts = header.split_whitespace();
        let vocab_size: usize = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| malformed("bad vocab size in header".into()))?;
        let dimension: usize = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| malformed("bad dimension in header".into()))?;

        let mut vectors = HashMap::with_capacity(vocab_size);
        for (lineno, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let token = parts
                .next()
                .ok_or_else(|| malformed(format!("line {}: missing token", lineno + 2)))?;
            let values: Result<Vec<f64>, _> = parts.map(str::parse).collect();
            let values =
                values.map_err(|_| malformed(format!("line {}: bad vector entry", lineno + 2)))?;
            if values.len() != dimension {
                return Err(malformed(format!(
                    "line {}: expected {dimension} values, got {}",
                    lineno + 2,
                    values.len()
                )));
            }
            vectors.insert(token.to_owned(), values);
        }
        if vectors.len() != vocab_size {
            return Err(malformed(format!(
                "header claims {vocab_size} tokens, file has {}",
                vectors.len()
            )));
        }
        Self::new(dimension, vectors)
    }

    /// Write in the same format `from_path` reads, tokens sorted.
    pub fn write_to(&self, path: &Path) -> Result<(), FeatureError> {
        let mut tokens: Vec<&String> = self.vectors.keys().collect();
        tokens.sort_unstable();
        let mut out = format!("{} {}\n", self.vectors.len(), self.dimension);
        for token in tokens {
            out.push_str(token);
            for v in &self.vectors[token] {
                out.push(' ');
                out.push_str(&v.to_string());
            }
            out.push('\n');
        }
        fs::File::create(path)
            .and_then(|mut f| f.write_all(out.as_bytes()))
            .map_err(|source| FeatureError::Io {
                path: path.display().to_string(),
                source,
            })
    }
}

fn cosine_distance(a: &[f64], b: &[f64]) -> Option<f64> {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return None;
    }
    Some(1.0 - dot / (na * nb))
}

/// Mean of the given post vectors: the centroid of a corpus.
pub fn corpus_centroid(post_vectors: &[Vec<f64>]) -> Option<Vec<f64>> {
    let first = post_vectors.first()?;
    let mut sum = vec![0.0; first.len()];
    for v in post_vectors {
        for (s, x) in sum.iter_mut().zip(v) {
            *s += x;
        }
    }
    for s in sum.iter_mut() {
        *s /= post_vectors.len() as f64;
    }
    Some(sum)
}

/// Mean cosine distance of the posts' vectors from `centroid`.
///
/// Posts with no known tokens (or a zero-norm vector) are excluded; if
/// every post is excluded the measure is undefined.
pub fn topic_diversity(
    posts: &[TokenizedText],
    emb: &EmbeddingTable,
    centroid: &[f64],
) -> Option<f64> {
    let mut sum = 0.0;
    let mut n = 0usize;
    for post in posts {
        let Some(v) = emb.post_vector(post) else {
            continue;
        };
        let Some(d) = cosine_distance(&v, centroid) else {
            continue;
        };
        sum += d;
        n += 1;
    }
    if n == 0 {
        None
    } else {
        Some(sum / n as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text_features::tokenize;
    use approx::assert_relative_eq;

    fn table(entries: &[(&str, &[f64])]) -> EmbeddingTable {
        let dim = entries[0].1.len();
        let vectors = entries
            .iter()
            .map(|(t, v)| (t.to_string(), v.to_vec()))
            .collect();
        EmbeddingTable::new(dim, vectors).unwrap()
    }

    #[test]
    fn identical_vectors_have_zero_diversity() {
        let emb = table(&[("alpha", &[1.0, 2.0]), ("beta", &[1.0, 2.0])]);
        let posts = vec![tokenize("alpha"), tokenize("beta"), tokenize("alpha beta")];
        let vecs: Vec<_> = posts.iter().filter_map(|p| emb.post_vector(p)).collect();
        let centroid = corpus_centroid(&vecs).unwrap();
        assert_relative_eq!(
            topic_diversity(&posts, &emb, &centroid).unwrap(),
            0.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn orthogonal_unit_vectors_hand_trigonometry() {
        let emb = table(&[("east", &[1.0, 0.0]), ("north", &[0.0, 1.0])]);
        let posts = vec![tokenize("east"), tokenize("north")];
        let vecs: Vec<_> = posts.iter().filter_map(|p| emb.post_vector(p)).collect();
        let centroid = corpus_centroid(&vecs).unwrap();
        let expected = 1.0 - 0.5_f64.sqrt(); // 1 - cos 45°
        assert_relative_eq!(
            topic_diversity(&posts, &emb, &centroid).unwrap(),
            expected,
            epsilon = 1e-9
        );
    }

    #[test]
    fn unknown_token_posts_are_excluded() {
        let emb = table(&[("east", &[1.0, 0.0]), ("north", &[0.0, 1.0])]);
        let posts = vec![tokenize("east"), tokenize("north"), tokenize("zzz unknown")];
        let centroid = vec![0.5, 0.5];
        let with = topic_diversity(&posts, &emb, &centroid).unwrap();
        let without = topic_diversity(&posts[..2], &emb, &centroid).unwrap();
        assert_relative_eq!(with, without, epsilon = 1e-12);
        assert!(topic_diversity(&[tokenize("zzz")], &emb, &centroid).is_none());
    }

    #[test]
    fn diversity_stays_in_range() {
        let emb = table(&[
            ("a", &[1.0, 0.0]),
            ("b", &[-1.0, 0.0]),
            ("c", &[0.0, 1.0]),
            ("d", &[0.3, -0.7]),
        ]);
        let posts: Vec<_> = ["a", "b", "c", "d", "a c", "b d"].iter().map(|t| tokenize(t)).collect();
        let vecs: Vec<_> = posts.iter().filter_map(|p| emb.post_vector(p)).collect();
        let centroid = corpus_centroid(&vecs).unwrap();
        let d = topic_diversity(&posts, &emb, &centroid).unwrap();
        assert!((0.0..=2.0).contains(&d));
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("emb.txt");
        let emb = table(&[("east", &[1.0, 0.25]), ("north", &[0.0, -1.5])]);
        emb.write_to(&path).unwrap();
        let loaded = EmbeddingTable::from_path(&path).unwrap();
        assert_eq!(loaded.dimension(), 2);
        assert_eq!(loaded.get("north").unwrap(), &[0.0, -1.5]);
    }

    #[test]
    fn header_mismatch_is_malformed() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("emb.txt");
        std::fs::write(&path, "3 2\neast 1.0 0.0\n").unwrap();
        assert!(EmbeddingTable::from_path(&path).is_err());
    }

    #[test]
    fn dimension_mismatch_is_malformed() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("emb.txt");
        std::fs::write(&path, "1 3\neast 1.0 0.0\n").unwrap();
        assert!(EmbeddingTable::from_path(&path).is_err());
    }
}
