//! Word-category lexicons with prefix wildcards.
//!
//! File format: `%category <name>` header lines, each followed by one
//! pattern per line. A trailing `*` makes the pattern match any token
//! with that prefix; otherwise matching is exact. Patterns are matched
//! against lowercased tokens.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use super::{FeatureError, TokenizedText};

/// One named category: raw patterns plus compiled lookup structures.
#[derive(Debug, Clone)]
pub struct LexiconCategory {
    pub name: String,
    pub patterns: Vec<String>,
    literals: HashSet<String>,
    prefixes: Vec<String>,
}

impl LexiconCategory {
    fn new(name: String, patterns: Vec<String>) -> Self {
        let mut literals = HashSet::new();
        let mut prefixes = Vec::new();
        for p in &patterns {
            match p.strip_suffix('*') {
                Some(prefix) => prefixes.push(prefix.to_owned()),
                None => {
                    literals.insert(p.clone());
                }
            }
        }
        Self {
            name,
            patterns,
            literals,
            prefixes,
        }
    }

    pub fn matches(&self, token: &str) -> bool {
        self.literals.contains(token) || self.prefixes.iter().any(|p| token.starts_with(p.as_str()))
    }
}

/// A named lexicon with uniquely named categories in file order.
#[derive(Debug, Clone)]
pub struct Lexicon {
    pub name: String,
    categories: Vec<LexiconCategory>,
}

impl Lexicon {
    pub fn new(
        name: impl Into<String>,
        categories: Vec<(String, Vec<String>)>,
    ) -> Result<Self, FeatureError> {
        let name = name.into();
        let mut seen = HashSet::new();
        let mut compiled = Vec::with_capacity(categories.len());
        for (cat_name, patterns) in categories {
            if patterns.is_empty() {
                return Err(FeatureError::InvalidLexicon(
                    name,
                    format!("category {cat_name} has no patterns"),
                ));
            }
            if !seen.insert(cat_name.clone()) {
                return Err(FeatureError::InvalidLexicon(
                    name,
                    format!("duplicate category {cat_name}"),
                ));
            }
            let patterns = patterns.into_iter().map(|p| p.to_lowercase()).collect();
            compiled.push(LexiconCategory::new(cat_name, patterns));
        }
        if compiled.is_empty() {
            return Err(FeatureError::InvalidLexicon(name, "no categories".into()));
        }
        Ok(Self {
            name,
            categories: compiled,
        })
    }

    pub fn from_path(path: &Path) -> Result<Self, FeatureError> {
        let text = fs::read_to_string(path).map_err(|source| FeatureError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "lexicon".into());
        let mut categories: Vec<(String, Vec<String>)> = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(cat) = line.strip_prefix("%category") {
                let cat = cat.trim();
                if cat.is_empty() {
                    return Err(FeatureError::Malformed {
                        what: "lexicon",
                        path: path.display().to_string(),
                        detail: format!("line {}: %category without a name", lineno + 1),
                    });
                }
                categories.push((cat.to_owned(), Vec::new()));
            } else {
                let Some(last) = categories.last_mut() else {
                    return Err(FeatureError::Malformed {
                        what: "lexicon",
                        path: path.display().to_string(),
                        detail: format!("line {}: pattern before any %category header", lineno + 1),
                    });
                };
                last.1.push(line.to_owned());
            }
        }
        Self::new(name, categories)
    }

    pub fn categories(&self) -> &[LexiconCategory] {
        &self.categories
    }

    pub fn category(&self, name: &str) -> Option<&LexiconCategory> {
        self.categories.iter().find(|c| c.name == name)
    }
}

/// Fraction of tokens matching any pattern of `category`.
///
/// Undefined (None) on empty token lists and unknown categories; callers
/// drop such individuals from the aggregation for that measure only.
pub fn lexicon_proportion(tok: &TokenizedText, lexicon: &Lexicon, category: &str) -> Option<f64> {
    if tok.tokens.is_empty() {
        return None;
    }
    let cat = lexicon.category(category)?;
    let hits = tok.tokens.iter().filter(|t| cat.matches(t)).count();
    Some(hits as f64 / tok.tokens.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text_features::tokenize;
    use approx::assert_relative_eq;
    use std::io::Write;

    fn sample() -> Lexicon {
        Lexicon::new(
            "test",
            vec![
                ("mood".into(), vec!["happy".into(), "sad".into()]),
                ("growth".into(), vec!["happi*".into(), "recover*".into()]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn proportion_hand_count() {
        let tok = tokenize("happy sad table");
        assert_relative_eq!(
            lexicon_proportion(&tok, &sample(), "mood").unwrap(),
            2.0 / 3.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn proportion_zero_when_nothing_matches() {
        let tok = tokenize("table chair lamp");
        assert_relative_eq!(
            lexicon_proportion(&tok, &sample(), "mood").unwrap(),
            0.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn prefix_pattern_matches_longer_token() {
        let tok = tokenize("happiness arrived");
        assert_relative_eq!(
            lexicon_proportion(&tok, &sample(), "growth").unwrap(),
            0.5,
            epsilon = 1e-12
        );
    }

    #[test]
    fn empty_tokens_are_undefined() {
        assert!(lexicon_proportion(&tokenize(""), &sample(), "mood").is_none());
    }

    #[test]
    fn duplicate_category_rejected() {
        let err = Lexicon::new(
            "bad",
            vec![
                ("x".into(), vec!["a".into()]),
                ("x".into(), vec!["b".into()]),
            ],
        );
        assert!(err.is_err());
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("lex.txt");
        let mut f = std::fs::File::create(&path).unwrap();
        writeln!(f, "# comment\n%category mood\nhappy\nsad\n%category growth\nhappi*").unwrap();
        drop(f);
        let lex = Lexicon::from_path(&path).unwrap();
        assert_eq!(lex.categories().len(), 2);
        assert!(lex.category("growth").unwrap().matches("happily"));
        assert!(!lex.category("growth").unwrap().matches("unhappy"));
    }

    #[test]
    fn pattern_before_header_is_malformed() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("lex.txt");
        std::fs::write(&path, "happy\n%category mood\nsad\n").unwrap();
        assert!(Lexicon::from_path(&path).is_err());
    }
}
