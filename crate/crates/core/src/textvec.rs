//! Tokenization and TFIDF-weighted sparse sentence vectors.
//!
//! Document frequencies are computed per topic over sentences, and the IDF
//! is smoothed as `ln((n + 1) / df)` so every stored weight is strictly
//! positive.

use std::collections::BTreeMap;
use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::corpus::{SentenceRecord, Topic};

#[derive(Debug, Error)]
pub enum TextVecError {
    #[error("min_token_len must be at least 1")]
    InvalidMinTokenLen,
    #[error("config line {line}: {reason}")]
    MalformedConfig { line: usize, reason: String },
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Tokenizer settings. Defaults: lowercase, no stopwords, keep all lengths.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenizerConfig {
    pub lowercase: bool,
    pub stopwords: Option<BTreeSet<String>>,
    pub min_token_len: usize,
}

impl Default for TokenizerConfig {
    fn default() -> Self {
        TokenizerConfig {
            lowercase: true,
            stopwords: None,
            min_token_len: 1,
        }
    }
}

impl TokenizerConfig {
    pub fn validate(&self) -> Result<(), TextVecError> {
        if self.min_token_len < 1 {
            return Err(TextVecError::InvalidMinTokenLen);
        }
        Ok(())
    }

    /// Loads a `key=value` configuration file.
    ///
    /// Keys: `lowercase` (true/false), `min_token_len` (integer), `stopwords`
    /// (path to a one-term-per-line file, resolved relative to the config
    /// file). Blank lines and `#` comments are ignored.
    pub fn load(path: &Path) -> Result<Self, TextVecError> {
        let content = fs::read_to_string(path).map_err(|e| TextVecError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        let mut config = TokenizerConfig::default();
        for (lineno, raw) in content.lines().enumerate() {
            let lineno = lineno + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                TextVecError::MalformedConfig {
                    line: lineno,
                    reason: "expected key=value".into(),
                }
            })?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "lowercase" => {
                    config.lowercase = value.parse().map_err(|_| TextVecError::MalformedConfig {
                        line: lineno,
                        reason: format!("lowercase must be true or false, found '{value}'"),
                    })?
                }
                "min_token_len" => {
                    config.min_token_len =
                        value.parse().map_err(|_| TextVecError::MalformedConfig {
                            line: lineno,
                            reason: format!("min_token_len must be a positive integer, found '{value}'"),
                        })?
                }
                "stopwords" => {
                    let sw_path = path.parent().unwrap_or_else(|| Path::new(".")).join(value);
                    config.stopwords = Some(load_stopwords(&sw_path)?);
                }
                other => {
                    return Err(TextVecError::MalformedConfig {
                        line: lineno,
                        reason: format!("unknown key '{other}'"),
                    })
                }
            }
        }
        config.validate()?;
        Ok(config)
    }
}

/// Loads a stopword list, one term per line (`#` comments allowed).
pub fn load_stopwords(path: &Path) -> Result<BTreeSet<String>, TextVecError> {
    let content = fs::read_to_string(path).map_err(|e| TextVecError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    Ok(content
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect())
}

/// Per-topic document frequencies: `df[t]` counts the sentences containing
/// term `t` (not occurrences).
#[derive(Debug, Clone, PartialEq)]
pub struct TopicStats {
    pub n_sentences: usize,
    pub df: BTreeMap<String, usize>,
}

/// A sparse term-weight vector with a cached L1 mass.
///
/// Zero-weight entries are never stored, so `is_empty()` means the sentence
/// contributes no terms at all.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct WeightedVector {
    weights: BTreeMap<String, f64>,
    l1: f64,
}

impl WeightedVector {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a vector from term weights, summing duplicates and dropping
    /// non-positive entries.
    pub fn from_term_weights<I, S>(entries: I) -> Self
    where
        I: IntoIterator<Item = (S, f64)>,
        S: Into<String>,
    {
        let mut weights: BTreeMap<String, f64> = BTreeMap::new();
        for (term, w) in entries {
            *weights.entry(term.into()).or_insert(0.0) += w;
        }
        weights.retain(|_, w| *w > 0.0);
        let l1 = weights.values().sum();
        WeightedVector { weights, l1 }
    }

    /// Unit-weight vector over the given terms (handy in tests and examples).
    pub fn unit(terms: &[&str]) -> Self {
        Self::from_term_weights(terms.iter().map(|t| (t.to_string(), 1.0)))
    }

    pub fn get(&self, term: &str) -> f64 {
        self.weights.get(term).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.weights.iter().map(|(t, w)| (t.as_str(), *w))
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Cached sum of all weights.
    pub fn l1(&self) -> f64 {
        self.l1
    }
}

/// Splits text into terms: maximal alphanumeric runs, lowercased when
/// configured, with stopwords and short tokens removed. Deterministic; an
/// empty result is legal.
pub fn tokenize(text: &str, config: &TokenizerConfig) -> Vec<String> {
    let processed;
    let source = if config.lowercase {
        processed = text.to_lowercase();
        &processed
    } else {
        text
    };
    source
        .split(|c: char| !c.is_alphanumeric())
        .filter(|tok| !tok.is_empty())
        .filter(|tok| tok.chars().count() >= config.min_token_len)
        .filter(|tok| match &config.stopwords {
            Some(set) => !set.contains(*tok),
            None => true,
        })
        .map(str::to_string)
        .collect()
}

/// Counts per-topic document frequencies over the topic's sentences.
pub fn build_topic_stats(topic: &Topic, config: &TokenizerConfig) -> TopicStats {
    let mut df: BTreeMap<String, usize> = BTreeMap::new();
    for sentence in &topic.sentences {
        let unique: BTreeSet<String> = tokenize(&sentence.text, config).into_iter().collect();
        for term in unique {
            *df.entry(term).or_insert(0) += 1;
        }
    }
    TopicStats {
        n_sentences: topic.sentences.len(),
        df,
    }
}

/// TFIDF weight of one sentence: `tf(t) * ln((n + 1) / df(t))` with raw term
/// counts. Terms absent from `stats` are treated as appearing in a single
/// sentence.
pub fn vectorize(
    sentence: &SentenceRecord,
    stats: &TopicStats,
    config: &TokenizerConfig,
) -> WeightedVector {
    let mut tf: BTreeMap<String, usize> = BTreeMap::new();
    for term in tokenize(&sentence.text, config) {
        *tf.entry(term).or_insert(0) += 1;
    }
    let n = stats.n_sentences as f64;
    WeightedVector::from_term_weights(tf.into_iter().map(|(term, count)| {
        let df = stats.df.get(&term).copied().unwrap_or(1) as f64;
        let weight = count as f64 * ((n + 1.0) / df).ln();
        (term, weight)
    }))
}

/// One sentence's id, position and vector, ready for the judging loop.
#[derive(Debug, Clone, PartialEq)]
pub struct SentenceVector {
    pub sentence_id: String,
    pub seq: u32,
    pub vector: WeightedVector,
}

/// Vectorizes a whole topic in seq order.
pub fn topic_vectors(topic: &Topic, config: &TokenizerConfig) -> Vec<SentenceVector> {
    let stats = build_topic_stats(topic, config);
    topic
        .sentences
        .iter()
        .map(|s| SentenceVector {
            sentence_id: s.sentence_id.clone(),
            seq: s.seq,
            vector: vectorize(s, &stats, config),
        })
        .collect()
}
