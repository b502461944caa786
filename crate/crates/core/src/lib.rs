//! Sentence-level novelty detection toolkit.
//!
//! Given a chronologically ordered list of sentences per topic, the task is
//! to flag every sentence whose entire information content is already covered
//! by earlier sentences (redundant) and keep the rest (novel). This crate
//! provides:
//!
//! - [`corpus`]: the canonical corpus representation and its on-disk formats;
//! - [`textvec`]: tokenization and per-topic TFIDF sentence vectors;
//! - [`detectors`]: the similarity, overlap, pool and selected-pool detectors
//!   plus the streaming per-topic judging loop;
//! - [`factmodel`]: a set-of-facts ground-truth model, relation property
//!   checks, and a seeded synthetic corpus generator;
//! - [`metrics`]: confusion counts, SNM (P/R/F), mistake rate, SPSM and PSM;
//! - [`eval`]: grid search, leave-one-out tuning, and paired t-tests;
//! - [`cli`]: the `noveldetect` command-line front end.

pub mod cli;
pub mod corpus;
pub mod detectors;
pub mod eval;
pub mod factmodel;
pub mod metrics;
pub mod textvec;

pub use corpus::{SentenceRecord, Topic};
pub use detectors::{DetectorParams, Judgment, Method};
pub use metrics::{ConfusionCounts, MetricReport};
pub use textvec::{TokenizerConfig, WeightedVector};
