//! Authorship attribution for short, noisy, code-mixed chat texts.
//!
//! The pipeline: ingest chat exports or labeled JSONL into a [`ingest::Corpus`],
//! extract word/character n-gram features under TF, TF-IDF, or binary
//! weighting ([`features`]), train any of four classifiers ([`classifiers`]),
//! and score predictions ([`eval`]). [`experiment`] wires the whole grid —
//! every weighting, tokenization, and classifier against two held-out test
//! sets — behind one seeded, reproducible runner, and [`synthgen`] fabricates
//! separability-controlled corpora for experiments without real chat data.
//!
//! Everything is deterministic given explicit seeds; rerunning any pipeline
//! with identical inputs produces byte-identical artifacts.

pub mod classifiers;
pub mod config;
pub mod eval;
pub mod experiment;
pub mod features;
pub mod ingest;
pub mod rng;
pub mod stats;
pub mod synthgen;
