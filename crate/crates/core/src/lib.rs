//! Word-order analysis toolkit for dependency-annotated, case-marked corpora.
//!
//! The crate is organised bottom-up:
//!
//! - [`corpus`]: the annotated sentence model, JSONL / CoNLL-U ingestion and
//!   sentence filtering.
//! - [`transform`]: word-order variants (scrambling, exhaustive sibling
//!   permutation, case swaps, topicalization and adverbial particles).
//! - [`scoring`]: character / pre-tokenized n-gram models, bidirectional
//!   scoring, variant comparison and the external scorer client.
//! - [`stats`]: correlations, exact and asymptotic tests, NPMI.
//! - [`experiments`]: one runner per order-preference analysis, producing
//!   serialisable reports.
//! - [`synth`]: synthetic case-marked corpora with a known canonical order.
//!
//! Data-parallel loops go through [`par`], which uses rayon when the
//! `parallel` feature is enabled and falls back to plain iteration otherwise.

pub mod corpus;
pub mod experiments;
pub mod par;
pub mod scoring;
pub mod stats;
pub mod synth;
pub mod transform;

pub use corpus::{CaseRole, Chunk, Sentence, Token};
pub use scoring::{BidirectionalScorer, NGramModel};
