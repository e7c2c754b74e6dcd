//! Idiom sentiment lexicon expansion pipeline.
//!
//! Builds a balanced idiom/passage dataset from local lexicons and
//! corpora, runs multi-step inquiry chains over pluggable chat-completion
//! backends (live HTTP, file cache, deterministic replay), extracts and
//! vote-aggregates sentiment labels, and produces grouped accuracy
//! reports plus an annotation workflow for unlabeled idioms.
//!
//! Pure primitives (labels, parsing, voting, sampling, metrics) live in
//! the `idiomlex-core` crate and are re-exported as [`core`].

pub use idiomlex_core as core;

pub mod backend;
pub mod chains;
pub mod cli;
pub mod config;
pub mod dataset;
pub mod eval;
pub mod jsonl;
pub mod pipeline;
pub mod templates;
