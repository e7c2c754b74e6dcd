//! Pure primitives for idiom sentiment lexicon expansion.
//!
//! Everything in this crate is computation over in-memory values: the
//! three-way sentiment alphabet, CALO emotion collapsing, keyword-based
//! label parsing of model responses, pronoun-variant idiom matching,
//! seeded splitting and balanced sampling, chain vote tallying, and the
//! accuracy/agreement arithmetic behind evaluation reports.
//!
//! File formats, prompting backends, chain execution and the CLI live in
//! the companion `idiomlex` crate. This crate is `no_std`-compatible
//! (`alloc` required); the default `std` feature only forwards to the
//! dependencies' `std` features.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod calo;
pub mod chain;
pub mod idiom;
pub mod label;
pub mod metrics;
pub mod parse;
pub mod sampling;
pub mod textmatch;

pub use calo::{calo_to_sentiment, CaloPolarityMap, CoarseEmotion, EmotionAnnotation, FineEmotion};
pub use chain::{extract_numbered_items, tally_votes, ChainPrediction, StrategyKind, VoteTally};
pub use idiom::{CorpusDocument, DatasetEntry, IdiomEntry, IdiomKey, SplitName};
pub use label::{Language, SentimentLabel};
pub use parse::{parse_sentiment_label, ParsedLabel};
pub use sampling::{assign_splits, balance_sample, compute_stats, SamplingConfig, SplitRatios};
