//! Idiom records, context passages and dataset rows.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::calo::{CaloPolarityMap, EmotionAnnotation};
use crate::label::{Language, SentimentLabel};

/// One lexicon row: an idiom surface form plus whatever annotations the
/// source lexicon carried.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdiomEntry {
    pub surface: String,
    pub language: Language,
    #[serde(rename = "sentiment", default, skip_serializing_if = "Option::is_none")]
    pub gold_sentiment: Option<SentimentLabel>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub emotions: Vec<EmotionAnnotation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
}

impl IdiomEntry {
    /// New unlabeled entry; the surface is whitespace-trimmed.
    pub fn new(surface: &str, language: Language) -> Self {
        Self {
            surface: surface.trim().into(),
            language,
            gold_sentiment: None,
            emotions: Vec::new(),
            source: None,
        }
    }

    pub fn with_sentiment(mut self, label: SentimentLabel) -> Self {
        self.gold_sentiment = Some(label);
        self
    }

    pub fn with_source(mut self, source: &str) -> Self {
        self.source = Some(source.into());
        self
    }

    pub fn key(&self) -> IdiomKey {
        IdiomKey { language: self.language, surface: self.surface.trim().into() }
    }

    /// The gold label, falling back to the CALO-derived polarity when only
    /// emotion annotations are present.
    pub fn effective_gold(&self) -> Option<SentimentLabel> {
        self.effective_gold_with(&CaloPolarityMap::default())
    }

    pub fn effective_gold_with(&self, map: &CaloPolarityMap) -> Option<SentimentLabel> {
        self.gold_sentiment.or_else(|| map.sentiment_of(&self.emotions).ok())
    }

    pub fn is_labeled(&self) -> bool {
        self.effective_gold().is_some()
    }
}

/// Dictionary identity of an idiom: language first, then trimmed surface.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct IdiomKey {
    pub language: Language,
    pub surface: String,
}

impl fmt::Display for IdiomKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.language, self.surface)
    }
}

/// A context passage from a corpus, pre-segmented to one sentence or span.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusDocument {
    pub id: String,
    pub text: String,
    pub language: Language,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
}

impl CorpusDocument {
    pub fn new(id: &str, text: &str, language: Language) -> Self {
        Self { id: id.into(), text: text.into(), language, source: None }
    }
}

/// Dataset split. Train/Dev/Test hold only idioms with gold labels;
/// everything without a label lands in Unlabelled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitName {
    Train,
    Dev,
    Test,
    Unlabelled,
}

impl SplitName {
    pub const ALL: [SplitName; 4] = [Self::Train, Self::Dev, Self::Test, Self::Unlabelled];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Train => "train",
            Self::Dev => "dev",
            Self::Test => "test",
            Self::Unlabelled => "unlabelled",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|s| s.as_str().eq_ignore_ascii_case(name))
    }
}

impl fmt::Display for SplitName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One row of the balanced dataset: an idiom paired with a passage that
/// contains it, carrying the idiom's split.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetEntry {
    pub idiom: IdiomEntry,
    pub passage: CorpusDocument,
    pub split: SplitName,
}
