//! Chain predictions, vote tallying and numbered-item extraction.
//!
//! The execution of inquiry chains lives in the `idiomlex` crate; this
//! module holds the pure pieces: the strategy alphabet, the per-sample
//! prediction record, and the plurality vote that combines predictions
//! into one label.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::label::SentimentLabel;

/// The six inquiry strategies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum StrategyKind {
    #[serde(rename = "direct")]
    Direct,
    #[serde(rename = "usage")]
    Usage,
    #[serde(rename = "idiom")]
    Idiom,
    #[serde(rename = "origin")]
    Origin,
    #[serde(rename = "origin-usage")]
    OriginUsage,
    #[serde(rename = "dualcots")]
    DualCoTs,
}

impl StrategyKind {
    /// Report row order: the baselines followed by the dual-chain method.
    pub const ALL: [StrategyKind; 6] =
        [Self::Direct, Self::Usage, Self::Idiom, Self::Origin, Self::OriginUsage, Self::DualCoTs];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Direct => "direct",
            Self::Usage => "usage",
            Self::Idiom => "idiom",
            Self::Origin => "origin",
            Self::OriginUsage => "origin-usage",
            Self::DualCoTs => "dualcots",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|s| s.as_str().eq_ignore_ascii_case(name))
    }

    /// Directory name under the template root.
    pub fn template_dir(self) -> &'static str {
        match self {
            Self::OriginUsage => "origin_usage",
            other => other.as_str(),
        }
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One sentiment prediction produced by a chain sample: either a parsed
/// label or the reason parsing failed, never both.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainPrediction {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<SentimentLabel>,
    pub raw_response: String,
    pub step_trace: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parse_error: Option<String>,
}

impl ChainPrediction {
    pub fn labeled(label: SentimentLabel, raw_response: &str, step_trace: Vec<String>) -> Self {
        Self {
            label: Some(label),
            raw_response: raw_response.into(),
            step_trace,
            parse_error: None,
        }
    }

    pub fn failed(reason: &str, raw_response: &str, step_trace: Vec<String>) -> Self {
        Self {
            label: None,
            raw_response: raw_response.into(),
            step_trace,
            parse_error: Some(reason.into()),
        }
    }

    pub fn is_parsed(&self) -> bool {
        self.label.is_some()
    }
}

/// Per-label vote counts. Unparseable samples are never counted.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VoteTally {
    pub positive: u32,
    pub negative: u32,
    pub neutral: u32,
}

impl VoteTally {
    pub fn from_labels(labels: impl IntoIterator<Item = SentimentLabel>) -> Self {
        let mut tally = Self::default();
        for label in labels {
            tally.add(label);
        }
        tally
    }

    pub fn add(&mut self, label: SentimentLabel) {
        match label {
            SentimentLabel::Positive => self.positive += 1,
            SentimentLabel::Negative => self.negative += 1,
            SentimentLabel::Neutral => self.neutral += 1,
        }
    }

    pub fn count(&self, label: SentimentLabel) -> u32 {
        match label {
            SentimentLabel::Positive => self.positive,
            SentimentLabel::Negative => self.negative,
            SentimentLabel::Neutral => self.neutral,
        }
    }

    pub fn total(&self) -> u32 {
        self.positive + self.negative + self.neutral
    }

    /// The strict-plurality winner; any tie at the top reads as neutral,
    /// because conflicting evidence should not assert a polarity.
    pub fn winner(&self) -> Option<SentimentLabel> {
        if self.total() == 0 {
            return None;
        }
        let max = SentimentLabel::ALL.iter().map(|l| self.count(*l)).max().unwrap();
        let leaders: Vec<SentimentLabel> =
            SentimentLabel::ALL.into_iter().filter(|l| self.count(*l) == max).collect();
        Some(if leaders.len() == 1 { leaders[0] } else { SentimentLabel::Neutral })
    }
}

/// Every sample was unparseable; there is nothing to vote on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("no parsed predictions to vote on")]
pub struct NoVotes;

/// Counts the parsed labels and returns the plurality winner together
/// with the tally. Deterministic and permutation-invariant.
pub fn tally_votes(
    predictions: &[ChainPrediction],
) -> Result<(SentimentLabel, VoteTally), NoVotes> {
    let tally = VoteTally::from_labels(predictions.iter().filter_map(|p| p.label));
    let winner = tally.winner().ok_or(NoVotes)?;
    Ok((winner, tally))
}

/// Splits a generation response into up to `expected` items.
///
/// Each non-empty line is one candidate; a leading enumeration marker
/// ("1." / "2)" / "（三）" / "-" and friends) is stripped. Returns fewer
/// than `expected` items when the response ran short.
pub fn extract_numbered_items(response: &str, expected: usize) -> Vec<String> {
    let mut items = Vec::new();
    for line in response.lines() {
        if items.len() == expected {
            break;
        }
        let stripped = strip_enumeration_marker(line.trim());
        if !stripped.is_empty() {
            items.push(stripped.into());
        }
    }
    items
}

const CJK_NUMERALS: &[char] = &['一', '二', '三', '四', '五', '六', '七', '八', '九', '十', '零'];
const MARKER_SEPARATORS: &[char] = &['.', ')', '、', ':', '：', '）', '．', '。'];

fn strip_enumeration_marker(line: &str) -> &str {
    let mut rest = line;
    // bullet markers
    for bullet in ["-", "*", "•", "·"] {
        if let Some(tail) = rest.strip_prefix(bullet) {
            return tail.trim_start();
        }
    }
    // optional opening bracket, digits or CJK numerals, then a separator
    let had_open = if let Some(tail) = rest.strip_prefix(['(', '（']) {
        rest = tail;
        true
    } else {
        false
    };
    let number_len: usize = rest
        .chars()
        .take_while(|c| c.is_ascii_digit() || CJK_NUMERALS.contains(c))
        .map(char::len_utf8)
        .sum();
    if number_len == 0 {
        return line;
    }
    let after_number = &rest[number_len..];
    if let Some(tail) = after_number.strip_prefix(MARKER_SEPARATORS) {
        return tail.trim_start();
    }
    if had_open {
        if let Some(tail) = after_number.strip_prefix([')', '）']) {
            return tail.trim_start();
        }
    }
    line
}
