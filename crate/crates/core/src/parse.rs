//! Keyword-based extraction of sentiment labels from free-text responses.
//!
//! Models answer inquiries in prose, so the label is recovered from a
//! small curated keyword list per language. When several distinct labels
//! occur, the last match in reading order wins: chain-of-thought outputs
//! state their conclusion at the end ("while it may seem negative, ...
//! overall positive"). Responses that mention no keyword at all, or only
//! hedge words like "mixed", are unparseable and the sample is dropped
//! from voting; mapping them to neutral would dilute what neutral means.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::label::{Language, SentimentLabel};

/// English keywords, matched case-insensitively on word boundaries.
const EN_KEYWORDS: &[(&str, SentimentLabel)] = &[
    ("positive", SentimentLabel::Positive),
    ("negative", SentimentLabel::Negative),
    ("neutral", SentimentLabel::Neutral),
];

/// Chinese keywords, matched as plain substrings.
const ZH_KEYWORDS: &[(&str, SentimentLabel)] = &[
    ("积极", SentimentLabel::Positive),
    ("正面", SentimentLabel::Positive),
    ("褒义", SentimentLabel::Positive),
    ("消极", SentimentLabel::Negative),
    ("负面", SentimentLabel::Negative),
    ("贬义", SentimentLabel::Negative),
    ("中性", SentimentLabel::Neutral),
    ("中立", SentimentLabel::Neutral),
];

/// A successfully extracted label plus where it came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParsedLabel {
    pub label: SentimentLabel,
    /// The response fragment that triggered the match (original casing).
    pub matched_span: String,
    /// Identifier of the matching rule, e.g. `en:positive` or `zh:贬义`.
    pub confidence_rule: String,
}

/// No sentiment keyword was found; the sample must be dropped from voting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("no sentiment keyword found in response")]
pub struct Unparseable;

/// Extracts the sentiment label stated in `response`.
///
/// English matching is case-insensitive and word-boundary-aware, so
/// "POSITIVE." matches but "positively" does not. Chinese matching is a
/// plain substring search. If multiple keywords occur, the one starting
/// last wins; at equal positions the longer keyword wins.
pub fn parse_sentiment_label(
    response: &str,
    language: Language,
) -> Result<ParsedLabel, Unparseable> {
    let keywords = match language {
        Language::En => EN_KEYWORDS,
        Language::Zh => ZH_KEYWORDS,
    };

    let mut best: Option<(usize, usize, SentimentLabel, &str)> = None;
    for (keyword, label) in keywords {
        for start in find_occurrences(response, keyword, language) {
            let candidate = (start, keyword.len(), *label, *keyword);
            let better = match best {
                None => true,
                Some((s, l, _, _)) => candidate.0 > s || (candidate.0 == s && candidate.1 > l),
            };
            if better {
                best = Some(candidate);
            }
        }
    }

    best.map(|(start, len, label, keyword)| ParsedLabel {
        label,
        matched_span: response[start..start + len].into(),
        confidence_rule: format!("{}:{}", language.as_str(), keyword),
    })
    .ok_or(Unparseable)
}

/// Byte offsets of all matches of `keyword` in `text`.
fn find_occurrences(text: &str, keyword: &str, language: Language) -> Vec<usize> {
    match language {
        Language::Zh => text.match_indices(keyword).map(|(i, _)| i).collect(),
        Language::En => {
            let haystack = text.as_bytes();
            let needle = keyword.as_bytes();
            let mut out = Vec::new();
            if needle.is_empty() || haystack.len() < needle.len() {
                return out;
            }
            for start in 0..=haystack.len() - needle.len() {
                let window = &haystack[start..start + needle.len()];
                if !window.eq_ignore_ascii_case(needle) {
                    continue;
                }
                let before_ok = start == 0 || !is_word_byte(haystack[start - 1]);
                let after = start + needle.len();
                let after_ok = after == haystack.len() || !is_word_byte(haystack[after]);
                if before_ok && after_ok {
                    out.push(start);
                }
            }
            out
        }
    }
}

/// Bytes that extend a word: ASCII alphanumerics, plus any non-ASCII byte
/// so that keywords never match inside accented or CJK words.
fn is_word_byte(b: u8) -> bool {
    b.is_ascii_alphanumeric() || b >= 0x80
}
