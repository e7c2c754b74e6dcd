//! Pronoun-variant expansion and idiom-in-passage matching.
//!
//! English idiom lexicons write placeholders like "one's" or "someone"
//! into the surface form; corpora contain the instantiated pronouns, so
//! retrieval expands each placeholder into its pronoun set before
//! matching. Chengyu are fixed expressions and pass through unchanged.
//!
//! Matching is a contiguous substring search: word-boundary-aware and
//! case-insensitive for English, plain substring for Chinese. Inflected
//! verb forms ("spilled the beans") are deliberately not matched.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::label::Language;

const POSSESSIVES: &[&str] = &["my", "your", "his", "her", "its", "our", "their"];
const REFLEXIVES: &[&str] =
    &["myself", "yourself", "himself", "herself", "itself", "ourselves", "themselves"];
const OBJECT_PRONOUNS: &[&str] = &["me", "you", "him", "her", "it", "us", "them"];

/// Placeholder kinds in the order they must be expanded: "someone's"
/// before "someone", so the shorter form never fires inside the longer.
/// Proper-noun possessives ("John's") are not matched.
const PLACEHOLDERS: &[(&str, &[&str])] = &[
    ("someone's", POSSESSIVES),
    ("someone", OBJECT_PRONOUNS),
    ("one's", POSSESSIVES),
    ("oneself", REFLEXIVES),
];

/// All matchable text patterns for an idiom surface form. The original
/// placeholder form is always retained as a pattern. Chinese surfaces
/// return themselves unchanged.
pub fn expand_pronoun_variants(surface: &str, language: Language) -> Vec<String> {
    let surface = surface.trim();
    if language == Language::Zh {
        return vec![surface.into()];
    }
    let mut patterns: Vec<String> = vec![surface.into()];
    for (placeholder, replacements) in PLACEHOLDERS {
        let mut next = Vec::with_capacity(patterns.len());
        for pattern in &patterns {
            if occurrences(pattern, placeholder).is_empty() {
                next.push(pattern.clone());
                continue;
            }
            for replacement in *replacements {
                let expanded = replace_placeholder(pattern, placeholder, replacement);
                if !next.contains(&expanded) {
                    next.push(expanded);
                }
            }
            next.push(pattern.clone());
        }
        patterns = next;
    }
    patterns
}

/// Whether `text` contains `pattern` as a contiguous match: boundary-aware
/// and ASCII-case-insensitive for English, plain substring for Chinese.
pub fn matches_pattern(text: &str, pattern: &str, language: Language) -> bool {
    match language {
        Language::Zh => text.contains(pattern),
        Language::En => {
            let haystack = text.as_bytes();
            let needle = pattern.as_bytes();
            if needle.is_empty() || haystack.len() < needle.len() {
                return false;
            }
            for start in 0..=haystack.len() - needle.len() {
                if !haystack[start..start + needle.len()].eq_ignore_ascii_case(needle) {
                    continue;
                }
                let before_ok = start == 0 || !is_word_byte(haystack[start - 1]);
                let after = start + needle.len();
                let after_ok = after == haystack.len() || !is_word_byte(haystack[after]);
                if before_ok && after_ok {
                    return true;
                }
            }
            false
        }
    }
}

/// Whether `text` contains any of the given patterns.
pub fn contains_any(text: &str, patterns: &[String], language: Language) -> bool {
    patterns.iter().any(|p| matches_pattern(text, p, language))
}

fn is_word_byte(b: u8) -> bool {
    b.is_ascii_alphanumeric() || b >= 0x80
}

/// Word-boundary occurrences of `placeholder` in `pattern`. An occurrence
/// immediately followed by an apostrophe does not count, so "someone"
/// never fires inside "someone's".
fn occurrences(pattern: &str, placeholder: &str) -> Vec<usize> {
    let haystack = pattern.as_bytes();
    let needle = placeholder.as_bytes();
    let mut out = Vec::new();
    if needle.is_empty() || haystack.len() < needle.len() {
        return out;
    }
    for start in 0..=haystack.len() - needle.len() {
        if &haystack[start..start + needle.len()] != needle {
            continue;
        }
        let before_ok = start == 0 || !is_word_byte(haystack[start - 1]);
        let after = start + needle.len();
        let after_ok =
            after == haystack.len() || (!is_word_byte(haystack[after]) && haystack[after] != b'\'');
        if before_ok && after_ok {
            out.push(start);
        }
    }
    out
}

/// Replaces every boundary occurrence of `placeholder` with `replacement`,
/// using the same pronoun for all occurrences.
fn replace_placeholder(pattern: &str, placeholder: &str, replacement: &str) -> String {
    let spots = occurrences(pattern, placeholder);
    let mut out = String::with_capacity(pattern.len());
    let mut cursor = 0;
    for start in spots {
        out.push_str(&pattern[cursor..start]);
        out.push_str(replacement);
        cursor = start + placeholder.len();
    }
    out.push_str(&pattern[cursor..]);
    out
}
