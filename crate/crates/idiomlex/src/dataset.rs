//! Lexicon ingestion, context retrieval and dataset assembly.
//!
//! Lexicons arrive as JSON Lines (one idiom per line); corpora as plain
//! text (one sentence per line) or JSON Lines `{id, text}`. Idioms are
//! deduplicated on (surface, language); when merged sources disagree on
//! the gold label, a configured source-priority order decides and the
//! conflict is logged as a warning.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use thiserror::Error;

use idiomlex_core::calo::AnnotationInvalid;
use idiomlex_core::sampling::{BadRatios, DatasetStats};
use idiomlex_core::textmatch::{contains_any, expand_pronoun_variants};
use idiomlex_core::{
    assign_splits, balance_sample, CorpusDocument, DatasetEntry, IdiomEntry, IdiomKey, Language,
    SamplingConfig, SplitRatios,
};

use crate::jsonl::{self, JsonlError};

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("{path}:{line}: malformed line: {message}")]
    MalformedLine { path: PathBuf, line: usize, message: String },
    #[error("conflicting labels for {key} from sources {left:?} and {right:?}, and no source priority covers them")]
    ConflictUnresolved { key: IdiomKey, left: Option<String>, right: Option<String> },
    #[error(transparent)]
    BadRatios(#[from] BadRatios),
    #[error(transparent)]
    Jsonl(#[from] JsonlError),
    #[error("io failure on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// How to resolve duplicate idioms whose sources disagree on the label.
/// Earlier sources win; an empty list means any disagreement is an error.
#[derive(Debug, Clone, Default)]
pub struct IngestOptions {
    pub source_priority: Vec<String>,
}

impl IngestOptions {
    fn rank(&self, source: Option<&str>) -> Option<usize> {
        source.and_then(|s| self.source_priority.iter().position(|p| p == s))
    }
}

/// Reads and deduplicates a lexicon file. Duplicate (surface, language)
/// entries merge: emotion annotations are unioned, a missing label fills
/// in from the duplicate, and label conflicts resolve by source priority
/// (logged as warnings) or fail when no priority covers both sources.
pub fn ingest_lexicon(
    path: impl AsRef<Path>,
    options: &IngestOptions,
) -> Result<Vec<IdiomEntry>, DatasetError> {
    let path = path.as_ref();
    let raw: Vec<IdiomEntry> = jsonl::read(path).map_err(|e| match e {
        JsonlError::MalformedLine { path, line, source } => {
            DatasetError::MalformedLine { path, line, message: source.to_string() }
        }
        other => DatasetError::Jsonl(other),
    })?;

    for (index, entry) in raw.iter().enumerate() {
        if entry.surface.trim().is_empty() {
            return Err(DatasetError::MalformedLine {
                path: path.into(),
                line: index + 1,
                message: "empty idiom surface".into(),
            });
        }
        for annotation in &entry.emotions {
            annotation.validate().map_err(|e: AnnotationInvalid| DatasetError::MalformedLine {
                path: path.into(),
                line: index + 1,
                message: e.to_string(),
            })?;
        }
    }
    merge_entries(raw, options)
}

/// Deduplicates already-validated entries; also used to merge entries
/// collected from several lexicon files.
pub fn merge_entries(
    entries: Vec<IdiomEntry>,
    options: &IngestOptions,
) -> Result<Vec<IdiomEntry>, DatasetError> {
    let mut merged: BTreeMap<IdiomKey, IdiomEntry> = BTreeMap::new();
    for mut entry in entries {
        entry.surface = entry.surface.trim().to_string();
        let key = entry.key();
        match merged.get_mut(&key) {
            None => {
                merged.insert(key, entry);
            }
            Some(existing) => merge_into(existing, entry, options)?,
        }
    }
    Ok(merged.into_values().collect())
}

fn merge_into(
    existing: &mut IdiomEntry,
    incoming: IdiomEntry,
    options: &IngestOptions,
) -> Result<(), DatasetError> {
    for annotation in incoming.emotions {
        if !existing.emotions.contains(&annotation) {
            existing.emotions.push(annotation);
        }
    }
    match (existing.gold_sentiment, incoming.gold_sentiment) {
        (_, None) => {}
        (None, Some(label)) => {
            existing.gold_sentiment = Some(label);
            if existing.source.is_none() {
                existing.source = incoming.source;
            }
        }
        (Some(current), Some(label)) if current == label => {}
        (Some(current), Some(label)) => {
            let existing_rank = options.rank(existing.source.as_deref());
            let incoming_rank = options.rank(incoming.source.as_deref());
            match (existing_rank, incoming_rank) {
                (Some(a), Some(b)) => {
                    log::warn!(
                        "label conflict for {}: {current} ({:?}) vs {label} ({:?}); keeping higher-priority source",
                        existing.key(),
                        existing.source,
                        incoming.source,
                    );
                    if b < a {
                        existing.gold_sentiment = Some(label);
                        existing.source = incoming.source;
                    }
                }
                _ => {
                    return Err(DatasetError::ConflictUnresolved {
                        key: existing.key(),
                        left: existing.source.clone(),
                        right: incoming.source,
                    })
                }
            }
        }
    }
    Ok(())
}

/// Reads a corpus file into documents. `.jsonl`/`.json` files parse as
/// `{id, text}` records; anything else is plain text, one sentence per
/// line, with ids derived from the file stem and line number.
pub fn read_corpus(
    path: impl AsRef<Path>,
    language: Language,
) -> Result<Vec<CorpusDocument>, DatasetError> {
    let path = path.as_ref();
    let extension = path.extension().and_then(|e| e.to_str()).unwrap_or("");
    if matches!(extension, "jsonl" | "json") {
        #[derive(serde::Deserialize)]
        struct Record {
            id: String,
            text: String,
        }
        let records: Vec<Record> = jsonl::read(path)?;
        let stem = file_stem(path);
        return Ok(records
            .into_iter()
            .filter(|r| !r.text.trim().is_empty())
            .map(|r| CorpusDocument {
                id: r.id,
                text: r.text,
                language,
                source: Some(stem.clone()),
            })
            .collect());
    }

    let file = File::open(path).map_err(|source| DatasetError::Io { path: path.into(), source })?;
    let stem = file_stem(path);
    let mut documents = Vec::new();
    for (index, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|source| DatasetError::Io { path: path.into(), source })?;
        let text = line.trim();
        if text.is_empty() {
            continue;
        }
        documents.push(CorpusDocument {
            id: format!("{stem}:{:06}", index + 1),
            text: text.to_string(),
            language,
            source: Some(stem.clone()),
        });
    }
    Ok(documents)
}

fn file_stem(path: &Path) -> String {
    path.file_stem().and_then(|s| s.to_str()).unwrap_or("corpus").to_string()
}

/// Documents containing the idiom, in corpus order. Matching expands
/// pronoun placeholders for English and is word-boundary-aware there;
/// Chinese matches the fixed surface as a substring.
pub fn retrieve_contexts<'a>(
    idiom: &IdiomEntry,
    corpus: impl IntoIterator<Item = &'a CorpusDocument>,
) -> Vec<CorpusDocument> {
    let patterns = expand_pronoun_variants(&idiom.surface, idiom.language);
    corpus
        .into_iter()
        .filter(|document| document.language == idiom.language)
        .filter(|document| contains_any(&document.text, &patterns, idiom.language))
        .cloned()
        .collect()
}

/// Everything `build-dataset` needs beyond the input files.
#[derive(Debug, Clone)]
pub struct BuildConfig {
    pub ratios: SplitRatios,
    pub k: Option<u32>,
    pub seed: u64,
}

/// Assembles the balanced dataset: assigns idiom-level splits, retrieves
/// matching passages per idiom, and applies the K cap.
pub fn build_dataset(
    idioms: &[IdiomEntry],
    corpus: &[CorpusDocument],
    config: &BuildConfig,
) -> Result<Vec<DatasetEntry>, DatasetError> {
    let splits = assign_splits(idioms, config.ratios, config.seed)?;
    let mut entries = Vec::new();
    for idiom in idioms {
        let split = splits[&idiom.key()];
        for passage in retrieve_contexts(idiom, corpus) {
            entries.push(DatasetEntry { idiom: idiom.clone(), passage, split });
        }
    }
    Ok(balance_sample(&entries, &SamplingConfig { k: config.k, seed: config.seed }))
}

pub fn write_dataset(path: impl AsRef<Path>, entries: &[DatasetEntry]) -> Result<(), DatasetError> {
    Ok(jsonl::write(path, entries)?)
}

pub fn read_dataset(path: impl AsRef<Path>) -> Result<Vec<DatasetEntry>, DatasetError> {
    Ok(jsonl::read(path)?)
}

/// Renders statistics as CSV with header `language,split,k,idioms,entries`.
pub fn stats_csv(stats: &DatasetStats) -> String {
    let mut out = String::from("language,split,k,idioms,entries\n");
    for (key, cell) in &stats.cells {
        let k = key.k.map_or_else(|| "all".to_string(), |k| k.to_string());
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            key.language, key.split, k, cell.idioms, cell.entries
        ));
    }
    out
}
