//! Strategy execution over a set of idioms with a bounded worker pool.
//!
//! Items are processed by up to `workers` threads, but results are
//! emitted in idiom order regardless of completion order, so output
//! files are deterministic. Chain-level failures (unparseable samples,
//! empty generations) are soft: they are logged and reported per idiom.
//! Backend and template failures abort the whole run; with a warm cache
//! a rerun resumes where it stopped.

use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Mutex;

use idiomlex_core::calo::CaloPolarityMap;
use idiomlex_core::metrics::EvaluationRecord;
use idiomlex_core::{
    CorpusDocument, DatasetEntry, IdiomEntry, IdiomKey, Language, SplitName, StrategyKind,
};

use crate::backend::ChatBackend;
use crate::chains::{ChainError, ChainOptions, ChainRunner, ChainTranscript};
use crate::templates::PromptTemplateSet;

/// One unit of work: an idiom, optionally grounded in a dataset passage
/// (used by the usage strategy; other strategies ignore it).
#[derive(Debug, Clone)]
pub struct RunItem {
    pub idiom: IdiomEntry,
    pub passage: Option<CorpusDocument>,
}

/// What a run produced: transcripts and records in idiom order, plus the
/// idioms that failed softly.
#[derive(Debug, Default)]
pub struct RunOutcome {
    pub transcripts: Vec<ChainTranscript>,
    pub records: Vec<EvaluationRecord>,
    pub failures: Vec<(IdiomKey, String)>,
}

/// Distinct idioms from a lexicon, sorted by key.
pub fn items_from_lexicon(
    idioms: &[IdiomEntry],
    language: Option<Language>,
    limit: Option<usize>,
) -> Vec<RunItem> {
    let mut picked: Vec<IdiomEntry> = Vec::new();
    for idiom in idioms {
        if language.is_some_and(|l| l != idiom.language) {
            continue;
        }
        if !picked.iter().any(|p| p.key() == idiom.key()) {
            picked.push(idiom.clone());
        }
    }
    picked.sort_by_key(|i| i.key());
    picked.truncate(limit.unwrap_or(usize::MAX));
    picked.into_iter().map(|idiom| RunItem { idiom, passage: None }).collect()
}

/// Distinct idioms from dataset rows, keeping the first passage (by id)
/// as grounding material.
pub fn items_from_dataset(
    entries: &[DatasetEntry],
    language: Option<Language>,
    split: Option<SplitName>,
    limit: Option<usize>,
) -> Vec<RunItem> {
    let mut items: Vec<RunItem> = Vec::new();
    let mut sorted: Vec<&DatasetEntry> = entries
        .iter()
        .filter(|e| language.is_none_or(|l| l == e.idiom.language))
        .filter(|e| split.is_none_or(|s| s == e.split))
        .collect();
    sorted.sort_by(|a, b| (a.idiom.key(), &a.passage.id).cmp(&(b.idiom.key(), &b.passage.id)));
    for entry in sorted {
        if !items.iter().any(|i| i.idiom.key() == entry.idiom.key()) {
            items
                .push(RunItem { idiom: entry.idiom.clone(), passage: Some(entry.passage.clone()) });
        }
    }
    items.truncate(limit.unwrap_or(usize::MAX));
    items
}

/// Runs one strategy over every item. Soft failures are collected;
/// backend/template errors abort and are returned. `calo` decides how
/// emotion-annotated idioms collapse to a gold label in the records.
#[allow(clippy::too_many_arguments)]
pub fn run_strategy(
    backend: &dyn ChatBackend,
    templates: &PromptTemplateSet,
    options: &ChainOptions,
    strategy: StrategyKind,
    items: &[RunItem],
    dataset_tag: &str,
    workers: usize,
    calo: &CaloPolarityMap,
) -> Result<RunOutcome, ChainError> {
    let runner = ChainRunner::new(backend, templates, options);
    let cursor = AtomicUsize::new(0);
    let abort = AtomicBool::new(false);
    let slots: Mutex<Vec<Option<Result<ChainTranscript, String>>>> =
        Mutex::new(vec![None; items.len()]);
    let fatal: Mutex<Option<ChainError>> = Mutex::new(None);

    let worker_count = workers.max(1).min(items.len().max(1));
    std::thread::scope(|scope| {
        for _ in 0..worker_count {
            scope.spawn(|| loop {
                if abort.load(Ordering::SeqCst) {
                    return;
                }
                let index = cursor.fetch_add(1, Ordering::SeqCst);
                if index >= items.len() {
                    return;
                }
                let item = &items[index];
                match runner.run(strategy, &item.idiom, item.passage.as_ref()) {
                    Ok(transcript) => {
                        slots.lock().unwrap()[index] = Some(Ok(transcript));
                    }
                    Err(
                        soft @ (ChainError::AllUnparseable
                        | ChainError::GenerationEmpty
                        | ChainError::OriginEmpty
                        | ChainError::NoVotes),
                    ) => {
                        log::warn!("{}: {soft}", item.idiom.key());
                        slots.lock().unwrap()[index] = Some(Err(soft.to_string()));
                    }
                    Err(hard) => {
                        abort.store(true, Ordering::SeqCst);
                        let mut fatal = fatal.lock().unwrap();
                        if fatal.is_none() {
                            *fatal = Some(hard);
                        }
                        return;
                    }
                }
            });
        }
    });

    if let Some(error) = fatal.into_inner().unwrap() {
        return Err(error);
    }

    let mut outcome = RunOutcome::default();
    for (item, slot) in items.iter().zip(slots.into_inner().unwrap()) {
        match slot.expect("all slots filled") {
            Ok(transcript) => {
                outcome.records.push(EvaluationRecord {
                    idiom: item.idiom.surface.clone(),
                    language: item.idiom.language,
                    strategy,
                    predicted: transcript.final_label,
                    gold: item.idiom.effective_gold_with(calo),
                    dataset_tag: dataset_tag.to_string(),
                });
                outcome.transcripts.push(transcript);
            }
            Err(reason) => outcome.failures.push((item.idiom.key(), reason)),
        }
    }
    Ok(outcome)
}
