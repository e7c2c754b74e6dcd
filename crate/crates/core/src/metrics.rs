//! Accuracy, agreement and report arithmetic.
//!
//! All percentages are reported to one decimal, rounding half away from
//! zero. Report averages are taken over a strategy's populated cells
//! only, since different methods cover different dataset columns.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chain::{StrategyKind, VoteTally};
use crate::idiom::IdiomKey;
use crate::label::{Language, SentimentLabel};

/// One scored prediction: what a strategy said about an idiom, and the
/// gold label when the idiom has one.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvaluationRecord {
    pub idiom: String,
    pub language: Language,
    pub strategy: StrategyKind,
    pub predicted: SentimentLabel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gold: Option<SentimentLabel>,
    pub dataset_tag: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("no records to score")]
    EmptyInput,
    #[error("label lists differ in length: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
}

/// Rounds to one decimal, half away from zero.
pub fn round1(x: f64) -> f64 {
    let scaled = x * 10.0;
    let rounded = if scaled >= 0.0 { (scaled + 0.5) as i64 } else { (scaled - 0.5) as i64 };
    rounded as f64 / 10.0
}

/// Percentage of records whose prediction equals the gold label, to one
/// decimal. Records without a gold label are ignored.
pub fn accuracy(records: &[EvaluationRecord]) -> Result<f64, MetricsError> {
    let golded: Vec<&EvaluationRecord> = records.iter().filter(|r| r.gold.is_some()).collect();
    if golded.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let correct = golded.iter().filter(|r| r.gold == Some(r.predicted)).count();
    Ok(round1(100.0 * correct as f64 / golded.len() as f64))
}

/// Raw percentage agreement between two equally long label lists.
pub fn percentage_agreement(
    a: &[SentimentLabel],
    b: &[SentimentLabel],
) -> Result<f64, MetricsError> {
    if a.len() != b.len() {
        return Err(MetricsError::LengthMismatch { left: a.len(), right: b.len() });
    }
    if a.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let matches = a.iter().zip(b).filter(|(x, y)| x == y).count();
    Ok(round1(100.0 * matches as f64 / a.len() as f64))
}

/// Report cell identity: dataset, then language, then strategy, so that
/// rendered rows group by dataset column first.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CellKey {
    pub dataset_tag: String,
    pub language: Language,
    pub strategy: StrategyKind,
}

/// Grouped accuracy table plus the per-strategy average column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    /// Accuracy percentage per populated cell, one decimal.
    pub cells: BTreeMap<CellKey, f64>,
    /// Arithmetic mean over each strategy's populated cells, one decimal.
    pub averages: BTreeMap<StrategyKind, f64>,
}

impl EvaluationReport {
    /// Builds the report from already-computed cell accuracies.
    pub fn from_cells(cells: BTreeMap<CellKey, f64>) -> Self {
        let mut sums: BTreeMap<StrategyKind, (f64, usize)> = BTreeMap::new();
        for (key, value) in &cells {
            let slot = sums.entry(key.strategy).or_insert((0.0, 0));
            slot.0 += value;
            slot.1 += 1;
        }
        let averages = sums
            .into_iter()
            .map(|(strategy, (sum, n))| (strategy, round1(sum / n as f64)))
            .collect();
        Self { cells, averages }
    }

    /// The (dataset, language) column pairs present in the report, sorted.
    pub fn columns(&self) -> Vec<(String, Language)> {
        let mut columns: Vec<(String, Language)> = Vec::new();
        for key in self.cells.keys() {
            let column = (key.dataset_tag.clone(), key.language);
            if !columns.contains(&column) {
                columns.push(column);
            }
        }
        columns.sort();
        columns
    }

    /// Strategies present, in report row order.
    pub fn strategies(&self) -> Vec<StrategyKind> {
        StrategyKind::ALL.into_iter().filter(|s| self.averages.contains_key(s)).collect()
    }
}

/// Groups records into (dataset, language, strategy) cells and computes
/// per-cell accuracy plus per-strategy averages.
pub fn group_report(records: &[EvaluationRecord]) -> Result<EvaluationReport, MetricsError> {
    if records.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let mut buckets: BTreeMap<CellKey, Vec<EvaluationRecord>> = BTreeMap::new();
    for record in records {
        let key = CellKey {
            dataset_tag: record.dataset_tag.clone(),
            language: record.language,
            strategy: record.strategy,
        };
        buckets.entry(key).or_default().push(record.clone());
    }
    let mut cells = BTreeMap::new();
    for (key, bucket) in buckets {
        cells.insert(key, accuracy(&bucket)?);
    }
    Ok(EvaluationReport::from_cells(cells))
}

/// One annotation-sheet row: a prediction shown to one annotator.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationRow {
    pub idiom: String,
    pub language: Language,
    pub predicted: SentimentLabel,
    pub transcript_ref: String,
    pub annotator_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub annotator_label: Option<SentimentLabel>,
}

/// Rows of (idiom, annotator) pairs exported for human evaluation.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationSheet {
    pub rows: Vec<AnnotationRow>,
}

/// Result of scoring predictions against annotator labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotationOutcome {
    /// Accuracy of predictions against the majority annotator label,
    /// over idioms with an unambiguous majority.
    pub accuracy: f64,
    /// Idioms evaluated (unambiguous majority reference).
    pub evaluated: usize,
    /// Idioms whose annotator votes tied; they need adjudication and are
    /// excluded from the accuracy denominator.
    pub flagged: Vec<IdiomKey>,
}

/// Scores predictions against the majority annotator label per idiom.
/// Rows without an annotator label are ignored; idioms whose labels tie
/// are flagged for adjudication and excluded from the denominator.
pub fn annotation_accuracy(sheet: &AnnotationSheet) -> Result<AnnotationOutcome, MetricsError> {
    let mut tallies: BTreeMap<IdiomKey, VoteTally> = BTreeMap::new();
    let mut predictions: BTreeMap<IdiomKey, SentimentLabel> = BTreeMap::new();
    for row in &sheet.rows {
        let key = IdiomKey { language: row.language, surface: row.idiom.clone() };
        predictions.insert(key.clone(), row.predicted);
        if let Some(label) = row.annotator_label {
            tallies.entry(key).or_default().add(label);
        }
    }
    if tallies.is_empty() {
        return Err(MetricsError::EmptyInput);
    }

    let mut correct = 0usize;
    let mut evaluated = 0usize;
    let mut flagged = Vec::new();
    for (key, tally) in tallies {
        let max = SentimentLabel::ALL.iter().map(|l| tally.count(*l)).max().unwrap();
        let leaders: Vec<SentimentLabel> =
            SentimentLabel::ALL.into_iter().filter(|l| tally.count(*l) == max).collect();
        if leaders.len() > 1 {
            flagged.push(key);
            continue;
        }
        evaluated += 1;
        if predictions.get(&key) == Some(&leaders[0]) {
            correct += 1;
        }
    }
    let accuracy =
        if evaluated == 0 { 0.0 } else { round1(100.0 * correct as f64 / evaluated as f64) };
    Ok(AnnotationOutcome { accuracy, evaluated, flagged })
}
