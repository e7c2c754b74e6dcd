//! Evaluation records, report rendering and the annotation workflow.
//!
//! Records are JSON Lines; reports render as CSV
//! (`dataset,language,strategy,accuracy`, with per-strategy averages in
//! trailing `avg` rows) or as a Markdown table with one strategy per row
//! and an Avg. column. Annotation sheets are CSV round-trips between the
//! pipeline and human annotators.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use thiserror::Error;

use idiomlex_core::metrics::{
    AnnotationRow, AnnotationSheet, EvaluationRecord, EvaluationReport, MetricsError,
};
use idiomlex_core::sampling::sample_indices;
use idiomlex_core::{Language, SentimentLabel};

use crate::chains::ChainTranscript;
use crate::jsonl::{self, JsonlError};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Jsonl(#[from] JsonlError),
    #[error("{path}:{line}: {message}")]
    BadSheet { path: PathBuf, line: usize, message: String },
    #[error("bad label {label:?}: expected positive, negative or neutral")]
    BadLabel { label: String },
    #[error("csv failure: {0}")]
    Csv(#[from] csv::Error),
    #[error("io failure: {0}")]
    Io(#[from] std::io::Error),
}

pub fn write_records(
    path: impl AsRef<Path>,
    records: &[EvaluationRecord],
) -> Result<(), EvalError> {
    Ok(jsonl::write(path, records)?)
}

pub fn read_records(path: impl AsRef<Path>) -> Result<Vec<EvaluationRecord>, EvalError> {
    Ok(jsonl::read(path)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Markdown,
}

impl ReportFormat {
    pub fn from_name(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().as_str() {
            "csv" => Some(Self::Csv),
            "markdown" | "md" => Some(Self::Markdown),
            _ => None,
        }
    }
}

/// Renders a report with a stable layout: cells sorted by (dataset,
/// language, strategy row order), then the averages. Identical reports
/// render to identical bytes.
pub fn render_report(report: &EvaluationReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Csv => render_csv(report),
        ReportFormat::Markdown => render_markdown(report),
    }
}

fn render_csv(report: &EvaluationReport) -> String {
    let mut out = String::from("dataset,language,strategy,accuracy\n");
    for strategy in report.strategies() {
        for (key, value) in &report.cells {
            if key.strategy == strategy {
                let _ = writeln!(
                    out,
                    "{},{},{},{:.1}",
                    key.dataset_tag, key.language, key.strategy, value
                );
            }
        }
    }
    for strategy in report.strategies() {
        let _ = writeln!(out, "avg,,{},{:.1}", strategy, report.averages[&strategy]);
    }
    out
}

fn render_markdown(report: &EvaluationReport) -> String {
    let columns = report.columns();
    let mut out = String::from("| strategy |");
    for (tag, language) in &columns {
        let _ = write!(out, " {tag} {language} |");
    }
    out.push_str(" avg |\n|---|");
    for _ in &columns {
        out.push_str("---|");
    }
    out.push_str("---|\n");
    for strategy in report.strategies() {
        let _ = write!(out, "| {strategy} |");
        for (tag, language) in &columns {
            let cell = report.cells.iter().find(|(key, _)| {
                key.strategy == strategy && key.dataset_tag == *tag && key.language == *language
            });
            match cell {
                Some((_, value)) => {
                    let _ = write!(out, " {value:.1} |");
                }
                None => out.push_str(" - |"),
            }
        }
        let _ = writeln!(out, " {:.1} |", report.averages[&strategy]);
    }
    out
}

const SHEET_HEADER: [&str; 6] =
    ["idiom", "language", "predicted", "transcript_ref", "annotator_id", "annotator_label"];

/// Samples `sample_size` distinct idioms from the transcripts (seeded,
/// uniform, without replacement) and writes one CSV row per (idiom,
/// annotator) with an empty `annotator_label` column.
pub fn export_annotation_sheet(
    transcripts: &[ChainTranscript],
    sample_size: usize,
    seed: u64,
    annotators: &[String],
    path: impl AsRef<Path>,
) -> Result<AnnotationSheet, EvalError> {
    let picked = sample_indices(transcripts.len(), sample_size, seed);
    let mut sheet = AnnotationSheet::default();
    for index in picked {
        let transcript = &transcripts[index];
        for annotator in annotators {
            sheet.rows.push(AnnotationRow {
                idiom: transcript.idiom.surface.clone(),
                language: transcript.idiom.language,
                predicted: transcript.final_label,
                transcript_ref: format!("line:{}", index + 1),
                annotator_id: annotator.clone(),
                annotator_label: None,
            });
        }
    }
    write_annotation_sheet(&sheet, path)?;
    Ok(sheet)
}

pub fn write_annotation_sheet(
    sheet: &AnnotationSheet,
    path: impl AsRef<Path>,
) -> Result<(), EvalError> {
    let mut writer = csv::Writer::from_path(path.as_ref())?;
    writer.write_record(SHEET_HEADER)?;
    for row in &sheet.rows {
        writer.write_record([
            row.idiom.as_str(),
            row.language.as_str(),
            row.predicted.as_str(),
            row.transcript_ref.as_str(),
            row.annotator_id.as_str(),
            row.annotator_label.map(|l| l.as_str()).unwrap_or(""),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

/// Reads a sheet back, validating every filled label against the
/// three-way alphabet and enforcing one row per (idiom, annotator).
pub fn import_annotation_sheet(path: impl AsRef<Path>) -> Result<AnnotationSheet, EvalError> {
    let path = path.as_ref();
    let mut reader = csv::Reader::from_path(path)?;
    let mut sheet = AnnotationSheet::default();
    let mut seen: BTreeSet<(String, Language, String)> = BTreeSet::new();
    for (index, record) in reader.records().enumerate() {
        let record = record?;
        let field = |i: usize| record.get(i).unwrap_or("").to_string();
        let language = Language::from_name(&field(1)).ok_or_else(|| EvalError::BadSheet {
            path: path.into(),
            line: index + 2,
            message: format!("bad language {:?}", field(1)),
        })?;
        let predicted =
            SentimentLabel::from_name(&field(2)).ok_or_else(|| EvalError::BadSheet {
                path: path.into(),
                line: index + 2,
                message: format!("bad predicted label {:?}", field(2)),
            })?;
        if !seen.insert((field(0), language, field(4))) {
            return Err(EvalError::BadSheet {
                path: path.into(),
                line: index + 2,
                message: format!(
                    "duplicate row for idiom {:?} and annotator {:?}",
                    field(0),
                    field(4)
                ),
            });
        }
        let raw_label = field(5);
        let annotator_label = if raw_label.trim().is_empty() {
            None
        } else {
            Some(
                SentimentLabel::from_name(raw_label.trim())
                    .ok_or(EvalError::BadLabel { label: raw_label })?,
            )
        };
        sheet.rows.push(AnnotationRow {
            idiom: field(0),
            language,
            predicted,
            transcript_ref: field(3),
            annotator_id: field(4),
            annotator_label,
        });
    }
    Ok(sheet)
}

/// Per-annotator label lists for the agreement computation, aligned by
/// idiom order and restricted to idioms every annotator labeled.
pub fn annotator_label_lists(sheet: &AnnotationSheet) -> Vec<(String, Vec<SentimentLabel>)> {
    let annotators: BTreeSet<&str> = sheet.rows.iter().map(|r| r.annotator_id.as_str()).collect();
    let label_of = |annotator: &str, idiom: &str, language: Language| {
        sheet.rows.iter().find_map(|r| {
            (r.annotator_id == annotator && r.idiom == idiom && r.language == language)
                .then_some(r.annotator_label)
                .flatten()
        })
    };
    let idioms: BTreeSet<(&str, Language)> = sheet
        .rows
        .iter()
        .map(|r| (r.idiom.as_str(), r.language))
        .filter(|(idiom, language)| {
            annotators.iter().all(|a| label_of(a, idiom, *language).is_some())
        })
        .collect();
    annotators
        .iter()
        .map(|annotator| {
            let labels = idioms
                .iter()
                .map(|(idiom, language)| label_of(annotator, idiom, *language).unwrap())
                .collect();
            (annotator.to_string(), labels)
        })
        .collect()
}
