//! Command-line interface: dataset construction, strategy runs,
//! evaluation, annotation workflows and cache management.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use thiserror::Error;

use idiomlex_core::metrics::{annotation_accuracy, group_report, percentage_agreement};
use idiomlex_core::sampling::DatasetStats;
use idiomlex_core::{compute_stats, IdiomEntry, Language, SplitName, SplitRatios, StrategyKind};

use crate::backend::{
    BackendError, CachedBackend, ChatBackend, CountingBackend, FileCache, LiveBackend, LiveConfig,
    ReplayBackend,
};
use crate::chains::{write_transcripts, ChainError, ChainOptions};
use crate::config::{parse_k, ConfigError, FileConfig};
use crate::dataset::{
    self, build_dataset, ingest_lexicon, read_corpus, read_dataset, write_dataset, BuildConfig,
    DatasetError, IngestOptions,
};
use crate::eval::{
    annotator_label_lists, export_annotation_sheet, import_annotation_sheet, read_records,
    render_report, write_records, EvalError, ReportFormat,
};
use crate::jsonl::JsonlError;
use crate::pipeline::{items_from_dataset, items_from_lexicon, run_strategy, RunItem};
use crate::templates::{PromptTemplateSet, TemplateError};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error(transparent)]
    Template(#[from] TemplateError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Jsonl(#[from] JsonlError),
    #[error("io failure: {0}")]
    Io(#[from] std::io::Error),
}

impl From<idiomlex_core::metrics::MetricsError> for CliError {
    fn from(e: idiomlex_core::metrics::MetricsError) -> Self {
        CliError::Eval(EvalError::Metrics(e))
    }
}

fn bad(message: String) -> CliError {
    CliError::Config(ConfigError::Bad(message))
}

#[derive(Parser, Debug)]
#[command(name = "idiomlex", version, about = "Idiom sentiment lexicon expansion pipeline")]
pub struct Cli {
    /// TOML config file with defaults; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed driving every random choice (splits, sampling, exports).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for strategy runs.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Language filter: zh or en.
    #[arg(long, global = true)]
    lang: Option<String>,
    /// Split filter: train, dev, test or unlabelled.
    #[arg(long, global = true)]
    split: Option<String>,
    /// Per-idiom passage cap: a positive integer or "all".
    #[arg(long, global = true)]
    k: Option<String>,
    /// Template directory root.
    #[arg(long, global = true)]
    templates: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Ingest lexicons and corpora into a balanced, split dataset.
    BuildDataset {
        /// Lexicon JSONL file; repeatable.
        #[arg(long, required = true)]
        lexicon: Vec<PathBuf>,
        /// Corpus file as <lang>:<path>; repeatable.
        #[arg(long)]
        corpus: Vec<String>,
        #[arg(long)]
        out: PathBuf,
        /// Train,dev,test fractions, e.g. 0.6,0.2,0.2.
        #[arg(long)]
        ratios: Option<String>,
        /// Also write the stats CSV here (always printed to stdout).
        #[arg(long)]
        stats_out: Option<PathBuf>,
        /// Source priority for label conflicts, e.g. calo,idioment,slide.
        #[arg(long)]
        source_priority: Option<String>,
    },
    /// Print Table-1-style statistics for a dataset file.
    Stats {
        #[arg(long)]
        dataset: PathBuf,
        /// K values to tabulate, e.g. 1,4,8,16,all.
        #[arg(long)]
        ks: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run an inquiry strategy over idioms; writes transcripts/records.
    Run {
        #[arg(long)]
        strategy: String,
        /// Backend: replay or live.
        #[arg(long)]
        backend: Option<String>,
        /// Replay fixture (required with the replay backend).
        #[arg(long)]
        fixture: Option<PathBuf>,
        /// Idioms from a lexicon JSONL...
        #[arg(long)]
        lexicon: Option<PathBuf>,
        /// ...or from a dataset JSONL built by build-dataset.
        #[arg(long)]
        dataset: Option<PathBuf>,
        #[arg(long)]
        transcripts: PathBuf,
        #[arg(long)]
        records: Option<PathBuf>,
        #[arg(long)]
        cache_dir: Option<PathBuf>,
        /// Disable the response cache for this run.
        #[arg(long)]
        no_cache: bool,
        #[arg(long)]
        model: Option<String>,
        #[arg(long)]
        base_url: Option<String>,
        /// Dataset tag stamped into evaluation records.
        #[arg(long)]
        tag: Option<String>,
        /// Only run the first N idioms (after sorting and filters).
        #[arg(long)]
        limit: Option<usize>,
        /// Draw each chain prediction from its own generation sample.
        #[arg(long)]
        resample: bool,
        #[arg(long)]
        samples_per_chain: Option<u32>,
    },
    /// Aggregate records into the grouped accuracy report.
    Evaluate {
        /// Records JSONL file; repeatable.
        #[arg(long, required = true)]
        records: Vec<PathBuf>,
        /// csv (default) or markdown.
        #[arg(long)]
        format: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample unlabeled-run transcripts into an annotation sheet.
    AnnotateExport {
        #[arg(long)]
        transcripts: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        sample_size: Option<usize>,
        /// Annotator ids, e.g. a1,a2.
        #[arg(long)]
        annotators: Option<String>,
    },
    /// Re-import a filled sheet; report accuracy and agreement.
    AnnotateImport {
        #[arg(long)]
        sheet: PathBuf,
    },
    /// Inspect or clear the response cache.
    Cache {
        #[arg(long)]
        cache_dir: Option<PathBuf>,
        /// stats or clear.
        action: String,
    },
}

/// Parses arguments and executes the chosen command.
pub fn main_with_args<I, T>(args: I) -> Result<(), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::parse_from(args);
    let file = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    dispatch(cli, file)
}

fn dispatch(cli: Cli, file: FileConfig) -> Result<(), CliError> {
    let seed = cli.seed.or(file.seed).unwrap_or(0);
    let language = match cli.lang.as_deref().or(file.lang.as_deref()) {
        None => None,
        Some(raw) => {
            Some(Language::from_name(raw).ok_or_else(|| bad(format!("unknown language {raw:?}")))?)
        }
    };
    let split = match cli.split.as_deref().or(file.split.as_deref()) {
        None => None,
        Some(raw) => {
            Some(SplitName::from_name(raw).ok_or_else(|| bad(format!("unknown split {raw:?}")))?)
        }
    };
    // no cap unless asked for one
    let k = match cli.k.as_deref().or(file.k.as_deref()) {
        None => None,
        Some(raw) => parse_k(raw)?,
    };
    let workers = cli.workers.or(file.workers).unwrap_or(4);
    let template_root =
        cli.templates.clone().or(file.templates.clone()).unwrap_or_else(|| "templates".into());

    match cli.command {
        Command::BuildDataset { lexicon, corpus, out, ratios, stats_out, source_priority } => {
            cmd_build_dataset(
                &file,
                BuildArgs { lexicon, corpus, out, ratios, stats_out, source_priority, k, seed },
            )
        }
        Command::Stats { dataset, ks, out } => cmd_stats(dataset, ks, out, seed),
        Command::Run {
            strategy,
            backend,
            fixture,
            lexicon,
            dataset,
            transcripts,
            records,
            cache_dir,
            no_cache,
            model,
            base_url,
            tag,
            limit,
            resample,
            samples_per_chain,
        } => {
            let strategy = StrategyKind::from_name(&strategy)
                .ok_or_else(|| bad(format!("unknown strategy {strategy:?}")))?;
            cmd_run(
                &file,
                RunArgs {
                    strategy,
                    backend,
                    fixture,
                    lexicon,
                    dataset,
                    transcripts,
                    records,
                    cache_dir,
                    no_cache,
                    model,
                    base_url,
                    tag,
                    limit,
                    resample,
                    samples_per_chain,
                    language,
                    split,
                    workers,
                    template_root,
                },
            )
        }
        Command::Evaluate { records, format, out } => cmd_evaluate(records, format, out),
        Command::AnnotateExport { transcripts, out, sample_size, annotators } => {
            cmd_annotate_export(&file, transcripts, out, sample_size, annotators, seed)
        }
        Command::AnnotateImport { sheet } => cmd_annotate_import(sheet),
        Command::Cache { cache_dir, action } => {
            let dir = cache_dir
                .or(file.cache_dir.clone())
                .unwrap_or_else(|| PathBuf::from(".idiomlex-cache"));
            cmd_cache(dir, &action)
        }
    }
}

struct BuildArgs {
    lexicon: Vec<PathBuf>,
    corpus: Vec<String>,
    out: PathBuf,
    ratios: Option<String>,
    stats_out: Option<PathBuf>,
    source_priority: Option<String>,
    k: Option<u32>,
    seed: u64,
}

fn cmd_build_dataset(file: &FileConfig, args: BuildArgs) -> Result<(), CliError> {
    let priority: Vec<String> = match args.source_priority {
        Some(raw) => raw.split(',').map(|s| s.trim().to_string()).collect(),
        None => file.source_priority.clone().unwrap_or_default(),
    };
    let options = IngestOptions { source_priority: priority };

    let mut idioms: Vec<IdiomEntry> = Vec::new();
    for path in &args.lexicon {
        idioms.extend(ingest_lexicon(path, &options)?);
    }
    let idioms = dataset::merge_entries(idioms, &options)?;

    let mut corpus = Vec::new();
    for spec in &args.corpus {
        let (language, path) = parse_corpus_spec(spec)?;
        corpus.extend(read_corpus(path, language)?);
    }

    let ratios = resolve_ratios(args.ratios.as_deref(), file)?;
    let config = BuildConfig { ratios, k: args.k, seed: args.seed };
    let entries = build_dataset(&idioms, &corpus, &config)?;
    write_dataset(&args.out, &entries)?;

    let stats = compute_stats(&entries, &[config.k], args.seed);
    emit_stats(&stats, args.stats_out.as_deref())?;
    println!("wrote {} entries to {}", entries.len(), args.out.display());
    Ok(())
}

fn cmd_stats(
    dataset: PathBuf,
    ks: Option<String>,
    out: Option<PathBuf>,
    seed: u64,
) -> Result<(), CliError> {
    let entries = read_dataset(&dataset)?;
    let ks = match ks {
        None => vec![Some(1), Some(4), Some(8), Some(16), None],
        Some(raw) => {
            let mut parsed = Vec::new();
            for part in raw.split(',') {
                parsed.push(parse_k(part.trim())?);
            }
            parsed
        }
    };
    let stats = compute_stats(&entries, &ks, seed);
    emit_stats(&stats, out.as_deref())
}

fn emit_stats(stats: &DatasetStats, out: Option<&Path>) -> Result<(), CliError> {
    let csv = dataset::stats_csv(stats);
    print!("{csv}");
    if let Some(path) = out {
        std::fs::write(path, csv)?;
    }
    Ok(())
}

struct RunArgs {
    strategy: StrategyKind,
    backend: Option<String>,
    fixture: Option<PathBuf>,
    lexicon: Option<PathBuf>,
    dataset: Option<PathBuf>,
    transcripts: PathBuf,
    records: Option<PathBuf>,
    cache_dir: Option<PathBuf>,
    no_cache: bool,
    model: Option<String>,
    base_url: Option<String>,
    tag: Option<String>,
    limit: Option<usize>,
    resample: bool,
    samples_per_chain: Option<u32>,
    language: Option<Language>,
    split: Option<SplitName>,
    workers: usize,
    template_root: PathBuf,
}

fn cmd_run(file: &FileConfig, args: RunArgs) -> Result<(), CliError> {
    let templates = PromptTemplateSet::load(&args.template_root)?;

    let items: Vec<RunItem> = match (&args.lexicon, &args.dataset) {
        (Some(path), None) => {
            let idioms = ingest_lexicon(path, &IngestOptions::default())?;
            items_from_lexicon(&idioms, args.language, args.limit)
        }
        (None, Some(path)) => {
            let entries = read_dataset(path)?;
            items_from_dataset(&entries, args.language, args.split, args.limit)
        }
        _ => return Err(bad("run needs exactly one of --lexicon or --dataset".into())),
    };
    if items.is_empty() {
        return Err(bad("no idioms selected; check --lang/--split filters".into()));
    }

    let backend_kind =
        args.backend.clone().or(file.backend.clone()).unwrap_or_else(|| "replay".into());
    let inner: Box<dyn ChatBackend> = match backend_kind.as_str() {
        "replay" => {
            let fixture = args
                .fixture
                .clone()
                .or(file.fixture.clone())
                .ok_or_else(|| bad("replay backend requires --fixture".into()))?;
            Box::new(ReplayBackend::load(fixture)?)
        }
        "live" => {
            let mut config = LiveConfig::default();
            if let Some(base_url) = args.base_url.clone().or(file.base_url.clone()) {
                config.base_url = base_url;
            }
            if let Some(rpm) = file.requests_per_minute {
                config.requests_per_minute = rpm;
            }
            if let Some(timeout) = file.timeout_secs {
                config.timeout_secs = timeout;
            }
            if let Some(retries) = file.max_retries {
                config.max_retries = retries;
            }
            if let Some(base) = file.retry_base_ms {
                config.retry_base_ms = base;
            }
            Box::new(LiveBackend::new(config)?)
        }
        other => return Err(bad(format!("unknown backend {other:?}"))),
    };
    let counted = CountingBackend::new(inner);

    let mut options = ChainOptions::default();
    if let Some(model) = args.model.clone().or(file.model.clone()) {
        options.model = model;
    }
    if let Some(n) = args.samples_per_chain.or(file.samples_per_chain) {
        options.samples_per_chain = n;
    }
    options.resample_mode = args.resample || file.resample_mode.unwrap_or(false);
    if let Some(t) = file.gen_temperature {
        options.gen_temperature = t;
    }
    if let Some(t) = file.judge_temperature {
        options.judge_temperature = t;
    }
    if let Some(m) = file.max_tokens {
        options.max_tokens = m;
    }

    let tag = args.tag.clone().or(file.dataset_tag.clone()).unwrap_or_else(|| "emoidiome".into());
    let calo = file.calo_polarity.clone().unwrap_or_default();

    let outcome = if args.no_cache {
        run_strategy(
            &counted,
            &templates,
            &options,
            args.strategy,
            &items,
            &tag,
            args.workers,
            &calo,
        )?
    } else {
        let dir = args
            .cache_dir
            .clone()
            .or(file.cache_dir.clone())
            .unwrap_or_else(|| PathBuf::from(".idiomlex-cache"));
        let cached = CachedBackend::new(&counted, FileCache::new(dir));
        let outcome = run_strategy(
            &cached,
            &templates,
            &options,
            args.strategy,
            &items,
            &tag,
            args.workers,
            &calo,
        )?;
        println!("cache: {} hits, {} misses", cached.hits(), cached.misses());
        outcome
    };

    write_transcripts(&args.transcripts, &outcome.transcripts)?;
    if let Some(path) = &args.records {
        write_records(path, &outcome.records)?;
    }
    println!(
        "{}: {} idioms, {} transcripts, {} failures, {} backend calls",
        args.strategy,
        items.len(),
        outcome.transcripts.len(),
        outcome.failures.len(),
        counted.calls()
    );
    for (key, reason) in &outcome.failures {
        log::warn!("skipped {key}: {reason}");
    }
    Ok(())
}

fn cmd_evaluate(
    paths: Vec<PathBuf>,
    format: Option<String>,
    out: Option<PathBuf>,
) -> Result<(), CliError> {
    let format = match format.as_deref() {
        None => ReportFormat::Csv,
        Some(raw) => {
            ReportFormat::from_name(raw).ok_or_else(|| bad(format!("unknown format {raw:?}")))?
        }
    };
    let mut records = Vec::new();
    for path in &paths {
        records.extend(read_records(path)?);
    }
    let report = group_report(&records)?;
    let rendered = render_report(&report, format);
    match out {
        Some(path) => std::fs::write(path, rendered)?,
        None => print!("{rendered}"),
    }
    Ok(())
}

fn cmd_annotate_export(
    file: &FileConfig,
    transcripts: PathBuf,
    out: PathBuf,
    sample_size: Option<usize>,
    annotators: Option<String>,
    seed: u64,
) -> Result<(), CliError> {
    let transcripts = crate::chains::read_transcripts(&transcripts)?;
    let sample_size = sample_size.or(file.sample_size).unwrap_or(50);
    let annotators: Vec<String> = match annotators {
        Some(raw) => raw.split(',').map(|s| s.trim().to_string()).collect(),
        None => file.annotators.clone().unwrap_or_else(|| vec!["a1".to_string(), "a2".to_string()]),
    };
    let sheet = export_annotation_sheet(&transcripts, sample_size, seed, &annotators, &out)?;
    println!(
        "exported {} rows ({} idioms x {} annotators) to {}",
        sheet.rows.len(),
        sheet.rows.len() / annotators.len().max(1),
        annotators.len(),
        out.display()
    );
    Ok(())
}

fn cmd_annotate_import(path: PathBuf) -> Result<(), CliError> {
    let sheet = import_annotation_sheet(&path)?;
    let outcome = annotation_accuracy(&sheet)?;
    println!("accuracy: {:.1}", outcome.accuracy);
    println!("evaluated: {}", outcome.evaluated);
    println!("flagged: {}", outcome.flagged.len());
    for key in &outcome.flagged {
        println!("flagged idiom: {key}");
    }
    let lists = annotator_label_lists(&sheet);
    for i in 0..lists.len() {
        for j in i + 1..lists.len() {
            let (left, right) = (&lists[i], &lists[j]);
            match percentage_agreement(&left.1, &right.1) {
                Ok(agreement) => {
                    println!("agreement {} vs {}: {:.1}", left.0, right.0, agreement)
                }
                Err(e) => log::warn!("agreement {} vs {}: {e}", left.0, right.0),
            }
        }
    }
    Ok(())
}

fn cmd_cache(dir: PathBuf, action: &str) -> Result<(), CliError> {
    let cache = FileCache::new(&dir);
    match action {
        "stats" => {
            let stats = cache.stats()?;
            println!("cache dir: {}", dir.display());
            println!("entries: {}", stats.entries);
            println!("bytes: {}", stats.bytes);
        }
        "clear" => {
            cache.clear()?;
            println!("cleared {}", dir.display());
        }
        other => return Err(bad(format!("unknown cache action {other:?}; use stats or clear"))),
    }
    Ok(())
}

fn parse_corpus_spec(spec: &str) -> Result<(Language, PathBuf), CliError> {
    let (lang, path) = spec
        .split_once(':')
        .ok_or_else(|| bad(format!("corpus spec must be <lang>:<path>, got {spec:?}")))?;
    let language =
        Language::from_name(lang).ok_or_else(|| bad(format!("unknown language {lang:?}")))?;
    Ok((language, PathBuf::from(path)))
}

fn resolve_ratios(raw: Option<&str>, file: &FileConfig) -> Result<SplitRatios, CliError> {
    let parts: Vec<f64> = match raw {
        Some(raw) => {
            let mut parts = Vec::new();
            for part in raw.split(',') {
                parts.push(
                    part.trim()
                        .parse()
                        .map_err(|_| bad(format!("bad ratio component {part:?}")))?,
                );
            }
            parts
        }
        None => match &file.ratios {
            Some(ratios) => ratios.clone(),
            None => return Ok(SplitRatios::default()),
        },
    };
    if parts.len() != 3 {
        return Err(bad("ratios need exactly three components".into()));
    }
    let ratios = SplitRatios { train: parts[0], dev: parts[1], test: parts[2] };
    ratios.validate().map_err(DatasetError::BadRatios)?;
    Ok(ratios)
}
