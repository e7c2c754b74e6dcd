//! Inquiry chain execution.
//!
//! Five baseline strategies ask about an idiom in one to three steps;
//! the dual-chain method runs a literal chain (treat the phrase as plain
//! text: generate usage sentences, judge each) and an etymological chain
//! (elicit the origin, generate origin-grounded examples, judge each),
//! then combines all predictions by plurality vote.
//!
//! Generation steps sample at a diversity temperature; judgment steps run
//! at temperature zero so label extraction is as deterministic as the
//! backend allows. The two chains of a dual run execute sequentially so
//! transcripts list every call in issue order.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use idiomlex_core::chain::NoVotes;
use idiomlex_core::parse::Unparseable;
use idiomlex_core::{
    extract_numbered_items, parse_sentiment_label, tally_votes, ChainPrediction, CorpusDocument,
    IdiomEntry, Language, SentimentLabel, StrategyKind, VoteTally,
};

use crate::backend::{BackendError, ChatBackend, ChatMessage, ChatRequest, GenerationParams};
use crate::jsonl::{self, JsonlError};
use crate::templates::{step, PromptTemplateSet, TemplateError};

/// Knobs of a chain run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainOptions {
    pub model: String,
    /// Predictions per chain. The default draws this many generated items
    /// from a single generation call and judges each once.
    pub samples_per_chain: u32,
    /// When set, each prediction instead comes from its own generation
    /// draw (`sample_index` 0..n of a one-item prompt), judged once.
    pub resample_mode: bool,
    pub gen_temperature: f64,
    pub judge_temperature: f64,
    pub max_tokens: u32,
}

impl Default for ChainOptions {
    fn default() -> Self {
        Self {
            model: "gpt-3.5-turbo".into(),
            samples_per_chain: 5,
            resample_mode: false,
            gen_temperature: 0.7,
            judge_temperature: 0.0,
            max_tokens: 512,
        }
    }
}

/// One backend call as recorded in a transcript.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exchange {
    pub step: String,
    pub request: ChatRequest,
    pub response: String,
}

/// Full record of one strategy run over one idiom.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainTranscript {
    pub idiom: IdiomEntry,
    pub strategy: StrategyKind,
    pub requests_and_responses: Vec<Exchange>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub origins: Vec<String>,
    pub literal_predictions: Vec<ChainPrediction>,
    pub etymological_predictions: Vec<ChainPrediction>,
    #[serde(rename = "final")]
    pub final_label: SentimentLabel,
    pub vote_tally: VoteTally,
}

impl ChainTranscript {
    pub fn predictions(&self) -> impl Iterator<Item = &ChainPrediction> {
        self.literal_predictions.iter().chain(self.etymological_predictions.iter())
    }
}

#[derive(Debug, Error)]
pub enum ChainError {
    #[error("response could not be parsed into a label")]
    AllUnparseable,
    #[error("generation step produced no usable items")]
    GenerationEmpty,
    #[error("origin step produced no text")]
    OriginEmpty,
    #[error("every sample was unparseable; nothing to vote on")]
    NoVotes,
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error(transparent)]
    Template(#[from] TemplateError),
}

/// Executes strategies against one backend/template/options triple.
pub struct ChainRunner<'a> {
    backend: &'a dyn ChatBackend,
    templates: &'a PromptTemplateSet,
    options: &'a ChainOptions,
}

impl<'a> ChainRunner<'a> {
    pub fn new(
        backend: &'a dyn ChatBackend,
        templates: &'a PromptTemplateSet,
        options: &'a ChainOptions,
    ) -> Self {
        Self { backend, templates, options }
    }

    pub fn run(
        &self,
        strategy: StrategyKind,
        idiom: &IdiomEntry,
        passage: Option<&CorpusDocument>,
    ) -> Result<ChainTranscript, ChainError> {
        match strategy {
            StrategyKind::Direct => self.run_direct_inquiry(idiom),
            StrategyKind::Usage => self.run_usage_inquiry(idiom, passage),
            StrategyKind::Idiom => self.run_idiom_inquiry(idiom),
            StrategyKind::Origin => self.run_origin_inquiry(idiom),
            StrategyKind::OriginUsage => self.run_origin_usage_inquiry(idiom),
            StrategyKind::DualCoTs => self.run_dualcots(idiom),
        }
    }

    /// Single question about the bare surface form.
    pub fn run_direct_inquiry(&self, idiom: &IdiomEntry) -> Result<ChainTranscript, ChainError> {
        let mut trace = Vec::new();
        let response = self.call(
            &mut trace,
            idiom.language,
            StrategyKind::Direct,
            step::ASK,
            &[("idiom", &idiom.surface)],
            self.options.judge_temperature,
            0,
        )?;
        let prediction = judge(&response, idiom.language, vec![step::ASK.into()]);
        single_prediction_transcript(idiom, StrategyKind::Direct, trace, Vec::new(), prediction)
    }

    /// Like direct inquiry, but the prompt asserts idiom status first.
    pub fn run_idiom_inquiry(&self, idiom: &IdiomEntry) -> Result<ChainTranscript, ChainError> {
        let mut trace = Vec::new();
        let response = self.call(
            &mut trace,
            idiom.language,
            StrategyKind::Idiom,
            step::ASK,
            &[("idiom", &idiom.surface)],
            self.options.judge_temperature,
            0,
        )?;
        let prediction = judge(&response, idiom.language, vec![step::ASK.into()]);
        single_prediction_transcript(idiom, StrategyKind::Idiom, trace, Vec::new(), prediction)
    }

    /// Judgment grounded in a usage sentence: the provided passage, or a
    /// generated example when none is given.
    pub fn run_usage_inquiry(
        &self,
        idiom: &IdiomEntry,
        passage: Option<&CorpusDocument>,
    ) -> Result<ChainTranscript, ChainError> {
        let mut trace = Vec::new();
        let sentence = match passage {
            Some(document) => document.text.clone(),
            None => {
                let generated = self.call(
                    &mut trace,
                    idiom.language,
                    StrategyKind::Usage,
                    step::GENERATE,
                    &[("idiom", &idiom.surface)],
                    self.options.gen_temperature,
                    0,
                )?;
                extract_numbered_items(&generated, 1)
                    .into_iter()
                    .next()
                    .ok_or(ChainError::GenerationEmpty)?
            }
        };
        let response = self.call(
            &mut trace,
            idiom.language,
            StrategyKind::Usage,
            step::JUDGE,
            &[("idiom", &idiom.surface), ("sentence", &sentence)],
            self.options.judge_temperature,
            0,
        )?;
        let mut steps = Vec::new();
        if passage.is_none() {
            steps.push(step::GENERATE.into());
        }
        steps.push(step::JUDGE.into());
        let prediction = judge(&response, idiom.language, steps);
        single_prediction_transcript(idiom, StrategyKind::Usage, trace, Vec::new(), prediction)
    }

    /// Elicit the origin, then judge sentiment given that origin. The
    /// origin text is kept in the transcript for manual audit.
    pub fn run_origin_inquiry(&self, idiom: &IdiomEntry) -> Result<ChainTranscript, ChainError> {
        let mut trace = Vec::new();
        let origin =
            self.elicit_origin(&mut trace, idiom, StrategyKind::Origin, step::ORIGIN, 0)?;
        let response = self.call(
            &mut trace,
            idiom.language,
            StrategyKind::Origin,
            step::JUDGE,
            &[("idiom", &idiom.surface), ("origin", &origin)],
            self.options.judge_temperature,
            0,
        )?;
        let prediction =
            judge(&response, idiom.language, vec![step::ORIGIN.into(), step::JUDGE.into()]);
        single_prediction_transcript(idiom, StrategyKind::Origin, trace, vec![origin], prediction)
    }

    /// Origin, then an origin-grounded example, then judgment; each prompt
    /// embeds the prior step outputs.
    pub fn run_origin_usage_inquiry(
        &self,
        idiom: &IdiomEntry,
    ) -> Result<ChainTranscript, ChainError> {
        let mut trace = Vec::new();
        let origin =
            self.elicit_origin(&mut trace, idiom, StrategyKind::OriginUsage, step::ORIGIN, 0)?;
        let generated = self.call(
            &mut trace,
            idiom.language,
            StrategyKind::OriginUsage,
            step::GENERATE,
            &[("idiom", &idiom.surface), ("origin", &origin)],
            self.options.gen_temperature,
            0,
        )?;
        let sentence = extract_numbered_items(&generated, 1)
            .into_iter()
            .next()
            .ok_or(ChainError::GenerationEmpty)?;
        let response = self.call(
            &mut trace,
            idiom.language,
            StrategyKind::OriginUsage,
            step::JUDGE,
            &[("idiom", &idiom.surface), ("origin", &origin), ("sentence", &sentence)],
            self.options.judge_temperature,
            0,
        )?;
        let prediction = judge(
            &response,
            idiom.language,
            vec![step::ORIGIN.into(), step::GENERATE.into(), step::JUDGE.into()],
        );
        single_prediction_transcript(
            idiom,
            StrategyKind::OriginUsage,
            trace,
            vec![origin],
            prediction,
        )
    }

    /// Literal chain: treat the phrase compositionally. One generation
    /// request asks for `samples_per_chain` example sentences; each is
    /// judged once. Short generations leave parse-error slots so the
    /// chain always reports `samples_per_chain` predictions.
    pub fn run_literal_chain(
        &self,
        idiom: &IdiomEntry,
        trace: &mut Vec<Exchange>,
    ) -> Result<Vec<ChainPrediction>, ChainError> {
        let n = self.options.samples_per_chain as usize;
        let mut sentences: Vec<Option<String>> = Vec::with_capacity(n);
        if self.options.resample_mode {
            for index in 0..n {
                let generated = self.call(
                    trace,
                    idiom.language,
                    StrategyKind::DualCoTs,
                    step::LITERAL_GENERATE,
                    &[("idiom", &idiom.surface), ("count", "1")],
                    self.options.gen_temperature,
                    index as u32,
                )?;
                sentences.push(extract_numbered_items(&generated, 1).into_iter().next());
            }
        } else {
            let count = n.to_string();
            let generated = self.call(
                trace,
                idiom.language,
                StrategyKind::DualCoTs,
                step::LITERAL_GENERATE,
                &[("idiom", &idiom.surface), ("count", &count)],
                self.options.gen_temperature,
                0,
            )?;
            let mut items = extract_numbered_items(&generated, n).into_iter();
            for _ in 0..n {
                sentences.push(items.next());
            }
        }
        if sentences.iter().all(Option::is_none) {
            return Err(ChainError::GenerationEmpty);
        }

        let mut predictions = Vec::with_capacity(n);
        for (index, sentence) in sentences.iter().enumerate() {
            match sentence {
                None => predictions.push(ChainPrediction::failed(
                    "generation produced no sentence for this slot",
                    "",
                    vec![step::LITERAL_GENERATE.into()],
                )),
                Some(sentence) => {
                    let response = self.call(
                        trace,
                        idiom.language,
                        StrategyKind::DualCoTs,
                        step::LITERAL_JUDGE,
                        &[("idiom", &idiom.surface), ("sentence", sentence)],
                        self.options.judge_temperature,
                        0,
                    )?;
                    predictions.push(judge(
                        &response,
                        idiom.language,
                        vec![
                            step::LITERAL_GENERATE.into(),
                            format!("{}#{index}", step::LITERAL_JUDGE),
                        ],
                    ));
                }
            }
        }
        Ok(predictions)
    }

    /// Etymological chain: elicit the origin, generate origin-grounded
    /// examples, judge each with the origin in context.
    pub fn run_etymological_chain(
        &self,
        idiom: &IdiomEntry,
        trace: &mut Vec<Exchange>,
    ) -> Result<(String, Vec<ChainPrediction>), ChainError> {
        let origin =
            self.elicit_origin(trace, idiom, StrategyKind::DualCoTs, step::ETYM_ORIGIN, 0)?;

        let n = self.options.samples_per_chain as usize;
        let mut examples: Vec<Option<String>> = Vec::with_capacity(n);
        if self.options.resample_mode {
            for index in 0..n {
                let generated = self.call(
                    trace,
                    idiom.language,
                    StrategyKind::DualCoTs,
                    step::ETYM_EXAMPLES,
                    &[("idiom", &idiom.surface), ("origin", &origin), ("count", "1")],
                    self.options.gen_temperature,
                    index as u32,
                )?;
                examples.push(extract_numbered_items(&generated, 1).into_iter().next());
            }
        } else {
            let count = n.to_string();
            let generated = self.call(
                trace,
                idiom.language,
                StrategyKind::DualCoTs,
                step::ETYM_EXAMPLES,
                &[("idiom", &idiom.surface), ("origin", &origin), ("count", &count)],
                self.options.gen_temperature,
                0,
            )?;
            let mut items = extract_numbered_items(&generated, n).into_iter();
            for _ in 0..n {
                examples.push(items.next());
            }
        }
        if examples.iter().all(Option::is_none) {
            return Err(ChainError::GenerationEmpty);
        }

        let mut predictions = Vec::with_capacity(n);
        for (index, example) in examples.iter().enumerate() {
            match example {
                None => predictions.push(ChainPrediction::failed(
                    "generation produced no example for this slot",
                    "",
                    vec![step::ETYM_ORIGIN.into(), step::ETYM_EXAMPLES.into()],
                )),
                Some(example) => {
                    let response = self.call(
                        trace,
                        idiom.language,
                        StrategyKind::DualCoTs,
                        step::ETYM_JUDGE,
                        &[("idiom", &idiom.surface), ("origin", &origin), ("sentence", example)],
                        self.options.judge_temperature,
                        0,
                    )?;
                    predictions.push(judge(
                        &response,
                        idiom.language,
                        vec![
                            step::ETYM_ORIGIN.into(),
                            step::ETYM_EXAMPLES.into(),
                            format!("{}#{index}", step::ETYM_JUDGE),
                        ],
                    ));
                }
            }
        }
        Ok((origin, predictions))
    }

    /// Runs both chains and combines their predictions by plurality vote.
    /// A chain that cannot produce material (empty origin or generation)
    /// contributes parse-error slots instead of aborting the run; only a
    /// fully voteless run fails.
    pub fn run_dualcots(&self, idiom: &IdiomEntry) -> Result<ChainTranscript, ChainError> {
        let n = self.options.samples_per_chain as usize;
        let mut trace = Vec::new();
        let mut origins = Vec::new();

        let literal_predictions = match self.run_literal_chain(idiom, &mut trace) {
            Ok(predictions) => predictions,
            Err(ChainError::GenerationEmpty) => {
                failed_slots(n, "literal generation produced no sentences", step::LITERAL_GENERATE)
            }
            Err(e) => return Err(e),
        };
        let etymological_predictions = match self.run_etymological_chain(idiom, &mut trace) {
            Ok((origin, predictions)) => {
                origins.push(origin);
                predictions
            }
            Err(ChainError::OriginEmpty) => {
                failed_slots(n, "origin elicitation produced no text", step::ETYM_ORIGIN)
            }
            Err(ChainError::GenerationEmpty) => {
                failed_slots(n, "etymological generation produced no examples", step::ETYM_EXAMPLES)
            }
            Err(e) => return Err(e),
        };

        let combined: Vec<ChainPrediction> =
            literal_predictions.iter().chain(etymological_predictions.iter()).cloned().collect();
        let (final_label, vote_tally) =
            tally_votes(&combined).map_err(|NoVotes| ChainError::NoVotes)?;
        Ok(ChainTranscript {
            idiom: idiom.clone(),
            strategy: StrategyKind::DualCoTs,
            requests_and_responses: trace,
            origins,
            literal_predictions,
            etymological_predictions,
            final_label,
            vote_tally,
        })
    }

    fn elicit_origin(
        &self,
        trace: &mut Vec<Exchange>,
        idiom: &IdiomEntry,
        strategy: StrategyKind,
        step_name: &str,
        sample_index: u32,
    ) -> Result<String, ChainError> {
        let origin = self.call(
            trace,
            idiom.language,
            strategy,
            step_name,
            &[("idiom", &idiom.surface)],
            self.options.gen_temperature,
            sample_index,
        )?;
        let origin = origin.trim().to_string();
        if origin.is_empty() {
            return Err(ChainError::OriginEmpty);
        }
        Ok(origin)
    }

    #[allow(clippy::too_many_arguments)]
    fn call(
        &self,
        trace: &mut Vec<Exchange>,
        language: Language,
        strategy: StrategyKind,
        step_name: &str,
        vars: &[(&str, &str)],
        temperature: f64,
        sample_index: u32,
    ) -> Result<String, ChainError> {
        let prompt = self.templates.render(language, strategy, step_name, vars)?;
        let request = ChatRequest {
            messages: vec![ChatMessage::user(&prompt)],
            params: GenerationParams {
                model: self.options.model.clone(),
                temperature,
                max_tokens: self.options.max_tokens,
                sample_index,
            },
        };
        let response = self.backend.complete(&request)?;
        trace.push(Exchange { step: step_name.into(), request, response: response.text.clone() });
        Ok(response.text)
    }
}

fn judge(response: &str, language: Language, step_trace: Vec<String>) -> ChainPrediction {
    match parse_sentiment_label(response, language) {
        Ok(parsed) => ChainPrediction::labeled(parsed.label, response, step_trace),
        Err(Unparseable) => {
            ChainPrediction::failed("no sentiment keyword found", response, step_trace)
        }
    }
}

fn failed_slots(n: usize, reason: &str, step_name: &str) -> Vec<ChainPrediction> {
    (0..n).map(|_| ChainPrediction::failed(reason, "", vec![step_name.into()])).collect()
}

fn single_prediction_transcript(
    idiom: &IdiomEntry,
    strategy: StrategyKind,
    trace: Vec<Exchange>,
    origins: Vec<String>,
    prediction: ChainPrediction,
) -> Result<ChainTranscript, ChainError> {
    let predictions = vec![prediction];
    let (final_label, vote_tally) =
        tally_votes(&predictions).map_err(|NoVotes| ChainError::AllUnparseable)?;
    Ok(ChainTranscript {
        idiom: idiom.clone(),
        strategy,
        requests_and_responses: trace,
        origins,
        literal_predictions: predictions,
        etymological_predictions: Vec::new(),
        final_label,
        vote_tally,
    })
}

/// Persists transcripts as JSON Lines, one transcript per line.
pub fn write_transcripts(
    path: impl AsRef<Path>,
    transcripts: &[ChainTranscript],
) -> Result<(), JsonlError> {
    jsonl::write(path, transcripts)
}

pub fn read_transcripts(path: impl AsRef<Path>) -> Result<Vec<ChainTranscript>, JsonlError> {
    jsonl::read(path)
}
