//! Scripted replay backend.
//!
//! Answers every completion from a fixture file and never opens a
//! connection. The fixture is JSON Lines; each line maps a request
//! fingerprint — the final user message plus the sample index — to a
//! canned response:
//!
//! ```text
//! {"prompt": "...", "sample_index": 0, "response": "..."}
//! ```
//!
//! `sample_index` defaults to 0. A request with no canned answer fails
//! loudly with `MissingFixture`; the backend never fabricates text.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{BackendError, BackendResponse, ChatBackend, ChatRequest};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplayRecord {
    pub prompt: String,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub sample_index: u32,
    pub response: String,
}

fn is_zero(n: &u32) -> bool {
    *n == 0
}

#[derive(Debug)]
pub struct ReplayBackend {
    id: String,
    answers: HashMap<(String, u32), String>,
}

impl ReplayBackend {
    /// Loads a fixture file. Later lines override earlier ones with the
    /// same fingerprint, so a fixture can be patched by appending.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, BackendError> {
        let file = File::open(path.as_ref())?;
        let mut answers = HashMap::new();
        for (number, line) in BufReader::new(file).lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let record: ReplayRecord = serde_json::from_str(&line).map_err(|e| {
                BackendError::InvalidRequest(format!(
                    "{}:{}: bad replay record: {e}",
                    path.as_ref().display(),
                    number + 1
                ))
            })?;
            answers.insert((record.prompt, record.sample_index), record.response);
        }
        Ok(Self { id: "replay".into(), answers })
    }

    pub fn from_records(records: impl IntoIterator<Item = ReplayRecord>) -> Self {
        let answers =
            records.into_iter().map(|r| ((r.prompt, r.sample_index), r.response)).collect();
        Self { id: "replay".into(), answers }
    }

    pub fn len(&self) -> usize {
        self.answers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.answers.is_empty()
    }
}

impl ChatBackend for ReplayBackend {
    fn id(&self) -> &str {
        &self.id
    }

    fn complete(&self, request: &ChatRequest) -> Result<BackendResponse, BackendError> {
        request.validate()?;
        let prompt = request.last_user_content();
        let key = (prompt.to_string(), request.params.sample_index);
        let text = self.answers.get(&key).ok_or_else(|| {
            let preview: String = prompt.chars().take(120).collect();
            BackendError::MissingFixture(format!(
                "sample {} of: {preview}",
                request.params.sample_index
            ))
        })?;
        Ok(BackendResponse {
            text: text.clone(),
            backend_id: self.id.clone(),
            cached: false,
            latency_ms: 0,
        })
    }
}
