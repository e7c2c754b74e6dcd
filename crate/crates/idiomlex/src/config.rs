//! Run configuration: a TOML file of defaults with command-line flags
//! layered on top (flags win). Credentials never live here; the live
//! backend reads `IDIOMLEX_API_KEY` from the environment.

use std::path::{Path, PathBuf};

use idiomlex_core::calo::CaloPolarityMap;
use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Unreadable {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("bad config {path}: {source}")]
    Invalid {
        path: PathBuf,
        #[source]
        source: toml::de::Error,
    },
    #[error("invalid configuration: {0}")]
    Bad(String),
}

/// Optional defaults, all overridable by flags.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub backend: Option<String>,
    pub fixture: Option<PathBuf>,
    pub cache_dir: Option<PathBuf>,
    pub templates: Option<PathBuf>,
    pub model: Option<String>,
    pub base_url: Option<String>,
    pub workers: Option<usize>,
    pub seed: Option<u64>,
    pub lang: Option<String>,
    pub split: Option<String>,
    pub k: Option<String>,
    pub dataset_tag: Option<String>,
    pub samples_per_chain: Option<u32>,
    pub resample_mode: Option<bool>,
    pub gen_temperature: Option<f64>,
    pub judge_temperature: Option<f64>,
    pub max_tokens: Option<u32>,
    pub requests_per_minute: Option<u32>,
    pub timeout_secs: Option<u64>,
    pub max_retries: Option<u32>,
    pub retry_base_ms: Option<u64>,
    pub source_priority: Option<Vec<String>>,
    pub ratios: Option<Vec<f64>>,
    pub sample_size: Option<usize>,
    pub annotators: Option<Vec<String>>,
    /// Overrides the coarse-emotion-to-polarity table used to derive
    /// gold labels from CALO annotations.
    pub calo_polarity: Option<CaloPolarityMap>,
}

impl FileConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let raw = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Unreadable { path: path.into(), source })?;
        toml::from_str(&raw).map_err(|source| ConfigError::Invalid { path: path.into(), source })
    }
}

/// Parses a K value: a positive integer or "all".
pub fn parse_k(raw: &str) -> Result<Option<u32>, ConfigError> {
    if raw.eq_ignore_ascii_case("all") {
        return Ok(None);
    }
    let k: u32 = raw.parse().map_err(|_| {
        ConfigError::Bad(format!("k must be a positive integer or \"all\", got {raw:?}"))
    })?;
    if k == 0 {
        return Err(ConfigError::Bad("k must be positive".into()));
    }
    Ok(Some(k))
}
