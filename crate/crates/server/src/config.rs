//! Settings from a TOML file, the environment and command-line flags.
//!
//! Each source produces a [`Layer`] of optional values; [`Layer::over`]
//! stacks them so that flags beat the environment and the environment beats
//! the file.

use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use anyhow::{bail, Context};
use serde::Deserialize;
use waypoint_core::engine::EngineConfig;
use waypoint_core::ingest::{Corpus, FixtureBackend, LiveBackend, LiveBackendConfig, TranscriptCache, VideoBackend};
use waypoint_core::llm::{Gateway, LiveConfig, LlmProvider, MockProvider, OpenAiCompatible, RateLimited};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LlmMode {
    Mock,
    Live,
}

impl FromStr for LlmMode {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> anyhow::Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "mock" => Ok(Self::Mock),
            "live" => Ok(Self::Live),
            other => bail!("llm mode must be mock or live, got {other:?}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IngestMode {
    Fixture,
    Live,
}

impl FromStr for IngestMode {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> anyhow::Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "fixture" => Ok(Self::Fixture),
            "live" => Ok(Self::Live),
            other => bail!("ingest mode must be fixture or live, got {other:?}"),
        }
    }
}

/// One source of settings. `None` means "not set here".
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Layer {
    pub port: Option<u16>,
    pub store: Option<PathBuf>,
    pub static_dir: Option<PathBuf>,
    pub llm_mode: Option<LlmMode>,
    pub llm_endpoint: Option<String>,
    pub llm_model: Option<String>,
    pub llm_api_key: Option<String>,
    pub llm_timeout_s: Option<u64>,
    pub llm_concurrency: Option<usize>,
    pub max_attempts: Option<u32>,
    pub fixtures: Option<PathBuf>,
    pub mock_seed: Option<u64>,
    pub ingest_mode: Option<IngestMode>,
    pub corpus: Option<PathBuf>,
    pub cache_dir: Option<PathBuf>,
    pub video_api_key: Option<String>,
    pub video_api_base: Option<String>,
    pub transcript_command: Option<Vec<String>>,
}

macro_rules! stack {
    ($top:expr, $below:expr, $($f:ident),+) => {
        Layer { $($f: $top.$f.or($below.$f)),+ }
    };
}

impl Layer {
    /// `self` where set, otherwise `below`.
    pub fn over(self, below: Layer) -> Layer {
        stack!(
            self, below, port, store, static_dir, llm_mode, llm_endpoint, llm_model, llm_api_key,
            llm_timeout_s, llm_concurrency, max_attempts, fixtures, mock_seed, ingest_mode, corpus,
            cache_dir, video_api_key, video_api_base, transcript_command
        )
    }

    /// Reads the variables through `var`, so tests need not touch the
    /// process environment.
    pub fn from_env(var: impl Fn(&str) -> Option<String>) -> anyhow::Result<Layer> {
        let get = |k: &str| var(k).filter(|v| !v.trim().is_empty());
        let num = |k: &str| -> anyhow::Result<Option<u64>> {
            get(k).map(|v| v.trim().parse().with_context(|| format!("{k}={v:?}"))).transpose()
        };
        Ok(Layer {
            port: num("WAYPOINT_PORT")?.map(|p| p as u16),
            store: get("WAYPOINT_STORE").map(PathBuf::from),
            static_dir: get("WAYPOINT_STATIC_DIR").map(PathBuf::from),
            llm_mode: get("LLM_MODE").map(|v| v.parse()).transpose()?,
            llm_endpoint: get("LLM_ENDPOINT"),
            llm_model: get("LLM_MODEL"),
            llm_api_key: get("LLM_API_KEY"),
            llm_timeout_s: num("LLM_TIMEOUT_S")?,
            llm_concurrency: num("LLM_CONCURRENCY")?.map(|n| n as usize),
            max_attempts: num("LLM_MAX_ATTEMPTS")?.map(|n| n as u32),
            fixtures: get("LLM_FIXTURES").map(PathBuf::from),
            mock_seed: num("LLM_MOCK_SEED")?,
            ingest_mode: get("INGEST_MODE").map(|v| v.parse()).transpose()?,
            corpus: get("CORPUS_PATH").map(PathBuf::from),
            cache_dir: get("TRANSCRIPT_CACHE_DIR").map(PathBuf::from),
            video_api_key: get("VIDEO_API_KEY"),
            video_api_base: get("VIDEO_API_BASE"),
            transcript_command: get("TRANSCRIPT_COMMAND")
                .map(|v| v.split_whitespace().map(String::from).collect()),
        })
    }

    pub fn from_toml(text: &str) -> anyhow::Result<Layer> {
        let f: FileConfig = toml::from_str(text)?;
        Ok(Layer {
            port: f.port,
            store: f.store,
            static_dir: f.static_dir,
            llm_mode: f.llm.mode.map(|v| v.parse()).transpose()?,
            llm_endpoint: f.llm.endpoint,
            llm_model: f.llm.model,
            llm_api_key: f.llm.api_key,
            llm_timeout_s: f.llm.timeout_s,
            llm_concurrency: f.llm.concurrency,
            max_attempts: f.llm.max_attempts,
            fixtures: f.llm.fixtures,
            mock_seed: f.llm.seed,
            ingest_mode: f.ingest.mode.map(|v| v.parse()).transpose()?,
            corpus: f.ingest.corpus,
            cache_dir: f.ingest.cache_dir,
            video_api_key: f.ingest.api_key,
            video_api_base: f.ingest.api_base,
            transcript_command: f.ingest.transcript_command,
        })
    }

    pub fn from_file(path: &Path) -> anyhow::Result<Layer> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_toml(&text).with_context(|| format!("parsing {}", path.display()))
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct FileConfig {
    port: Option<u16>,
    store: Option<PathBuf>,
    static_dir: Option<PathBuf>,
    llm: LlmSection,
    ingest: IngestSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct LlmSection {
    mode: Option<String>,
    endpoint: Option<String>,
    model: Option<String>,
    api_key: Option<String>,
    timeout_s: Option<u64>,
    concurrency: Option<usize>,
    max_attempts: Option<u32>,
    fixtures: Option<PathBuf>,
    seed: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct IngestSection {
    mode: Option<String>,
    corpus: Option<PathBuf>,
    cache_dir: Option<PathBuf>,
    api_key: Option<String>,
    api_base: Option<String>,
    transcript_command: Option<Vec<String>>,
}

/// Fully resolved settings.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub port: u16,
    pub store: PathBuf,
    pub static_dir: Option<PathBuf>,
    pub llm: LlmSettings,
    pub ingest: IngestSettings,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LlmSettings {
    Mock { fixtures: PathBuf, seed: u64, max_attempts: u32 },
    Live { config: LiveConfig, concurrency: usize, max_attempts: u32 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum IngestSettings {
    Fixture { corpus: PathBuf, cache_dir: Option<PathBuf> },
    Live { config: LiveBackendConfig, cache_dir: Option<PathBuf> },
}

pub const DEFAULT_PORT: u16 = 8080;

impl Settings {
    pub fn resolve(layer: Layer) -> anyhow::Result<Settings> {
        let max_attempts = layer.max_attempts.unwrap_or(waypoint_core::llm::DEFAULT_MAX_ATTEMPTS);
        let llm = match layer.llm_mode.unwrap_or(LlmMode::Mock) {
            LlmMode::Mock => LlmSettings::Mock {
                fixtures: layer.fixtures.unwrap_or_else(|| PathBuf::from("fixtures/llm")),
                seed: layer.mock_seed.unwrap_or(0),
                max_attempts,
            },
            LlmMode::Live => LlmSettings::Live {
                config: LiveConfig {
                    endpoint: layer.llm_endpoint.context("live llm mode needs LLM_ENDPOINT")?,
                    model: layer.llm_model.context("live llm mode needs LLM_MODEL")?,
                    api_key: layer.llm_api_key,
                    timeout_s: layer.llm_timeout_s.unwrap_or(waypoint_core::llm::DEFAULT_TIMEOUT.as_secs()),
                    temperature: None,
                },
                concurrency: layer.llm_concurrency.unwrap_or(4).max(1),
                max_attempts,
            },
        };
        let ingest = match layer.ingest_mode.unwrap_or(IngestMode::Fixture) {
            IngestMode::Fixture => IngestSettings::Fixture {
                corpus: layer.corpus.unwrap_or_else(|| PathBuf::from("fixtures/corpus.json")),
                cache_dir: layer.cache_dir,
            },
            IngestMode::Live => IngestSettings::Live {
                config: LiveBackendConfig {
                    api_key: layer.video_api_key.context("live ingest mode needs VIDEO_API_KEY")?,
                    api_base: layer
                        .video_api_base
                        .unwrap_or_else(|| waypoint_core::ingest::DEFAULT_API_BASE.to_string()),
                    transcript_command: layer.transcript_command,
                    timeout_s: 30,
                },
                cache_dir: layer.cache_dir,
            },
        };
        Ok(Settings {
            port: layer.port.unwrap_or(DEFAULT_PORT),
            store: layer.store.unwrap_or_else(|| PathBuf::from("data")),
            static_dir: layer.static_dir,
            llm,
            ingest,
        })
    }

    pub fn gateway(&self) -> anyhow::Result<Gateway> {
        let (provider, max_attempts): (Arc<dyn LlmProvider>, u32) = match &self.llm {
            LlmSettings::Mock { fixtures, seed, max_attempts } => (
                Arc::new(MockProvider::from_dir(fixtures, *seed).context("loading llm fixtures")?),
                *max_attempts,
            ),
            LlmSettings::Live { config, concurrency, max_attempts } => (
                Arc::new(RateLimited::new(OpenAiCompatible::new(config.clone())?, *concurrency)),
                *max_attempts,
            ),
        };
        Ok(Gateway::new(provider).with_max_attempts(max_attempts))
    }

    pub fn backend(&self) -> anyhow::Result<Arc<dyn VideoBackend>> {
        Ok(match &self.ingest {
            IngestSettings::Fixture { corpus, .. } => Arc::new(FixtureBackend::new(
                Corpus::load(corpus).with_context(|| format!("loading {}", corpus.display()))?,
            )),
            IngestSettings::Live { config, .. } => Arc::new(LiveBackend::new(config.clone())?),
        })
    }

    pub fn transcript_cache(&self) -> anyhow::Result<TranscriptCache> {
        let dir = match &self.ingest {
            IngestSettings::Fixture { cache_dir, .. } | IngestSettings::Live { cache_dir, .. } => cache_dir,
        };
        Ok(match dir {
            Some(d) => TranscriptCache::with_dir(d)?,
            None => TranscriptCache::in_memory(),
        })
    }

    pub fn engine(&self) -> EngineConfig {
        EngineConfig::default()
    }
}
