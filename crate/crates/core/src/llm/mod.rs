//! Prompt rendering, completion providers and validated structured replies.
//!
//! The flow for every LLM interaction is `render -> provider.complete ->
//! parse_structured`, wrapped by [`complete_validated`] which retries with a
//! corrective suffix when a reply does not parse.

mod gateway;
mod limit;
mod live;
pub mod mock;
mod parse;
pub mod templates;

pub use gateway::{
    complete_request, complete_validated, corrective_suffix, Gateway, GatewayError,
    StructuredReply, DEFAULT_MAX_ATTEMPTS,
};
pub use limit::{FifoLimiter, RateLimited};
pub use live::{LiveConfig, OpenAiCompatible, DEFAULT_TIMEOUT};
pub use mock::{fixture_file_name, MockProvider, ScriptedProvider};
pub use parse::{
    extract_json, parse_bullets, parse_structured, ParseError, Payload, PathwayPlan, PlannedVideo,
    PlannedWeek, SlotPlan,
};
pub use templates::render;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

/// Placeholder bindings. Sorted, so digests are stable.
pub type Params = BTreeMap<String, String>;

/// Builds [`Params`] from string pairs.
pub fn params<const N: usize>(pairs: [(&str, &str); N]) -> Params {
    pairs
        .into_iter()
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PromptKind {
    ConceptMap,
    PathwayOrder,
    /// Re-derives one slot's annotations when a video is replaced.
    SlotOrder,
    Classify,
    Answer,
    NoteWithTranscript,
    NoteFallback,
}

impl PromptKind {
    pub const ALL: [PromptKind; 7] = [
        PromptKind::ConceptMap,
        PromptKind::PathwayOrder,
        PromptKind::SlotOrder,
        PromptKind::Classify,
        PromptKind::Answer,
        PromptKind::NoteWithTranscript,
        PromptKind::NoteFallback,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PromptKind::ConceptMap => "concept_map",
            PromptKind::PathwayOrder => "pathway_order",
            PromptKind::SlotOrder => "slot_order",
            PromptKind::Classify => "classify",
            PromptKind::Answer => "answer",
            PromptKind::NoteWithTranscript => "note_with_transcript",
            PromptKind::NoteFallback => "note_fallback",
        }
    }
}

impl fmt::Display for PromptKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PromptKind {
    type Err = ProviderError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PromptKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| ProviderError::UnknownKind(s.to_string()))
    }
}

/// A fully rendered prompt.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptRequest {
    pub kind: PromptKind,
    pub system_text: String,
    pub user_text: String,
    pub params: Params,
}

impl PromptRequest {
    /// Stable digest of `(kind, sorted params)`; names mock fixture files.
    pub fn digest(&self) -> String {
        request_digest(self.kind, &self.params)
    }
}

/// First 16 hex chars of SHA-256 over the kind and length-prefixed params.
pub fn request_digest(kind: PromptKind, params: &Params) -> String {
    let mut hasher = Sha256::new();
    hasher.update(kind.as_str().as_bytes());
    hasher.update([0u8]);
    for (k, v) in params {
        hasher.update((k.len() as u64).to_le_bytes());
        hasher.update(k.as_bytes());
        hasher.update((v.len() as u64).to_le_bytes());
        hasher.update(v.as_bytes());
    }
    let digest = hasher.finalize();
    hex::encode(&digest[..8])
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TemplateError {
    #[error("template {kind} needs a value for {{{{{name}}}}}")]
    MissingPlaceholder { kind: PromptKind, name: String },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProviderError {
    #[error("transport failure: {0}")]
    Transport(String),
    #[error("provider returned HTTP {status}: {body}")]
    Http { status: u16, body: String },
    #[error("no fixture for {kind} (looked for {kind}__{digest}.txt and {kind}__default.txt)")]
    FixtureMissing { kind: PromptKind, digest: String },
    #[error("unknown prompt kind {0:?}")]
    UnknownKind(String),
    #[error("provider misconfigured: {0}")]
    Config(String),
    #[error("scripted provider has no reply left for {0}")]
    ScriptExhausted(PromptKind),
}

/// A completion backend. Implementations must be callable concurrently.
pub trait LlmProvider: Send + Sync {
    fn complete(&self, request: &PromptRequest) -> Result<String, ProviderError>;

    fn name(&self) -> &str;

    /// True when identical requests always produce identical text.
    fn deterministic(&self) -> bool;
}

impl<P: LlmProvider + ?Sized> LlmProvider for std::sync::Arc<P> {
    fn complete(&self, request: &PromptRequest) -> Result<String, ProviderError> {
        (**self).complete(request)
    }

    fn name(&self) -> &str {
        (**self).name()
    }

    fn deterministic(&self) -> bool {
        (**self).deterministic()
    }
}
