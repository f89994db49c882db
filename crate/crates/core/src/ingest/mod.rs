//! Candidate retrieval, metadata verification and transcripts.
//!
//! Everything goes through a [`VideoBackend`]: either the offline
//! [`FixtureBackend`] over a `corpus.json` file, or [`LiveBackend`] talking to
//! the platform data API.

mod corpus;
mod live;
mod transcript;

pub use corpus::{Corpus, FixtureBackend, VideoRecord};
pub use live::{parse_chapters, parse_iso8601_duration, LiveBackend, LiveBackendConfig, DEFAULT_API_BASE};
pub use transcript::{
    attach_transcript, fetch_transcript, snippet, window, window_bounds, Segment, Transcript,
    TranscriptCache,
};

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{CandidateSource, ExperienceLevel, VideoCandidate};

/// Maximum candidates returned by one search phase.
pub const PHASE_CAP: usize = 25;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IngestError {
    #[error("backend unreachable: {0}")]
    Unreachable(String),
    #[error("backend error: {0}")]
    Backend(String),
    #[error("invalid corpus: {0}")]
    Corpus(String),
    #[error("cache i/o: {0}")]
    Io(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SearchPhase {
    Playlist,
    Video,
    Fallback,
}

impl SearchPhase {
    pub fn source(self) -> CandidateSource {
        match self {
            SearchPhase::Playlist => CandidateSource::Playlist,
            SearchPhase::Video => CandidateSource::Search,
            SearchPhase::Fallback => CandidateSource::Fallback,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchQuery {
    pub concept_label: String,
    pub topic: String,
    pub experience_level: ExperienceLevel,
    pub phase: SearchPhase,
}

impl SearchQuery {
    pub fn new(topic: &str, concept_label: &str, level: ExperienceLevel, phase: SearchPhase) -> Self {
        Self {
            concept_label: concept_label.to_string(),
            topic: topic.to_string(),
            experience_level: level,
            phase,
        }
    }

    /// Query string sent to the backend for this phase.
    pub fn text(&self) -> String {
        match self.phase {
            SearchPhase::Playlist | SearchPhase::Video => {
                format!("{} {}", self.topic, self.concept_label)
            }
            SearchPhase::Fallback => {
                format!("{} tutorial {}", self.concept_label, self.experience_level)
            }
        }
    }
}

/// Platform access used by the planning pipeline.
pub trait VideoBackend: Send + Sync {
    /// Up to `limit` candidates for `text` in the given phase, best first.
    fn search(
        &self,
        phase: SearchPhase,
        text: &str,
        limit: usize,
    ) -> Result<Vec<VideoCandidate>, IngestError>;

    /// The current record for a video, `None` if the platform does not know it.
    fn video(&self, video_id: &str) -> Result<Option<VideoRecord>, IngestError>;

    /// Transcript segments, `None` if the video has no transcript.
    fn transcript(&self, video_id: &str) -> Result<Option<Vec<Segment>>, IngestError>;

    fn name(&self) -> &str;

    /// Network requests issued so far.
    fn network_ops(&self) -> u64 {
        0
    }
}

impl<B: VideoBackend + ?Sized> VideoBackend for std::sync::Arc<B> {
    fn search(
        &self,
        phase: SearchPhase,
        text: &str,
        limit: usize,
    ) -> Result<Vec<VideoCandidate>, IngestError> {
        (**self).search(phase, text, limit)
    }

    fn video(&self, video_id: &str) -> Result<Option<VideoRecord>, IngestError> {
        (**self).video(video_id)
    }

    fn transcript(&self, video_id: &str) -> Result<Option<Vec<Segment>>, IngestError> {
        (**self).transcript(video_id)
    }

    fn name(&self) -> &str {
        (**self).name()
    }

    fn network_ops(&self) -> u64 {
        (**self).network_ops()
    }
}

/// Runs one search phase. Results carry the phase's source tag, are unique
/// by id and capped at [`PHASE_CAP`].
pub fn search_candidates(
    query: &SearchQuery,
    backend: &dyn VideoBackend,
) -> Result<Vec<VideoCandidate>, IngestError> {
    let found = backend.search(query.phase, &query.text(), PHASE_CAP)?;
    let mut seen = HashSet::new();
    Ok(found
        .into_iter()
        .filter(|c| seen.insert(c.video_id.clone()))
        .take(PHASE_CAP)
        .map(|mut c| {
            c.source = query.phase.source();
            c
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Rejection {
    NotFound,
    Unavailable,
    ZeroDuration,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Verification {
    Verified(VideoCandidate),
    Rejected(Rejection),
}

impl Verification {
    pub fn verified(self) -> Option<VideoCandidate> {
        match self {
            Verification::Verified(c) => Some(c),
            Verification::Rejected(_) => None,
        }
    }
}

/// Confirms a candidate against the backend record and fills its metadata.
pub fn verify_metadata(
    candidate: &VideoCandidate,
    backend: &dyn VideoBackend,
) -> Result<Verification, IngestError> {
    let Some(record) = backend.video(&candidate.video_id)? else {
        return Ok(Verification::Rejected(Rejection::NotFound));
    };
    if !record.available {
        return Ok(Verification::Rejected(Rejection::Unavailable));
    }
    if record.duration_s <= 0.0 {
        return Ok(Verification::Rejected(Rejection::ZeroDuration));
    }
    let mut c = candidate.clone();
    c.duration_s = record.duration_s;
    c.view_count = record.view_count;
    c.chapters = record.chapters;
    c.tags = record.tags;
    if c.title.is_empty() {
        c.title = record.title;
    }
    if c.channel.is_empty() {
        c.channel = record.channel;
    }
    if c.description.is_empty() {
        c.description = record.description;
    }
    Ok(Verification::Verified(c))
}
