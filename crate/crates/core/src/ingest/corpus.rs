use std::cmp::Reverse;
use std::collections::BTreeMap;
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use super::{IngestError, SearchPhase, Segment, VideoBackend};
use crate::model::{CandidateSource, Chapter, VideoCandidate};
use crate::text::content_tokens;

fn yes() -> bool {
    true
}

/// A video as the platform describes it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VideoRecord {
    pub title: String,
    pub channel: String,
    pub duration_s: f64,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub tags: Vec<String>,
    #[serde(default)]
    pub chapters: Vec<Chapter>,
    #[serde(default)]
    pub view_count: u64,
    #[serde(default = "yes")]
    pub available: bool,
}

impl VideoRecord {
    pub fn to_candidate(&self, video_id: &str, source: CandidateSource) -> VideoCandidate {
        VideoCandidate {
            video_id: video_id.to_string(),
            title: self.title.clone(),
            channel: self.channel.clone(),
            duration_s: self.duration_s,
            description: self.description.clone(),
            tags: self.tags.clone(),
            chapters: self.chapters.clone(),
            transcript_snippet: String::new(),
            view_count: self.view_count,
            has_transcript: false,
            source,
        }
    }
}

/// Offline stand-in for platform search, loaded from `corpus.json`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Corpus {
    pub videos: BTreeMap<String, VideoRecord>,
    #[serde(default)]
    pub playlists: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    pub transcripts: BTreeMap<String, Vec<Segment>>,
}

impl Corpus {
    pub fn from_json(text: &str) -> Result<Self, IngestError> {
        let corpus: Corpus =
            serde_json::from_str(text).map_err(|e| IngestError::Corpus(e.to_string()))?;
        corpus.check()?;
        Ok(corpus)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, IngestError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| IngestError::Corpus(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Every playlist entry and transcript key must name a known video.
    pub fn check(&self) -> Result<(), IngestError> {
        for (label, ids) in &self.playlists {
            if let Some(missing) = ids.iter().find(|id| !self.videos.contains_key(*id)) {
                return Err(IngestError::Corpus(format!(
                    "playlist {label:?} lists unknown video {missing:?}"
                )));
            }
        }
        if let Some(missing) = self.transcripts.keys().find(|id| !self.videos.contains_key(*id)) {
            return Err(IngestError::Corpus(format!("transcript for unknown video {missing:?}")));
        }
        Ok(())
    }
}

/// Backend over a [`Corpus`]; never touches the network.
///
/// - playlist phase: the playlists whose label shares the most content
///   tokens with the query (ties all returned, label order);
/// - video and fallback phases: videos whose title, tags and description
///   contain at least half of the query's content tokens, most overlap
///   first, then most viewed, then by id.
#[derive(Debug, Default)]
pub struct FixtureBackend {
    corpus: Corpus,
    lookups: AtomicU64,
}

impl FixtureBackend {
    pub fn new(corpus: Corpus) -> Self {
        Self {
            corpus,
            lookups: AtomicU64::new(0),
        }
    }

    pub fn corpus(&self) -> &Corpus {
        &self.corpus
    }

    /// Backend calls served so far (search, metadata and transcript).
    pub fn lookups(&self) -> u64 {
        self.lookups.load(Ordering::Relaxed)
    }

    fn playlist_hits(&self, text: &str, limit: usize) -> Vec<VideoCandidate> {
        let query = content_tokens(text);
        let scored: Vec<(usize, &String)> = self
            .corpus
            .playlists
            .keys()
            .map(|label| (content_tokens(label).intersection(&query).count(), label))
            .filter(|(score, _)| *score > 0)
            .collect();
        let Some(best) = scored.iter().map(|(s, _)| *s).max() else {
            return Vec::new();
        };
        scored
            .into_iter()
            .filter(|(s, _)| *s == best)
            .flat_map(|(_, label)| self.corpus.playlists[label].iter())
            .map(|id| self.corpus.videos[id].to_candidate(id, CandidateSource::Playlist))
            .take(limit)
            .collect()
    }

    fn keyword_hits(&self, text: &str, limit: usize, source: CandidateSource) -> Vec<VideoCandidate> {
        let query = content_tokens(text);
        if query.is_empty() {
            return Vec::new();
        }
        let needed = query.len().div_ceil(2);
        let mut hits: Vec<(usize, &String, &VideoRecord)> = self
            .corpus
            .videos
            .iter()
            .filter_map(|(id, rec)| {
                let doc = content_tokens(&format!(
                    "{} {} {}",
                    rec.title,
                    rec.tags.join(" "),
                    rec.description
                ));
                let overlap = doc.intersection(&query).count();
                (overlap >= needed).then_some((overlap, id, rec))
            })
            .collect();
        hits.sort_by_key(|(overlap, id, rec)| (Reverse(*overlap), Reverse(rec.view_count), *id));
        hits.into_iter()
            .take(limit)
            .map(|(_, id, rec)| rec.to_candidate(id, source))
            .collect()
    }
}

impl VideoBackend for FixtureBackend {
    fn search(
        &self,
        phase: SearchPhase,
        text: &str,
        limit: usize,
    ) -> Result<Vec<VideoCandidate>, IngestError> {
        self.lookups.fetch_add(1, Ordering::Relaxed);
        Ok(match phase {
            SearchPhase::Playlist => self.playlist_hits(text, limit),
            SearchPhase::Video | SearchPhase::Fallback => {
                self.keyword_hits(text, limit, phase.source())
            }
        })
    }

    fn video(&self, video_id: &str) -> Result<Option<VideoRecord>, IngestError> {
        self.lookups.fetch_add(1, Ordering::Relaxed);
        Ok(self.corpus.videos.get(video_id).cloned())
    }

    fn transcript(&self, video_id: &str) -> Result<Option<Vec<Segment>>, IngestError> {
        self.lookups.fetch_add(1, Ordering::Relaxed);
        Ok(self.corpus.transcripts.get(video_id).cloned())
    }

    fn name(&self) -> &str {
        "fixture"
    }
}
