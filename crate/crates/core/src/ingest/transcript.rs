use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::{IngestError, VideoBackend};
use crate::model::VideoCandidate;
use crate::text::truncate_words;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub start_s: f64,
    pub dur_s: f64,
    pub text: String,
}

impl Segment {
    pub fn end_s(&self) -> f64 {
        self.start_s + self.dur_s
    }

    /// Whether the segment shares time with `[lo, hi]`. Zero-length segments
    /// count when their instant lies inside the interval.
    pub fn overlaps(&self, lo: f64, hi: f64) -> bool {
        if self.dur_s <= 0.0 {
            return lo <= self.start_s && self.start_s <= hi;
        }
        self.start_s < hi && self.end_s() > lo
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub video_id: String,
    pub segments: Vec<Segment>,
    pub fetched_at: DateTime<Utc>,
}

impl Transcript {
    /// Sorts segments by start and clamps negative starts to zero.
    pub fn new(video_id: impl Into<String>, mut segments: Vec<Segment>) -> Self {
        for s in &mut segments {
            s.start_s = s.start_s.max(0.0);
            s.dur_s = s.dur_s.max(0.0);
        }
        segments.sort_by(|a, b| a.start_s.total_cmp(&b.start_s));
        Self {
            video_id: video_id.into(),
            segments,
            fetched_at: Utc::now(),
        }
    }

    pub fn empty(video_id: impl Into<String>) -> Self {
        Self::new(video_id, Vec::new())
    }

    pub fn is_empty(&self) -> bool {
        self.segments.iter().all(|s| s.text.trim().is_empty())
    }

    /// All segment texts joined by single spaces.
    pub fn full_text(&self) -> String {
        join(self.segments.iter())
    }
}

fn join<'a>(segments: impl Iterator<Item = &'a Segment>) -> String {
    let mut out = String::new();
    for text in segments.map(|s| s.text.trim()).filter(|t| !t.is_empty()) {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(text);
    }
    out
}

/// Opening text of a transcript, cut at the last whole word that fits in
/// `max_chars` characters.
pub fn snippet(transcript: &Transcript, max_chars: usize) -> String {
    truncate_words(&transcript.full_text(), max_chars).to_string()
}

/// `[max(0, center - half), min(duration, center + half)]`.
pub fn window_bounds(center_s: f64, half_width_s: f64, duration_s: f64) -> (f64, f64) {
    (
        (center_s - half_width_s).max(0.0),
        (center_s + half_width_s).min(duration_s),
    )
}

/// Text of every segment overlapping the clamped window around `center_s`.
pub fn window(transcript: &Transcript, center_s: f64, half_width_s: f64, duration_s: f64) -> String {
    let (lo, hi) = window_bounds(center_s, half_width_s, duration_s);
    if hi < lo {
        return String::new();
    }
    join(transcript.segments.iter().filter(|s| s.overlaps(lo, hi)))
}

/// Sets `has_transcript` and the snippet on a candidate.
pub fn attach_transcript(candidate: &mut VideoCandidate, transcript: &Transcript, max_chars: usize) {
    candidate.has_transcript = !transcript.is_empty();
    candidate.transcript_snippet = snippet(transcript, max_chars);
}

type Slot = Arc<Mutex<Option<Transcript>>>;

/// Transcript cache keyed by video id, optionally mirrored to a directory.
///
/// Each id has its own slot lock: concurrent callers for one id wait for a
/// single backend fetch, callers for different ids do not block each other.
#[derive(Debug, Default)]
pub struct TranscriptCache {
    slots: Mutex<HashMap<String, Slot>>,
    dir: Option<PathBuf>,
    backend_fetches: AtomicU64,
}

impl TranscriptCache {
    pub fn in_memory() -> Self {
        Self::default()
    }

    pub fn with_dir(dir: impl Into<PathBuf>) -> Result<Self, IngestError> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir).map_err(|e| IngestError::Io(format!("{}: {e}", dir.display())))?;
        Ok(Self {
            dir: Some(dir),
            ..Self::default()
        })
    }

    fn slot(&self, video_id: &str) -> Slot {
        self.slots
            .lock()
            .unwrap()
            .entry(video_id.to_string())
            .or_default()
            .clone()
    }

    fn file(&self, video_id: &str) -> Option<PathBuf> {
        let safe: String = video_id
            .chars()
            .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
            .collect();
        self.dir.as_ref().map(|d| d.join(format!("{safe}.json")))
    }

    fn read_disk(&self, video_id: &str) -> Option<Transcript> {
        let path = self.file(video_id)?;
        let text = std::fs::read_to_string(path).ok()?;
        serde_json::from_str::<Transcript>(&text)
            .ok()
            .filter(|t| t.video_id == video_id)
    }

    fn write_disk(&self, transcript: &Transcript) -> Result<(), IngestError> {
        let Some(path) = self.file(&transcript.video_id) else {
            return Ok(());
        };
        write_atomic(&path, &serde_json::to_vec(transcript).expect("transcript serializes"))
    }

    /// Cached transcript or one fetched from `backend`. A failed fetch
    /// leaves the cache untouched.
    pub fn get_or_fetch(
        &self,
        video_id: &str,
        backend: &dyn VideoBackend,
    ) -> Result<Transcript, IngestError> {
        let slot = self.slot(video_id);
        let mut guard = slot.lock().unwrap();
        if let Some(t) = guard.as_ref() {
            return Ok(t.clone());
        }
        if let Some(t) = self.read_disk(video_id) {
            *guard = Some(t.clone());
            return Ok(t);
        }
        self.backend_fetches.fetch_add(1, Ordering::SeqCst);
        let segments = backend.transcript(video_id)?;
        let transcript = Transcript::new(video_id, segments.unwrap_or_default());
        self.write_disk(&transcript)?;
        *guard = Some(transcript.clone());
        Ok(transcript)
    }

    /// Cached value without fetching or waiting on an in-progress fetch.
    pub fn peek(&self, video_id: &str) -> Option<Transcript> {
        let slot = self.slots.lock().unwrap().get(video_id)?.clone();
        let guard = slot.try_lock().ok()?;
        guard.clone()
    }

    /// Number of ids with a cached transcript.
    pub fn len(&self) -> usize {
        let slots: Vec<Slot> = self.slots.lock().unwrap().values().cloned().collect();
        slots
            .iter()
            .filter(|s| s.lock().map(|g| g.is_some()).unwrap_or(false))
            .count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Backend fetches performed (cache misses that reached the backend).
    pub fn backend_fetches(&self) -> u64 {
        self.backend_fetches.load(Ordering::SeqCst)
    }
}

pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), IngestError> {
    let tmp = path.with_extension("json.tmp");
    std::fs::write(&tmp, bytes).map_err(|e| IngestError::Io(format!("{}: {e}", tmp.display())))?;
    std::fs::rename(&tmp, path).map_err(|e| IngestError::Io(format!("{}: {e}", path.display())))
}

/// Fetches through the cache.
pub fn fetch_transcript(
    video_id: &str,
    backend: &dyn VideoBackend,
    cache: &TranscriptCache,
) -> Result<Transcript, IngestError> {
    cache.get_or_fetch(video_id, backend)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{Corpus, FixtureBackend, SearchPhase, VideoRecord};
    use proptest::prelude::*;

    fn seg(start_s: f64, dur_s: f64, text: &str) -> Segment {
        Segment {
            start_s,
            dur_s,
            text: text.into(),
        }
    }

    fn backend() -> FixtureBackend {
        let mut c = Corpus::default();
        for id in ["t3", "none"] {
            c.videos.insert(
                id.into(),
                VideoRecord {
                    title: id.into(),
                    channel: "c".into(),
                    duration_s: 300.0,
                    description: String::new(),
                    tags: vec![],
                    chapters: vec![],
                    view_count: 0,
                    available: true,
                },
            );
        }
        c.transcripts.insert(
            "t3".into(),
            vec![seg(20.0, 10.0, "third"), seg(0.0, 10.0, "first"), seg(10.0, 10.0, "second")],
        );
        FixtureBackend::new(c)
    }

    struct Failing;

    impl VideoBackend for Failing {
        fn search(&self, _: SearchPhase, _: &str, _: usize) -> Result<Vec<VideoCandidate>, IngestError> {
            Err(IngestError::Unreachable("down".into()))
        }
        fn video(&self, _: &str) -> Result<Option<VideoRecord>, IngestError> {
            Err(IngestError::Unreachable("down".into()))
        }
        fn transcript(&self, _: &str) -> Result<Option<Vec<Segment>>, IngestError> {
            Err(IngestError::Unreachable("down".into()))
        }
        fn name(&self) -> &str {
            "failing"
        }
    }

    #[test]
    fn cache_hit_skips_backend() {
        let b = backend();
        let cache = TranscriptCache::in_memory();
        let first = fetch_transcript("t3", &b, &cache).unwrap();
        let calls = b.lookups();
        let second = fetch_transcript("t3", &b, &cache).unwrap();
        assert_eq!(first, second);
        assert_eq!(b.lookups(), calls);
        assert_eq!(cache.backend_fetches(), 1);
    }

    #[test]
    fn ordered_segments() {
        let t = fetch_transcript("t3", &backend(), &TranscriptCache::in_memory()).unwrap();
        let texts: Vec<_> = t.segments.iter().map(|s| s.text.as_str()).collect();
        assert_eq!(texts, ["first", "second", "third"]);
    }

    #[test]
    fn missing_transcript_is_empty() {
        let t = fetch_transcript("none", &backend(), &TranscriptCache::in_memory()).unwrap();
        assert!(t.segments.is_empty());
        let mut c = backend().corpus().videos["none"].to_candidate("none", crate::model::CandidateSource::Search);
        c.has_transcript = true;
        attach_transcript(&mut c, &t, 400);
        assert!(!c.has_transcript);
        assert_eq!(c.transcript_snippet, "");
    }

    #[test]
    fn failed_fetch_not_cached() {
        let cache = TranscriptCache::in_memory();
        assert!(fetch_transcript("t3", &Failing, &cache).is_err());
        assert!(cache.peek("t3").is_none());
        assert!(fetch_transcript("t3", &backend(), &cache).is_ok());
    }

    #[test]
    fn concurrent_callers_share_one_fetch() {
        let b = backend();
        let cache = TranscriptCache::in_memory();
        let results: Vec<Transcript> = std::thread::scope(|s| {
            let handles: Vec<_> = (0..16)
                .map(|_| s.spawn(|| fetch_transcript("t3", &b, &cache).unwrap()))
                .collect();
            handles.into_iter().map(|h| h.join().unwrap()).collect()
        });
        assert_eq!(cache.backend_fetches(), 1);
        assert!(results.windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn disk_mirror_survives_new_cache() {
        let dir = tempfile::tempdir().unwrap();
        let b = backend();
        let t = fetch_transcript("t3", &b, &TranscriptCache::with_dir(dir.path()).unwrap()).unwrap();
        let fresh = TranscriptCache::with_dir(dir.path()).unwrap();
        assert_eq!(fetch_transcript("t3", &Failing, &fresh).unwrap(), t);
        assert_eq!(fresh.backend_fetches(), 0);
    }

    #[test]
    fn snippet_cases() {
        assert_eq!(snippet(&Transcript::empty("x"), 400), "");
        let hundred = Transcript::new("x", vec![seg(0.0, 5.0, &"abcd ".repeat(20))]);
        assert_eq!(snippet(&hundred, 400), "abcd ".repeat(20).trim_end());
    }

    #[test]
    fn window_clamps() {
        assert_eq!(window_bounds(30.0, 60.0, 600.0), (0.0, 90.0));
        assert_eq!(window_bounds(590.0, 60.0, 600.0), (530.0, 600.0));
        let t = Transcript::new(
            "x",
            vec![seg(0.0, 40.0, "a"), seg(40.0, 40.0, "b"), seg(80.0, 40.0, "c"), seg(120.0, 40.0, "d")],
        );
        assert_eq!(window(&t, 30.0, 60.0, 160.0), "a b c");
        assert_eq!(window(&t, 150.0, 60.0, 160.0), "c d");
    }

    proptest! {
        #[test]
        fn snippet_never_exceeds_budget(
            words in proptest::collection::vec("[a-zA-Z]{1,12}", 0..200),
            max in 1usize..500,
        ) {
            let segs = words
                .chunks(7)
                .enumerate()
                .map(|(i, w)| seg(i as f64 * 5.0, 5.0, &w.join(" ")))
                .collect();
            let t = Transcript::new("p", segs);
            let s = snippet(&t, max);
            prop_assert!(s.chars().count() <= max);
            prop_assert!(t.full_text().starts_with(&s));
        }

        #[test]
        fn window_only_uses_transcript_text(
            starts in proptest::collection::vec(0.0f64..600.0, 0..40),
            center in 0.0f64..600.0,
        ) {
            let segs: Vec<Segment> = starts
                .iter()
                .enumerate()
                .map(|(i, s)| seg(*s, 4.0, &format!("w{i}")))
                .collect();
            let t = Transcript::new("p", segs);
            let out = window(&t, center, 60.0, 600.0);
            for word in out.split(' ').filter(|w| !w.is_empty()) {
                prop_assert!(t.segments.iter().any(|s| s.text == word));
            }
        }
    }
}
