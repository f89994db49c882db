use std::collections::HashSet;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::filter::{dedup_overlap, filter_candidates_with, FilterPass};
use super::{EngineConfig, PipelineTrace, PlanningError, Stage};
use crate::ingest::{
    attach_transcript, search_candidates, verify_metadata, SearchPhase, SearchQuery,
    TranscriptCache, VideoBackend,
};
use crate::model::{
    CandidateSource, ConceptMap, PlanningPreferences, VideoCandidate, SCHEMA_VERSION,
    VIDEOS_PER_WEEK,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConceptShortlist {
    pub concept: String,
    pub candidates: Vec<VideoCandidate>,
}

/// Shortlisted candidates per concept, counted by where they came from.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub playlist: usize,
    pub search: usize,
    pub fallback: usize,
}

/// Per-concept ordered shortlists handed to the ordering step and kept for
/// later revisions. No video id appears under two concepts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidatePool {
    pub schema_version: u32,
    /// Preferences the pool was gathered for; revisions reuse them.
    pub preferences: PlanningPreferences,
    pub concepts: Vec<ConceptShortlist>,
    pub provenance: Provenance,
}

impl CandidatePool {
    pub fn new(preferences: PlanningPreferences, concepts: Vec<ConceptShortlist>) -> Self {
        let mut provenance = Provenance::default();
        for c in concepts.iter().flat_map(|s| &s.candidates) {
            match c.source {
                CandidateSource::Playlist => provenance.playlist += 1,
                CandidateSource::Search => provenance.search += 1,
                CandidateSource::Fallback => provenance.fallback += 1,
            }
        }
        Self {
            schema_version: SCHEMA_VERSION,
            preferences,
            concepts,
            provenance,
        }
    }

    /// Shortlist of the concept at 0-based `index`.
    pub fn shortlist(&self, index: usize) -> Option<&[VideoCandidate]> {
        self.concepts.get(index).map(|s| s.candidates.as_slice())
    }

    /// Checks the pool lines up with `map` and can fill every week.
    pub fn check(&self, map: &ConceptMap) -> Result<(), String> {
        if self.concepts.len() != map.concepts.len() {
            return Err(format!(
                "{} shortlists for {} concepts",
                self.concepts.len(),
                map.concepts.len()
            ));
        }
        let mut seen = HashSet::new();
        for (i, (list, concept)) in self.concepts.iter().zip(&map.concepts).enumerate() {
            if list.concept != concept.label {
                return Err(format!("shortlist {i} is for {:?}, not {:?}", list.concept, concept.label));
            }
            if list.candidates.len() < VIDEOS_PER_WEEK {
                return Err(format!("shortlist {i} has {} candidates", list.candidates.len()));
            }
            if let Some(dup) = list.candidates.iter().find(|c| !seen.insert(c.video_id.as_str())) {
                return Err(format!("video {} is listed twice", dup.video_id));
            }
        }
        Ok(())
    }
}

fn verify_all(
    found: Vec<VideoCandidate>,
    backend: &dyn VideoBackend,
    cache: &TranscriptCache,
    snippet_chars: usize,
) -> Result<Vec<VideoCandidate>, PlanningError> {
    let mut out = Vec::with_capacity(found.len());
    for c in found {
        if let Some(mut c) = verify_metadata(&c, backend)?.verified() {
            let transcript = cache.get_or_fetch(&c.video_id, backend)?;
            attach_transcript(&mut c, &transcript, snippet_chars);
            out.push(c);
        }
    }
    Ok(out)
}

/// Search, verification, two-pass filter (with fallback) and overlap dedup
/// for a single concept. The result is rank-ordered.
pub fn gather_concept(
    prefs: &PlanningPreferences,
    concept_index: usize,
    concept: &str,
    backend: &dyn VideoBackend,
    cache: &TranscriptCache,
    config: &EngineConfig,
) -> Result<(Vec<VideoCandidate>, PipelineTrace), PlanningError> {
    let mut trace = PipelineTrace::default();
    let at = Some(concept_index);
    let query = |phase| SearchQuery::new(&prefs.topic, concept, prefs.experience_level, phase);

    let started = Instant::now();
    let mut found = search_candidates(&query(SearchPhase::Playlist), backend)?;
    let mut ids: HashSet<String> = found.iter().map(|c| c.video_id.clone()).collect();
    for c in search_candidates(&query(SearchPhase::Video), backend)? {
        if ids.insert(c.video_id.clone()) {
            found.push(c);
        }
    }
    trace.record(Stage::Search, at, 0, found.len(), started);

    let started = Instant::now();
    let searched = found.len();
    let mut verified = verify_all(found, backend, cache, config.snippet_chars)?;
    trace.record(Stage::Verify, at, searched, verified.len(), started);

    let started = Instant::now();
    let mut filtered =
        filter_candidates_with(&verified, prefs, config.survivor_floor, config.widen_fraction);
    if filtered.kept.len() < config.survivor_floor {
        let fb_started = Instant::now();
        let extra = search_candidates(&query(SearchPhase::Fallback), backend)?;
        let extra: Vec<_> = extra.into_iter().filter(|c| ids.insert(c.video_id.clone())).collect();
        let fetched = extra.len();
        let extra = verify_all(extra, backend, cache, config.snippet_chars)?;
        trace.record(Stage::FallbackSearch, at, fetched, extra.len(), fb_started);
        trace.fallbacks.push(concept_index);
        verified.extend(extra);
        filtered =
            filter_candidates_with(&verified, prefs, config.survivor_floor, config.widen_fraction);
    }
    if filtered.pass == FilterPass::Widened {
        trace.widened.push(concept_index);
    }
    trace.record(Stage::Filter, at, verified.len(), filtered.kept.len(), started);
    if filtered.kept.len() < config.min_survivors {
        return Err(PlanningError::InsufficientCandidates {
            concept_index,
            concept: concept.to_string(),
            found: filtered.kept.len(),
        });
    }

    let started = Instant::now();
    let deduped = dedup_overlap(&filtered.kept, config.dedup_threshold);
    trace.record(Stage::Dedup, at, filtered.kept.len(), deduped.len(), started);
    Ok((deduped, trace))
}

/// Gathers candidates for every concept in parallel, then claims ids in
/// concept order (an id goes to the first concept that found it) and cuts
/// each list to the shortlist cap.
pub fn gather_pool(
    prefs: &PlanningPreferences,
    map: &ConceptMap,
    backend: &dyn VideoBackend,
    cache: &TranscriptCache,
    config: &EngineConfig,
) -> Result<(CandidatePool, PipelineTrace), PlanningError> {
    let results: Vec<_> = std::thread::scope(|s| {
        let handles: Vec<_> = map
            .concepts
            .iter()
            .enumerate()
            .map(|(i, c)| s.spawn(move || gather_concept(prefs, i, &c.label, backend, cache, config)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("gather thread panicked"))
            .collect()
    });

    let mut trace = PipelineTrace::default();
    let mut claimed = HashSet::new();
    let mut lists = Vec::with_capacity(results.len());
    for (i, result) in results.into_iter().enumerate() {
        let (list, concept_trace) = result?;
        trace.merge(concept_trace);
        let label = &map.concepts[i].label;

        let started = Instant::now();
        let before = list.len();
        let unique: Vec<_> = list
            .into_iter()
            .filter(|c| claimed.insert(c.video_id.clone()))
            .collect();
        trace.record(Stage::Unique, Some(i), before, unique.len(), started);

        let started = Instant::now();
        let before = unique.len();
        let shortlist: Vec<_> = unique.into_iter().take(config.shortlist_cap).collect();
        trace.record(Stage::Shortlist, Some(i), before, shortlist.len(), started);
        if shortlist.len() < config.min_survivors.max(VIDEOS_PER_WEEK) {
            return Err(PlanningError::InsufficientCandidates {
                concept_index: i,
                concept: label.clone(),
                found: shortlist.len(),
            });
        }
        lists.push(ConceptShortlist {
            concept: label.clone(),
            candidates: shortlist,
        });
    }
    Ok((CandidatePool::new(prefs.clone(), lists), trace))
}
