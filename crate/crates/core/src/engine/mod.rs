//! Planning: concept map, candidate pool, ordered pathway, revisions.

mod build;
mod filter;
mod pool;
mod revise;
mod trace;

pub use build::{build_pathway, candidates_block, pathway_id};
pub use filter::{
    dedup_overlap, filter_candidates, filter_candidates_with, overlap_tokens, rank_cmp, rank_score,
    sort_by_rank, FilterPass, Filtered,
};
pub use pool::{gather_concept, gather_pool, CandidatePool, ConceptShortlist, Provenance};
pub use revise::{remove_video, replace_video, slot_window};
pub use trace::{PipelineTrace, Stage, StageRecord};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{IngestError, TranscriptCache, VideoBackend};
use crate::llm::{params, Gateway, GatewayError, Payload, PromptKind};
use crate::model::{
    validate_concept_map, ConceptMap, ModelError, Pathway, PlanningPreferences, Position,
    ValidationReport,
};

pub const SHORTLIST_CAP: usize = 8;
pub const SURVIVOR_FLOOR: usize = 6;
pub const MIN_SURVIVORS: usize = 3;
pub const DEDUP_THRESHOLD: f64 = 0.6;
pub const WIDEN_FRACTION: f64 = 0.5;
pub const SNIPPET_CHARS: usize = 400;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EngineConfig {
    pub shortlist_cap: usize,
    pub survivor_floor: usize,
    pub min_survivors: usize,
    pub dedup_threshold: f64,
    pub widen_fraction: f64,
    pub snippet_chars: usize,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            shortlist_cap: SHORTLIST_CAP,
            survivor_floor: SURVIVOR_FLOOR,
            min_survivors: MIN_SURVIVORS,
            dedup_threshold: DEDUP_THRESHOLD,
            widen_fraction: WIDEN_FRACTION,
            snippet_chars: SNIPPET_CHARS,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlanningError {
    #[error(transparent)]
    Preferences(#[from] ModelError),
    #[error(transparent)]
    Llm(#[from] GatewayError),
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error("concept map rejected: {0}")]
    InvalidConceptMap(ValidationReport),
    #[error("concept {concept_index} ({concept:?}) has only {found} usable candidates")]
    InsufficientCandidates {
        concept_index: usize,
        concept: String,
        found: usize,
    },
    #[error("week {week} slot {slot} names candidate {index}, but the concept has {available}")]
    BadIndex {
        week: usize,
        slot: usize,
        index: usize,
        available: usize,
    },
    #[error("plan failed validation twice: {0}")]
    InvalidPlan(ValidationReport),
    #[error("pool does not match the concept map: {0}")]
    PoolMismatch(String),
}

impl PlanningError {
    pub fn code(&self) -> &'static str {
        match self {
            PlanningError::Preferences(_) => "invalid_preferences",
            PlanningError::Llm(_) => "llm_exhausted",
            PlanningError::Ingest(_) => "ingest_failed",
            PlanningError::InvalidConceptMap(_) => "invalid_concept_map",
            PlanningError::InsufficientCandidates { .. } => "insufficient_candidates",
            PlanningError::BadIndex { .. } => "bad_index",
            PlanningError::InvalidPlan(_) => "invalid_plan",
            PlanningError::PoolMismatch(_) => "pool_mismatch",
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RevisionError {
    #[error("no video at {0}")]
    InvalidPosition(Position),
    #[error("no eligible replacement for {0}")]
    NoReplacement(Position),
    #[error(transparent)]
    Llm(#[from] GatewayError),
    #[error("revised pathway failed validation: {0}")]
    Invalid(ValidationReport),
    #[error("pool does not match the pathway: {0}")]
    PoolMismatch(String),
}

impl RevisionError {
    pub fn code(&self) -> &'static str {
        match self {
            RevisionError::InvalidPosition(_) => "invalid_position",
            RevisionError::NoReplacement(_) => "no_replacement",
            RevisionError::Llm(_) => "llm_exhausted",
            RevisionError::Invalid(_) => "invalid_revision",
            RevisionError::PoolMismatch(_) => "pool_mismatch",
        }
    }
}

/// Asks the model for `prefs.num_concepts` clusters. Returns the map and
/// the number of provider calls it took.
pub fn generate_concept_map(
    prefs: &PlanningPreferences,
    gateway: &Gateway,
) -> Result<(ConceptMap, u32), PlanningError> {
    prefs.validate()?;
    let n = prefs.num_concepts.to_string();
    let reply = gateway.complete(
        PromptKind::ConceptMap,
        &params([("topic", prefs.topic.as_str()), ("numConcepts", n.as_str())]),
    )?;
    let Payload::ConceptMap(map) = reply.payload else {
        unreachable!("concept_map replies parse to a concept map")
    };
    let report = validate_concept_map(&map, prefs);
    if !report.is_ok() {
        return Err(PlanningError::InvalidConceptMap(report));
    }
    Ok((map, reply.attempts))
}

/// Everything one planning run produced.
#[derive(Debug, Clone)]
pub struct Plan {
    pub concept_map: ConceptMap,
    pub pool: CandidatePool,
    pub pathway: Pathway,
    pub trace: PipelineTrace,
}

/// Runs the whole planning phase: concept map, pool, ordering.
pub fn plan(
    prefs: &PlanningPreferences,
    backend: &dyn VideoBackend,
    cache: &TranscriptCache,
    gateway: &Gateway,
    config: &EngineConfig,
) -> Result<Plan, PlanningError> {
    let prefs = prefs.clone().normalized()?;
    let (concept_map, attempts) = generate_concept_map(&prefs, gateway)?;
    let mut plan = plan_from_map(&prefs, concept_map, backend, cache, gateway, config)?;
    plan.trace.llm_calls.insert(0, (PromptKind::ConceptMap, attempts));
    Ok(plan)
}

/// The planning phase after the concept map: for a map the learner has
/// already previewed.
pub fn plan_from_map(
    prefs: &PlanningPreferences,
    concept_map: ConceptMap,
    backend: &dyn VideoBackend,
    cache: &TranscriptCache,
    gateway: &Gateway,
    config: &EngineConfig,
) -> Result<Plan, PlanningError> {
    let prefs = prefs.clone().normalized()?;
    let report = validate_concept_map(&concept_map, &prefs);
    if !report.is_ok() {
        return Err(PlanningError::InvalidConceptMap(report));
    }
    let (pool, mut trace) = gather_pool(&prefs, &concept_map, backend, cache, config)?;
    let (pathway, ordering) = build_pathway(&prefs, &concept_map, &pool, gateway)?;
    trace.merge(ordering);
    Ok(Plan {
        concept_map,
        pool,
        pathway,
        trace,
    })
}
