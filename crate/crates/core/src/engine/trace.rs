use std::time::Instant;

use serde::{Deserialize, Serialize};
use tracing::info;

use crate::llm::PromptKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Search,
    Verify,
    Filter,
    FallbackSearch,
    Dedup,
    Unique,
    Shortlist,
    Ordering,
    Resolve,
    Validate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: Stage,
    pub concept_index: Option<usize>,
    pub count_in: usize,
    pub count_out: usize,
    pub elapsed_ms: u64,
}

/// Observability record for one planning run. Each stage is also emitted
/// as a structured log line when recorded.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PipelineTrace {
    pub stages: Vec<StageRecord>,
    /// Concepts whose pass-1 band was widened.
    pub widened: Vec<usize>,
    /// Concepts that needed the fallback query.
    pub fallbacks: Vec<usize>,
    /// Provider calls per structured request, in call order.
    pub llm_calls: Vec<(PromptKind, u32)>,
}

impl PipelineTrace {
    pub fn record(
        &mut self,
        stage: Stage,
        concept_index: Option<usize>,
        count_in: usize,
        count_out: usize,
        started: Instant,
    ) {
        let elapsed_ms = started.elapsed().as_millis() as u64;
        info!(?stage, concept = ?concept_index, count_in, count_out, elapsed_ms, "pipeline stage");
        self.stages.push(StageRecord {
            stage,
            concept_index,
            count_in,
            count_out,
            elapsed_ms,
        });
    }

    pub fn llm_call(&mut self, kind: PromptKind, attempts: u32) {
        info!(%kind, attempts, "pipeline llm call");
        self.llm_calls.push((kind, attempts));
    }

    pub fn merge(&mut self, other: PipelineTrace) {
        self.stages.extend(other.stages);
        self.widened.extend(other.widened);
        self.fallbacks.extend(other.fallbacks);
        self.llm_calls.extend(other.llm_calls);
    }

    /// Provider calls made for `kind`.
    pub fn attempts(&self, kind: PromptKind) -> u32 {
        self.llm_calls.iter().filter(|(k, _)| *k == kind).map(|(_, n)| n).sum()
    }

    pub fn stage(&self, stage: Stage, concept_index: usize) -> Option<&StageRecord> {
        self.stages
            .iter()
            .find(|r| r.stage == stage && r.concept_index == Some(concept_index))
    }
}
