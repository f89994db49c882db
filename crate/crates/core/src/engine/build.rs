use std::fmt::Write as _;
use std::time::Instant;

use serde_json::json;
use sha2::{Digest, Sha256};

use super::{CandidatePool, PipelineTrace, PlanningError, Stage};
use crate::llm::{render, Gateway, Params, PathwayPlan, Payload, PromptKind, PromptRequest};
use crate::model::{
    format_timestamp, validate_pathway, ConceptMap, Pathway, PathwayVideo, PlanningPreferences,
    ValidationReport, VideoCandidate, Week, SCHEMA_VERSION,
};
use crate::text::truncate_words;

const SNIPPET_LIMIT: usize = 400;

fn candidate_line(index: usize, c: &VideoCandidate) -> String {
    let chapters: Vec<String> = c
        .chapters
        .iter()
        .map(|ch| format!("{} {}", format_timestamp(ch.start_s), ch.title))
        .collect();
    let value = json!({
        "candidate_index": index,
        "title": c.title,
        "channel": c.channel,
        "duration": format_timestamp(c.duration_s),
        "transcript_snippet": truncate_words(&c.transcript_snippet, SNIPPET_LIMIT),
        "chapters": chapters,
        "tags": c.tags,
        "view_count": c.view_count,
        "has_transcript": c.has_transcript,
    });
    format!("[{index}] {value}")
}

/// The per-concept candidate listing placed in the ordering prompt.
pub fn candidates_block(map: &ConceptMap, pool: &CandidatePool) -> String {
    let mut out = String::new();
    for (i, (concept, list)) in map.concepts.iter().zip(&pool.concepts).enumerate() {
        if i > 0 {
            out.push('\n');
        }
        let _ = writeln!(out, "Week {} concept: \"{}\" ({})", i + 1, concept.label, concept.description);
        for (j, c) in list.candidates.iter().enumerate() {
            let _ = writeln!(out, "{}", candidate_line(j, c));
        }
    }
    out.trim_end().to_string()
}

pub(crate) fn slot_candidate_line(c: &VideoCandidate) -> String {
    candidate_line(0, c)
}

/// Stable id derived from the preferences and the chosen videos.
pub fn pathway_id(prefs: &PlanningPreferences, video_ids: &[&str]) -> String {
    let mut h = Sha256::new();
    for part in [
        prefs.topic.as_str(),
        prefs.video_length.as_str(),
        prefs.experience_level.as_str(),
    ]
    .into_iter()
    .chain(video_ids.iter().copied())
    {
        h.update((part.len() as u64).to_le_bytes());
        h.update(part.as_bytes());
    }
    format!("pw_{}", &hex::encode(h.finalize())[..16])
}

fn resolve(
    prefs: &PlanningPreferences,
    map: &ConceptMap,
    pool: &CandidatePool,
    plan: PathwayPlan,
) -> Result<Pathway, PlanningError> {
    let mut weeks = Vec::with_capacity(plan.weeks.len());
    for (w, planned) in plan.weeks.into_iter().enumerate() {
        let list = pool.shortlist(w).unwrap_or(&[]);
        let mut videos = Vec::with_capacity(planned.videos.len());
        for (s, v) in planned.videos.into_iter().enumerate() {
            let Some(candidate) = list.get(v.candidate_index) else {
                return Err(PlanningError::BadIndex {
                    week: w + 1,
                    slot: s + 1,
                    index: v.candidate_index,
                    available: list.len(),
                });
            };
            videos.push(PathwayVideo {
                video: candidate.clone(),
                candidate_index: v.candidate_index,
                bloom_level: v.bloom_level,
                bloom_verb: v.bloom_verb,
                requires_concept: v.requires_concept,
                unlocks_concept: v.unlocks_concept,
                zpd_rationale: v.zpd_rationale,
                learning_objective: v.learning_objective,
                why_selected: v.why_selected,
                dependency_explanation: v.dependency_explanation,
                keywords: v.keywords,
            });
        }
        let bloom_levels = if planned.bloom_levels.is_empty() {
            videos.iter().map(|v| v.bloom_level).collect()
        } else {
            planned.bloom_levels
        };
        weeks.push(Week {
            week_index: w as u32 + 1,
            // the map's label is authoritative; the model's echo may drift
            concept: map
                .concepts
                .get(w)
                .map(|c| c.label.clone())
                .unwrap_or(planned.concept),
            focus: planned.focus,
            bloom_levels,
            why_this_week_first: planned.why_this_week_first,
            videos,
        });
    }
    let ids: Vec<&str> = weeks
        .iter()
        .flat_map(|w| w.videos.iter().map(|v| v.video_id()))
        .collect();
    let pathway_id = pathway_id(prefs, &ids);
    Ok(Pathway {
        schema_version: SCHEMA_VERSION,
        pathway_id,
        revision: 1,
        topic: prefs.topic.clone(),
        course_title: plan.course_title,
        course_description: plan.course_description,
        bloom_progression: plan.bloom_progression,
        learning_objectives: plan.learning_objectives,
        weeks,
    })
}

fn violation_feedback(report: &ValidationReport) -> String {
    let mut out = String::from("\n\nThe previous plan broke these rules:\n");
    for v in &report.violations {
        let _ = writeln!(out, "- {v}");
    }
    out.push_str("Return a corrected plan that satisfies every rule.");
    out
}

/// Orders the pool into a pathway with the model, resolving candidate
/// indices and validating the result. A plan that fails validation is
/// retried once with the violations appended to the prompt.
pub fn build_pathway(
    prefs: &PlanningPreferences,
    map: &ConceptMap,
    pool: &CandidatePool,
    gateway: &Gateway,
) -> Result<(Pathway, PipelineTrace), PlanningError> {
    pool.check(map).map_err(PlanningError::PoolMismatch)?;
    let mut trace = PipelineTrace::default();
    let n = map.concepts.len().to_string();
    let mut params = Params::new();
    params.insert("topic".into(), prefs.topic.clone());
    params.insert("experience_level".into(), prefs.experience_level.to_string());
    params.insert("video_length".into(), prefs.video_length.as_str().into());
    params.insert("num_weeks".into(), n);
    params.insert("candidates".into(), candidates_block(map, pool));
    let request = render(PromptKind::PathwayOrder, &params).map_err(crate::llm::GatewayError::from)?;

    let mut outgoing: PromptRequest = request.clone();
    let mut last = ValidationReport::default();
    for round in 0..2 {
        let started = Instant::now();
        let reply = gateway.complete_request(&outgoing)?;
        trace.llm_call(PromptKind::PathwayOrder, reply.attempts);
        let Payload::PathwayPlan(plan) = reply.payload else {
            unreachable!("pathway_order replies parse to a plan")
        };
        let planned = plan.weeks.iter().map(|w| w.videos.len()).sum();
        trace.record(Stage::Ordering, None, pool.concepts.len(), plan.weeks.len(), started);

        let started = Instant::now();
        let pathway = resolve(prefs, map, pool, plan)?;
        trace.record(Stage::Resolve, None, planned, pathway.total_videos(), started);

        let started = Instant::now();
        last = validate_pathway(&pathway, map);
        trace.record(Stage::Validate, None, pathway.total_videos(), last.violations.len(), started);
        if last.is_ok() {
            return Ok((pathway, trace));
        }
        tracing::warn!(round, violations = %last, "ordering plan rejected");
        outgoing = request.clone();
        outgoing.user_text.push_str(&violation_feedback(&last));
    }
    Err(PlanningError::InvalidPlan(last))
}
