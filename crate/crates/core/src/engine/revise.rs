use std::collections::BTreeSet;

use super::build::slot_candidate_line;
use super::filter::rank_cmp;
use super::{CandidatePool, RevisionError};
use crate::llm::{Gateway, Params, Payload, PromptKind};
use crate::model::{
    bloom_range_for_week, validate_pathway, BloomRange, ConceptMap, ConceptCluster, Pathway,
    PathwayVideo, Position, BLOOM_VERBS,
};

/// Bloom levels a replacement at `pos` may take without breaking the week
/// range or the non-decreasing sequence around it.
pub fn slot_window(p: &Pathway, pos: Position) -> Option<BloomRange> {
    let flat: Vec<(Position, u8)> = p.videos().map(|(at, v)| (at, v.bloom_level)).collect();
    let k = flat.iter().position(|(at, _)| *at == pos)?;
    let week = bloom_range_for_week(pos.week as i64).ok()?;
    let low = k.checked_sub(1).map_or(week.low, |j| flat[j].1.max(week.low));
    let high = flat.get(k + 1).map_or(week.high, |(_, l)| (*l).min(week.high));
    (low <= high).then_some(BloomRange { low, high })
}

fn describe(v: Option<&PathwayVideo>, link: &str) -> String {
    match v {
        None => "none".into(),
        Some(v) => {
            let concept = if link == "unlocks" {
                &v.unlocks_concept
            } else {
                &v.requires_concept
            };
            format!("\"{}\" (Bloom level {}, {link} \"{concept}\")", v.video.title, v.bloom_level)
        }
    }
}

/// The concept map a pathway was validated against, rebuilt from its weeks.
fn map_of(p: &Pathway) -> ConceptMap {
    ConceptMap::new(
        p.course_description.clone(),
        p.weeks
            .iter()
            .map(|w| ConceptCluster {
                label: w.concept.clone(),
                description: w.focus.clone(),
            })
            .collect(),
    )
}

/// Swaps the video at `pos` for the best-ranked unused candidate of the
/// same concept and asks the model to annotate it for that slot.
///
/// Every other slot is left untouched; the result is a new revision of
/// the same pathway.
pub fn replace_video(
    p: &Pathway,
    pos: Position,
    pool: &CandidatePool,
    exclusions: &BTreeSet<String>,
    gateway: &Gateway,
) -> Result<Pathway, RevisionError> {
    let old = p.video_at(pos).ok_or(RevisionError::InvalidPosition(pos))?;
    if pool.concepts.len() != p.weeks.len() {
        return Err(RevisionError::PoolMismatch(format!(
            "{} shortlists for {} weeks",
            pool.concepts.len(),
            p.weeks.len()
        )));
    }
    let w = pos.week as usize - 1;
    let s = pos.slot as usize - 1;
    let used = p.video_ids();
    let mut options: Vec<(usize, &crate::model::VideoCandidate)> = pool.concepts[w]
        .candidates
        .iter()
        .enumerate()
        .filter(|(_, c)| !used.contains(c.video_id.as_str()) && !exclusions.contains(&c.video_id))
        .collect();
    options.sort_by(|a, b| rank_cmp(a.1, b.1));
    let Some(&(index, candidate)) = options.first() else {
        return Err(RevisionError::NoReplacement(pos));
    };
    let window = slot_window(p, pos).ok_or(RevisionError::NoReplacement(pos))?;

    let week = &p.weeks[w];
    let previous = p.videos().take_while(|(at, _)| *at != pos).last().map(|(_, v)| v);
    let next = p.videos().skip_while(|(at, _)| *at != pos).nth(1).map(|(_, v)| v);
    let required_requires = match (s, w) {
        (0, w) if w > 0 => p.weeks[w - 1].videos.last().map(|v| v.unlocks_concept.clone()),
        _ => None,
    }
    .unwrap_or_default();
    let required_unlocks = if s + 1 == week.videos.len() && w + 1 < p.weeks.len() {
        p.weeks[w + 1].videos.first().map(|v| v.requires_concept.clone()).unwrap_or_default()
    } else {
        String::new()
    };
    let mut chain_rules = String::new();
    if !required_requires.is_empty() {
        chain_rules.push_str(&format!(". Its requires_concept must be \"{required_requires}\""));
    }
    if !required_unlocks.is_empty() {
        chain_rules.push_str(&format!(". Its unlocks_concept must be \"{required_unlocks}\""));
    }

    let level = &pool.preferences.experience_level;
    let mut params = Params::new();
    for (k, v) in [
        ("topic", p.topic.clone()),
        ("experience_level", level.to_string()),
        ("week", pos.week.to_string()),
        ("slot", pos.slot.to_string()),
        ("concept", week.concept.clone()),
        ("previous_video", describe(previous, "unlocks")),
        ("next_video", describe(next, "requires")),
        ("min_bloom", window.low.to_string()),
        ("max_bloom", window.high.to_string()),
        ("chain_rules", chain_rules),
        ("candidate", slot_candidate_line(candidate)),
        ("required_requires", required_requires),
        ("required_unlocks", required_unlocks),
    ] {
        params.insert(k.into(), v);
    }
    let reply = gateway.complete(PromptKind::SlotOrder, &params)?;
    let Payload::SlotPlan(plan) = reply.payload else {
        unreachable!("slot_order replies parse to a slot plan")
    };

    let bloom_level = plan.bloom_level.unwrap_or(old.bloom_level);
    let bloom_verb = match (plan.bloom_verb.trim(), plan.bloom_level) {
        ("", Some(l)) if l != old.bloom_level => {
            BLOOM_VERBS.get(l as usize - 1).copied().unwrap_or_default().to_string()
        }
        ("", _) => old.bloom_verb.clone(),
        (verb, _) => verb.to_string(),
    };
    let fresh = PathwayVideo {
        video: candidate.clone(),
        candidate_index: index,
        bloom_level,
        bloom_verb,
        requires_concept: plan.requires_concept.unwrap_or_else(|| old.requires_concept.clone()),
        unlocks_concept: plan.unlocks_concept.unwrap_or_else(|| old.unlocks_concept.clone()),
        zpd_rationale: plan.zpd_rationale,
        learning_objective: plan.learning_objective,
        why_selected: plan.why_selected,
        dependency_explanation: plan.dependency_explanation,
        keywords: plan.keywords,
    };

    let mut revised = p.clone();
    revised.weeks[w].videos[s] = fresh;
    revised.revision = p.revision + 1;
    let report = validate_pathway(&revised, &map_of(p));
    if !report.is_ok() {
        return Err(RevisionError::Invalid(report));
    }
    Ok(revised)
}

/// Removes the video at `pos`. Weeks always hold three videos, so removal
/// is a replacement that also bars the removed id from coming back.
pub fn remove_video(
    p: &Pathway,
    pos: Position,
    pool: &CandidatePool,
    gateway: &Gateway,
) -> Result<Pathway, RevisionError> {
    let old = p.video_at(pos).ok_or(RevisionError::InvalidPosition(pos))?;
    let exclusions = BTreeSet::from([old.video_id().to_string()]);
    replace_video(p, pos, pool, &exclusions, gateway)
}
