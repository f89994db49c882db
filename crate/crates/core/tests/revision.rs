mod common;

use std::collections::BTreeSet;
use std::sync::Arc;

use proptest::prelude::*;
use waypoint_core::engine::{remove_video, replace_video, slot_window, RevisionError};
use waypoint_core::llm::{Gateway, PromptKind, ScriptedProvider};
use waypoint_core::model::{validate_pathway, ConceptCluster, ConceptMap, Pathway, Position};

fn map_of(p: &Pathway) -> ConceptMap {
    ConceptMap::new(
        "m",
        p.weeks
            .iter()
            .map(|w| ConceptCluster { label: w.concept.clone(), description: w.focus.clone() })
            .collect(),
    )
}

fn changed_slots(a: &Pathway, b: &Pathway) -> Vec<Position> {
    a.videos()
        .zip(b.videos())
        .filter(|((_, x), (_, y))| serde_json::to_string(x).unwrap() != serde_json::to_string(y).unwrap())
        .map(|((p, _), _)| p)
        .collect()
}

#[test]
fn replace_changes_one_slot() {
    let (plan, provider, _) = common::fixture_plan();
    let gateway = Gateway::new(provider);
    let pos = Position::new(2, 2);
    let old = &plan.pathway;
    let new = replace_video(old, pos, &plan.pool, &BTreeSet::new(), &gateway).unwrap();
    assert_eq!(changed_slots(old, &new), vec![pos]);
    assert_eq!(new.revision, old.revision + 1);
    assert_eq!(new.pathway_id, old.pathway_id);
    let before: BTreeSet<_> = old.video_ids();
    let after: BTreeSet<_> = new.video_ids();
    assert_eq!(before.symmetric_difference(&after).count(), 2);
    assert!(validate_pathway(&new, &map_of(&new)).is_ok());
    // fields the slot reply omitted are inherited
    assert_eq!(new.video_at(pos).unwrap().bloom_level, old.video_at(pos).unwrap().bloom_level);
}

#[test]
fn exclusions_exhaust_pool() {
    let (plan, provider, _) = common::fixture_plan();
    let pos = Position::new(1, 3);
    let all: BTreeSet<String> = plan.pool.concepts[0].candidates.iter().map(|c| c.video_id.clone()).collect();
    let err = replace_video(&plan.pathway, pos, &plan.pool, &all, &Gateway::new(provider)).unwrap_err();
    assert_eq!(err, RevisionError::NoReplacement(pos));
}

#[test]
fn remove_drops_the_id() {
    let (plan, provider, _) = common::fixture_plan();
    let pos = Position::new(5, 1);
    let removed = plan.pathway.video_at(pos).unwrap().video_id().to_string();
    let new = remove_video(&plan.pathway, pos, &plan.pool, &Gateway::new(provider)).unwrap();
    assert!(!new.video_ids().contains(removed.as_str()));
    assert_eq!(new.weeks[4].videos.len(), 3);
    assert!(validate_pathway(&new, &map_of(&new)).is_ok());
}

#[test]
fn remove_with_empty_pool() {
    let (plan, provider, _) = common::fixture_plan();
    let mut pool = plan.pool.clone();
    pool.concepts[2].candidates.truncate(3);
    let err = remove_video(&plan.pathway, Position::new(3, 2), &pool, &Gateway::new(provider)).unwrap_err();
    assert_eq!(err.code(), "no_replacement");
}

#[test]
fn invalid_position() {
    let (plan, provider, _) = common::fixture_plan();
    let err = remove_video(&plan.pathway, Position::new(6, 1), &plan.pool, &Gateway::new(provider)).unwrap_err();
    assert!(matches!(err, RevisionError::InvalidPosition(_)));
}

#[test]
fn slot_reply_outside_window_is_retried() {
    let (plan, _, _) = common::fixture_plan();
    let pos = Position::new(1, 2);
    let w = slot_window(&plan.pathway, pos).unwrap();
    assert_eq!((w.low, w.high), (1, 2));
    let good = r#"{"bloom_level":2,"zpd_rationale":"z","learning_objective":"o","why_selected":"w","dependency_explanation":"d"}"#;
    let script = Arc::new(
        ScriptedProvider::new()
            .push(PromptKind::SlotOrder, r#"{"bloom_level":5,"zpd_rationale":"z","learning_objective":"o","why_selected":"w","dependency_explanation":"d"}"#)
            .push(PromptKind::SlotOrder, good),
    );
    let new = replace_video(&plan.pathway, pos, &plan.pool, &BTreeSet::new(), &Gateway::new(script.clone())).unwrap();
    assert_eq!(script.count(PromptKind::SlotOrder), 2);
    assert_eq!(new.video_at(pos).unwrap().bloom_level, 2);
    assert_eq!(new.video_at(pos).unwrap().bloom_verb, "Understand");
}

#[test]
fn chain_endpoint_is_enforced() {
    let (plan, _, _) = common::fixture_plan();
    let pos = Position::new(2, 1);
    let reply = r#"{"requires_concept":"something else","zpd_rationale":"z","learning_objective":"o","why_selected":"w","dependency_explanation":"d"}"#;
    let script = Arc::new(ScriptedProvider::new().repeat(PromptKind::SlotOrder, reply));
    let err = replace_video(&plan.pathway, pos, &plan.pool, &BTreeSet::new(), &Gateway::new(script)).unwrap_err();
    assert_eq!(err.code(), "llm_exhausted");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]
    #[test]
    fn random_replacements_stay_local(week in 1u32..=5, slot in 1u8..=3, skip in 0usize..4) {
        let (plan, provider, _) = common::fixture_plan();
        let pos = Position::new(week, slot);
        let exclusions: BTreeSet<String> = plan.pool.concepts[week as usize - 1]
            .candidates
            .iter()
            .filter(|c| !plan.pathway.video_ids().contains(c.video_id.as_str()))
            .take(skip)
            .map(|c| c.video_id.clone())
            .collect();
        match replace_video(&plan.pathway, pos, &plan.pool, &exclusions, &Gateway::new(provider)) {
            Ok(new) => {
                prop_assert_eq!(changed_slots(&plan.pathway, &new), vec![pos]);
                prop_assert!(validate_pathway(&new, &map_of(&new)).is_ok());
                let id = new.video_at(pos).unwrap().video_id().to_string();
                prop_assert!(!exclusions.contains(&id));
            }
            Err(e) => prop_assert_eq!(e, RevisionError::NoReplacement(pos)),
        }
    }
}
