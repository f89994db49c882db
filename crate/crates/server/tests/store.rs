use std::sync::OnceLock;

use waypoint_core::engine::{plan, EngineConfig, Plan};
use waypoint_core::ingest::{Corpus, FixtureBackend, TranscriptCache};
use waypoint_core::llm::{Gateway, MockProvider};
use waypoint_core::session::{add_manual_note, ask, start_session, SteppingClock};
use waypoint_core::model::{ExperienceLevel, PlanningPreferences, Position, VideoLength};
use waypoint_server::store::{FileStore, StoreError, StoredConceptMap};

fn fixture_plan() -> &'static Plan {
    static P: OnceLock<Plan> = OnceLock::new();
    P.get_or_init(|| {
        let dir = std::path::PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures");
        let backend = FixtureBackend::new(Corpus::load(dir.join("corpus.json")).unwrap());
        let gateway = Gateway::new(std::sync::Arc::new(MockProvider::from_dir(dir.join("llm"), 0).unwrap()));
        let prefs = PlanningPreferences::new("communication theory", VideoLength::Medium, ExperienceLevel::Beginner, 5).unwrap();
        plan(&prefs, &backend, &TranscriptCache::in_memory(), &gateway, &EngineConfig::default()).unwrap()
    })
}

fn store() -> (tempfile::TempDir, FileStore) {
    let dir = tempfile::tempdir().unwrap();
    let store = FileStore::open(dir.path()).unwrap();
    (dir, store)
}

#[test]
fn pathway_and_pool_round_trip() {
    let (_d, store) = store();
    let p = &fixture_plan().pathway;
    store.save_pathway(p).unwrap();
    store.save_pool(&p.pathway_id, &fixture_plan().pool).unwrap();
    assert_eq!(&store.load_pathway(&p.pathway_id, None).unwrap(), p);
    assert_eq!(store.load_pool(&p.pathway_id).unwrap(), fixture_plan().pool);
}

#[test]
fn older_revisions_stay_loadable() {
    let (_d, store) = store();
    let p1 = fixture_plan().pathway.clone();
    store.save_pathway(&p1).unwrap();
    let mut p2 = p1.clone();
    p2.revision = 2;
    p2.course_title = "Revised".into();
    store.save_pathway(&p2).unwrap();
    assert_eq!(store.revisions(&p1.pathway_id).unwrap(), vec![1, 2]);
    assert_eq!(store.load_pathway(&p1.pathway_id, Some(1)).unwrap(), p1);
    assert_eq!(store.load_pathway(&p1.pathway_id, None).unwrap(), p2);

    // identical rewrite is fine, a different one is not
    store.save_pathway(&p1).unwrap();
    let mut clash = p1.clone();
    clash.course_title = "Other".into();
    assert!(matches!(store.save_pathway(&clash), Err(StoreError::Conflict(_))));
}

#[test]
fn session_with_history_and_notes_round_trips() {
    let (_d, store) = store();
    let p = &fixture_plan().pathway;
    store.save_pathway(p).unwrap();
    let clock = SteppingClock::new("2026-01-01T09:00:00.123Z".parse().unwrap());
    let provider = std::sync::Arc::new(
        waypoint_core::llm::ScriptedProvider::new()
            .repeat(waypoint_core::llm::PromptKind::Classify, "A")
            .repeat(waypoint_core::llm::PromptKind::Answer, "An answer with ünïcode."),
    );
    let gateway = Gateway::new(provider);
    let transcripts = std::collections::BTreeMap::new();
    let mut s = start_session(p);
    for i in 0..5 {
        s = ask(&s, p, &format!("question {i}"), &gateway, &transcripts, &clock).unwrap().1;
    }
    for i in 0..4 {
        s = add_manual_note(&s, p, i as f64 * 10.5, &format!("note {i}"), &clock).unwrap().1;
    }
    s.completed.insert(Position::new(1, 1));
    assert_eq!(s.chat_history.len(), 10);
    store.save_session(&s).unwrap();
    assert_eq!(store.load_session(&s.session_id).unwrap(), s);
}

#[test]
fn sessions_need_their_pathway() {
    let (_d, store) = store();
    let s = start_session(&fixture_plan().pathway);
    assert!(matches!(store.save_session(&s), Err(StoreError::Integrity(_))));
    assert!(matches!(store.load_session(&s.session_id), Err(StoreError::NotFound { .. })));
}

#[test]
fn concept_maps_round_trip() {
    let (_d, store) = store();
    let stored = StoredConceptMap {
        concept_map_id: "cm_1".into(),
        preferences: PlanningPreferences::new("t", VideoLength::Short, ExperienceLevel::Advanced, 3).unwrap(),
        concept_map: fixture_plan().concept_map.clone(),
    };
    store.save_concept_map(&stored).unwrap();
    assert_eq!(store.load_concept_map("cm_1").unwrap(), stored);
}
