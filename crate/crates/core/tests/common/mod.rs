#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::Arc;

use waypoint_core::engine::{plan, EngineConfig, Plan};
use waypoint_core::ingest::{Corpus, FixtureBackend, TranscriptCache};
use waypoint_core::llm::{Gateway, MockProvider};
use waypoint_core::model::{ExperienceLevel, PlanningPreferences, VideoLength};

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn backend() -> FixtureBackend {
    FixtureBackend::new(Corpus::load(fixtures().join("corpus.json")).unwrap())
}

pub fn mock() -> Arc<MockProvider> {
    Arc::new(MockProvider::from_dir(fixtures().join("llm"), 0).unwrap())
}

pub fn prefs() -> PlanningPreferences {
    PlanningPreferences::new("communication theory", VideoLength::Medium, ExperienceLevel::Beginner, 5)
        .unwrap()
}

/// One full fixture planning run.
pub fn fixture_plan() -> (Plan, Arc<MockProvider>, FixtureBackend) {
    let backend = backend();
    let provider = mock();
    let gateway = Gateway::new(provider.clone());
    let plan = plan(&prefs(), &backend, &TranscriptCache::in_memory(), &gateway, &EngineConfig::default())
        .unwrap();
    (plan, provider, backend)
}
