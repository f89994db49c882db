//! Offline providers: fixture-backed [`MockProvider`] and in-memory
//! [`ScriptedProvider`].

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fs;
use std::path::Path;
use std::sync::Mutex;

use super::{LlmProvider, PromptKind, PromptRequest, ProviderError};

/// Separates alternative replies inside one fixture file.
pub const VARIANT_SEPARATOR: &str = "\n=== variant ===\n";

/// `<kind>__<digest>.txt`, or `<kind>__default.txt` when `digest` is `None`.
pub fn fixture_file_name(kind: PromptKind, digest: Option<&str>) -> String {
    format!("{}__{}.txt", kind.as_str(), digest.unwrap_or("default"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FixtureMatch {
    Exact,
    Default,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MockCall {
    pub kind: PromptKind,
    pub digest: String,
    pub matched: Option<FixtureMatch>,
}

/// Replies from a fixture directory.
///
/// Lookup is the request digest first, then the kind default. A fixture file
/// may hold several replies separated by [`VARIANT_SEPARATOR`]; the seed and
/// digest together pick one, so identical requests always see the same text.
pub struct MockProvider {
    exact: HashMap<(PromptKind, String), Vec<String>>,
    defaults: HashMap<PromptKind, Vec<String>>,
    seed: u64,
    calls: Mutex<Vec<MockCall>>,
}

impl MockProvider {
    pub fn from_dir(dir: impl AsRef<Path>, seed: u64) -> Result<Self, ProviderError> {
        let dir = dir.as_ref();
        let entries = fs::read_dir(dir)
            .map_err(|e| ProviderError::Config(format!("fixture dir {}: {e}", dir.display())))?;
        let mut files = BTreeMap::new();
        for entry in entries {
            let entry = entry.map_err(|e| ProviderError::Config(e.to_string()))?;
            let name = entry.file_name().to_string_lossy().into_owned();
            let Some(stem) = name.strip_suffix(".txt") else {
                continue;
            };
            let Some((kind, key)) = stem.split_once("__") else {
                continue;
            };
            let kind: PromptKind = kind.parse()?;
            let text = fs::read_to_string(entry.path())
                .map_err(|e| ProviderError::Config(format!("{name}: {e}")))?;
            files.insert((kind, key.to_string()), text);
        }
        Ok(Self::from_files(files, seed))
    }

    /// Builds a provider from `(kind, digest-or-"default") -> text`.
    pub fn from_files(files: BTreeMap<(PromptKind, String), String>, seed: u64) -> Self {
        let mut exact = HashMap::new();
        let mut defaults = HashMap::new();
        for ((kind, key), text) in files {
            let variants: Vec<String> = text
                .split(VARIANT_SEPARATOR)
                .map(|s| s.to_string())
                .collect();
            if key == "default" {
                defaults.insert(kind, variants);
            } else {
                exact.insert((kind, key), variants);
            }
        }
        Self {
            exact,
            defaults,
            seed,
            calls: Mutex::new(Vec::new()),
        }
    }

    pub fn calls(&self) -> Vec<MockCall> {
        self.calls.lock().unwrap().clone()
    }

    pub fn call_count(&self, kind: PromptKind) -> usize {
        self.calls.lock().unwrap().iter().filter(|c| c.kind == kind).count()
    }

    fn pick<'a>(&self, variants: &'a [String], digest: &str) -> &'a str {
        if variants.len() == 1 {
            return &variants[0];
        }
        let d = u64::from_str_radix(digest, 16).unwrap_or(0);
        let idx = (d ^ self.seed) % variants.len() as u64;
        &variants[idx as usize]
    }
}

impl LlmProvider for MockProvider {
    fn complete(&self, request: &PromptRequest) -> Result<String, ProviderError> {
        let digest = request.digest();
        let found = if let Some(v) = self.exact.get(&(request.kind, digest.clone())) {
            Some((FixtureMatch::Exact, v))
        } else {
            self.defaults.get(&request.kind).map(|v| (FixtureMatch::Default, v))
        };
        self.calls.lock().unwrap().push(MockCall {
            kind: request.kind,
            digest: digest.clone(),
            matched: found.as_ref().map(|(m, _)| *m),
        });
        match found {
            Some((_, variants)) => Ok(self.pick(variants, &digest).to_string()),
            None => Err(ProviderError::FixtureMissing {
                kind: request.kind,
                digest,
            }),
        }
    }

    fn name(&self) -> &str {
        "mock"
    }

    fn deterministic(&self) -> bool {
        true
    }
}

#[derive(Clone)]
enum Step {
    Once(Result<String, ProviderError>),
    Forever(String),
}

/// Replies from per-kind queues, in order. Records every request it sees.
#[derive(Default)]
pub struct ScriptedProvider {
    script: Mutex<HashMap<PromptKind, VecDeque<Step>>>,
    requests: Mutex<Vec<PromptRequest>>,
}

impl ScriptedProvider {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(self, kind: PromptKind, reply: impl Into<String>) -> Self {
        self.enqueue(kind, Step::Once(Ok(reply.into())));
        self
    }

    pub fn push_error(self, kind: PromptKind, error: ProviderError) -> Self {
        self.enqueue(kind, Step::Once(Err(error)));
        self
    }

    /// Answers every remaining call of `kind` with `reply`.
    pub fn repeat(self, kind: PromptKind, reply: impl Into<String>) -> Self {
        self.enqueue(kind, Step::Forever(reply.into()));
        self
    }

    fn enqueue(&self, kind: PromptKind, step: Step) {
        self.script.lock().unwrap().entry(kind).or_default().push_back(step);
    }

    pub fn requests(&self) -> Vec<PromptRequest> {
        self.requests.lock().unwrap().clone()
    }

    pub fn count(&self, kind: PromptKind) -> usize {
        self.requests.lock().unwrap().iter().filter(|r| r.kind == kind).count()
    }
}

impl LlmProvider for ScriptedProvider {
    fn complete(&self, request: &PromptRequest) -> Result<String, ProviderError> {
        self.requests.lock().unwrap().push(request.clone());
        let mut script = self.script.lock().unwrap();
        let queue = script.entry(request.kind).or_default();
        match queue.front().cloned() {
            Some(Step::Forever(reply)) => Ok(reply),
            Some(Step::Once(result)) => {
                queue.pop_front();
                result
            }
            None => Err(ProviderError::ScriptExhausted(request.kind)),
        }
    }

    fn name(&self) -> &str {
        "scripted"
    }

    fn deterministic(&self) -> bool {
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::llm::{params, render};

    fn provider(seed: u64) -> (tempfile::TempDir, MockProvider) {
        let dir = tempfile::tempdir().unwrap();
        let req = render(PromptKind::Classify, &params([("message", "exact one")])).unwrap();
        fs::write(
            dir.path().join(fixture_file_name(PromptKind::Classify, Some(&req.digest()))),
            "B",
        )
        .unwrap();
        fs::write(
            dir.path().join(fixture_file_name(PromptKind::Classify, None)),
            "A",
        )
        .unwrap();
        fs::write(
            dir.path().join(fixture_file_name(PromptKind::Answer, None)),
            format!("first{VARIANT_SEPARATOR}second{VARIANT_SEPARATOR}third"),
        )
        .unwrap();
        fs::write(dir.path().join("README.md"), "ignored").unwrap();
        let mock = MockProvider::from_dir(dir.path(), seed).unwrap();
        (dir, mock)
    }

    #[test]
    fn exact_then_default_then_missing() {
        let (_dir, mock) = provider(7);
        let exact = render(PromptKind::Classify, &params([("message", "exact one")])).unwrap();
        let other = render(PromptKind::Classify, &params([("message", "something else")])).unwrap();
        assert_eq!(mock.complete(&exact).unwrap(), "B");
        assert_eq!(mock.complete(&other).unwrap(), "A");
        let note = render(
            PromptKind::NoteFallback,
            &params([
                ("title", "t"),
                ("main_concept", "c"),
                ("keywords", "k"),
                ("learning_objective", "o"),
                ("timestamp", "0:10"),
                ("previous_notes", "(none)"),
            ]),
        )
        .unwrap();
        assert!(matches!(
            mock.complete(&note),
            Err(ProviderError::FixtureMissing { kind: PromptKind::NoteFallback, .. })
        ));
        let matched: Vec<_> = mock.calls().into_iter().map(|c| c.matched).collect();
        assert_eq!(matched, vec![Some(FixtureMatch::Exact), Some(FixtureMatch::Default), None]);
    }

    #[test]
    fn identical_requests_identical_replies() {
        let (_dir, mock) = provider(42);
        let p = params([
            ("topic", "t"),
            ("video_title", "v"),
            ("instructor", "i"),
            ("completed", "0"),
            ("total", "3"),
            ("transcript", ""),
            ("N", "3"),
            ("pathway_videos", ""),
            ("detailed_context", ""),
            ("history", "(none)"),
            ("message", "hello"),
            ("tutor_cue", "Tutor:"),
        ]);
        let req = render(PromptKind::Answer, &p).unwrap();
        let a = mock.complete(&req).unwrap();
        let b = mock.complete(&req).unwrap();
        assert_eq!(a, b);
        assert!(["first", "second", "third"].contains(&a.as_str()));
    }

    #[test]
    fn unknown_kind_in_file_name_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("summary__default.txt"), "x").unwrap();
        assert!(matches!(
            MockProvider::from_dir(dir.path(), 0),
            Err(ProviderError::UnknownKind(_))
        ));
    }
}
