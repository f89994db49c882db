#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::Arc;

use serde::de::DeserializeOwned;
use serde_json::Value;
use tempfile::TempDir;
use waypoint_core::llm::Gateway;
use waypoint_server::{build_state, router, AppState, Layer, Settings};

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

/// Mock model, fixture corpus, store in a temporary directory.
pub fn settings(store: &std::path::Path) -> Settings {
    Settings::resolve(Layer {
        store: Some(store.to_path_buf()),
        fixtures: Some(fixtures().join("llm")),
        corpus: Some(fixtures().join("corpus.json")),
        ..Layer::default()
    })
    .unwrap()
}

pub struct TestServer {
    pub base: String,
    pub client: reqwest::Client,
    pub dir: TempDir,
}

pub async fn spawn() -> TestServer {
    spawn_with(|s| s, None).await
}

/// Starts a server whose state `adjust` may modify, e.g. to swap the gateway.
pub async fn spawn_with(adjust: impl FnOnce(AppState) -> AppState, static_dir: Option<PathBuf>) -> TestServer {
    let dir = tempfile::tempdir().unwrap();
    let state = adjust(build_state(&settings(dir.path())).unwrap());
    let app = router(state, static_dir);
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    tokio::spawn(async move { axum::serve(listener, app).await.unwrap() });
    TestServer {
        base: format!("http://{addr}/v1"),
        client: reqwest::Client::new(),
        dir,
    }
}

pub fn with_gateway(gateway: Gateway) -> impl FnOnce(AppState) -> AppState {
    move |mut s| {
        s.gateway = gateway;
        s
    }
}

pub fn scripted(p: waypoint_core::llm::ScriptedProvider) -> (Arc<waypoint_core::llm::ScriptedProvider>, Gateway) {
    let p = Arc::new(p);
    (p.clone(), Gateway::new(p))
}

impl TestServer {
    pub async fn call(&self, method: reqwest::Method, path: &str, body: Option<Value>) -> (u16, Value) {
        let mut req = self.client.request(method, format!("{}{path}", self.base));
        if let Some(b) = body {
            req = req.json(&b);
        }
        let resp = req.send().await.unwrap();
        let status = resp.status().as_u16();
        let text = resp.text().await.unwrap();
        let value = serde_json::from_str(&text).unwrap_or(Value::String(text));
        (status, value)
    }

    pub async fn post(&self, path: &str, body: Value) -> (u16, Value) {
        self.call(reqwest::Method::POST, path, Some(body)).await
    }

    pub async fn get(&self, path: &str) -> (u16, Value) {
        self.call(reqwest::Method::GET, path, None).await
    }

    pub async fn delete(&self, path: &str) -> (u16, Value) {
        self.call(reqwest::Method::DELETE, path, None).await
    }

    /// Concept map, pathway and session for the fixture topic.
    pub async fn bootstrap(&self) -> (Value, Value, Value) {
        let (s, map) = self.post("/concept-maps", prefs()).await;
        assert_eq!(s, 201, "{map}");
        let (s, pathway) = self.post("/pathways", serde_json::json!({ "concept_map_id": map["concept_map_id"] })).await;
        assert_eq!(s, 201, "{pathway}");
        let (s, session) = self.post("/sessions", serde_json::json!({ "pathway_id": pathway["pathway_id"] })).await;
        assert_eq!(s, 201, "{session}");
        (map, pathway, session)
    }
}

pub fn prefs() -> Value {
    serde_json::json!({ "prefs": {
        "topic": "communication theory",
        "video_length": "medium",
        "experience_level": "beginner",
        "num_concepts": 5
    }})
}

/// Parses a body as a core document, failing on schema mismatch.
pub fn typed<T: DeserializeOwned>(v: &Value) -> T {
    serde_json::from_value(v.clone()).unwrap_or_else(|e| panic!("schema mismatch: {e}\n{v:#}"))
}

pub fn assert_error(status: u16, body: &Value, want_status: u16, want_code: &str) {
    assert_eq!(status, want_status, "{body}");
    assert_eq!(body["code"], want_code, "{body}");
    assert!(body["message"].as_str().is_some_and(|m| !m.is_empty()));
    assert_eq!(body.as_object().unwrap().len(), 2, "{body}");
}
