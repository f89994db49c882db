//! The `/v1` HTTP surface.
//!
//! Handlers run core operations on the blocking pool. Everything that
//! changes a session or a pathway holds that aggregate's lock from load to
//! save, so concurrent requests against one aggregate apply in turn.

use std::collections::{BTreeSet, HashMap};
use std::path::PathBuf;
use std::sync::{Arc, Mutex};

use axum::body::Bytes;
use axum::extract::rejection::{JsonRejection, PathRejection, QueryRejection};
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::routing::{delete, get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use tower_http::services::ServeDir;
use uuid::Uuid;
use waypoint_core::engine::{self, EngineConfig};
use waypoint_core::ingest::{TranscriptCache, VideoBackend};
use waypoint_core::llm::Gateway;
use waypoint_core::model::{LearnerSession, Note, Pathway, PlanningPreferences, Position, QuestionType};
use waypoint_core::session::{self, Clock, Routing, SystemClock};

use crate::error::ApiError;
use crate::store::{FileStore, StoredConceptMap, StoredTrace};

/// One async lock per key, created on first use.
#[derive(Default)]
pub struct KeyedLocks(Mutex<HashMap<String, Arc<tokio::sync::Mutex<()>>>>);

impl KeyedLocks {
    pub async fn lock(&self, key: &str) -> tokio::sync::OwnedMutexGuard<()> {
        let m = self.0.lock().unwrap().entry(key.to_string()).or_default().clone();
        m.lock_owned().await
    }
}

pub struct AppState {
    pub store: FileStore,
    pub gateway: Gateway,
    pub backend: Arc<dyn VideoBackend>,
    pub cache: Arc<TranscriptCache>,
    pub engine: EngineConfig,
    pub clock: Arc<dyn Clock>,
    sessions: KeyedLocks,
    pathways: KeyedLocks,
}

impl AppState {
    pub fn new(store: FileStore, gateway: Gateway, backend: Arc<dyn VideoBackend>, cache: Arc<TranscriptCache>) -> Self {
        Self {
            store,
            gateway,
            backend,
            cache,
            engine: EngineConfig::default(),
            clock: Arc::new(SystemClock),
            sessions: KeyedLocks::default(),
            pathways: KeyedLocks::default(),
        }
    }

    pub fn with_clock(mut self, clock: Arc<dyn Clock>) -> Self {
        self.clock = clock;
        self
    }
}

type Shared = Arc<AppState>;
type ApiResult<T> = Result<T, ApiError>;

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> ApiResult<T> + Send + 'static) -> ApiResult<T> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::internal(format!("worker failed: {e}")))?
}

/// The API under `/v1`, plus the static bundle at `/` when given.
pub fn router(state: AppState, static_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/health", get(health))
        .route("/concept-maps", post(create_concept_map))
        .route("/concept-maps/{id}", get(get_concept_map))
        .route("/pathways", post(create_pathway))
        .route("/pathways/{id}", get(get_pathway))
        .route("/pathways/{id}/revisions", get(list_revisions))
        .route("/pathways/{id}/videos/{week}/{slot}/replace", post(replace_slot))
        .route("/pathways/{id}/videos/{week}/{slot}", delete(remove_slot))
        .route("/traces/{id}", get(get_trace))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/progress", post(progress))
        .route("/sessions/{id}/chat", post(chat))
        .route("/sessions/{id}/notes/ai", post(ai_note))
        .route("/sessions/{id}/notes/manual", post(manual_note))
        .fallback(|| async { ApiError::not_found("no such endpoint") })
        .with_state(Arc::new(state));
    let app = Router::new().nest("/v1", api);
    match static_dir {
        Some(dir) => app.fallback_service(ServeDir::new(dir)),
        None => app.fallback(|| async { ApiError::not_found("no such endpoint") }),
    }
}

async fn health() -> Json<serde_json::Value> {
    Json(serde_json::json!({ "status": "ok" }))
}

#[derive(Debug, Deserialize)]
pub struct PrefsBody {
    pub prefs: PlanningPreferences,
}

async fn create_concept_map(
    State(app): State<Shared>,
    body: Result<Json<PrefsBody>, JsonRejection>,
) -> ApiResult<(StatusCode, Json<StoredConceptMap>)> {
    let Json(body) = body?;
    let stored = blocking(move || {
        let prefs = body.prefs.normalized().map_err(engine::PlanningError::from)?;
        let (concept_map, _) = engine::generate_concept_map(&prefs, &app.gateway)?;
        let stored = StoredConceptMap {
            concept_map_id: format!("cm_{}", Uuid::new_v4().simple()),
            preferences: prefs,
            concept_map,
        };
        app.store.save_concept_map(&stored)?;
        Ok(stored)
    })
    .await?;
    Ok((StatusCode::CREATED, Json(stored)))
}

async fn get_concept_map(
    State(app): State<Shared>,
    id: Result<Path<String>, PathRejection>,
) -> ApiResult<Json<StoredConceptMap>> {
    let Path(id) = id?;
    Ok(Json(app.store.load_concept_map(&id)?))
}

#[derive(Debug, Deserialize)]
pub struct CreatePathwayBody {
    pub concept_map_id: String,
    /// Defaults to the preferences the concept map was made with.
    #[serde(default)]
    pub prefs: Option<PlanningPreferences>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct PathwayResponse {
    #[serde(flatten)]
    pub pathway: Pathway,
    pub trace_id: String,
}

async fn create_pathway(
    State(app): State<Shared>,
    body: Result<Json<CreatePathwayBody>, JsonRejection>,
) -> ApiResult<(StatusCode, Json<PathwayResponse>)> {
    let Json(body) = body?;
    let stored = app.store.load_concept_map(&body.concept_map_id)?;
    let prefs = body.prefs.unwrap_or_else(|| stored.preferences.clone());
    let plan = {
        let app = app.clone();
        blocking(move || {
            Ok(engine::plan_from_map(
                &prefs,
                stored.concept_map,
                app.backend.as_ref(),
                &app.cache,
                &app.gateway,
                &app.engine,
            )?)
        })
        .await?
    };

    let id = plan.pathway.pathway_id.clone();
    let _guard = app.pathways.lock(&id).await;
    let response = blocking(move || {
        let mut pathway = plan.pathway;
        // Same preferences and videos give the same id; a different plan
        // for them becomes the next revision instead of replacing history.
        if let Ok(existing) = app.store.load_pathway(&id, None) {
            let mut same = existing.clone();
            same.revision = pathway.revision;
            if same != pathway {
                pathway.revision = existing.revision + 1;
            } else {
                pathway = existing;
            }
        }
        app.store.save_pathway(&pathway)?;
        app.store.save_pool(&id, &plan.pool)?;
        let trace = StoredTrace {
            trace_id: format!("tr_{}", Uuid::new_v4().simple()),
            pathway_id: id,
            trace: plan.trace,
        };
        app.store.save_trace(&trace)?;
        Ok(PathwayResponse {
            pathway,
            trace_id: trace.trace_id,
        })
    })
    .await?;
    Ok((StatusCode::CREATED, Json(response)))
}

#[derive(Debug, Deserialize)]
pub struct RevisionQuery {
    pub revision: Option<u32>,
}

async fn get_pathway(
    State(app): State<Shared>,
    id: Result<Path<String>, PathRejection>,
    query: Result<Query<RevisionQuery>, QueryRejection>,
) -> ApiResult<Json<Pathway>> {
    let Path(id) = id?;
    let Query(q) = query?;
    Ok(Json(app.store.load_pathway(&id, q.revision)?))
}

async fn list_revisions(
    State(app): State<Shared>,
    id: Result<Path<String>, PathRejection>,
) -> ApiResult<Json<serde_json::Value>> {
    let Path(id) = id?;
    let revisions = app.store.revisions(&id)?;
    Ok(Json(serde_json::json!({ "pathway_id": id, "revisions": revisions })))
}

async fn get_trace(
    State(app): State<Shared>,
    id: Result<Path<String>, PathRejection>,
) -> ApiResult<Json<StoredTrace>> {
    let Path(id) = id?;
    Ok(Json(app.store.load_trace(&id)?))
}

#[derive(Debug, Default, Deserialize)]
pub struct ReplaceBody {
    #[serde(default)]
    pub exclusions: BTreeSet<String>,
}

async fn revise(
    app: Shared,
    id: String,
    week: u32,
    slot: u8,
    exclusions: Option<BTreeSet<String>>,
) -> ApiResult<Json<Pathway>> {
    let _guard = app.pathways.lock(&id).await;
    let revised = blocking(move || {
        let current = app.store.load_pathway(&id, None)?;
        let pool = app.store.load_pool(&id)?;
        let pos = Position::new(week, slot);
        let revised = match exclusions {
            Some(ex) => engine::replace_video(&current, pos, &pool, &ex, &app.gateway)?,
            None => engine::remove_video(&current, pos, &pool, &app.gateway)?,
        };
        app.store.save_pathway(&revised)?;
        Ok(revised)
    })
    .await?;
    Ok(Json(revised))
}

async fn replace_slot(
    State(app): State<Shared>,
    path: Result<Path<(String, u32, u8)>, PathRejection>,
    body: Bytes,
) -> ApiResult<Json<Pathway>> {
    let Path((id, week, slot)) = path?;
    let body: ReplaceBody = if body.iter().all(u8::is_ascii_whitespace) {
        ReplaceBody::default()
    } else {
        serde_json::from_slice(&body).map_err(|e| ApiError::bad_request(e.to_string()))?
    };
    revise(app, id, week, slot, Some(body.exclusions)).await
}

async fn remove_slot(
    State(app): State<Shared>,
    path: Result<Path<(String, u32, u8)>, PathRejection>,
) -> ApiResult<Json<Pathway>> {
    let Path((id, week, slot)) = path?;
    revise(app, id, week, slot, None).await
}

#[derive(Debug, Deserialize)]
pub struct CreateSessionBody {
    pub pathway_id: String,
}

async fn create_session(
    State(app): State<Shared>,
    body: Result<Json<CreateSessionBody>, JsonRejection>,
) -> ApiResult<(StatusCode, Json<LearnerSession>)> {
    let Json(body) = body?;
    let pathway = app.store.load_pathway(&body.pathway_id, None)?;
    let s = session::start_session(&pathway);
    app.store.save_session(&s)?;
    // Warm the transcript cache; chat works without it.
    let bg = app.clone();
    tokio::task::spawn_blocking(move || {
        session::prefetch_transcripts(&pathway, bg.backend.as_ref(), &bg.cache);
    });
    Ok((StatusCode::CREATED, Json(s)))
}

async fn get_session(
    State(app): State<Shared>,
    id: Result<Path<String>, PathRejection>,
) -> ApiResult<Json<LearnerSession>> {
    let Path(id) = id?;
    Ok(Json(app.store.load_session(&id)?))
}

/// Runs `f` on a session and the pathway revision it follows, saving the
/// session it returns. The session lock is held throughout.
async fn with_session<T: Send + 'static>(
    app: Shared,
    id: String,
    f: impl FnOnce(&AppState, &LearnerSession, &Pathway) -> ApiResult<(T, LearnerSession)> + Send + 'static,
) -> ApiResult<T> {
    let _guard = app.sessions.lock(&id).await;
    blocking(move || {
        let s = app.store.load_session(&id)?;
        let p = app.store.load_pathway(&s.pathway_id, Some(s.pathway_revision))?;
        let (out, next) = f(&app, &s, &p)?;
        if next != s {
            app.store.save_session(&next)?;
        }
        Ok(out)
    })
    .await
}

/// Makes sure the current video's transcript is cached before a reply that
/// reads it.
fn warm_current(app: &AppState, s: &LearnerSession, p: &Pathway) {
    if let Some(v) = p.video_at(s.current) {
        if let Err(e) = app.cache.get_or_fetch(v.video_id(), app.backend.as_ref()) {
            tracing::warn!(video = v.video_id(), "transcript unavailable: {e}");
        }
    }
}

#[derive(Debug, Deserialize)]
pub struct ProgressBody {
    pub week: u32,
    pub slot: u8,
}

async fn progress(
    State(app): State<Shared>,
    id: Result<Path<String>, PathRejection>,
    body: Result<Json<ProgressBody>, JsonRejection>,
) -> ApiResult<Json<LearnerSession>> {
    let Path(id) = id?;
    let Json(body) = body?;
    let s = with_session(app, id, move |_, s, p| {
        let next = session::mark_completed(s, p, Position::new(body.week, body.slot))?;
        Ok((next.clone(), next))
    })
    .await?;
    Ok(Json(s))
}

#[derive(Debug, Deserialize)]
pub struct ChatBody {
    pub message: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ChatResponse {
    pub reply: String,
    pub classification: QuestionType,
    pub routing: Routing,
}

async fn chat(
    State(app): State<Shared>,
    id: Result<Path<String>, PathRejection>,
    body: Result<Json<ChatBody>, JsonRejection>,
) -> ApiResult<Json<ChatResponse>> {
    let Path(id) = id?;
    let Json(body) = body?;
    if body.message.trim().is_empty() {
        return Err(ApiError::new("empty_message", "message is empty"));
    }
    let reply = with_session(app, id, move |app, s, p| {
        warm_current(app, s, p);
        let (r, next) = session::ask(s, p, &body.message, &app.gateway, app.cache.as_ref(), app.clock.as_ref())?;
        Ok((
            ChatResponse {
                reply: r.reply,
                classification: r.classification,
                routing: r.routing,
            },
            next,
        ))
    })
    .await?;
    Ok(Json(reply))
}

#[derive(Debug, Deserialize)]
pub struct AiNoteBody {
    pub timestamp_s: f64,
}

async fn ai_note(
    State(app): State<Shared>,
    id: Result<Path<String>, PathRejection>,
    body: Result<Json<AiNoteBody>, JsonRejection>,
) -> ApiResult<(StatusCode, Json<Note>)> {
    let Path(id) = id?;
    let Json(body) = body?;
    let note = with_session(app, id, move |app, s, p| {
        warm_current(app, s, p);
        Ok(session::generate_ai_note(
            s,
            p,
            body.timestamp_s,
            &app.gateway,
            app.cache.as_ref(),
            app.clock.as_ref(),
        )?)
    })
    .await?;
    Ok((StatusCode::CREATED, Json(note)))
}

#[derive(Debug, Deserialize)]
pub struct ManualNoteBody {
    pub timestamp_s: f64,
    pub text: String,
}

async fn manual_note(
    State(app): State<Shared>,
    id: Result<Path<String>, PathRejection>,
    body: Result<Json<ManualNoteBody>, JsonRejection>,
) -> ApiResult<(StatusCode, Json<Note>)> {
    let Path(id) = id?;
    let Json(body) = body?;
    let note = with_session(app, id, move |app, s, p| {
        Ok(session::add_manual_note(s, p, body.timestamp_s, &body.text, app.clock.as_ref())?)
    })
    .await?;
    Ok((StatusCode::CREATED, Json(note)))
}
