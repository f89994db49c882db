//! The learning phase: progress, assistant chat and notes over a pathway.
//!
//! Operations take a session by reference and return an updated copy, so a
//! failed call never leaves a half-applied change behind.

mod context;
mod notes;

pub use context::{
    assemble_context, ContextBundle, DetailBlock, ListingEntry, TranscriptSource,
    DESCRIPTION_BUDGET, EXCERPT_BUDGET, HISTORY_MESSAGES, TRANSCRIPT_BUDGET,
};
pub use notes::{filter_redundant, NoteContext, NOTE_HALF_WIDTH_S, REDUNDANCY_THRESHOLD};

use std::collections::BTreeSet;
use std::sync::Mutex;

use chrono::{DateTime, Duration, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;
use tracing::warn;
use uuid::Uuid;

use crate::ingest::{TranscriptCache, VideoBackend};
use crate::llm::{Gateway, GatewayError, Payload, PromptKind};
use crate::model::{
    ChatMessage, LearnerSession, Note, NoteKind, Pathway, Position, QuestionType, Role,
    SCHEMA_VERSION,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SessionError {
    #[error("no video at {0}")]
    InvalidPosition(Position),
    #[error("message is empty")]
    EmptyMessage,
    #[error("invalid note: {0}")]
    InvalidNote(String),
    #[error("timestamp {timestamp_s}s is outside the video (0-{duration_s}s)")]
    InvalidTimestamp { timestamp_s: f64, duration_s: f64 },
    #[error("session belongs to pathway {session} but {given} was supplied")]
    PathwayMismatch { session: String, given: String },
    #[error(transparent)]
    Llm(#[from] GatewayError),
    #[error("every generated bullet repeats an earlier note")]
    NoteRedundant,
    #[error("only {0} new bullet survived the repetition filter")]
    NoteTooThin(usize),
}

impl SessionError {
    pub fn code(&self) -> &'static str {
        match self {
            SessionError::InvalidPosition(_) => "invalid_position",
            SessionError::EmptyMessage => "empty_message",
            SessionError::InvalidNote(_) => "invalid_note",
            SessionError::InvalidTimestamp { .. } => "invalid_timestamp",
            SessionError::PathwayMismatch { .. } => "pathway_mismatch",
            SessionError::Llm(GatewayError::Provider(_)) => "provider_error",
            SessionError::Llm(_) => "llm_exhausted",
            SessionError::NoteRedundant => "note_redundant",
            SessionError::NoteTooThin(_) => "note_too_thin",
        }
    }
}

/// Time source for message and note timestamps.
pub trait Clock: Send + Sync {
    fn now(&self) -> DateTime<Utc>;
}

pub struct SystemClock;

impl Clock for SystemClock {
    fn now(&self) -> DateTime<Utc> {
        Utc::now()
    }
}

/// Starts at a fixed instant and advances one second per reading.
pub struct SteppingClock(Mutex<DateTime<Utc>>);

impl SteppingClock {
    pub fn new(start: DateTime<Utc>) -> Self {
        Self(Mutex::new(start))
    }
}

impl Clock for SteppingClock {
    fn now(&self) -> DateTime<Utc> {
        let mut t = self.0.lock().unwrap();
        let now = *t;
        *t += Duration::seconds(1);
        now
    }
}

/// `now`, pushed past `last` if the clock has not moved on.
fn after(last: Option<DateTime<Utc>>, now: DateTime<Utc>) -> DateTime<Utc> {
    match last {
        Some(last) if now <= last => last + Duration::milliseconds(1),
        _ => now,
    }
}

fn check_pathway(session: &LearnerSession, pathway: &Pathway) -> Result<(), SessionError> {
    if session.pathway_id != pathway.pathway_id {
        return Err(SessionError::PathwayMismatch {
            session: session.pathway_id.clone(),
            given: pathway.pathway_id.clone(),
        });
    }
    Ok(())
}

/// A fresh session at week 1, slot 1.
pub fn start_session(pathway: &Pathway) -> LearnerSession {
    LearnerSession {
        schema_version: SCHEMA_VERSION,
        session_id: format!("s_{}", Uuid::new_v4().simple()),
        pathway_id: pathway.pathway_id.clone(),
        pathway_revision: pathway.revision,
        completed: BTreeSet::new(),
        current: Position::new(1, 1),
        chat_history: Vec::new(),
        notes: Vec::new(),
    }
}

/// Fetches every pathway transcript into the cache. Returns how many are
/// cached afterwards; failures are logged and skipped.
pub fn prefetch_transcripts(
    pathway: &Pathway,
    backend: &dyn VideoBackend,
    cache: &TranscriptCache,
) -> usize {
    let mut ok = 0;
    for (_, v) in pathway.videos() {
        match cache.get_or_fetch(v.video_id(), backend) {
            Ok(_) => ok += 1,
            Err(e) => warn!(video = v.video_id(), "transcript prefetch failed: {e}"),
        }
    }
    ok
}

/// Marks `pos` done and moves `current` to the first unfinished position,
/// or the last position once everything is done.
pub fn mark_completed(
    session: &LearnerSession,
    pathway: &Pathway,
    pos: Position,
) -> Result<LearnerSession, SessionError> {
    check_pathway(session, pathway)?;
    if !pathway.is_valid_position(pos) {
        return Err(SessionError::InvalidPosition(pos));
    }
    let mut next = session.clone();
    next.completed.insert(pos);
    next.current = pathway
        .positions()
        .find(|p| !next.completed.contains(p))
        .or_else(|| pathway.positions().last())
        .unwrap_or(session.current);
    Ok(next)
}

/// Quick-action labels and the question type each one routes to.
pub const QUICK_ACTIONS: [(&str, QuestionType); 3] = [
    ("Summarize", QuestionType::CurrentVideo),
    ("Key Concepts", QuestionType::CurrentVideo),
    ("What Should I Do Next", QuestionType::Pathway),
];

/// How a question type was decided.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Routing {
    QuickAction,
    Model,
    /// The classifier failed; answered as a current-video question.
    Fallback,
}

pub fn quick_action(message: &str) -> Option<QuestionType> {
    let m = message.trim().trim_end_matches(['?', '!', '.']).trim();
    QUICK_ACTIONS
        .iter()
        .find(|(label, _)| label.eq_ignore_ascii_case(m))
        .map(|(_, t)| *t)
}

/// Routes a question. Quick actions never reach the model; a classifier
/// that cannot produce A or B falls back to the current video.
pub fn classify(message: &str, gateway: &Gateway) -> Result<(QuestionType, Routing), SessionError> {
    if message.trim().is_empty() {
        return Err(SessionError::EmptyMessage);
    }
    if let Some(t) = quick_action(message) {
        return Ok((t, Routing::QuickAction));
    }
    let params = crate::llm::params([("message", message.trim())]);
    match gateway.complete(PromptKind::Classify, &params) {
        Ok(reply) => match reply.payload {
            Payload::Classification(t) => Ok((t, Routing::Model)),
            _ => unreachable!("classify replies parse to a classification"),
        },
        Err(e) => {
            warn!("classification failed, answering from the current video: {e}");
            Ok((QuestionType::CurrentVideo, Routing::Fallback))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatReply {
    pub reply: String,
    pub classification: QuestionType,
    pub routing: Routing,
}

/// Answers `message` and appends both turns to the history.
pub fn ask(
    session: &LearnerSession,
    pathway: &Pathway,
    message: &str,
    gateway: &Gateway,
    transcripts: &dyn TranscriptSource,
    clock: &dyn Clock,
) -> Result<(ChatReply, LearnerSession), SessionError> {
    check_pathway(session, pathway)?;
    let message = message.trim();
    let (question_type, routing) = classify(message, gateway)?;
    let bundle = assemble_context(session, pathway, question_type, transcripts);
    let reply = gateway.complete(PromptKind::Answer, &bundle.params(message))?;
    let Payload::Answer(text) = reply.payload else {
        unreachable!("answer replies parse to text")
    };

    let mut next = session.clone();
    let asked = after(next.chat_history.last().map(|m| m.created_at), clock.now());
    next.chat_history.push(ChatMessage {
        role: Role::Learner,
        content: message.to_string(),
        classification: Some(question_type),
        created_at: asked,
    });
    next.chat_history.push(ChatMessage {
        role: Role::Assistant,
        content: text.clone(),
        classification: None,
        created_at: after(Some(asked), clock.now()),
    });
    Ok((
        ChatReply {
            reply: text,
            classification: question_type,
            routing,
        },
        next,
    ))
}

fn current_video<'a>(
    session: &LearnerSession,
    pathway: &'a Pathway,
) -> Result<(&'a crate::model::PathwayVideo, &'a str), SessionError> {
    let video = pathway
        .video_at(session.current)
        .ok_or(SessionError::InvalidPosition(session.current))?;
    let concept = pathway
        .week(session.current.week)
        .map(|w| w.concept.as_str())
        .unwrap_or_default();
    Ok((video, concept))
}

fn check_anchor(timestamp_s: f64, duration_s: f64) -> Result<(), SessionError> {
    if !(0.0..=duration_s).contains(&timestamp_s) {
        return Err(SessionError::InvalidTimestamp {
            timestamp_s,
            duration_s,
        });
    }
    Ok(())
}

/// Generates 2-3 bullets about the transcript around `timestamp_s` in the
/// current video and stores them as a note, minus any bullet that repeats
/// an earlier note on the same video.
pub fn generate_ai_note(
    session: &LearnerSession,
    pathway: &Pathway,
    timestamp_s: f64,
    gateway: &Gateway,
    transcripts: &dyn TranscriptSource,
    clock: &dyn Clock,
) -> Result<(Note, LearnerSession), SessionError> {
    check_pathway(session, pathway)?;
    let (video, concept) = current_video(session, pathway)?;
    check_anchor(timestamp_s, video.video.duration_s)?;
    let prior: Vec<&Note> = session
        .notes
        .iter()
        .filter(|n| n.video_id == video.video_id())
        .collect();
    let ctx = NoteContext::build(video, concept, timestamp_s, transcripts, &prior);
    let reply = gateway.complete(ctx.kind(), &ctx.params())?;
    let Payload::NoteBullets(bullets) = reply.payload else {
        unreachable!("note replies parse to bullets")
    };

    let prior_bullets: Vec<&str> = prior
        .iter()
        .flat_map(|n| n.bullets.iter().map(String::as_str))
        .collect();
    let kept = filter_redundant(&bullets, &prior_bullets, REDUNDANCY_THRESHOLD);
    if kept.is_empty() {
        return Err(SessionError::NoteRedundant);
    }
    if kept.len() < 2 {
        return Err(SessionError::NoteTooThin(kept.len()));
    }
    store_note(session, video.video_id(), timestamp_s, NoteKind::Ai, kept, clock)
}

/// Stores learner-written text as a one-bullet note. Never filtered.
pub fn add_manual_note(
    session: &LearnerSession,
    pathway: &Pathway,
    timestamp_s: f64,
    text: &str,
    clock: &dyn Clock,
) -> Result<(Note, LearnerSession), SessionError> {
    check_pathway(session, pathway)?;
    let text = text.trim();
    if text.is_empty() {
        return Err(SessionError::InvalidNote("text is empty".into()));
    }
    let (video, _) = current_video(session, pathway)?;
    check_anchor(timestamp_s, video.video.duration_s)?;
    store_note(
        session,
        video.video_id(),
        timestamp_s,
        NoteKind::Manual,
        vec![text.to_string()],
        clock,
    )
}

fn store_note(
    session: &LearnerSession,
    video_id: &str,
    anchor_s: f64,
    kind: NoteKind,
    bullets: Vec<String>,
    clock: &dyn Clock,
) -> Result<(Note, LearnerSession), SessionError> {
    let note = Note {
        schema_version: SCHEMA_VERSION,
        note_id: format!("n_{}", Uuid::new_v4().simple()),
        video_id: video_id.to_string(),
        anchor_s,
        kind,
        bullets,
        created_at: after(session.notes.last().map(|n| n.created_at), clock.now()),
    };
    let mut next = session.clone();
    next.notes.push(note.clone());
    Ok((note, next))
}
