use crate::ingest::window;
use crate::llm::{Params, PromptKind};
use crate::model::{format_timestamp, Note, PathwayVideo};
use crate::text::trigram_similarity;

use super::context::TranscriptSource;

/// Seconds either side of the anchor that feed an AI note.
pub const NOTE_HALF_WIDTH_S: f64 = 60.0;
/// Bullets at or above this trigram similarity to an earlier one are dropped.
pub const REDUNDANCY_THRESHOLD: f64 = 0.5;

/// Inputs to the note prompt for one anchor.
#[derive(Debug, Clone, PartialEq)]
pub struct NoteContext {
    pub title: String,
    pub main_concept: String,
    pub keywords: Vec<String>,
    pub learning_objective: String,
    pub window_text: String,
    pub timestamp: String,
    /// `[m:ss] bullet` lines from earlier notes on this video.
    pub previous_notes: Vec<String>,
}

impl NoteContext {
    pub fn build(
        video: &PathwayVideo,
        concept: &str,
        anchor_s: f64,
        transcripts: &dyn TranscriptSource,
        prior: &[&Note],
    ) -> Self {
        let window_text = transcripts
            .transcript(video.video_id())
            .map(|t| window(&t, anchor_s, NOTE_HALF_WIDTH_S, video.video.duration_s))
            .unwrap_or_default();
        Self {
            title: video.video.title.clone(),
            main_concept: concept.to_string(),
            keywords: video.keywords.clone(),
            learning_objective: video.learning_objective.clone(),
            window_text,
            timestamp: format_timestamp(anchor_s),
            previous_notes: prior
                .iter()
                .flat_map(|n| {
                    let at = format_timestamp(n.anchor_s);
                    n.bullets.iter().map(move |b| format!("[{at}] {b}"))
                })
                .collect(),
        }
    }

    /// The template to use: the fallback when the window holds no text.
    pub fn kind(&self) -> PromptKind {
        if self.window_text.trim().is_empty() {
            PromptKind::NoteFallback
        } else {
            PromptKind::NoteWithTranscript
        }
    }

    pub fn params(&self) -> Params {
        let previous = if self.previous_notes.is_empty() {
            "(none)".to_string()
        } else {
            self.previous_notes.join(" ")
        };
        let mut p: Params = [
            ("title", self.title.clone()),
            ("main_concept", self.main_concept.clone()),
            ("keywords", self.keywords.join(", ")),
            ("learning_objective", self.learning_objective.clone()),
            ("timestamp", self.timestamp.clone()),
            ("previous_notes", previous),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
        if self.kind() == PromptKind::NoteWithTranscript {
            p.insert("transcript_window".into(), self.window_text.clone());
        }
        p
    }
}

/// Keeps the bullets that are not near-copies of any prior bullet.
pub fn filter_redundant(bullets: &[String], prior: &[&str], threshold: f64) -> Vec<String> {
    bullets
        .iter()
        .filter(|b| prior.iter().all(|p| trigram_similarity(b, p) < threshold))
        .cloned()
        .collect()
}
