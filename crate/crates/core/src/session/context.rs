use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::ingest::{snippet, Transcript, TranscriptCache};
use crate::llm::templates::{TUTOR_CUE_CURRENT, TUTOR_CUE_PATHWAY};
use crate::llm::Params;
use crate::model::{ChatMessage, LearnerSession, Pathway, QuestionType, Role};
use crate::text::truncate_words;

pub const TRANSCRIPT_BUDGET: usize = 3000;
pub const EXCERPT_BUDGET: usize = 400;
pub const HISTORY_MESSAGES: usize = 6;
/// Descriptions in detail blocks are cut too; the prompt gives no figure.
pub const DESCRIPTION_BUDGET: usize = 300;

/// Where assembled context reads transcripts from. Lookups must not block
/// on fetches in progress: a missing transcript is empty text.
pub trait TranscriptSource {
    fn transcript(&self, video_id: &str) -> Option<Transcript>;
}

impl TranscriptSource for TranscriptCache {
    fn transcript(&self, video_id: &str) -> Option<Transcript> {
        self.peek(video_id)
    }
}

impl TranscriptSource for BTreeMap<String, Transcript> {
    fn transcript(&self, video_id: &str) -> Option<Transcript> {
        self.get(video_id).cloned()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ListingEntry {
    pub title: String,
    pub concept: String,
    pub current: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetailBlock {
    pub title: String,
    pub concept: String,
    pub description: String,
    pub excerpt: String,
}

/// Everything the assistant sees for one reply, already cut to budget.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextBundle {
    pub question_type: QuestionType,
    pub topic: String,
    pub video_title: String,
    pub instructor: String,
    pub completed: usize,
    pub total: usize,
    pub transcript: String,
    pub listing: Vec<ListingEntry>,
    /// Empty for current-video questions.
    pub details: Vec<DetailBlock>,
    /// Oldest first.
    pub history: Vec<ChatMessage>,
}

/// Builds the bundle for the session's current video.
pub fn assemble_context(
    session: &LearnerSession,
    pathway: &Pathway,
    question_type: QuestionType,
    transcripts: &dyn TranscriptSource,
) -> ContextBundle {
    let current = pathway.video_at(session.current);
    let transcript = current
        .and_then(|v| transcripts.transcript(v.video_id()))
        .map(|t| snippet(&t, TRANSCRIPT_BUDGET))
        .unwrap_or_default();

    let mut listing = Vec::with_capacity(pathway.total_videos());
    let mut details = Vec::new();
    for (pos, v) in pathway.videos() {
        let concept = pathway
            .week(pos.week)
            .map(|w| w.concept.clone())
            .unwrap_or_default();
        listing.push(ListingEntry {
            title: v.video.title.clone(),
            concept: concept.clone(),
            current: pos == session.current,
        });
        if question_type == QuestionType::Pathway {
            details.push(DetailBlock {
                title: v.video.title.clone(),
                concept,
                description: truncate_words(&v.video.description, DESCRIPTION_BUDGET).to_string(),
                excerpt: transcripts.transcript(v.video_id())
                    .map(|t| snippet(&t, EXCERPT_BUDGET))
                    .unwrap_or_default(),
            });
        }
    }

    let skip = session.chat_history.len().saturating_sub(HISTORY_MESSAGES);
    ContextBundle {
        question_type,
        topic: pathway.topic.clone(),
        video_title: current.map(|v| v.video.title.clone()).unwrap_or_default(),
        instructor: current.map(|v| v.video.channel.clone()).unwrap_or_default(),
        completed: session.completed.len(),
        total: pathway.total_videos(),
        transcript,
        listing,
        details,
        history: session.chat_history[skip..].to_vec(),
    }
}

impl ContextBundle {
    /// `1. "Title" (Concept) [CURRENT VIDEO], 2. "Title" (Concept), ...`
    pub fn listing_text(&self) -> String {
        let mut out = String::new();
        for (i, e) in self.listing.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            let _ = write!(out, "{}. \"{}\" ({})", i + 1, e.title, e.concept);
            if e.current {
                out.push_str(" [CURRENT VIDEO]");
            }
        }
        out
    }

    /// The detail section for pathway questions, empty otherwise.
    pub fn details_text(&self) -> String {
        if self.details.is_empty() {
            return String::new();
        }
        let mut out = String::from("DETAILED VIDEO CONTEXT: ");
        for (i, d) in self.details.iter().enumerate() {
            if i > 0 {
                out.push_str(" --- ");
            }
            let _ = write!(
                out,
                "{}. \"{}\" Concept: {} Desc: {} Transcript excerpt: {}",
                i + 1,
                d.title,
                d.concept,
                d.description,
                d.excerpt
            );
        }
        out.push_str("\n\n");
        out
    }

    pub fn history_text(&self) -> String {
        if self.history.is_empty() {
            return "(none)".into();
        }
        self.history
            .iter()
            .map(|m| {
                let who = match m.role {
                    Role::Learner => "Student",
                    Role::Assistant => "Tutor",
                };
                format!("{who}: {}", m.content)
            })
            .collect::<Vec<_>>()
            .join("\n")
    }

    /// Placeholder bindings for the answer prompt.
    pub fn params(&self, message: &str) -> Params {
        let cue = match self.question_type {
            QuestionType::CurrentVideo => TUTOR_CUE_CURRENT,
            QuestionType::Pathway => TUTOR_CUE_PATHWAY,
        };
        [
            ("topic", self.topic.clone()),
            ("video_title", self.video_title.clone()),
            ("instructor", self.instructor.clone()),
            ("completed", self.completed.to_string()),
            ("total", self.total.to_string()),
            ("transcript", self.transcript.clone()),
            ("N", self.listing.len().to_string()),
            ("pathway_videos", self.listing_text()),
            ("detailed_context", self.details_text()),
            ("history", self.history_text()),
            ("message", message.to_string()),
            ("tutor_cue", cue.to_string()),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
    }
}
