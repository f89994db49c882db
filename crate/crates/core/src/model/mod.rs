//! Shared domain types for planning and learning.
//!
//! Every document type here has a canonical JSON encoding. Top-level
//! documents (`ConceptMap`, `Pathway`, `LearnerSession`, `Note`) carry a
//! `schema_version` field so stored files can be migrated later.

mod bloom;
pub(crate) mod validate;

pub use bloom::{bloom_range_for_week, flatten_bloom, BloomRange, BLOOM_VERBS};
pub use validate::{
    validate_concept_map, validate_pathway, ValidationReport, Violation, ViolationCode,
    GENERIC_LABELS,
};

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Current version of every canonical document.
pub const SCHEMA_VERSION: u32 = 1;

/// Videos per week. Weeks never hold fewer.
pub const VIDEOS_PER_WEEK: usize = 3;

pub const MIN_CONCEPTS: u32 = 3;
pub const MAX_CONCEPTS: u32 = 8;
pub const DEFAULT_CONCEPTS: u32 = 5;

fn schema_v1() -> u32 {
    SCHEMA_VERSION
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("week index must be at least 1, got {0}")]
    InvalidWeek(i64),
    #[error("topic must not be empty")]
    EmptyTopic,
    #[error("num_concepts must be within [{MIN_CONCEPTS}, {MAX_CONCEPTS}], got {0}")]
    ConceptCountOutOfRange(u32),
    #[error("unknown {kind} value {value:?}")]
    UnknownVariant { kind: &'static str, value: String },
}

/// Preferred video length, mapped onto a duration band.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VideoLength {
    Short,
    Medium,
    Long,
}

impl VideoLength {
    pub fn band(self) -> DurationBand {
        match self {
            VideoLength::Short => DurationBand::new(0.0, 600.0, true, false),
            VideoLength::Medium => DurationBand::new(600.0, 1500.0, true, true),
            VideoLength::Long => DurationBand::new(1500.0, f64::INFINITY, false, false),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            VideoLength::Short => "short",
            VideoLength::Medium => "medium",
            VideoLength::Long => "long",
        }
    }
}

impl FromStr for VideoLength {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "short" => Ok(Self::Short),
            "medium" => Ok(Self::Medium),
            "long" => Ok(Self::Long),
            _ => Err(ModelError::UnknownVariant {
                kind: "video_length",
                value: s.to_string(),
            }),
        }
    }
}

/// A range of durations in seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DurationBand {
    pub min_s: f64,
    pub max_s: f64,
    pub min_inclusive: bool,
    pub max_inclusive: bool,
}

impl DurationBand {
    pub const fn new(min_s: f64, max_s: f64, min_inclusive: bool, max_inclusive: bool) -> Self {
        Self {
            min_s,
            max_s,
            min_inclusive,
            max_inclusive,
        }
    }

    pub fn contains(&self, duration_s: f64) -> bool {
        let above = if self.min_inclusive {
            duration_s >= self.min_s
        } else {
            duration_s > self.min_s
        };
        let below = if self.max_inclusive {
            duration_s <= self.max_s
        } else {
            duration_s < self.max_s
        };
        above && below
    }

    /// Widens both edges by `fraction` of their value: the lower edge moves
    /// down to `min * (1 - fraction)`, the upper edge up to `max * (1 + fraction)`.
    pub fn widened(&self, fraction: f64) -> Self {
        Self {
            min_s: self.min_s * (1.0 - fraction),
            max_s: self.max_s * (1.0 + fraction),
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperienceLevel {
    Beginner,
    Intermediate,
    Advanced,
}

impl ExperienceLevel {
    pub fn as_str(self) -> &'static str {
        match self {
            ExperienceLevel::Beginner => "beginner",
            ExperienceLevel::Intermediate => "intermediate",
            ExperienceLevel::Advanced => "advanced",
        }
    }
}

impl FromStr for ExperienceLevel {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "beginner" => Ok(Self::Beginner),
            "intermediate" => Ok(Self::Intermediate),
            "advanced" => Ok(Self::Advanced),
            _ => Err(ModelError::UnknownVariant {
                kind: "experience_level",
                value: s.to_string(),
            }),
        }
    }
}

impl fmt::Display for ExperienceLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

fn default_num_concepts() -> u32 {
    DEFAULT_CONCEPTS
}

/// What the learner asked for before planning starts.
///
/// Construct through [`PlanningPreferences::new`] or call [`validate`] after
/// deserializing; the type itself does not enforce its invariants.
///
/// [`validate`]: PlanningPreferences::validate
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanningPreferences {
    pub topic: String,
    pub video_length: VideoLength,
    pub experience_level: ExperienceLevel,
    #[serde(default = "default_num_concepts")]
    pub num_concepts: u32,
}

impl PlanningPreferences {
    pub fn new(
        topic: &str,
        video_length: VideoLength,
        experience_level: ExperienceLevel,
        num_concepts: u32,
    ) -> Result<Self, ModelError> {
        let prefs = Self {
            topic: topic.trim().to_string(),
            video_length,
            experience_level,
            num_concepts,
        };
        prefs.validate()?;
        Ok(prefs)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.topic.trim().is_empty() {
            return Err(ModelError::EmptyTopic);
        }
        if !(MIN_CONCEPTS..=MAX_CONCEPTS).contains(&self.num_concepts) {
            return Err(ModelError::ConceptCountOutOfRange(self.num_concepts));
        }
        Ok(())
    }

    /// Trims the topic in place and validates.
    pub fn normalized(mut self) -> Result<Self, ModelError> {
        self.topic = self.topic.trim().to_string();
        self.validate()?;
        Ok(self)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConceptCluster {
    pub label: String,
    pub description: String,
}

/// Ordered concept clusters, foundational first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConceptMap {
    #[serde(default = "schema_v1")]
    pub schema_version: u32,
    pub description: String,
    pub concepts: Vec<ConceptCluster>,
}

impl ConceptMap {
    pub fn new(description: impl Into<String>, concepts: Vec<ConceptCluster>) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            description: description.into(),
            concepts,
        }
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.concepts.iter().map(|c| c.label.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Chapter {
    pub start_s: f64,
    pub title: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CandidateSource {
    Playlist,
    Search,
    Fallback,
}

/// A retrieved video together with the signals the ordering step reads.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VideoCandidate {
    pub video_id: String,
    pub title: String,
    pub channel: String,
    pub duration_s: f64,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub tags: Vec<String>,
    #[serde(default)]
    pub chapters: Vec<Chapter>,
    #[serde(default)]
    pub transcript_snippet: String,
    #[serde(default)]
    pub view_count: u64,
    #[serde(default)]
    pub has_transcript: bool,
    pub source: CandidateSource,
}

/// One video slot of a week, with its pedagogical annotations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathwayVideo {
    #[serde(flatten)]
    pub video: VideoCandidate,
    pub candidate_index: usize,
    pub bloom_level: u8,
    pub bloom_verb: String,
    pub requires_concept: String,
    pub unlocks_concept: String,
    pub zpd_rationale: String,
    pub learning_objective: String,
    pub why_selected: String,
    pub dependency_explanation: String,
    #[serde(default)]
    pub keywords: Vec<String>,
}

impl PathwayVideo {
    pub fn video_id(&self) -> &str {
        &self.video.video_id
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Week {
    pub week_index: u32,
    pub concept: String,
    pub focus: String,
    pub bloom_levels: BTreeSet<u8>,
    pub why_this_week_first: String,
    pub videos: Vec<PathwayVideo>,
}

/// The persistent multi-week structure the learner studies from.
///
/// Revisions share a `pathway_id` and increase `revision` by one; older
/// revisions stay retrievable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pathway {
    #[serde(default = "schema_v1")]
    pub schema_version: u32,
    pub pathway_id: String,
    #[serde(default = "first_revision")]
    pub revision: u32,
    pub topic: String,
    pub course_title: String,
    pub course_description: String,
    pub bloom_progression: String,
    pub learning_objectives: Vec<String>,
    pub weeks: Vec<Week>,
}

fn first_revision() -> u32 {
    1
}

impl Pathway {
    /// Number of video slots.
    pub fn total_videos(&self) -> usize {
        self.weeks.iter().map(|w| w.videos.len()).sum()
    }

    pub fn video_at(&self, pos: Position) -> Option<&PathwayVideo> {
        let week = self.weeks.get((pos.week as usize).checked_sub(1)?)?;
        week.videos.get((pos.slot as usize).checked_sub(1)?)
    }

    pub fn week(&self, week_index: u32) -> Option<&Week> {
        self.weeks.get((week_index as usize).checked_sub(1)?)
    }

    /// All valid positions in week/slot order.
    pub fn positions(&self) -> impl Iterator<Item = Position> + '_ {
        self.weeks.iter().enumerate().flat_map(|(w, week)| {
            (0..week.videos.len()).map(move |s| Position::new(w as u32 + 1, s as u8 + 1))
        })
    }

    pub fn is_valid_position(&self, pos: Position) -> bool {
        self.video_at(pos).is_some()
    }

    /// Videos in week order, slot order, paired with their position.
    pub fn videos(&self) -> impl Iterator<Item = (Position, &PathwayVideo)> + '_ {
        self.weeks.iter().enumerate().flat_map(|(w, week)| {
            week.videos
                .iter()
                .enumerate()
                .map(move |(s, v)| (Position::new(w as u32 + 1, s as u8 + 1), v))
        })
    }

    pub fn video_ids(&self) -> BTreeSet<&str> {
        self.videos().map(|(_, v)| v.video_id()).collect()
    }

    pub fn find_video(&self, video_id: &str) -> Option<(Position, &PathwayVideo)> {
        self.videos().find(|(_, v)| v.video_id() == video_id)
    }
}

/// A (week, slot) coordinate, both 1-based. Orders week-major.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Position {
    pub week: u32,
    pub slot: u8,
}

impl Position {
    pub const fn new(week: u32, slot: u8) -> Self {
        Self { week, slot }
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "week {} slot {}", self.week, self.slot)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Learner,
    Assistant,
}

/// Routing class of a learner question.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum QuestionType {
    /// About the video being watched.
    #[serde(rename = "A_current_video")]
    CurrentVideo,
    /// About the pathway as a whole.
    #[serde(rename = "B_pathway")]
    Pathway,
}

impl QuestionType {
    pub fn letter(self) -> char {
        match self {
            QuestionType::CurrentVideo => 'A',
            QuestionType::Pathway => 'B',
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: Role,
    pub content: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classification: Option<QuestionType>,
    pub created_at: DateTime<Utc>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoteKind {
    Ai,
    Manual,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Note {
    #[serde(default = "schema_v1")]
    pub schema_version: u32,
    pub note_id: String,
    pub video_id: String,
    pub anchor_s: f64,
    pub kind: NoteKind,
    pub bullets: Vec<String>,
    pub created_at: DateTime<Utc>,
}

/// Learner progress, chat and notes for one pathway.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnerSession {
    #[serde(default = "schema_v1")]
    pub schema_version: u32,
    pub session_id: String,
    pub pathway_id: String,
    pub pathway_revision: u32,
    pub completed: BTreeSet<Position>,
    pub current: Position,
    pub chat_history: Vec<ChatMessage>,
    pub notes: Vec<Note>,
}

/// Formats seconds as `m:ss`, or `h:mm:ss` from one hour up.
pub fn format_timestamp(seconds: f64) -> String {
    let total = seconds.max(0.0).floor() as u64;
    let (h, m, s) = (total / 3600, (total % 3600) / 60, total % 60);
    if h > 0 {
        format!("{h}:{m:02}:{s:02}")
    } else {
        format!("{m}:{s:02}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bands_partition_durations() {
        for d in [0.0, 599.9, 600.0, 1500.0, 1500.1, 9000.0] {
            let hits = [VideoLength::Short, VideoLength::Medium, VideoLength::Long]
                .iter()
                .filter(|l| l.band().contains(d))
                .count();
            assert_eq!(hits, 1, "duration {d}");
        }
    }

    #[test]
    fn medium_band_widens_to_five_and_thirty_seven_and_a_half_minutes() {
        let wide = VideoLength::Medium.band().widened(0.5);
        assert_eq!(wide.min_s, 300.0);
        assert_eq!(wide.max_s, 2250.0);
        assert!(!wide.contains(40.0 * 60.0));
        assert!(wide.contains(5.0 * 60.0));
    }

    #[test]
    fn preferences_trim_and_bound() {
        let p = PlanningPreferences::new(
            "  graph theory ",
            VideoLength::Medium,
            ExperienceLevel::Beginner,
            5,
        )
        .unwrap();
        assert_eq!(p.topic, "graph theory");
        assert_eq!(
            PlanningPreferences::new("x", VideoLength::Short, ExperienceLevel::Advanced, 9),
            Err(ModelError::ConceptCountOutOfRange(9))
        );
        assert_eq!(
            PlanningPreferences::new("   ", VideoLength::Short, ExperienceLevel::Advanced, 3),
            Err(ModelError::EmptyTopic)
        );
    }

    #[test]
    fn num_concepts_defaults_to_five() {
        let p: PlanningPreferences = serde_json::from_str(
            r#"{"topic":"t","video_length":"long","experience_level":"advanced"}"#,
        )
        .unwrap();
        assert_eq!(p.num_concepts, 5);
    }

    #[test]
    fn question_type_wire_names() {
        assert_eq!(
            serde_json::to_string(&QuestionType::CurrentVideo).unwrap(),
            "\"A_current_video\""
        );
        assert_eq!(
            serde_json::to_string(&QuestionType::Pathway).unwrap(),
            "\"B_pathway\""
        );
    }

    #[test]
    fn timestamps() {
        assert_eq!(format_timestamp(95.0), "1:35");
        assert_eq!(format_timestamp(0.0), "0:00");
        assert_eq!(format_timestamp(3725.4), "1:02:05");
    }
}
