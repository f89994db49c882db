//! Structured reply parsing.
//!
//! Extraction is one pass: a fenced block is unwrapped, otherwise the span
//! from the first opening bracket to the last matching closing bracket is
//! taken. Nothing is repaired; whatever the schema admits is returned as is.

use std::collections::BTreeSet;

use serde::{Deserialize, Deserializer, Serialize};
use thiserror::Error;

use super::{Params, PromptKind};
use crate::model::validate::validate_concept_map_count;
use crate::model::{ConceptCluster, ConceptMap, QuestionType, Violation, ViolationCode};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("reply was empty")]
    Empty,
    #[error("reply contains no JSON object or array")]
    NoJson,
    #[error("reply is not valid JSON: {0}")]
    InvalidJson(String),
    #[error("reply does not match the expected shape: {0}")]
    Shape(String),
    #[error("{0}")]
    Schema(Violation),
    #[error("expected exactly A or B, got {0:?}")]
    Classification(String),
    #[error("expected 2-3 bullet points, got {0}")]
    BulletCount(usize),
}

impl ParseError {
    /// Machine-readable code; schema violations report their violation code.
    pub fn code(&self) -> &'static str {
        match self {
            ParseError::Empty => "Empty",
            ParseError::NoJson => "NoJson",
            ParseError::InvalidJson(_) => "InvalidJson",
            ParseError::Shape(_) => "Shape",
            ParseError::Schema(v) => v.code.as_str(),
            ParseError::Classification(_) => "InvalidClassification",
            ParseError::BulletCount(_) => "BulletCount",
        }
    }
}

/// The ordering model's plan: weeks in concept order, each holding its videos.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathwayPlan {
    pub course_title: String,
    pub course_description: String,
    #[serde(deserialize_with = "text_or_json")]
    pub bloom_progression: String,
    pub learning_objectives: Vec<String>,
    pub weeks: Vec<PlannedWeek>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlannedWeek {
    pub concept: String,
    pub focus: String,
    pub bloom_levels: BTreeSet<u8>,
    pub why_this_week_first: String,
    pub videos: Vec<PlannedVideo>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlannedVideo {
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

/// Annotations for a single replacement video. Omitted structural fields
/// inherit from the slot being replaced.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlotPlan {
    #[serde(default)]
    pub bloom_level: Option<u8>,
    #[serde(default)]
    pub bloom_verb: String,
    #[serde(default)]
    pub requires_concept: Option<String>,
    #[serde(default)]
    pub unlocks_concept: Option<String>,
    pub zpd_rationale: String,
    pub learning_objective: String,
    pub why_selected: String,
    pub dependency_explanation: String,
    #[serde(default)]
    pub keywords: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Payload {
    ConceptMap(ConceptMap),
    PathwayPlan(PathwayPlan),
    SlotPlan(SlotPlan),
    Classification(QuestionType),
    Answer(String),
    NoteBullets(Vec<String>),
}

#[derive(Deserialize)]
struct ConceptMapReply {
    description: String,
    concepts: Vec<ConceptCluster>,
}

fn text_or_json<'de, D: Deserializer<'de>>(d: D) -> Result<String, D::Error> {
    let value = serde_json::Value::deserialize(d)?;
    Ok(match value {
        serde_json::Value::String(s) => s,
        other => other.to_string(),
    })
}

/// Locates the single JSON value in a reply.
pub fn extract_json(raw: &str) -> Option<&str> {
    let text = raw.trim();
    if let Some(fence) = text.find("```") {
        let after = &text[fence + 3..];
        // skip the info string (`json`, `JSON`, ...)
        let body_start = after.find('\n').map_or(after.len(), |i| i + 1);
        let body = &after[body_start..];
        let inner = match body.find("```") {
            Some(end) => &body[..end],
            None => body,
        };
        let inner = inner.trim();
        return (!inner.is_empty()).then_some(inner);
    }
    let start = text.find(['{', '['])?;
    let close = if text.as_bytes()[start] == b'{' { '}' } else { ']' };
    let end = text.rfind(close)?;
    (end > start).then(|| &text[start..=end])
}

fn parse_json<T: for<'de> Deserialize<'de>>(raw: &str) -> Result<T, ParseError> {
    if raw.trim().is_empty() {
        return Err(ParseError::Empty);
    }
    let body = extract_json(raw).ok_or(ParseError::NoJson)?;
    let value: serde_json::Value =
        serde_json::from_str(body).map_err(|e| ParseError::InvalidJson(e.to_string()))?;
    serde_json::from_value(value).map_err(|e| ParseError::Shape(e.to_string()))
}

fn expected_count(params: &Params, key: &str) -> Option<usize> {
    params.get(key).and_then(|v| v.trim().parse().ok())
}

fn schema(code: ViolationCode, path: &str, message: String) -> ParseError {
    ParseError::Schema(Violation {
        code,
        path: path.to_string(),
        message,
    })
}

/// Strips bullet markers and returns 2-3 bullets.
pub fn parse_bullets(raw: &str) -> Result<Vec<String>, ParseError> {
    if raw.trim().is_empty() {
        return Err(ParseError::Empty);
    }
    let bullets: Vec<String> = raw
        .lines()
        .filter_map(|line| strip_marker(line.trim()))
        .map(|b| b.trim().to_string())
        .filter(|b| !b.is_empty())
        .collect();
    if !(2..=3).contains(&bullets.len()) {
        return Err(ParseError::BulletCount(bullets.len()));
    }
    Ok(bullets)
}

fn strip_marker(line: &str) -> Option<&str> {
    for marker in ["- ", "* ", "• ", "– ", "— ", "· "] {
        if let Some(rest) = line.strip_prefix(marker) {
            return Some(rest);
        }
    }
    if line == "-" || line == "*" || line == "•" {
        return Some("");
    }
    let digits = line.chars().take_while(|c| c.is_ascii_digit()).count();
    if digits > 0 {
        let rest = &line[digits..];
        if let Some(rest) = rest.strip_prefix(". ").or_else(|| rest.strip_prefix(") ")) {
            return Some(rest);
        }
    }
    None
}

fn parse_classification(raw: &str) -> Result<QuestionType, ParseError> {
    let mut t = raw.trim();
    for quote in ['"', '\'', '`'] {
        if t.len() >= 2 && t.starts_with(quote) && t.ends_with(quote) {
            t = t[1..t.len() - 1].trim();
            break;
        }
    }
    match t {
        "A" => Ok(QuestionType::CurrentVideo),
        "B" => Ok(QuestionType::Pathway),
        _ => Err(ParseError::Classification(raw.to_string())),
    }
}

/// Parses and schema-checks a raw reply for `kind`.
///
/// `params` are the bindings the prompt was rendered with; they carry the
/// expectations some schemas check (`numConcepts`, `num_weeks`, the slot
/// bounds for `slot_order`).
pub fn parse_structured(kind: PromptKind, raw: &str, params: &Params) -> Result<Payload, ParseError> {
    match kind {
        PromptKind::ConceptMap => {
            let reply: ConceptMapReply = parse_json(raw)?;
            let map = ConceptMap::new(reply.description, reply.concepts);
            let expected = expected_count(params, "numConcepts").unwrap_or(map.concepts.len());
            match validate_concept_map_count(&map, expected).violations.into_iter().next() {
                Some(v) => Err(ParseError::Schema(v)),
                None => Ok(Payload::ConceptMap(map)),
            }
        }
        PromptKind::PathwayOrder => {
            let plan: PathwayPlan = parse_json(raw)?;
            if let Some(expected) = expected_count(params, "num_weeks") {
                if plan.weeks.len() != expected {
                    return Err(schema(
                        ViolationCode::WeekCountMismatch,
                        "weeks",
                        format!("expected {expected} weeks, found {}", plan.weeks.len()),
                    ));
                }
            }
            Ok(Payload::PathwayPlan(plan))
        }
        PromptKind::SlotOrder => {
            let slot: SlotPlan = parse_json(raw)?;
            check_slot(&slot, params)?;
            Ok(Payload::SlotPlan(slot))
        }
        PromptKind::Classify => parse_classification(raw).map(Payload::Classification),
        PromptKind::Answer => {
            let text = raw.trim();
            if text.is_empty() {
                Err(ParseError::Empty)
            } else {
                Ok(Payload::Answer(text.to_string()))
            }
        }
        PromptKind::NoteWithTranscript | PromptKind::NoteFallback => {
            parse_bullets(raw).map(Payload::NoteBullets)
        }
    }
}

fn check_slot(slot: &SlotPlan, params: &Params) -> Result<(), ParseError> {
    if let (Some(level), Some(lo), Some(hi)) = (
        slot.bloom_level,
        expected_count(params, "min_bloom"),
        expected_count(params, "max_bloom"),
    ) {
        if !(lo..=hi).contains(&(level as usize)) {
            return Err(schema(
                ViolationCode::BloomRangeViolation,
                "bloom_level",
                format!("level {level} is outside {lo}-{hi}"),
            ));
        }
    }
    for (field, key, value) in [
        ("requires_concept", "required_requires", &slot.requires_concept),
        ("unlocks_concept", "required_unlocks", &slot.unlocks_concept),
    ] {
        let (Some(required), Some(given)) = (params.get(key), value) else {
            continue;
        };
        if !required.is_empty() && required.trim().to_lowercase() != given.trim().to_lowercase() {
            return Err(schema(
                ViolationCode::BrokenDependencyChain,
                field,
                format!("must be {required:?}, got {given:?}"),
            ));
        }
    }
    Ok(())
}
