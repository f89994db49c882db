//! Structural validators. Violations are returned as data so callers can
//! show all of them at once; nothing here fails.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{bloom_range_for_week, flatten_bloom, ConceptMap, Pathway, PlanningPreferences, VIDEOS_PER_WEEK};

/// Labels that say nothing about the topic.
pub const GENERIC_LABELS: [&str; 4] = ["introduction", "overview", "basics", "conclusion"];

// Connectives ignored when deciding whether a label is only generic words.
const LABEL_FILLER: [&str; 8] = ["to", "of", "the", "and", "a", "an", "in", "&"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ViolationCode {
    CountMismatch,
    LabelTooShort,
    LabelTooLong,
    GenericLabel,
    EmptyDescription,
    WeekCountMismatch,
    WeekIndexMismatch,
    WeekConceptMismatch,
    VideoCountMismatch,
    BloomOutOfScale,
    BloomRangeViolation,
    BloomNotMonotone,
    DuplicateVideo,
    BrokenDependencyChain,
    MissingRationale,
}

impl ViolationCode {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::CountMismatch => "CountMismatch",
            Self::LabelTooShort => "LabelTooShort",
            Self::LabelTooLong => "LabelTooLong",
            Self::GenericLabel => "GenericLabel",
            Self::EmptyDescription => "EmptyDescription",
            Self::WeekCountMismatch => "WeekCountMismatch",
            Self::WeekIndexMismatch => "WeekIndexMismatch",
            Self::WeekConceptMismatch => "WeekConceptMismatch",
            Self::VideoCountMismatch => "VideoCountMismatch",
            Self::BloomOutOfScale => "BloomOutOfScale",
            Self::BloomRangeViolation => "BloomRangeViolation",
            Self::BloomNotMonotone => "BloomNotMonotone",
            Self::DuplicateVideo => "DuplicateVideo",
            Self::BrokenDependencyChain => "BrokenDependencyChain",
            Self::MissingRationale => "MissingRationale",
        }
    }
}

impl fmt::Display for ViolationCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub code: ViolationCode,
    /// JSON-pointer-like location, e.g. `weeks[1].videos[0].bloom_level`.
    pub path: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at {}: {}", self.code, self.path, self.message)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, code: ViolationCode) -> bool {
        self.violations.iter().any(|v| v.code == code)
    }

    pub fn codes(&self) -> std::collections::BTreeSet<ViolationCode> {
        self.violations.iter().map(|v| v.code).collect()
    }

    pub fn first(&self) -> Option<&Violation> {
        self.violations.first()
    }

    fn push(&mut self, code: ViolationCode, path: impl Into<String>, message: impl Into<String>) {
        self.violations.push(Violation {
            code,
            path: path.into(),
            message: message.into(),
        });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return f.write_str("ok");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

fn same_concept(a: &str, b: &str) -> bool {
    a.trim().to_lowercase() == b.trim().to_lowercase()
}

fn is_generic(label: &str) -> bool {
    let words: Vec<String> = label
        .split_whitespace()
        .map(|w| w.to_lowercase())
        .filter(|w| !LABEL_FILLER.contains(&w.as_str()))
        .collect();
    !words.is_empty() && words.iter().all(|w| GENERIC_LABELS.contains(&w.as_str()))
}

/// Checks a concept map against the requested concept count and label rules.
pub fn validate_concept_map(map: &ConceptMap, prefs: &PlanningPreferences) -> ValidationReport {
    validate_concept_map_count(map, prefs.num_concepts as usize)
}

pub(crate) fn validate_concept_map_count(map: &ConceptMap, expected: usize) -> ValidationReport {
    let mut report = ValidationReport::default();
    if map.concepts.len() != expected {
        report.push(
            ViolationCode::CountMismatch,
            "concepts",
            format!("expected {expected} concepts, found {}", map.concepts.len()),
        );
    }
    if map.description.trim().is_empty() {
        report.push(ViolationCode::EmptyDescription, "description", "map description is empty");
    }
    for (i, concept) in map.concepts.iter().enumerate() {
        let words = concept.label.split_whitespace().count();
        let path = format!("concepts[{i}].label");
        if words < 2 {
            report.push(
                ViolationCode::LabelTooShort,
                &path,
                format!("label {:?} has {words} words, need 2-4", concept.label),
            );
        } else if words > 4 {
            report.push(
                ViolationCode::LabelTooLong,
                &path,
                format!("label {:?} has {words} words, need 2-4", concept.label),
            );
        }
        if is_generic(&concept.label) {
            report.push(
                ViolationCode::GenericLabel,
                &path,
                format!("label {:?} is generic", concept.label),
            );
        }
        if concept.description.trim().is_empty() {
            report.push(
                ViolationCode::EmptyDescription,
                format!("concepts[{i}].description"),
                "concept description is empty",
            );
        }
    }
    report
}

/// Checks every structural pathway rule against the concept map it was
/// planned from. Checks run in a fixed order and all violations are kept.
pub fn validate_pathway(pathway: &Pathway, map: &ConceptMap) -> ValidationReport {
    let mut report = ValidationReport::default();

    if pathway.weeks.len() != map.concepts.len() {
        report.push(
            ViolationCode::WeekCountMismatch,
            "weeks",
            format!(
                "expected {} weeks, found {}",
                map.concepts.len(),
                pathway.weeks.len()
            ),
        );
    }
    for (i, week) in pathway.weeks.iter().enumerate() {
        if week.week_index as usize != i + 1 {
            report.push(
                ViolationCode::WeekIndexMismatch,
                format!("weeks[{i}].week_index"),
                format!("expected {}, found {}", i + 1, week.week_index),
            );
        }
        if let Some(concept) = map.concepts.get(i) {
            if !same_concept(&week.concept, &concept.label) {
                report.push(
                    ViolationCode::WeekConceptMismatch,
                    format!("weeks[{i}].concept"),
                    format!("expected {:?}, found {:?}", concept.label, week.concept),
                );
            }
        }
    }

    for (i, week) in pathway.weeks.iter().enumerate() {
        if week.videos.len() != VIDEOS_PER_WEEK {
            report.push(
                ViolationCode::VideoCountMismatch,
                format!("weeks[{i}].videos"),
                format!("expected {VIDEOS_PER_WEEK} videos, found {}", week.videos.len()),
            );
        }
    }

    for (i, week) in pathway.weeks.iter().enumerate() {
        let range = bloom_range_for_week(i as i64 + 1).expect("index is positive");
        for (j, video) in week.videos.iter().enumerate() {
            let path = format!("weeks[{i}].videos[{j}].bloom_level");
            if !(1..=6).contains(&video.bloom_level) {
                report.push(
                    ViolationCode::BloomOutOfScale,
                    path,
                    format!("level {} is outside 1-6", video.bloom_level),
                );
            } else if !range.contains(video.bloom_level) {
                report.push(
                    ViolationCode::BloomRangeViolation,
                    path,
                    format!(
                        "level {} is outside week {} range {}-{}",
                        video.bloom_level,
                        i + 1,
                        range.low,
                        range.high
                    ),
                );
            }
        }
    }

    let flat = flatten_bloom(pathway);
    let paths: Vec<String> = pathway
        .weeks
        .iter()
        .enumerate()
        .flat_map(|(i, w)| (0..w.videos.len()).map(move |j| format!("weeks[{i}].videos[{j}]")))
        .collect();
    for k in 1..flat.len() {
        if flat[k] < flat[k - 1] {
            report.push(
                ViolationCode::BloomNotMonotone,
                format!("{}.bloom_level", paths[k]),
                format!("level {} follows {}", flat[k], flat[k - 1]),
            );
        }
    }

    let mut seen: HashMap<&str, &str> = HashMap::new();
    for (k, (_, video)) in pathway.videos().enumerate() {
        if let Some(first) = seen.insert(video.video_id(), &paths[k]) {
            report.push(
                ViolationCode::DuplicateVideo,
                format!("{}.video_id", paths[k]),
                format!("video {} already used at {first}", video.video_id()),
            );
            // keep the first occurrence as the reference
            seen.insert(video.video_id(), first);
        }
    }

    for (i, pair) in pathway.weeks.windows(2).enumerate() {
        let (Some(last), Some(first)) = (pair[0].videos.last(), pair[1].videos.first()) else {
            continue;
        };
        if !same_concept(&last.unlocks_concept, &first.requires_concept) {
            report.push(
                ViolationCode::BrokenDependencyChain,
                format!("weeks[{}].videos[0].requires_concept", i + 1),
                format!(
                    "week {} ends unlocking {:?} but week {} starts requiring {:?}",
                    i + 1,
                    last.unlocks_concept,
                    i + 2,
                    first.requires_concept
                ),
            );
        }
    }

    for (i, week) in pathway.weeks.iter().enumerate() {
        if week.why_this_week_first.trim().is_empty() {
            report.push(
                ViolationCode::MissingRationale,
                format!("weeks[{i}].why_this_week_first"),
                "empty rationale",
            );
        }
        for (j, video) in week.videos.iter().enumerate() {
            for (field, value) in [
                ("why_selected", &video.why_selected),
                ("zpd_rationale", &video.zpd_rationale),
                ("dependency_explanation", &video.dependency_explanation),
            ] {
                if value.trim().is_empty() {
                    report.push(
                        ViolationCode::MissingRationale,
                        format!("weeks[{i}].videos[{j}].{field}"),
                        "empty rationale",
                    );
                }
            }
        }
    }

    report
}
