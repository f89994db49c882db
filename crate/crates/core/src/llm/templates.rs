//! Prompt templates, one system/user pair per [`PromptKind`].
//!
//! Placeholders are written `{{name}}`. Rendering is a single left-to-right
//! pass; substituted values are never rescanned.

use std::collections::BTreeSet;

use super::{Params, PromptKind, PromptRequest, TemplateError};

const CURRICULUM_DESIGNER_JSON: &str =
    "You are a curriculum designer. Return ONLY valid JSON, no markdown.";

const CONCEPT_MAP_USER: &str = "Topic: \"{{topic}}\".\n\n\
Rules: Return JSON exactly, include \"description\" as 1 sentence how this topic is structured, \
and \"concepts\" as a list of exactly {{numConcepts}} concepts, each with \"label\" as a 2-4 word \
name and \"description\" as 1 sentence what it covers. Use topic-specific labels, not generic like \
\"Introduction\". Order concepts from foundational to advanced (Bloom's Taxonomy).";

const ORDERING_SYSTEM: &str = "You are a curriculum designer. You are given REAL YouTube videos \
grouped by concept. Each concept represents one week of study.\n\n\
Bloom progression: Week 1: Remember & Understand (levels 1-2). Week 2: Understand & Apply \
(levels 2-3). Week 3: Apply & Analyze (levels 3-4). Week 4+: Analyze, Evaluate & Create \
(levels 4-6). Bloom levels MUST increase across weeks. Within each week, videos also progress, \
slot 1 = lower, slot 3 = higher. The overall Bloom level should NEVER decrease.\n\n\
Critical rules: Use content-based selection ranked by signal strength: transcript_snippet \
(STRONGEST signal), chapters, tags, description, title, then quality metrics. The 3 videos in \
each week must form a coherent mini-sequence where each genuinely builds on the previous. The \
last video of week N must unlock a concept that the first video of week N+1 requires, and this \
must be a genuine prerequisite, not a vague topical connection. Explain what specific knowledge \
each week builds on and what it unlocks for the next. Never use the same video twice or select \
two videos that teach the same sub-topics.\n\n\
Output: Return STRICT JSON with: course_title, course_description, bloom_progression, \
learning_objectives, weeks[{concept, focus, bloom_levels, why_this_week_first}], \
videos[{candidate_index, bloom_level, bloom_verb, requires_concept, unlocks_concept, \
zpd_rationale, learning_objective, why_selected, dependency_explanation, keywords}].";

const PATHWAY_ORDER_USER: &str = "Topic: \"{{topic}}\". Learner level: {{experience_level}}. \
Preferred video length: {{video_length}}. Number of weeks: {{num_weeks}}.\n\n\
Place the 3 selected videos of each week in a \"videos\" array inside that week object. \
candidate_index refers to the numbered candidate list of that week's concept.\n\n\
{{candidates}}";

const SLOT_ORDER_USER: &str = "Topic: \"{{topic}}\". Learner level: {{experience_level}}.\n\n\
Replace the video in week {{week}}, slot {{slot}} (concept: \"{{concept}}\") of an existing \
pathway. Previous video in the pathway: {{previous_video}}. Next video in the pathway: \
{{next_video}}. The replacement must have a bloom_level from {{min_bloom}} to {{max_bloom}}\
{{chain_rules}}.\n\n\
Replacement candidate:\n{{candidate}}\n\n\
Return STRICT JSON for this one video with: bloom_level, bloom_verb, requires_concept, \
unlocks_concept, zpd_rationale, learning_objective, why_selected, dependency_explanation, \
keywords.";

const CLASSIFY_SYSTEM: &str = "Classify this student question into one category, A) about the \
CURRENT video content, concepts, explanations, details from what they are watching, or B) about \
the PATHWAY, other videos, what to watch next, comparisons, progression, recommendations, and \
connections between videos.";

const CLASSIFY_USER: &str = "Question: \"{{message}}\".\n\nRespond with just A or B.";

macro_rules! tutor_text {
    () => {
        "You are a personal tutor. Be direct and concise. By default use plain short sentences, \
but if the user asks for bullet points, lists, formatting, or any specific structure, follow \
their request. Answer confidently based on the information provided. Never say \"likely\", \
\"maybe\", \"probably\", or \"I think\". If you have video metadata but no transcript, use \
the title, concept, and description to give a definitive answer."
    };
}

const TUTOR_SYSTEM: &str = tutor_text!();

const ANSWER_SYSTEM: &str = concat!(
    tutor_text!(),
    "\n\nLearning pathway: \"{{topic}}\". Currently watching: \"{{video_title}}\" by \
{{instructor}}. Progress: {{completed}}/{{total}} videos completed. Current video transcript: \
{{transcript}}. PATHWAY VIDEOS ({{N}} total): {{pathway_videos}}\n\n\
Rules: IMPORTANT: When referencing videos, ONLY use exact titles from this list. Never invent or \
suggest videos outside this pathway."
);

const ANSWER_USER: &str =
    "{{detailed_context}}Conversation so far: {{history}}. Student: {{message}}.\n{{tutor_cue}}";

const NOTE_WITH_TRANSCRIPT_SYSTEM: &str = "You are a study note assistant. Generate notes based \
ONLY on the transcript content provided. Return 2-3 bullet points starting with bullet markers. \
Each bullet must reference specific ideas, terms, or examples from the transcript. Never repeat \
ideas from previous notes. No headers, no markdown.";

const NOTE_WITH_TRANSCRIPT_USER: &str = "Video: \"{{title}}\". Topic: {{main_concept}}. Key terms: \
{{keywords}}. Learning goal: {{learning_objective}}. Transcript around {{timestamp}}: \
\"{{transcript_window}}\". Student paused at {{timestamp}}.\n\n\
Previous notes: {{previous_notes}}\n\n\
Write NEW points about what is being discussed at {{timestamp}} that are DIFFERENT from the notes \
above.";

const NOTE_FALLBACK_SYSTEM: &str = "You are a study note assistant. Generate notes about what is \
being taught at this point in the video. Return 2-3 bullet points starting with bullet markers. \
Each bullet should be one concise sentence. Never repeat ideas from previous notes. No headers, \
no markdown.";

const NOTE_FALLBACK_USER: &str = "Video: \"{{title}}\". Topic: {{main_concept}}. Key terms: \
{{keywords}}. Learning goal: {{learning_objective}}. Student paused at {{timestamp}}.\n\n\
Previous notes: {{previous_notes}}\n\n\
Write NEW points about what is being taught at {{timestamp}} that are DIFFERENT from the notes \
above.";

/// Closing cue for current-video answers.
pub const TUTOR_CUE_CURRENT: &str = "Tutor (reply concisely in 2-4 sentences):";
/// Closing cue for pathway-level answers.
pub const TUTOR_CUE_PATHWAY: &str =
    "Tutor (reference specific videos from the pathway by their exact title):";

/// The system prompt shared by every assistant reply.
pub fn tutor_system_prompt() -> &'static str {
    TUTOR_SYSTEM
}

/// Raw `(system, user)` template text for a kind.
pub fn template(kind: PromptKind) -> (&'static str, &'static str) {
    match kind {
        PromptKind::ConceptMap => (CURRICULUM_DESIGNER_JSON, CONCEPT_MAP_USER),
        PromptKind::PathwayOrder => (ORDERING_SYSTEM, PATHWAY_ORDER_USER),
        PromptKind::SlotOrder => (ORDERING_SYSTEM, SLOT_ORDER_USER),
        PromptKind::Classify => (CLASSIFY_SYSTEM, CLASSIFY_USER),
        PromptKind::Answer => (ANSWER_SYSTEM, ANSWER_USER),
        PromptKind::NoteWithTranscript => (NOTE_WITH_TRANSCRIPT_SYSTEM, NOTE_WITH_TRANSCRIPT_USER),
        PromptKind::NoteFallback => (NOTE_FALLBACK_SYSTEM, NOTE_FALLBACK_USER),
    }
}

enum Piece<'a> {
    Text(&'a str),
    Slot(&'a str),
}

fn is_name(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn pieces(template: &str) -> Vec<Piece<'_>> {
    let mut out = Vec::new();
    let mut rest = template;
    while let Some(open) = rest.find("{{") {
        let after = &rest[open + 2..];
        match after.find("}}") {
            Some(close) if is_name(&after[..close]) => {
                if open > 0 {
                    out.push(Piece::Text(&rest[..open]));
                }
                out.push(Piece::Slot(&after[..close]));
                rest = &after[close + 2..];
            }
            _ => {
                out.push(Piece::Text(&rest[..open + 2]));
                rest = after;
            }
        }
    }
    if !rest.is_empty() {
        out.push(Piece::Text(rest));
    }
    out
}

/// Placeholder names used by a kind's templates.
pub fn placeholders(kind: PromptKind) -> BTreeSet<&'static str> {
    let (system, user) = template(kind);
    pieces(system)
        .into_iter()
        .chain(pieces(user))
        .filter_map(|p| match p {
            Piece::Slot(name) => Some(name),
            Piece::Text(_) => None,
        })
        .collect()
}

fn fill(kind: PromptKind, template: &str, params: &Params) -> Result<String, TemplateError> {
    let mut out = String::with_capacity(template.len());
    for piece in pieces(template) {
        match piece {
            Piece::Text(t) => out.push_str(t),
            Piece::Slot(name) => match params.get(name) {
                Some(value) => out.push_str(value),
                None => {
                    return Err(TemplateError::MissingPlaceholder {
                        kind,
                        name: name.to_string(),
                    })
                }
            },
        }
    }
    Ok(out)
}

/// Renders the templates of `kind` with `params`.
pub fn render(kind: PromptKind, params: &Params) -> Result<PromptRequest, TemplateError> {
    let (system, user) = template(kind);
    Ok(PromptRequest {
        kind,
        system_text: fill(kind, system, params)?,
        user_text: fill(kind, user, params)?,
        params: params.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::llm::params;

    #[test]
    fn concept_map_prompt() {
        let req = render(
            PromptKind::ConceptMap,
            &params([("topic", "graph theory"), ("numConcepts", "5")]),
        )
        .unwrap();
        assert!(req.user_text.contains("Topic: \"graph theory\""));
        assert!(req.user_text.contains("exactly 5 concepts"));
        assert_eq!(req.system_text, CURRICULUM_DESIGNER_JSON);
    }

    #[test]
    fn classify_prompt_ends_with_instruction() {
        let req = render(PromptKind::Classify, &params([("message", "What is entropy?")])).unwrap();
        assert!(req.user_text.ends_with("Respond with just A or B."));
        assert!(req.user_text.contains("Question: \"What is entropy?\""));
    }

    #[test]
    fn missing_placeholder_is_an_error() {
        let p = params([
            ("title", "t"),
            ("main_concept", "c"),
            ("keywords", "k"),
            ("learning_objective", "o"),
            ("transcript_window", "w"),
            ("previous_notes", "(none)"),
        ]);
        let err = render(PromptKind::NoteWithTranscript, &p).unwrap_err();
        assert_eq!(
            err,
            TemplateError::MissingPlaceholder {
                kind: PromptKind::NoteWithTranscript,
                name: "timestamp".into()
            }
        );
    }

    #[test]
    fn values_are_not_rescanned() {
        let req = render(PromptKind::Classify, &params([("message", "{{message}}")])).unwrap();
        assert!(req.user_text.contains("Question: \"{{message}}\""));
    }

    #[test]
    fn every_kind_has_placeholders_and_no_stray_braces_after_render() {
        for kind in PromptKind::ALL {
            let names = placeholders(kind);
            assert!(!names.is_empty(), "{kind:?}");
            let p: Params = names.iter().map(|n| (n.to_string(), format!("<{n}>"))).collect();
            let req = render(kind, &p).unwrap();
            assert!(!req.system_text.contains("{{"), "{kind:?}");
            assert!(!req.user_text.contains("{{"), "{kind:?}");
        }
    }

    #[test]
    fn tutor_prompt_is_answer_prefix() {
        assert!(ANSWER_SYSTEM.starts_with(TUTOR_SYSTEM));
    }
}
