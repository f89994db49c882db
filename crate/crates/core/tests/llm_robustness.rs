//! Malformed model replies: each either recovers through a retry or ends in
//! the documented error code, and no structured call exceeds its budget.

mod common;

use std::fs;
use std::sync::Arc;

use serde_json::{json, Value};
use waypoint_core::engine::{build_pathway, generate_concept_map, Plan};
use waypoint_core::llm::{
    complete_validated, params, Gateway, PromptKind, ScriptedProvider, DEFAULT_MAX_ATTEMPTS,
};
use waypoint_core::session::{classify, Routing};

fn fixture(name: &str) -> String {
    fs::read_to_string(common::fixtures().join("llm").join(name)).unwrap()
}

fn concept_map_reply() -> String {
    let name = fs::read_dir(common::fixtures().join("llm"))
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .find(|n| n.starts_with("concept_map__"))
        .unwrap();
    fixture(&name)
}

fn plan_reply() -> Value {
    serde_json::from_str(&fixture("pathway_order__default.txt")).unwrap()
}

fn edit(f: impl FnOnce(&mut Value)) -> String {
    let mut v = plan_reply();
    f(&mut v);
    v.to_string()
}

#[derive(Debug)]
enum Expect {
    /// Succeeds after this many provider calls.
    Recovers(usize),
    Fails(&'static str),
}

struct Case {
    name: &'static str,
    kind: PromptKind,
    replies: Vec<String>,
    expect: Expect,
}

fn case(name: &'static str, kind: PromptKind, replies: Vec<String>, expect: Expect) -> Case {
    Case { name, kind, replies, expect }
}

fn cases() -> Vec<Case> {
    use Expect::*;
    use PromptKind::*;
    let map = concept_map_reply();
    let plan = plan_reply().to_string();
    let four = {
        let mut v: Value = serde_json::from_str(&map).unwrap();
        v["concepts"].as_array_mut().unwrap().pop();
        v.to_string()
    };
    let no_description = {
        let mut v: Value = serde_json::from_str(&map).unwrap();
        v.as_object_mut().unwrap().remove("description");
        v.to_string()
    };
    let short_label = {
        let mut v: Value = serde_json::from_str(&map).unwrap();
        v["concepts"][2]["label"] = json!("Criticism");
        v.to_string()
    };
    vec![
        case("fenced concept map", ConceptMap, vec![format!("```json\n{map}\n```")], Recovers(1)),
        case("concept map inside prose", ConceptMap, vec![format!("Here you go:\n{map}\nEnjoy!")], Recovers(1)),
        case("four concepts, then five", ConceptMap, vec![four.clone(), map.clone()], Recovers(2)),
        case("always four concepts", ConceptMap, vec![four; 3], Fails("llm_exhausted")),
        case("missing description", ConceptMap, vec![no_description, map.clone()], Recovers(2)),
        case("one-word label", ConceptMap, vec![short_label, map.clone()], Recovers(2)),
        case("trailing comma", ConceptMap, vec![map.replacen('}', "},", 1), map.clone()], Recovers(2)),
        case("empty reply", ConceptMap, vec![String::new(); 3], Fails("llm_exhausted")),
        case("prose only", ConceptMap, vec!["I cannot do that.".into(); 3], Fails("llm_exhausted")),
        case("fenced plan", PathwayOrder, vec![format!("```\n{plan}\n```")], Recovers(1)),
        case(
            "bad candidate_index",
            PathwayOrder,
            vec![edit(|v| v["weeks"][1]["videos"][0]["candidate_index"] = json!(42))],
            Fails("bad_index"),
        ),
        case(
            "four weeks, then five",
            PathwayOrder,
            vec![edit(|v| { v["weeks"].as_array_mut().unwrap().pop(); }), plan.clone()],
            Recovers(2),
        ),
        case(
            "video missing its rationale",
            PathwayOrder,
            vec![
                edit(|v| { v["weeks"][0]["videos"][1].as_object_mut().unwrap().remove("zpd_rationale"); }),
                plan.clone(),
            ],
            Recovers(2),
        ),
        case(
            "Bloom out of week range, then fixed",
            PathwayOrder,
            vec![edit(|v| v["weeks"][0]["videos"][0]["bloom_level"] = json!(4)), plan.clone()],
            Recovers(2),
        ),
        case(
            "Bloom decreasing twice",
            PathwayOrder,
            vec![edit(|v| v["weeks"][2]["videos"][2]["bloom_level"] = json!(3)); 2],
            Fails("invalid_plan"),
        ),
        case(
            "duplicate video",
            PathwayOrder,
            vec![edit(|v| v["weeks"][0]["videos"][2]["candidate_index"] = json!(0)); 2],
            Fails("invalid_plan"),
        ),
        case(
            "broken dependency chain, then fixed",
            PathwayOrder,
            vec![edit(|v| v["weeks"][1]["videos"][0]["requires_concept"] = json!("something else")), plan],
            Recovers(2),
        ),
    ]
}

fn run(case: &Case, fixture: &Plan) -> (Result<(), &'static str>, usize) {
    let mut script = ScriptedProvider::new();
    for r in &case.replies {
        script = script.push(case.kind, r.clone());
    }
    let provider = Arc::new(script);
    let gateway = Gateway::new(provider.clone());
    let prefs = common::prefs();
    let result = match case.kind {
        PromptKind::ConceptMap => generate_concept_map(&prefs, &gateway).map(|_| ()).map_err(|e| e.code()),
        PromptKind::PathwayOrder => build_pathway(&prefs, &fixture.concept_map, &fixture.pool, &gateway)
            .map(|_| ())
            .map_err(|e| e.code()),
        other => panic!("no runner for {other}"),
    };
    (result, provider.count(case.kind))
}

#[test]
fn malformed_replies_recover_or_fail_with_documented_codes() {
    let (fixture, _, _) = common::fixture_plan();
    let all = cases();
    assert!(all.len() >= 10);
    for c in &all {
        let (result, calls) = run(c, &fixture);
        match c.expect {
            Expect::Recovers(n) => {
                assert_eq!(result, Ok(()), "{}", c.name);
                assert_eq!(calls, n, "{}", c.name);
            }
            Expect::Fails(code) => {
                assert_eq!(result, Err(code), "{}", c.name);
            }
        }
        // Planning may re-ask once after a validation failure; each ask is
        // its own budget.
        let budget = match c.kind {
            PromptKind::PathwayOrder => 2 * DEFAULT_MAX_ATTEMPTS as usize,
            _ => DEFAULT_MAX_ATTEMPTS as usize,
        };
        assert!(calls <= budget, "{}: {calls} calls", c.name);
    }
}

#[test]
fn call_log_never_exceeds_max_attempts() {
    let garbage = ["", "```json\n{\n```", "{\"concepts\": 5}", "[1, 2", "null"];
    for max in 1..=5u32 {
        for reply in garbage {
            let provider = ScriptedProvider::new().repeat(PromptKind::ConceptMap, reply);
            let p = params([("topic", "x"), ("numConcepts", "5")]);
            let err = complete_validated(&provider, PromptKind::ConceptMap, &p, max).unwrap_err();
            assert_eq!(provider.count(PromptKind::ConceptMap), max as usize, "{reply:?}");
            assert!(err.to_string().contains(&format!("after {max} attempts")));
        }
    }
}

#[test]
fn retries_carry_the_previous_problem() {
    let provider = ScriptedProvider::new()
        .push(PromptKind::ConceptMap, "not json")
        .push(PromptKind::ConceptMap, concept_map_reply());
    let p = params([("topic", "communication theory"), ("numConcepts", "5")]);
    let reply = complete_validated(&provider, PromptKind::ConceptMap, &p, 3).unwrap();
    assert_eq!(reply.attempts, 2);
    let requests = provider.requests();
    assert!(!requests[0].user_text.contains("previous reply was invalid"));
    assert!(requests[1].user_text.ends_with("Return only the required format."));
    assert_eq!(requests[0].params, requests[1].params);
}

#[test]
fn classifier_garbage_routes_to_current_video() {
    for reply in ["C", "A or B", "", "The answer is A."] {
        let provider = Arc::new(ScriptedProvider::new().repeat(PromptKind::Classify, reply));
        let gateway = Gateway::new(provider.clone());
        let (_, routing) = classify("what next?", &gateway).unwrap();
        assert_eq!(routing, Routing::Fallback);
        assert_eq!(provider.count(PromptKind::Classify), DEFAULT_MAX_ATTEMPTS as usize);
    }
    let provider = Arc::new(ScriptedProvider::new().push(PromptKind::Classify, "'B'"));
    let (_, routing) = classify("what next?", &Gateway::new(provider)).unwrap();
    assert_eq!(routing, Routing::Model);
}
