mod common;

use common::*;
use serde_json::json;
use waypoint_core::llm::{PromptKind, ProviderError, ScriptedProvider};
use waypoint_core::model::{validate_pathway, ConceptMap, LearnerSession, Note, Pathway, Position};

#[tokio::test]
async fn full_learning_flow() {
    let srv = spawn().await;

    let (status, map) = srv.post("/concept-maps", prefs()).await;
    assert_eq!(status, 201);
    let concept_map: ConceptMap = typed(&map);
    assert_eq!(concept_map.concepts.len(), 5);
    assert!(map["concept_map_id"].as_str().unwrap().starts_with("cm_"));

    let (status, body) = srv.post("/pathways", json!({ "concept_map_id": map["concept_map_id"] })).await;
    assert_eq!(status, 201, "{body}");
    let pathway: Pathway = typed(&body);
    let report = validate_pathway(&pathway, &concept_map);
    assert!(report.is_ok(), "{report}");
    for key in ["course_title", "why_this_week_first", "candidate_index", "zpd_rationale"] {
        assert!(body.to_string().contains(key), "{key}");
    }
    let (status, trace) = srv.get(&format!("/traces/{}", body["trace_id"].as_str().unwrap())).await;
    assert_eq!(status, 200);
    assert!(!trace["trace"]["stages"].as_array().unwrap().is_empty());

    let id = &pathway.pathway_id;
    let (status, got) = srv.get(&format!("/pathways/{id}")).await;
    assert_eq!(status, 200);
    assert_eq!(typed::<Pathway>(&got), pathway);

    let (status, s) = srv.post("/sessions", json!({ "pathway_id": id })).await;
    assert_eq!(status, 201);
    let session: LearnerSession = typed(&s);
    let sid = session.session_id.clone();
    assert_eq!(session.current, Position::new(1, 1));

    let (status, after) = srv.post(&format!("/sessions/{sid}/progress"), json!({ "week": 1, "slot": 1 })).await;
    assert_eq!(status, 200);
    let (_, again) = srv.post(&format!("/sessions/{sid}/progress"), json!({ "week": 1, "slot": 1 })).await;
    assert_eq!(after, again);
    let progressed: LearnerSession = typed(&after);
    assert_eq!(progressed.current, Position::new(1, 2));

    let (status, reply) = srv.post(&format!("/sessions/{sid}/chat"), json!({ "message": "Summarize" })).await;
    assert_eq!(status, 200, "{reply}");
    assert_eq!(reply["classification"], "A_current_video");
    assert_eq!(reply["routing"], "quick_action");
    assert!(!reply["reply"].as_str().unwrap().is_empty());

    let (status, reply) = srv
        .post(&format!("/sessions/{sid}/chat"), json!({ "message": "How does this connect to later weeks?" }))
        .await;
    assert_eq!(status, 200);
    assert_eq!(reply["routing"], "model");

    let (status, note) = srv.post(&format!("/sessions/{sid}/notes/ai"), json!({ "timestamp_s": 30.0 })).await;
    assert_eq!(status, 201, "{note}");
    let note: Note = typed(&note);
    assert!((2..=3).contains(&note.bullets.len()));
    assert_eq!(note.video_id, pathway.video_at(Position::new(1, 2)).unwrap().video_id());

    let (status, manual) = srv
        .post(&format!("/sessions/{sid}/notes/manual"), json!({ "timestamp_s": 12.5, "text": "revisit this" }))
        .await;
    assert_eq!(status, 201);
    assert_eq!(manual["bullets"], json!(["revisit this"]));

    let (status, s) = srv.get(&format!("/sessions/{sid}")).await;
    assert_eq!(status, 200);
    let session: LearnerSession = typed(&s);
    assert_eq!(session.chat_history.len(), 4);
    assert_eq!(session.notes.len(), 2);
    assert_eq!(session.completed.len(), 1);
}

#[tokio::test]
async fn revisions_are_versioned() {
    let srv = spawn().await;
    let (_, body, _) = srv.bootstrap().await;
    let original: Pathway = typed(&body);
    let id = &original.pathway_id;

    let (status, body) = srv.post(&format!("/pathways/{id}/videos/1/2/replace"), json!({ "exclusions": [] })).await;
    assert_eq!(status, 200, "{body}");
    let revised: Pathway = typed(&body);
    assert_eq!(revised.revision, 2);
    let changed: Vec<Position> = original
        .videos()
        .zip(revised.videos())
        .filter(|((_, a), (_, b))| a != b)
        .map(|((p, _), _)| p)
        .collect();
    assert_eq!(changed, vec![Position::new(1, 2)]);

    let (_, first) = srv.get(&format!("/pathways/{id}?revision=1")).await;
    assert_eq!(typed::<Pathway>(&first), original);
    let (_, latest) = srv.get(&format!("/pathways/{id}")).await;
    assert_eq!(typed::<Pathway>(&latest), revised);

    let (status, body) = srv.delete(&format!("/pathways/{id}/videos/2/1")).await;
    assert_eq!(status, 200, "{body}");
    assert_eq!(body["revision"], 3);
    let (_, revs) = srv.get(&format!("/pathways/{id}/revisions")).await;
    assert_eq!(revs["revisions"], json!([1, 2, 3]));

    // Keep replacing one slot, never taking back a video, until the
    // shortlist runs dry.
    let mut seen = vec![];
    let mut last = (200, json!(null));
    for _ in 0..10 {
        let (_, current) = srv.get(&format!("/pathways/{id}")).await;
        seen.push(current["weeks"][2]["videos"][2]["video_id"].clone());
        last = srv.post(&format!("/pathways/{id}/videos/3/3/replace"), json!({ "exclusions": seen })).await;
        if last.0 != 200 {
            break;
        }
    }
    assert_error(last.0, &last.1, 409, "no_replacement");
}

#[tokio::test]
async fn errors_carry_codes() {
    let srv = spawn().await;
    let (_, pathway, session) = srv.bootstrap().await;
    let (pid, sid) = (pathway["pathway_id"].as_str().unwrap(), session["session_id"].as_str().unwrap());

    let (s, b) = srv.get("/pathways/pw_missing").await;
    assert_error(s, &b, 404, "not_found");
    let (s, b) = srv.get("/sessions/..%2F..%2Fetc").await;
    assert_error(s, &b, 404, "not_found");
    let (s, b) = srv.get("/nothing/here").await;
    assert_error(s, &b, 404, "not_found");
    let (s, b) = srv.post(&format!("/sessions/{sid}/chat"), json!({ "message": "   " })).await;
    assert_error(s, &b, 400, "empty_message");
    let (s, b) = srv.post(&format!("/sessions/{sid}/chat"), json!({ "msg": "hi" })).await;
    assert_error(s, &b, 400, "invalid_request");
    let (s, b) = srv
        .post("/concept-maps", json!({ "prefs": { "topic": " ", "video_length": "short", "experience_level": "beginner" } }))
        .await;
    assert_error(s, &b, 400, "invalid_preferences");
    let (s, b) = srv.post("/concept-maps", json!({ "prefs": { "topic": "x", "video_length": "tiny", "experience_level": "beginner" } })).await;
    assert_error(s, &b, 400, "invalid_request");
    let (s, b) = srv.post(&format!("/sessions/{sid}/progress"), json!({ "week": 9, "slot": 1 })).await;
    assert_error(s, &b, 400, "invalid_position");
    let (s, b) = srv.post(&format!("/sessions/{sid}/notes/ai"), json!({ "timestamp_s": 1e9 })).await;
    assert_error(s, &b, 400, "invalid_timestamp");
    let (s, b) = srv.post(&format!("/sessions/{sid}/notes/manual"), json!({ "timestamp_s": 1, "text": "" })).await;
    assert_error(s, &b, 400, "invalid_note");
    let (s, b) = srv.post(&format!("/pathways/{pid}/videos/1/9/replace"), json!({})).await;
    assert_error(s, &b, 404, "not_found");
    let (s, b) = srv.post(&format!("/pathways/{pid}/videos/one/1/replace"), json!({})).await;
    assert_error(s, &b, 400, "invalid_request");
    let (s, b) = srv.post("/sessions", json!({ "pathway_id": "pw_nope" })).await;
    assert_error(s, &b, 404, "not_found");
    let (s, b) = srv.post("/pathways", json!({ "concept_map_id": "cm_nope" })).await;
    assert_error(s, &b, 404, "not_found");
}

#[tokio::test]
async fn model_failures_map_to_statuses() {
    let (_, gateway) = scripted(
        ScriptedProvider::new()
            .push(PromptKind::Classify, "A")
            .push_error(PromptKind::Answer, ProviderError::Transport("connection reset".into()))
            .repeat(PromptKind::NoteWithTranscript, "- Noise distorts the signal.\n- Feedback closes the loop.")
            .repeat(PromptKind::NoteFallback, "- Noise distorts the signal.\n- Feedback closes the loop."),
    );
    let srv = spawn().await;
    let (_, pathway, _) = srv.bootstrap().await;

    // A second server over the same store, answering from the script.
    let store = srv.dir.path().to_path_buf();
    let scripted_srv = spawn_with(
        move |mut s| {
            s.store = waypoint_server::FileStore::open(store).unwrap();
            s.gateway = gateway;
            s
        },
        None,
    )
    .await;
    let (_, session) = scripted_srv.post("/sessions", json!({ "pathway_id": pathway["pathway_id"] })).await;
    let sid = session["session_id"].as_str().unwrap();

    let (s, b) = scripted_srv.post(&format!("/sessions/{sid}/chat"), json!({ "message": "explain noise" })).await;
    assert_error(s, &b, 502, "provider_error");
    let (_, after) = scripted_srv.get(&format!("/sessions/{sid}")).await;
    assert_eq!(after["chat_history"], json!([]));

    let (s, _) = scripted_srv.post(&format!("/sessions/{sid}/notes/ai"), json!({ "timestamp_s": 10 })).await;
    assert_eq!(s, 201);
    let (s, b) = scripted_srv.post(&format!("/sessions/{sid}/notes/ai"), json!({ "timestamp_s": 20 })).await;
    assert_error(s, &b, 409, "note_redundant");
}

#[tokio::test]
async fn concurrent_chat_is_serialized() {
    let srv = std::sync::Arc::new(spawn().await);
    let (_, _, session) = srv.bootstrap().await;
    let sid = session["session_id"].as_str().unwrap().to_string();
    let posts: Vec<_> = (0..12)
        .map(|i| {
            let (srv, sid) = (srv.clone(), sid.clone());
            tokio::spawn(async move { srv.post(&format!("/sessions/{sid}/chat"), json!({ "message": format!("question {i}") })).await })
        })
        .collect();
    let mut ok = 0;
    for p in posts {
        if p.await.unwrap().0 == 200 {
            ok += 1;
        }
    }
    let (_, s) = srv.get(&format!("/sessions/{sid}")).await;
    assert_eq!(ok, 12);
    assert_eq!(s["chat_history"].as_array().unwrap().len(), ok * 2);
    let session: LearnerSession = typed(&s);
    assert!(session.chat_history.windows(2).all(|w| w[0].created_at < w[1].created_at));
}

#[tokio::test]
async fn static_bundle_is_served_at_root() {
    let ui = tempfile::tempdir().unwrap();
    std::fs::write(ui.path().join("index.html"), "<!doctype html><title>ui</title>").unwrap();
    let srv = spawn_with(|s| s, Some(ui.path().to_path_buf())).await;
    let root = srv.base.trim_end_matches("/v1");
    let page = srv.client.get(format!("{root}/")).send().await.unwrap();
    assert_eq!(page.status(), 200);
    assert!(page.text().await.unwrap().contains("<title>ui</title>"));
    let (s, b) = srv.get("/health").await;
    assert_eq!((s, b), (200, json!({ "status": "ok" })));
}
