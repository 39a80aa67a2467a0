use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use partial_correction::session::{Session, SessionStore};
use partial_correction_server::router;
use serde_json::{json, Value};
use tower::ServiceExt;

fn app() -> Router {
    router(Arc::new(SessionStore::new()), None)
}

async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, String) {
    let req = Request::builder().method(method).uri(uri);
    let req = match body {
        Some(b) => req
            .header("content-type", "application/json")
            .body(Body::from(b.to_string())),
        None => req.body(Body::empty()),
    }
    .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (status, String::from_utf8(bytes.to_vec()).unwrap())
}

async fn json_call(
    app: &Router,
    method: &str,
    uri: &str,
    body: Option<Value>,
) -> (StatusCode, Value) {
    let (s, text) = call(app, method, uri, body).await;
    (s, serde_json::from_str(&text).unwrap_or(Value::Null))
}

async fn create(app: &Router, config: Value) -> Value {
    let (s, v) = json_call(app, "POST", "/api/sessions", Some(config)).await;
    assert_eq!(s, StatusCode::CREATED, "{v}");
    v
}

/// A truthful correction for the default grid target, threshold 0, which
/// labels every point 1.
fn first_wrong_component(view: &Value) -> Option<(u64, u64)> {
    let q = &view["query"];
    q["components"].as_array()?.iter().find_map(|c| {
        (c["displayed"].as_u64() == Some(0)).then(|| (c["index"].as_u64().unwrap(), 1))
    })
}

#[tokio::test]
async fn grid_session_view() {
    let app = app();
    let v = create(&app, json!({"space": "grid:M=4,c=2", "seed": 7})).await;
    assert_eq!(v["step"], 1);
    assert_eq!(v["version_space_size"], 5);
    assert_eq!(v["hypotheses_total"], 5);
    assert_eq!(v["kind"], "grid");
    let q = &v["query"];
    assert_eq!(q["payload"]["points"].as_array().unwrap().len(), 2);
    assert_eq!(q["components"].as_array().unwrap().len(), 2);
    assert!(v["err"].is_number());

    let id = v["id"].as_str().unwrap();
    let (s, again) = json_call(&app, "GET", &format!("/api/sessions/{id}"), None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(again, v);
}

#[tokio::test]
async fn triplet_session_lists_four_correctable_triplets() {
    let app = app();
    let v = create(&app, json!({"space": {"kind": "triplet", "n": 5, "m": 4}})).await;
    let comps = v["query"]["components"].as_array().unwrap();
    assert_eq!(comps.len(), 4);
    for c in comps {
        assert_eq!(c["options"].as_array().unwrap().len(), 3);
    }
}

#[tokio::test]
async fn authoritative_mode_never_exposes_errors() {
    let app = app();
    let v = create(
        &app,
        json!({"space": "triplet:n=5,m=4", "mode": {"kind": "authoritative"}}),
    )
    .await;
    assert!(v.get("err").is_none());
    assert!(v.get("err_c").is_none());
    assert_eq!(v["mode"], "authoritative");
}

#[tokio::test]
async fn feedback_guards() {
    let app = app();
    let v = create(&app, json!({"space": "single:c=4"})).await;
    let id = v["id"].as_str().unwrap();
    let url = format!("/api/sessions/{id}/feedback");

    let shown = v["query"]["components"][0]["displayed"].as_u64().unwrap();
    let (s, e) = json_call(
        &app,
        "POST",
        &url,
        Some(json!({"step": 1, "kind": "correct", "component": 0, "value": shown})),
    )
    .await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(e["error"], "not-a-correction");
    assert!(e["detail"].is_string());

    let (s, e) = json_call(
        &app,
        "POST",
        &url,
        Some(json!({"step": 9, "kind": "accept"})),
    )
    .await;
    assert_eq!(s, StatusCode::CONFLICT);
    assert_eq!(e["error"], "stale-step");

    let (s, e) = json_call(
        &app,
        "POST",
        &url,
        Some(json!({"step": 1, "kind": "accept"})),
    )
    .await;
    assert_eq!(
        s,
        StatusCode::UNPROCESSABLE_ENTITY,
        "accepting a wrong display in oracle mode"
    );
    assert_eq!(e["error"], "wrong-feedback");

    let (s, e) = json_call(
        &app,
        "POST",
        &url,
        Some(json!({"step": 1, "kind": "shrug"})),
    )
    .await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(e["error"], "invalid-body");

    let (s, e) = json_call(
        &app,
        "POST",
        "/api/sessions/nope/feedback",
        Some(json!({"step": 1, "kind": "accept"})),
    )
    .await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    assert_eq!(e["error"], "not-found");

    // Nothing was recorded.
    let (_, now) = json_call(&app, "GET", &format!("/api/sessions/{id}"), None).await;
    assert_eq!(now, v);
}

#[tokio::test]
async fn invalid_spec_is_422() {
    let app = app();
    let (s, e) = json_call(
        &app,
        "POST",
        "/api/sessions",
        Some(json!({"space": "grid:M=0,c=2"})),
    )
    .await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(e["error"], "invalid-config");
    let (s, _) = json_call(
        &app,
        "POST",
        "/api/sessions",
        Some(json!({"space": "nonsense"})),
    )
    .await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
}

#[tokio::test]
async fn oracle_run_to_termination_then_replay() {
    let app = app();
    let mut v = create(&app, json!({"space": "grid:M=10,c=3,pool=16", "seed": 5})).await;
    let id = v["id"].as_str().unwrap().to_string();
    let url = format!("/api/sessions/{id}/feedback");
    let mut sizes = vec![v["version_space_size"].as_u64().unwrap()];
    let mut guard = 0;
    while v["terminated"] == false {
        guard += 1;
        assert!(guard < 10_000);
        let step = v["step"].as_u64().unwrap();
        let body = match first_wrong_component(&v) {
            Some((component, value)) => {
                json!({"step": step, "kind": "correct", "component": component, "value": value})
            }
            None => json!({"step": step, "kind": "accept"}),
        };
        let (s, next) = json_call(&app, "POST", &url, Some(body)).await;
        assert_eq!(s, StatusCode::OK, "{next}");
        sizes.push(next["version_space_size"].as_u64().unwrap());
        v = next;
    }
    assert!(sizes.windows(2).all(|w| w[1] <= w[0]));
    assert!(v["final_hypothesis"].is_string());
    assert!(v.get("query").is_none());
    assert_eq!(
        v["history"].as_array().unwrap().last().unwrap()["version_space_size"],
        *sizes.last().unwrap()
    );

    let (s, e) = json_call(
        &app,
        "POST",
        &url,
        Some(json!({"step": v["step"], "kind": "accept"})),
    )
    .await;
    assert_eq!(s, StatusCode::CONFLICT);
    assert_eq!(e["error"], "terminated");

    let (s, text) = call(&app, "GET", &format!("/api/sessions/{id}/transcript"), None).await;
    assert_eq!(s, StatusCode::OK);
    let replayed = Session::replay_export("r", &text).unwrap();
    let history: Value = serde_json::to_value(replayed.history()).unwrap();
    assert_eq!(history, v["history"]);
    assert_eq!(
        replayed.view().version_space_size as u64,
        *sizes.last().unwrap()
    );
}

#[tokio::test]
async fn fresh_transcript_is_header_only() {
    let app = app();
    let v = create(&app, json!({"space": "single:c=4"})).await;
    let (s, text) = call(
        &app,
        "GET",
        &format!("/api/sessions/{}/transcript", v["id"].as_str().unwrap()),
        None,
    )
    .await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(text.lines().count(), 1);
    assert!(text.starts_with("# session "));
}

#[tokio::test]
async fn spaces_listing_builds() {
    let app = app();
    let (s, v) = json_call(&app, "GET", "/api/spaces", None).await;
    assert_eq!(s, StatusCode::OK);
    let offers = v.as_array().unwrap();
    assert!(offers.len() >= 4);
    for o in offers {
        create(&app, json!({"space": o["spec"]})).await;
    }
}

#[tokio::test]
async fn static_files_are_served() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("index.html"), "<p>ui</p>").unwrap();
    let app = router(
        Arc::new(SessionStore::new()),
        Some(dir.path().to_path_buf()),
    );
    let (s, body) = call(&app, "GET", "/index.html", None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(body, "<p>ui</p>");
}

#[tokio::test]
async fn journal_matches_export() {
    let dir = tempfile::tempdir().unwrap();
    let store = Arc::new(SessionStore::with_journal(dir.path().to_path_buf()));
    let app = router(store.clone(), None);
    let v = create(&app, json!({"space": "single:c=4", "seed": 1})).await;
    let id = v["id"].as_str().unwrap();
    json_call(
        &app,
        "POST",
        &format!("/api/sessions/{id}/feedback"),
        Some(json!({"step": 1, "kind": "correct", "component": 0, "value": 1})),
    )
    .await;
    let journal = std::fs::read_to_string(dir.path().join(format!("{id}.jsonl"))).unwrap();
    assert_eq!(journal, store.export(id).unwrap());
}
