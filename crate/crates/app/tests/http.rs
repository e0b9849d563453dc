mod common;

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use careerpath::pipeline::{cmd_evaluate, cmd_train, load_artifacts, load_reports, Layout};
use careerpath::server::{router, ErrorBody, LabelEntry, ModelInfo, ServiceState, TaxonomyView};
use careerpath::PredictionResponse;
use careerpath_core::corpus::MasterFieldTaxonomy;
use careerpath_core::model::ModelKind;
use http_body_util::BodyExt;
use serde_json::Value;
use tower::ServiceExt;

fn state(dir: &Path, kinds: &[ModelKind], evaluate: bool) -> Arc<ServiceState> {
    let mut cfg = common::small_workspace(dir, 60);
    cfg.kinds = kinds.to_vec();
    cmd_train(&cfg, kinds).unwrap();
    if evaluate {
        cmd_evaluate(&cfg).unwrap();
    }
    let layout = Layout::new(&cfg.output_dir);
    Arc::new(
        ServiceState::new(
            load_artifacts(&layout).unwrap(),
            load_reports(&layout).unwrap(),
            MasterFieldTaxonomy::bundled(),
        )
        .unwrap(),
    )
}

async fn call(
    app: &Router,
    method: Method,
    uri: &str,
    body: Option<&str>,
) -> (StatusCode, Vec<u8>) {
    let mut req = Request::builder().method(method).uri(uri);
    if body.is_some() {
        req = req.header("content-type", "application/json");
    }
    let req = req
        .body(body.map_or_else(Body::empty, |b| Body::from(b.to_string())))
        .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    (
        status,
        resp.into_body()
            .collect()
            .await
            .unwrap()
            .to_bytes()
            .to_vec(),
    )
}

async fn predict(app: &Router, body: &str) -> (StatusCode, Vec<u8>) {
    call(app, Method::POST, "/predict", Some(body)).await
}

#[tokio::test]
async fn predict_defaults_to_svm_and_accepts_both_skill_forms() {
    let dir = tempfile::tempdir().unwrap();
    let app = router(state(dir.path(), &[ModelKind::Svm, ModelKind::Nb], true));

    let (status, text) = predict(
        &app,
        r#"{"skills": "machine learning, python, tensorflow"}"#,
    )
    .await;
    assert_eq!(status, StatusCode::OK);
    let r: PredictionResponse = serde_json::from_slice(&text).unwrap();
    assert_eq!(r.model, ModelKind::Svm);
    assert_eq!(r.ranking.len(), 6);
    assert_eq!(r.ranking.iter().map(|x| x.hundredths).sum::<u32>(), 10_000);
    assert!(r
        .ranking
        .windows(2)
        .all(|w| w[0].hundredths >= w[1].hundredths));

    let (_, list) = predict(
        &app,
        r#"{"skills": ["machine learning", "python", "tensorflow"]}"#,
    )
    .await;
    assert_eq!(list, text);

    let (status, nb) = predict(&app, r#"{"skills": "figma", "model": "NB"}"#).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(
        serde_json::from_slice::<PredictionResponse>(&nb)
            .unwrap()
            .model,
        ModelKind::Nb
    );
}

#[tokio::test]
async fn empty_and_unknown_input_is_flagged_not_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let st = state(dir.path(), &[ModelKind::Svm], false);
    let known = st.artifacts[&ModelKind::Svm].vocabulary.tokens()[0].clone();
    let app = router(st);
    for body in [
        r#"{"skills": ""}"#,
        r#"{"skills": []}"#,
        r#"{"skills": "qwertyuiop zxcvbnm"}"#,
    ] {
        let (status, text) = predict(&app, body).await;
        assert_eq!(status, StatusCode::OK, "{body}");
        let r: PredictionResponse = serde_json::from_slice(&text).unwrap();
        assert!(r.low_confidence, "{body}");
        assert_eq!(r.ranking.len(), 6);
    }
    let (_, text) = predict(&app, &format!(r#"{{"skills": "{known}, qwertyuiop"}}"#)).await;
    let r: PredictionResponse = serde_json::from_slice(&text).unwrap();
    assert_eq!(r.oov, vec!["qwertyuiop"]);
    assert!(!r.low_confidence);
}

#[tokio::test]
async fn request_errors_have_structured_bodies() {
    let dir = tempfile::tempdir().unwrap();
    let app = router(state(dir.path(), &[ModelKind::Svm], false));
    let cases = [
        ("{not json", StatusCode::BAD_REQUEST, "bad_request"),
        (
            r#"{"model": "SVM"}"#,
            StatusCode::BAD_REQUEST,
            "bad_request",
        ),
        (
            r#"{"skills": "x", "extra": 1}"#,
            StatusCode::BAD_REQUEST,
            "bad_request",
        ),
        (r#"{"skills": 5}"#, StatusCode::BAD_REQUEST, "bad_request"),
        (
            r#"{"skills": "x", "model": "GPT"}"#,
            StatusCode::BAD_REQUEST,
            "bad_request",
        ),
        (
            r#"{"skills": "x", "model": "LSTM"}"#,
            StatusCode::NOT_FOUND,
            "model_not_loaded",
        ),
    ];
    for (body, status, kind) in cases {
        let (got, text) = predict(&app, body).await;
        assert_eq!(got, status, "{body}");
        let e: ErrorBody = serde_json::from_slice(&text).unwrap();
        assert_eq!(e.error_kind, kind, "{body}");
        assert!(!e.message.is_empty());
    }
    let (_, text) = predict(&app, r#"{"skills": "x", "model": "LSTM"}"#).await;
    let e: ErrorBody = serde_json::from_slice(&text).unwrap();
    assert_eq!(e.context.get("model").map(String::as_str), Some("LSTM"));

    let (status, text) = call(&app, Method::GET, "/nowhere", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(
        serde_json::from_slice::<ErrorBody>(&text)
            .unwrap()
            .error_kind,
        "not_found"
    );

    let (status, _) = call(&app, Method::GET, "/predict", None).await;
    assert_eq!(status, StatusCode::METHOD_NOT_ALLOWED);
}

#[tokio::test]
async fn catalogue_endpoints() {
    let dir = tempfile::tempdir().unwrap();
    let app = router(state(dir.path(), &[ModelKind::Svm, ModelKind::Lr], true));

    let (status, text) = call(&app, Method::GET, "/labels", None).await;
    assert_eq!(status, StatusCode::OK);
    let labels: Vec<LabelEntry> = serde_json::from_slice(&text).unwrap();
    let codes: Vec<(usize, &str)> = labels.iter().map(|l| (l.code, l.label.as_str())).collect();
    assert_eq!(
        codes,
        vec![
            (0, "AI"),
            (1, "DS"),
            (2, "DEV"),
            (3, "SEC"),
            (4, "SDE"),
            (5, "UI / UX")
        ]
    );

    let (_, text) = call(&app, Method::GET, "/models", None).await;
    let models: Vec<ModelInfo> = serde_json::from_slice(&text).unwrap();
    assert_eq!(models.len(), 2);
    for m in &models {
        assert_eq!(m.default, m.kind == ModelKind::Svm);
        assert!(m.accuracy.is_some_and(|a| (0.0..=1.0).contains(&a)));
        assert_eq!(m.config_hash.len(), 64);
        assert!(m.vocabulary_size > 0);
    }

    let (status, text) = call(&app, Method::GET, "/report/svm", None).await;
    assert_eq!(status, StatusCode::OK);
    let v: Value = serde_json::from_slice(&text).unwrap();
    assert_eq!(v["model"], "SVM");
    for key in [
        "accuracy",
        "classes",
        "macro_avg",
        "weighted_avg",
        "counts",
        "confusion",
    ] {
        assert!(v.get(key).is_some(), "{key}");
    }
    let (status, text) = call(&app, Method::GET, "/report/CNN", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(
        serde_json::from_slice::<ErrorBody>(&text)
            .unwrap()
            .error_kind,
        "report_missing"
    );
    let (status, _) = call(&app, Method::GET, "/report/bogus", None).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);

    let (status, text) = call(&app, Method::GET, "/taxonomy", None).await;
    assert_eq!(status, StatusCode::OK);
    let t: TaxonomyView = serde_json::from_slice(&text).unwrap();
    assert_eq!(t.master_to_skills.len(), 6);
    assert!(t
        .field_to_master
        .values()
        .all(|m| t.master_to_skills.contains_key(m)));
}

#[tokio::test]
async fn models_without_reports_have_no_accuracy_and_default_falls_back() {
    let dir = tempfile::tempdir().unwrap();
    let app = router(state(dir.path(), &[ModelKind::Nb, ModelKind::Knn], false));
    let (_, text) = call(&app, Method::GET, "/models", None).await;
    let models: Vec<ModelInfo> = serde_json::from_slice(&text).unwrap();
    assert!(models.iter().all(|m| m.accuracy.is_none()));
    let defaults: Vec<ModelKind> = models
        .iter()
        .filter(|m| m.default)
        .map(|m| m.kind)
        .collect();
    assert_eq!(defaults, vec![ModelKind::Knn]);
    let (_, text) = predict(&app, r#"{"skills": "python"}"#).await;
    assert_eq!(
        serde_json::from_slice::<PredictionResponse>(&text)
            .unwrap()
            .model,
        ModelKind::Knn
    );
}

#[tokio::test]
async fn service_needs_an_artifact() {
    let e = ServiceState::new(
        BTreeMap::new(),
        BTreeMap::new(),
        MasterFieldTaxonomy::bundled(),
    )
    .err()
    .unwrap();
    assert_eq!(e.kind(), "bad_request");
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn concurrent_requests_match_serial_ones() {
    let dir = tempfile::tempdir().unwrap();
    let app = router(state(
        dir.path(),
        &[ModelKind::Svm, ModelKind::Lr, ModelKind::Mlp],
        false,
    ));
    let bodies: Vec<String> = (0..48)
        .map(|i| {
            let model = ["SVM", "LR", "MLP"][i % 3];
            let skills = [
                "python, sql",
                "html css javascript",
                "figma",
                "",
                "network security, linux",
                "uml, jira",
            ][i % 6];
            format!(r#"{{"skills": "{skills}", "model": "{model}"}}"#)
        })
        .collect();
    let mut serial = Vec::new();
    for b in &bodies {
        serial.push(predict(&app, b).await);
    }
    let handles: Vec<_> = bodies
        .iter()
        .cloned()
        .map(|b| {
            let app = app.clone();
            tokio::spawn(async move { predict(&app, &b).await })
        })
        .collect();
    for (h, expected) in handles.into_iter().zip(&serial) {
        assert_eq!(&h.await.unwrap(), expected);
    }
}

#[tokio::test]
async fn cors_preflight_is_allowed() {
    let dir = tempfile::tempdir().unwrap();
    let app = router(state(dir.path(), &[ModelKind::Nb], false));
    let req = Request::builder()
        .method(Method::OPTIONS)
        .uri("/predict")
        .header("origin", "http://localhost:5173")
        .header("access-control-request-method", "POST")
        .body(Body::empty())
        .unwrap();
    let resp = app.oneshot(req).await.unwrap();
    assert!(resp.status().is_success());
    assert!(resp.headers().contains_key("access-control-allow-origin"));
}

#[tokio::test]
async fn occupied_address_is_a_bind_error() {
    let dir = tempfile::tempdir().unwrap();
    let st = state(dir.path(), &[ModelKind::Nb], false);
    let taken = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = taken.local_addr().unwrap().to_string();
    let e = careerpath::server::serve(st, &addr).await.unwrap_err();
    assert_eq!(e.kind(), "bind");
    assert!(e.to_string().contains(&addr));
}
