use axum::body::Body;
use axum::http::{Request, StatusCode};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

use polygrid::data::{instrument_dataset, Instrument};
use polygrid::geometry::SectorType;
use polygrid::model::{fit_dataset, PolygridConfig, PolygridInstance};
use polygrid::solvers::SolverKind;
use polygrid_cli::service::router;

fn fitted() -> (PolygridInstance, polygrid::data::Dataset) {
    let ds = instrument_dataset(Instrument::Whoqol, 100, 1).unwrap();
    let cfg = PolygridConfig {
        sector: SectorType::Cover,
        solver: SolverKind::ridge(),
        ..PolygridConfig::default()
    };
    (fit_dataset(&ds, &cfg).unwrap(), ds)
}

async fn call(inst: &PolygridInstance, req: Request<Body>) -> (StatusCode, Vec<u8>) {
    let resp = router(inst.clone()).oneshot(req).await.unwrap();
    let status = resp.status();
    (status, resp.into_body().collect().await.unwrap().to_bytes().to_vec())
}

fn post(body: &Value) -> Request<Body> {
    Request::post("/predict")
        .header("content-type", "application/json")
        .body(Body::from(body.to_string()))
        .unwrap()
}

#[tokio::test]
async fn healthz_answers() {
    let (inst, _) = fitted();
    let (status, body) = call(&inst, Request::get("/healthz").body(Body::empty()).unwrap()).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(serde_json::from_slice::<Value>(&body).unwrap()["status"], "ok");
}

#[tokio::test]
async fn model_lists_one_threshold_per_label() {
    let (inst, _) = fitted();
    let (status, body) = call(&inst, Request::get("/model").body(Body::empty()).unwrap()).await;
    assert_eq!(status, StatusCode::OK);
    let v: Value = serde_json::from_slice(&body).unwrap();
    assert_eq!(v["label_names"].as_array().unwrap().len(), v["thresholds"].as_array().unwrap().len());
    assert_eq!(v["domain_names"].as_array().unwrap().len(), 4);
    assert_eq!(v["config_tag"], inst.config.tag());
}

#[tokio::test]
async fn training_positive_row_gets_its_label() {
    let (inst, ds) = fitted();
    let y = ds.assignment().unwrap().presence();
    let preds = inst.predict_many(&ds.x).unwrap();
    // a positive row the model classifies correctly in-sample
    let i = (0..ds.len()).find(|&i| y[i][1] && preds[i].labels[1]).unwrap();
    let (status, body) = call(&inst, post(&json!({ "scores": ds.raw[i] }))).await;
    assert_eq!(status, StatusCode::OK);
    let v: Value = serde_json::from_slice(&body).unwrap();
    let labels: Vec<&str> = v["labels"].as_array().unwrap().iter().map(|l| l.as_str().unwrap()).collect();
    assert!(labels.contains(&ds.label_names[1].as_str()), "{labels:?}");
    assert_eq!(v["diagram"]["rows"], 2);
    assert_eq!(v["diagram"]["cols"], 3);
}

#[tokio::test]
async fn scaled_and_raw_inputs_agree() {
    let (inst, ds) = fitted();
    let (_, a) = call(&inst, post(&json!({ "scores": ds.raw[3] }))).await;
    let (_, b) = call(&inst, post(&json!({ "scores": ds.x[3], "scaled": true }))).await;
    let a: Value = serde_json::from_slice(&a).unwrap();
    let b: Value = serde_json::from_slice(&b).unwrap();
    assert_eq!(a["labels"], b["labels"]);
}

#[tokio::test]
async fn zero_score_is_rejected_with_field() {
    let (inst, _) = fitted();
    let (status, body) = call(&inst, post(&json!({ "scores": [10.0, 0.0, 12.0, 15.0] }))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let v: Value = serde_json::from_slice(&body).unwrap();
    assert_eq!(v["field"], "scores[1]");
    assert!(v["message"].as_str().unwrap().contains("strictly positive"));
}

#[tokio::test]
async fn wrong_length_is_unprocessable() {
    let (inst, _) = fitted();
    let (status, _) = call(&inst, post(&json!({ "scores": [10.0, 12.0] }))).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
}

#[tokio::test]
async fn malformed_body_is_bad_request() {
    let (inst, _) = fitted();
    let req = Request::post("/predict").body(Body::from("{not json")).unwrap();
    let (status, _) = call(&inst, req).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, _) = call(&inst, post(&json!({ "scores": "high" }))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn identical_requests_get_identical_bodies() {
    let (inst, ds) = fitted();
    let body = json!({ "scores": ds.raw[7] });
    let (_, a) = call(&inst, post(&body)).await;
    let (_, b) = call(&inst, post(&body)).await;
    assert_eq!(a, b);
}
