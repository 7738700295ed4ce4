//! HTTP service over one fitted instance.
//!
//! * `GET /healthz`
//! * `GET /model`: domains, labels, config and thresholds
//! * `POST /predict`: `{"scores": [...], "scaled": false, "maxima": null}`
//!   returns the prediction and its diagram document

use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::State;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::json;

use polygrid::diagram::{build_diagram, DiagramModel};
use polygrid::labels::Task;
use polygrid::model::{PolygridConfig, PolygridInstance, Prediction};
use polygrid::PolygridError;

#[derive(Debug, Serialize, Deserialize)]
pub struct ModelInfo {
    pub task: Task,
    pub domain_names: Vec<String>,
    pub label_names: Vec<String>,
    pub config: PolygridConfig,
    pub config_tag: String,
    /// `null` for labels never seen in training.
    pub thresholds: Vec<Option<f64>>,
    pub scaling_maxima: Option<Vec<f64>>,
    pub size: usize,
}

impl ModelInfo {
    pub fn of(inst: &PolygridInstance) -> Self {
        ModelInfo {
            task: inst.task,
            domain_names: inst.domain_names.clone(),
            label_names: inst.label_names.clone(),
            config: inst.config.clone(),
            config_tag: inst.config.tag(),
            thresholds: inst.thresholds.iter().map(|t| t.is_finite().then_some(*t)).collect(),
            scaling_maxima: inst.scaling_maxima.clone(),
            size: inst.size(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PredictRequest {
    pub scores: Vec<f64>,
    /// Scores are already unit-scaled.
    #[serde(default)]
    pub scaled: bool,
    /// Per-domain maxima for raw scores; the instance's own are used when
    /// absent.
    #[serde(default)]
    pub maxima: Option<Vec<f64>>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct PredictResponse {
    pub labels: Vec<String>,
    pub ranking: Option<Vec<String>>,
    pub prediction: Prediction,
    pub diagram: DiagramModel,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
    pub field: Option<String>,
    pub message: String,
}

pub struct ApiError {
    status: StatusCode,
    body: ErrorBody,
}

impl ApiError {
    fn new(status: StatusCode, error: &str, field: Option<String>, message: String) -> Self {
        ApiError {
            status,
            body: ErrorBody {
                error: error.into(),
                field,
                message,
            },
        }
    }
}

impl From<PolygridError> for ApiError {
    fn from(e: PolygridError) -> Self {
        match &e {
            PolygridError::DimensionMismatch(_) => {
                ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "dimension_mismatch", Some("scores".into()), e.to_string())
            }
            PolygridError::ScoreOutOfRange { col, .. } | PolygridError::NonFinite { col, .. } => ApiError::new(
                StatusCode::BAD_REQUEST,
                "invalid_score",
                Some(format!("scores[{col}]")),
                format!("{e}; every scaled score must be strictly positive and at most 1"),
            ),
            _ => ApiError::new(StatusCode::BAD_REQUEST, "invalid_request", None, e.to_string()),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

#[derive(Clone)]
pub struct AppState {
    pub instance: Arc<PolygridInstance>,
}

async fn healthz() -> Json<serde_json::Value> {
    Json(json!({ "status": "ok" }))
}

async fn model(State(state): State<AppState>) -> Json<ModelInfo> {
    Json(ModelInfo::of(&state.instance))
}

/// Runs one prediction request against `inst`.
pub fn predict_one(inst: &PolygridInstance, req: &PredictRequest) -> Result<PredictResponse, ApiError> {
    if req.scores.len() != inst.n_domains() {
        return Err(ApiError::new(
            StatusCode::UNPROCESSABLE_ENTITY,
            "dimension_mismatch",
            Some("scores".into()),
            format!("expected {} scores, got {}", inst.n_domains(), req.scores.len()),
        ));
    }
    if let Some(m) = &req.maxima {
        if m.len() != req.scores.len() {
            return Err(ApiError::new(
                StatusCode::UNPROCESSABLE_ENTITY,
                "dimension_mismatch",
                Some("maxima".into()),
                format!("expected {} maxima, got {}", inst.n_domains(), m.len()),
            ));
        }
        if let Some(k) = m.iter().position(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(ApiError::new(
                StatusCode::BAD_REQUEST,
                "invalid_maximum",
                Some(format!("maxima[{k}]")),
                "maxima must be positive".into(),
            ));
        }
    }
    let x = if req.scaled {
        req.scores.clone()
    } else {
        inst.scale_raw(&req.scores, req.maxima.as_deref())?
    };
    let prediction = inst.predict(&x)?;
    let diagram = build_diagram(inst, std::slice::from_ref(&prediction))?;
    let name = |j: &usize| inst.label_names[*j].clone();
    Ok(PredictResponse {
        labels: (0..inst.n_labels()).filter(|&j| prediction.labels[j]).map(|j| name(&j)).collect(),
        ranking: prediction.ranking.as_ref().map(|r| r.iter().map(name).collect()),
        prediction,
        diagram,
    })
}

async fn predict(State(state): State<AppState>, body: Bytes) -> Result<Json<PredictResponse>, ApiError> {
    let req: PredictRequest = serde_json::from_slice(&body).map_err(|e| {
        ApiError::new(StatusCode::BAD_REQUEST, "malformed_body", None, e.to_string())
    })?;
    predict_one(&state.instance, &req).map(Json)
}

pub fn router(instance: PolygridInstance) -> Router {
    Router::new()
        .route("/healthz", get(healthz))
        .route("/model", get(model))
        .route("/predict", post(predict))
        .with_state(AppState {
            instance: Arc::new(instance),
        })
}
