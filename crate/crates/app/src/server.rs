//! HTTP prediction service. Loaded artifacts are immutable and shared; no
//! handler mutates state.

use std::collections::BTreeMap;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path as UrlPath, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use careerpath_core::corpus::{MasterField, MasterFieldTaxonomy};
use careerpath_core::model::ModelKind;
use serde::{Deserialize, Serialize};
use tower_http::cors::CorsLayer;

use crate::artifact::ModelArtifact;
use crate::error::AppError;
use crate::pipeline::ModelReport;
use crate::predict::{predict_response, PredictionResponse};

pub const DEFAULT_MODEL: ModelKind = ModelKind::Svm;

pub struct ServiceState {
    pub artifacts: BTreeMap<ModelKind, ModelArtifact>,
    pub reports: BTreeMap<ModelKind, ModelReport>,
    pub taxonomy: MasterFieldTaxonomy,
}

impl ServiceState {
    pub fn new(
        artifacts: BTreeMap<ModelKind, ModelArtifact>,
        reports: BTreeMap<ModelKind, ModelReport>,
        taxonomy: MasterFieldTaxonomy,
    ) -> Result<Self, AppError> {
        if artifacts.is_empty() {
            return Err(AppError::BadRequest(
                "the service needs at least one artifact".into(),
            ));
        }
        Ok(Self {
            artifacts,
            reports,
            taxonomy,
        })
    }

    /// SVM unless it is not loaded, then the first loaded kind.
    pub fn default_model(&self) -> ModelKind {
        if self.artifacts.contains_key(&DEFAULT_MODEL) {
            DEFAULT_MODEL
        } else {
            *self.artifacts.keys().next().expect("at least one artifact")
        }
    }

    pub fn predict(&self, req: &PredictRequest) -> Result<PredictionResponse, AppError> {
        let kind = match &req.model {
            Some(name) => name
                .parse::<ModelKind>()
                .map_err(|e| AppError::BadRequest(e.to_string()))?,
            None => self.default_model(),
        };
        let artifact = self
            .artifacts
            .get(&kind)
            .ok_or(AppError::ModelNotLoaded(kind))?;
        predict_response(artifact, &req.skills.joined())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Skills {
    Text(String),
    List(Vec<String>),
}

impl Skills {
    pub fn joined(&self) -> String {
        match self {
            Skills::Text(s) => s.clone(),
            Skills::List(v) => v.join(", "),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PredictRequest {
    pub skills: Skills,
    #[serde(default)]
    pub model: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error_kind: String,
    pub message: String,
    pub context: BTreeMap<String, String>,
}

struct ApiError(AppError);

impl From<AppError> for ApiError {
    fn from(e: AppError) -> Self {
        ApiError(e)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let e = self.0;
        let mut context = BTreeMap::new();
        let status = match &e {
            AppError::BadRequest(_) => StatusCode::BAD_REQUEST,
            AppError::ModelNotLoaded(k) | AppError::ReportMissing(k) => {
                context.insert("model".to_string(), k.name().to_string());
                StatusCode::NOT_FOUND
            }
            AppError::Core { context: c, .. } => {
                context.insert("stage".to_string(), c.clone());
                StatusCode::INTERNAL_SERVER_ERROR
            }
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        let body = ErrorBody {
            error_kind: e.kind().to_string(),
            message: e.to_string(),
            context,
        };
        (status, Json(body)).into_response()
    }
}

fn not_found(path: &str) -> Response {
    let body = ErrorBody {
        error_kind: "not_found".into(),
        message: format!("no route for {path}"),
        context: BTreeMap::from([("path".to_string(), path.to_string())]),
    };
    (StatusCode::NOT_FOUND, Json(body)).into_response()
}

pub fn router(state: Arc<ServiceState>) -> Router {
    Router::new()
        .route("/predict", post(predict))
        .route("/labels", get(labels))
        .route("/models", get(models))
        .route("/report/{kind}", get(report))
        .route("/taxonomy", get(taxonomy))
        .fallback(|uri: axum::http::Uri| async move { not_found(uri.path()) })
        .layer(CorsLayer::permissive())
        .with_state(state)
}

/// Reads the raw body so malformed JSON gets the structured error body too.
async fn predict(
    State(state): State<Arc<ServiceState>>,
    body: Bytes,
) -> Result<Json<PredictionResponse>, ApiError> {
    let req: PredictRequest = serde_json::from_slice(&body)
        .map_err(|e| AppError::BadRequest(format!("request body: {e}")))?;
    Ok(Json(state.predict(&req)?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelEntry {
    pub code: usize,
    pub label: String,
}

async fn labels() -> Json<Vec<LabelEntry>> {
    Json(
        MasterField::ALL
            .iter()
            .map(|m| LabelEntry {
                code: m.code(),
                label: m.name().to_string(),
            })
            .collect(),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelInfo {
    pub kind: ModelKind,
    pub default: bool,
    /// From the last `evaluate`, when its report is present.
    pub accuracy: Option<f64>,
    pub config_hash: String,
    pub dataset_fingerprint: String,
    pub vocabulary_size: usize,
}

async fn models(State(state): State<Arc<ServiceState>>) -> Json<Vec<ModelInfo>> {
    let default = state.default_model();
    Json(
        state
            .artifacts
            .iter()
            .map(|(&kind, a)| ModelInfo {
                kind,
                default: kind == default,
                accuracy: state
                    .reports
                    .get(&kind)
                    .filter(|r| r.dataset_fingerprint == a.metadata.dataset_fingerprint)
                    .map(|r| r.evaluation.accuracy),
                config_hash: a.metadata.config_hash.clone(),
                dataset_fingerprint: a.metadata.dataset_fingerprint.clone(),
                vocabulary_size: a.vocabulary.len(),
            })
            .collect(),
    )
}

async fn report(
    State(state): State<Arc<ServiceState>>,
    UrlPath(kind): UrlPath<String>,
) -> Result<Json<ModelReport>, ApiError> {
    let kind: ModelKind = kind
        .parse()
        .map_err(|e: careerpath_core::Error| AppError::BadRequest(e.to_string()))?;
    state
        .reports
        .get(&kind)
        .cloned()
        .map(Json)
        .ok_or(ApiError(AppError::ReportMissing(kind)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaxonomyView {
    pub field_to_master: BTreeMap<String, String>,
    pub master_to_skills: BTreeMap<String, Vec<String>>,
    pub aliases: BTreeMap<String, String>,
}

impl TaxonomyView {
    pub fn new(t: &MasterFieldTaxonomy) -> Self {
        Self {
            field_to_master: t
                .fields()
                .iter()
                .map(|(f, m)| (f.clone(), m.name().to_string()))
                .collect(),
            master_to_skills: t
                .skill_names()
                .iter()
                .map(|(m, s)| (m.name().to_string(), s.clone()))
                .collect(),
            aliases: t.aliases().iter().cloned().collect(),
        }
    }
}

async fn taxonomy(State(state): State<Arc<ServiceState>>) -> Json<TaxonomyView> {
    Json(TaxonomyView::new(&state.taxonomy))
}

/// Binds and serves until Ctrl-C.
pub async fn serve(state: Arc<ServiceState>, bind: &str) -> Result<(), AppError> {
    let listener = tokio::net::TcpListener::bind(bind)
        .await
        .map_err(|source| AppError::Bind {
            addr: bind.to_string(),
            source,
        })?;
    let addr = listener.local_addr().map_err(|source| AppError::Bind {
        addr: bind.to_string(),
        source,
    })?;
    eprintln!("listening on http://{addr}");
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
        .map_err(|source| AppError::Bind {
            addr: addr.to_string(),
            source,
        })
}
