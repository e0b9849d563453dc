use std::path::PathBuf;

use careerpath_core::model::ModelKind;
use thiserror::Error;

pub type AppResult<T> = Result<T, AppError>;

#[derive(Debug, Error)]
pub enum AppError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("config {path}: {message}")]
    Config { path: PathBuf, message: String },
    #[error("{path}: missing required column {column:?}")]
    Schema { path: PathBuf, column: String },
    #[error("{path}: {message}")]
    Dataset { path: PathBuf, message: String },
    #[error("{path}, row {row}: {message}")]
    DatasetRow {
        path: PathBuf,
        row: usize,
        message: String,
    },
    #[error("{context}: {source}")]
    Core {
        context: String,
        #[source]
        source: careerpath_core::Error,
    },
    #[error("{path}: unsupported artifact version {found:?} (this build reads v{supported})")]
    ArtifactVersion {
        path: PathBuf,
        found: String,
        supported: u32,
    },
    #[error("{path}: checksum mismatch (header {expected}, payload {actual}); the file is corrupt or was edited")]
    ArtifactChecksum {
        path: PathBuf,
        expected: String,
        actual: String,
    },
    #[error("{path}: malformed artifact: {message}")]
    ArtifactPayload { path: PathBuf, message: String },
    #[error("{path}: inconsistent artifact shape: {message}")]
    ArtifactShape { path: PathBuf, message: String },
    #[error("{kind} artifact was trained on dataset {artifact} but the current dataset is {current}; retrain with `train`")]
    StaleArtifact {
        kind: ModelKind,
        artifact: String,
        current: String,
    },
    #[error("no {0} artifact is loaded")]
    ModelNotLoaded(ModelKind),
    #[error("no evaluation report for {0}; run `evaluate` first")]
    ReportMissing(ModelKind),
    #[error("no artifacts found in {0}; run `train` first")]
    NoArtifacts(PathBuf),
    #[error("cannot bind {addr}: {source}")]
    Bind {
        addr: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid request: {0}")]
    BadRequest(String),
}

impl AppError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        AppError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn core(context: impl Into<String>, source: careerpath_core::Error) -> Self {
        AppError::Core {
            context: context.into(),
            source,
        }
    }

    /// Stable snake_case tag used in HTTP error bodies.
    pub fn kind(&self) -> &'static str {
        match self {
            AppError::Io { .. } => "io",
            AppError::Config { .. } => "config",
            AppError::Schema { .. } => "schema",
            AppError::Dataset { .. } | AppError::DatasetRow { .. } => "dataset",
            AppError::Core { source, .. } => match source {
                careerpath_core::Error::UndefinedMetric => "undefined_metric",
                careerpath_core::Error::Shape { .. } => "shape",
                careerpath_core::Error::InvalidParameter(_) => "invalid_parameter",
                careerpath_core::Error::Divergence { .. } => "divergence",
                _ => "core",
            },
            AppError::ArtifactVersion { .. } => "artifact_version",
            AppError::ArtifactChecksum { .. } => "artifact_checksum",
            AppError::ArtifactPayload { .. } => "artifact_payload",
            AppError::ArtifactShape { .. } => "artifact_shape",
            AppError::StaleArtifact { .. } => "stale_artifact",
            AppError::ModelNotLoaded(_) => "model_not_loaded",
            AppError::ReportMissing(_) => "report_missing",
            AppError::NoArtifacts(_) => "no_artifacts",
            AppError::Bind { .. } => "bind",
            AppError::BadRequest(_) => "bad_request",
        }
    }
}
