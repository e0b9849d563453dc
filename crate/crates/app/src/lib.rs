//! Command-line pipeline and HTTP service for skill-based career prediction.
//!
//! `train` ingests a survey file, cleans it against the master-field taxonomy,
//! vectorizes the skill text and trains the eight classifiers of
//! [`careerpath_core`]; `evaluate` scores the saved artifacts on the held-out
//! split; `serve` answers prediction requests from the saved artifacts.

pub mod artifact;
pub mod config;
pub mod error;
pub mod pipeline;
pub mod predict;
pub mod server;
pub mod survey;
pub mod synth;

pub use artifact::{ArtifactMetadata, ModelArtifact, FORMAT_VERSION};
pub use config::PipelineConfig;
pub use error::{AppError, AppResult};
pub use predict::{PredictionResponse, RankedLabel};
