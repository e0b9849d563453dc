//! Model artifact files.
//!
//! ```text
//! careerpath-artifact v1 sha256=<hex digest of everything after this line>
//! { ...pretty-printed JSON payload... }
//! ```
//!
//! Floats are written in shortest round-trip form and parsed with correct
//! rounding, so a load/save cycle reproduces every weight and every byte.

use std::fs;
use std::path::Path;

use careerpath_core::model::{ModelKind, TrainedModel};
use careerpath_core::textprep::{
    normalize, vectorize, CountVector, LabelEncoder, StopWordList, Vocabulary,
};
use careerpath_core::Prediction;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{AppError, AppResult};

pub const FORMAT_VERSION: u32 = 1;
const MAGIC: &str = "careerpath-artifact";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArtifactMetadata {
    pub split_seed: u64,
    pub split_ratio_permille: u32,
    /// Seed of weight initialization and batch order (neural) or of the LR start point.
    pub training_seed: u64,
    pub config_hash: String,
    pub dataset_fingerprint: String,
    pub train_documents: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelArtifact {
    pub format_version: u32,
    pub labels: LabelEncoder,
    pub vocabulary: Vocabulary,
    pub stopwords: StopWordList,
    pub metadata: ArtifactMetadata,
    pub model: TrainedModel,
}

impl ModelArtifact {
    pub fn new(
        model: TrainedModel,
        vocabulary: Vocabulary,
        stopwords: StopWordList,
        metadata: ArtifactMetadata,
    ) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            labels: LabelEncoder,
            vocabulary,
            stopwords,
            metadata,
            model,
        }
    }

    pub fn kind(&self) -> ModelKind {
        self.model.kind()
    }

    /// Normalized tokens of `text` and their count vector in the frozen vocabulary.
    pub fn featurize(&self, text: &str) -> (Vec<String>, CountVector) {
        let tokens = normalize(text, &self.stopwords);
        let x = vectorize(&tokens, &self.vocabulary);
        (tokens, x)
    }

    pub fn predict_text(&self, text: &str) -> AppResult<Prediction> {
        let (_, x) = self.featurize(text);
        self.predict(&x)
    }

    pub fn predict(&self, x: &CountVector) -> AppResult<Prediction> {
        self.model
            .predict(x)
            .map_err(|e| AppError::core(format!("{} prediction", self.kind()), e))
    }

    pub fn to_text(&self) -> String {
        let payload = serde_json::to_string_pretty(self).expect("artifact payload serializes");
        let mut out = header(&digest(&payload));
        out.push_str(&payload);
        out.push('\n');
        out
    }

    pub fn from_text(path: &Path, text: &str) -> AppResult<Self> {
        let payload_err = |message: String| AppError::ArtifactPayload {
            path: path.to_path_buf(),
            message,
        };
        let (head, payload) = text
            .split_once('\n')
            .ok_or_else(|| payload_err("missing header line".into()))?;
        let mut fields = head.split(' ');
        if fields.next() != Some(MAGIC) {
            return Err(payload_err(format!("not a {MAGIC} file")));
        }
        let version = fields.next().unwrap_or("");
        if version != format!("v{FORMAT_VERSION}") {
            return Err(AppError::ArtifactVersion {
                path: path.to_path_buf(),
                found: version.to_string(),
                supported: FORMAT_VERSION,
            });
        }
        let expected = fields
            .next()
            .and_then(|f| f.strip_prefix("sha256="))
            .ok_or_else(|| payload_err("header lacks sha256=".into()))?;
        let payload = payload.strip_suffix('\n').unwrap_or(payload);
        let actual = digest(payload);
        if actual != expected {
            return Err(AppError::ArtifactChecksum {
                path: path.to_path_buf(),
                expected: expected.to_string(),
                actual,
            });
        }
        let artifact: ModelArtifact =
            serde_json::from_str(payload).map_err(|e| payload_err(e.to_string()))?;
        if artifact.format_version != FORMAT_VERSION {
            return Err(AppError::ArtifactVersion {
                path: path.to_path_buf(),
                found: format!("payload v{}", artifact.format_version),
                supported: FORMAT_VERSION,
            });
        }
        artifact
            .check_shapes()
            .map_err(|message| AppError::ArtifactShape {
                path: path.to_path_buf(),
                message,
            })?;
        Ok(artifact)
    }

    fn check_shapes(&self) -> Result<(), String> {
        self.model.validate().map_err(|e| e.to_string())?;
        if self.model.dimension() != self.vocabulary.len() {
            return Err(format!(
                "model expects {} features but the vocabulary has {} tokens",
                self.model.dimension(),
                self.vocabulary.len()
            ));
        }
        if self.model.classes() != self.labels.num_classes() {
            return Err(format!(
                "model has {} classes but the label table has {}",
                self.model.classes(),
                self.labels.num_classes()
            ));
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> AppResult<()> {
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir).map_err(|e| AppError::io(dir, e))?;
        }
        fs::write(path, self.to_text()).map_err(|e| AppError::io(path, e))
    }

    pub fn load(path: &Path) -> AppResult<Self> {
        let text = fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
        Self::from_text(path, &text)
    }
}

fn header(digest: &str) -> String {
    format!("{MAGIC} v{FORMAT_VERSION} sha256={digest}\n")
}

fn digest(payload: &str) -> String {
    hex::encode(Sha256::digest(payload.as_bytes()))
}
