//! Pipeline configuration, read from TOML.
//!
//! ```toml
//! dataset = "survey.csv"
//! output_dir = "build"
//!
//! [split]
//! ratio = 0.8
//! seed = 10
//!
//! [models.knn]
//! k = 3
//! ```
//!
//! Relative paths resolve against the directory holding the config file.

use std::fs;
use std::path::{Path, PathBuf};

use careerpath_core::corpus::MasterFieldTaxonomy;
use careerpath_core::model::{ModelKind, ModelParams};
use careerpath_core::textprep::StopWordList;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{AppError, AppResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub dataset: PathBuf,
    /// Bundled taxonomy when absent.
    #[serde(default)]
    pub taxonomy: Option<PathBuf>,
    /// Bundled English list when absent.
    #[serde(default)]
    pub stopwords: Option<PathBuf>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default = "default_drop_threshold")]
    pub drop_threshold: f64,
    #[serde(default)]
    pub split: SplitConfig,
    #[serde(default)]
    pub survey: SurveyFormat,
    /// Kinds trained by `train`; all eight when empty.
    #[serde(default)]
    pub kinds: Vec<ModelKind>,
    #[serde(default)]
    pub models: ModelParams,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("build")
}

fn default_drop_threshold() -> f64 {
    0.05
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitConfig {
    pub ratio: f64,
    pub seed: u64,
}

impl Default for SplitConfig {
    fn default() -> Self {
        Self {
            ratio: 0.8,
            seed: 10,
        }
    }
}

/// Delimiter and header names of the survey file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SurveyFormat {
    pub delimiter: char,
    pub columns: ColumnMap,
}

impl Default for SurveyFormat {
    fn default() -> Self {
        Self {
            delimiter: ',',
            columns: ColumnMap::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ColumnMap {
    pub semester: String,
    pub interest_field: String,
    pub research_field: String,
    pub higher_study_field: String,
    pub core_courses: String,
    pub skills: String,
    pub engaged: String,
    pub contribution_field: String,
}

impl Default for ColumnMap {
    fn default() -> Self {
        Self {
            semester: "semester".into(),
            interest_field: "interest_field".into(),
            research_field: "research_field".into(),
            higher_study_field: "higher_study_field".into(),
            core_courses: "core_courses".into(),
            skills: "skills".into(),
            engaged: "engaged".into(),
            contribution_field: "contribution_field".into(),
        }
    }
}

impl PipelineConfig {
    /// Config with every default, reading `dataset`.
    pub fn with_dataset(dataset: impl Into<PathBuf>) -> Self {
        Self {
            dataset: dataset.into(),
            taxonomy: None,
            stopwords: None,
            output_dir: default_output_dir(),
            drop_threshold: default_drop_threshold(),
            split: SplitConfig::default(),
            survey: SurveyFormat::default(),
            kinds: Vec::new(),
            models: ModelParams::default(),
        }
    }

    /// Parse, resolve relative paths against the file's directory, and validate.
    pub fn load(path: &Path) -> AppResult<Self> {
        let text = fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
        let mut cfg: PipelineConfig = toml::from_str(&text).map_err(|e| AppError::Config {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve_against(base);
        cfg.validate().map_err(|message| AppError::Config {
            path: path.to_path_buf(),
            message,
        })?;
        Ok(cfg)
    }

    pub fn resolve_against(&mut self, base: &Path) {
        let join = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        join(&mut self.dataset);
        join(&mut self.output_dir);
        if let Some(p) = self.taxonomy.as_mut() {
            join(p);
        }
        if let Some(p) = self.stopwords.as_mut() {
            join(p);
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        for (what, p) in [
            ("dataset", Some(&self.dataset)),
            ("taxonomy", self.taxonomy.as_ref()),
            ("stopwords", self.stopwords.as_ref()),
        ] {
            if let Some(p) = p {
                if !p.is_file() {
                    return Err(format!("{what} file {} does not exist", p.display()));
                }
            }
        }
        if !(self.split.ratio > 0.0 && self.split.ratio < 1.0) {
            return Err(format!(
                "split.ratio must lie in (0, 1), got {}",
                self.split.ratio
            ));
        }
        if !(0.0..=1.0).contains(&self.drop_threshold) {
            return Err(format!(
                "drop_threshold must lie in [0, 1], got {}",
                self.drop_threshold
            ));
        }
        if !self.survey.delimiter.is_ascii() {
            return Err(format!(
                "survey.delimiter must be one ASCII character, got {:?}",
                self.survey.delimiter
            ));
        }
        self.models
            .training
            .validate()
            .map_err(|e| format!("models.training: {e}"))?;
        self.models
            .mlp
            .validate()
            .map_err(|e| format!("models.mlp: {e}"))?;
        if self.models.knn.k == 0 {
            return Err("models.knn.k must be at least 1".into());
        }
        Ok(())
    }

    pub fn kinds(&self) -> Vec<ModelKind> {
        if self.kinds.is_empty() {
            ModelKind::ALL.to_vec()
        } else {
            let mut k = self.kinds.clone();
            k.sort();
            k.dedup();
            k
        }
    }

    pub fn load_taxonomy(&self) -> AppResult<MasterFieldTaxonomy> {
        match &self.taxonomy {
            None => Ok(MasterFieldTaxonomy::bundled()),
            Some(p) => {
                let text = fs::read_to_string(p).map_err(|e| AppError::io(p, e))?;
                MasterFieldTaxonomy::parse(&text)
                    .map_err(|e| AppError::core(p.display().to_string(), e))
            }
        }
    }

    pub fn load_stopwords(&self) -> AppResult<StopWordList> {
        match &self.stopwords {
            None => Ok(StopWordList::bundled()),
            Some(p) => {
                let text = fs::read_to_string(p).map_err(|e| AppError::io(p, e))?;
                StopWordList::parse(&text).map_err(|e| AppError::core(p.display().to_string(), e))
            }
        }
    }

    /// SHA-256 over every setting that shapes a trained model. Paths are left out
    /// so a moved checkout keeps its hash; file contents enter through the dataset
    /// fingerprint and the taxonomy / stop-word lists folded in here.
    pub fn hash(&self, taxonomy: &MasterFieldTaxonomy, stops: &StopWordList) -> String {
        #[derive(Serialize)]
        struct Hashed<'a> {
            drop_threshold: f64,
            split: SplitConfig,
            survey: &'a SurveyFormat,
            models: &'a ModelParams,
            taxonomy: &'a MasterFieldTaxonomy,
            stopwords: &'a StopWordList,
        }
        let body = serde_json::to_vec(&Hashed {
            drop_threshold: self.drop_threshold,
            split: self.split,
            survey: &self.survey,
            models: &self.models,
            taxonomy,
            stopwords: stops,
        })
        .expect("config serializes");
        hex::encode(Sha256::digest(&body))
    }
}
