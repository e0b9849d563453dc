use alloc::string::String;

use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("shape mismatch in {context}: expected {expected}, found {found}")]
    Shape {
        context: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("empty input: {0}")]
    EmptyInput(&'static str),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("field {0:?} is not covered by the master-field taxonomy")]
    UnmappedField(String),
    #[error("taxonomy line {line}: {message}")]
    TaxonomySyntax { line: usize, message: String },
    #[error("taxonomy is invalid: {0}")]
    Taxonomy(String),
    #[error("every row was dropped during cleaning")]
    EmptyDataset,
    #[error("vocabulary is empty: every document normalized to zero tokens")]
    EmptyVocabulary,
    #[error("unknown label {0:?}")]
    UnknownLabel(String),
    #[error("unknown label code {0}")]
    UnknownCode(usize),
    #[error("cannot stratify: class {class} has {count} member(s), need at least 2")]
    Stratification { class: usize, count: usize },
    #[error("training failed: {0}")]
    Training(String),
    #[error("{model} diverged at {stage} {step} (non-finite loss); try a smaller learning rate")]
    Divergence {
        model: &'static str,
        stage: &'static str,
        step: usize,
    },
    #[error("finite-difference oracle produced a non-finite value at coordinate {0}")]
    Oracle(usize),
    #[error("metric is undefined for an empty evaluation")]
    UndefinedMetric,
}
