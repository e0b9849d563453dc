use alloc::format;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkit::argmax_tiebreak;
use crate::textprep::CountVector;

/// Count vectors with integer labels in `0..classes`, all of one dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    vectors: Vec<CountVector>,
    labels: Vec<usize>,
    classes: usize,
    dimension: usize,
}

impl Dataset {
    pub fn new(vectors: Vec<CountVector>, labels: Vec<usize>, classes: usize) -> Result<Self> {
        if vectors.len() != labels.len() {
            return Err(Error::Shape {
                context: "dataset labels",
                expected: vectors.len(),
                found: labels.len(),
            });
        }
        let dimension = vectors.first().map_or(0, CountVector::dimension);
        if let Some(v) = vectors.iter().find(|v| v.dimension() != dimension) {
            return Err(Error::Shape {
                context: "dataset vector dimension",
                expected: dimension,
                found: v.dimension(),
            });
        }
        if let Some(&y) = labels.iter().find(|&&y| y >= classes) {
            return Err(Error::InvalidInput(format!(
                "label {y} out of range for {classes} classes"
            )));
        }
        Ok(Self {
            vectors,
            labels,
            classes,
            dimension,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn vectors(&self) -> &[CountVector] {
        &self.vectors
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Rows at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            vectors: indices.iter().map(|&i| self.vectors[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            classes: self.classes,
            dimension: self.dimension,
        }
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = alloc::vec![0; self.classes];
        for &y in &self.labels {
            counts[y] += 1;
        }
        counts
    }

    pub(crate) fn require_non_empty(&self, what: &'static str) -> Result<()> {
        if self.is_empty() {
            Err(Error::Training(format!("{what}: empty training set")))
        } else {
            Ok(())
        }
    }
}

/// A class distribution and its argmax.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub label: usize,
    pub distribution: Vec<f64>,
}

impl Prediction {
    pub fn from_distribution(distribution: Vec<f64>) -> Self {
        Self {
            label: argmax_tiebreak(&distribution),
            distribution,
        }
    }
}

pub(crate) fn check_dimension(expected: usize, x: &CountVector) -> Result<()> {
    if x.dimension() != expected {
        return Err(Error::Shape {
            context: "input vector dimension",
            expected,
            found: x.dimension(),
        });
    }
    Ok(())
}
