use alloc::format;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::dataset::{check_dimension, Dataset, Prediction};
use crate::error::{Error, Result};
use crate::numkit::{exp, ln, log_sum_exp, DenseMatrix};
use crate::textprep::CountVector;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NbParams {
    pub alpha: f64,
}

impl Default for NbParams {
    fn default() -> Self {
        Self { alpha: 1.0 }
    }
}

/// Multinomial naive Bayes with additive smoothing, kept in log space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultinomialNbModel {
    alpha: f64,
    log_prior: Vec<f64>,
    /// classes × features
    log_likelihood: DenseMatrix,
}

impl MultinomialNbModel {
    /// Every class needs at least one training document, otherwise its prior is
    /// log 0 and the model cannot be stored as finite numbers.
    pub fn train(data: &Dataset, params: &NbParams) -> Result<Self> {
        data.require_non_empty("naive bayes")?;
        if !(params.alpha > 0.0 && params.alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "alpha must be positive, got {}",
                params.alpha
            )));
        }
        let (c, d) = (data.classes(), data.dimension());
        let docs = data.class_counts();
        if let Some(empty) = docs.iter().position(|&n| n == 0) {
            return Err(Error::Training(format!(
                "naive bayes: class {empty} has no training documents"
            )));
        }
        let mut counts = DenseMatrix::zeros(c, d);
        for (x, &y) in data.vectors().iter().zip(data.labels()) {
            let row = counts.row_mut(y);
            for &(j, n) in x.entries() {
                row[j] += f64::from(n);
            }
        }
        let n = data.len() as f64;
        let log_prior = docs.iter().map(|&k| ln(k as f64 / n)).collect();
        let mut log_likelihood = DenseMatrix::zeros(c, d);
        for k in 0..c {
            let total: f64 = counts.row(k).iter().sum();
            let denom = ln(total + params.alpha * d as f64);
            for (out, &cnt) in log_likelihood.row_mut(k).iter_mut().zip(counts.row(k)) {
                *out = ln(cnt + params.alpha) - denom;
            }
        }
        Ok(Self {
            alpha: params.alpha,
            log_prior,
            log_likelihood,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn log_prior(&self) -> &[f64] {
        &self.log_prior
    }

    pub fn log_likelihood(&self) -> &DenseMatrix {
        &self.log_likelihood
    }

    pub fn validate(&self) -> Result<()> {
        let c = self.log_prior.len();
        self.log_likelihood
            .check_shape("nb log likelihood", c, self.log_likelihood.cols())?;
        crate::numkit::check_len("nb log prior", c, &self.log_prior)
    }

    pub fn classes(&self) -> usize {
        self.log_prior.len()
    }

    pub fn dimension(&self) -> usize {
        self.log_likelihood.cols()
    }

    /// Unnormalized log joint `log P(c) + Σ x_j log θ_cj` per class.
    pub fn joint_log_likelihood(&self, x: &CountVector) -> Result<Vec<f64>> {
        check_dimension(self.dimension(), x)?;
        let mut out = self.log_prior.clone();
        for (k, o) in out.iter_mut().enumerate() {
            let row = self.log_likelihood.row(k);
            for &(j, n) in x.entries() {
                *o += f64::from(n) * row[j];
            }
        }
        Ok(out)
    }

    pub fn predict(&self, x: &CountVector) -> Result<Prediction> {
        let joint = self.joint_log_likelihood(x)?;
        let z = log_sum_exp(&joint);
        let mut dist: Vec<f64> = joint.iter().map(|&j| exp(j - z)).collect();
        let s: f64 = dist.iter().sum();
        dist.iter_mut().for_each(|p| *p /= s);
        Ok(Prediction::from_distribution(dist))
    }
}
