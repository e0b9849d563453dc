use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::dataset::{check_dimension, Dataset, Prediction};
use crate::error::{Error, Result};
use crate::numkit::{log_sum_exp, softmax, DenseMatrix, SeededRng};
use crate::textprep::CountVector;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LrParams {
    pub learning_rate: f64,
    pub max_iters: usize,
    /// Training stops once one step lowers the loss by less than this.
    pub tolerance: f64,
    pub lambda: f64,
    pub seed: u64,
}

impl Default for LrParams {
    fn default() -> Self {
        Self {
            learning_rate: 0.05,
            max_iters: 3000,
            tolerance: 1e-7,
            lambda: 1e-4,
            seed: 10,
        }
    }
}

impl LrParams {
    /// Step size at or below which full-batch descent cannot increase the loss on
    /// `data`: `1 / (max ‖[x, 1]‖² / 2 + λ)`, the inverse of a Lipschitz bound on
    /// the loss gradient (softmax cross-entropy curvature is at most 1/2 per
    /// squared input norm).
    pub fn monotone_learning_rate(data: &Dataset, lambda: f64) -> f64 {
        let max_sq = data
            .vectors()
            .iter()
            .map(|v| {
                v.entries()
                    .iter()
                    .map(|&(_, c)| f64::from(c) * f64::from(c))
                    .sum::<f64>()
                    + 1.0
            })
            .fold(1.0, f64::max);
        1.0 / (0.5 * max_sq + lambda)
    }
}

/// Multinomial softmax regression.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticRegressionModel {
    /// classes × features
    weights: DenseMatrix,
    bias: Vec<f64>,
    seed: u64,
    lambda: f64,
    iterations: usize,
}

/// Loss and gradient of a softmax regression at fixed parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct LossGradient {
    pub loss: f64,
    pub weights: DenseMatrix,
    pub bias: Vec<f64>,
}

impl LogisticRegressionModel {
    pub fn from_parts(weights: DenseMatrix, bias: Vec<f64>, lambda: f64) -> Result<Self> {
        if bias.len() != weights.rows() {
            return Err(Error::Shape {
                context: "logistic bias",
                expected: weights.rows(),
                found: bias.len(),
            });
        }
        Ok(Self {
            weights,
            bias,
            seed: 0,
            lambda,
            iterations: 0,
        })
    }

    pub fn train(data: &Dataset, params: &LrParams) -> Result<Self> {
        Self::train_traced(data, params).map(|(m, _)| m)
    }

    /// Also returns the loss recorded before every step.
    pub fn train_traced(data: &Dataset, params: &LrParams) -> Result<(Self, Vec<f64>)> {
        data.require_non_empty("logistic regression")?;
        if !(params.learning_rate > 0.0 && params.learning_rate.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "learning_rate must be positive, got {}",
                params.learning_rate
            )));
        }
        if !(params.lambda >= 0.0 && params.lambda.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "lambda must be non-negative, got {}",
                params.lambda
            )));
        }
        let mut rng = SeededRng::new(params.seed);
        let weights = DenseMatrix::from_fn(data.classes(), data.dimension(), |_, _| {
            rng.uniform(-0.01, 0.01)
        });
        let mut model = Self {
            weights,
            bias: vec![0.0; data.classes()],
            seed: params.seed,
            lambda: params.lambda,
            iterations: 0,
        };
        let mut trace = Vec::new();
        let mut previous = f64::INFINITY;
        for step in 0..params.max_iters {
            let g = model.loss_and_gradient(data);
            if !g.loss.is_finite() {
                return Err(Error::Divergence {
                    model: "LR",
                    stage: "iteration",
                    step,
                });
            }
            trace.push(g.loss);
            if previous - g.loss < params.tolerance {
                break;
            }
            previous = g.loss;
            let lr = params.learning_rate;
            for (w, gw) in model
                .weights
                .as_mut_slice()
                .iter_mut()
                .zip(g.weights.as_slice())
            {
                *w -= lr * gw;
            }
            for (b, gb) in model.bias.iter_mut().zip(&g.bias) {
                *b -= lr * gb;
            }
            model.iterations = step + 1;
        }
        Ok((model, trace))
    }

    fn logits(&self, x: &CountVector) -> Vec<f64> {
        (0..self.weights.rows())
            .map(|k| {
                let row = self.weights.row(k);
                self.bias[k]
                    + x.entries()
                        .iter()
                        .map(|&(j, c)| f64::from(c) * row[j])
                        .sum::<f64>()
            })
            .collect()
    }

    /// Mean cross-entropy plus `λ/2 ‖W‖²` (bias unregularized), with its gradient.
    pub fn loss_and_gradient(&self, data: &Dataset) -> LossGradient {
        let n = data.len() as f64;
        let mut gw = DenseMatrix::zeros(self.weights.rows(), self.weights.cols());
        let mut gb = vec![0.0; self.bias.len()];
        let mut loss = 0.0;
        for (x, &y) in data.vectors().iter().zip(data.labels()) {
            let z = self.logits(x);
            loss += log_sum_exp(&z) - z[y];
            let mut p = softmax(&z);
            p[y] -= 1.0;
            for (k, &d) in p.iter().enumerate() {
                gb[k] += d / n;
                let row = gw.row_mut(k);
                for &(j, c) in x.entries() {
                    row[j] += d * f64::from(c) / n;
                }
            }
        }
        loss /= n;
        let mut reg = 0.0;
        for (g, &w) in gw.as_mut_slice().iter_mut().zip(self.weights.as_slice()) {
            reg += w * w;
            *g += self.lambda * w;
        }
        LossGradient {
            loss: loss + 0.5 * self.lambda * reg,
            weights: gw,
            bias: gb,
        }
    }

    pub fn weights(&self) -> &DenseMatrix {
        &self.weights
    }

    pub fn weights_mut(&mut self) -> &mut DenseMatrix {
        &mut self.weights
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn bias_mut(&mut self) -> &mut [f64] {
        &mut self.bias
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn validate(&self) -> Result<()> {
        self.weights
            .check_shape("lr weights", self.weights.rows(), self.weights.cols())?;
        crate::numkit::check_len("lr bias", self.weights.rows(), &self.bias)
    }

    pub fn classes(&self) -> usize {
        self.weights.rows()
    }

    pub fn dimension(&self) -> usize {
        self.weights.cols()
    }

    pub fn predict(&self, x: &CountVector) -> Result<Prediction> {
        check_dimension(self.dimension(), x)?;
        Ok(Prediction::from_distribution(softmax(&self.logits(x))))
    }
}
