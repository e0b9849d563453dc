use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::dataset::{check_dimension, Dataset, Prediction};
use crate::error::{Error, Result};
use crate::numkit::{exp, ln, sigmoid, DenseMatrix};
use crate::textprep::CountVector;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SvmParams {
    /// Initial step; step `t` uses `learning_rate / (1 + learning_rate·λ·t)`.
    pub learning_rate: f64,
    pub epochs: usize,
    pub lambda: f64,
}

impl Default for SvmParams {
    fn default() -> Self {
        Self {
            learning_rate: 0.1,
            epochs: 100,
            lambda: 1e-3,
        }
    }
}

/// `P(positive | score) = sigmoid(a·score + b)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlattScaling {
    pub a: f64,
    pub b: f64,
}

impl PlattScaling {
    pub fn probability(&self, score: f64) -> f64 {
        sigmoid(self.a * score + self.b)
    }

    /// Newton's method with backtracking on the logistic loss, using the smoothed
    /// targets `(n₊+1)/(n₊+2)` and `1/(n₋+2)` so separable scores still give a
    /// finite slope.
    pub fn fit(scores: &[f64], positive: &[bool]) -> Self {
        let n_pos = positive.iter().filter(|&&p| p).count() as f64;
        let n_neg = positive.len() as f64 - n_pos;
        let hi = (n_pos + 1.0) / (n_pos + 2.0);
        let lo = 1.0 / (n_neg + 2.0);
        let targets: Vec<f64> = positive.iter().map(|&p| if p { hi } else { lo }).collect();
        // Works with the negated form 1 / (1 + exp(A·s + B)) and flips signs at the end.
        let objective = |a: f64, b: f64| -> f64 {
            scores
                .iter()
                .zip(&targets)
                .map(|(&s, &t)| {
                    let f = a * s + b;
                    if f >= 0.0 {
                        t * f + ln(1.0 + exp(-f))
                    } else {
                        (t - 1.0) * f + ln(1.0 + exp(f))
                    }
                })
                .sum()
        };
        let (mut a, mut b) = (0.0, ln((n_neg + 1.0) / (n_pos + 1.0)));
        let mut value = objective(a, b);
        for _ in 0..100 {
            let (mut h11, mut h22, mut h21, mut g1, mut g2) = (1e-12, 1e-12, 0.0, 0.0, 0.0);
            for (&s, &t) in scores.iter().zip(&targets) {
                let f = a * s + b;
                let (p, q) = if f >= 0.0 {
                    let e = exp(-f);
                    (e / (1.0 + e), 1.0 / (1.0 + e))
                } else {
                    let e = exp(f);
                    (1.0 / (1.0 + e), e / (1.0 + e))
                };
                let d2 = p * q;
                h11 += s * s * d2;
                h22 += d2;
                h21 += s * d2;
                let d1 = t - p;
                g1 += s * d1;
                g2 += d1;
            }
            if g1.abs() < 1e-5 && g2.abs() < 1e-5 {
                break;
            }
            let det = h11 * h22 - h21 * h21;
            let da = -(h22 * g1 - h21 * g2) / det;
            let db = -(-h21 * g1 + h11 * g2) / det;
            let gd = g1 * da + g2 * db;
            let mut step = 1.0;
            while step >= 1e-10 {
                let (na, nb) = (a + step * da, b + step * db);
                let nv = objective(na, nb);
                if nv < value + 1e-4 * step * gd {
                    a = na;
                    b = nb;
                    value = nv;
                    break;
                }
                step /= 2.0;
            }
            if step < 1e-10 {
                break;
            }
        }
        Self { a: -a, b: -b }
    }
}

/// `mean max(0, 1 − y(w·x + b)) + λ/2 ‖w‖²` for labels `y ∈ {−1, +1}`.
pub fn binary_hinge_objective(
    w: &[f64],
    b: f64,
    xs: &[CountVector],
    ys: &[f64],
    lambda: f64,
) -> f64 {
    let hinge: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, &y)| (1.0 - y * (sparse_dot(w, x) + b)).max(0.0))
        .sum();
    let reg: f64 = w.iter().map(|v| v * v).sum();
    hinge / xs.len() as f64 + 0.5 * lambda * reg
}

/// Subgradient of [`binary_hinge_objective`]; at margin exactly 1 the hinge term
/// contributes zero.
pub fn binary_hinge_gradient(
    w: &[f64],
    b: f64,
    xs: &[CountVector],
    ys: &[f64],
    lambda: f64,
) -> (Vec<f64>, f64) {
    let n = xs.len() as f64;
    let mut gw: Vec<f64> = w.iter().map(|v| lambda * v).collect();
    let mut gb = 0.0;
    for (x, &y) in xs.iter().zip(ys) {
        if y * (sparse_dot(w, x) + b) < 1.0 {
            for &(j, c) in x.entries() {
                gw[j] -= y * f64::from(c) / n;
            }
            gb -= y / n;
        }
    }
    (gw, gb)
}

fn sparse_dot(w: &[f64], x: &CountVector) -> f64 {
    x.entries().iter().map(|&(j, c)| w[j] * f64::from(c)).sum()
}

/// One-vs-rest linear SVM with per-class sigmoid calibration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearSvmModel {
    /// classes × features
    weights: DenseMatrix,
    bias: Vec<f64>,
    calibration: Vec<PlattScaling>,
    lambda: f64,
}

impl LinearSvmModel {
    pub fn from_parts(
        weights: DenseMatrix,
        bias: Vec<f64>,
        calibration: Vec<PlattScaling>,
        lambda: f64,
    ) -> Result<Self> {
        for (what, len) in [
            ("svm bias", bias.len()),
            ("svm calibration", calibration.len()),
        ] {
            if len != weights.rows() {
                return Err(Error::Shape {
                    context: what,
                    expected: weights.rows(),
                    found: len,
                });
            }
        }
        Ok(Self {
            weights,
            bias,
            calibration,
            lambda,
        })
    }

    pub fn train(data: &Dataset, params: &SvmParams) -> Result<Self> {
        Self::train_traced(data, params).map(|(m, _)| m)
    }

    /// Also returns, per class, the objective before training and after each epoch.
    /// Each binary problem keeps the iterate with the lowest recorded objective.
    pub fn train_traced(data: &Dataset, params: &SvmParams) -> Result<(Self, Vec<Vec<f64>>)> {
        data.require_non_empty("svm")?;
        if data.class_counts().iter().filter(|&&n| n > 0).count() < 2 {
            return Err(Error::Training(
                "svm: training labels contain a single class".into(),
            ));
        }
        if !(params.learning_rate > 0.0 && params.learning_rate.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "learning_rate must be positive, got {}",
                params.learning_rate
            )));
        }
        if !(params.lambda > 0.0 && params.lambda.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "lambda must be positive, got {}",
                params.lambda
            )));
        }
        let (classes, dim) = (data.classes(), data.dimension());
        let mut weights = DenseMatrix::zeros(classes, dim);
        let mut bias = vec![0.0; classes];
        let mut calibration = Vec::with_capacity(classes);
        let mut traces = Vec::with_capacity(classes);
        for k in 0..classes {
            let ys: Vec<f64> = data
                .labels()
                .iter()
                .map(|&y| if y == k { 1.0 } else { -1.0 })
                .collect();
            let (w, b, trace) = fit_binary(data.vectors(), &ys, params)?;
            weights.row_mut(k).copy_from_slice(&w);
            bias[k] = b;
            let scores: Vec<f64> = data
                .vectors()
                .iter()
                .map(|x| sparse_dot(&w, x) + b)
                .collect();
            let positive: Vec<bool> = ys.iter().map(|&y| y > 0.0).collect();
            calibration.push(PlattScaling::fit(&scores, &positive));
            traces.push(trace);
        }
        Ok((
            Self {
                weights,
                bias,
                calibration,
                lambda: params.lambda,
            },
            traces,
        ))
    }

    pub fn weights(&self) -> &DenseMatrix {
        &self.weights
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn calibration(&self) -> &[PlattScaling] {
        &self.calibration
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn validate(&self) -> Result<()> {
        let c = self.weights.rows();
        self.weights
            .check_shape("svm weights", c, self.weights.cols())?;
        crate::numkit::check_len("svm bias", c, &self.bias)?;
        if self.calibration.len() != c {
            return Err(Error::Shape {
                context: "svm calibration",
                expected: c,
                found: self.calibration.len(),
            });
        }
        if self
            .calibration
            .iter()
            .any(|p| !(p.a.is_finite() && p.b.is_finite()))
        {
            return Err(Error::InvalidInput("svm calibration is not finite".into()));
        }
        Ok(())
    }

    pub fn classes(&self) -> usize {
        self.weights.rows()
    }

    pub fn dimension(&self) -> usize {
        self.weights.cols()
    }

    pub fn decision_scores(&self, x: &CountVector) -> Result<Vec<f64>> {
        check_dimension(self.dimension(), x)?;
        Ok((0..self.classes())
            .map(|k| sparse_dot(self.weights.row(k), x) + self.bias[k])
            .collect())
    }

    /// Calibrated per-class probabilities, renormalized to sum to one.
    pub fn predict(&self, x: &CountVector) -> Result<Prediction> {
        let scores = self.decision_scores(x)?;
        let raw: Vec<f64> = scores
            .iter()
            .zip(&self.calibration)
            .map(|(&s, c)| c.probability(s))
            .collect();
        let total: f64 = raw.iter().sum();
        let dist = if total > 0.0 {
            raw.iter().map(|p| p / total).collect()
        } else {
            vec![1.0 / raw.len() as f64; raw.len()]
        };
        Ok(Prediction::from_distribution(dist))
    }
}

/// Per-sample subgradient steps in training order. The weight vector is held as
/// `scale · v` so the shrink from the regularizer costs O(1) per step.
fn fit_binary(
    xs: &[CountVector],
    ys: &[f64],
    params: &SvmParams,
) -> Result<(Vec<f64>, f64, Vec<f64>)> {
    let dim = xs.first().map_or(0, CountVector::dimension);
    let mut v = vec![0.0; dim];
    let mut scale = 1.0;
    let mut b = 0.0;
    let mut t = 0.0;
    let weights = |v: &[f64], scale: f64| -> Vec<f64> { v.iter().map(|x| x * scale).collect() };
    let mut trace = vec![binary_hinge_objective(&v, b, xs, ys, params.lambda)];
    let mut best = (trace[0], v.clone(), b);
    for epoch in 0..params.epochs {
        for (x, &y) in xs.iter().zip(ys) {
            let eta = params.learning_rate / (1.0 + params.learning_rate * params.lambda * t);
            t += 1.0;
            let margin = y * (scale * sparse_dot(&v, x) + b);
            scale *= 1.0 - eta * params.lambda;
            if margin < 1.0 {
                for &(j, c) in x.entries() {
                    v[j] += eta * y * f64::from(c) / scale;
                }
                b += eta * y;
            }
            if scale < 1e-9 {
                v.iter_mut().for_each(|x| *x *= scale);
                scale = 1.0;
            }
        }
        let w = weights(&v, scale);
        let value = binary_hinge_objective(&w, b, xs, ys, params.lambda);
        if !value.is_finite() {
            return Err(Error::Divergence {
                model: "SVM",
                stage: "epoch",
                step: epoch,
            });
        }
        trace.push(value);
        if value < best.0 {
            best = (value, w, b);
        }
    }
    Ok((best.1, best.2, trace))
}
