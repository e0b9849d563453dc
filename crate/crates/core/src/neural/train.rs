use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use serde::{Deserialize, Serialize};

use super::Network;
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::numkit::{
    argmax_tiebreak, finite_difference_gradient, relative_error, DenseMatrix, SeededRng,
};
use crate::textprep::stratified_split;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainingConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub momentum: f64,
    /// Share of the training data held out, per class, for validation.
    pub validation_ratio: f64,
    pub seed: u64,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self {
            epochs: 50,
            batch_size: 8,
            learning_rate: 0.01,
            momentum: 0.9,
            validation_ratio: 0.2,
            seed: 10,
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.epochs == 0 {
            return bad("epochs must be at least 1".into());
        }
        if self.batch_size == 0 {
            return bad("batch_size must be at least 1".into());
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad(format!(
                "learning_rate must be positive, got {}",
                self.learning_rate
            ));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return bad(format!(
                "momentum must lie in [0, 1), got {}",
                self.momentum
            ));
        }
        if !(self.validation_ratio > 0.0 && self.validation_ratio < 1.0) {
            return bad(format!(
                "validation_ratio must lie in (0, 1), got {}",
                self.validation_ratio
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub train_accuracy: f64,
    pub val_loss: f64,
    pub val_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct LearningCurve {
    pub records: Vec<EpochRecord>,
}

impl LearningCurve {
    pub const CSV_HEADER: &'static str = "epoch,train_loss,train_acc,val_loss,val_acc";

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&EpochRecord> {
        self.records.last()
    }

    /// Epochs count from 1.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for r in &self.records {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                r.epoch, r.train_loss, r.train_accuracy, r.val_loss, r.val_accuracy
            );
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        if lines.next().map(str::trim) != Some(Self::CSV_HEADER) {
            return Err(Error::InvalidInput(format!(
                "learning curve must start with `{}`",
                Self::CSV_HEADER
            )));
        }
        let mut records = Vec::new();
        for (n, line) in lines.enumerate() {
            let f: Vec<&str> = line.split(',').map(str::trim).collect();
            let bad = || Error::InvalidInput(format!("learning curve row {}: `{line}`", n + 1));
            if f.len() != 5 {
                return Err(bad());
            }
            let num = |s: &str| s.parse::<f64>().map_err(|_| bad());
            records.push(EpochRecord {
                epoch: f[0].parse().map_err(|_| bad())?,
                train_loss: num(f[1])?,
                train_accuracy: num(f[2])?,
                val_loss: num(f[3])?,
                val_accuracy: num(f[4])?,
            });
        }
        Ok(Self { records })
    }
}

fn evaluate<N: Network>(net: &N, xs: &[Vec<f64>], ys: &[usize]) -> (f64, f64) {
    let mut loss = 0.0;
    let mut correct = 0usize;
    for (chunk, labels) in xs.chunks(16).zip(ys.chunks(16)) {
        let refs: Vec<&[f64]> = chunk.iter().map(Vec::as_slice).collect();
        for (z, &y) in net.logits_batch(&refs).iter().zip(labels) {
            loss += crate::numkit::log_sum_exp(z) - z[y];
            if argmax_tiebreak(z) == y {
                correct += 1;
            }
        }
    }
    let n = ys.len().max(1) as f64;
    (loss / n, correct as f64 / n)
}

/// Mini-batch momentum SGD on cross-entropy. A stratified validation share is
/// carved out of `data` first; the curve records loss and accuracy on both parts
/// after every epoch with dropout off. Shuffling and dropout draw from streams
/// derived from `config.seed`, so equal inputs give bit-identical results.
pub fn train_network<N: Network>(
    mut net: N,
    name: &'static str,
    data: &Dataset,
    config: &TrainingConfig,
) -> Result<(N, LearningCurve)> {
    config.validate()?;
    data.require_non_empty(name)?;
    if data.class_counts().iter().filter(|&&n| n > 0).count() < 2 {
        return Err(Error::Training(format!("{name}: need at least 2 classes")));
    }
    if data.dimension() != net.input_dim() {
        return Err(Error::Shape {
            context: "network input dimension",
            expected: net.input_dim(),
            found: data.dimension(),
        });
    }
    let split = stratified_split(data.labels(), 1.0 - config.validation_ratio, config.seed)?;
    let dense = |idx: &[usize]| -> (Vec<Vec<f64>>, Vec<usize>) {
        (
            idx.iter()
                .map(|&i| super::reshape_input(&data.vectors()[i]))
                .collect(),
            idx.iter().map(|&i| data.labels()[i]).collect(),
        )
    };
    let (train_x, train_y) = dense(&split.train_indices);
    let (val_x, val_y) = dense(&split.test_indices);
    if config.batch_size > train_x.len() {
        return Err(Error::InvalidParameter(format!(
            "batch_size {} exceeds the {} training examples",
            config.batch_size,
            train_x.len()
        )));
    }

    let mut master = SeededRng::new(config.seed ^ 0x5eed_0f_7a1e);
    let mut order_rng = master.fork();
    let mut dropout_rng = master.fork();
    let zeros = |net: &N| -> Vec<DenseMatrix> {
        net.params()
            .iter()
            .map(|p| DenseMatrix::zeros(p.rows(), p.cols()))
            .collect()
    };
    let mut velocity = zeros(&net);
    let mut grads = zeros(&net);
    let mut order: Vec<usize> = (0..train_x.len()).collect();
    let mut curve = LearningCurve::default();

    for epoch in 0..config.epochs {
        order_rng.shuffle(&mut order);
        for batch in order.chunks(config.batch_size) {
            grads.iter_mut().for_each(|g| g.fill(0.0));
            let xs: Vec<&[f64]> = batch.iter().map(|&i| train_x[i].as_slice()).collect();
            let ys: Vec<usize> = batch.iter().map(|&i| train_y[i]).collect();
            let batch_loss = net.accumulate_batch(&xs, &ys, Some(&mut dropout_rng), &mut grads);
            if !batch_loss.is_finite() {
                return Err(Error::Divergence {
                    model: name,
                    stage: "epoch",
                    step: epoch + 1,
                });
            }
            let scale = config.learning_rate / batch.len() as f64;
            for ((p, v), g) in net.params_mut().iter_mut().zip(&mut velocity).zip(&grads) {
                for ((p, v), g) in p
                    .as_mut_slice()
                    .iter_mut()
                    .zip(v.as_mut_slice())
                    .zip(g.as_slice())
                {
                    *v = config.momentum * *v - scale * g;
                    *p += *v;
                }
            }
        }
        let (train_loss, train_accuracy) = evaluate(&net, &train_x, &train_y);
        let (val_loss, val_accuracy) = evaluate(&net, &val_x, &val_y);
        if !train_loss.is_finite() || !val_loss.is_finite() {
            return Err(Error::Divergence {
                model: name,
                stage: "epoch",
                step: epoch + 1,
            });
        }
        curve.records.push(EpochRecord {
            epoch: epoch + 1,
            train_loss,
            train_accuracy,
            val_loss,
            val_accuracy,
        });
    }
    Ok((net, curve))
}

/// Denominator floor used by [`gradient_check`]. Central differences at
/// `eps = 1e-5` carry round-off near 1e-11, so components below this floor are
/// compared absolutely.
pub const GRADIENT_CHECK_FLOOR: f64 = 1e-6;

/// Redraws every parameter uniformly in `±scale`, biases included; used to put
/// gradient checks at generic points away from ReLU kinks.
pub fn randomize_params<N: Network>(net: &mut N, scale: f64, rng: &mut SeededRng) {
    for p in net.params_mut() {
        p.as_mut_slice()
            .iter_mut()
            .for_each(|v| *v = rng.uniform(-scale, scale));
    }
}

/// Largest relative error between backpropagated gradients and central finite
/// differences of the loss, over every parameter. Dropout is off.
pub fn gradient_check<N: Network>(net: &N, x: &[f64], y: usize, eps: f64) -> Result<f64> {
    let mut grads: Vec<DenseMatrix> = net
        .params()
        .iter()
        .map(|p| DenseMatrix::zeros(p.rows(), p.cols()))
        .collect();
    net.accumulate_gradient(x, y, None, &mut grads);
    let flat: Vec<f64> = net
        .params()
        .iter()
        .flat_map(|p| p.as_slice().iter().copied())
        .collect();
    let mut probe = net.clone();
    let numeric = finite_difference_gradient(
        |theta| {
            let mut offset = 0;
            for p in probe.params_mut() {
                let n = p.len();
                p.as_mut_slice().copy_from_slice(&theta[offset..offset + n]);
                offset += n;
            }
            probe.loss(x, y)
        },
        &flat,
        eps,
    )?;
    let analytic = grads.iter().flat_map(|g| g.as_slice().iter().copied());
    Ok(analytic
        .zip(&numeric)
        .map(|(a, &n)| relative_error(a, n, GRADIENT_CHECK_FLOOR))
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neural::{MlpConfig, MlpModel};
    use crate::textprep::CountVector;

    /// 12 documents, 3 classes, each class with its own keywords.
    pub(crate) fn memorizable() -> Dataset {
        let mut vectors = Vec::new();
        let mut labels = Vec::new();
        for class in 0..3 {
            for doc in 0..4 {
                let mut dense = [0u32; 12];
                dense[class * 4 + doc % 4] = 1;
                dense[class * 4 + (doc + 1) % 4] = 1;
                dense[class * 4 + (doc + 2) % 4] += 1;
                vectors.push(CountVector::from_dense(&dense));
                labels.push(class);
            }
        }
        Dataset::new(vectors, labels, 3).unwrap()
    }

    fn mlp(d: &Dataset, seed: u64) -> MlpModel {
        MlpModel::new(
            d.dimension(),
            d.classes(),
            &MlpConfig::default(),
            &mut SeededRng::new(seed),
        )
        .unwrap()
    }

    #[test]
    fn memorizes_small_fixture() {
        let d = memorizable();
        let (net, curve) =
            train_network(mlp(&d, 1), "MLP", &d, &TrainingConfig::default()).unwrap();
        assert_eq!(curve.len(), 50);
        let last = curve.last().unwrap();
        assert!(last.train_loss < 0.05, "{last:?}");
        for (x, &y) in d.vectors().iter().zip(d.labels()) {
            assert_eq!(net.predict(x).unwrap().label, y);
        }
    }

    #[test]
    fn deterministic_and_one_epoch() {
        let d = memorizable();
        let cfg = TrainingConfig {
            epochs: 3,
            ..Default::default()
        };
        let (a, ca) = train_network(mlp(&d, 2), "MLP", &d, &cfg).unwrap();
        let (b, cb) = train_network(mlp(&d, 2), "MLP", &d, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(ca, cb);
        let one = TrainingConfig {
            epochs: 1,
            ..Default::default()
        };
        assert_eq!(
            train_network(mlp(&d, 2), "MLP", &d, &one).unwrap().1.len(),
            1
        );
    }

    #[test]
    fn preconditions() {
        let d = memorizable();
        let big = TrainingConfig {
            batch_size: 100,
            ..Default::default()
        };
        assert!(train_network(mlp(&d, 0), "MLP", &d, &big).is_err());
        let one_class = Dataset::new(d.vectors()[..4].to_vec(), alloc::vec![0; 4], 3).unwrap();
        assert!(train_network(mlp(&d, 0), "MLP", &one_class, &TrainingConfig::default()).is_err());
        assert!(TrainingConfig {
            epochs: 0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(TrainingConfig {
            validation_ratio: 1.0,
            ..Default::default()
        }
        .validate()
        .is_err());
        let hot = TrainingConfig {
            learning_rate: 1e200,
            epochs: 5,
            ..Default::default()
        };
        assert!(matches!(
            train_network(mlp(&d, 0), "MLP", &d, &hot),
            Err(Error::Divergence { .. })
        ));
    }

    #[test]
    fn curve_csv_round_trip() {
        let curve = LearningCurve {
            records: alloc::vec![EpochRecord {
                epoch: 1,
                train_loss: 0.5,
                train_accuracy: 0.75,
                val_loss: 0.625,
                val_accuracy: 0.5
            }],
        };
        let text = curve.to_csv();
        assert!(
            text.starts_with("epoch,train_loss,train_acc,val_loss,val_acc\n1,0.5,0.75,0.625,0.5\n")
        );
        assert_eq!(LearningCurve::from_csv(&text).unwrap(), curve);
        assert!(LearningCurve::from_csv("nope").is_err());
    }
}
