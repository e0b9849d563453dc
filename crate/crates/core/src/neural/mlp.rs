use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::layers::{
    affine, affine_backward, glorot_uniform, he_uniform, maybe_dropout, relu_in_place,
    softmax_xent_grad,
};
use super::Network;
use crate::error::{Error, Result};
use crate::numkit::{DenseMatrix, SeededRng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MlpConfig {
    pub hidden: Vec<usize>,
    /// Applied after each hidden layer; same length as `hidden`.
    pub dropout: Vec<f64>,
}

impl Default for MlpConfig {
    fn default() -> Self {
        Self {
            hidden: vec![256, 128, 64, 32],
            dropout: vec![0.3; 4],
        }
    }
}

impl MlpConfig {
    pub fn validate(&self) -> Result<()> {
        if self.hidden.is_empty() || self.hidden.contains(&0) {
            return Err(Error::InvalidParameter(format!(
                "mlp hidden sizes must be positive, got {:?}",
                self.hidden
            )));
        }
        if self.dropout.len() != self.hidden.len() {
            return Err(Error::Shape {
                context: "mlp dropout rates",
                expected: self.hidden.len(),
                found: self.dropout.len(),
            });
        }
        check_rates(&self.dropout)
    }
}

pub(crate) fn check_rates(rates: &[f64]) -> Result<()> {
    match rates.iter().find(|r| !(0.0..1.0).contains(*r)) {
        Some(r) => Err(Error::InvalidParameter(format!(
            "dropout rate must lie in [0, 1), got {r}"
        ))),
        None => Ok(()),
    }
}

/// ReLU hidden layers, softmax output. Parameters are stored as
/// `[W₁, b₁, …, W_out, b_out]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    dropout: Vec<f64>,
    params: Vec<DenseMatrix>,
}

impl MlpModel {
    pub fn new(
        input_dim: usize,
        classes: usize,
        config: &MlpConfig,
        rng: &mut SeededRng,
    ) -> Result<Self> {
        config.validate()?;
        let mut params = Vec::new();
        let mut fan_in = input_dim;
        for &h in &config.hidden {
            params.push(he_uniform(h, fan_in, rng));
            params.push(DenseMatrix::zeros(1, h));
            fan_in = h;
        }
        params.push(glorot_uniform(classes, fan_in, rng));
        params.push(DenseMatrix::zeros(1, classes));
        Ok(Self {
            dropout: config.dropout.clone(),
            params,
        })
    }

    /// Layer shapes chain from the input to the output and dropout rates match the layers.
    pub fn validate(&self) -> Result<()> {
        let n = self.params.len();
        if n < 2 || n % 2 != 0 {
            return Err(Error::InvalidInput(format!("mlp has {n} parameter blocks")));
        }
        if self.dropout.len() != n / 2 - 1 {
            return Err(Error::Shape {
                context: "mlp dropout rates",
                expected: n / 2 - 1,
                found: self.dropout.len(),
            });
        }
        check_rates(&self.dropout)?;
        let mut fan_in = self.params[0].cols();
        for pair in self.params.chunks_exact(2) {
            let out = pair[0].rows();
            pair[0].check_shape("mlp weights", out, fan_in)?;
            pair[1].check_shape("mlp bias", 1, out)?;
            fan_in = out;
        }
        Ok(())
    }

    pub fn dropout(&self) -> &[f64] {
        &self.dropout
    }

    fn layers(&self) -> usize {
        self.params.len() / 2
    }
}

impl Network for MlpModel {
    fn input_dim(&self) -> usize {
        self.params[0].cols()
    }

    fn classes(&self) -> usize {
        self.params[self.params.len() - 1].cols()
    }

    fn params(&self) -> &[DenseMatrix] {
        &self.params
    }

    fn params_mut(&mut self) -> &mut [DenseMatrix] {
        &mut self.params
    }

    fn logits(&self, x: &[f64], mut dropout: Option<&mut SeededRng>) -> Vec<f64> {
        let mut a = x.to_vec();
        for l in 0..self.layers() {
            a = affine(&self.params[2 * l], &self.params[2 * l + 1], &a);
            if l + 1 < self.layers() {
                relu_in_place(&mut a);
                maybe_dropout(&mut a, self.dropout[l], dropout.as_deref_mut());
            }
        }
        a
    }

    fn accumulate_gradient(
        &self,
        x: &[f64],
        y: usize,
        mut dropout: Option<&mut SeededRng>,
        grads: &mut [DenseMatrix],
    ) -> f64 {
        let layers = self.layers();
        // inputs[l] feeds layer l; pre[l] is its pre-activation; masks[l] its dropout.
        let mut inputs = vec![x.to_vec()];
        let mut pre = Vec::with_capacity(layers);
        let mut masks = Vec::with_capacity(layers);
        for l in 0..layers {
            let z = affine(&self.params[2 * l], &self.params[2 * l + 1], &inputs[l]);
            if l + 1 < layers {
                let mut a = z.clone();
                relu_in_place(&mut a);
                masks.push(maybe_dropout(
                    &mut a,
                    self.dropout[l],
                    dropout.as_deref_mut(),
                ));
                inputs.push(a);
            }
            pre.push(z);
        }
        let (mut dz, loss) = softmax_xent_grad(&pre[layers - 1], y);
        for l in (0..layers).rev() {
            let (gw, rest) = grads[2 * l..].split_at_mut(1);
            let da = affine_backward(
                &self.params[2 * l],
                &inputs[l],
                &dz,
                &mut gw[0],
                &mut rest[0],
                l > 0,
            );
            if let Some(mut da) = da {
                if let Some(m) = &masks[l - 1] {
                    da.iter_mut().zip(m).for_each(|(d, m)| *d *= m);
                }
                da.iter_mut().zip(&pre[l - 1]).for_each(|(d, &z)| {
                    if z <= 0.0 {
                        *d = 0.0;
                    }
                });
                dz = da;
            }
        }
        loss
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neural::{gradient_check, randomize_params, GRADIENT_CHECK_FLOOR};

    fn small(rates: f64) -> (MlpModel, MlpConfig) {
        let cfg = MlpConfig {
            hidden: vec![7, 6, 5, 4],
            dropout: vec![rates; 4],
        };
        (
            MlpModel::new(6, 3, &cfg, &mut SeededRng::new(4)).unwrap(),
            cfg,
        )
    }

    #[test]
    fn gradients_match_finite_differences() {
        let (mut m, _) = small(0.3);
        let mut rng = SeededRng::new(8);
        for _ in 0..5 {
            randomize_params(&mut m, 0.5, &mut rng);
            let x: Vec<f64> = (0..6).map(|_| rng.uniform(-2.0, 2.0)).collect();
            let y = rng.below(3) as usize;
            let err = gradient_check(&m, &x, y, 1e-5).unwrap();
            assert!(
                err < 1e-4,
                "relative error {err} (floor {GRADIENT_CHECK_FLOOR})"
            );
        }
    }

    #[test]
    fn zero_output_layer_gives_uniform() {
        let (mut m, _) = small(0.0);
        let n = m.params().len();
        m.params_mut()[n - 2].fill(0.0);
        let p = m.forward(&[1.0, 0.0, 2.0, 0.0, 0.0, 3.0]);
        assert!(p.iter().all(|&v| (v - 1.0 / 3.0).abs() < 1e-15));
    }

    #[test]
    fn zero_dropout_training_mode_equals_inference() {
        let (m, _) = small(0.0);
        let x = [0.3, 1.0, 0.0, 2.0, 1.5, 0.0];
        let mut rng = SeededRng::new(2);
        assert_eq!(m.logits(&x, Some(&mut rng)), m.logits(&x, None));
    }

    #[test]
    fn config_validation() {
        let bad = MlpConfig {
            hidden: vec![4],
            dropout: vec![1.0],
        };
        assert!(MlpModel::new(3, 2, &bad, &mut SeededRng::new(0)).is_err());
        let bad = MlpConfig {
            hidden: vec![4, 2],
            dropout: vec![0.1],
        };
        assert!(bad.validate().is_err());
    }
}
