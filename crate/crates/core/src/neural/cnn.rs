use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::layers::{
    affine, affine_backward, affine_backward_batch, affine_batch, glorot_uniform, he_uniform,
    maybe_dropout, relu_in_place, softmax_xent_grad,
};
use super::mlp::check_rates;
use super::Network;
use crate::error::{Error, Result};
use crate::numkit::{DenseMatrix, SeededRng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CnnConfig {
    pub kernel: usize,
    pub filters: usize,
    pub pool: usize,
    pub dropout: f64,
    pub dense: usize,
}

impl Default for CnnConfig {
    fn default() -> Self {
        Self {
            kernel: 3,
            filters: 16,
            pool: 2,
            dropout: 0.5,
            dense: 64,
        }
    }
}

/// Convolution (stride 1, ReLU) → max-pooling → dropout → flatten → dense (ReLU)
/// → softmax output, over a one-channel sequence.
///
/// Parameters: `[conv kernels (filters × kernel), conv bias, dense W, dense b,
/// output W, output b]`. The flattened pooled map is position-major:
/// index `u · filters + f`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CnnModel {
    input_len: usize,
    pool: usize,
    dropout: f64,
    params: Vec<DenseMatrix>,
}

struct Front {
    /// conv_len × filters, after ReLU
    conv: Vec<f64>,
    /// pooled index → position in `conv` that won the max
    argmax: Vec<usize>,
    mask: Option<Vec<f64>>,
    flat: Vec<f64>,
}

impl CnnModel {
    pub fn new(
        input_len: usize,
        classes: usize,
        config: &CnnConfig,
        rng: &mut SeededRng,
    ) -> Result<Self> {
        if config.kernel == 0 || config.filters == 0 || config.pool == 0 || config.dense == 0 {
            return Err(Error::InvalidParameter(format!(
                "cnn sizes must be positive: {config:?}"
            )));
        }
        check_rates(&[config.dropout])?;
        if input_len < config.kernel || (input_len - config.kernel + 1) / config.pool == 0 {
            return Err(Error::InvalidParameter(format!(
                "input length {input_len} too short for kernel {} and pool {}",
                config.kernel, config.pool
            )));
        }
        let pooled = (input_len - config.kernel + 1) / config.pool;
        let params = vec![
            he_uniform(config.filters, config.kernel, rng),
            DenseMatrix::zeros(1, config.filters),
            he_uniform(config.dense, pooled * config.filters, rng),
            DenseMatrix::zeros(1, config.dense),
            glorot_uniform(classes, config.dense, rng),
            DenseMatrix::zeros(1, classes),
        ];
        Ok(Self {
            input_len,
            pool: config.pool,
            dropout: config.dropout,
            params,
        })
    }

    /// Parameter shapes agree with the input length, pooling width and each other.
    pub fn validate(&self) -> Result<()> {
        if self.params.len() != 6 {
            return Err(Error::Shape {
                context: "cnn parameter blocks",
                expected: 6,
                found: self.params.len(),
            });
        }
        check_rates(&[self.dropout])?;
        let (filters, kernel) = (self.params[0].rows(), self.params[0].cols());
        if filters == 0
            || kernel == 0
            || self.pool == 0
            || self.input_len < kernel
            || (self.input_len - kernel + 1) / self.pool == 0
        {
            return Err(Error::InvalidInput(format!(
                "cnn geometry: input {}, kernel {kernel}, pool {}",
                self.input_len, self.pool
            )));
        }
        let pooled = (self.input_len - kernel + 1) / self.pool;
        let dense = self.params[2].rows();
        let classes = self.params[4].rows();
        self.params[0].check_shape("cnn kernels", filters, kernel)?;
        self.params[1].check_shape("cnn conv bias", 1, filters)?;
        self.params[2].check_shape("cnn dense weights", dense, pooled * filters)?;
        self.params[3].check_shape("cnn dense bias", 1, dense)?;
        self.params[4].check_shape("cnn output weights", classes, dense)?;
        self.params[5].check_shape("cnn output bias", 1, classes)
    }

    fn kernel(&self) -> usize {
        self.params[0].cols()
    }

    fn filters(&self) -> usize {
        self.params[0].rows()
    }

    fn conv_len(&self) -> usize {
        self.input_len - self.kernel() + 1
    }

    /// Convolution, pooling and dropout for one input.
    fn front(&self, x: &[f64], dropout: Option<&mut SeededRng>) -> Front {
        let (k, f) = (self.kernel(), self.filters());
        let kernels = &self.params[0];
        let bias = self.params[1].as_slice();
        let mut conv = vec![0.0; self.conv_len() * f];
        for t in 0..self.conv_len() {
            let window = &x[t..t + k];
            let zero = window.iter().all(|&v| v == 0.0);
            for c in 0..f {
                let s = if zero {
                    bias[c]
                } else {
                    bias[c]
                        + kernels
                            .row(c)
                            .iter()
                            .zip(window)
                            .map(|(w, v)| w * v)
                            .sum::<f64>()
                };
                conv[t * f + c] = s.max(0.0);
            }
        }
        let pooled = self.conv_len() / self.pool;
        let mut flat = vec![0.0; pooled * f];
        let mut argmax = vec![0; pooled * f];
        for u in 0..pooled {
            for c in 0..f {
                let mut best = u * self.pool * f + c;
                for t in u * self.pool + 1..(u + 1) * self.pool {
                    if conv[t * f + c] > conv[best] {
                        best = t * f + c;
                    }
                }
                flat[u * f + c] = conv[best];
                argmax[u * f + c] = best;
            }
        }
        let mask = maybe_dropout(&mut flat, self.dropout, dropout);
        Front {
            conv,
            argmax,
            mask,
            flat,
        }
    }
}

impl Network for CnnModel {
    fn input_dim(&self) -> usize {
        self.input_len
    }

    fn classes(&self) -> usize {
        self.params[5].cols()
    }

    fn params(&self) -> &[DenseMatrix] {
        &self.params
    }

    fn params_mut(&mut self) -> &mut [DenseMatrix] {
        &mut self.params
    }

    fn logits(&self, x: &[f64], dropout: Option<&mut SeededRng>) -> Vec<f64> {
        let front = self.front(x, dropout);
        let mut hidden = affine_batch(&self.params[2], &self.params[3], &[&front.flat]).remove(0);
        relu_in_place(&mut hidden);
        affine(&self.params[4], &self.params[5], &hidden)
    }

    fn logits_batch(&self, xs: &[&[f64]]) -> Vec<Vec<f64>> {
        let fronts: Vec<Front> = xs.iter().map(|x| self.front(x, None)).collect();
        let flats: Vec<&[f64]> = fronts.iter().map(|f| f.flat.as_slice()).collect();
        affine_batch(&self.params[2], &self.params[3], &flats)
            .into_iter()
            .map(|mut h| {
                relu_in_place(&mut h);
                affine(&self.params[4], &self.params[5], &h)
            })
            .collect()
    }

    fn accumulate_gradient(
        &self,
        x: &[f64],
        y: usize,
        dropout: Option<&mut SeededRng>,
        grads: &mut [DenseMatrix],
    ) -> f64 {
        self.accumulate_batch(&[x], &[y], dropout, grads)
    }

    fn accumulate_batch(
        &self,
        xs: &[&[f64]],
        ys: &[usize],
        mut dropout: Option<&mut SeededRng>,
        grads: &mut [DenseMatrix],
    ) -> f64 {
        let fronts: Vec<Front> = xs
            .iter()
            .map(|x| self.front(x, dropout.as_deref_mut()))
            .collect();
        let flats: Vec<&[f64]> = fronts.iter().map(|f| f.flat.as_slice()).collect();
        let hidden_pre = affine_batch(&self.params[2], &self.params[3], &flats);
        let (head, tail) = grads.split_at_mut(4);
        let (go_w, go_b) = tail.split_at_mut(1);
        let mut loss = 0.0;
        let mut dhs = Vec::with_capacity(xs.len());
        for (pre, &y) in hidden_pre.iter().zip(ys) {
            let mut hidden = pre.clone();
            relu_in_place(&mut hidden);
            let logits = affine(&self.params[4], &self.params[5], &hidden);
            let (dz, l) = softmax_xent_grad(&logits, y);
            loss += l;
            let mut dh = affine_backward(
                &self.params[4],
                &hidden,
                &dz,
                &mut go_w[0],
                &mut go_b[0],
                true,
            )
            .unwrap_or_default();
            dh.iter_mut().zip(pre).for_each(|(d, &z)| {
                if z <= 0.0 {
                    *d = 0.0;
                }
            });
            dhs.push(dh);
        }
        let (conv_grads, dense_grads) = head.split_at_mut(2);
        let (gd_w, gd_b) = dense_grads.split_at_mut(1);
        let dflats =
            affine_backward_batch(&self.params[2], &flats, &dhs, &mut gd_w[0], &mut gd_b[0]);
        let (k, f) = (self.kernel(), self.filters());
        let (gk, gb) = conv_grads.split_at_mut(1);
        for ((x, front), mut dflat) in xs.iter().zip(&fronts).zip(dflats) {
            if let Some(m) = &front.mask {
                dflat.iter_mut().zip(m).for_each(|(d, m)| *d *= m);
            }
            for (i, &d) in dflat.iter().enumerate() {
                let pos = front.argmax[i];
                if d == 0.0 || front.conv[pos] <= 0.0 {
                    continue;
                }
                let (t, ch) = (pos / f, pos % f);
                gb[0].as_mut_slice()[ch] += d;
                let row = gk[0].row_mut(ch);
                for j in 0..k {
                    row[j] += d * x[t + j];
                }
            }
        }
        loss
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neural::{gradient_check, randomize_params};

    #[test]
    fn gradients_match_finite_differences() {
        let cfg = CnnConfig {
            kernel: 3,
            filters: 2,
            pool: 2,
            dropout: 0.5,
            dense: 5,
        };
        let mut rng = SeededRng::new(21);
        for _ in 0..5 {
            let mut m = CnnModel::new(8, 3, &cfg, &mut rng).unwrap();
            randomize_params(&mut m, 0.5, &mut rng);
            let x: Vec<f64> = (0..8).map(|_| rng.uniform(0.0, 2.0)).collect();
            let err = gradient_check(&m, &x, rng.below(3) as usize, 1e-5).unwrap();
            assert!(err < 1e-4, "{err}");
        }
    }

    #[test]
    fn batch_paths_match_single_examples() {
        let cfg = CnnConfig {
            kernel: 3,
            filters: 3,
            pool: 2,
            dropout: 0.0,
            dense: 4,
        };
        let mut rng = SeededRng::new(5);
        let m = CnnModel::new(600, 3, &cfg, &mut rng).unwrap();
        let xs: Vec<Vec<f64>> = (0..3)
            .map(|_| (0..600).map(|_| rng.uniform(0.0, 1.0)).collect())
            .collect();
        let refs: Vec<&[f64]> = xs.iter().map(Vec::as_slice).collect();
        let batch = m.logits_batch(&refs);
        let zeros = || {
            m.params()
                .iter()
                .map(|p| DenseMatrix::zeros(p.rows(), p.cols()))
                .collect::<Vec<_>>()
        };
        let (mut g1, mut g2) = (zeros(), zeros());
        let l1 = m.accumulate_batch(&refs, &[0, 1, 2], None, &mut g1);
        let mut l2 = 0.0;
        for (i, x) in refs.iter().enumerate() {
            assert_eq!(batch[i], m.logits(x, None));
            l2 += m.accumulate_gradient(x, i, None, &mut g2);
        }
        assert_eq!(l1, l2);
        for (a, b) in g1.iter().zip(&g2) {
            for (x, y) in a.as_slice().iter().zip(b.as_slice()) {
                assert!((x - y).abs() <= 1e-12 * x.abs().max(1.0));
            }
        }
    }

    #[test]
    fn shapes_and_validation() {
        let m = CnnModel::new(10, 4, &CnnConfig::default(), &mut SeededRng::new(0)).unwrap();
        assert_eq!(m.params()[2].cols(), (10 - 3 + 1) / 2 * 16);
        let p = m.forward(&[0.0; 10]);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(CnnModel::new(2, 4, &CnnConfig::default(), &mut SeededRng::new(0)).is_err());
        let bad = CnnConfig {
            dropout: 1.0,
            ..Default::default()
        };
        assert!(CnnModel::new(10, 4, &bad, &mut SeededRng::new(0)).is_err());
    }
}
