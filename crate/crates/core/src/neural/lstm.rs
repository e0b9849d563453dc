use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::layers::{
    affine, affine_backward, glorot_uniform, he_uniform, maybe_dropout, relu_in_place,
    softmax_xent_grad,
};
use super::mlp::check_rates;
use super::Network;
use crate::error::{Error, Result};
use crate::numkit::{axpy, dot, sigmoid_in_place, tanh_in_place, DenseMatrix, SeededRng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LstmConfig {
    pub hidden: usize,
    pub dropout: f64,
    pub dense: usize,
    /// Replaces the shared training learning rate for this model.
    pub learning_rate: Option<f64>,
}

impl Default for LstmConfig {
    fn default() -> Self {
        Self {
            hidden: 16,
            dropout: 0.3,
            dense: 32,
            learning_rate: Some(0.05),
        }
    }
}

/// Gate values at one time step.
#[derive(Debug, Clone, PartialEq)]
pub struct GateActivations {
    pub input: Vec<f64>,
    pub forget: Vec<f64>,
    pub output: Vec<f64>,
    pub candidate: Vec<f64>,
}

/// One LSTM layer read left to right over a one-channel sequence; the final
/// hidden state goes through dropout, a ReLU dense layer and a softmax output.
///
/// Parameters: `[W_x (4H × 1), W_hᵀ (H × 4H), b (1 × 4H), dense W, dense b,
/// output W, output b]`, gate blocks ordered input, forget, candidate, output.
/// The recurrent matrix is stored transposed so each step is a sum of
/// contiguous rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LstmModel {
    input_len: usize,
    dropout: f64,
    params: Vec<DenseMatrix>,
}

/// Per-step values of a full pass, stored flat: `gates` is T × 4H (activated),
/// `c` and `tanh_c` are T × H, `h` is (T + 1) × H with the zero state first.
struct Trace {
    gates: Vec<f64>,
    c: Vec<f64>,
    tanh_c: Vec<f64>,
    h: Vec<f64>,
}

struct Cache {
    trace: Trace,
    mask: Option<Vec<f64>>,
    features: Vec<f64>,
    dense_pre: Vec<f64>,
    dense: Vec<f64>,
    logits: Vec<f64>,
}

impl LstmModel {
    /// Forget-gate biases start at 1.
    pub fn new(
        input_len: usize,
        classes: usize,
        config: &LstmConfig,
        rng: &mut SeededRng,
    ) -> Result<Self> {
        if config.hidden == 0 || config.dense == 0 || input_len == 0 {
            return Err(Error::InvalidParameter(format!(
                "lstm sizes must be positive: input {input_len}, {config:?}"
            )));
        }
        check_rates(&[config.dropout])?;
        let h = config.hidden;
        let mut bias = DenseMatrix::zeros(1, 4 * h);
        bias.as_mut_slice()[h..2 * h].fill(1.0);
        let params = vec![
            glorot_uniform(4 * h, 1, rng),
            glorot_uniform(h, 4 * h, rng),
            bias,
            he_uniform(config.dense, h, rng),
            DenseMatrix::zeros(1, config.dense),
            glorot_uniform(classes, config.dense, rng),
            DenseMatrix::zeros(1, classes),
        ];
        Ok(Self {
            input_len,
            dropout: config.dropout,
            params,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.params.len() != 7 {
            return Err(Error::Shape {
                context: "lstm parameter blocks",
                expected: 7,
                found: self.params.len(),
            });
        }
        check_rates(&[self.dropout])?;
        let h = self.params[1].rows();
        let dense = self.params[3].rows();
        let classes = self.params[5].rows();
        if h == 0 || dense == 0 || self.input_len == 0 {
            return Err(Error::InvalidInput("lstm sizes must be positive".into()));
        }
        self.params[0].check_shape("lstm input weights", 4 * h, 1)?;
        self.params[1].check_shape("lstm recurrent weights", h, 4 * h)?;
        self.params[2].check_shape("lstm gate bias", 1, 4 * h)?;
        self.params[3].check_shape("lstm dense weights", dense, h)?;
        self.params[4].check_shape("lstm dense bias", 1, dense)?;
        self.params[5].check_shape("lstm output weights", classes, dense)?;
        self.params[6].check_shape("lstm output bias", 1, classes)
    }

    pub fn hidden(&self) -> usize {
        self.params[1].rows()
    }

    /// Gate activations at every step of the sequence `x`.
    pub fn gate_trace(&self, x: &[f64]) -> Vec<GateActivations> {
        let h = self.hidden();
        let trace = self.recur(x, true);
        trace
            .gates
            .chunks_exact(4 * h)
            .map(|g| GateActivations {
                input: g[..h].to_vec(),
                forget: g[h..2 * h].to_vec(),
                candidate: g[2 * h..3 * h].to_vec(),
                output: g[3 * h..].to_vec(),
            })
            .collect()
    }

    /// One step: activates `gates` in place from the pre-activations and updates
    /// `c`, `tanh_c`, `h`.
    fn step(
        &self,
        xt: f64,
        h_prev: &[f64],
        c_prev: &[f64],
        gates: &mut [f64],
        c: &mut [f64],
        tanh_c: &mut [f64],
        h: &mut [f64],
    ) {
        let hs = self.hidden();
        let wx = self.params[0].as_slice();
        let wht = &self.params[1];
        let b = self.params[2].as_slice();
        for ((g, &bias), &w) in gates.iter_mut().zip(b).zip(wx) {
            *g = bias + w * xt;
        }
        for (j, &hj) in h_prev[..hs].iter().enumerate() {
            if hj != 0.0 {
                axpy(hj, wht.row(j), gates);
            }
        }
        sigmoid_in_place(&mut gates[..2 * hs]);
        tanh_in_place(&mut gates[2 * hs..3 * hs]);
        sigmoid_in_place(&mut gates[3 * hs..]);
        for j in 0..hs {
            c[j] = gates[hs + j] * c_prev[j] + gates[j] * gates[2 * hs + j];
        }
        tanh_c.copy_from_slice(c);
        tanh_in_place(tanh_c);
        for j in 0..hs {
            h[j] = gates[3 * hs + j] * tanh_c[j];
        }
    }

    /// With `keep` false only the final state is retained (the returned trace
    /// then holds a single step).
    fn recur(&self, x: &[f64], keep: bool) -> Trace {
        let hs = self.hidden();
        let steps = if keep { x.len() } else { 1 };
        let mut t = Trace {
            gates: vec![0.0; steps * 4 * hs],
            c: vec![0.0; (steps + 1) * hs],
            tanh_c: vec![0.0; steps * hs],
            h: vec![0.0; (steps + 1) * hs],
        };
        for (i, &xt) in x.iter().enumerate() {
            let (prev, cur) = if keep { (i, i + 1) } else { (0, 1) };
            let (h_prev, h_cur) = t.h.split_at_mut(cur * hs);
            let (c_prev, c_cur) = t.c.split_at_mut(cur * hs);
            let slot = if keep { i } else { 0 };
            self.step(
                xt,
                &h_prev[prev * hs..],
                &c_prev[prev * hs..],
                &mut t.gates[slot * 4 * hs..(slot + 1) * 4 * hs],
                &mut c_cur[..hs],
                &mut t.tanh_c[slot * hs..(slot + 1) * hs],
                &mut h_cur[..hs],
            );
            if !keep {
                t.h.copy_within(hs.., 0);
                t.c.copy_within(hs.., 0);
            }
        }
        if keep {
            // Drop the zero initial cell state so `c` lines up with `gates`.
            t.c.drain(..hs);
        }
        t
    }

    fn head(
        &self,
        final_h: &[f64],
        dropout: Option<&mut SeededRng>,
    ) -> (Option<Vec<f64>>, Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>) {
        let mut features = final_h.to_vec();
        let mask = maybe_dropout(&mut features, self.dropout, dropout);
        let dense_pre = affine(&self.params[3], &self.params[4], &features);
        let mut dense = dense_pre.clone();
        relu_in_place(&mut dense);
        let logits = affine(&self.params[5], &self.params[6], &dense);
        (mask, features, dense_pre, dense, logits)
    }

    fn run(&self, x: &[f64], dropout: Option<&mut SeededRng>) -> Cache {
        let hs = self.hidden();
        let trace = self.recur(x, true);
        let final_h = &trace.h[x.len() * hs..];
        let (mask, features, dense_pre, dense, logits) = self.head(final_h, dropout);
        Cache {
            trace,
            mask,
            features,
            dense_pre,
            dense,
            logits,
        }
    }
}

impl Network for LstmModel {
    fn input_dim(&self) -> usize {
        self.input_len
    }

    fn classes(&self) -> usize {
        self.params[6].cols()
    }

    fn params(&self) -> &[DenseMatrix] {
        &self.params
    }

    fn params_mut(&mut self) -> &mut [DenseMatrix] {
        &mut self.params
    }

    fn logits(&self, x: &[f64], dropout: Option<&mut SeededRng>) -> Vec<f64> {
        let hs = self.hidden();
        let trace = self.recur(x, false);
        let final_h = if x.is_empty() {
            &trace.h[..hs]
        } else {
            &trace.h[hs..]
        };
        self.head(final_h, dropout).4
    }

    fn accumulate_gradient(
        &self,
        x: &[f64],
        y: usize,
        dropout: Option<&mut SeededRng>,
        grads: &mut [DenseMatrix],
    ) -> f64 {
        let hsz = self.hidden();
        let cache = self.run(x, dropout);
        let (dz, loss) = softmax_xent_grad(&cache.logits, y);
        let (rec, head) = grads.split_at_mut(3);
        let (dense_g, out_g) = head.split_at_mut(2);
        let (ow, ob) = out_g.split_at_mut(1);
        let mut dd = affine_backward(
            &self.params[5],
            &cache.dense,
            &dz,
            &mut ow[0],
            &mut ob[0],
            true,
        )
        .unwrap_or_default();
        dd.iter_mut().zip(&cache.dense_pre).for_each(|(d, &z)| {
            if z <= 0.0 {
                *d = 0.0;
            }
        });
        let (dw, db) = dense_g.split_at_mut(1);
        let mut dh = affine_backward(
            &self.params[3],
            &cache.features,
            &dd,
            &mut dw[0],
            &mut db[0],
            true,
        )
        .unwrap_or_default();
        if let Some(m) = &cache.mask {
            dh.iter_mut().zip(m).for_each(|(d, m)| *d *= m);
        }

        let wht = &self.params[1];
        let (gwx, rest) = rec.split_at_mut(1);
        let (gwh, gb) = rest.split_at_mut(1);
        let mut dc = vec![0.0; hsz];
        let mut da = vec![0.0; 4 * hsz];
        let tr = &cache.trace;
        for t in (0..x.len()).rev() {
            let gates = &tr.gates[t * 4 * hsz..(t + 1) * 4 * hsz];
            let tanh_c = &tr.tanh_c[t * hsz..(t + 1) * hsz];
            let h_prev = &tr.h[t * hsz..(t + 1) * hsz];
            let (i, f, g, o) = (
                &gates[..hsz],
                &gates[hsz..2 * hsz],
                &gates[2 * hsz..3 * hsz],
                &gates[3 * hsz..],
            );
            for j in 0..hsz {
                let c_prev = if t > 0 { tr.c[(t - 1) * hsz + j] } else { 0.0 };
                dc[j] += dh[j] * o[j] * (1.0 - tanh_c[j] * tanh_c[j]);
                da[j] = dc[j] * g[j] * i[j] * (1.0 - i[j]);
                da[hsz + j] = dc[j] * c_prev * f[j] * (1.0 - f[j]);
                da[2 * hsz + j] = dc[j] * i[j] * (1.0 - g[j] * g[j]);
                da[3 * hsz + j] = dh[j] * tanh_c[j] * o[j] * (1.0 - o[j]);
                dc[j] *= f[j];
            }
            axpy(x[t], &da, gwx[0].as_mut_slice());
            axpy(1.0, &da, gb[0].as_mut_slice());
            for j in 0..hsz {
                axpy(h_prev[j], &da, gwh[0].row_mut(j));
                dh[j] = dot(wht.row(j), &da);
            }
        }
        loss
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neural::{gradient_check, randomize_params};
    use proptest::prelude::*;

    #[test]
    fn gradients_match_finite_differences() {
        let cfg = LstmConfig {
            hidden: 4,
            dropout: 0.3,
            dense: 5,
            learning_rate: None,
        };
        let mut rng = SeededRng::new(31);
        for _ in 0..5 {
            let mut m = LstmModel::new(6, 3, &cfg, &mut rng).unwrap();
            randomize_params(&mut m, 0.5, &mut rng);
            let x: Vec<f64> = (0..6).map(|_| rng.uniform(-1.0, 2.0)).collect();
            let err = gradient_check(&m, &x, rng.below(3) as usize, 1e-5).unwrap();
            assert!(err < 1e-4, "{err}");
        }
    }

    #[test]
    fn forget_bias_starts_at_one() {
        let m = LstmModel::new(5, 2, &LstmConfig::default(), &mut SeededRng::new(0)).unwrap();
        let b = m.params()[2].as_slice();
        assert!(b[16..32].iter().all(|&v| v == 1.0));
        assert!(b[..16].iter().chain(&b[32..]).all(|&v| v == 0.0));
    }

    proptest! {
        #[test]
        fn gates_are_bounded(x in proptest::collection::vec(-10.0f64..10.0, 1..12), seed in 0u64..50) {
            let m = LstmModel::new(x.len(), 3, &LstmConfig { hidden: 5, dropout: 0.0, dense: 4, learning_rate: None }, &mut SeededRng::new(seed)).unwrap();
            for s in m.gate_trace(&x) {
                for v in s.input.iter().chain(&s.forget).chain(&s.output) {
                    prop_assert!(*v > 0.0 && *v < 1.0);
                }
                for v in &s.candidate {
                    prop_assert!(*v > -1.0 && *v < 1.0);
                }
            }
        }
    }
}
