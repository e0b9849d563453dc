//! Feed-forward, convolutional and recurrent classifiers with hand-written
//! backpropagation, trained by mini-batch momentum SGD.

mod cnn;
mod diagnostics;
mod layers;
mod lstm;
mod mlp;
mod train;

pub use cnn::{CnnConfig, CnnModel};
pub use diagnostics::{overfit_gap, DiagnosticConfig, FitDiagnosis, OverfitDiagnostic};
pub use layers::apply_dropout;
pub use lstm::{GateActivations, LstmConfig, LstmModel};
pub use mlp::{MlpConfig, MlpModel};
pub use train::{
    gradient_check, randomize_params, train_network, EpochRecord, LearningCurve, TrainingConfig,
    GRADIENT_CHECK_FLOOR,
};

use alloc::vec::Vec;

use crate::dataset::{check_dimension, Prediction};
use crate::error::Result;
use crate::numkit::{log_sum_exp, softmax, DenseMatrix, SeededRng};
use crate::textprep::CountVector;

/// A count vector read as a one-channel sequence in vocabulary order.
pub fn reshape_input(x: &CountVector) -> Vec<f64> {
    x.to_dense()
}

/// A differentiable classifier over dense inputs of a fixed length.
pub trait Network: Clone {
    fn input_dim(&self) -> usize;
    fn classes(&self) -> usize;
    /// Every trainable tensor, in a fixed order.
    fn params(&self) -> &[DenseMatrix];
    fn params_mut(&mut self) -> &mut [DenseMatrix];
    /// Output pre-activations. With `dropout` set, masks are drawn from it
    /// (training mode); without, dropout is the identity.
    fn logits(&self, x: &[f64], dropout: Option<&mut SeededRng>) -> Vec<f64>;
    /// Cross-entropy of label `y`; parameter gradients are added into `grads`.
    fn accumulate_gradient(
        &self,
        x: &[f64],
        y: usize,
        dropout: Option<&mut SeededRng>,
        grads: &mut [DenseMatrix],
    ) -> f64;

    /// Logits for several inputs, without dropout.
    fn logits_batch(&self, xs: &[&[f64]]) -> Vec<Vec<f64>> {
        xs.iter().map(|x| self.logits(x, None)).collect()
    }

    /// Summed loss over a mini-batch; gradients are added into `grads`. Dropout
    /// masks are drawn example by example in order.
    fn accumulate_batch(
        &self,
        xs: &[&[f64]],
        ys: &[usize],
        mut dropout: Option<&mut SeededRng>,
        grads: &mut [DenseMatrix],
    ) -> f64 {
        xs.iter()
            .zip(ys)
            .map(|(x, &y)| self.accumulate_gradient(x, y, dropout.as_deref_mut(), grads))
            .sum()
    }

    fn loss(&self, x: &[f64], y: usize) -> f64 {
        let z = self.logits(x, None);
        log_sum_exp(&z) - z[y]
    }

    fn forward(&self, x: &[f64]) -> Vec<f64> {
        softmax(&self.logits(x, None))
    }

    fn predict(&self, x: &CountVector) -> Result<Prediction> {
        check_dimension(self.input_dim(), x)?;
        Ok(Prediction::from_distribution(
            self.forward(&reshape_input(x)),
        ))
    }
}
