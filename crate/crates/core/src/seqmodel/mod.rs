//! Embedding + LSTM/BiLSTM sequence classifier trained with
//! backpropagation through time.
//!
//! Gate equations, per real timestep `t` and direction:
//!
//! ```text
//! i = σ(W_i·x + U_i·h + b_i)    f = σ(W_f·x + U_f·h + b_f)
//! o = σ(W_o·x + U_o·h + b_o)    g = tanh(W_c·x + U_c·h + b_c)
//! c' = f ⊙ c + i ⊙ g            h' = o ⊙ tanh(c')
//! ```
//!
//! Padding positions leave `(h, c)` untouched. The unidirectional feature
//! is the forward state after the last real token; the bidirectional one
//! appends the backward state after the first real token. Dropout (inverted,
//! train mode only) is applied to that feature before the softmax layer.

mod artifact;
mod lstm;
mod params;
mod train;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use artifact::{load_model, save_model, ModelArtifact, ARTIFACT_MAGIC};
pub use lstm::{forward, forward_examples, softmax, ForwardCache, SeqInput};
pub use params::{init_model, load_pretrained, mean_embeddings, LstmParams, ModelParams, PretrainedEmbeddings};
pub use train::{
    compare_gradients, gradient_check, loss_and_gradients, predict, train, train_step, weighted_loss,
    Example, Optimizer, TensorError, TrainData, TrainHistory,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Uni,
    Bi,
}

impl Direction {
    pub fn count(self) -> usize {
        match self {
            Direction::Uni => 1,
            Direction::Bi => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    /// Plain mini-batch gradient descent.
    Sgd,
    Adam,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub direction: Direction,
    /// Units per direction.
    pub hidden: usize,
    pub embed_dim: usize,
    pub optimizer: OptimizerKind,
    /// Defaults to 0.1 for SGD and 1e-3 for Adam when unset.
    pub learning_rate: Option<f64>,
    pub max_epochs: usize,
    pub batch_size: usize,
    pub dropout: f64,
    pub patience: usize,
    pub clip_norm: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            direction: Direction::Bi,
            hidden: 15,
            embed_dim: 64,
            optimizer: OptimizerKind::Sgd,
            learning_rate: None,
            max_epochs: 50,
            batch_size: 32,
            dropout: 0.3,
            patience: 3,
            clip_norm: 5.0,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn effective_learning_rate(&self) -> f64 {
        self.learning_rate.unwrap_or(match self.optimizer {
            OptimizerKind::Sgd => 0.1,
            OptimizerKind::Adam => 1e-3,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.hidden < 1 || self.embed_dim < 1 {
            return Err(Error::invalid("hidden units and embedding dim must be at least 1"));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::invalid("dropout must be in [0, 1)"));
        }
        if self.patience < 1 {
            return Err(Error::invalid("patience must be at least 1"));
        }
        if self.batch_size < 1 || self.max_epochs < 1 {
            return Err(Error::invalid("batch size and epoch count must be at least 1"));
        }
        let lr = self.effective_learning_rate();
        if !(lr >= 0.0 && lr.is_finite()) {
            return Err(Error::invalid("learning rate must be finite and non-negative"));
        }
        if self.clip_norm.is_nan() || self.clip_norm <= 0.0 {
            return Err(Error::invalid("clip norm must be positive"));
        }
        Ok(())
    }
}
