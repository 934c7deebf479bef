use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::lstm::{backward, forward, forward_examples, SeqInput, PROB_FLOOR};
use super::params::ModelParams;
use super::{OptimizerKind, TrainConfig};
use crate::error::{Error, Result};
use crate::features::SequenceBatch;
use crate::rng::{derive_seed, seeded};

/// One weighted training row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Example {
    pub input: SeqInput,
    pub label: usize,
    pub weight: f64,
}

/// Training rows that refer into a shared sequence batch.
#[derive(Debug, Clone)]
pub struct TrainData<'a> {
    pub seqs: &'a SequenceBatch,
    pub examples: Vec<Example>,
}

impl<'a> TrainData<'a> {
    pub fn new(seqs: &'a SequenceBatch, examples: Vec<Example>) -> Result<Self> {
        for e in &examples {
            let rows = match e.input {
                SeqInput::Tokens(r) => [r, r],
                SeqInput::Blend { base, neighbor, gap } => {
                    if !(0.0..=1.0).contains(&gap) {
                        return Err(Error::invalid(format!("blend gap {gap} outside [0, 1]")));
                    }
                    [base, neighbor]
                }
            };
            if rows.iter().any(|&r| r >= seqs.len()) {
                return Err(Error::invalid("example refers past the end of the sequence batch"));
            }
            if !(e.weight > 0.0 && e.weight.is_finite()) {
                return Err(Error::invalid("sample weights must be positive and finite"));
            }
        }
        Ok(Self { seqs, examples })
    }

    /// Every row of `seqs` with its own label; unit weights when `weights`
    /// is `None`.
    pub fn from_batch(seqs: &'a SequenceBatch, weights: Option<&[f64]>) -> Result<Self> {
        if let Some(w) = weights {
            if w.len() != seqs.len() {
                return Err(Error::DimensionMismatch {
                    expected: seqs.len(),
                    found: w.len(),
                });
            }
        }
        let examples = (0..seqs.len())
            .map(|r| Example {
                input: SeqInput::Tokens(r),
                label: seqs.labels[r],
                weight: weights.map_or(1.0, |w| w[r]),
            })
            .collect();
        Self::new(seqs, examples)
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }
}

/// `(1/B) Σ w_i · (-ln max(p_i[y_i], 1e-12))`.
pub fn weighted_loss(probs: &[Vec<f64>], labels: &[usize], weights: &[f64]) -> f64 {
    if probs.is_empty() {
        return 0.0;
    }
    let total: f64 = probs
        .iter()
        .zip(labels.iter().zip(weights))
        .map(|(p, (&y, &w))| w * -p[y].max(PROB_FLOOR).ln())
        .sum();
    total / probs.len() as f64
}

fn split(examples: &[Example]) -> (Vec<SeqInput>, Vec<usize>, Vec<f64>) {
    let inputs = examples.iter().map(|e| e.input).collect();
    let labels = examples.iter().map(|e| e.label).collect();
    let weights = examples.iter().map(|e| e.weight).collect();
    (inputs, labels, weights)
}

fn check_labels(model: &ModelParams, examples: &[Example]) -> Result<()> {
    match examples.iter().find(|e| e.label >= model.num_classes) {
        Some(e) => Err(Error::invalid(format!(
            "label {} out of range for {} classes",
            e.label, model.num_classes
        ))),
        None => Ok(()),
    }
}

/// Loss and gradients of a batch. `dropout` carries the rate and its PRNG.
pub fn loss_and_gradients(
    model: &ModelParams,
    seqs: &SequenceBatch,
    examples: &[Example],
    dropout: Option<(f64, &mut ChaCha8Rng)>,
) -> (f64, ModelParams) {
    let (inputs, labels, weights) = split(examples);
    let cache = forward_examples(model, seqs, &inputs, dropout);
    let loss = weighted_loss(&cache.probs, &labels, &weights);
    (loss, backward(model, &cache, &labels, &weights))
}

/// Optimizer state.
#[derive(Debug, Clone)]
pub struct Optimizer {
    kind: OptimizerKind,
    lr: f64,
    step: i32,
    moments: Option<(ModelParams, ModelParams)>,
}

const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

impl Optimizer {
    pub fn new(cfg: &TrainConfig) -> Self {
        Self {
            kind: cfg.optimizer,
            lr: cfg.effective_learning_rate(),
            step: 0,
            moments: None,
        }
    }

    pub fn learning_rate(&self) -> f64 {
        self.lr
    }

    fn apply(&mut self, model: &mut ModelParams, grad: &ModelParams) {
        let lr = self.lr;
        match self.kind {
            OptimizerKind::Sgd => {
                for (p, g) in model.tensors_mut().into_iter().zip(grad.tensors()) {
                    p.iter_mut().zip(g).for_each(|(p, g)| *p -= lr * g);
                }
            }
            OptimizerKind::Adam => {
                self.step += 1;
                let (m, v) = self
                    .moments
                    .get_or_insert_with(|| (model.zeros_like(), model.zeros_like()));
                let c1 = 1.0 - BETA1.powi(self.step);
                let c2 = 1.0 - BETA2.powi(self.step);
                for (((p, g), m), v) in model
                    .tensors_mut()
                    .into_iter()
                    .zip(grad.tensors())
                    .zip(m.tensors_mut())
                    .zip(v.tensors_mut())
                {
                    for j in 0..p.len() {
                        m[j] = BETA1 * m[j] + (1.0 - BETA1) * g[j];
                        v[j] = BETA2 * v[j] + (1.0 - BETA2) * g[j] * g[j];
                        p[j] -= lr * (m[j] / c1) / ((v[j] / c2).sqrt() + ADAM_EPS);
                    }
                }
            }
        }
        model.clear_pad_row();
    }
}

fn global_norm(grad: &ModelParams) -> f64 {
    grad.tensors()
        .iter()
        .flat_map(|t| t.iter())
        .map(|g| g * g)
        .sum::<f64>()
        .sqrt()
}

/// One update on `examples`. Returns the batch loss before the update.
pub fn train_step(
    model: &mut ModelParams,
    seqs: &SequenceBatch,
    examples: &[Example],
    cfg: &TrainConfig,
    opt: &mut Optimizer,
    dropout_rng: &mut ChaCha8Rng,
) -> Result<f64> {
    check_labels(model, examples)?;
    let (loss, mut grad) = loss_and_gradients(model, seqs, examples, Some((cfg.dropout, dropout_rng)));
    if !loss.is_finite() {
        return Err(Error::NonFinite(format!("batch loss is {loss}")));
    }
    let norm = global_norm(&grad);
    if !norm.is_finite() {
        return Err(Error::NonFinite(format!("gradient norm is {norm}")));
    }
    if norm > cfg.clip_norm {
        let s = cfg.clip_norm / norm;
        for t in grad.tensors_mut() {
            t.iter_mut().for_each(|g| *g *= s);
        }
    }
    opt.apply(model, &grad);
    if !model.is_finite() {
        return Err(Error::NonFinite("parameters diverged after an update".into()));
    }
    Ok(loss)
}

/// Largest componentwise relative error of one tensor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorError {
    pub tensor: String,
    pub max_relative_error: f64,
}

/// Checks `analytic` against central finite differences of the
/// inference-mode loss, componentwise:
/// `|a - n| / max(|a| + |n|, 1e-8)`.
pub fn compare_gradients(
    model: &ModelParams,
    seqs: &SequenceBatch,
    examples: &[Example],
    analytic: &ModelParams,
    step: f64,
) -> Vec<TensorError> {
    let (inputs, labels, weights) = split(examples);
    let loss_at = |m: &ModelParams| {
        let c = forward_examples(m, seqs, &inputs, None);
        weighted_loss(&c.probs, &labels, &weights)
    };
    let names = model.tensor_specs();
    let grads = analytic.tensors();
    let mut probe = model.clone();
    let mut out = Vec::with_capacity(names.len());
    for (ti, (name, _, _)) in names.into_iter().enumerate() {
        let mut worst = 0.0f64;
        for (j, &a) in grads[ti].iter().enumerate() {
            let orig = probe.tensors()[ti][j];
            probe.tensors_mut()[ti][j] = orig + step;
            let up = loss_at(&probe);
            probe.tensors_mut()[ti][j] = orig - step;
            let down = loss_at(&probe);
            probe.tensors_mut()[ti][j] = orig;
            let numeric = (up - down) / (2.0 * step);
            let rel = (a - numeric).abs() / (a.abs() + numeric.abs()).max(1e-8);
            worst = worst.max(rel);
        }
        out.push(TensorError {
            tensor: name,
            max_relative_error: worst,
        });
    }
    out
}

/// Backpropagated gradients vs central differences (`h = 1e-5`) for every
/// parameter tensor. Inputs must be token rows: blended rows are detached
/// from the embedding and would not match a numeric derivative.
pub fn gradient_check(model: &ModelParams, seqs: &SequenceBatch, examples: &[Example]) -> Vec<TensorError> {
    let (_, grad) = loss_and_gradients(model, seqs, examples, None);
    compare_gradients(model, seqs, examples, &grad, 1e-5)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainHistory {
    pub train_loss: Vec<f64>,
    pub val_loss: Vec<f64>,
    pub val_accuracy: Vec<f64>,
    /// 1-based.
    pub best_epoch: usize,
    pub stopped_epoch: usize,
    pub learning_rate: f64,
}

/// Mini-batch training with early stopping on unweighted validation loss.
/// On return `model` holds the best epoch's weights.
///
/// Shuffling and dropout use separate streams derived from `cfg.seed`.
pub fn train(model: &mut ModelParams, data: &TrainData<'_>, val: &SequenceBatch, cfg: &TrainConfig) -> Result<TrainHistory> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(Error::Empty("no training examples".into()));
    }
    if val.is_empty() {
        return Err(Error::Empty("validation set is empty".into()));
    }
    check_labels(model, &data.examples)?;
    if val.labels.iter().any(|&y| y >= model.num_classes) {
        return Err(Error::invalid("validation label out of range"));
    }
    let mut shuffle_rng = seeded(derive_seed(cfg.seed, "shuffle"));
    let mut dropout_rng = seeded(derive_seed(cfg.seed, "dropout"));
    let mut opt = Optimizer::new(cfg);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let ones = vec![1.0; val.len()];
    let mut hist = TrainHistory {
        train_loss: Vec::new(),
        val_loss: Vec::new(),
        val_accuracy: Vec::new(),
        best_epoch: 0,
        stopped_epoch: 0,
        learning_rate: opt.learning_rate(),
    };
    let mut best: Option<(f64, ModelParams)> = None;
    let mut stale = 0;
    for epoch in 1..=cfg.max_epochs {
        order.shuffle(&mut shuffle_rng);
        let mut total = 0.0;
        let mut batch = Vec::with_capacity(cfg.batch_size);
        for chunk in order.chunks(cfg.batch_size) {
            batch.clear();
            batch.extend(chunk.iter().map(|&i| data.examples[i]));
            total += train_step(model, data.seqs, &batch, cfg, &mut opt, &mut dropout_rng)? * chunk.len() as f64;
        }
        hist.train_loss.push(total / data.len() as f64);

        let (pred, probs) = predict(model, val);
        let vloss = weighted_loss(&probs, &val.labels, &ones);
        let acc = pred.iter().zip(&val.labels).filter(|(p, y)| p == y).count() as f64 / val.len() as f64;
        hist.val_loss.push(vloss);
        hist.val_accuracy.push(acc);
        hist.stopped_epoch = epoch;
        if best.as_ref().is_none_or(|(b, _)| vloss < *b) {
            best = Some((vloss, model.clone()));
            hist.best_epoch = epoch;
            stale = 0;
        } else {
            stale += 1;
            if stale >= cfg.patience {
                break;
            }
        }
    }
    if let Some((_, params)) = best {
        *model = params;
    }
    Ok(hist)
}

/// Argmax class per row (ties to the lower index) and the probabilities.
pub fn predict(model: &ModelParams, seqs: &SequenceBatch) -> (Vec<usize>, Vec<Vec<f64>>) {
    let cache = forward(model, seqs, None);
    let pred = cache.probs.iter().map(|p| argmax(p)).collect();
    (pred, cache.probs)
}

pub(crate) fn argmax(p: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in p.iter().enumerate() {
        if v > p[best] {
            best = i;
        }
    }
    best
}
