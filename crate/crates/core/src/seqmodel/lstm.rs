use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::params::{LstmParams, ModelParams};
use crate::features::{SequenceBatch, PAD_ID};

/// What one training or inference row feeds into the recurrence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SeqInput {
    /// Row of the sequence batch, looked up in the embedding matrix.
    Tokens(usize),
    /// Positionwise `(1 - gap) * E[base_t] + gap * E[neighbor_t]`. The
    /// embedding matrix gets no gradient from these rows.
    Blend { base: usize, neighbor: usize, gap: f64 },
}

/// Activations of one direction over its real timesteps.
#[derive(Debug, Clone)]
struct DirCache {
    /// Real positions in processing order.
    order: Vec<usize>,
    /// `n x 4H` activated gates i, f, o, g.
    gates: Vec<f64>,
    /// `(n + 1) x H`, starting from the zero state.
    h: Vec<f64>,
    c: Vec<f64>,
}

#[derive(Debug, Clone)]
struct SampleCache {
    ids: Option<Vec<u32>>,
    /// `L x d` inputs.
    x: Vec<f64>,
    dirs: Vec<DirCache>,
    /// Feature after dropout.
    feature: Vec<f64>,
    drop: Option<Vec<f64>>,
}

/// Everything the backward pass needs, plus the softmax output.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    pub probs: Vec<Vec<f64>>,
    samples: Vec<SampleCache>,
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Numerically stable softmax.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let m = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = logits.iter().map(|&z| (z - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

fn run_direction(p: &LstmParams, x: &[f64], d: usize, hn: usize, order: Vec<usize>) -> DirCache {
    let n = order.len();
    let mut gates = vec![0.0; n * 4 * hn];
    let mut h = vec![0.0; (n + 1) * hn];
    let mut c = vec![0.0; (n + 1) * hn];
    let mut a = vec![0.0; 4 * hn];
    for (s, &t) in order.iter().enumerate() {
        let xt = &x[t * d..(t + 1) * d];
        let hp = &h[s * hn..(s + 1) * hn];
        for g in 0..4 {
            let ag = &mut a[g * hn..(g + 1) * hn];
            ag.copy_from_slice(&p.b[g]);
            for (k, &xk) in xt.iter().enumerate() {
                if xk != 0.0 {
                    let row = &p.w[g][k * hn..(k + 1) * hn];
                    ag.iter_mut().zip(row).for_each(|(acc, w)| *acc += xk * w);
                }
            }
            for (k, &hk) in hp.iter().enumerate() {
                let row = &p.u[g][k * hn..(k + 1) * hn];
                ag.iter_mut().zip(row).for_each(|(acc, u)| *acc += hk * u);
            }
        }
        let gs = &mut gates[s * 4 * hn..(s + 1) * 4 * hn];
        for j in 0..hn {
            gs[j] = sigmoid(a[j]);
            gs[hn + j] = sigmoid(a[hn + j]);
            gs[2 * hn + j] = sigmoid(a[2 * hn + j]);
            gs[3 * hn + j] = a[3 * hn + j].tanh();
        }
        let (done, rest) = c.split_at_mut((s + 1) * hn);
        let cp = &done[s * hn..];
        let ct = &mut rest[..hn];
        let ht = &mut h[(s + 1) * hn..(s + 2) * hn];
        for j in 0..hn {
            ct[j] = gs[hn + j] * cp[j] + gs[j] * gs[3 * hn + j];
            ht[j] = gs[2 * hn + j] * ct[j].tanh();
        }
    }
    DirCache { order, gates, h, c }
}

/// Backpropagates `dh_final` through one direction, accumulating parameter
/// gradients into `grad` and input gradients into `dx` (`L x d`).
#[allow(clippy::too_many_arguments)]
fn back_direction(
    p: &LstmParams,
    grad: &mut LstmParams,
    cache: &DirCache,
    x: &[f64],
    d: usize,
    hn: usize,
    dh_final: &[f64],
    dx: &mut [f64],
) {
    let mut dh = dh_final.to_vec();
    let mut dc = vec![0.0; hn];
    let mut da = vec![0.0; 4 * hn];
    let mut dh_prev = vec![0.0; hn];
    for s in (0..cache.order.len()).rev() {
        let t = cache.order[s];
        let gs = &cache.gates[s * 4 * hn..(s + 1) * 4 * hn];
        let cp = &cache.c[s * hn..(s + 1) * hn];
        let ct = &cache.c[(s + 1) * hn..(s + 2) * hn];
        let hp = &cache.h[s * hn..(s + 1) * hn];
        for j in 0..hn {
            let (i, f, o, g) = (gs[j], gs[hn + j], gs[2 * hn + j], gs[3 * hn + j]);
            let tc = ct[j].tanh();
            let dcj = dc[j] + dh[j] * o * (1.0 - tc * tc);
            da[j] = dcj * g * i * (1.0 - i);
            da[hn + j] = dcj * cp[j] * f * (1.0 - f);
            da[2 * hn + j] = dh[j] * tc * o * (1.0 - o);
            da[3 * hn + j] = dcj * i * (1.0 - g * g);
            dc[j] = dcj * f;
        }
        let xt = &x[t * d..(t + 1) * d];
        let dxt = &mut dx[t * d..(t + 1) * d];
        dh_prev.fill(0.0);
        for g in 0..4 {
            let dag = &da[g * hn..(g + 1) * hn];
            grad.b[g].iter_mut().zip(dag).for_each(|(b, v)| *b += v);
            for k in 0..d {
                let wrow = &p.w[g][k * hn..(k + 1) * hn];
                let gw = &mut grad.w[g][k * hn..(k + 1) * hn];
                let xk = xt[k];
                let mut acc = 0.0;
                for j in 0..hn {
                    gw[j] += xk * dag[j];
                    acc += wrow[j] * dag[j];
                }
                dxt[k] += acc;
            }
            for k in 0..hn {
                let urow = &p.u[g][k * hn..(k + 1) * hn];
                let gu = &mut grad.u[g][k * hn..(k + 1) * hn];
                let hk = hp[k];
                let mut acc = 0.0;
                for j in 0..hn {
                    gu[j] += hk * dag[j];
                    acc += urow[j] * dag[j];
                }
                dh_prev[k] += acc;
            }
        }
        std::mem::swap(&mut dh, &mut dh_prev);
    }
}

fn embed(model: &ModelParams, seqs: &SequenceBatch, input: SeqInput) -> (Option<Vec<u32>>, Vec<u8>, Vec<f64>) {
    let d = model.embed_dim;
    let l = seqs.max_len;
    match input {
        SeqInput::Tokens(r) => {
            let ids = seqs.row_ids(r).to_vec();
            let mask = seqs.row_mask(r).to_vec();
            let mut x = vec![0.0; l * d];
            for t in 0..l {
                if mask[t] == 1 {
                    x[t * d..(t + 1) * d].copy_from_slice(model.embedding_row(ids[t]));
                }
            }
            (Some(ids), mask, x)
        }
        SeqInput::Blend { base, neighbor, gap } => {
            let (bi, bm) = (seqs.row_ids(base), seqs.row_mask(base));
            let (ni, nm) = (seqs.row_ids(neighbor), seqs.row_mask(neighbor));
            let mut x = vec![0.0; l * d];
            let mut mask = vec![0u8; l];
            for t in 0..l {
                mask[t] = bm[t] | nm[t];
                let b = if bm[t] == 1 { bi[t] } else { PAD_ID };
                let n = if nm[t] == 1 { ni[t] } else { PAD_ID };
                let xt = &mut x[t * d..(t + 1) * d];
                for ((v, eb), en) in xt.iter_mut().zip(model.embedding_row(b)).zip(model.embedding_row(n)) {
                    *v = (1.0 - gap) * eb + gap * en;
                }
            }
            (None, mask, x)
        }
    }
}

fn forward_one(
    model: &ModelParams,
    seqs: &SequenceBatch,
    input: SeqInput,
    train: &mut Option<(f64, &mut ChaCha8Rng)>,
) -> (SampleCache, Vec<f64>) {
    let (d, hn, k) = (model.embed_dim, model.hidden, model.num_classes);
    let (ids, mask, x) = embed(model, seqs, input);
    let real: Vec<usize> = (0..mask.len()).filter(|&t| mask[t] == 1).collect();
    let mut dirs = vec![run_direction(&model.lstm[0], &x, d, hn, real.clone())];
    if model.lstm.len() > 1 {
        dirs.push(run_direction(&model.lstm[1], &x, d, hn, real.into_iter().rev().collect()));
    }
    let mut feature: Vec<f64> = dirs
        .iter()
        .flat_map(|c| c.h[c.h.len() - hn..].iter().copied())
        .collect();
    let mut drop = None;
    if let Some((rate, rng)) = train {
        if *rate > 0.0 {
            let keep = 1.0 / (1.0 - *rate);
            let m: Vec<f64> = (0..feature.len())
                .map(|_| if rng.gen::<f64>() < *rate { 0.0 } else { keep })
                .collect();
            feature.iter_mut().zip(&m).for_each(|(z, s)| *z *= s);
            drop = Some(m);
        }
    }
    let mut logits = model.b_out.clone();
    for (f, &z) in feature.iter().enumerate() {
        let row = &model.w_out[f * k..(f + 1) * k];
        logits.iter_mut().zip(row).for_each(|(l, w)| *l += z * w);
    }
    let probs = softmax(&logits);
    (
        SampleCache {
            ids,
            x,
            dirs,
            feature,
            drop,
        },
        probs,
    )
}

/// Forward pass over arbitrary inputs. `train` carries the dropout rate and
/// its PRNG; `None` is inference mode. Dropout draws one `gen::<f64>()` per
/// feature component, sample by sample.
pub fn forward_examples(
    model: &ModelParams,
    seqs: &SequenceBatch,
    inputs: &[SeqInput],
    mut train: Option<(f64, &mut ChaCha8Rng)>,
) -> ForwardCache {
    let mut probs = Vec::with_capacity(inputs.len());
    let mut samples = Vec::with_capacity(inputs.len());
    for &inp in inputs {
        let (s, p) = forward_one(model, seqs, inp, &mut train);
        samples.push(s);
        probs.push(p);
    }
    ForwardCache { probs, samples }
}

/// Forward pass over every row of `seqs`.
pub fn forward(model: &ModelParams, seqs: &SequenceBatch, train: Option<(f64, &mut ChaCha8Rng)>) -> ForwardCache {
    let inputs: Vec<SeqInput> = (0..seqs.len()).map(SeqInput::Tokens).collect();
    forward_examples(model, seqs, &inputs, train)
}

/// Floor applied to probabilities before taking logs.
pub(crate) const PROB_FLOOR: f64 = 1e-12;

/// Gradients of `(1/B) Σ w_i (-ln max(p_i, floor))` for a cached forward pass.
pub(crate) fn backward(model: &ModelParams, cache: &ForwardCache, labels: &[usize], weights: &[f64]) -> ModelParams {
    let (d, hn, k) = (model.embed_dim, model.hidden, model.num_classes);
    let b = cache.samples.len() as f64;
    let mut grad = model.zeros_like();
    for ((s, p), (&y, &w)) in cache.samples.iter().zip(&cache.probs).zip(labels.iter().zip(weights)) {
        if p[y] < PROB_FLOOR {
            continue;
        }
        let coef = w / b;
        let dl: Vec<f64> = (0..k)
            .map(|c| coef * (p[c] - if c == y { 1.0 } else { 0.0 }))
            .collect();
        grad.b_out.iter_mut().zip(&dl).for_each(|(g, v)| *g += v);
        let mut dz = vec![0.0; s.feature.len()];
        for (f, &z) in s.feature.iter().enumerate() {
            let row = &model.w_out[f * k..(f + 1) * k];
            let grow = &mut grad.w_out[f * k..(f + 1) * k];
            let mut acc = 0.0;
            for c in 0..k {
                grow[c] += z * dl[c];
                acc += row[c] * dl[c];
            }
            dz[f] = acc;
        }
        if let Some(m) = &s.drop {
            dz.iter_mut().zip(m).for_each(|(g, s)| *g *= s);
        }
        let mut dx = vec![0.0; s.x.len()];
        for (dir, dc) in s.dirs.iter().enumerate() {
            back_direction(
                &model.lstm[dir],
                &mut grad.lstm[dir],
                dc,
                &s.x,
                d,
                hn,
                &dz[dir * hn..(dir + 1) * hn],
                &mut dx,
            );
        }
        if let Some(ids) = &s.ids {
            for &t in &s.dirs[0].order {
                let id = ids[t];
                if id != PAD_ID {
                    let row = &mut grad.embedding[id as usize * d..(id as usize + 1) * d];
                    row.iter_mut().zip(&dx[t * d..(t + 1) * d]).for_each(|(g, v)| *g += v);
                }
            }
        }
    }
    grad
}
