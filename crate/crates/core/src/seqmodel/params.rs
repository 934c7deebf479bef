use std::collections::HashMap;
use std::fs;
use std::path::Path;

use rand::Rng;

use super::{Direction, TrainConfig};
use crate::error::{Error, Result};
use crate::features::{SequenceBatch, Vocabulary, PAD_ID};
use crate::rng::{derive_seed, seeded};

pub(crate) const GATES: [&str; 4] = ["i", "f", "o", "c"];
pub(crate) const FORGET: usize = 1;

/// One direction's recurrent weights. `w[g]` is `d x H`, `u[g]` is `H x H`,
/// both row-major, in gate order i, f, o, c.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmParams {
    pub w: [Vec<f64>; 4],
    pub u: [Vec<f64>; 4],
    pub b: [Vec<f64>; 4],
}

impl LstmParams {
    fn zeros(d: usize, h: usize) -> Self {
        Self {
            w: std::array::from_fn(|_| vec![0.0; d * h]),
            u: std::array::from_fn(|_| vec![0.0; h * h]),
            b: std::array::from_fn(|_| vec![0.0; h]),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub direction: Direction,
    pub vocab_size: usize,
    pub embed_dim: usize,
    pub hidden: usize,
    pub num_classes: usize,
    /// `V x d`; row 0 is the padding row and stays zero.
    pub embedding: Vec<f64>,
    /// Forward direction first, then backward for [`Direction::Bi`].
    pub lstm: Vec<LstmParams>,
    /// `F x K` with `F = hidden * directions`.
    pub w_out: Vec<f64>,
    pub b_out: Vec<f64>,
}

impl ModelParams {
    pub fn zeros(direction: Direction, vocab_size: usize, embed_dim: usize, hidden: usize, num_classes: usize) -> Self {
        let f = hidden * direction.count();
        Self {
            direction,
            vocab_size,
            embed_dim,
            hidden,
            num_classes,
            embedding: vec![0.0; vocab_size * embed_dim],
            lstm: (0..direction.count())
                .map(|_| LstmParams::zeros(embed_dim, hidden))
                .collect(),
            w_out: vec![0.0; f * num_classes],
            b_out: vec![0.0; num_classes],
        }
    }

    pub fn zeros_like(&self) -> Self {
        Self::zeros(self.direction, self.vocab_size, self.embed_dim, self.hidden, self.num_classes)
    }

    pub fn feature_dim(&self) -> usize {
        self.hidden * self.direction.count()
    }

    pub fn embedding_row(&self, id: u32) -> &[f64] {
        let d = self.embed_dim;
        &self.embedding[id as usize * d..(id as usize + 1) * d]
    }

    /// `(name, rows, cols)` for every tensor, in storage order.
    pub fn tensor_specs(&self) -> Vec<(String, usize, usize)> {
        let (d, h) = (self.embed_dim, self.hidden);
        let mut specs = vec![("embedding".to_string(), self.vocab_size, d)];
        for dir in 0..self.lstm.len() {
            let p = if dir == 0 { "fwd" } else { "bwd" };
            for g in GATES {
                specs.push((format!("{p}.W_{g}"), d, h));
                specs.push((format!("{p}.U_{g}"), h, h));
                specs.push((format!("{p}.b_{g}"), 1, h));
            }
        }
        specs.push(("out.W".into(), self.feature_dim(), self.num_classes));
        specs.push(("out.b".into(), 1, self.num_classes));
        specs
    }

    pub fn tensors(&self) -> Vec<&[f64]> {
        let mut out: Vec<&[f64]> = vec![&self.embedding];
        for l in &self.lstm {
            for g in 0..4 {
                out.push(&l.w[g]);
                out.push(&l.u[g]);
                out.push(&l.b[g]);
            }
        }
        out.push(&self.w_out);
        out.push(&self.b_out);
        out
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut Vec<f64>> {
        let mut out = vec![&mut self.embedding];
        for l in &mut self.lstm {
            for ((w, u), b) in l.w.iter_mut().zip(l.u.iter_mut()).zip(l.b.iter_mut()) {
                out.push(w);
                out.push(u);
                out.push(b);
            }
        }
        out.push(&mut self.w_out);
        out.push(&mut self.b_out);
        out
    }

    pub fn num_params(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.tensors().iter().all(|t| t.iter().all(|v| v.is_finite()))
    }

    pub(crate) fn clear_pad_row(&mut self) {
        let d = self.embed_dim;
        let pad = PAD_ID as usize * d;
        self.embedding[pad..pad + d].fill(0.0);
    }
}

fn glorot(rng: &mut impl Rng, out: &mut [f64], fan_in: usize, fan_out: usize) {
    let a = (6.0 / (fan_in + fan_out) as f64).sqrt();
    for v in out {
        *v = rng.gen_range(-a..a);
    }
}

/// Random initialization. Draw order: embedding rows 1.., then per
/// direction and gate `W` then `U`, then the output matrix.
pub fn init_model(cfg: &TrainConfig, vocab_size: usize, num_classes: usize) -> Result<ModelParams> {
    cfg.validate()?;
    if vocab_size < 2 || num_classes < 2 {
        return Err(Error::invalid("a model needs at least 2 vocabulary ids and 2 classes"));
    }
    let (d, h) = (cfg.embed_dim, cfg.hidden);
    let mut m = ModelParams::zeros(cfg.direction, vocab_size, d, h, num_classes);
    let mut rng = seeded(derive_seed(cfg.seed, "init"));
    glorot(&mut rng, &mut m.embedding[d..], vocab_size, d);
    for l in &mut m.lstm {
        for g in 0..4 {
            glorot(&mut rng, &mut l.w[g], d, h);
            glorot(&mut rng, &mut l.u[g], h, h);
        }
        l.b[FORGET].fill(1.0);
    }
    let f = m.feature_dim();
    glorot(&mut rng, &mut m.w_out, f, num_classes);
    Ok(m)
}

/// Word vectors read from `token v1 ... vd` lines.
#[derive(Debug, Clone, PartialEq)]
pub struct PretrainedEmbeddings {
    pub dim: usize,
    pub vectors: HashMap<String, Vec<f64>>,
}

pub fn load_pretrained(path: impl AsRef<Path>) -> Result<PretrainedEmbeddings> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    PretrainedEmbeddings::parse(&text, path)
}

impl PretrainedEmbeddings {
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut dim = None;
        let mut vectors = HashMap::new();
        for (i, line) in text.lines().enumerate() {
            let mut parts = line.split_whitespace();
            let Some(token) = parts.next() else { continue };
            let err = |message: String| Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                message,
            };
            let v = parts
                .map(|p| p.parse::<f64>().map_err(|e| err(format!("bad value `{p}`: {e}"))))
                .collect::<Result<Vec<f64>>>()?;
            if v.is_empty() || v.iter().any(|x| !x.is_finite()) {
                return Err(err("expected finite values after the token".into()));
            }
            match dim {
                None => dim = Some(v.len()),
                Some(d) if d != v.len() => {
                    return Err(err(format!("expected {d} values, found {}", v.len())));
                }
                _ => {}
            }
            vectors.insert(token.to_owned(), v);
        }
        let dim = dim.ok_or_else(|| Error::Empty(format!("no vectors in {}", path.display())))?;
        Ok(Self { dim, vectors })
    }

    /// Copies vectors of in-vocabulary tokens into the embedding matrix and
    /// returns how many rows were replaced.
    pub fn apply(&self, model: &mut ModelParams, vocab: &Vocabulary) -> Result<usize> {
        if self.dim != model.embed_dim {
            return Err(Error::DimensionMismatch {
                expected: model.embed_dim,
                found: self.dim,
            });
        }
        if vocab.sequence_vocab_size() != model.vocab_size {
            return Err(Error::DimensionMismatch {
                expected: model.vocab_size,
                found: vocab.sequence_vocab_size(),
            });
        }
        let d = model.embed_dim;
        let mut copied = 0;
        for tok in vocab.tokens() {
            if let Some(v) = self.vectors.get(tok) {
                let row = vocab.sequence_id(tok) as usize * d;
                model.embedding[row..row + d].copy_from_slice(v);
                copied += 1;
            }
        }
        Ok(copied)
    }
}

/// Mean embedding of each row's real tokens (zero for empty rows).
pub fn mean_embeddings(model: &ModelParams, seqs: &SequenceBatch) -> Vec<Vec<f64>> {
    let d = model.embed_dim;
    (0..seqs.len())
        .map(|r| {
            let mut acc = vec![0.0; d];
            let mut n = 0usize;
            for (&id, &m) in seqs.row_ids(r).iter().zip(seqs.row_mask(r)) {
                if m == 1 {
                    n += 1;
                    for (a, e) in acc.iter_mut().zip(model.embedding_row(id)) {
                        *a += e;
                    }
                }
            }
            if n > 0 {
                acc.iter_mut().for_each(|a| *a /= n as f64);
            }
            acc
        })
        .collect()
}
