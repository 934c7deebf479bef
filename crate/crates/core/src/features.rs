//! Vocabulary, bag-of-words / TF-IDF vectors, padded id sequences and
//! min-max scaling.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::textprep::TokenizedDocument;

/// Sequence id reserved for padding.
pub const PAD_ID: u32 = 0;
/// Sequence id for tokens outside the vocabulary.
pub const OOV_ID: u32 = 1;
const SEQ_OFFSET: u32 = 2;

/// Token index fitted on a set of documents.
///
/// Feature columns use indices `0..len()`. Sequence ids shift those by two
/// so that `0` is padding and `1` is out-of-vocabulary.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "VocabularyParts", into = "VocabularyParts")]
pub struct Vocabulary {
    tokens: Vec<String>,
    df: Vec<usize>,
    n_fit: usize,
    index: HashMap<String, usize>,
}

#[derive(Serialize, Deserialize)]
struct VocabularyParts {
    tokens: Vec<String>,
    df: Vec<usize>,
    n_fit: usize,
}

impl TryFrom<VocabularyParts> for Vocabulary {
    type Error = Error;

    fn try_from(p: VocabularyParts) -> Result<Self> {
        Vocabulary::from_parts(p.tokens, p.df, p.n_fit)
    }
}

impl From<Vocabulary> for VocabularyParts {
    fn from(v: Vocabulary) -> Self {
        VocabularyParts {
            tokens: v.tokens,
            df: v.df,
            n_fit: v.n_fit,
        }
    }
}

impl Vocabulary {
    /// Rebuilds a vocabulary from its parts (e.g. when loading a model).
    pub fn from_parts(tokens: Vec<String>, df: Vec<usize>, n_fit: usize) -> Result<Self> {
        if tokens.len() != df.len() {
            return Err(Error::DimensionMismatch {
                expected: tokens.len(),
                found: df.len(),
            });
        }
        let index: HashMap<String, usize> = tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        if index.len() != tokens.len() {
            return Err(Error::invalid("vocabulary tokens must be unique"));
        }
        if df.iter().any(|&d| d > n_fit) {
            return Err(Error::invalid("document frequency exceeds fitted document count"));
        }
        Ok(Self {
            tokens,
            df,
            n_fit,
            index,
        })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn document_frequencies(&self) -> &[usize] {
        &self.df
    }

    pub fn n_fit(&self) -> usize {
        self.n_fit
    }

    pub fn feature_index(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn df(&self, token: &str) -> Option<usize> {
        self.feature_index(token).map(|i| self.df[i])
    }

    /// Sequence id of a token: `OOV_ID` when unknown.
    pub fn sequence_id(&self, token: &str) -> u32 {
        self.feature_index(token)
            .map_or(OOV_ID, |i| i as u32 + SEQ_OFFSET)
    }

    /// Number of distinct sequence ids, including PAD and OOV.
    pub fn sequence_vocab_size(&self) -> usize {
        self.tokens.len() + SEQ_OFFSET as usize
    }

    /// Token for a sequence id, `None` for PAD / OOV / out of range.
    pub fn sequence_token(&self, id: u32) -> Option<&str> {
        id.checked_sub(SEQ_OFFSET)
            .and_then(|i| self.tokens.get(i as usize))
            .map(String::as_str)
    }

    /// Smoothed inverse document frequency: `ln((1 + N) / (1 + df)) + 1`.
    pub fn idf(&self, feature: usize) -> f64 {
        ((1.0 + self.n_fit as f64) / (1.0 + self.df[feature] as f64)).ln() + 1.0
    }
}

/// Keeps tokens with `df >= min_df`, ranked by df descending then token
/// ascending, truncated to `max_size`.
pub fn build_vocabulary(
    docs: &[TokenizedDocument],
    min_df: usize,
    max_size: usize,
) -> Result<Vocabulary> {
    if docs.is_empty() {
        return Err(Error::Empty("cannot build a vocabulary from zero documents".into()));
    }
    if min_df < 1 {
        return Err(Error::invalid("min_df must be at least 1"));
    }
    let mut df: HashMap<&str, usize> = HashMap::new();
    for d in docs {
        let unique: HashSet<&str> = d.tokens.iter().map(String::as_str).collect();
        for t in unique {
            *df.entry(t).or_default() += 1;
        }
    }
    let mut ranked: Vec<(&str, usize)> = df.into_iter().filter(|&(_, n)| n >= min_df).collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    ranked.truncate(max_size);
    let (tokens, dfs): (Vec<String>, Vec<usize>) =
        ranked.into_iter().map(|(t, n)| (t.to_owned(), n)).unzip();
    Vocabulary::from_parts(tokens, dfs, docs.len())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureMode {
    Bow,
    Tfidf,
}

/// Sparse document-term matrix. Each row holds `(column, value)` pairs
/// sorted by column; omitted columns are zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    pub mode: FeatureMode,
    /// Set once min-max scaling has been applied; scaled test rows may fall
    /// outside `[0, 1]`.
    pub scaled: bool,
    n_cols: usize,
    rows: Vec<Vec<(usize, f64)>>,
}

impl FeatureMatrix {
    pub fn from_rows(mode: FeatureMode, n_cols: usize, rows: Vec<Vec<(usize, f64)>>) -> Result<Self> {
        for row in &rows {
            if let Some(&(c, _)) = row.iter().find(|(c, _)| *c >= n_cols) {
                return Err(Error::DimensionMismatch {
                    expected: n_cols,
                    found: c + 1,
                });
            }
            if row.windows(2).any(|w| w[0].0 >= w[1].0) {
                return Err(Error::invalid("feature row columns must be strictly increasing"));
            }
        }
        Ok(Self {
            mode,
            scaled: false,
            n_cols,
            rows,
        })
    }

    /// Dense input, zeros dropped.
    pub fn from_dense(mode: FeatureMode, dense: &[Vec<f64>]) -> Result<Self> {
        let n_cols = dense.first().map_or(0, Vec::len);
        let mut rows = Vec::with_capacity(dense.len());
        for r in dense {
            if r.len() != n_cols {
                return Err(Error::DimensionMismatch {
                    expected: n_cols,
                    found: r.len(),
                });
            }
            rows.push(
                r.iter()
                    .enumerate()
                    .filter(|(_, v)| **v != 0.0)
                    .map(|(c, v)| (c, *v))
                    .collect(),
            );
        }
        Self::from_rows(mode, n_cols, rows)
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[Vec<(usize, f64)>] {
        &self.rows
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        let r = &self.rows[row];
        r.binary_search_by_key(&col, |(c, _)| *c)
            .map_or(0.0, |i| r[i].1)
    }

    pub fn dense_row(&self, i: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.n_cols];
        for &(c, v) in &self.rows[i] {
            out[c] = v;
        }
        out
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        (0..self.n_rows()).map(|i| self.dense_row(i)).collect()
    }
}

pub fn vectorize(docs: &[TokenizedDocument], vocab: &Vocabulary, mode: FeatureMode) -> FeatureMatrix {
    let rows = docs
        .iter()
        .map(|d| {
            let mut counts: HashMap<usize, f64> = HashMap::new();
            for t in &d.tokens {
                if let Some(i) = vocab.feature_index(t) {
                    *counts.entry(i).or_default() += 1.0;
                }
            }
            let mut row: Vec<(usize, f64)> = counts.into_iter().collect();
            row.sort_by_key(|(c, _)| *c);
            if mode == FeatureMode::Tfidf {
                for (c, v) in row.iter_mut() {
                    *v *= vocab.idf(*c);
                }
                let norm = row.iter().map(|(_, v)| v * v).sum::<f64>().sqrt();
                if norm > 0.0 {
                    for (_, v) in row.iter_mut() {
                        *v /= norm;
                    }
                }
            }
            row
        })
        .collect();
    FeatureMatrix {
        mode,
        scaled: false,
        n_cols: vocab.len(),
        rows,
    }
}

/// Right-padded token-id matrix with its mask and class labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SequenceBatch {
    pub max_len: usize,
    /// Row-major `len() x max_len`.
    pub ids: Vec<u32>,
    /// 1 at real-token positions, 0 at padding.
    pub mask: Vec<u8>,
    pub labels: Vec<usize>,
}

impl SequenceBatch {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn row_ids(&self, i: usize) -> &[u32] {
        &self.ids[i * self.max_len..(i + 1) * self.max_len]
    }

    pub fn row_mask(&self, i: usize) -> &[u8] {
        &self.mask[i * self.max_len..(i + 1) * self.max_len]
    }

    /// Number of real tokens in row `i`.
    pub fn row_len(&self, i: usize) -> usize {
        self.row_mask(i).iter().filter(|&&m| m != 0).count()
    }

    pub fn select(&self, rows: &[usize]) -> SequenceBatch {
        let mut out = SequenceBatch {
            max_len: self.max_len,
            ids: Vec::with_capacity(rows.len() * self.max_len),
            mask: Vec::with_capacity(rows.len() * self.max_len),
            labels: Vec::with_capacity(rows.len()),
        };
        for &r in rows {
            out.ids.extend_from_slice(self.row_ids(r));
            out.mask.extend_from_slice(self.row_mask(r));
            out.labels.push(self.labels[r]);
        }
        out
    }

    /// A batch from unpadded id rows (each truncated to `max_len`).
    pub fn from_rows(rows: &[Vec<u32>], labels: Vec<usize>, max_len: usize) -> Self {
        let mut ids = vec![PAD_ID; rows.len() * max_len];
        let mut mask = vec![0u8; rows.len() * max_len];
        for (i, r) in rows.iter().enumerate() {
            for (t, &id) in r.iter().take(max_len).enumerate() {
                ids[i * max_len + t] = id;
                mask[i * max_len + t] = 1;
            }
        }
        Self {
            max_len,
            ids,
            mask,
            labels,
        }
    }
}

/// Maps the first `max_len` tokens of each document to sequence ids and pads
/// on the right. Labels are resolved against `labels`.
pub fn encode_sequences(
    docs: &[TokenizedDocument],
    vocab: &Vocabulary,
    max_len: usize,
    labels: &[String],
) -> Result<SequenceBatch> {
    if max_len < 1 {
        return Err(Error::invalid("sequence length must be at least 1"));
    }
    let label_index: HashMap<&str, usize> = labels
        .iter()
        .enumerate()
        .map(|(i, l)| (l.as_str(), i))
        .collect();
    let mut rows = Vec::with_capacity(docs.len());
    let mut ys = Vec::with_capacity(docs.len());
    for d in docs {
        let y = *label_index
            .get(d.label.as_str())
            .ok_or_else(|| Error::UnknownLabel(d.label.clone()))?;
        rows.push(
            d.tokens
                .iter()
                .take(max_len)
                .map(|t| vocab.sequence_id(t))
                .collect::<Vec<_>>(),
        );
        ys.push(y);
    }
    Ok(SequenceBatch::from_rows(&rows, ys, max_len))
}

/// Per-feature minimum and maximum learned from training rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

/// Fits per-column min / max over the training rows, counting implicit
/// zeros of the sparse representation.
pub fn minmax_fit(train: &FeatureMatrix) -> Result<Scaler> {
    if train.n_rows() == 0 {
        return Err(Error::Empty("min-max fit needs at least one row".into()));
    }
    let n = train.n_cols();
    let mut min = vec![f64::INFINITY; n];
    let mut max = vec![f64::NEG_INFINITY; n];
    let mut nnz = vec![0usize; n];
    for row in train.rows() {
        for &(c, v) in row {
            min[c] = min[c].min(v);
            max[c] = max[c].max(v);
            nnz[c] += 1;
        }
    }
    for c in 0..n {
        if nnz[c] < train.n_rows() {
            min[c] = min[c].min(0.0);
            max[c] = max[c].max(0.0);
        }
    }
    Ok(Scaler { min, max })
}

/// `(x - min) / (max - min)`, `0` for constant features. Values outside the
/// training range are not clipped.
pub fn minmax_transform(scaler: &Scaler, m: &FeatureMatrix) -> Result<FeatureMatrix> {
    if scaler.min.len() != m.n_cols() {
        return Err(Error::DimensionMismatch {
            expected: scaler.min.len(),
            found: m.n_cols(),
        });
    }
    let scale = |c: usize, x: f64| {
        let span = scaler.max[c] - scaler.min[c];
        if span > 0.0 {
            (x - scaler.min[c]) / span
        } else {
            0.0
        }
    };
    // Columns where an implicit zero maps to something non-zero.
    let shifted: Vec<usize> = (0..m.n_cols()).filter(|&c| scale(c, 0.0) != 0.0).collect();
    let rows = m
        .rows()
        .iter()
        .map(|row| {
            let mut out: Vec<(usize, f64)> = row.iter().map(|&(c, v)| (c, scale(c, v))).collect();
            if !shifted.is_empty() {
                let present: HashSet<usize> = row.iter().map(|(c, _)| *c).collect();
                out.extend(
                    shifted
                        .iter()
                        .filter(|c| !present.contains(c))
                        .map(|&c| (c, scale(c, 0.0))),
                );
                out.sort_by_key(|(c, _)| *c);
            }
            out.retain(|(_, v)| *v != 0.0);
            out
        })
        .collect();
    Ok(FeatureMatrix {
        mode: m.mode,
        scaled: true,
        n_cols: m.n_cols(),
        rows,
    })
}
