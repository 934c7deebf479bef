//! Cost-level imbalance handling: class weights, rare classes, per-class
//! keyword tables and keyword-presence sample reweighting.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::ClassHistogram;
use crate::error::{Error, Result};
use crate::features::{vectorize, FeatureMode, Vocabulary};
use crate::textprep::{normalize, PrepOptions, Preprocessor, TokenizedDocument};

/// Class → ordered keywords. Keywords may span several tokens.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeywordTable {
    entries: Vec<(String, Vec<String>)>,
}

impl KeywordTable {
    /// Appends keywords to a class, creating it if needed. Duplicates are
    /// ignored.
    pub fn insert(&mut self, class: impl Into<String>, keywords: impl IntoIterator<Item = String>) {
        let class = class.into();
        let pos = match self.entries.iter().position(|(c, _)| *c == class) {
            Some(p) => p,
            None => {
                self.entries.push((class, Vec::new()));
                self.entries.len() - 1
            }
        };
        let list = &mut self.entries[pos].1;
        for k in keywords {
            if !list.contains(&k) {
                list.push(k);
            }
        }
    }

    pub fn get(&self, class: &str) -> Option<&[String]> {
        self.entries
            .iter()
            .find(|(c, _)| c == class)
            .map(|(_, k)| k.as_slice())
    }

    pub fn classes(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(c, _)| c.as_str())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[String])> {
        self.entries.iter().map(|(c, k)| (c.as_str(), k.as_slice()))
    }

    pub fn is_empty(&self) -> bool {
        self.entries.iter().all(|(_, k)| k.is_empty())
    }

    /// Checks that every class is one of `labels`.
    pub fn validate(&self, labels: &[String]) -> Result<()> {
        for c in self.classes() {
            if !labels.iter().any(|l| l == c) {
                return Err(Error::UnknownLabel(c.to_owned()));
            }
        }
        Ok(())
    }

    /// Tab-separated `class<TAB>keyword` lines.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (c, kws) in self.iter() {
            for k in kws {
                out.push_str(c);
                out.push('\t');
                out.push_str(k);
                out.push('\n');
            }
        }
        out
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_tsv()).map_err(|e| Error::io(path, e))
    }
}

/// Reads a `class<TAB>keyword` file, normalizing each keyword with `opts`.
pub fn load_keyword_table(path: impl AsRef<Path>, opts: &PrepOptions) -> Result<KeywordTable> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_keyword_table(&text, path, opts)
}

pub fn parse_keyword_table(text: &str, path: &Path, opts: &PrepOptions) -> Result<KeywordTable> {
    let mut table = KeywordTable::default();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let parse_err = |message: &str| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            message: message.to_owned(),
        };
        let (class, keyword) = line
            .split_once('\t')
            .ok_or_else(|| parse_err("expected `class<TAB>keyword`"))?;
        let class = class.trim();
        let keyword = normalize(keyword, opts);
        if class.is_empty() || keyword.is_empty() {
            return Err(parse_err("empty class or keyword after normalization"));
        }
        table.insert(class, [keyword]);
    }
    Ok(table)
}

/// Classes with fewer than `threshold` samples, in histogram order.
pub fn rare_classes(hist: &ClassHistogram, threshold: usize) -> Vec<String> {
    hist.iter()
        .filter(|&(_, n)| n < threshold)
        .map(|(l, _)| l.to_owned())
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassWeighting {
    /// Every class weighs 1.
    Uniform,
    /// `N / (K * n_c)`.
    Balanced,
    /// The given weight for rare classes, 1 otherwise.
    RareBoost(f64),
}

/// Per-class weights aligned with `hist.labels()`.
pub fn class_weights(
    hist: &ClassHistogram,
    scheme: ClassWeighting,
    rare_threshold: usize,
) -> Result<Vec<f64>> {
    if let Some((label, _)) = hist.iter().find(|&(_, n)| n == 0) {
        return Err(Error::TooFewSamples {
            class: label.to_owned(),
            count: 0,
            required: 1,
        });
    }
    let n = hist.total() as f64;
    let k = hist.labels().len() as f64;
    Ok(match scheme {
        ClassWeighting::Uniform => vec![1.0; hist.labels().len()],
        ClassWeighting::Balanced => hist.counts().iter().map(|&c| n / (k * c as f64)).collect(),
        ClassWeighting::RareBoost(w) => {
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::invalid("rare-class boost must be positive"));
            }
            hist.counts()
                .iter()
                .map(|&c| if c < rare_threshold { w } else { 1.0 })
                .collect()
        }
    })
}

/// Complete sample weighting setup for one training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightScheme {
    pub labels: Vec<String>,
    pub class_weights: Vec<f64>,
    /// Multiplier for rare-class samples that contain one of their class's
    /// keywords. 1 disables keyword reweighting.
    pub keyword_factor: f64,
    pub rare_threshold: usize,
    pub rare: Vec<bool>,
}

impl WeightScheme {
    pub fn new(
        hist: &ClassHistogram,
        weighting: ClassWeighting,
        keyword_factor: f64,
        rare_threshold: usize,
    ) -> Result<Self> {
        if rare_threshold < 1 {
            return Err(Error::invalid("rare threshold must be at least 1"));
        }
        if !(keyword_factor >= 1.0 && keyword_factor.is_finite()) {
            return Err(Error::invalid("keyword factor must be >= 1"));
        }
        let class_weights = match weighting {
            // Uniform weights never fail, even with absent classes.
            ClassWeighting::Uniform => vec![1.0; hist.labels().len()],
            other => class_weights(hist, other, rare_threshold)?,
        };
        Ok(Self {
            labels: hist.labels().to_vec(),
            class_weights,
            keyword_factor,
            rare_threshold,
            rare: hist.counts().iter().map(|&c| c < rare_threshold).collect(),
        })
    }

    pub fn rare_classes(&self) -> Vec<String> {
        self.labels
            .iter()
            .zip(&self.rare)
            .filter(|(_, &r)| r)
            .map(|(l, _)| l.clone())
            .collect()
    }
}

/// Scores tokens per class by mean TF-IDF inside the class times
/// `ln(K / (1 + classes containing the token))`, and keeps the `top_k`
/// best tokens (score descending, token ascending) that occur in the class.
pub fn extract_class_keywords(
    docs: &[TokenizedDocument],
    vocab: &Vocabulary,
    top_k: usize,
    classes: &[String],
) -> Result<KeywordTable> {
    let labels: Vec<&str> = {
        let mut seen = HashSet::new();
        docs.iter()
            .map(|d| d.label.as_str())
            .filter(|l| seen.insert(*l))
            .collect()
    };
    let k_total = labels.len() as f64;
    let tfidf = vectorize(docs, vocab, FeatureMode::Tfidf);

    let mut class_sum: HashMap<&str, Vec<f64>> = HashMap::new();
    let mut class_docs: HashMap<&str, usize> = HashMap::new();
    let mut token_classes: Vec<HashSet<&str>> = vec![HashSet::new(); vocab.len()];
    for (i, d) in docs.iter().enumerate() {
        *class_docs.entry(&d.label).or_default() += 1;
        let sums = class_sum
            .entry(&d.label)
            .or_insert_with(|| vec![0.0; vocab.len()]);
        for &(c, v) in tfidf.row(i) {
            sums[c] += v;
            token_classes[c].insert(&d.label);
        }
    }

    let mut table = KeywordTable::default();
    for class in classes {
        let n = *class_docs
            .get(class.as_str())
            .ok_or_else(|| Error::TooFewSamples {
                class: class.clone(),
                count: 0,
                required: 1,
            })?;
        let sums = &class_sum[class.as_str()];
        let mut scored: Vec<(f64, &str)> = (0..vocab.len())
            .filter(|&t| token_classes[t].contains(class.as_str()))
            .map(|t| {
                let spread = (k_total / (1.0 + token_classes[t].len() as f64)).ln();
                (sums[t] / n as f64 * spread, vocab.tokens()[t].as_str())
            })
            .collect();
        scored.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(b.1)));
        table.insert(
            class.clone(),
            scored.into_iter().take(top_k).map(|(_, t)| t.to_owned()),
        );
    }
    Ok(table)
}

fn contains_run(tokens: &[String], run: &[String]) -> bool {
    !run.is_empty() && tokens.windows(run.len()).any(|w| w == run)
}

/// Keywords of each class as token runs, processed by the same pipeline
/// as the documents.
pub fn compile_keywords(kw: &KeywordTable, prep: &Preprocessor) -> HashMap<String, Vec<Vec<String>>> {
    kw.iter()
        .map(|(c, words)| {
            let runs = words
                .iter()
                .map(|w| prep.tokens(w))
                .filter(|r| !r.is_empty())
                .collect();
            (c.to_owned(), runs)
        })
        .collect()
}

/// Whether the document contains one of its own class's keywords as a
/// contiguous token run.
pub fn has_own_keyword(doc: &TokenizedDocument, compiled: &HashMap<String, Vec<Vec<String>>>) -> bool {
    compiled
        .get(&doc.label)
        .is_some_and(|runs| runs.iter().any(|r| contains_run(&doc.tokens, r)))
}

/// `class_weight[label] * f` for rare-class documents carrying one of
/// their own class's keywords, `class_weight[label]` otherwise.
pub fn sample_weights(
    docs: &[TokenizedDocument],
    scheme: &WeightScheme,
    kw: &KeywordTable,
    prep: &Preprocessor,
) -> Result<Vec<f64>> {
    let compiled = compile_keywords(kw, prep);
    docs.iter()
        .map(|d| {
            let c = scheme
                .labels
                .iter()
                .position(|l| *l == d.label)
                .ok_or_else(|| Error::UnknownLabel(d.label.clone()))?;
            let boost = scheme.keyword_factor != 1.0 && scheme.rare[c] && has_own_keyword(d, &compiled);
            Ok(scheme.class_weights[c] * if boost { scheme.keyword_factor } else { 1.0 })
        })
        .collect()
}
