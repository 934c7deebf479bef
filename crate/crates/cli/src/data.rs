//! Corpus loading and the train / validation / test index plan.

use serde::{Deserialize, Serialize};
use skewclass::corpus::{generate_synthetic_corpus, load_corpus};
use skewclass::evalmetrics::{stratified_kfold, stratified_split};
use skewclass::rng::derive_seed;
use skewclass::textprep::{load_stopwords, preprocess_corpus, remove_exact_duplicates, Preprocessor};
use skewclass::{Corpus, KeywordTable, TokenizedDocument};

use crate::config::ExperimentConfig;
use crate::Result;

/// Cleaned documents with their class indices.
#[derive(Debug, Clone)]
pub struct PreparedData {
    pub labels: Vec<String>,
    pub docs: Vec<TokenizedDocument>,
    pub y: Vec<usize>,
    pub prep: Preprocessor,
    /// Injected keywords when the corpus was generated.
    pub generator_keywords: Option<KeywordTable>,
    pub empty_documents: usize,
    pub duplicates_removed: usize,
}

pub fn load_corpus_source(cfg: &ExperimentConfig) -> Result<(Corpus, Option<KeywordTable>)> {
    match (&cfg.corpus.path, &cfg.corpus.generate) {
        (Some(path), _) => Ok((load_corpus(path)?, None)),
        (None, Some(gen)) => {
            let g = generate_synthetic_corpus(gen)?;
            Ok((g.corpus, Some(g.keywords)))
        }
        (None, None) => Err(crate::CliError::Config("no corpus source".into())),
    }
}

pub fn load_data(cfg: &ExperimentConfig) -> Result<PreparedData> {
    let (corpus, generator_keywords) = load_corpus_source(cfg)?;
    let mut opts = cfg.prep.options.clone();
    if let Some(path) = &cfg.prep.stopwords_file {
        opts.stopwords = load_stopwords(path)?;
    }
    let pre = preprocess_corpus(&corpus, &opts);
    let (docs, duplicates_removed) = if cfg.prep.drop_duplicates {
        remove_exact_duplicates(pre.documents)
    } else {
        (pre.documents, 0)
    };
    let labels = corpus.labels().to_vec();
    let y = docs
        .iter()
        .map(|d| labels.iter().position(|l| *l == d.label).expect("label from corpus"))
        .collect();
    Ok(PreparedData {
        labels,
        docs,
        y,
        prep: Preprocessor::new(opts),
        generator_keywords,
        empty_documents: pre.empty_documents,
        duplicates_removed,
    })
}

/// Document indices for one evaluation round. `fit` trains the model,
/// `val` drives early stopping, `test` is only scored.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub fit: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
    pub warnings: Vec<String>,
}

impl SplitPlan {
    /// `fit` and `val` together, sorted.
    pub fn training(&self) -> Vec<usize> {
        let mut all = [self.fit.as_slice(), self.val.as_slice()].concat();
        all.sort_unstable();
        all
    }
}

fn carve_validation(y: &[usize], train: Vec<usize>, test: Vec<usize>, frac: f64, seed: u64) -> Result<SplitPlan> {
    let sub: Vec<usize> = train.iter().map(|&i| y[i]).collect();
    let inner = stratified_split(&sub, frac, seed)?;
    Ok(SplitPlan {
        fit: inner.train.iter().map(|&i| train[i]).collect(),
        val: inner.test.iter().map(|&i| train[i]).collect(),
        test,
        warnings: inner.warnings,
    })
}

/// Stratified test split, then a stratified validation split of the rest.
pub fn plan_split(y: &[usize], cfg: &ExperimentConfig) -> Result<SplitPlan> {
    let outer = stratified_split(y, cfg.eval.test_fraction, derive_seed(cfg.seed, "split"))?;
    let mut plan = carve_validation(
        y,
        outer.train,
        outer.test,
        cfg.eval.val_fraction,
        derive_seed(cfg.seed, "val"),
    )?;
    let mut warnings = outer.warnings;
    warnings.append(&mut plan.warnings);
    plan.warnings = warnings;
    Ok(plan)
}

/// One plan per stratified fold.
pub fn plan_folds(y: &[usize], cfg: &ExperimentConfig) -> Result<Vec<SplitPlan>> {
    let (folds, warnings) = stratified_kfold(y, cfg.eval.folds, derive_seed(cfg.seed, "folds"))?;
    folds
        .into_iter()
        .enumerate()
        .map(|(f, fold)| {
            let mut plan = carve_validation(
                y,
                fold.train,
                fold.test,
                cfg.eval.val_fraction,
                derive_seed(cfg.seed, &format!("val{f}")),
            )?;
            plan.warnings.splice(0..0, warnings.iter().cloned());
            Ok(plan)
        })
        .collect()
}
