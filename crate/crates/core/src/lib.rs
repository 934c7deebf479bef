//! Imbalanced multiclass text classification.
//!
//! The crate covers the whole pipeline used to route short free-text
//! questions to one of many heavily skewed classes:
//!
//! - [`corpus`]: corpus files, class histograms and a seeded Zipf corpus generator
//! - [`textprep`]: Arabic/Latin normalization, tokenization, stopwords, light stemming
//! - [`features`]: vocabulary, BoW / TF-IDF, padded id sequences, min-max scaling
//! - [`resample`]: random over/under-sampling, SMOTE, ADASYN, Tomek links
//! - [`weighting`]: class weights, rare classes, keyword tables and keyword reweighting
//! - [`seqmodel`]: a from-scratch LSTM / BiLSTM classifier trained with BPTT
//! - [`evalmetrics`]: stratified splits, K-fold, confusion matrices, PR curves
//!
//! Every random choice flows from an explicit `u64` seed; given the same
//! inputs and seed, every operation produces bit-identical output.

pub mod corpus;
pub mod error;
pub mod evalmetrics;
pub mod features;
pub mod resample;
pub mod rng;
pub mod seqmodel;
pub mod textprep;
pub mod weighting;

pub use corpus::{ClassHistogram, Corpus, Document, GenConfig, SyntheticCorpus};
pub use error::{Error, Result};
pub use evalmetrics::{ConfusionMatrix, MetricsReport};
pub use features::{FeatureMatrix, FeatureMode, Scaler, SequenceBatch, Vocabulary};
pub use resample::{Provenance, ResampleConfig, SyntheticSample, TargetStrategy, VectorDataset};
pub use seqmodel::{Direction, ModelParams, OptimizerKind, TrainConfig, TrainHistory};
pub use textprep::{PrepOptions, TokenizedDocument};
pub use weighting::{ClassWeighting, KeywordTable, WeightScheme};
