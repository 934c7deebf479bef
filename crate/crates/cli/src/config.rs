//! Experiment configuration (TOML).
//!
//! ```toml
//! seed = 7
//! out_dir = "runs/demo"
//! rare_threshold = 120
//!
//! [corpus.generate]          # or: [corpus] path = "data.jsonl"
//! num_classes = 12
//! total_docs = 6000
//!
//! [features]
//! max_len = 16
//!
//! [model]
//! direction = "bi"
//! hidden = [15]
//! embed_dim = 16
//!
//! [balance]
//! methods = ["none", "smote", "weighted", "keyword_factor:15"]
//!
//! [eval]
//! test_fraction = 0.2
//! ```

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use skewclass::seqmodel::{Direction, OptimizerKind, TrainConfig};
use skewclass::{ClassWeighting, FeatureMode, GenConfig, PrepOptions, TargetStrategy};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    /// Relative paths resolve against the config file's folder.
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    #[serde(default = "default_rare_threshold")]
    pub rare_threshold: usize,
    pub corpus: CorpusSource,
    #[serde(default)]
    pub prep: PrepConfig,
    #[serde(default)]
    pub features: FeatureConfig,
    #[serde(default)]
    pub model: ModelConfig,
    #[serde(default)]
    pub balance: BalanceConfig,
    #[serde(default)]
    pub eval: EvalConfig,
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("runs")
}

fn default_rare_threshold() -> usize {
    1000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusSource {
    /// JSONL corpus file; relative paths resolve against the config file.
    #[serde(default)]
    pub path: Option<PathBuf>,
    /// Synthetic corpus settings, used when `path` is absent.
    #[serde(default)]
    pub generate: Option<GenConfig>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PrepConfig {
    #[serde(flatten)]
    pub options: PrepOptions,
    /// Replaces the built-in stopword list.
    pub stopwords_file: Option<PathBuf>,
    pub drop_duplicates: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeatureConfig {
    /// Row representation for `neighbor_space = "features"`.
    pub mode: FeatureMode,
    pub min_df: usize,
    pub max_vocab: usize,
    pub max_len: usize,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            mode: FeatureMode::Tfidf,
            min_df: 1,
            max_vocab: 20_000,
            max_len: 128,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub direction: Direction,
    pub hidden: Vec<usize>,
    pub embed_dim: usize,
    pub optimizer: OptimizerKind,
    pub learning_rate: Option<f64>,
    pub max_epochs: usize,
    pub batch_size: usize,
    pub dropout: f64,
    pub patience: usize,
    pub clip_norm: f64,
    pub pretrained: Option<PathBuf>,
    pub save_models: bool,
}

impl Default for ModelConfig {
    fn default() -> Self {
        let t = TrainConfig::default();
        Self {
            direction: t.direction,
            hidden: vec![t.hidden],
            embed_dim: t.embed_dim,
            optimizer: t.optimizer,
            learning_rate: t.learning_rate,
            max_epochs: t.max_epochs,
            batch_size: t.batch_size,
            dropout: t.dropout,
            patience: t.patience,
            clip_norm: t.clip_norm,
            pretrained: None,
            save_models: true,
        }
    }
}

impl ModelConfig {
    pub fn train_config(&self, hidden: usize, seed: u64) -> TrainConfig {
        TrainConfig {
            direction: self.direction,
            hidden,
            embed_dim: self.embed_dim,
            optimizer: self.optimizer,
            learning_rate: self.learning_rate,
            max_epochs: self.max_epochs,
            batch_size: self.batch_size,
            dropout: self.dropout,
            patience: self.patience,
            clip_norm: self.clip_norm,
            seed,
        }
    }

    pub fn arch_name(&self) -> &'static str {
        match self.direction {
            Direction::Uni => "LSTM",
            Direction::Bi => "BILSTM",
        }
    }
}

/// Vector space used for nearest-neighbor search when resampling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NeighborSpace {
    /// Mean of the initial token embeddings; synthetic rows are fed to the
    /// model as blended embedding sequences.
    Embedding,
    /// Min-max scaled BoW / TF-IDF rows. Synthetic rows still reach the
    /// model as blended sequences of their base and neighbor documents.
    Features,
}

/// Where keyword tables come from for keyword-factor cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum KeywordSource {
    /// Scored from the training portion.
    Extract,
    /// The generator's injected keywords (synthetic corpora only).
    Generator,
    /// A `class<TAB>keyword` file.
    File(PathBuf),
}

impl FromStr for KeywordSource {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "extract" => Ok(Self::Extract),
            "generator" => Ok(Self::Generator),
            _ => s
                .strip_prefix("file:")
                .filter(|p| !p.is_empty())
                .map(|p| Self::File(PathBuf::from(p)))
                .ok_or_else(|| format!("unknown keyword source `{s}`")),
        }
    }
}

impl fmt::Display for KeywordSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Extract => f.write_str("extract"),
            Self::Generator => f.write_str("generator"),
            Self::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BalanceConfig {
    pub methods: Vec<Method>,
    pub k_neighbors: usize,
    pub target: TargetStrategy,
    pub adasyn_beta: f64,
    pub neighbor_space: NeighborSpace,
    #[serde(with = "display_fromstr")]
    pub keyword_source: KeywordSource,
    pub keyword_top_k: usize,
}

impl Default for BalanceConfig {
    fn default() -> Self {
        Self {
            methods: vec![Method::None],
            k_neighbors: 5,
            target: TargetStrategy::ToMax,
            adasyn_beta: 1.0,
            neighbor_space: NeighborSpace::Embedding,
            keyword_source: KeywordSource::Extract,
            keyword_top_k: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    pub test_fraction: f64,
    /// Share of the training portion held out for early stopping.
    pub val_fraction: f64,
    /// Fold count for the `cv` subcommand.
    pub folds: usize,
    /// Scores of these classes are written as PR-curve tables.
    pub pr_curves: bool,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            test_fraction: 0.2,
            val_fraction: 0.2,
            folds: 5,
            pr_curves: false,
        }
    }
}

/// One balancing method per run entry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    None,
    RandOver,
    RandUnder,
    Smote,
    Adasyn,
    Tomek,
    SmoteTomek,
    Weighted(ClassWeighting),
    KeywordFactor(f64),
}

impl Method {
    /// Row label in summary tables.
    pub fn label(&self) -> String {
        match self {
            Method::None => "imbalanced".into(),
            Method::RandOver => "RandomOver".into(),
            Method::RandUnder => "RandomUnder".into(),
            Method::Smote => "SMOTE".into(),
            Method::Adasyn => "ADASYN".into(),
            Method::Tomek => "Tomek".into(),
            Method::SmoteTomek => "SMOTE+Tomek".into(),
            Method::Weighted(ClassWeighting::RareBoost(w)) => format!("Weighted rare x{}", fmt_num(*w)),
            Method::Weighted(_) => "Weighted".into(),
            Method::KeywordFactor(f) => format!("Factor {}", fmt_num(*f)),
        }
    }

    /// Filesystem-safe identifier, also hashed into the cell seed.
    pub fn slug(&self) -> String {
        self.to_string().replace([':', '.'], "_")
    }

    pub fn is_resampling(&self) -> bool {
        matches!(
            self,
            Method::RandOver | Method::RandUnder | Method::Smote | Method::Adasyn | Method::Tomek | Method::SmoteTomek
        )
    }
}

fn fmt_num(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::None => f.write_str("none"),
            Method::RandOver => f.write_str("rand_over"),
            Method::RandUnder => f.write_str("rand_under"),
            Method::Smote => f.write_str("smote"),
            Method::Adasyn => f.write_str("adasyn"),
            Method::Tomek => f.write_str("tomek"),
            Method::SmoteTomek => f.write_str("smote_tomek"),
            Method::Weighted(ClassWeighting::Balanced) => f.write_str("weighted:balanced"),
            Method::Weighted(ClassWeighting::Uniform) => f.write_str("weighted:uniform"),
            Method::Weighted(ClassWeighting::RareBoost(w)) => write!(f, "weighted:rare_boost:{}", fmt_num(*w)),
            Method::KeywordFactor(x) => write!(f, "keyword_factor:{}", fmt_num(*x)),
        }
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let num = |v: &str| {
            v.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| format!("bad number `{v}` in method `{s}`"))
        };
        let m = match s.trim().to_ascii_lowercase().as_str() {
            "none" | "imbalanced" => Method::None,
            "rand_over" => Method::RandOver,
            "rand_under" => Method::RandUnder,
            "smote" => Method::Smote,
            "adasyn" => Method::Adasyn,
            "tomek" => Method::Tomek,
            "smote_tomek" => Method::SmoteTomek,
            "weighted" | "weighted:balanced" => Method::Weighted(ClassWeighting::Balanced),
            "weighted:uniform" => Method::Weighted(ClassWeighting::Uniform),
            other => {
                if let Some(w) = other.strip_prefix("weighted:rare_boost:") {
                    Method::Weighted(ClassWeighting::RareBoost(num(w)?))
                } else if let Some(f) = other.strip_prefix("keyword_factor:") {
                    let f = num(f)?;
                    if f < 1.0 {
                        return Err(format!("keyword factor must be >= 1 in `{s}`"));
                    }
                    Method::KeywordFactor(f)
                } else {
                    return Err(format!("unknown balancing method `{s}`"));
                }
            }
        };
        Ok(m)
    }
}

impl Serialize for Method {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Method {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

mod display_fromstr {
    use std::fmt::Display;
    use std::str::FromStr;

    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<T: Display, S: Serializer>(v: &T, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(v)
    }

    pub fn deserialize<'de, T, D>(d: D) -> Result<T, D::Error>
    where
        T: FromStr<Err = String>,
        D: Deserializer<'de>,
    {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config file and resolves relative paths against its folder.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new(""));
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut cfg.out_dir);
        if let Some(p) = cfg.corpus.path.as_mut() {
            fix(p);
        }
        if let Some(p) = cfg.prep.stopwords_file.as_mut() {
            fix(p);
        }
        if let Some(p) = cfg.model.pretrained.as_mut() {
            fix(p);
        }
        if let KeywordSource::File(p) = &mut cfg.balance.keyword_source {
            fix(p);
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: &str| Err(CliError::Config(m.to_owned()));
        match (&self.corpus.path, &self.corpus.generate) {
            (Some(_), Some(_)) => return bad("corpus: give either `path` or `generate`, not both"),
            (None, None) => return bad("corpus: one of `path` or `generate` is required"),
            (None, Some(g)) => g.validate().map_err(|e| CliError::Config(e.to_string()))?,
            _ => {}
        }
        if self.rare_threshold < 1 {
            return bad("rare_threshold must be at least 1");
        }
        if self.features.min_df < 1 || self.features.max_vocab < 1 || self.features.max_len < 1 {
            return bad("features: min_df, max_vocab and max_len must be at least 1");
        }
        if self.model.hidden.is_empty() {
            return bad("model.hidden needs at least one value");
        }
        for &h in &self.model.hidden {
            self.model
                .train_config(h, 0)
                .validate()
                .map_err(|e| CliError::Config(e.to_string()))?;
        }
        if self.balance.methods.is_empty() {
            return bad("balance.methods needs at least one method");
        }
        let mut seen = std::collections::HashSet::new();
        for m in &self.balance.methods {
            if !seen.insert(m.to_string()) {
                return Err(CliError::Config(format!("balance.methods lists `{m}` twice")));
            }
        }
        if self.balance.keyword_source == KeywordSource::Generator && self.corpus.generate.is_none() {
            let uses_keywords = self.balance.methods.iter().any(|m| matches!(m, Method::KeywordFactor(_)));
            if uses_keywords {
                return bad("keyword_source = \"generator\" needs a generated corpus");
            }
        }
        skewclass::ResampleConfig {
            k_neighbors: self.balance.k_neighbors,
            target: self.balance.target,
            adasyn_beta: self.balance.adasyn_beta,
            seed: 0,
        }
        .validate()
        .map_err(|e| CliError::Config(e.to_string()))?;
        if self.balance.keyword_top_k < 1 {
            return bad("balance.keyword_top_k must be at least 1");
        }
        for (name, f) in [
            ("eval.test_fraction", self.eval.test_fraction),
            ("eval.val_fraction", self.eval.val_fraction),
        ] {
            if !(f > 0.0 && f < 1.0) {
                return Err(CliError::Config(format!("{name} must be in (0, 1)")));
            }
        }
        if self.eval.folds < 2 {
            return bad("eval.folds must be at least 2");
        }
        Ok(())
    }
}
