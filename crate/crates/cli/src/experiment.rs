//! The experiment grid.
//!
//! Output tree of `run_experiment` and `run_cv`:
//!
//! ```text
//! out_dir/
//!   config.toml            resolved config snapshot
//!   split.json             document indices of each fit / val / test plan
//!   summary.tsv            model  precision  recall  f1  accuracy
//!   summary.txt            same, rounded to 3 decimals
//!   rare.tsv / rare.txt    baseline and keyword-factor rows over rare classes
//!   summary.json           tables plus the cell index used by `report`
//!   run.log                structured events with timings
//!   cells/<slug>/
//!     report.json          full and rare-class metrics
//!     confusion.json       confusion matrix (merged over folds in CV)
//!     history.json         one training history per fold
//!     examples.tsv         the balanced training rows (single split only)
//!     model.spdm           trained model (single split only)
//!     pr/<class>.tsv       PR curve points, when enabled
//! ```

use std::collections::HashSet;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use skewclass::corpus::ClassHistogram;
use skewclass::evalmetrics::{confusion_matrix, metrics_report, pr_curve, rare_class_report, ConfusionMatrix};
use skewclass::features::{build_vocabulary, encode_sequences, minmax_fit, minmax_transform, vectorize};
use skewclass::resample::{adasyn, random_oversample, random_undersample, smote, smote_tomek, tomek_links};
use skewclass::rng::derive_seed;
use skewclass::seqmodel::{
    init_model, load_model, load_pretrained, mean_embeddings, predict, save_model, train, Example, ModelArtifact,
    SeqInput, TrainData, TrainHistory,
};
use skewclass::weighting::{extract_class_keywords, load_keyword_table, rare_classes, sample_weights};
use skewclass::{
    ClassWeighting, KeywordTable, MetricsReport, ModelParams, Provenance, ResampleConfig, SequenceBatch,
    VectorDataset, Vocabulary, WeightScheme,
};

use crate::config::{ExperimentConfig, KeywordSource, Method, NeighborSpace};
use crate::data::{load_data, plan_folds, plan_split, PreparedData, SplitPlan};
use crate::report::{render_tables, SummaryRow, Tables};
use crate::runlog::RunLog;
use crate::{read_json, write_file, write_json, CliError, Result};

/// One `(hidden, method)` cell of the grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSpec {
    /// Row label, e.g. `BILSTM 15 SMOTE`.
    pub name: String,
    /// Output subdirectory under `cells/`.
    pub slug: String,
    pub hidden: usize,
    pub method: Method,
}

/// Cells grouped by hidden size, methods in config order.
pub fn cell_specs(cfg: &ExperimentConfig) -> Vec<CellSpec> {
    let arch = cfg.model.arch_name();
    cfg.model
        .hidden
        .iter()
        .flat_map(|&h| {
            cfg.balance.methods.iter().map(move |m| CellSpec {
                name: format!("{arch} {h} {}", m.label()),
                slug: format!("h{h}_{}", m.slug()),
                hidden: h,
                method: *m,
            })
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct CellResult {
    pub spec: CellSpec,
    pub confusion: ConfusionMatrix,
    pub report: MetricsReport,
    pub rare_report: Option<MetricsReport>,
    pub histories: Vec<TrainHistory>,
    /// Training rows summed over folds.
    pub train_examples: usize,
    pub synthetic_examples: usize,
    pub duration: Duration,
    pub artifact: Option<PathBuf>,
}

#[derive(Debug)]
pub struct CellOutcome {
    pub spec: CellSpec,
    pub result: std::result::Result<CellResult, String>,
}

#[derive(Debug)]
pub struct RunRecord {
    pub config: ExperimentConfig,
    pub labels: Vec<String>,
    pub rare_classes: Vec<String>,
    pub cells: Vec<CellOutcome>,
    pub tables: Tables,
}

impl RunRecord {
    pub fn failed(&self) -> usize {
        self.cells.iter().filter(|c| c.result.is_err()).count()
    }

    pub fn result(&self, name: &str) -> Option<&CellResult> {
        self.cells
            .iter()
            .find(|c| c.spec.name == name)
            .and_then(|c| c.result.as_ref().ok())
    }

    pub fn results(&self) -> impl Iterator<Item = &CellResult> {
        self.cells.iter().filter_map(|c| c.result.as_ref().ok())
    }

    /// `Err(CellsFailed)` when any cell failed.
    pub fn check(&self) -> Result<()> {
        match self.failed() {
            0 => Ok(()),
            failed => Err(CliError::CellsFailed {
                failed,
                total: self.cells.len(),
            }),
        }
    }
}

/// Everything derived from one split plan and shared by all cells.
pub struct SplitContext<'a> {
    pub data: &'a PreparedData,
    pub plan: SplitPlan,
    /// Fitted on the `fit` documents only.
    pub vocab: Vocabulary,
    /// Every document, indexed like `data.docs`.
    pub seqs: SequenceBatch,
    /// Class counts over `fit` and `val`.
    pub train_hist: ClassHistogram,
    pub rare: Vec<String>,
}

impl<'a> SplitContext<'a> {
    pub fn new(cfg: &ExperimentConfig, data: &'a PreparedData, plan: SplitPlan) -> Result<Self> {
        let fit_docs: Vec<_> = plan.fit.iter().map(|&i| data.docs[i].clone()).collect();
        let vocab = build_vocabulary(&fit_docs, cfg.features.min_df, cfg.features.max_vocab)?;
        let seqs = encode_sequences(&data.docs, &vocab, cfg.features.max_len, &data.labels)?;
        let train_hist = ClassHistogram::from_indices(&data.labels, plan.training().iter().map(|&i| data.y[i]));
        let rare = rare_classes(&train_hist, cfg.rare_threshold);
        Ok(Self {
            data,
            plan,
            vocab,
            seqs,
            train_hist,
            rare,
        })
    }

    fn fit_docs(&self) -> Vec<skewclass::TokenizedDocument> {
        self.plan.fit.iter().map(|&i| self.data.docs[i].clone()).collect()
    }
}

fn resample_config(cfg: &ExperimentConfig, seed: u64) -> ResampleConfig {
    ResampleConfig {
        k_neighbors: cfg.balance.k_neighbors,
        target: cfg.balance.target,
        adasyn_beta: cfg.balance.adasyn_beta,
        seed: derive_seed(seed, "resample"),
    }
}

/// The fit rows as vectors whose provenance sources are document indices.
pub fn fit_vectors(cfg: &ExperimentConfig, ctx: &SplitContext<'_>, model: &ModelParams) -> Result<VectorDataset> {
    let rows = match cfg.balance.neighbor_space {
        NeighborSpace::Embedding => mean_embeddings(model, &ctx.seqs.select(&ctx.plan.fit)),
        NeighborSpace::Features => {
            let m = vectorize(&ctx.fit_docs(), &ctx.vocab, cfg.features.mode);
            let scaler = minmax_fit(&m)?;
            minmax_transform(&scaler, &m)?.to_dense()
        }
    };
    let labels = ctx.plan.fit.iter().map(|&i| ctx.data.y[i]).collect();
    Ok(VectorDataset::with_sources(
        rows,
        labels,
        ctx.plan.fit.clone(),
        ctx.data.labels.clone(),
    )?)
}

/// Applies a resampling method to the fit rows.
pub fn resample_fit(
    cfg: &ExperimentConfig,
    ctx: &SplitContext<'_>,
    method: Method,
    model: &ModelParams,
    seed: u64,
) -> Result<VectorDataset> {
    let ds = fit_vectors(cfg, ctx, model)?;
    let rc = resample_config(cfg, seed);
    let out = match method {
        Method::RandOver => random_oversample(&ds, &rc)?,
        Method::RandUnder => random_undersample(&ds, &rc)?,
        Method::Smote => smote(&ds, &rc)?.0,
        Method::Adasyn => adasyn(&ds, &rc)?.0,
        Method::Tomek => tomek_links(&ds)?.0,
        Method::SmoteTomek => smote_tomek(&ds, &rc)?,
        other => return Err(CliError::Config(format!("`{other}` is not a resampling method"))),
    };
    Ok(out)
}

fn keyword_table(cfg: &ExperimentConfig, ctx: &SplitContext<'_>) -> Result<KeywordTable> {
    let table = match &cfg.balance.keyword_source {
        KeywordSource::Extract => extract_class_keywords(
            &ctx.fit_docs(),
            &ctx.vocab,
            cfg.balance.keyword_top_k,
            &ctx.data.labels,
        )?,
        KeywordSource::Generator => ctx
            .data
            .generator_keywords
            .clone()
            .ok_or_else(|| CliError::Config("no generator keywords for this corpus".into()))?,
        KeywordSource::File(path) => load_keyword_table(path, ctx.data.prep.options())?,
    };
    table.validate(&ctx.data.labels)?;
    Ok(table)
}

/// Training rows for one cell plus the number of synthetic rows.
pub fn balance(
    cfg: &ExperimentConfig,
    ctx: &SplitContext<'_>,
    method: Method,
    model: &ModelParams,
    seed: u64,
) -> Result<(Vec<Example>, usize)> {
    let fit = &ctx.plan.fit;
    let weighted = |weights: Vec<f64>| {
        fit.iter()
            .zip(weights)
            .map(|(&i, weight)| Example {
                input: SeqInput::Tokens(i),
                label: ctx.data.y[i],
                weight,
            })
            .collect::<Vec<_>>()
    };
    match method {
        Method::None => Ok((weighted(vec![1.0; fit.len()]), 0)),
        Method::Weighted(scheme) => {
            let ws = WeightScheme::new(&ctx.train_hist, scheme, 1.0, cfg.rare_threshold)?;
            Ok((weighted(fit.iter().map(|&i| ws.class_weights[ctx.data.y[i]]).collect()), 0))
        }
        Method::KeywordFactor(f) => {
            let ws = WeightScheme::new(&ctx.train_hist, ClassWeighting::Uniform, f, cfg.rare_threshold)?;
            let kw = keyword_table(cfg, ctx)?;
            let w = sample_weights(&ctx.fit_docs(), &ws, &kw, &ctx.data.prep)?;
            Ok((weighted(w), 0))
        }
        _ => {
            let ds = resample_fit(cfg, ctx, method, model, seed)?;
            let mut synthetic = 0;
            let examples = ds
                .provenance()
                .iter()
                .zip(ds.labels())
                .map(|(p, &label)| {
                    if p.is_synthetic() {
                        synthetic += 1;
                    }
                    let input = match *p {
                        Provenance::Original { source } | Provenance::Replica { source } => SeqInput::Tokens(source),
                        Provenance::Interpolated { base, neighbor, gap } => SeqInput::Blend { base, neighbor, gap },
                    };
                    Example {
                        input,
                        label,
                        weight: 1.0,
                    }
                })
                .collect();
            Ok((examples, synthetic))
        }
    }
}

/// Every document a training row reads from must come from `fit`.
pub fn leakage_guard(examples: &[Example], plan: &SplitPlan) -> Result<()> {
    let held_out: HashSet<usize> = plan.test.iter().chain(&plan.val).copied().collect();
    for (n, e) in examples.iter().enumerate() {
        let sources = match e.input {
            SeqInput::Tokens(r) => vec![r],
            SeqInput::Blend { base, neighbor, .. } => vec![base, neighbor],
        };
        if let Some(s) = sources.iter().find(|s| held_out.contains(s)) {
            let part = if plan.test.contains(s) { "test" } else { "validation" };
            return Err(CliError::Leakage(format!("training row {n} reads {part} document {s}")));
        }
    }
    Ok(())
}

fn examples_tsv(examples: &[Example], labels: &[String]) -> String {
    let mut out = String::from("kind\tbase\tneighbor\tgap\tlabel\tweight\n");
    for e in examples {
        let (kind, b, n, g) = match e.input {
            SeqInput::Tokens(r) => ("tokens", r, r, 0.0),
            SeqInput::Blend { base, neighbor, gap } => ("blend", base, neighbor, gap),
        };
        out.push_str(&format!("{kind}\t{b}\t{n}\t{g}\t{}\t{}\n", labels[e.label], e.weight));
    }
    out
}

struct FoldRun {
    model: ModelParams,
    history: TrainHistory,
    examples: Vec<Example>,
    synthetic: usize,
    y_true: Vec<usize>,
    y_pred: Vec<usize>,
    probs: Vec<Vec<f64>>,
}

fn run_fold(cfg: &ExperimentConfig, ctx: &SplitContext<'_>, spec: &CellSpec, seed: u64) -> Result<FoldRun> {
    let tc = cfg.model.train_config(spec.hidden, seed);
    let mut model = init_model(&tc, ctx.vocab.sequence_vocab_size(), ctx.data.labels.len())?;
    if let Some(path) = &cfg.model.pretrained {
        load_pretrained(path)?.apply(&mut model, &ctx.vocab)?;
    }
    let (examples, synthetic) = balance(cfg, ctx, spec.method, &model, seed)?;
    leakage_guard(&examples, &ctx.plan)?;
    let val = ctx.seqs.select(&ctx.plan.val);
    let history = {
        let data = TrainData::new(&ctx.seqs, examples.clone())?;
        train(&mut model, &data, &val, &tc)?
    };
    let test = ctx.seqs.select(&ctx.plan.test);
    let (y_pred, probs) = predict(&model, &test);
    Ok(FoldRun {
        model,
        history,
        examples,
        synthetic,
        y_true: test.labels.clone(),
        y_pred,
        probs,
    })
}

fn fold_seed(cell_seed: u64, fold: usize, folds: usize) -> u64 {
    if folds == 1 {
        cell_seed
    } else {
        derive_seed(cell_seed, &format!("fold{fold}"))
    }
}

fn run_cell(
    cfg: &ExperimentConfig,
    contexts: &[SplitContext<'_>],
    spec: &CellSpec,
    rare: &[String],
    log: &RunLog,
) -> Result<CellResult> {
    let start = Instant::now();
    let labels = &contexts[0].data.labels;
    let cell_seed = derive_seed(cfg.seed, &spec.name);
    let dir = cfg.out_dir.join("cells").join(&spec.slug);
    let mut merged: Option<ConfusionMatrix> = None;
    let mut histories = Vec::new();
    let (mut train_examples, mut synthetic_examples) = (0, 0);
    let mut scored: Vec<(usize, Vec<f64>)> = Vec::new();
    let mut artifact = None;
    for (f, ctx) in contexts.iter().enumerate() {
        let run = run_fold(cfg, ctx, spec, fold_seed(cell_seed, f, contexts.len()))?;
        log.info(
            &spec.name,
            &format!(
                "fold={f} rows={} synthetic={} best_epoch={} stopped_epoch={}",
                run.examples.len(),
                run.synthetic,
                run.history.best_epoch,
                run.history.stopped_epoch
            ),
        );
        let cm = confusion_matrix(&run.y_true, &run.y_pred, labels)?;
        match merged.as_mut() {
            None => merged = Some(cm),
            Some(m) => m.merge(&cm)?,
        }
        train_examples += run.examples.len();
        synthetic_examples += run.synthetic;
        scored.extend(run.y_true.iter().copied().zip(run.probs));
        if contexts.len() == 1 {
            write_file(&dir.join("examples.tsv"), examples_tsv(&run.examples, labels))?;
            if cfg.model.save_models {
                let path = dir.join("model.spdm");
                let art = ModelArtifact {
                    config: cfg.model.train_config(spec.hidden, cell_seed),
                    labels: labels.clone(),
                    vocab: ctx.vocab.clone(),
                    max_len: cfg.features.max_len,
                    model: run.model,
                };
                save_model(&art, &path)?;
                artifact = Some(path);
            }
        }
        histories.push(run.history);
    }
    let confusion = merged.expect("at least one fold");
    let report = metrics_report(&confusion)?;
    let rare_report = if rare.is_empty() {
        None
    } else {
        Some(rare_class_report(&report, rare)?)
    };
    write_json(&dir.join("confusion.json"), &confusion)?;
    write_json(&dir.join("history.json"), &histories)?;
    write_json(
        &dir.join("report.json"),
        &serde_json::json!({
            "model": spec.name,
            "method": spec.method,
            "hidden": spec.hidden,
            "settings": cell_settings(cfg, spec),
            "report": report,
            "rare_report": rare_report,
        }),
    )?;
    if cfg.eval.pr_curves {
        for (c, label) in labels.iter().enumerate() {
            let scores: Vec<f64> = scored.iter().map(|(_, p)| p[c]).collect();
            let pos: Vec<bool> = scored.iter().map(|(y, _)| *y == c).collect();
            if let Ok(curve) = pr_curve(&scores, &pos) {
                let mut text = String::from("recall\tprecision\n");
                for (r, p) in curve {
                    text.push_str(&format!("{r}\t{p}\n"));
                }
                write_file(&dir.join("pr").join(format!("{c:02}_{}.tsv", sanitize(label))), text)?;
            }
        }
    }
    Ok(CellResult {
        spec: spec.clone(),
        confusion,
        report,
        rare_report,
        histories,
        train_examples,
        synthetic_examples,
        duration: start.elapsed(),
        artifact,
    })
}

/// Balancing and optimizer settings the numbers depend on.
fn cell_settings(cfg: &ExperimentConfig, spec: &CellSpec) -> serde_json::Value {
    let tc = cfg.model.train_config(spec.hidden, 0);
    let mut v = serde_json::json!({
        "learning_rate": tc.effective_learning_rate(),
        "optimizer": tc.optimizer,
        "embed_dim": tc.embed_dim,
    });
    if spec.method.is_resampling() {
        v["k_neighbors"] = cfg.balance.k_neighbors.into();
        v["target"] = serde_json::to_value(cfg.balance.target).unwrap_or_default();
        v["adasyn_beta"] = cfg.balance.adasyn_beta.into();
        v["neighbor_space"] = serde_json::to_value(cfg.balance.neighbor_space).unwrap_or_default();
    }
    if let Method::KeywordFactor(_) = spec.method {
        v["keyword_source"] = cfg.balance.keyword_source.to_string().into();
    }
    v
}

fn sanitize(s: &str) -> String {
    s.chars().map(|c| if c.is_alphanumeric() { c } else { '_' }).collect()
}

/// Parallel cell count: `SKEWCLASS_THREADS` if set, else the core count.
pub fn thread_count() -> usize {
    std::env::var("SKEWCLASS_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n >= 1)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, usize::from))
}

/// Index entry that lets `report` rebuild the tables from disk.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct IndexEntry {
    #[serde(flatten)]
    spec: CellSpec,
    ok: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RunIndex {
    labels: Vec<String>,
    rare_classes: Vec<String>,
    cells: Vec<IndexEntry>,
    tables: serde_json::Value,
}

fn write_tables(out: &Path, tables: &Tables) -> Result<()> {
    write_file(&out.join("summary.tsv"), &tables.summary_tsv)?;
    write_file(&out.join("summary.txt"), &tables.summary_text)?;
    write_file(&out.join("rare.tsv"), &tables.rare_tsv)?;
    write_file(&out.join("rare.txt"), &tables.rare_text)
}

fn run_grid(cfg: &ExperimentConfig, data: &PreparedData, plans: Vec<SplitPlan>) -> Result<RunRecord> {
    let out = &cfg.out_dir;
    std::fs::create_dir_all(out).map_err(crate::io_err(out))?;
    let log = RunLog::create(&out.join("run.log"))?;
    write_file(&out.join("config.toml"), cfg.to_toml())?;
    write_json(&out.join("split.json"), &plans)?;
    log.info(
        "data",
        &format!(
            "documents={} classes={} empty={} duplicates_removed={}",
            data.docs.len(),
            data.labels.len(),
            data.empty_documents,
            data.duplicates_removed
        ),
    );
    for w in plans.iter().flat_map(|p| &p.warnings).collect::<std::collections::BTreeSet<_>>() {
        log.warn("split", w);
    }
    let contexts = plans
        .into_iter()
        .map(|p| SplitContext::new(cfg, data, p))
        .collect::<Result<Vec<_>>>()?;
    // A class counts as rare when it is rare in any fold's training portion.
    let rare: Vec<String> = data
        .labels
        .iter()
        .filter(|l| contexts.iter().any(|c| c.rare.contains(l)))
        .cloned()
        .collect();
    log.info("data", &format!("rare classes: {}", rare.join(",")));

    let specs = cell_specs(cfg);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(thread_count())
        .build()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    let cells: Vec<CellOutcome> = pool.install(|| {
        specs
            .par_iter()
            .map(|spec| {
                log.info(&spec.name, "start");
                let result = run_cell(cfg, &contexts, spec, &rare, &log);
                match &result {
                    Ok(r) => log.info(
                        &spec.name,
                        &format!(
                            "done duration_ms={} macro_recall={} macro_f1={}",
                            r.duration.as_millis(),
                            r.report.macro_recall,
                            r.report.macro_f1
                        ),
                    ),
                    Err(e) => log.error(&spec.name, &format!("failed: {e}")),
                }
                CellOutcome {
                    spec: spec.clone(),
                    result: result.map_err(|e| e.to_string()),
                }
            })
            .collect()
    });

    let rows: Vec<SummaryRow> = cells
        .iter()
        .filter_map(|c| c.result.as_ref().ok())
        .map(|r| SummaryRow {
            model: r.spec.name.clone(),
            method: r.spec.method,
            hidden: r.spec.hidden,
            report: r.report.clone(),
            rare: r.rare_report.clone(),
        })
        .collect();
    let tables = render_tables(&rows);
    write_tables(out, &tables)?;
    write_json(
        &out.join("summary.json"),
        &RunIndex {
            labels: data.labels.clone(),
            rare_classes: rare.clone(),
            cells: cells
                .iter()
                .map(|c| IndexEntry {
                    spec: c.spec.clone(),
                    ok: c.result.is_ok(),
                })
                .collect(),
            tables: tables.json.clone(),
        },
    )?;
    Ok(RunRecord {
        config: cfg.clone(),
        labels: data.labels.clone(),
        rare_classes: rare,
        cells,
        tables,
    })
}

/// Single stratified split; every cell writes under `cfg.out_dir`.
/// Cell failures are recorded in the returned record, not raised.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunRecord> {
    cfg.validate()?;
    let data = load_data(cfg)?;
    let plan = plan_split(&data.y, cfg)?;
    run_grid(cfg, &data, vec![plan])
}

/// Stratified K-fold: each cell trains once per fold and is scored on the
/// merged confusion matrix.
pub fn run_cv(cfg: &ExperimentConfig) -> Result<RunRecord> {
    cfg.validate()?;
    let data = load_data(cfg)?;
    let plans = plan_folds(&data.y, cfg)?;
    run_grid(cfg, &data, plans)
}

/// Rebuilds the tables of a finished run from its confusion matrices.
pub fn rebuild_report(out: &Path) -> Result<Tables> {
    let index: RunIndex = read_json(&out.join("summary.json"))?;
    let mut rows = Vec::new();
    for entry in index.cells.iter().filter(|e| e.ok) {
        let cm: ConfusionMatrix = read_json(&out.join("cells").join(&entry.spec.slug).join("confusion.json"))?;
        let report = metrics_report(&cm)?;
        let rare = if index.rare_classes.is_empty() {
            None
        } else {
            Some(rare_class_report(&report, &index.rare_classes)?)
        };
        rows.push(SummaryRow {
            model: entry.spec.name.clone(),
            method: entry.spec.method,
            hidden: entry.spec.hidden,
            report,
            rare,
        });
    }
    if rows.is_empty() {
        return Err(CliError::Config(format!("{}: no finished cells", out.display())));
    }
    let tables = render_tables(&rows);
    write_tables(out, &tables)?;
    Ok(tables)
}

/// Scores a saved model on the test portion of the config's split.
pub fn evaluate_artifact(cfg: &ExperimentConfig, model_path: &Path, rare: Option<&[String]>) -> Result<SummaryRow> {
    let art = load_model(model_path)?;
    let data = load_data(cfg)?;
    if art.labels != data.labels {
        return Err(CliError::Config("model labels differ from the corpus labels".into()));
    }
    let plan = plan_split(&data.y, cfg)?;
    let docs: Vec<_> = plan.test.iter().map(|&i| data.docs[i].clone()).collect();
    let seqs = encode_sequences(&docs, &art.vocab, art.max_len, &art.labels)?;
    let (pred, _) = predict(&art.model, &seqs);
    let cm = confusion_matrix(&seqs.labels, &pred, &art.labels)?;
    let report = metrics_report(&cm)?;
    let rare_set = match rare {
        Some(r) => r.to_vec(),
        None => {
            let hist = ClassHistogram::from_indices(&data.labels, plan.training().iter().map(|&i| data.y[i]));
            rare_classes(&hist, cfg.rare_threshold)
        }
    };
    let rare = if rare_set.is_empty() {
        None
    } else {
        Some(rare_class_report(&report, &rare_set)?)
    };
    let out = &cfg.out_dir;
    write_json(&out.join("confusion.json"), &cm)?;
    write_json(&out.join("report.json"), &serde_json::json!({ "report": report, "rare_report": rare }))?;
    let arch = match art.config.direction {
        skewclass::Direction::Uni => "LSTM",
        skewclass::Direction::Bi => "BILSTM",
    };
    let row = SummaryRow {
        model: format!("{arch} {}", art.config.hidden),
        method: Method::None,
        hidden: art.config.hidden,
        report,
        rare,
    };
    write_tables(out, &render_tables(std::slice::from_ref(&row)))?;
    Ok(row)
}
