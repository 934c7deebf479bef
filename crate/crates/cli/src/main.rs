use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use skewclass::corpus::save_corpus;
use skewclass::features::build_vocabulary;
use skewclass::seqmodel::init_model;
use skewclass::weighting::extract_class_keywords;
use skewclass_cli::data::{load_corpus_source, load_data, plan_split};
use skewclass_cli::experiment::{evaluate_artifact, rebuild_report, resample_fit, run_cv, run_experiment, SplitContext};
use skewclass_cli::{CliError, ExperimentConfig, Method, Result};

#[derive(Parser)]
#[command(name = "skewclass", version, about = "Imbalanced multiclass text classification experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Experiment config (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Overrides the master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the output location.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Write the configured synthetic corpus and its keyword table.
    /// `--seed` sets the generator seed; `--out` is the corpus file.
    GenCorpus(Common),
    /// Clean and tokenize the corpus into `tokens.jsonl`.
    Preprocess(Common),
    /// Score class keywords on the training portion into `keywords.tsv`.
    ExtractKeywords(Common),
    /// Resample the training portion and write `resampled.jsonl`.
    Resample {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        method: Method,
    },
    /// Train and score a single cell.
    Train {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        method: Option<Method>,
        #[arg(long)]
        hidden: Option<usize>,
    },
    /// Score a saved model on the test portion.
    Evaluate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        model: PathBuf,
    },
    /// Stratified K-fold over the whole grid.
    Cv(Common),
    /// Run the full grid on one stratified split.
    Experiment(Common),
    /// Rebuild the summary tables of a finished run from its confusion matrices.
    Report(Common),
}

fn load(common: &Common) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(&common.config)?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &common.out {
        cfg.out_dir = out.clone();
    }
    Ok(cfg)
}

fn mkdir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.to_owned(),
        source,
    })
}

fn write(path: &Path, text: String) -> Result<()> {
    std::fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}

fn jsonl<T: serde::Serialize>(items: impl IntoIterator<Item = T>) -> String {
    items
        .into_iter()
        .map(|x| serde_json::to_string(&x).expect("serializable") + "\n")
        .collect()
}

fn print_grid(record: &skewclass_cli::RunRecord) -> Result<()> {
    print!("{}", record.tables.summary_text);
    if !record.tables.rare_text.lines().nth(1).unwrap_or("").is_empty() {
        println!();
        print!("{}", record.tables.rare_text);
    }
    record.check()
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::GenCorpus(common) => {
            let mut cfg = ExperimentConfig::load(&common.config)?;
            let gen = cfg
                .corpus
                .generate
                .as_mut()
                .ok_or_else(|| CliError::Config("gen-corpus needs [corpus.generate]".into()))?;
            if let Some(seed) = common.seed {
                gen.seed = seed;
            }
            let (corpus, keywords) = load_corpus_source(&cfg)?;
            let path = common.out.unwrap_or_else(|| cfg.out_dir.join("corpus.jsonl"));
            if let Some(dir) = path.parent() {
                mkdir(dir)?;
            }
            save_corpus(&corpus, &path)?;
            if let Some(kw) = keywords {
                kw.save(path.with_extension("keywords.tsv"))?;
            }
            println!("{} documents -> {}", corpus.len(), path.display());
        }
        Command::Preprocess(common) => {
            let cfg = load(&common)?;
            let data = load_data(&cfg)?;
            mkdir(&cfg.out_dir)?;
            write(&cfg.out_dir.join("tokens.jsonl"), jsonl(&data.docs))?;
            println!(
                "{} documents, {} empty, {} duplicates removed",
                data.docs.len(),
                data.empty_documents,
                data.duplicates_removed
            );
        }
        Command::ExtractKeywords(common) => {
            let cfg = load(&common)?;
            let data = load_data(&cfg)?;
            let plan = plan_split(&data.y, &cfg)?;
            let fit: Vec<_> = plan.fit.iter().map(|&i| data.docs[i].clone()).collect();
            let vocab = build_vocabulary(&fit, cfg.features.min_df, cfg.features.max_vocab)?;
            let table = extract_class_keywords(&fit, &vocab, cfg.balance.keyword_top_k, &data.labels)?;
            mkdir(&cfg.out_dir)?;
            table.save(cfg.out_dir.join("keywords.tsv"))?;
            print!("{}", table.to_tsv());
        }
        Command::Resample { common, method } => {
            if !method.is_resampling() {
                return Err(CliError::Config(format!("`{method}` is not a resampling method")));
            }
            let cfg = load(&common)?;
            let data = load_data(&cfg)?;
            let plan = plan_split(&data.y, &cfg)?;
            let ctx = SplitContext::new(&cfg, &data, plan)?;
            let seed = skewclass::rng::derive_seed(cfg.seed, &method.to_string());
            let tc = cfg.model.train_config(cfg.model.hidden[0], seed);
            let model = init_model(&tc, ctx.vocab.sequence_vocab_size(), data.labels.len())?;
            let ds = resample_fit(&cfg, &ctx, method, &model, seed)?;
            mkdir(&cfg.out_dir)?;
            let rows = (0..ds.len()).map(|i| {
                serde_json::json!({
                    "label": data.labels[ds.labels()[i]],
                    "provenance": ds.provenance()[i],
                    "point": ds.point(i),
                })
            });
            write(&cfg.out_dir.join("resampled.jsonl"), jsonl(rows))?;
            let counts = ds.class_counts();
            for (l, n) in data.labels.iter().zip(counts) {
                println!("{l}\t{n}");
            }
        }
        Command::Train { common, method, hidden } => {
            let mut cfg = load(&common)?;
            if let Some(m) = method {
                cfg.balance.methods = vec![m];
            }
            if let Some(h) = hidden {
                cfg.model.hidden = vec![h];
            }
            cfg.balance.methods.truncate(1);
            cfg.model.hidden.truncate(1);
            cfg.model.save_models = true;
            let record = run_experiment(&cfg)?;
            print_grid(&record)?;
        }
        Command::Evaluate { common, model } => {
            let cfg = load(&common)?;
            mkdir(&cfg.out_dir)?;
            evaluate_artifact(&cfg, &model, None)?;
            print!("{}", std::fs::read_to_string(cfg.out_dir.join("summary.txt")).unwrap_or_default());
        }
        Command::Cv(common) => {
            let cfg = load(&common)?;
            print_grid(&run_cv(&cfg)?)?;
        }
        Command::Experiment(common) => {
            let cfg = load(&common)?;
            print_grid(&run_experiment(&cfg)?)?;
        }
        Command::Report(common) => {
            let cfg = load(&common)?;
            let tables = rebuild_report(&cfg.out_dir)?;
            print!("{}", tables.summary_text);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::error!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
