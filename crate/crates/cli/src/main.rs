//! `trxcat`: bank transaction cleaning, dedup, weak labeling and
//! classification, one subcommand per pipeline stage.

mod manifest;

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use trxcat::artifact::{FeaturizerArtifact, ModelArtifact};
use trxcat::corpus::{generate_synthetic, read_dataset, split, write_jsonl, Dataset, Format, SynthConfig};
use trxcat::defaults;
use trxcat::evaluation::{prepare_corpus, run_experiment, EvaluationReport, ExperimentConfig, ExperimentTable};
use trxcat::features::{FeatureConfig, Featurizer};
use trxcat::labeling::{label_dataset, RuleSet};
use trxcat::models::{grid_search, train, ClassWeight, ModelParams, ModelSpec, ParamGrid};
use trxcat::preprocess::{CleaningConfig, NameDictionary, Preprocessor, DEFAULT_NAME_TAG};
use trxcat::similarity::dedup;
use trxcat::derive_seed;

use manifest::{ConfigSource, Manifest};

const EXPERIMENT_TOML: &str = include_str!("../../../configs/experiment.default.toml");

#[derive(Parser)]
#[command(name = "trxcat", version, about = "Clean, deduplicate, label and classify bank transaction descriptions")]
struct Cli {
    /// Seed for every random choice; overrides TRXCAT_SEED, which overrides config seeds.
    #[arg(long, global = true, env = "TRXCAT_SEED")]
    seed: Option<u64>,
    /// Log progress to stderr (repeat for more detail).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

/// Cleaning settings shared by every stage that tokenizes descriptions.
#[derive(Args)]
struct CleaningArgs {
    /// Cleaning config TOML [default: shipped configs/cleaning.default.toml].
    #[arg(long)]
    cleaning: Option<PathBuf>,
    /// Name dictionary, one name per line [default: shipped configs/names.sample.txt].
    #[arg(long)]
    names: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic labeled corpus.
    Synth {
        /// Generator config TOML [default: shipped configs/synth.default.toml].
        #[arg(long)]
        config: Option<PathBuf>,
        /// Override the config's record count.
        #[arg(long)]
        n_records: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Clean and anonymize descriptions into token sequences.
    Preprocess {
        #[arg(long = "in")]
        input: PathBuf,
        /// Token sequences, JSONL.
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        cleaning: CleaningArgs,
    },
    /// Drop near-duplicate records by TF-IDF cosine similarity.
    Dedup {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Drop log, JSONL.
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long, default_value_t = 0.85)]
        threshold: f64,
        #[arg(long, default_value_t = 1024)]
        block_rows: usize,
        #[command(flatten)]
        cleaning: CleaningArgs,
    },
    /// Assign categories with keyword rules.
    Label {
        /// Ruleset TOML or JSON [default: shipped configs/rules.sample.toml].
        #[arg(long)]
        rules: Option<PathBuf>,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Coverage report, JSON.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Overwrite labels the input already carries.
        #[arg(long)]
        force: bool,
        /// Leave out records no rule fired on.
        #[arg(long)]
        drop_unlabeled: bool,
    },
    /// Stratified train/test split.
    Split {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        train_out: PathBuf,
        #[arg(long)]
        test_out: PathBuf,
        /// Share of each category that goes to training.
        #[arg(long, default_value_t = 0.8)]
        fraction: f64,
    },
    /// Fit a featurizer on a corpus and save it.
    Featurize {
        #[arg(long = "in")]
        input: PathBuf,
        /// `ngram-tfidf`, `word2vec-pca`, or a featurizer TOML.
        #[arg(long, default_value = "ngram-tfidf")]
        features: String,
        /// Featurizer artifact.
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        cleaning: CleaningArgs,
    },
    /// Train a classifier on a labeled corpus.
    Train {
        #[arg(long = "in")]
        input: PathBuf,
        /// Model artifact.
        #[arg(long)]
        out: PathBuf,
        /// Classifier with default settings.
        #[arg(long, value_parser = ["naive_bayes", "logistic_regression", "linear_svm", "random_forest"])]
        model: Option<String>,
        /// Model spec TOML; its `kind` must agree with --model if both are given.
        #[arg(long)]
        spec: Option<PathBuf>,
        /// `ngram-tfidf`, `word2vec-pca`, or a featurizer TOML, fit on --in [default: ngram-tfidf].
        #[arg(long, conflicts_with = "featurizer")]
        features: Option<String>,
        /// Reuse a featurizer artifact instead of fitting one.
        #[arg(long)]
        featurizer: Option<PathBuf>,
        /// Grid TOML (`key = [values]`) searched by cross-validation before the final fit.
        #[arg(long)]
        tune: Option<PathBuf>,
        #[arg(long, default_value_t = 3)]
        folds: usize,
        /// Class weighting (linear models only).
        #[arg(long, value_parser = ["none", "balanced"])]
        class_weight: Option<String>,
        #[command(flatten)]
        cleaning: CleaningArgs,
    },
    /// Score a model on a labeled test corpus.
    Evaluate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        test: PathBuf,
        /// Evaluation report, JSON.
        #[arg(long)]
        report: PathBuf,
    },
    /// Label new records with a trained model.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        /// Predictions, JSONL.
        #[arg(long)]
        out: PathBuf,
    },
    /// Train every configured model at every train fraction and seed.
    Experiment {
        /// Experiment TOML [default: shipped configs/experiment.default.toml].
        #[arg(long)]
        config: Option<PathBuf>,
        /// Labeled corpus; without it the config's [pipeline] builds one.
        #[arg(long = "in")]
        input: Option<PathBuf>,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        cleaning: CleaningArgs,
    },
    /// Render an evaluation report or experiment result as text tables.
    Report {
        /// `evaluate --report` output or `experiment.json`.
        #[arg(long = "in")]
        input: PathBuf,
        /// Write here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let seed = cli.seed;
    match cli.command {
        Command::Synth { config, n_records, out } => cmd_synth(config.as_deref(), n_records, &out, seed),
        Command::Preprocess { input, out, cleaning } => cmd_preprocess(&input, &out, &cleaning),
        Command::Dedup {
            input,
            out,
            report,
            threshold,
            block_rows,
            cleaning,
        } => cmd_dedup(&input, &out, report.as_deref(), threshold, block_rows, &cleaning),
        Command::Label {
            rules,
            input,
            out,
            report,
            force,
            drop_unlabeled,
        } => cmd_label(rules.as_deref(), &input, &out, report.as_deref(), force, drop_unlabeled),
        Command::Split {
            input,
            train_out,
            test_out,
            fraction,
        } => cmd_split(&input, &train_out, &test_out, fraction, seed.unwrap_or(0)),
        Command::Featurize {
            input,
            features,
            out,
            cleaning,
        } => cmd_featurize(&input, &features, &out, &cleaning, seed.unwrap_or(0)),
        Command::Train {
            input,
            out,
            model,
            spec,
            features,
            featurizer,
            tune,
            folds,
            class_weight,
            cleaning,
        } => cmd_train(TrainArgs {
            input,
            out,
            model,
            spec,
            features,
            featurizer,
            tune,
            folds,
            class_weight,
            cleaning,
            seed,
        }),
        Command::Evaluate { model, test, report } => cmd_evaluate(&model, &test, &report),
        Command::Predict { model, input, out } => cmd_predict(&model, &input, &out),
        Command::Experiment {
            config,
            input,
            out,
            cleaning,
        } => cmd_experiment(config.as_deref(), input.as_deref(), &out, &cleaning, seed),
        Command::Report { input, out } => cmd_report(&input, out.as_deref()),
    }
}

fn read(path: &Path) -> Result<Dataset> {
    read_dataset(path, Format::from_path(path)).with_context(|| format!("reading {}", path.display()))
}

fn write_dataset(path: &Path, ds: &Dataset) -> Result<()> {
    write_jsonl(path, ds).with_context(|| format!("writing {}", path.display()))
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn write_lines<T: Serialize>(path: &Path, items: impl IntoIterator<Item = T>) -> Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = BufWriter::new(file);
    for item in items {
        serde_json::to_writer(&mut w, &item)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

/// Cleaning config and name list sources, and the preprocessor they build.
fn load_preprocessor(args: &CleaningArgs) -> Result<(Preprocessor, [ConfigSource; 2])> {
    let cleaning = ConfigSource::load(args.cleaning.as_deref(), "cleaning.default.toml", defaults::CLEANING_TOML)?;
    let names = ConfigSource::load(args.names.as_deref(), "names.sample.txt", defaults::NAMES_TXT)?;
    let config = CleaningConfig::from_toml(&cleaning.text).with_context(|| format!("in {}", cleaning.label))?;
    let dict = NameDictionary::from_text(&names.text, DEFAULT_NAME_TAG).with_context(|| format!("in {}", names.label))?;
    Ok((Preprocessor::new(config, dict)?, [cleaning, names]))
}

fn load_rules(source: &ConfigSource) -> Result<RuleSet> {
    let rules = if source.label.ends_with(".json") {
        RuleSet::from_json(&source.text)
    } else {
        RuleSet::from_toml(&source.text)
    };
    rules.with_context(|| format!("in {}", source.label))
}

/// A featurizer kind with default settings, or a TOML file.
fn load_features(arg: &str) -> Result<(FeatureConfig, Option<ConfigSource>)> {
    let path = Path::new(arg);
    if path.exists() {
        let source = ConfigSource::load(Some(path), "", "")?;
        let cfg = FeatureConfig::from_toml(&source.text).with_context(|| format!("in {arg}"))?;
        return Ok((cfg, Some(source)));
    }
    match arg {
        "ngram-tfidf" | "word2vec-pca" => Ok((FeatureConfig::from_toml(&format!("kind = \"{arg}\""))?, None)),
        _ => bail!("--features must be ngram-tfidf, word2vec-pca or an existing TOML file, got `{arg}`"),
    }
}

fn cmd_synth(config: Option<&Path>, n_records: Option<usize>, out: &Path, seed: Option<u64>) -> Result<()> {
    let source = ConfigSource::load(config, "synth.default.toml", defaults::SYNTH_TOML)?;
    let mut cfg = SynthConfig::from_toml(&source.text).with_context(|| format!("in {}", source.label))?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(n) = n_records {
        cfg.n_records = n;
    }
    let ds = generate_synthetic(&cfg)?;
    write_dataset(out, &ds)?;
    let mut m = Manifest::new("synth", Some(cfg.seed));
    m.config(&source).param("n_records", cfg.n_records).output(out)?;
    m.write_for(out)?;
    Ok(())
}

#[derive(Serialize)]
struct TokenLine<'a> {
    id: &'a str,
    tokens: &'a [String],
}

fn cmd_preprocess(input: &Path, out: &Path, cleaning: &CleaningArgs) -> Result<()> {
    let (pre, sources) = load_preprocessor(cleaning)?;
    let ds = read(input)?;
    let docs = pre.process(&ds);
    write_lines(
        out,
        docs.iter().map(|d| TokenLine {
            id: &d.source_id,
            tokens: &d.tokens,
        }),
    )?;
    let mut m = Manifest::new("preprocess", None);
    m.input(input)?;
    sources.iter().for_each(|s| {
        m.config(s);
    });
    m.output(out)?.write_for(out)?;
    Ok(())
}

fn cmd_dedup(
    input: &Path,
    out: &Path,
    report: Option<&Path>,
    threshold: f64,
    block_rows: usize,
    cleaning: &CleaningArgs,
) -> Result<()> {
    let (pre, sources) = load_preprocessor(cleaning)?;
    let ds = read(input)?;
    let (kept, drops) = dedup(&ds, &pre.process(&ds), threshold, block_rows)?;
    log::info!("dedup kept {} of {} records", kept.len(), ds.len());
    write_dataset(out, &kept)?;
    let mut m = Manifest::new("dedup", None);
    m.input(input)?;
    sources.iter().for_each(|s| {
        m.config(s);
    });
    m.param("threshold", threshold)
        .param("block_rows", block_rows)
        .param("kept", kept.len())
        .param("dropped", drops.len())
        .output(out)?;
    if let Some(r) = report {
        write_lines(r, &drops)?;
        m.output(r)?;
    }
    m.write_for(out)?;
    Ok(())
}

fn cmd_label(
    rules: Option<&Path>,
    input: &Path,
    out: &Path,
    report: Option<&Path>,
    force: bool,
    drop_unlabeled: bool,
) -> Result<()> {
    let source = ConfigSource::load(rules, "rules.sample.toml", defaults::RULES_TOML)?;
    let ruleset = load_rules(&source)?;
    let ds = read(input)?;
    let (mut labeled, coverage) = label_dataset(&ds, &ruleset, force);
    if drop_unlabeled {
        let keep: Vec<usize> = (0..labeled.len())
            .filter(|&i| labeled.records()[i].category.is_some())
            .collect();
        labeled = labeled.select(&keep);
    }
    write_dataset(out, &labeled)?;
    let mut m = Manifest::new("label", None);
    m.input(input)?
        .config(&source)
        .param("force", force)
        .param("drop_unlabeled", drop_unlabeled)
        .param("unlabeled", coverage.unlabeled)
        .output(out)?;
    if let Some(r) = report {
        write_json(r, &coverage)?;
        m.output(r)?;
    }
    m.write_for(out)?;
    Ok(())
}

fn cmd_split(input: &Path, train_out: &Path, test_out: &Path, fraction: f64, seed: u64) -> Result<()> {
    let ds = read(input)?;
    let (train, test) = split(&ds, fraction, seed)?;
    write_dataset(train_out, &train)?;
    write_dataset(test_out, &test)?;
    let mut m = Manifest::new("split", Some(seed));
    m.input(input)?
        .param("fraction", fraction)
        .output(train_out)?
        .output(test_out)?
        .write_for(train_out)?;
    Ok(())
}

fn cmd_featurize(input: &Path, features: &str, out: &Path, cleaning: &CleaningArgs, seed: u64) -> Result<()> {
    let (pre, sources) = load_preprocessor(cleaning)?;
    let (cfg, feature_source) = load_features(features)?;
    let ds = read(input)?;
    let (featurizer, _) = Featurizer::fit_transform(&cfg, &pre.process(&ds), derive_seed(seed, 1))?;
    let mut metadata = BTreeMap::new();
    metadata.insert("train_records".to_string(), ds.len().into());
    metadata.insert("seed".to_string(), seed.into());
    let artifact = FeaturizerArtifact {
        preprocessor: pre,
        featurizer,
        metadata,
    };
    artifact.save(out)?;
    let mut m = Manifest::new("featurize", Some(seed));
    m.input(input)?;
    sources.iter().chain(&feature_source).for_each(|s| {
        m.config(s);
    });
    m.param("features", cfg.name()).output(out)?.write_for(out)?;
    Ok(())
}

struct TrainArgs {
    input: PathBuf,
    out: PathBuf,
    model: Option<String>,
    spec: Option<PathBuf>,
    features: Option<String>,
    featurizer: Option<PathBuf>,
    tune: Option<PathBuf>,
    folds: usize,
    class_weight: Option<String>,
    cleaning: CleaningArgs,
    seed: Option<u64>,
}

fn model_spec(kind: Option<&str>, spec: Option<&ConfigSource>) -> Result<ModelSpec> {
    let parsed = match (kind, spec) {
        (_, Some(s)) => ModelSpec::from_toml(&s.text).with_context(|| format!("in {}", s.label))?,
        (Some(k), None) => ModelSpec::from_toml(&format!("kind = \"{k}\""))?,
        (None, None) => ModelSpec::linear_svm(),
    };
    if let Some(k) = kind {
        if parsed.kind() != k {
            bail!("--model {k} disagrees with the spec's kind `{}`", parsed.kind());
        }
    }
    Ok(parsed)
}

fn cmd_train(a: TrainArgs) -> Result<()> {
    let spec_source = a.spec.as_deref().map(|p| ConfigSource::load(Some(p), "", "")).transpose()?;
    let mut spec = model_spec(a.model.as_deref(), spec_source.as_ref())?;
    let seed = a.seed.unwrap_or(spec.seed);
    spec = spec.with_seed(seed);
    if let Some(w) = &a.class_weight {
        let weight = match w.as_str() {
            "none" => ClassWeight::None,
            _ => ClassWeight::Balanced,
        };
        match &mut spec.params {
            ModelParams::LogisticRegression(p) => p.schedule.class_weight = weight,
            ModelParams::LinearSvm(p) => p.schedule.class_weight = weight,
            _ => bail!("--class-weight applies to logistic_regression and linear_svm only"),
        }
    }
    let mut m = Manifest::new("train", Some(seed));
    let ds = read(&a.input)?;
    m.input(&a.input)?;
    let y: Vec<String> = ds
        .records()
        .iter()
        .map(|t| t.category.clone().ok_or_else(|| anyhow!("record `{}` has no category", t.id)))
        .collect::<Result<_>>()?;

    let (featurizer, x) = match &a.featurizer {
        Some(path) => {
            let f = FeaturizerArtifact::load(path).with_context(|| format!("loading {}", path.display()))?;
            m.input(path)?;
            let x = f.featurizer.transform(&f.preprocessor.process(&ds));
            (f, x)
        }
        None => {
            let (pre, sources) = load_preprocessor(&a.cleaning)?;
            let (cfg, feature_source) = load_features(a.features.as_deref().unwrap_or("ngram-tfidf"))?;
            sources.iter().chain(&feature_source).for_each(|s| {
                m.config(s);
            });
            let (f, x) = Featurizer::fit_transform(&cfg, &pre.process(&ds), derive_seed(seed, 1))?;
            let mut metadata = BTreeMap::new();
            metadata.insert("train_records".to_string(), ds.len().into());
            metadata.insert("seed".to_string(), seed.into());
            let artifact = FeaturizerArtifact {
                preprocessor: pre,
                featurizer: f,
                metadata,
            };
            (artifact, x)
        }
    };
    if let Some(s) = &spec_source {
        m.config(s);
    }

    let mut metadata = BTreeMap::new();
    if let Some(path) = &a.tune {
        let source = ConfigSource::load(Some(path), "", "")?;
        let grid: ParamGrid = toml::from_str(&source.text).with_context(|| format!("in {}", path.display()))?;
        let (best, report) = grid_search(&x, &y, &spec, &grid, a.folds)?;
        metadata.insert("grid_search".to_string(), serde_json::to_value(&report)?);
        spec = best;
        m.config(&source).param("folds", a.folds);
    }
    let mut model = train(&x, &y, &spec)?;
    model.featurizer_ref = featurizer.reference()?;
    metadata.insert("train_records".to_string(), ds.len().into());
    let artifact = ModelArtifact {
        featurizer,
        model,
        metadata,
    };
    artifact.save(&a.out)?;
    m.param("model", spec.kind())
        .param("features", artifact.featurizer.featurizer.name())
        .output(&a.out)?
        .write_for(&a.out)?;
    Ok(())
}

fn load_model(path: &Path) -> Result<ModelArtifact> {
    ModelArtifact::load(path).with_context(|| format!("loading {}", path.display()))
}

fn cmd_evaluate(model_path: &Path, test: &Path, report_path: &Path) -> Result<()> {
    let artifact = load_model(model_path)?;
    let ds = read(test)?;
    let y_true: Vec<&str> = ds
        .records()
        .iter()
        .map(|t| t.category.as_deref().ok_or_else(|| anyhow!("record `{}` has no category", t.id)))
        .collect::<Result<_>>()?;
    let f = &artifact.featurizer;
    let x = f.featurizer.transform(&f.preprocessor.process(&ds));
    let pred = artifact.model.predict(&x)?;
    let mut labels = artifact.model.labels.clone();
    for l in &y_true {
        if !labels.iter().any(|k| k == l) {
            labels.push(l.to_string());
        }
    }
    labels.sort();
    let pred: Vec<&str> = pred.iter().map(String::as_str).collect();
    let name = test.file_name().map_or_else(|| test.display().to_string(), |n| n.to_string_lossy().into_owned());
    let report = EvaluationReport::new(
        &labels,
        &y_true,
        &pred,
        artifact.model.spec.kind(),
        f.featurizer.name(),
        format!("test file {name} ({} records)", ds.len()),
        artifact.model.spec.seed,
    )?;
    write_json(report_path, &report)?;
    print!("{}", report.render_text());
    let mut m = Manifest::new("evaluate", Some(artifact.model.spec.seed));
    m.input(model_path)?.input(test)?.output(report_path)?.write_for(report_path)?;
    Ok(())
}

#[derive(Serialize)]
struct Prediction<'a> {
    id: &'a str,
    category: &'a str,
    score: f64,
}

fn cmd_predict(model_path: &Path, input: &Path, out: &Path) -> Result<()> {
    let artifact = load_model(model_path)?;
    let ds = read(input)?;
    let f = &artifact.featurizer;
    let x = f.featurizer.transform(&f.preprocessor.process(&ds));
    let k = artifact.model.labels.len();
    let (pred, scores) = if ds.is_empty() {
        (Vec::new(), Vec::new())
    } else {
        (artifact.model.predict_indices(&x)?, artifact.model.predict_scores(&x)?)
    };
    write_lines(
        out,
        ds.records().iter().zip(&pred).enumerate().map(|(i, (t, &c))| Prediction {
            id: &t.id,
            category: &artifact.model.labels[c],
            score: scores[i * k + c],
        }),
    )?;
    let mut m = Manifest::new("predict", Some(artifact.model.spec.seed));
    m.input(model_path)?.input(input)?.param("records", ds.len()).output(out)?.write_for(out)?;
    Ok(())
}

/// A config named by a pipeline section: relative to the experiment file,
/// or one of the shipped files when the experiment config is itself shipped.
fn pipeline_source(
    experiment: &ConfigSource,
    named: Option<&str>,
    default_name: &str,
    default_text: &str,
) -> Result<ConfigSource> {
    match (named, &experiment.dir) {
        (None, _) => ConfigSource::load(None, default_name, default_text),
        (Some(name), Some(dir)) => ConfigSource::load(Some(&dir.join(name)), default_name, default_text),
        (Some(name), None) if name == default_name => ConfigSource::load(None, default_name, default_text),
        (Some(name), None) => bail!("the shipped experiment config cannot refer to `{name}`"),
    }
}

fn cmd_experiment(
    config: Option<&Path>,
    input: Option<&Path>,
    out: &Path,
    cleaning: &CleaningArgs,
    seed: Option<u64>,
) -> Result<()> {
    let source = ConfigSource::load(config, "experiment.default.toml", EXPERIMENT_TOML)?;
    let mut cfg = ExperimentConfig::from_toml(&source.text).with_context(|| format!("in {}", source.label))?;
    if let Some(s) = seed {
        cfg.seeds = vec![s];
    }
    let (pre, sources) = load_preprocessor(cleaning)?;
    let mut m = Manifest::new("experiment", seed);
    m.config(&source);
    sources.iter().for_each(|s| {
        m.config(s);
    });
    let dataset = match input {
        Some(path) => {
            m.input(path)?;
            read(path)?
        }
        None => {
            let p = cfg.pipeline.clone().unwrap_or_default();
            let synth = pipeline_source(&source, p.synth.as_deref(), "synth.default.toml", defaults::SYNTH_TOML)?;
            let rules = pipeline_source(&source, p.rules.as_deref(), "rules.sample.toml", defaults::RULES_TOML)?;
            let synth_cfg = SynthConfig::from_toml(&synth.text).with_context(|| format!("in {}", synth.label))?;
            let raw = generate_synthetic(&synth_cfg)?;
            let (ds, drops, coverage) = prepare_corpus(&raw, &pre, &load_rules(&rules)?, p.dedup_threshold)?;
            log::info!(
                "pipeline: {} generated, {} dropped as near-duplicates, {} unlabeled, {} kept",
                raw.len(),
                drops.len(),
                coverage.unlabeled,
                ds.len()
            );
            m.config(&synth).config(&rules).param("dedup_threshold", p.dedup_threshold);
            m.param("corpus_records", ds.len());
            ds
        }
    };
    let table = run_experiment(&dataset, &pre, &cfg)?;
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let json = out.join("experiment.json");
    let tables = out.join("tables.txt");
    write_json(&json, &table)?;
    let text = table.render_text();
    std::fs::write(&tables, &text).with_context(|| format!("writing {}", tables.display()))?;
    print!("{text}");
    m.param("seeds", &cfg.seeds).output(&json)?.output(&tables)?.write_for(out)?;
    Ok(())
}

fn cmd_report(input: &Path, out: Option<&Path>) -> Result<()> {
    let text = std::fs::read_to_string(input).with_context(|| format!("reading {}", input.display()))?;
    let value: serde_json::Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", input.display()))?;
    let rendered = if value.get("rows").is_some() {
        serde_json::from_value::<ExperimentTable>(value)
            .context("not a valid experiment result")?
            .render_text()
    } else {
        serde_json::from_value::<EvaluationReport>(value)
            .context("not a valid evaluation report")?
            .render_text()
    };
    match out {
        Some(path) => {
            std::fs::write(path, &rendered).with_context(|| format!("writing {}", path.display()))?;
            let mut m = Manifest::new("report", None);
            m.input(input)?.output(path)?.write_for(path)?;
        }
        None => print!("{rendered}"),
    }
    Ok(())
}
