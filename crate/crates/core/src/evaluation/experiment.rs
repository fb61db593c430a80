use std::collections::BTreeMap;
use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::report::{category_table, EvaluationReport};
use crate::artifact::{FeaturizerArtifact, ModelArtifact};
use crate::corpus::{split_indices, Dataset};
use crate::labeling::{label_dataset, CoverageReport, RuleSet};
use crate::similarity::{dedup, DropRecord};
use crate::features::{FeatureConfig, FeatureMatrix, Featurizer};
use crate::models::{grid_search, train, ModelSpec, ParamGrid};
use crate::preprocess::{Preprocessor, TokenSequence};
use crate::{derive_seed, Error, Result};

/// One classifier configuration of the experiment grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelEntry {
    /// Display name, e.g. "Linear SVM".
    pub name: String,
    pub features: FeatureConfig,
    pub model: ModelSpec,
    /// Cross-validated tuning on the training split before the final fit.
    #[serde(default)]
    pub tune: Option<TuneConfig>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TuneConfig {
    pub grid: ParamGrid,
    #[serde(default = "default_folds")]
    pub folds: usize,
}

fn default_folds() -> usize {
    3
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub fractions: Vec<f64>,
    pub seeds: Vec<u64>,
    pub models: Vec<ModelEntry>,
    /// Where the corpus comes from when no dataset is given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pipeline: Option<PipelineConfig>,
}

/// Corpus preparation for an experiment: generate, dedup, label.
/// Paths are relative to the experiment file; absent ones mean the shipped defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    #[serde(default)]
    pub synth: Option<String>,
    #[serde(default)]
    pub rules: Option<String>,
    #[serde(default = "default_threshold")]
    pub dedup_threshold: f64,
}

fn default_threshold() -> f64 {
    0.85
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            synth: None,
            rules: None,
            dedup_threshold: default_threshold(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.fractions.is_empty() || self.seeds.is_empty() || self.models.is_empty() {
            return Err(Error::config("experiment needs fractions, seeds and models"));
        }
        if let Some(f) = self.fractions.iter().find(|f| !(**f > 0.0 && **f < 1.0)) {
            return Err(Error::config(format!("train fraction {f} not in (0, 1)")));
        }
        if let Some(p) = &self.pipeline {
            if !(p.dedup_threshold > 0.0 && p.dedup_threshold <= 1.0) {
                return Err(Error::config(format!("dedup_threshold {} not in (0, 1]", p.dedup_threshold)));
            }
        }
        for m in &self.models {
            m.features.validate()?;
            m.model.validate()?;
        }
        Ok(())
    }
}

/// Dedup `raw`, label it with `rules` (overwriting any existing labels) and
/// keep only the records a rule fired on.
pub fn prepare_corpus(
    raw: &Dataset,
    preprocessor: &Preprocessor,
    rules: &RuleSet,
    dedup_threshold: f64,
) -> Result<(Dataset, Vec<DropRecord>, CoverageReport)> {
    let (deduped, drops) = dedup(raw, &preprocessor.process(raw), dedup_threshold, 1024)?;
    let (labeled, coverage) = label_dataset(&deduped, rules, true);
    let keep: Vec<usize> = (0..labeled.len())
        .filter(|&i| labeled.records()[i].category.is_some())
        .collect();
    Ok((labeled.select(&keep), drops, coverage))
}

/// One (model, fraction, seed) run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRow {
    pub model: String,
    pub featurizer: String,
    pub fraction: f64,
    pub seed: u64,
    pub n_train: usize,
    pub n_test: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub zero_division: bool,
    /// Extra featurizer facts, e.g. retained PCA variance.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub notes: BTreeMap<String, serde_json::Value>,
}

/// Median scores over seeds for one (model, fraction).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub model: String,
    pub fraction: f64,
    pub runs: usize,
    pub median_precision: f64,
    pub median_recall: f64,
    pub median_f1: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentTable {
    pub rows: Vec<ExperimentRow>,
    pub summary: Vec<SummaryRow>,
    /// Full per-category report of each model at the first fraction and seed.
    pub per_category: Vec<EvaluationReport>,
}

/// A fitted featurizer and the features of its training split.
pub struct FittedSplit {
    pub featurizer: FeaturizerArtifact,
    pub x_train: FeatureMatrix,
    pub y_train: Vec<String>,
    pub x_test: FeatureMatrix,
    pub y_test: Vec<String>,
    pub description: String,
    /// Seed of the partition and the featurizer.
    pub seed: u64,
}

/// Partition, then fit the featurizer on the training records only.
pub fn fit_split(
    dataset: &Dataset,
    docs: &[TokenSequence],
    preprocessor: &Preprocessor,
    features: &FeatureConfig,
    fraction: f64,
    seed: u64,
) -> Result<FittedSplit> {
    let labels = labels_of(dataset)?;
    if docs.len() != dataset.len() {
        return Err(Error::DimensionMismatch {
            expected: dataset.len(),
            actual: docs.len(),
        });
    }
    let (train_idx, test_idx) = split_indices(dataset, fraction, seed)?;
    if test_idx.is_empty() {
        return Err(Error::invalid(format!("fraction {fraction} leaves no test records")));
    }
    let pick = |idx: &[usize]| -> Vec<TokenSequence> { idx.iter().map(|&i| docs[i].clone()).collect() };
    let (train_docs, test_docs) = (pick(&train_idx), pick(&test_idx));
    let (featurizer, x_train) = Featurizer::fit_transform(features, &train_docs, derive_seed(seed, 1))?;
    let x_test = featurizer.transform(&test_docs);
    let mut metadata = BTreeMap::new();
    metadata.insert("train_records".into(), train_idx.len().into());
    metadata.insert("seed".into(), seed.into());
    Ok(FittedSplit {
        featurizer: FeaturizerArtifact {
            preprocessor: preprocessor.clone(),
            featurizer,
            metadata,
        },
        x_train,
        y_train: train_idx.iter().map(|&i| labels[i].to_string()).collect(),
        x_test,
        y_test: test_idx.iter().map(|&i| labels[i].to_string()).collect(),
        description: format!(
            "stratified {:.0}/{:.0} ({} train, {} test)",
            fraction * 100.0,
            (1.0 - fraction) * 100.0,
            train_idx.len(),
            test_idx.len()
        ),
        seed,
    })
}

fn labels_of(dataset: &Dataset) -> Result<Vec<&str>> {
    dataset
        .records()
        .iter()
        .map(|t| {
            t.category
                .as_deref()
                .ok_or_else(|| Error::invalid(format!("record `{}` has no category", t.id)))
        })
        .collect()
}

/// Train (optionally tuning first) and evaluate one model on a fitted split.
/// `seed` drives the model only.
pub fn train_and_evaluate(
    split: &FittedSplit,
    entry: &ModelEntry,
    seed: u64,
) -> Result<(EvaluationReport, ModelArtifact)> {
    let mut spec = entry.model.clone().with_seed(seed);
    let mut metadata = BTreeMap::new();
    if let Some(tune) = &entry.tune {
        let (best, report) = grid_search(&split.x_train, &split.y_train, &spec, &tune.grid, tune.folds)?;
        metadata.insert("grid_search".to_string(), serde_json::to_value(&report)?);
        spec = best;
    }
    let mut model = train(&split.x_train, &split.y_train, &spec)?;
    model.featurizer_ref = split.featurizer.reference()?;
    let pred = model.predict(&split.x_test)?;
    let mut labels = model.labels.clone();
    for l in &split.y_test {
        if !labels.contains(l) {
            labels.push(l.clone());
        }
    }
    labels.sort();
    let report = EvaluationReport::new(
        &labels,
        &split.y_test,
        &pred,
        entry.name.clone(),
        split.featurizer.featurizer.name(),
        split.description.clone(),
        split.seed,
    )?;
    let artifact = ModelArtifact {
        featurizer: split.featurizer.clone(),
        model,
        metadata: metadata.into_iter().collect(),
    };
    Ok((report, artifact))
}

/// Every model at every train fraction and seed. The featurizer is fit once
/// per (feature config, fraction, seed) and shared by the models using it.
pub fn run_experiment(
    dataset: &Dataset,
    preprocessor: &Preprocessor,
    config: &ExperimentConfig,
) -> Result<ExperimentTable> {
    config.validate()?;
    let docs = preprocessor.process(dataset);
    let mut rows = Vec::new();
    let mut per_category = Vec::new();
    for (fi, &fraction) in config.fractions.iter().enumerate() {
        for (si, &seed) in config.seeds.iter().enumerate() {
            let mut fitted: Vec<(FeatureConfig, FittedSplit)> = Vec::new();
            for (mi, entry) in config.models.iter().enumerate() {
                let pos = match fitted.iter().position(|(c, _)| *c == entry.features) {
                    Some(p) => p,
                    None => {
                        let s = fit_split(dataset, &docs, preprocessor, &entry.features, fraction, seed)?;
                        fitted.push((entry.features.clone(), s));
                        fitted.len() - 1
                    }
                };
                let split = &fitted[pos].1;
                log::info!("experiment: {} at fraction {fraction}, seed {seed}", entry.name);
                let (report, _) = train_and_evaluate(split, entry, derive_seed(seed, 2 + mi as u64))?;
                let mut notes = BTreeMap::new();
                if let Featurizer::Embedding(e) = &split.featurizer.featurizer {
                    notes.insert("pca_components".into(), e.pca.k().into());
                    notes.insert("pca_retained_ratio_fit".into(), e.stats.retained_ratio_fit.into());
                    notes.insert("pca_retained_ratio_train".into(), e.stats.retained_ratio_train.into());
                }
                rows.push(ExperimentRow {
                    model: entry.name.clone(),
                    featurizer: report.featurizer.clone(),
                    fraction,
                    seed,
                    n_train: split.y_train.len(),
                    n_test: split.y_test.len(),
                    precision: report.weighted.precision,
                    recall: report.weighted.recall,
                    f1: report.weighted.f1,
                    zero_division: report.weighted.zero_division,
                    notes,
                });
                if fi == 0 && si == 0 {
                    per_category.push(report);
                }
            }
        }
    }
    let summary = summarize(&rows, config);
    Ok(ExperimentTable {
        rows,
        summary,
        per_category,
    })
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

fn summarize(rows: &[ExperimentRow], config: &ExperimentConfig) -> Vec<SummaryRow> {
    let mut out = Vec::new();
    for &fraction in &config.fractions {
        for entry in &config.models {
            let runs: Vec<&ExperimentRow> = rows
                .iter()
                .filter(|r| r.model == entry.name && r.fraction == fraction)
                .collect();
            if runs.is_empty() {
                continue;
            }
            out.push(SummaryRow {
                model: entry.name.clone(),
                fraction,
                runs: runs.len(),
                median_precision: median(runs.iter().map(|r| r.precision).collect()),
                median_recall: median(runs.iter().map(|r| r.recall).collect()),
                median_f1: median(runs.iter().map(|r| r.f1).collect()),
            });
        }
    }
    out
}

impl ExperimentTable {
    /// Text tables: medians per train fraction, then per-category scores.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let width = self.summary.iter().map(|r| r.model.len()).max().unwrap_or(5).max("Model".len());
        let mut fractions: Vec<f64> = Vec::new();
        for r in &self.summary {
            if !fractions.contains(&r.fraction) {
                fractions.push(r.fraction);
            }
        }
        for f in fractions {
            let runs = self.summary.iter().find(|r| r.fraction == f).map_or(0, |r| r.runs);
            let _ = writeln!(out, "Training data {:.0}% (median over {runs} seeds)", f * 100.0);
            let _ = writeln!(out, "{:<width$}  {:>9}  {:>6}  {:>6}", "Model", "Precision", "Recall", "F1");
            for r in self.summary.iter().filter(|r| r.fraction == f) {
                let _ = writeln!(
                    out,
                    "{:<width$}  {:>9.2}  {:>6.2}  {:>6.2}",
                    r.model, r.median_precision, r.median_recall, r.median_f1
                );
            }
            out.push('\n');
        }
        for report in &self.per_category {
            let _ = writeln!(out, "Per-category scores: {} ({}, seed {})", report.model, report.split, report.seed);
            out.push_str(&category_table(&report.per_category));
            out.push('\n');
        }
        out
    }
}
