//! Confusion matrices, support-weighted metrics, reports and the
//! train-fraction experiment runner.

mod experiment;
mod metrics;
mod report;

pub use experiment::{
    fit_split, prepare_corpus, run_experiment, train_and_evaluate, ExperimentConfig, ExperimentRow, ExperimentTable,
    FittedSplit, ModelEntry, PipelineConfig, SummaryRow, TuneConfig,
};
pub use metrics::{
    confusion, confusion_with_labels, per_class_metrics, weighted_f1, weighted_metrics, ClassMetrics,
    ConfusionMatrix, WeightedMetrics,
};
pub use report::{category_table, EvaluationReport};
