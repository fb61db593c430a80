use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::metrics::{
    confusion_with_labels, per_class_metrics, weighted_metrics, ClassMetrics, ConfusionMatrix, WeightedMetrics,
};
use crate::{Error, Result};

/// Held-out evaluation of one model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub model: String,
    pub featurizer: String,
    /// Human-readable description of the train/test partition.
    pub split: String,
    pub seed: u64,
    pub total: u64,
    pub accuracy: f64,
    pub weighted: WeightedMetrics,
    pub per_category: Vec<ClassMetrics>,
    pub confusion: ConfusionMatrix,
}

impl EvaluationReport {
    /// Build a report over `labels`, which must cover both label sequences.
    pub fn new<S: AsRef<str>>(
        labels: &[String],
        y_true: &[S],
        y_pred: &[S],
        model: impl Into<String>,
        featurizer: impl Into<String>,
        split: impl Into<String>,
        seed: u64,
    ) -> Result<Self> {
        let confusion = confusion_with_labels(labels, y_true, y_pred)?;
        let weighted = weighted_metrics(&confusion)?;
        let accuracy = confusion.accuracy();
        // support-weighted recall is the accuracy, identically
        if (weighted.recall - accuracy).abs() > 1e-12 {
            return Err(Error::Training(format!(
                "weighted recall {} differs from accuracy {accuracy}",
                weighted.recall
            )));
        }
        Ok(EvaluationReport {
            model: model.into(),
            featurizer: featurizer.into(),
            split: split.into(),
            seed,
            total: confusion.total(),
            accuracy,
            weighted,
            per_category: per_class_metrics(&confusion),
            confusion,
        })
    }

    /// Per-category table: category, precision, recall, F1, support.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "model: {}  features: {}  split: {}  seed: {}",
            self.model, self.featurizer, self.split, self.seed
        );
        let _ = writeln!(
            out,
            "weighted precision {:.4}  recall {:.4}  F1 {:.4}  accuracy {:.4}  (n = {})",
            self.weighted.precision, self.weighted.recall, self.weighted.f1, self.accuracy, self.total
        );
        if self.weighted.zero_division {
            let _ = writeln!(out, "note: some categories had no predictions or no support; their scores are 0");
        }
        out.push('\n');
        out.push_str(&category_table(&self.per_category));
        out
    }
}

/// Aligned text table of per-category scores, largest support first.
pub fn category_table(rows: &[ClassMetrics]) -> String {
    let mut rows: Vec<&ClassMetrics> = rows.iter().collect();
    rows.sort_by(|a, b| b.support.cmp(&a.support).then(a.label.cmp(&b.label)));
    let width = rows.iter().map(|r| r.label.len()).max().unwrap_or(0).max("Category".len());
    let mut out = String::new();
    let _ = writeln!(out, "{:<width$}  {:>9}  {:>6}  {:>6}  {:>7}", "Category", "Precision", "Recall", "F1", "Support");
    for r in rows {
        let flag = if r.zero_division { " *" } else { "" };
        let _ = writeln!(
            out,
            "{:<width$}  {:>9.2}  {:>6.2}  {:>6.2}  {:>7}{flag}",
            r.label, r.precision, r.recall, r.f1, r.support
        );
    }
    out
}
