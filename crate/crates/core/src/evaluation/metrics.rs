use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Counts indexed `[true][predicted]` over an ordered label list.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub labels: Vec<String>,
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn from_counts(labels: Vec<String>, counts: Vec<Vec<u64>>) -> Result<Self> {
        if counts.len() != labels.len() || counts.iter().any(|r| r.len() != labels.len()) {
            return Err(Error::DimensionMismatch {
                expected: labels.len(),
                actual: counts.len(),
            });
        }
        Ok(ConfusionMatrix { labels, counts })
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.labels.len()).map(|k| self.counts[k][k]).sum()
    }

    pub fn accuracy(&self) -> f64 {
        self.trace() as f64 / self.total() as f64
    }

    pub fn support(&self, k: usize) -> u64 {
        self.counts[k].iter().sum()
    }

    pub fn predicted(&self, k: usize) -> u64 {
        self.counts.iter().map(|r| r[k]).sum()
    }
}

/// Tally over the sorted union of labels in both sequences.
pub fn confusion<S: AsRef<str>>(y_true: &[S], y_pred: &[S]) -> Result<ConfusionMatrix> {
    let labels: BTreeSet<&str> = y_true.iter().chain(y_pred).map(AsRef::as_ref).collect();
    let labels: Vec<String> = labels.into_iter().map(str::to_string).collect();
    confusion_with_labels(&labels, y_true, y_pred)
}

/// Tally over a fixed label order; labels outside it are an error.
pub fn confusion_with_labels<S: AsRef<str>>(labels: &[String], y_true: &[S], y_pred: &[S]) -> Result<ConfusionMatrix> {
    if y_true.len() != y_pred.len() {
        return Err(Error::DimensionMismatch {
            expected: y_true.len(),
            actual: y_pred.len(),
        });
    }
    let index: HashMap<&str, usize> = labels.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
    let lookup = |l: &str| {
        index
            .get(l)
            .copied()
            .ok_or_else(|| Error::invalid(format!("label `{l}` is not in the label list")))
    };
    let mut counts = vec![vec![0u64; labels.len()]; labels.len()];
    for (t, p) in y_true.iter().zip(y_pred) {
        counts[lookup(t.as_ref())?][lookup(p.as_ref())?] += 1;
    }
    Ok(ConfusionMatrix {
        labels: labels.to_vec(),
        counts,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub label: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
    /// Precision or recall was undefined and reported as 0.
    pub zero_division: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Some class had an undefined precision or recall.
    pub zero_division: bool,
}

pub fn per_class_metrics(m: &ConfusionMatrix) -> Vec<ClassMetrics> {
    (0..m.labels.len())
        .map(|k| {
            let tp = m.counts[k][k] as f64;
            let (support, predicted) = (m.support(k), m.predicted(k));
            let precision = if predicted == 0 { 0.0 } else { tp / predicted as f64 };
            let recall = if support == 0 { 0.0 } else { tp / support as f64 };
            let f1 = if precision + recall == 0.0 {
                0.0
            } else {
                2.0 * precision * recall / (precision + recall)
            };
            ClassMetrics {
                label: m.labels[k].clone(),
                precision,
                recall,
                f1,
                support,
                zero_division: predicted == 0 || support == 0,
            }
        })
        .collect()
}

/// Support-weighted averages of per-class precision, recall and F1.
pub fn weighted_metrics(m: &ConfusionMatrix) -> Result<WeightedMetrics> {
    let total = m.total();
    if total == 0 {
        return Err(Error::Empty("confusion matrix has no records".into()));
    }
    let mut out = WeightedMetrics {
        precision: 0.0,
        recall: 0.0,
        f1: 0.0,
        zero_division: false,
    };
    for c in per_class_metrics(m) {
        let w = c.support as f64;
        out.precision += w * c.precision;
        out.recall += w * c.recall;
        out.f1 += w * c.f1;
        // classes absent from the truth carry no weight, but their
        // undefined recall is still worth flagging
        out.zero_division |= c.zero_division;
    }
    let n = total as f64;
    out.precision /= n;
    out.recall /= n;
    out.f1 /= n;
    Ok(out)
}

/// Weighted F1 of two label sequences.
pub fn weighted_f1<S: AsRef<str>>(y_true: &[S], y_pred: &[S]) -> Result<f64> {
    Ok(weighted_metrics(&confusion(y_true, y_pred)?)?.f1)
}
