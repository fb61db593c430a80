//! Multi-class classifiers behind one train / predict interface.

mod forest;
mod grid;
mod linear;
mod naive_bayes;
mod spec;

use std::collections::{BTreeSet, HashMap};

pub use forest::Tree;
pub use grid::{grid_search, CvRow, GridPoint, GridReport, ParamGrid};
pub use linear::{softmax_gradient, softmax_objective, LinearWeights};
pub use naive_bayes::NaiveBayesWeights;
pub use spec::{
    ClassWeight, ForestParams, LogisticParams, ModelParams, ModelSpec, NaiveBayesParams, Schedule, SvmParams,
};

use crate::features::FeatureMatrix;
use crate::{Error, Result};

/// Fitted parameters, by model family.
#[derive(Clone, Debug, PartialEq)]
pub enum ModelState {
    NaiveBayes(NaiveBayesWeights),
    /// Softmax regression and one-vs-rest SVM share this shape.
    Linear(LinearWeights),
    Forest(Vec<Tree>),
}

/// A trained classifier. Immutable once built.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainedModel {
    pub spec: ModelSpec,
    /// Class labels in score-column order (sorted).
    pub labels: Vec<String>,
    pub n_features: usize,
    /// Identifies the featurizer the model was trained against.
    pub featurizer_ref: String,
    pub state: ModelState,
}

/// Train a classifier on feature rows `x` labelled `y`.
pub fn train<S: AsRef<str>>(x: &FeatureMatrix, y: &[S], spec: &ModelSpec) -> Result<TrainedModel> {
    spec.validate()?;
    if y.len() != x.rows() {
        return Err(Error::DimensionMismatch {
            expected: x.rows(),
            actual: y.len(),
        });
    }
    let labels: Vec<String> = y
        .iter()
        .map(|l| l.as_ref().to_string())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if labels.len() < 2 {
        return Err(Error::Training(format!(
            "need at least two distinct labels, found {}",
            labels.len()
        )));
    }
    if !x.all_finite() {
        return Err(Error::Training("features contain non-finite values".into()));
    }
    let index: HashMap<&str, usize> = labels.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
    let yi: Vec<usize> = y.iter().map(|l| index[l.as_ref()]).collect();
    let k = labels.len();
    let state = match &spec.params {
        ModelParams::NaiveBayes(p) => {
            if x.has_negative() {
                return Err(Error::Training("naive Bayes needs non-negative features".into()));
            }
            ModelState::NaiveBayes(naive_bayes::train_naive_bayes(x, &yi, k, p.alpha))
        }
        ModelParams::LogisticRegression(p) => {
            ModelState::Linear(linear::train_softmax(x, &yi, k, p.lambda, &p.schedule, spec.seed))
        }
        ModelParams::LinearSvm(p) => ModelState::Linear(linear::train_ovr_svm(x, &yi, k, p.c, &p.schedule, spec.seed)),
        ModelParams::RandomForest(p) => ModelState::Forest(forest::train_forest(x, &yi, k, p, spec.seed)),
    };
    Ok(TrainedModel {
        spec: spec.clone(),
        labels,
        n_features: x.cols(),
        featurizer_ref: String::new(),
        state,
    })
}

impl TrainedModel {
    pub fn kind(&self) -> &'static str {
        self.spec.kind()
    }

    fn check_dims(&self, x: &FeatureMatrix) -> Result<()> {
        if x.cols() != self.n_features {
            return Err(Error::DimensionMismatch {
                expected: self.n_features,
                actual: x.cols(),
            });
        }
        Ok(())
    }

    /// Per-class scores, row-major `n x k`: posteriors for naive Bayes and
    /// softmax regression, margins for the SVM, vote fractions for the forest.
    pub fn predict_scores(&self, x: &FeatureMatrix) -> Result<Vec<f64>> {
        self.check_dims(x)?;
        let k = self.labels.len();
        Ok(match &self.state {
            ModelState::NaiveBayes(nb) => {
                let mut s = naive_bayes::joint_log_likelihood(x, nb);
                linear::softmax_in_place(&mut s, k);
                s
            }
            ModelState::Linear(w) => {
                let mut s = linear::linear_scores(x, &w.weights, &w.bias);
                if matches!(self.spec.params, ModelParams::LogisticRegression(_)) {
                    linear::softmax_in_place(&mut s, k);
                }
                s
            }
            ModelState::Forest(trees) => forest::forest_votes(trees, x, k),
        })
    }

    /// Label indices of the per-row argmax; ties go to the earlier label.
    pub fn predict_indices(&self, x: &FeatureMatrix) -> Result<Vec<usize>> {
        let k = self.labels.len();
        let scores = match &self.state {
            // argmax of the joint log-likelihood avoids rounding in the softmax
            ModelState::NaiveBayes(nb) => {
                self.check_dims(x)?;
                naive_bayes::joint_log_likelihood(x, nb)
            }
            _ => self.predict_scores(x)?,
        };
        Ok(scores.chunks(k).map(forest::argmax).collect())
    }

    pub fn predict(&self, x: &FeatureMatrix) -> Result<Vec<String>> {
        Ok(self
            .predict_indices(x)?
            .into_iter()
            .map(|i| self.labels[i].clone())
            .collect())
    }

    /// Per-epoch training objective for the gradient-trained models.
    pub fn objective_trace(&self) -> &[f64] {
        match &self.state {
            ModelState::Linear(w) => &w.objective,
            _ => &[],
        }
    }
}
