use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Classifier kind, hyperparameters and seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    #[serde(default)]
    pub seed: u64,
    #[serde(flatten)]
    pub params: ModelParams,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelParams {
    NaiveBayes(NaiveBayesParams),
    LogisticRegression(LogisticParams),
    LinearSvm(SvmParams),
    RandomForest(ForestParams),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassWeight {
    #[default]
    None,
    /// Each class weighted by `N / (K * n_k)`.
    Balanced,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NaiveBayesParams {
    pub alpha: f64,
}

impl Default for NaiveBayesParams {
    fn default() -> Self {
        NaiveBayesParams { alpha: 1.0 }
    }
}

/// Settings shared by the two gradient-trained linear models.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Schedule {
    pub epochs: usize,
    pub batch_size: usize,
    /// Initial step, decayed linearly to zero over all steps.
    pub learning_rate: f64,
    pub class_weight: ClassWeight,
}

impl Default for Schedule {
    fn default() -> Self {
        Schedule {
            epochs: 30,
            batch_size: 32,
            learning_rate: 0.5,
            class_weight: ClassWeight::None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LogisticParams {
    /// L2 strength on the weights.
    pub lambda: f64,
    #[serde(flatten)]
    pub schedule: Schedule,
}

impl Default for LogisticParams {
    fn default() -> Self {
        LogisticParams {
            lambda: 1e-5,
            schedule: Schedule::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvmParams {
    /// Inverse regularization: the per-sample L2 strength is `1 / (C N)`.
    pub c: f64,
    #[serde(flatten)]
    pub schedule: Schedule,
}

impl Default for SvmParams {
    fn default() -> Self {
        SvmParams {
            c: 1.0,
            schedule: Schedule::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestParams {
    pub n_trees: usize,
    /// `None` grows trees until leaves are pure or `min_leaf` binds.
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 100,
            max_depth: None,
            min_leaf: 1,
        }
    }
}

impl ModelSpec {
    pub fn new(params: ModelParams, seed: u64) -> Self {
        ModelSpec { seed, params }
    }

    pub fn naive_bayes(alpha: f64) -> Self {
        ModelSpec::new(ModelParams::NaiveBayes(NaiveBayesParams { alpha }), 0)
    }

    pub fn logistic_regression() -> Self {
        ModelSpec::new(ModelParams::LogisticRegression(LogisticParams::default()), 0)
    }

    pub fn linear_svm() -> Self {
        ModelSpec::new(ModelParams::LinearSvm(SvmParams::default()), 0)
    }

    pub fn random_forest() -> Self {
        ModelSpec::new(ModelParams::RandomForest(ForestParams::default()), 0)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let spec: ModelSpec = toml::from_str(text).map_err(|e| Error::config(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn kind(&self) -> &'static str {
        match self.params {
            ModelParams::NaiveBayes(_) => "naive_bayes",
            ModelParams::LogisticRegression(_) => "logistic_regression",
            ModelParams::LinearSvm(_) => "linear_svm",
            ModelParams::RandomForest(_) => "random_forest",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let check_schedule = |s: &Schedule| {
            if s.epochs == 0 || s.batch_size == 0 {
                return Err(Error::config("epochs and batch_size must be positive"));
            }
            if !(s.learning_rate > 0.0 && s.learning_rate.is_finite()) {
                return Err(Error::config("learning_rate must be positive"));
            }
            Ok(())
        };
        match &self.params {
            ModelParams::NaiveBayes(p) if !(p.alpha > 0.0 && p.alpha.is_finite()) => {
                Err(Error::config("alpha must be positive"))
            }
            ModelParams::NaiveBayes(_) => Ok(()),
            ModelParams::LogisticRegression(p) => {
                if !(p.lambda >= 0.0 && p.lambda.is_finite()) {
                    return Err(Error::config("lambda must be non-negative"));
                }
                check_schedule(&p.schedule)
            }
            ModelParams::LinearSvm(p) => {
                if !(p.c > 0.0 && p.c.is_finite()) {
                    return Err(Error::config("C must be positive"));
                }
                check_schedule(&p.schedule)
            }
            ModelParams::RandomForest(p) => {
                if p.n_trees == 0 || p.min_leaf == 0 || p.max_depth == Some(0) {
                    return Err(Error::config("n_trees, min_leaf and max_depth must be at least 1"));
                }
                Ok(())
            }
        }
    }

    /// Ordering key where smaller means less capacity; used to break ties in
    /// grid search.
    pub fn capacity(&self) -> f64 {
        match &self.params {
            ModelParams::NaiveBayes(p) => -p.alpha,
            ModelParams::LogisticRegression(p) => -p.lambda,
            ModelParams::LinearSvm(p) => p.c,
            ModelParams::RandomForest(p) => p.max_depth.map_or(f64::INFINITY, |d| d as f64),
        }
    }
}
