use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::spec::ModelSpec;
use super::train;
use crate::evaluation::weighted_f1;
use crate::features::FeatureMatrix;
use crate::{Error, Result};

/// Hyperparameter lattice: each key is a spec field, each value a list of
/// settings. Points are the cartesian product, last key varying fastest.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParamGrid(pub BTreeMap<String, Vec<serde_json::Value>>);

impl ParamGrid {
    /// The default lattice for the tuned linear SVM.
    pub fn svm_default() -> Self {
        let mut g = BTreeMap::new();
        g.insert("c".to_string(), [0.01, 0.1, 1.0, 10.0].iter().map(|&v| v.into()).collect());
        g.insert("epochs".to_string(), vec![10.into(), 30.into()]);
        ParamGrid(g)
    }

    pub fn points(&self) -> Vec<BTreeMap<String, serde_json::Value>> {
        let mut points = vec![BTreeMap::new()];
        for (key, values) in &self.0 {
            points = points
                .into_iter()
                .flat_map(|p| {
                    values.iter().map(move |v| {
                        let mut q = p.clone();
                        q.insert(key.clone(), v.clone());
                        q
                    })
                })
                .collect();
        }
        points
    }

    /// `base` with the overrides of one grid point applied.
    pub fn apply(base: &ModelSpec, point: &BTreeMap<String, serde_json::Value>) -> Result<ModelSpec> {
        let mut value = serde_json::to_value(base)?;
        let obj = value.as_object_mut().expect("spec serializes to an object");
        for (k, v) in point {
            if k == "kind" || !obj.contains_key(k) {
                return Err(Error::config(format!("grid key `{k}` is not a {} parameter", base.kind())));
            }
            obj.insert(k.clone(), v.clone());
        }
        let spec: ModelSpec = serde_json::from_value(value).map_err(|e| Error::config(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CvRow {
    pub point: usize,
    pub fold: usize,
    /// `None` when the fold was degenerate.
    pub weighted_f1: Option<f64>,
    pub degenerate: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub index: usize,
    pub params: BTreeMap<String, serde_json::Value>,
    /// Mean over the non-degenerate folds.
    pub mean_weighted_f1: Option<f64>,
    pub degenerate_folds: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridReport {
    pub folds: usize,
    pub points: Vec<GridPoint>,
    pub rows: Vec<CvRow>,
    pub best: usize,
}

/// Stratified fold assignment, shuffled within each class.
pub(crate) fn stratified_folds<S: AsRef<str>>(y: &[S], k: usize, seed: u64) -> Vec<usize> {
    let mut by_class: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, l) in y.iter().enumerate() {
        by_class.entry(l.as_ref()).or_default().push(i);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fold = vec![0; y.len()];
    let mut next = 0;
    for members in by_class.values_mut() {
        members.shuffle(&mut rng);
        for &i in members.iter() {
            fold[i] = next % k;
            next += 1;
        }
    }
    fold
}

/// k-fold cross-validated weighted F1 for every grid point. The best point
/// wins on mean F1; ties go to lower capacity (smaller C, larger lambda),
/// then to the earlier point.
pub fn grid_search<S: AsRef<str>>(
    x: &FeatureMatrix,
    y: &[S],
    base: &ModelSpec,
    grid: &ParamGrid,
    folds: usize,
) -> Result<(ModelSpec, GridReport)> {
    if folds < 2 {
        return Err(Error::invalid("grid search needs at least 2 folds"));
    }
    if y.len() != x.rows() {
        return Err(Error::DimensionMismatch {
            expected: x.rows(),
            actual: y.len(),
        });
    }
    let overrides = grid.points();
    if grid.0.values().any(Vec::is_empty) {
        return Err(Error::invalid("grid has an axis with no values"));
    }
    let specs = overrides
        .iter()
        .map(|p| ParamGrid::apply(base, p))
        .collect::<Result<Vec<_>>>()?;
    let assignment = stratified_folds(y, folds, base.seed);
    let split: Vec<(Vec<usize>, Vec<usize>)> = (0..folds)
        .map(|f| (0..y.len()).partition(|&i| assignment[i] != f))
        .collect();

    let mut rows = Vec::new();
    let mut points = Vec::new();
    for (p, spec) in specs.iter().enumerate() {
        let mut scores = Vec::new();
        for (f, (train_idx, test_idx)) in split.iter().enumerate() {
            let score = fold_score(x, y, spec, train_idx, test_idx)?;
            if let Some(s) = score {
                scores.push(s);
            }
            log::debug!("grid point {p} fold {f}: {score:?}");
            rows.push(CvRow {
                point: p,
                fold: f,
                weighted_f1: score,
                degenerate: score.is_none(),
            });
        }
        points.push(GridPoint {
            index: p,
            params: overrides[p].clone(),
            mean_weighted_f1: (!scores.is_empty()).then(|| scores.iter().sum::<f64>() / scores.len() as f64),
            degenerate_folds: folds - scores.len(),
        });
    }

    let best = points
        .iter()
        .filter_map(|p| p.mean_weighted_f1.map(|s| (p.index, s)))
        .reduce(|a, b| {
            let better = b.1 > a.1 || (b.1 == a.1 && specs[b.0].capacity() < specs[a.0].capacity());
            if better {
                b
            } else {
                a
            }
        })
        .ok_or_else(|| Error::Training("every grid point had only degenerate folds".into()))?
        .0;
    Ok((
        specs[best].clone(),
        GridReport {
            folds,
            points,
            rows,
            best,
        },
    ))
}

fn fold_score<S: AsRef<str>>(
    x: &FeatureMatrix,
    y: &[S],
    spec: &ModelSpec,
    train_idx: &[usize],
    test_idx: &[usize],
) -> Result<Option<f64>> {
    if test_idx.is_empty() {
        return Ok(None);
    }
    let y_train: Vec<&str> = train_idx.iter().map(|&i| y[i].as_ref()).collect();
    let model = match train(&x.select_rows(train_idx), &y_train, spec) {
        Ok(m) => m,
        Err(Error::Training(_)) => return Ok(None),
        Err(e) => return Err(e),
    };
    let pred = model.predict(&x.select_rows(test_idx))?;
    let truth: Vec<&str> = test_idx.iter().map(|&i| y[i].as_ref()).collect();
    let pred: Vec<&str> = pred.iter().map(String::as_str).collect();
    weighted_f1(&truth, &pred).map(Some)
}
