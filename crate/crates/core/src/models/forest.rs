//! Bagged CART trees with Gini impurity and sqrt-feature subsampling.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::spec::ForestParams;
use crate::derive_seed;
use crate::features::{FeatureMatrix, Row};
use crate::similarity::CsrMatrix;

/// A tree in flat arrays. `feature < 0` marks a leaf whose class is `value`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Tree {
    pub feature: Vec<i64>,
    pub threshold: Vec<f64>,
    pub left: Vec<i64>,
    pub right: Vec<i64>,
    pub value: Vec<i64>,
}

impl Tree {
    pub fn len(&self) -> usize {
        self.feature.len()
    }

    pub fn is_empty(&self) -> bool {
        self.feature.is_empty()
    }

    fn push_leaf(&mut self, class: usize) -> usize {
        self.feature.push(-1);
        self.threshold.push(0.0);
        self.left.push(-1);
        self.right.push(-1);
        self.value.push(class as i64);
        self.len() - 1
    }

    pub fn predict_row(&self, row: Row<'_>) -> usize {
        let mut node = 0;
        while self.feature[node] >= 0 {
            let v = feature_value(row, self.feature[node] as usize);
            node = if v <= self.threshold[node] {
                self.left[node]
            } else {
                self.right[node]
            } as usize;
        }
        self.value[node] as usize
    }
}

fn feature_value(row: Row<'_>, j: usize) -> f64 {
    match row {
        Row::Dense(x) => x[j],
        Row::Sparse(idx, val) => idx.binary_search(&j).map_or(0.0, |p| val[p]),
    }
}

/// Column-wise access to the training matrix.
enum Columns<'a> {
    Dense(&'a crate::features::DenseMatrix),
    /// Transposed matrix, so row `j` holds feature `j`.
    Sparse(CsrMatrix),
}

impl Columns<'_> {
    /// Values of feature `j` for `samples`, written into `out`. `scratch` is
    /// an all-zero buffer with one slot per training row and is left zeroed.
    fn gather(&self, j: usize, samples: &[usize], scratch: &mut [f64], out: &mut Vec<f64>) {
        out.clear();
        match self {
            Columns::Dense(m) => out.extend(samples.iter().map(|&i| m.get(i, j))),
            Columns::Sparse(csc) => {
                let (rows, vals) = csc.row(j);
                for (&r, &v) in rows.iter().zip(vals) {
                    scratch[r] = v;
                }
                out.extend(samples.iter().map(|&i| scratch[i]));
                for &r in rows {
                    scratch[r] = 0.0;
                }
            }
        }
    }
}

struct Builder<'a> {
    columns: Columns<'a>,
    y: &'a [usize],
    k: usize,
    d: usize,
    params: &'a ForestParams,
    mtry: usize,
}

pub(crate) fn train_forest(x: &FeatureMatrix, y: &[usize], k: usize, params: &ForestParams, seed: u64) -> Vec<Tree> {
    let columns = match x {
        FeatureMatrix::Dense(m) => Columns::Dense(m),
        FeatureMatrix::Sparse(m) => Columns::Sparse(m.transpose()),
    };
    let d = x.cols();
    let builder = Builder {
        columns,
        y,
        k,
        d,
        params,
        mtry: ((d as f64).sqrt().ceil() as usize).clamp(1, d.max(1)),
    };
    let n = y.len();
    (0..params.n_trees)
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, t as u64));
            // A single tree sees every row once so that it can fit the data exactly.
            let samples: Vec<usize> = if params.n_trees > 1 {
                (0..n).map(|_| rng.gen_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            builder.grow(samples, &mut rng)
        })
        .collect()
}

struct Split {
    feature: usize,
    threshold: f64,
    impurity: f64,
}

impl Builder<'_> {
    fn grow(&self, samples: Vec<usize>, rng: &mut ChaCha8Rng) -> Tree {
        let mut tree = Tree::default();
        let mut scratch = vec![0.0f64; self.y.len()];
        // (node id, samples, depth); node ids are reserved before children are built
        tree.push_leaf(0);
        let mut stack = vec![(0usize, samples, 0usize)];
        let mut values = Vec::new();
        while let Some((node, samples, depth)) = stack.pop() {
            let counts = self.class_counts(&samples);
            let majority = argmax(&counts);
            tree.value[node] = majority as i64;
            let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
            let depth_ok = self.params.max_depth.is_none_or(|m| depth < m);
            if pure || !depth_ok || samples.len() < 2 * self.params.min_leaf {
                continue;
            }
            let Some(split) = self.best_split(&samples, &counts, rng, &mut scratch, &mut values) else {
                continue;
            };
            let (mut left, mut right) = (Vec::new(), Vec::new());
            self.columns.gather(split.feature, &samples, &mut scratch, &mut values);
            for (&i, &v) in samples.iter().zip(&values) {
                if v <= split.threshold {
                    left.push(i);
                } else {
                    right.push(i);
                }
            }
            let l = tree.push_leaf(majority);
            let r = tree.push_leaf(majority);
            tree.feature[node] = split.feature as i64;
            tree.threshold[node] = split.threshold;
            tree.left[node] = l as i64;
            tree.right[node] = r as i64;
            stack.push((r, right, depth + 1));
            stack.push((l, left, depth + 1));
        }
        tree
    }

    fn class_counts(&self, samples: &[usize]) -> Vec<usize> {
        let mut counts = vec![0usize; self.k];
        samples.iter().for_each(|&i| counts[self.y[i]] += 1);
        counts
    }

    /// Best Gini split over `mtry` random features; if none of them can
    /// separate the node, the remaining features are tried in random order.
    fn best_split(
        &self,
        samples: &[usize],
        counts: &[usize],
        rng: &mut ChaCha8Rng,
        scratch: &mut [f64],
        values: &mut Vec<f64>,
    ) -> Option<Split> {
        let first = rand::seq::index::sample(rng, self.d, self.mtry).into_vec();
        let mut best = self.search(&first, samples, counts, scratch, values);
        if best.is_none() && self.mtry < self.d {
            let mut chosen = vec![false; self.d];
            first.iter().for_each(|&j| chosen[j] = true);
            let mut rest: Vec<usize> = (0..self.d).filter(|&j| !chosen[j]).collect();
            rest.shuffle(rng);
            for chunk in rest.chunks(self.mtry) {
                best = self.search(chunk, samples, counts, scratch, values);
                if best.is_some() {
                    break;
                }
            }
        }
        best
    }

    fn search(
        &self,
        features: &[usize],
        samples: &[usize],
        counts: &[usize],
        scratch: &mut [f64],
        values: &mut Vec<f64>,
    ) -> Option<Split> {
        let n = samples.len();
        let min_leaf = self.params.min_leaf;
        let mut best: Option<Split> = None;
        let mut pairs: Vec<(f64, usize)> = Vec::with_capacity(n);
        let mut left = vec![0usize; self.k];
        for &j in features {
            self.columns.gather(j, samples, scratch, values);
            pairs.clear();
            pairs.extend(values.iter().copied().zip(samples.iter().map(|&i| self.y[i])));
            pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
            if pairs[0].0 == pairs[n - 1].0 {
                continue;
            }
            left.iter_mut().for_each(|c| *c = 0);
            for pos in 0..n - 1 {
                left[pairs[pos].1] += 1;
                let (lo, hi) = (pairs[pos].0, pairs[pos + 1].0);
                let n_left = pos + 1;
                if lo == hi || n_left < min_leaf || n - n_left < min_leaf {
                    continue;
                }
                let impurity = weighted_gini(&left, counts, n_left, n);
                if best.as_ref().is_none_or(|b| impurity < b.impurity) {
                    let mid = lo + (hi - lo) / 2.0;
                    let threshold = if mid < hi { mid } else { lo };
                    best = Some(Split {
                        feature: j,
                        threshold,
                        impurity,
                    });
                }
            }
        }
        best
    }
}

fn weighted_gini(left: &[usize], total: &[usize], n_left: usize, n: usize) -> f64 {
    let n_right = n - n_left;
    let (mut sl, mut sr) = (0.0, 0.0);
    for (&l, &t) in left.iter().zip(total) {
        let r = t - l;
        sl += (l * l) as f64;
        sr += (r * r) as f64;
    }
    let gl = 1.0 - sl / (n_left * n_left) as f64;
    let gr = 1.0 - sr / (n_right * n_right) as f64;
    (n_left as f64 * gl + n_right as f64 * gr) / n as f64
}

/// Index of the largest count; ties go to the lowest index.
pub(crate) fn argmax<T: PartialOrd + Copy>(values: &[T]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Vote fractions per class, row-major `n x k`.
pub(crate) fn forest_votes(trees: &[Tree], x: &FeatureMatrix, k: usize) -> Vec<f64> {
    let mut out = vec![0.0; x.rows() * k];
    let share = 1.0 / trees.len() as f64;
    for i in 0..x.rows() {
        let row = x.row(i);
        for t in trees {
            out[i * k + t.predict_row(row)] += share;
        }
    }
    out
}
