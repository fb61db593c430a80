//! Softmax regression and one-vs-rest linear SVM.
//!
//! Both use mini-batch proximal gradient descent: the data-term step is taken
//! first and the L2 term is applied as a shrink `w <- w / (1 + eta lambda)`.
//! Weights are kept as `scale * v` so the shrink costs O(1). The weight step
//! is divided by the mean squared row norm, which makes training invariant to
//! a rescaling of the features when lambda (or C) is rescaled to match.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::spec::{ClassWeight, Schedule};
use crate::derive_seed;
use crate::features::FeatureMatrix;

/// Weights `k x d`, row-major, plus one bias per class.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearWeights {
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    /// Regularized training objective after each epoch.
    pub objective: Vec<f64>,
}

pub(crate) fn class_weights(y: &[usize], k: usize, mode: ClassWeight) -> Vec<f64> {
    match mode {
        ClassWeight::None => vec![1.0; k],
        ClassWeight::Balanced => {
            let mut counts = vec![0usize; k];
            y.iter().for_each(|&c| counts[c] += 1);
            counts
                .iter()
                .map(|&c| if c == 0 { 0.0 } else { y.len() as f64 / (k as f64 * c as f64) })
                .collect()
        }
    }
}

fn mean_squared_norm(x: &FeatureMatrix) -> f64 {
    let n = x.rows();
    let r = (0..n).map(|i| x.row(i).squared_norm()).sum::<f64>() / n as f64;
    if r > 0.0 {
        r
    } else {
        1.0
    }
}

/// Lazily scaled weight block: effective weights are `scale * v`.
struct Scaled {
    v: Vec<f64>,
    scale: f64,
}

impl Scaled {
    fn new(len: usize) -> Self {
        Scaled {
            v: vec![0.0; len],
            scale: 1.0,
        }
    }

    fn shrink(&mut self, factor: f64) {
        self.scale /= factor;
        if self.scale < 1e-9 {
            let s = self.scale;
            self.v.iter_mut().for_each(|w| *w *= s);
            self.scale = 1.0;
        }
    }

    fn materialize(self) -> Vec<f64> {
        let s = self.scale;
        self.v.into_iter().map(|w| w * s).collect()
    }
}

struct Steps {
    total: f64,
    done: usize,
    lr0: f64,
}

impl Steps {
    fn new(n: usize, s: &Schedule) -> Self {
        Steps {
            total: (s.epochs * n.div_ceil(s.batch_size)) as f64,
            done: 0,
            lr0: s.learning_rate,
        }
    }

    fn next(&mut self) -> f64 {
        let lr = self.lr0 * (1.0 - self.done as f64 / self.total);
        self.done += 1;
        lr
    }
}

/// Row loss and gradient with respect to the logits for softmax cross-entropy.
fn softmax_row(logits: &[f64], label: usize, grad: &mut [f64]) -> f64 {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut z = 0.0;
    for (g, &l) in grad.iter_mut().zip(logits) {
        *g = (l - max).exp();
        z += *g;
    }
    grad.iter_mut().for_each(|g| *g /= z);
    let loss = z.ln() + max - logits[label];
    grad[label] -= 1.0;
    loss
}

pub(crate) fn train_softmax(
    x: &FeatureMatrix,
    y: &[usize],
    k: usize,
    lambda: f64,
    schedule: &Schedule,
    seed: u64,
) -> LinearWeights {
    let (n, d) = (x.rows(), x.cols());
    let cw = class_weights(y, k, schedule.class_weight);
    let r = mean_squared_norm(x);
    let mut w: Vec<Scaled> = (0..k).map(|_| Scaled::new(d)).collect();
    let mut bias = vec![0.0; k];
    let mut steps = Steps::new(n, schedule);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..n).collect();
    let mut logits = vec![0.0; k];
    let mut grads: Vec<f64> = Vec::new();
    let mut objective = Vec::with_capacity(schedule.epochs);
    for _ in 0..schedule.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(schedule.batch_size) {
            let lr = steps.next();
            let eta = lr / r;
            let b = batch.len() as f64;
            grads.clear();
            for &i in batch {
                let row = x.row(i);
                for c in 0..k {
                    logits[c] = w[c].scale * row.dot(&w[c].v) + bias[c];
                }
                let start = grads.len();
                grads.resize(start + k, 0.0);
                softmax_row(&logits, y[i], &mut grads[start..]);
                grads[start..].iter_mut().for_each(|g| *g *= cw[y[i]] / b);
            }
            for (&i, g) in batch.iter().zip(grads.chunks(k)) {
                let row = x.row(i);
                for c in 0..k {
                    if g[c] != 0.0 {
                        row.axpy(-(eta / w[c].scale) * g[c], &mut w[c].v);
                    }
                    bias[c] -= lr * g[c];
                }
            }
            for wc in &mut w {
                wc.shrink(1.0 + eta * lambda);
            }
        }
        objective.push(softmax_objective_scaled(x, y, &cw, &w, &bias, lambda));
    }
    let weights = w.into_iter().flat_map(Scaled::materialize).collect();
    LinearWeights {
        weights,
        bias,
        objective,
    }
}

fn softmax_objective_scaled(x: &FeatureMatrix, y: &[usize], cw: &[f64], w: &[Scaled], bias: &[f64], lambda: f64) -> f64 {
    let k = w.len();
    let mut logits = vec![0.0; k];
    let mut grad = vec![0.0; k];
    let mut loss = 0.0;
    for (i, &label) in y.iter().enumerate() {
        let row = x.row(i);
        for c in 0..k {
            logits[c] = w[c].scale * row.dot(&w[c].v) + bias[c];
        }
        loss += cw[label] * softmax_row(&logits, label, &mut grad);
    }
    let reg: f64 = w
        .iter()
        .map(|wc| wc.scale * wc.scale * wc.v.iter().map(|v| v * v).sum::<f64>())
        .sum();
    loss / y.len() as f64 + 0.5 * lambda * reg
}

/// Mean cross-entropy plus `lambda / 2 * |W|^2`; `weights` is `k x d`.
pub fn softmax_objective(x: &FeatureMatrix, y: &[usize], weights: &[f64], bias: &[f64], lambda: f64) -> f64 {
    let (k, d) = (bias.len(), x.cols());
    let w: Vec<Scaled> = weights
        .chunks(d)
        .map(|c| Scaled {
            v: c.to_vec(),
            scale: 1.0,
        })
        .collect();
    softmax_objective_scaled(x, y, &vec![1.0; k], &w, bias, lambda)
}

/// Analytic gradient of [`softmax_objective`] with respect to weights and bias.
pub fn softmax_gradient(x: &FeatureMatrix, y: &[usize], weights: &[f64], bias: &[f64], lambda: f64) -> (Vec<f64>, Vec<f64>) {
    let (k, d, n) = (bias.len(), x.cols(), x.rows());
    let mut gw: Vec<f64> = weights.iter().map(|w| lambda * w).collect();
    let mut gb = vec![0.0; k];
    let mut logits = vec![0.0; k];
    let mut g = vec![0.0; k];
    for (i, &label) in y.iter().enumerate() {
        let row = x.row(i);
        for c in 0..k {
            logits[c] = row.dot(&weights[c * d..(c + 1) * d]) + bias[c];
        }
        softmax_row(&logits, label, &mut g);
        for c in 0..k {
            row.axpy(g[c] / n as f64, &mut gw[c * d..(c + 1) * d]);
            gb[c] += g[c] / n as f64;
        }
    }
    (gw, gb)
}

/// One-vs-rest hinge loss; class `c` is trained on its own seed stream.
pub(crate) fn train_ovr_svm(
    x: &FeatureMatrix,
    y: &[usize],
    k: usize,
    c_reg: f64,
    schedule: &Schedule,
    seed: u64,
) -> LinearWeights {
    let (n, d) = (x.rows(), x.cols());
    let lambda = 1.0 / (c_reg * n as f64);
    let cw = class_weights(y, k, schedule.class_weight);
    let r = mean_squared_norm(x);
    let mut weights = Vec::with_capacity(k * d);
    let mut bias = Vec::with_capacity(k);
    let mut objective = vec![0.0; schedule.epochs];
    for class in 0..k {
        let sign: Vec<f64> = y.iter().map(|&l| if l == class { 1.0 } else { -1.0 }).collect();
        let mut w = Scaled::new(d);
        let mut b = 0.0;
        let mut steps = Steps::new(n, schedule);
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, class as u64));
        let mut order: Vec<usize> = (0..n).collect();
        let mut active: Vec<(usize, f64)> = Vec::new();
        for epoch in 0..schedule.epochs {
            order.shuffle(&mut rng);
            for batch in order.chunks(schedule.batch_size) {
                let lr = steps.next();
                let eta = lr / r;
                let bsz = batch.len() as f64;
                active.clear();
                for &i in batch {
                    let margin = sign[i] * (w.scale * x.row(i).dot(&w.v) + b);
                    if margin < 1.0 {
                        active.push((i, sign[i] * cw[y[i]] / bsz));
                    }
                }
                for &(i, g) in &active {
                    x.row(i).axpy((eta / w.scale) * g, &mut w.v);
                    b += lr * g;
                }
                w.shrink(1.0 + eta * lambda);
            }
            objective[epoch] += hinge_objective(x, &sign, y, &cw, &w, b, lambda);
        }
        weights.extend(w.materialize());
        bias.push(b);
    }
    LinearWeights {
        weights,
        bias,
        objective,
    }
}

fn hinge_objective(x: &FeatureMatrix, sign: &[f64], y: &[usize], cw: &[f64], w: &Scaled, b: f64, lambda: f64) -> f64 {
    let loss: f64 = (0..x.rows())
        .map(|i| cw[y[i]] * (1.0 - sign[i] * (w.scale * x.row(i).dot(&w.v) + b)).max(0.0))
        .sum();
    let norm: f64 = w.v.iter().map(|v| v * v).sum::<f64>() * w.scale * w.scale;
    loss / x.rows() as f64 + 0.5 * lambda * norm
}

/// Class scores `x W^T + b`, row-major `n x k`.
pub(crate) fn linear_scores(x: &FeatureMatrix, weights: &[f64], bias: &[f64]) -> Vec<f64> {
    let (k, d) = (bias.len(), x.cols());
    let mut out = Vec::with_capacity(x.rows() * k);
    for i in 0..x.rows() {
        let row = x.row(i);
        for c in 0..k {
            out.push(row.dot(&weights[c * d..(c + 1) * d]) + bias[c]);
        }
    }
    out
}

pub(crate) fn softmax_in_place(scores: &mut [f64], k: usize) {
    for row in scores.chunks_mut(k) {
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut z = 0.0;
        row.iter_mut().for_each(|s| {
            *s = (*s - max).exp();
            z += *s;
        });
        row.iter_mut().for_each(|s| *s /= z);
    }
}
