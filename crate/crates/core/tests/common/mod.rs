//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use trxcat::features::{DenseMatrix, FeatureMatrix};
use trxcat::preprocess::TokenSequence;
use trxcat::similarity::{CsrMatrix, SparseVector, COSINE_SLACK};

/// Dense smoothed TF-IDF with l2 rows, computed from the definition.
pub fn dense_tfidf(docs: &[TokenSequence]) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut vocab: Vec<String> = Vec::new();
    for d in docs {
        for t in &d.tokens {
            if !vocab.contains(t) {
                vocab.push(t.clone());
            }
        }
    }
    let n = docs.len() as f64;
    let idf: Vec<f64> = vocab
        .iter()
        .map(|t| {
            let df = docs.iter().filter(|d| d.tokens.contains(t)).count() as f64;
            ((1.0 + n) / (1.0 + df)).ln() + 1.0
        })
        .collect();
    let rows = docs
        .iter()
        .map(|d| {
            let mut row: Vec<f64> = vocab
                .iter()
                .zip(&idf)
                .map(|(t, w)| d.tokens.iter().filter(|x| *x == t).count() as f64 * w)
                .collect();
            let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 0.0 {
                row.iter_mut().for_each(|v| *v /= norm);
            }
            row
        })
        .collect();
    (vocab, rows)
}

pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn brute_pairs(rows: &[Vec<f64>], threshold: f64) -> BTreeMap<(usize, usize), f64> {
    let mut out = BTreeMap::new();
    for i in 0..rows.len() {
        for j in i + 1..rows.len() {
            let c = cosine(&rows[i], &rows[j]);
            if c >= threshold - COSINE_SLACK {
                out.insert((i, j), c);
            }
        }
    }
    out
}

/// Greedy earliest-kept filter by exhaustive comparison.
pub fn brute_dedup(rows: &[Vec<f64>], threshold: f64) -> (Vec<usize>, Vec<(usize, usize, f64)>) {
    let mut kept: Vec<usize> = Vec::new();
    let mut dropped = Vec::new();
    for i in 0..rows.len() {
        let hit = kept
            .iter()
            .map(|&k| (k, cosine(&rows[k], &rows[i])))
            .find(|&(_, c)| c >= threshold - COSINE_SLACK);
        match hit {
            Some((k, c)) => dropped.push((i, k, c)),
            None => kept.push(i),
        }
    }
    (kept, dropped)
}

pub fn random_corpus(rng: &mut ChaCha8Rng, n: usize, vocab: usize) -> Vec<TokenSequence> {
    (0..n)
        .map(|_| {
            let len = rng.gen_range(0..6);
            let tokens = (0..len).map(|_| format!("w{}", rng.gen_range(0..vocab))).collect();
            TokenSequence::new("", tokens)
        })
        .collect()
}

pub fn sparse(rows: &[Vec<f64>]) -> FeatureMatrix {
    let cols = rows[0].len();
    let vecs: Vec<SparseVector> = rows
        .iter()
        .map(|r| SparseVector::new(cols, r.iter().copied().enumerate().collect()).unwrap())
        .collect();
    CsrMatrix::from_rows(cols, &vecs).unwrap().into()
}

pub fn dense(rows: &[Vec<f64>]) -> FeatureMatrix {
    DenseMatrix::from_rows(rows).unwrap().into()
}

/// Posterior of multinomial naive Bayes by direct products.
pub fn nb_oracle(x: &[Vec<f64>], y: &[usize], k: usize, alpha: f64, query: &[f64]) -> Vec<f64> {
    let d = x[0].len();
    let n = y.len() as f64;
    let mut joint = Vec::new();
    for c in 0..k {
        let prior = y.iter().filter(|&&l| l == c).count() as f64 / n;
        let mut totals = vec![0.0; d];
        for (row, &l) in x.iter().zip(y) {
            if l == c {
                totals.iter_mut().zip(row).for_each(|(t, v)| *t += v);
            }
        }
        let denom: f64 = totals.iter().sum::<f64>() + alpha * d as f64;
        let mut p = prior;
        for j in 0..d {
            p *= ((totals[j] + alpha) / denom).powf(query[j]);
        }
        joint.push(p);
    }
    let z: f64 = joint.iter().sum();
    joint.iter().map(|p| p / z).collect()
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix. Returns
/// eigenvalues descending with unit eigenvectors as rows.
pub fn jacobi_eigen(mut a: Vec<Vec<f64>>) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut v: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| f64::from(u8::from(i == j))).collect()).collect();
    for _sweep in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[i][j] * a[i][j]).sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let (vp, vq) = (row[p], row[q]);
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j][j].total_cmp(&a[i][i]));
    let values = order.iter().map(|&i| a[i][i]).collect();
    let vectors = order.iter().map(|&i| (0..n).map(|k| v[k][i]).collect()).collect();
    (values, vectors)
}

pub fn covariance(x: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let (n, d) = (x.len(), x[0].len());
    let mean: Vec<f64> = (0..d).map(|j| x.iter().map(|r| r[j]).sum::<f64>() / n as f64).collect();
    (0..d)
        .map(|a| {
            (0..d)
                .map(|b| x.iter().map(|r| (r[a] - mean[a]) * (r[b] - mean[b])).sum::<f64>() / (n - 1) as f64)
                .collect()
        })
        .collect()
}

pub fn random_rows(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Vec<Vec<f64>> {
    // uneven column scales keep the eigen gaps well separated
    (0..n)
        .map(|_| (0..d).map(|j| rng.sample::<f64, _>(StandardNormal) * (1.0 + j as f64)).collect())
        .collect()
}

/// Per-class scores straight from the definitions, then support-weighted.
pub fn brute_weighted(counts: &[Vec<u64>]) -> (f64, f64, f64) {
    let k = counts.len();
    let total: u64 = counts.iter().flatten().sum();
    let (mut p, mut r, mut f) = (0.0, 0.0, 0.0);
    for c in 0..k {
        let tp = counts[c][c] as f64;
        let row: u64 = counts[c].iter().sum();
        let col: u64 = (0..k).map(|i| counts[i][c]).sum();
        let pc = if col == 0 { 0.0 } else { tp / col as f64 };
        let rc = if row == 0 { 0.0 } else { tp / row as f64 };
        let fc = if pc + rc == 0.0 { 0.0 } else { 2.0 * pc * rc / (pc + rc) };
        let w = row as f64 / total as f64;
        p += w * pc;
        r += w * rc;
        f += w * fc;
    }
    (p, r, f)
}
