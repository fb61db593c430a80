use serde::{Deserialize, Serialize};

use super::sparse::CsrMatrix;
use crate::{Error, Result};

/// Absolute slack applied to the threshold comparison, so that pairs whose
/// cosine equals the threshold up to rounding are not lost.
pub const COSINE_SLACK: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimilarPair {
    pub i: usize,
    pub j: usize,
    pub cosine: f64,
}

/// All pairs `i < j` of rows whose dot product reaches `threshold`.
///
/// Rows are processed in blocks of `block_rows`; each row is multiplied
/// against the column postings of `m`, candidates are collected in a dense
/// scratch row of length N, verified and reset before the next row. Memory
/// stays at O(N + nnz) plus the emitted pairs.
///
/// For non-negative rows of norm at most one the multiplication skips a
/// prefix of each row: taking columns most frequent first, the longest
/// prefix whose l2 norm stays below the threshold cannot produce a match on
/// its own (Cauchy-Schwarz), so every matching pair shares a column outside
/// it. The frequent, low-weight terms that dominate the cost of a plain
/// `A·Aᵀ` are exactly the ones skipped. Candidates are verified with the
/// full dot product, so the result is exact.
pub fn similar_pairs(m: &CsrMatrix, threshold: f64, block_rows: usize) -> Result<Vec<SimilarPair>> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(Error::invalid(format!("threshold {threshold} not in (0, 1]")));
    }
    if block_rows == 0 {
        return Err(Error::invalid("block_rows must be positive"));
    }
    let postings = m.transpose();
    let prunable = m.min_value().map_or(true, |v| v >= 0.0) && (0..m.rows()).all(|i| m.row_norm(i) <= 1.0 + 1e-9);
    let kernel = Kernel {
        m,
        rank: frequency_rank(&postings),
        postings: &postings,
        // rounding margin: skip a little less than the bound allows
        prefix_bound: if prunable { threshold - COSINE_SLACK - 1e-9 } else { 0.0 },
        threshold,
    };
    let mut scratch = Scratch {
        seen: vec![false; m.rows()],
        touched: Vec::new(),
        order: Vec::new(),
    };
    let mut out = Vec::new();
    let mut start = 0;
    while start < m.rows() {
        let end = (start + block_rows).min(m.rows());
        for i in start..end {
            kernel.row_pairs(i, &mut scratch, &mut out);
        }
        start = end;
    }
    Ok(out)
}

/// Rank of each column, most frequent first, ties by column index.
fn frequency_rank(postings: &CsrMatrix) -> Vec<usize> {
    let df = |c: usize| postings.indptr()[c + 1] - postings.indptr()[c];
    let mut order: Vec<usize> = (0..postings.rows()).collect();
    order.sort_by(|&a, &b| df(b).cmp(&df(a)).then(a.cmp(&b)));
    let mut rank = vec![0; order.len()];
    for (r, &c) in order.iter().enumerate() {
        rank[c] = r;
    }
    rank
}

/// Dot product of two sorted sparse rows, summed in column order.
fn sparse_dot(a: (&[usize], &[f64]), b: (&[usize], &[f64])) -> f64 {
    let (mut p, mut q, mut sum) = (0, 0, 0.0);
    while p < a.0.len() && q < b.0.len() {
        match a.0[p].cmp(&b.0[q]) {
            std::cmp::Ordering::Less => p += 1,
            std::cmp::Ordering::Greater => q += 1,
            std::cmp::Ordering::Equal => {
                sum += a.1[p] * b.1[q];
                p += 1;
                q += 1;
            }
        }
    }
    sum
}

struct Kernel<'a> {
    m: &'a CsrMatrix,
    postings: &'a CsrMatrix,
    rank: Vec<usize>,
    prefix_bound: f64,
    threshold: f64,
}

struct Scratch {
    seen: Vec<bool>,
    touched: Vec<usize>,
    order: Vec<usize>,
}

impl Kernel<'_> {
    fn row_pairs(&self, i: usize, scratch: &mut Scratch, out: &mut Vec<SimilarPair>) {
        let row = self.m.row(i);
        let (cols, vals) = row;
        scratch.order.clear();
        scratch.order.extend(0..cols.len());
        scratch.order.sort_unstable_by_key(|&e| self.rank[cols[e]]);
        let mut prefix_sq = 0.0;
        let mut skip = 0;
        for &e in &scratch.order {
            let next = prefix_sq + vals[e] * vals[e];
            if next.sqrt() >= self.prefix_bound {
                break;
            }
            prefix_sq = next;
            skip += 1;
        }
        for &e in &scratch.order[skip..] {
            let docs = self.postings.row(cols[e]).0;
            // postings are sorted by row; only rows after i are needed
            let from = docs.partition_point(|&d| d <= i);
            for &j in &docs[from..] {
                if !scratch.seen[j] {
                    scratch.seen[j] = true;
                    scratch.touched.push(j);
                }
            }
        }
        scratch.touched.sort_unstable();
        for &j in &scratch.touched {
            let cosine = sparse_dot(row, self.m.row(j));
            if cosine >= self.threshold - COSINE_SLACK {
                out.push(SimilarPair { i, j, cosine });
            }
            scratch.seen[j] = false;
        }
        scratch.touched.clear();
    }
}
