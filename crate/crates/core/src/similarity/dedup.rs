use serde::{Deserialize, Serialize};

use super::pairs::similar_pairs;
use super::tfidf::{fit_tfidf, transform};
use crate::corpus::Dataset;
use crate::preprocess::TokenSequence;
use crate::{Error, Result};

/// One line of the drop report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DropRecord {
    pub dropped: String,
    pub kept: String,
    pub cosine: f64,
}

/// Indices of kept records plus, for every dropped one, the earliest kept
/// record that matched it.
#[derive(Clone, Debug, PartialEq)]
pub struct DedupOutcome {
    pub kept: Vec<usize>,
    /// `(dropped, kept, cosine)` in input order of the dropped record.
    pub dropped: Vec<(usize, usize, f64)>,
}

/// Greedy earliest-kept filter over unigram TF-IDF vectors of `docs`.
pub fn dedup_indices(docs: &[TokenSequence], threshold: f64, block_rows: usize) -> Result<DedupOutcome> {
    let n = docs.len();
    let model = match fit_tfidf(docs, 1) {
        Ok(m) => m,
        // nothing but zero vectors, which are always kept
        Err(Error::Empty(_)) => {
            return Ok(DedupOutcome {
                kept: (0..n).collect(),
                dropped: Vec::new(),
            })
        }
        Err(e) => return Err(e),
    };
    let pairs = similar_pairs(&transform(&model, docs), threshold, block_rows)?;

    // Regroup pairs by their later index. Pairs are sorted by (i, j), so each
    // group ends up sorted by i.
    let mut offsets = vec![0usize; n + 1];
    for p in &pairs {
        offsets[p.j + 1] += 1;
    }
    for k in 0..n {
        offsets[k + 1] += offsets[k];
    }
    let mut fill = offsets.clone();
    let mut earlier = vec![(0usize, 0.0f64); pairs.len()];
    for p in &pairs {
        earlier[fill[p.j]] = (p.i, p.cosine);
        fill[p.j] += 1;
    }
    drop(pairs);

    let mut is_kept = vec![false; n];
    let mut outcome = DedupOutcome {
        kept: Vec::new(),
        dropped: Vec::new(),
    };
    for j in 0..n {
        let matched = earlier[offsets[j]..offsets[j + 1]]
            .iter()
            .find(|(i, _)| is_kept[*i]);
        match matched {
            Some(&(i, cosine)) => outcome.dropped.push((j, i, cosine)),
            None => {
                is_kept[j] = true;
                outcome.kept.push(j);
            }
        }
    }
    Ok(outcome)
}

/// Drop near-duplicates from `dataset`; `docs` must be aligned with its records.
pub fn dedup(
    dataset: &Dataset,
    docs: &[TokenSequence],
    threshold: f64,
    block_rows: usize,
) -> Result<(Dataset, Vec<DropRecord>)> {
    if docs.len() != dataset.len() {
        return Err(Error::DimensionMismatch {
            expected: dataset.len(),
            actual: docs.len(),
        });
    }
    let outcome = dedup_indices(docs, threshold, block_rows)?;
    let records = dataset.records();
    let report = outcome
        .dropped
        .iter()
        .map(|&(d, k, cosine)| DropRecord {
            dropped: records[d].id.clone(),
            kept: records[k].id.clone(),
            cosine,
        })
        .collect();
    Ok((dataset.select(&outcome.kept), report))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn docs(raw: &[&str]) -> Vec<TokenSequence> {
        raw.iter()
            .enumerate()
            .map(|(i, d)| TokenSequence {
                source_id: format!("r{i}"),
                tokens: d.split_whitespace().map(str::to_string).collect(),
            })
            .collect()
    }

    #[test]
    fn distinct_corpus_keeps_everything() {
        let out = dedup_indices(&docs(&["a b", "c d", "e"]), 0.95, 2).unwrap();
        assert_eq!(out.kept, vec![0, 1, 2]);
    }

    #[test]
    fn later_duplicate_is_dropped() {
        let out = dedup_indices(&docs(&["x", "a b", "a b"]), 0.95, 1024).unwrap();
        assert_eq!(out.kept, vec![0, 1]);
        assert_eq!(out.dropped.len(), 1);
        assert_eq!((out.dropped[0].0, out.dropped[0].1), (2, 1));
        assert!((out.dropped[0].2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn chain_is_not_transitive() {
        // 1 matches 0 and 2 matches only 1, which is dropped, so 2 survives
        let d = docs(&["a b c d", "a b c d e", "b c d e f g h"]);
        let m = transform(&fit_tfidf(&d, 1).unwrap(), &d);
        let c01 = m.row_vector(0).dot(&m.row_vector(1));
        let c12 = m.row_vector(1).dot(&m.row_vector(2));
        let c02 = m.row_vector(0).dot(&m.row_vector(2));
        let t = c01.min(c12) - 1e-6;
        assert!(c02 < t);
        let out = dedup_indices(&d, t, 1024).unwrap();
        assert_eq!(out.kept, vec![0, 2]);
    }

    #[test]
    fn empty_docs_are_kept() {
        let out = dedup_indices(&docs(&["", "", "a", "a"]), 0.9, 3).unwrap();
        assert_eq!(out.kept, vec![0, 1, 2]);
    }
}
