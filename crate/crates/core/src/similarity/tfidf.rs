use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::sparse::CsrMatrix;
use crate::preprocess::TokenSequence;
use crate::{Error, Result};

/// Smoothed-idf, l2-normalized TF-IDF model.
///
/// Columns follow the order in which terms first appear in the fitting corpus.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "TfidfState", into = "TfidfState")]
pub struct TfidfModel {
    vocabulary: Vec<String>,
    idf: Vec<f64>,
    smooth: bool,
    index: HashMap<String, usize>,
}

#[derive(Serialize, Deserialize)]
struct TfidfState {
    vocabulary: Vec<String>,
    idf: Vec<f64>,
    smooth: bool,
}

impl From<TfidfState> for TfidfModel {
    fn from(s: TfidfState) -> Self {
        let index = s.vocabulary.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        TfidfModel {
            vocabulary: s.vocabulary,
            idf: s.idf,
            smooth: s.smooth,
            index,
        }
    }
}

impl From<TfidfModel> for TfidfState {
    fn from(m: TfidfModel) -> Self {
        TfidfState {
            vocabulary: m.vocabulary,
            idf: m.idf,
            smooth: m.smooth,
        }
    }
}

impl TfidfModel {
    /// Fit over arbitrary term lists (tokens, n-grams, ...).
    pub fn fit_terms<D: AsRef<[String]>>(docs: &[D], min_df: usize) -> Result<Self> {
        if docs.is_empty() {
            return Err(Error::Empty("TF-IDF needs at least one document".into()));
        }
        let mut order: Vec<&str> = Vec::new();
        let mut df: HashMap<&str, usize> = HashMap::new();
        for doc in docs {
            let mut seen: Vec<&str> = Vec::new();
            for term in doc.as_ref() {
                let t = term.as_str();
                if seen.contains(&t) {
                    continue;
                }
                seen.push(t);
                let count = df.entry(t).or_insert_with(|| {
                    order.push(t);
                    0
                });
                *count += 1;
            }
        }
        let n = docs.len() as f64;
        let min_df = min_df.max(1);
        let vocabulary: Vec<String> = order
            .into_iter()
            .filter(|t| df[t] >= min_df)
            .map(str::to_string)
            .collect();
        if vocabulary.is_empty() {
            return Err(Error::Empty(format!(
                "no term reaches document frequency {min_df}"
            )));
        }
        let idf = vocabulary
            .iter()
            .map(|t| smoothed_idf(n, df[t.as_str()] as f64))
            .collect();
        Ok(TfidfState {
            vocabulary,
            idf,
            smooth: true,
        }
        .into())
    }

    pub fn vocabulary(&self) -> &[String] {
        &self.vocabulary
    }

    pub fn idf(&self) -> &[f64] {
        &self.idf
    }

    pub fn is_smooth(&self) -> bool {
        self.smooth
    }

    pub fn len(&self) -> usize {
        self.vocabulary.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vocabulary.is_empty()
    }

    pub fn column(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    /// Weighted, normalized entries for one document, sorted by column.
    pub fn row_entries(&self, terms: &[String]) -> Vec<(usize, f64)> {
        let mut counts: HashMap<usize, f64> = HashMap::new();
        for t in terms {
            if let Some(c) = self.column(t) {
                *counts.entry(c).or_insert(0.0) += 1.0;
            }
        }
        let mut row: Vec<(usize, f64)> =
            counts.into_iter().map(|(c, tf)| (c, tf * self.idf[c])).collect();
        row.sort_by_key(|e| e.0);
        let norm = row.iter().map(|e| e.1 * e.1).sum::<f64>().sqrt();
        if norm > 0.0 {
            row.iter_mut().for_each(|e| e.1 /= norm);
        }
        row
    }

    pub fn transform_terms<D: AsRef<[String]>>(&self, docs: &[D]) -> CsrMatrix {
        let mut m = CsrMatrix::empty(self.len());
        for doc in docs {
            m.push_sorted_row(&self.row_entries(doc.as_ref()));
        }
        m
    }
}

fn smoothed_idf(n: f64, df: f64) -> f64 {
    ((1.0 + n) / (1.0 + df)).ln() + 1.0
}

/// Fit a TF-IDF model on token sequences.
pub fn fit_tfidf(docs: &[TokenSequence], min_df: usize) -> Result<TfidfModel> {
    let terms: Vec<&[String]> = docs.iter().map(|d| d.tokens.as_slice()).collect();
    TfidfModel::fit_terms(&terms, min_df)
}

/// Vectorize token sequences; out-of-vocabulary tokens are ignored.
pub fn transform(model: &TfidfModel, docs: &[TokenSequence]) -> CsrMatrix {
    let terms: Vec<&[String]> = docs.iter().map(|d| d.tokens.as_slice()).collect();
    model.transform_terms(&terms)
}
