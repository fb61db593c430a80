use serde::{Deserialize, Serialize};

use crate::preprocess::TokenSequence;
use crate::similarity::{CsrMatrix, TfidfModel};
use crate::{Error, Result};

/// Word n-gram settings: orders `1..=max_n` are all emitted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NgramConfig {
    #[serde(default = "default_max_n")]
    pub max_n: usize,
    #[serde(default = "default_min_df")]
    pub min_df: usize,
}

fn default_max_n() -> usize {
    3
}

fn default_min_df() -> usize {
    1
}

impl Default for NgramConfig {
    fn default() -> Self {
        NgramConfig {
            max_n: default_max_n(),
            min_df: default_min_df(),
        }
    }
}

impl NgramConfig {
    pub fn validate(&self) -> Result<()> {
        if !(1..=5).contains(&self.max_n) {
            return Err(Error::config(format!("max_n must be in 1..=5, got {}", self.max_n)));
        }
        Ok(())
    }
}

/// All contiguous n-grams of orders 1..=max_n, joined by single spaces.
pub fn extract_ngrams(tokens: &[String], config: &NgramConfig) -> Vec<String> {
    let mut out = Vec::new();
    for n in 1..=config.max_n {
        for window in tokens.windows(n) {
            out.push(window.join(" "));
        }
    }
    out
}

/// TF-IDF over n-gram terms, remembering the n-gram orders it was fit with.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NgramTfidf {
    pub config: NgramConfig,
    pub tfidf: TfidfModel,
}

impl NgramTfidf {
    pub fn dims(&self) -> usize {
        self.tfidf.len()
    }
}

pub fn fit_ngram_tfidf(docs: &[TokenSequence], config: &NgramConfig) -> Result<NgramTfidf> {
    config.validate()?;
    let terms: Vec<Vec<String>> = docs.iter().map(|d| extract_ngrams(&d.tokens, config)).collect();
    Ok(NgramTfidf {
        config: *config,
        tfidf: TfidfModel::fit_terms(&terms, config.min_df)?,
    })
}

pub fn ngram_transform(model: &NgramTfidf, docs: &[TokenSequence]) -> CsrMatrix {
    let mut m = CsrMatrix::empty(model.dims());
    for d in docs {
        let terms = extract_ngrams(&d.tokens, &model.config);
        m.push_sorted_row(&model.tfidf.row_entries(&terms));
    }
    m
}
