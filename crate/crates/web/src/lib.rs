//! Browser bindings for the demo page: clean a description, label it with
//! the shipped rules, and find near-duplicate pairs among a few lines.
//!
//! Every function takes and returns plain strings (JSON for structured
//! results), so the same calls run natively in tests.

use std::sync::OnceLock;

use serde::Serialize;
use trxcat::corpus::Amount;
use trxcat::defaults;
use trxcat::labeling::RuleSet;
use trxcat::preprocess::{Preprocessor, TokenSequence};
use trxcat::similarity::{dedup_indices, fit_tfidf, similar_pairs, transform};
use wasm_bindgen::prelude::*;

fn preprocessor() -> &'static Preprocessor {
    static PRE: OnceLock<Preprocessor> = OnceLock::new();
    PRE.get_or_init(|| Preprocessor::new(defaults::cleaning_config(), defaults::name_dictionary()).expect("shipped config"))
}

fn rules() -> &'static RuleSet {
    static RULES: OnceLock<RuleSet> = OnceLock::new();
    RULES.get_or_init(defaults::ruleset)
}

fn json(value: &impl Serialize) -> String {
    serde_json::to_string(value).expect("plain data serializes")
}

#[derive(Serialize)]
struct Cleaned {
    tokens: Vec<String>,
    text: String,
}

/// Cleaned and anonymized tokens of one description, as
/// `{"tokens": [...], "text": "..."}`.
#[wasm_bindgen]
pub fn clean(description: &str) -> String {
    let tokens = preprocessor().tokens(description);
    let text = tokens.join(" ");
    json(&Cleaned { tokens, text })
}

#[derive(Serialize)]
struct Labeled<'a> {
    category: Option<&'a str>,
    value: String,
}

/// Category the shipped rules assign, as `{"category": str|null, "value": "-12.30"}`.
/// `value` is in currency units; negative means expense.
#[wasm_bindgen]
pub fn label(description: &str, value: f64) -> String {
    let amount = Amount::from_cents((value * 100.0).round() as i64);
    let category = rules().compile().label(description, amount);
    json(&Labeled {
        category,
        value: amount.to_string(),
    })
}

#[derive(Serialize)]
struct Pair {
    i: usize,
    j: usize,
    cosine: f64,
}

#[derive(Serialize)]
struct Pairs {
    tokens: Vec<Vec<String>>,
    pairs: Vec<Pair>,
    kept: Vec<usize>,
    /// `[dropped, kept_by]` line indices.
    dropped: Vec<[usize; 2]>,
}

/// Near-duplicate analysis of the non-empty lines of `text` at `threshold`:
/// every pair at or above it, and which lines dedup would keep. Indices
/// count non-empty lines from 0.
#[wasm_bindgen]
pub fn near_duplicates(text: &str, threshold: f64) -> Result<String, JsError> {
    near_duplicates_report(text, threshold).map_err(|e| JsError::new(&e))
}

/// [`near_duplicates`] without the JavaScript error type.
pub fn near_duplicates_report(text: &str, threshold: f64) -> Result<String, String> {
    let docs: Vec<TokenSequence> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .enumerate()
        .map(|(i, l)| TokenSequence::new(i.to_string(), preprocessor().tokens(l)))
        .collect();
    let tokens = docs.iter().map(|d| d.tokens.clone()).collect();
    let empty = Pairs {
        tokens,
        pairs: Vec::new(),
        kept: (0..docs.len()).collect(),
        dropped: Vec::new(),
    };
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(format!("threshold {threshold} not in (0, 1]"));
    }
    // no vocabulary at all: nothing can be similar
    let Ok(model) = fit_tfidf(&docs, 1) else {
        return Ok(json(&empty));
    };
    let m = transform(&model, &docs);
    let pairs = similar_pairs(&m, threshold, 256).map_err(|e| e.to_string())?;
    let outcome = dedup_indices(&docs, threshold, 256).map_err(|e| e.to_string())?;
    Ok(json(&Pairs {
        pairs: pairs
            .into_iter()
            .map(|p| Pair {
                i: p.i,
                j: p.j,
                cosine: p.cosine,
            })
            .collect(),
        kept: outcome.kept,
        dropped: outcome.dropped.iter().map(|d| [d.0, d.1]).collect(),
        ..empty
    }))
}
