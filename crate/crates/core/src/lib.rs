//! Bank transaction classification from short free-text descriptions.
//!
//! The crate is organized by pipeline stage:
//!
//! - [`corpus`]: transaction records, JSONL/CSV I/O, splitting and a seeded
//!   synthetic generator.
//! - [`preprocess`]: config-driven description cleaning and dictionary-based
//!   name anonymization.
//! - [`similarity`]: TF-IDF over sparse CSR matrices, thresholded all-pairs
//!   cosine similarity and greedy near-duplicate filtering.
//! - [`labeling`]: keyword rules with a value sign constraint, applied to raw
//!   descriptions.
//! - [`features`]: word n-gram TF-IDF and Word2Vec + padding + PCA featurizers.
//! - [`models`]: naive Bayes, softmax regression, one-vs-rest linear SVM and
//!   random forest classifiers behind one interface.
//! - [`evaluation`]: confusion matrices, support-weighted metrics, reports and
//!   the train-fraction experiment runner.

pub mod artifact;
pub mod corpus;
pub mod defaults;
mod error;
pub mod evaluation;
pub mod features;
pub mod labeling;
pub mod models;
pub mod preprocess;
pub mod similarity;

pub use error::{Error, Result};

/// Derive an independent seed for a sub-task (fold, tree, record, ...).
///
/// SplitMix64 finalizer over `seed ^ (index * golden ratio)`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
