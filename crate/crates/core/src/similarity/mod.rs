//! TF-IDF vectors, thresholded all-pairs cosine similarity and near-duplicate
//! filtering.

mod dedup;
mod pairs;
mod sparse;
mod tfidf;

pub use dedup::{dedup, dedup_indices, DedupOutcome, DropRecord};
pub use pairs::{similar_pairs, SimilarPair, COSINE_SLACK};
pub use sparse::{CsrMatrix, SparseVector};
pub use tfidf::{fit_tfidf, transform, TfidfModel};

/// Default cosine threshold for near-duplicate filtering.
pub const DEFAULT_THRESHOLD: f64 = 0.85;
/// Default number of rows per block in [`similar_pairs`].
pub const DEFAULT_BLOCK_ROWS: usize = 1024;
