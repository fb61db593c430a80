//! Featurization: word n-gram TF-IDF, and Word2Vec embeddings concatenated
//! over a fixed sequence length then reduced with PCA.

mod dense;
mod embed;
mod featurizer;
mod matrix;
mod ngram;
mod pca;
mod word2vec;

pub use dense::DenseMatrix;
pub use embed::{embed_all, embed_sequence, DEFAULT_PAD_LEN};
pub use featurizer::{EmbeddingConfig, EmbeddingFeaturizer, EmbeddingStats, FeatureConfig, Featurizer};
pub use matrix::{FeatureMatrix, Row};
pub use ngram::{extract_ngrams, fit_ngram_tfidf, ngram_transform, NgramConfig, NgramTfidf};
pub use pca::{fit_pca, pca_reconstruct, pca_transform, PcaModel};
pub use word2vec::{train_word2vec, EmbeddingModel, Word2VecParams};
