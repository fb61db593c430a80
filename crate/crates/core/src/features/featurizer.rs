use std::collections::HashMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::dense::DenseMatrix;
use super::embed::{embed_sequence, DEFAULT_PAD_LEN};
use super::matrix::FeatureMatrix;
use super::ngram::{fit_ngram_tfidf, ngram_transform, NgramConfig, NgramTfidf};
use super::pca::{fit_pca, PcaModel};
use super::word2vec::{train_word2vec, EmbeddingModel, Word2VecParams};
use crate::preprocess::TokenSequence;
use crate::{derive_seed, Error, Result};

/// Which featurization path to fit, and its settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum FeatureConfig {
    #[serde(rename = "ngram-tfidf")]
    Ngram(NgramConfig),
    #[serde(rename = "word2vec-pca")]
    Embedding(EmbeddingConfig),
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig::Ngram(NgramConfig::default())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EmbeddingConfig {
    pub word2vec: Word2VecParams,
    pub pad_len: usize,
    pub pca_components: usize,
    /// PCA is fit on at most this many training rows, drawn without replacement.
    pub pca_fit_rows: usize,
}

impl Default for EmbeddingConfig {
    fn default() -> Self {
        EmbeddingConfig {
            word2vec: Word2VecParams::default(),
            pad_len: DEFAULT_PAD_LEN,
            pca_components: 300,
            pca_fit_rows: 2000,
        }
    }
}

impl FeatureConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: FeatureConfig = toml::from_str(text).map_err(|e| Error::config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            FeatureConfig::Ngram(c) => c.validate(),
            FeatureConfig::Embedding(c) => {
                c.word2vec.validate()?;
                if c.pad_len == 0 || c.pca_components == 0 {
                    return Err(Error::config("pad_len and pca_components must be positive"));
                }
                if c.pca_fit_rows <= c.pca_components {
                    return Err(Error::config("pca_fit_rows must exceed pca_components"));
                }
                Ok(())
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            FeatureConfig::Ngram(_) => "ngram-tfidf",
            FeatureConfig::Embedding(_) => "word2vec-pca",
        }
    }
}

/// Word2Vec + padded concatenation + PCA, as fitted on training documents.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingFeaturizer {
    pub embeddings: EmbeddingModel,
    pub pad_len: usize,
    pub pca: PcaModel,
    pub stats: EmbeddingStats,
    /// Per position and vocabulary row, the projection of that token's
    /// vector onto the components: `pad_len x |V| x k`.
    table: Vec<f64>,
    /// Components applied to the PCA mean.
    offset: Vec<f64>,
    index: HashMap<String, usize>,
}

/// Variance bookkeeping reported with the embedding path.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingStats {
    pub pca_fit_rows: usize,
    /// Explained-variance ratio summed over components, on the PCA sample.
    pub retained_ratio_fit: f64,
    /// Share of the full training set's variance kept by the projection.
    pub retained_ratio_train: f64,
}

impl EmbeddingFeaturizer {
    pub fn new(embeddings: EmbeddingModel, pad_len: usize, pca: PcaModel, stats: EmbeddingStats) -> Result<Self> {
        let d = embeddings.vector_size();
        if pca.n_features() != pad_len * d {
            return Err(Error::DimensionMismatch {
                expected: pad_len * d,
                actual: pca.n_features(),
            });
        }
        let k = pca.k();
        let v = embeddings.vocabulary().len();
        let mut table = vec![0.0; pad_len * v * k];
        for p in 0..pad_len {
            for (t, vec) in embeddings.vectors().chunks_exact(d).enumerate() {
                let slot = &mut table[(p * v + t) * k..(p * v + t + 1) * k];
                for (c, out) in slot.iter_mut().enumerate() {
                    let comp = &pca.component(c)[p * d..(p + 1) * d];
                    *out = comp.iter().zip(vec).map(|(a, b)| a * *b as f64).sum();
                }
            }
        }
        let offset = (0..k)
            .map(|c| pca.component(c).iter().zip(&pca.mean).map(|(a, b)| a * b).sum())
            .collect();
        let index = embeddings
            .vocabulary()
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        Ok(EmbeddingFeaturizer {
            embeddings,
            pad_len,
            pca,
            stats,
            table,
            offset,
            index,
        })
    }

    pub fn dims(&self) -> usize {
        self.pca.k()
    }

    /// Project one token sequence; equal to `pca_transform(embed_sequence(..))`
    /// up to summation order.
    pub fn project(&self, tokens: &[String]) -> Vec<f64> {
        let k = self.pca.k();
        let v = self.embeddings.vocabulary().len();
        let mut z: Vec<f64> = self.offset.iter().map(|o| -o).collect();
        for (p, token) in tokens.iter().take(self.pad_len).enumerate() {
            if let Some(&t) = self.index.get(token) {
                let row = &self.table[(p * v + t) * k..(p * v + t + 1) * k];
                z.iter_mut().zip(row).for_each(|(a, b)| *a += b);
            }
        }
        z
    }

    pub fn transform(&self, docs: &[TokenSequence]) -> DenseMatrix {
        let mut data = Vec::with_capacity(docs.len() * self.dims());
        for d in docs {
            data.extend(self.project(&d.tokens));
        }
        DenseMatrix::from_vec(docs.len(), self.dims(), data).expect("fixed width")
    }
}

/// A fitted featurizer.
#[derive(Clone, Debug, PartialEq)]
pub enum Featurizer {
    Ngram(NgramTfidf),
    Embedding(EmbeddingFeaturizer),
}

impl Featurizer {
    /// Fit on training documents only and return their features.
    pub fn fit_transform(config: &FeatureConfig, docs: &[TokenSequence], seed: u64) -> Result<(Self, FeatureMatrix)> {
        config.validate()?;
        match config {
            FeatureConfig::Ngram(c) => {
                let model = fit_ngram_tfidf(docs, c)?;
                let x = ngram_transform(&model, docs);
                Ok((Featurizer::Ngram(model), x.into()))
            }
            FeatureConfig::Embedding(c) => {
                let (f, x) = fit_embedding(c, docs, seed)?;
                Ok((Featurizer::Embedding(f), x.into()))
            }
        }
    }

    pub fn transform(&self, docs: &[TokenSequence]) -> FeatureMatrix {
        match self {
            Featurizer::Ngram(m) => ngram_transform(m, docs).into(),
            Featurizer::Embedding(f) => f.transform(docs).into(),
        }
    }

    pub fn dims(&self) -> usize {
        match self {
            Featurizer::Ngram(m) => m.dims(),
            Featurizer::Embedding(f) => f.dims(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Featurizer::Ngram(_) => "ngram-tfidf",
            Featurizer::Embedding(_) => "word2vec-pca",
        }
    }
}

fn fit_embedding(c: &EmbeddingConfig, docs: &[TokenSequence], seed: u64) -> Result<(EmbeddingFeaturizer, DenseMatrix)> {
    let params = Word2VecParams {
        seed: derive_seed(seed, 0),
        ..c.word2vec.clone()
    };
    let embeddings = train_word2vec(docs, &params)?;
    let n = docs.len();
    let sample: Vec<usize> = if n > c.pca_fit_rows {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 1));
        let mut idx = rand::seq::index::sample(&mut rng, n, c.pca_fit_rows).into_vec();
        idx.sort_unstable();
        idx
    } else {
        (0..n).collect()
    };
    let width = c.pad_len * embeddings.vector_size();
    let mut data = Vec::with_capacity(sample.len() * width);
    for &i in &sample {
        data.extend(embed_sequence(&docs[i].tokens, &embeddings, c.pad_len));
    }
    let fit_x = DenseMatrix::from_vec(sample.len(), width, data)?;
    let pca = fit_pca(&fit_x, c.pca_components)?;
    drop(fit_x);
    let retained_ratio_fit = pca.retained_ratio();
    let mut f = EmbeddingFeaturizer::new(
        embeddings,
        c.pad_len,
        pca,
        EmbeddingStats {
            pca_fit_rows: sample.len(),
            retained_ratio_fit,
            retained_ratio_train: retained_ratio_fit,
        },
    )?;
    let x = f.transform(docs);
    f.stats.retained_ratio_train = retained_share(&f, docs, &x);
    log::info!(
        "PCA keeps {:.4} of sample variance and {:.4} of training variance",
        f.stats.retained_ratio_fit,
        f.stats.retained_ratio_train
    );
    Ok((f, x))
}

/// Projected variance over total variance, both over `docs`.
fn retained_share(f: &EmbeddingFeaturizer, docs: &[TokenSequence], z: &DenseMatrix) -> f64 {
    let n = docs.len();
    if n < 2 {
        return f.stats.retained_ratio_fit;
    }
    let width = f.pad_len * f.embeddings.vector_size();
    let mut sum = vec![0.0; width];
    let mut sq = 0.0;
    for d in docs {
        let x = embed_sequence(&d.tokens, &f.embeddings, f.pad_len);
        sq += x.iter().map(|v| v * v).sum::<f64>();
        sum.iter_mut().zip(&x).for_each(|(s, v)| *s += v);
    }
    let total = sq - sum.iter().map(|s| s * s).sum::<f64>() / n as f64;
    let mut projected = 0.0;
    for c in 0..z.cols() {
        let (mut s, mut s2) = (0.0, 0.0);
        for i in 0..n {
            let v = z.get(i, c);
            s += v;
            s2 += v * v;
        }
        projected += s2 - s * s / n as f64;
    }
    if total > 0.0 {
        projected / total
    } else {
        0.0
    }
}
