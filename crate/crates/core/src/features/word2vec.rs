use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::preprocess::TokenSequence;
use crate::{Error, Result};

/// Skip-gram with negative sampling hyperparameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Word2VecParams {
    pub vector_size: usize,
    pub window: usize,
    pub epochs: usize,
    pub negative: usize,
    pub min_count: usize,
    pub learning_rate: f64,
    pub min_learning_rate: f64,
    pub seed: u64,
}

impl Default for Word2VecParams {
    fn default() -> Self {
        Word2VecParams {
            vector_size: 300,
            window: 3,
            epochs: 15,
            negative: 5,
            min_count: 2,
            learning_rate: 0.025,
            min_learning_rate: 1e-4,
            seed: 0,
        }
    }
}

impl Word2VecParams {
    pub fn validate(&self) -> Result<()> {
        if self.vector_size == 0 || self.window == 0 || self.epochs == 0 {
            return Err(Error::config("vector_size, window and epochs must be positive"));
        }
        if self.min_count == 0 {
            return Err(Error::config("min_count must be at least 1"));
        }
        if !(self.learning_rate > 0.0 && self.min_learning_rate >= 0.0) {
            return Err(Error::config("learning rates must be positive"));
        }
        Ok(())
    }
}

/// Trained token embeddings, `f32` as in the reference implementation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "EmbeddingState", into = "EmbeddingState")]
pub struct EmbeddingModel {
    params: Word2VecParams,
    vocabulary: Vec<String>,
    counts: Vec<u64>,
    vectors: Vec<f32>,
    epoch_losses: Vec<f64>,
    index: HashMap<String, usize>,
}

#[derive(Serialize, Deserialize)]
struct EmbeddingState {
    params: Word2VecParams,
    vocabulary: Vec<String>,
    counts: Vec<u64>,
    vectors: Vec<f32>,
    epoch_losses: Vec<f64>,
}

impl From<EmbeddingState> for EmbeddingModel {
    fn from(s: EmbeddingState) -> Self {
        let index = s.vocabulary.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        EmbeddingModel {
            params: s.params,
            vocabulary: s.vocabulary,
            counts: s.counts,
            vectors: s.vectors,
            epoch_losses: s.epoch_losses,
            index,
        }
    }
}

impl From<EmbeddingModel> for EmbeddingState {
    fn from(m: EmbeddingModel) -> Self {
        EmbeddingState {
            params: m.params,
            vocabulary: m.vocabulary,
            counts: m.counts,
            vectors: m.vectors,
            epoch_losses: m.epoch_losses,
        }
    }
}

impl EmbeddingModel {
    /// Rebuild a model from stored parts (used by the artifact reader).
    pub fn from_parts(
        params: Word2VecParams,
        vocabulary: Vec<String>,
        counts: Vec<u64>,
        vectors: Vec<f32>,
        epoch_losses: Vec<f64>,
    ) -> Result<Self> {
        if vectors.len() != vocabulary.len() * params.vector_size || counts.len() != vocabulary.len() {
            return Err(Error::DimensionMismatch {
                expected: vocabulary.len() * params.vector_size,
                actual: vectors.len(),
            });
        }
        Ok(EmbeddingState {
            params,
            vocabulary,
            counts,
            vectors,
            epoch_losses,
        }
        .into())
    }

    pub fn params(&self) -> &Word2VecParams {
        &self.params
    }

    pub fn vector_size(&self) -> usize {
        self.params.vector_size
    }

    pub fn vocabulary(&self) -> &[String] {
        &self.vocabulary
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn vectors(&self) -> &[f32] {
        &self.vectors
    }

    /// Mean loss per (center, context) pair for each epoch.
    pub fn epoch_losses(&self) -> &[f64] {
        &self.epoch_losses
    }

    pub fn vector(&self, token: &str) -> Option<&[f32]> {
        let d = self.vector_size();
        self.index.get(token).map(|&i| &self.vectors[i * d..(i + 1) * d])
    }

    pub fn cosine(&self, a: &str, b: &str) -> Option<f64> {
        let (x, y) = (self.vector(a)?, self.vector(b)?);
        let dot: f64 = x.iter().zip(y).map(|(p, q)| *p as f64 * *q as f64).sum();
        let nx: f64 = x.iter().map(|p| (*p as f64).powi(2)).sum::<f64>().sqrt();
        let ny: f64 = y.iter().map(|p| (*p as f64).powi(2)).sum::<f64>().sqrt();
        Some(if nx == 0.0 || ny == 0.0 { 0.0 } else { dot / (nx * ny) })
    }
}

/// Train skip-gram embeddings with negative sampling on a single worker.
pub fn train_word2vec(docs: &[TokenSequence], params: &Word2VecParams) -> Result<EmbeddingModel> {
    params.validate()?;
    let mut order: Vec<&str> = Vec::new();
    let mut freq: HashMap<&str, u64> = HashMap::new();
    for d in docs {
        for t in &d.tokens {
            *freq.entry(t.as_str()).or_insert_with(|| {
                order.push(t.as_str());
                0
            }) += 1;
        }
    }
    let vocabulary: Vec<String> = order
        .into_iter()
        .filter(|t| freq[t] >= params.min_count as u64)
        .map(str::to_string)
        .collect();
    if vocabulary.is_empty() {
        return Err(Error::Empty(format!(
            "no token occurs at least {} times",
            params.min_count
        )));
    }
    let counts: Vec<u64> = vocabulary.iter().map(|t| freq[t.as_str()]).collect();
    let index: HashMap<&str, usize> = vocabulary.iter().enumerate().map(|(i, t)| (t.as_str(), i)).collect();
    let sentences: Vec<Vec<usize>> = docs
        .iter()
        .map(|d| d.tokens.iter().filter_map(|t| index.get(t.as_str()).copied()).collect())
        .collect();

    let d = params.vector_size;
    let v = vocabulary.len();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut syn0: Vec<f32> = (0..v * d).map(|_| (rng.gen::<f32>() - 0.5) / d as f32).collect();
    let mut syn1 = vec![0.0f32; v * d];
    let noise = NoiseTable::new(&counts);

    let words_per_epoch: usize = sentences.iter().map(Vec::len).sum();
    let total = (params.epochs * words_per_epoch) as f64;
    let mut processed = 0usize;
    let mut neu1e = vec![0.0f32; d];
    let mut epoch_losses = Vec::with_capacity(params.epochs);
    for epoch in 0..params.epochs {
        let mut loss = 0.0f64;
        let mut pairs = 0u64;
        for sentence in &sentences {
            for (pos, &center) in sentence.iter().enumerate() {
                let alpha = (params.learning_rate * (1.0 - processed as f64 / (total + 1.0)))
                    .max(params.min_learning_rate) as f32;
                processed += 1;
                let lo = pos.saturating_sub(params.window);
                let hi = (pos + params.window + 1).min(sentence.len());
                for (cpos, &context) in sentence.iter().enumerate().take(hi).skip(lo) {
                    if cpos == pos {
                        continue;
                    }
                    neu1e.iter_mut().for_each(|x| *x = 0.0);
                    let input = &syn0[center * d..(center + 1) * d];
                    for k in 0..=params.negative {
                        let (target, label) = if k == 0 {
                            (context, 1.0f32)
                        } else {
                            let t = noise.sample(&mut rng);
                            if t == context {
                                continue;
                            }
                            (t, 0.0)
                        };
                        let out = &mut syn1[target * d..(target + 1) * d];
                        let dot: f32 = input.iter().zip(out.iter()).map(|(a, b)| a * b).sum();
                        loss += if label > 0.0 {
                            softplus(-dot as f64)
                        } else {
                            softplus(dot as f64)
                        };
                        let g = (label - sigmoid(dot)) * alpha;
                        for j in 0..d {
                            neu1e[j] += g * out[j];
                            out[j] += g * input[j];
                        }
                    }
                    pairs += 1;
                    let input = &mut syn0[center * d..(center + 1) * d];
                    input.iter_mut().zip(&neu1e).for_each(|(a, b)| *a += b);
                }
            }
        }
        let mean = if pairs == 0 { 0.0 } else { loss / pairs as f64 };
        log::info!("word2vec epoch {}: mean loss {mean:.6}", epoch + 1);
        epoch_losses.push(mean);
    }

    EmbeddingModel::from_parts(params.clone(), vocabulary, counts, syn0, epoch_losses)
}

fn sigmoid(x: f32) -> f32 {
    1.0 / (1.0 + (-x).exp())
}

/// ln(1 + e^x) without overflow.
fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Unigram^0.75 sampling via cumulative weights and binary search.
struct NoiseTable {
    cumulative: Vec<f64>,
}

impl NoiseTable {
    fn new(counts: &[u64]) -> Self {
        let mut acc = 0.0;
        let cumulative = counts
            .iter()
            .map(|&c| {
                acc += (c as f64).powf(0.75);
                acc
            })
            .collect();
        NoiseTable { cumulative }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> usize {
        let total = *self.cumulative.last().unwrap();
        let u = rng.gen::<f64>() * total;
        self.cumulative
            .partition_point(|&c| c <= u)
            .min(self.cumulative.len() - 1)
    }
}
