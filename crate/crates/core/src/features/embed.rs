use super::dense::DenseMatrix;
use super::word2vec::EmbeddingModel;
use crate::preprocess::TokenSequence;

/// Sequence length used by the embedding featurizer.
pub const DEFAULT_PAD_LEN: usize = 14;

/// Concatenate the token vectors of the first `pad_len` tokens, zero-filling
/// unknown tokens and the tail. Output length is always `pad_len * d`.
pub fn embed_sequence(tokens: &[String], model: &EmbeddingModel, pad_len: usize) -> Vec<f64> {
    let d = model.vector_size();
    let mut out = vec![0.0; pad_len * d];
    for (slot, token) in out.chunks_exact_mut(d).zip(tokens) {
        if let Some(v) = model.vector(token) {
            slot.iter_mut().zip(v).for_each(|(o, x)| *o = *x as f64);
        }
    }
    out
}

pub fn embed_all(docs: &[TokenSequence], model: &EmbeddingModel, pad_len: usize) -> DenseMatrix {
    let width = pad_len * model.vector_size();
    let mut data = Vec::with_capacity(docs.len() * width);
    for doc in docs {
        data.extend(embed_sequence(&doc.tokens, model, pad_len));
    }
    DenseMatrix::from_vec(docs.len(), width, data).expect("rows have fixed width")
}
