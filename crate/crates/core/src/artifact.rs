//! Versioned binary container for fitted featurizers and models.
//!
//! Layout: the 4-byte magic `TRXC`, a little-endian `u32` format version, a
//! little-endian `u64` header length, the UTF-8 JSON header, then the tensor
//! payload. Each tensor is stored little-endian at the byte offset (relative
//! to the payload start) listed in the header.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::features::{
    EmbeddingFeaturizer, EmbeddingModel, EmbeddingStats, Featurizer, NgramConfig, NgramTfidf, PcaModel,
    Word2VecParams,
};
use crate::models::{LinearWeights, ModelSpec, ModelState, NaiveBayesWeights, TrainedModel, Tree};
use crate::preprocess::{CleaningConfig, NameDictionary, Preprocessor};
use crate::similarity::TfidfModel;
use crate::{Error, Result};

pub const MAGIC: &[u8; 4] = b"TRXC";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub enum TensorData {
    F32(Vec<f32>),
    F64(Vec<f64>),
    I64(Vec<i64>),
}

impl TensorData {
    fn dtype(&self) -> &'static str {
        match self {
            TensorData::F32(_) => "f32",
            TensorData::F64(_) => "f64",
            TensorData::I64(_) => "i64",
        }
    }

    fn len(&self) -> usize {
        match self {
            TensorData::F32(v) => v.len(),
            TensorData::F64(v) => v.len(),
            TensorData::I64(v) => v.len(),
        }
    }

    fn write_le(&self, out: &mut Vec<u8>) {
        match self {
            TensorData::F32(v) => v.iter().for_each(|x| out.extend_from_slice(&x.to_le_bytes())),
            TensorData::F64(v) => v.iter().for_each(|x| out.extend_from_slice(&x.to_le_bytes())),
            TensorData::I64(v) => v.iter().for_each(|x| out.extend_from_slice(&x.to_le_bytes())),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Tensor {
    pub name: String,
    pub shape: Vec<usize>,
    pub data: TensorData,
}

#[derive(Serialize, Deserialize)]
struct TensorEntry {
    name: String,
    dtype: String,
    shape: Vec<usize>,
    offset: usize,
    length: usize,
}

#[derive(Serialize, Deserialize)]
struct Header {
    kind: String,
    meta: Value,
    tensors: Vec<TensorEntry>,
}

/// Header metadata plus named tensors.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Container {
    pub kind: String,
    pub meta: Value,
    pub tensors: Vec<Tensor>,
}

impl Container {
    pub fn new(kind: impl Into<String>, meta: Value) -> Self {
        Container {
            kind: kind.into(),
            meta,
            tensors: Vec::new(),
        }
    }

    pub fn push(&mut self, name: impl Into<String>, shape: Vec<usize>, data: TensorData) {
        debug_assert_eq!(shape.iter().product::<usize>(), data.len());
        self.tensors.push(Tensor {
            name: name.into(),
            shape,
            data,
        });
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut payload = Vec::new();
        let mut entries = Vec::new();
        for t in &self.tensors {
            let offset = payload.len();
            t.data.write_le(&mut payload);
            entries.push(TensorEntry {
                name: t.name.clone(),
                dtype: t.data.dtype().to_string(),
                shape: t.shape.clone(),
                offset,
                length: payload.len() - offset,
            });
        }
        let header = serde_json::to_vec(&Header {
            kind: self.kind.clone(),
            meta: self.meta.clone(),
            tensors: entries,
        })?;
        let mut out = Vec::with_capacity(16 + header.len() + payload.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        out.extend_from_slice(&(header.len() as u64).to_le_bytes());
        out.extend_from_slice(&header);
        out.extend_from_slice(&payload);
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let bad = |m: &str| Error::Artifact(m.to_string());
        if bytes.len() < 16 || &bytes[..4] != MAGIC {
            return Err(bad("not a trxcat artifact (bad magic)"));
        }
        let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
        if version != FORMAT_VERSION {
            return Err(Error::Artifact(format!("unsupported format version {version}")));
        }
        let header_len = u64::from_le_bytes(bytes[8..16].try_into().unwrap()) as usize;
        let header_end = 16usize
            .checked_add(header_len)
            .filter(|&e| e <= bytes.len())
            .ok_or_else(|| bad("truncated header"))?;
        let header: Header = serde_json::from_slice(&bytes[16..header_end])?;
        let payload = &bytes[header_end..];
        let mut tensors = Vec::new();
        for e in header.tensors {
            let raw = payload
                .get(e.offset..e.offset + e.length)
                .ok_or_else(|| Error::Artifact(format!("tensor `{}` out of bounds", e.name)))?;
            let count: usize = e.shape.iter().product();
            let data = match e.dtype.as_str() {
                "f32" => TensorData::F32(decode(raw, count, f32::from_le_bytes)?),
                "f64" => TensorData::F64(decode(raw, count, f64::from_le_bytes)?),
                "i64" => TensorData::I64(decode(raw, count, i64::from_le_bytes)?),
                other => return Err(Error::Artifact(format!("unknown dtype `{other}`"))),
            };
            tensors.push(Tensor {
                name: e.name,
                shape: e.shape,
                data,
            });
        }
        Ok(Container {
            kind: header.kind,
            meta: header.meta,
            tensors,
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_bytes()?).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Container::from_bytes(&bytes)
    }

    fn take(&mut self, name: &str) -> Result<Tensor> {
        let pos = self
            .tensors
            .iter()
            .position(|t| t.name == name)
            .ok_or_else(|| Error::Artifact(format!("missing tensor `{name}`")))?;
        Ok(self.tensors.remove(pos))
    }

    fn take_f64(&mut self, name: &str) -> Result<Vec<f64>> {
        match self.take(name)?.data {
            TensorData::F64(v) => Ok(v),
            _ => Err(Error::Artifact(format!("tensor `{name}` is not f64"))),
        }
    }

    fn take_f32(&mut self, name: &str) -> Result<Vec<f32>> {
        match self.take(name)?.data {
            TensorData::F32(v) => Ok(v),
            _ => Err(Error::Artifact(format!("tensor `{name}` is not f32"))),
        }
    }

    fn take_i64(&mut self, name: &str) -> Result<Vec<i64>> {
        match self.take(name)?.data {
            TensorData::I64(v) => Ok(v),
            _ => Err(Error::Artifact(format!("tensor `{name}` is not i64"))),
        }
    }
}

fn decode<T, const N: usize>(raw: &[u8], count: usize, f: fn([u8; N]) -> T) -> Result<Vec<T>> {
    if raw.len() != count * N {
        return Err(Error::Artifact("tensor length disagrees with its shape".into()));
    }
    Ok(raw.chunks_exact(N).map(|c| f(c.try_into().unwrap())).collect())
}

fn field<T: serde::de::DeserializeOwned>(meta: &Value, key: &str) -> Result<T> {
    let v = meta
        .get(key)
        .ok_or_else(|| Error::Artifact(format!("header is missing `{key}`")))?;
    serde_json::from_value(v.clone()).map_err(|e| Error::Artifact(format!("`{key}`: {e}")))
}

// ---- featurizers -------------------------------------------------------

fn featurizer_into(c: &mut Container, prefix: &str, f: &Featurizer) -> Value {
    match f {
        Featurizer::Ngram(m) => {
            c.push(format!("{prefix}idf"), vec![m.tfidf.len()], TensorData::F64(m.tfidf.idf().to_vec()));
            json!({
                "kind": "ngram-tfidf",
                "config": m.config,
                "vocabulary": m.tfidf.vocabulary(),
                "smooth": m.tfidf.is_smooth(),
            })
        }
        Featurizer::Embedding(e) => {
            let emb = &e.embeddings;
            let (v, d) = (emb.vocabulary().len(), emb.vector_size());
            c.push(format!("{prefix}embeddings"), vec![v, d], TensorData::F32(emb.vectors().to_vec()));
            c.push(
                format!("{prefix}word2vec.epoch_losses"),
                vec![emb.epoch_losses().len()],
                TensorData::F64(emb.epoch_losses().to_vec()),
            );
            let counts = emb.counts().iter().map(|&n| n as i64).collect();
            c.push(format!("{prefix}word2vec.counts"), vec![v], TensorData::I64(counts));
            let p = &e.pca;
            let (k, width) = (p.k(), p.n_features());
            c.push(format!("{prefix}pca.mean"), vec![width], TensorData::F64(p.mean.clone()));
            c.push(format!("{prefix}pca.components"), vec![k, width], TensorData::F64(p.components.clone()));
            c.push(
                format!("{prefix}pca.explained_variance"),
                vec![k],
                TensorData::F64(p.explained_variance.clone()),
            );
            c.push(
                format!("{prefix}pca.explained_variance_ratio"),
                vec![k],
                TensorData::F64(p.explained_variance_ratio.clone()),
            );
            json!({
                "kind": "word2vec-pca",
                "word2vec": emb.params(),
                "vocabulary": emb.vocabulary(),
                "pad_len": e.pad_len,
                "pca_total_variance": p.total_variance,
                "pca_rank_deficient": p.rank_deficient,
                "stats": e.stats,
            })
        }
    }
}

fn featurizer_from(c: &mut Container, prefix: &str, meta: &Value) -> Result<Featurizer> {
    let kind: String = field(meta, "kind")?;
    match kind.as_str() {
        "ngram-tfidf" => {
            let config: NgramConfig = field(meta, "config")?;
            let vocabulary: Vec<String> = field(meta, "vocabulary")?;
            let smooth: bool = field(meta, "smooth")?;
            let idf = c.take_f64(&format!("{prefix}idf"))?;
            if idf.len() != vocabulary.len() {
                return Err(Error::Artifact("idf length differs from vocabulary".into()));
            }
            let tfidf: TfidfModel = serde_json::from_value(json!({
                "vocabulary": vocabulary,
                "idf": idf,
                "smooth": smooth,
            }))?;
            Ok(Featurizer::Ngram(NgramTfidf { config, tfidf }))
        }
        "word2vec-pca" => {
            let params: Word2VecParams = field(meta, "word2vec")?;
            let vocabulary: Vec<String> = field(meta, "vocabulary")?;
            let vectors = c.take_f32(&format!("{prefix}embeddings"))?;
            let losses = c.take_f64(&format!("{prefix}word2vec.epoch_losses"))?;
            let counts = c
                .take_i64(&format!("{prefix}word2vec.counts"))?
                .into_iter()
                .map(|n| n as u64)
                .collect();
            let embeddings = EmbeddingModel::from_parts(params, vocabulary, counts, vectors, losses)?;
            let pca = PcaModel {
                mean: c.take_f64(&format!("{prefix}pca.mean"))?,
                components: c.take_f64(&format!("{prefix}pca.components"))?,
                explained_variance: c.take_f64(&format!("{prefix}pca.explained_variance"))?,
                explained_variance_ratio: c.take_f64(&format!("{prefix}pca.explained_variance_ratio"))?,
                total_variance: field(meta, "pca_total_variance")?,
                rank_deficient: field(meta, "pca_rank_deficient")?,
            };
            if pca.components.len() != pca.k() * pca.n_features() {
                return Err(Error::Artifact("PCA component shape is inconsistent".into()));
            }
            let stats: EmbeddingStats = field(meta, "stats")?;
            let pad_len: usize = field(meta, "pad_len")?;
            Ok(Featurizer::Embedding(EmbeddingFeaturizer::new(embeddings, pad_len, pca, stats)?))
        }
        other => Err(Error::Artifact(format!("unknown featurizer `{other}`"))),
    }
}

// ---- models ------------------------------------------------------------

fn model_into(c: &mut Container, prefix: &str, m: &TrainedModel) -> Value {
    let k = m.labels.len();
    let d = m.n_features;
    let state = match &m.state {
        ModelState::NaiveBayes(nb) => {
            c.push(format!("{prefix}log_prior"), vec![k], TensorData::F64(nb.log_prior.clone()));
            c.push(format!("{prefix}log_likelihood"), vec![k, d], TensorData::F64(nb.log_likelihood.clone()));
            "naive_bayes"
        }
        ModelState::Linear(w) => {
            c.push(format!("{prefix}weights"), vec![k, d], TensorData::F64(w.weights.clone()));
            c.push(format!("{prefix}bias"), vec![k], TensorData::F64(w.bias.clone()));
            c.push(format!("{prefix}objective"), vec![w.objective.len()], TensorData::F64(w.objective.clone()));
            "linear"
        }
        ModelState::Forest(trees) => {
            let mut offsets = vec![0i64];
            let mut all = Tree::default();
            for t in trees {
                all.feature.extend(&t.feature);
                all.threshold.extend(&t.threshold);
                all.left.extend(&t.left);
                all.right.extend(&t.right);
                all.value.extend(&t.value);
                offsets.push(all.len() as i64);
            }
            let n = all.len();
            c.push(format!("{prefix}tree_offsets"), vec![offsets.len()], TensorData::I64(offsets));
            c.push(format!("{prefix}feature"), vec![n], TensorData::I64(all.feature));
            c.push(format!("{prefix}threshold"), vec![n], TensorData::F64(all.threshold));
            c.push(format!("{prefix}left"), vec![n], TensorData::I64(all.left));
            c.push(format!("{prefix}right"), vec![n], TensorData::I64(all.right));
            c.push(format!("{prefix}value"), vec![n], TensorData::I64(all.value));
            "forest"
        }
    };
    json!({
        "spec": m.spec,
        "labels": m.labels,
        "n_features": m.n_features,
        "featurizer_ref": m.featurizer_ref,
        "state": state,
    })
}

fn model_from(c: &mut Container, prefix: &str, meta: &Value) -> Result<TrainedModel> {
    let spec: ModelSpec = field(meta, "spec")?;
    let labels: Vec<String> = field(meta, "labels")?;
    let n_features: usize = field(meta, "n_features")?;
    let featurizer_ref: String = field(meta, "featurizer_ref")?;
    let state_kind: String = field(meta, "state")?;
    let (k, d) = (labels.len(), n_features);
    let check = |len: usize, want: usize, what: &str| {
        if len == want {
            Ok(())
        } else {
            Err(Error::Artifact(format!("{what}: expected {want} values, found {len}")))
        }
    };
    let state = match state_kind.as_str() {
        "naive_bayes" => {
            let log_prior = c.take_f64(&format!("{prefix}log_prior"))?;
            let log_likelihood = c.take_f64(&format!("{prefix}log_likelihood"))?;
            check(log_prior.len(), k, "log_prior")?;
            check(log_likelihood.len(), k * d, "log_likelihood")?;
            ModelState::NaiveBayes(NaiveBayesWeights {
                log_prior,
                log_likelihood,
            })
        }
        "linear" => {
            let weights = c.take_f64(&format!("{prefix}weights"))?;
            let bias = c.take_f64(&format!("{prefix}bias"))?;
            check(weights.len(), k * d, "weights")?;
            check(bias.len(), k, "bias")?;
            ModelState::Linear(LinearWeights {
                weights,
                bias,
                objective: c.take_f64(&format!("{prefix}objective"))?,
            })
        }
        "forest" => {
            let offsets = c.take_i64(&format!("{prefix}tree_offsets"))?;
            let feature = c.take_i64(&format!("{prefix}feature"))?;
            let threshold = c.take_f64(&format!("{prefix}threshold"))?;
            let left = c.take_i64(&format!("{prefix}left"))?;
            let right = c.take_i64(&format!("{prefix}right"))?;
            let value = c.take_i64(&format!("{prefix}value"))?;
            let n = feature.len();
            if [threshold.len(), left.len(), right.len(), value.len()].iter().any(|&l| l != n) {
                return Err(Error::Artifact("forest arrays differ in length".into()));
            }
            let mut trees = Vec::new();
            for w in offsets.windows(2) {
                let (lo, hi) = (w[0] as usize, w[1] as usize);
                if lo >= hi || hi > n {
                    return Err(Error::Artifact("bad tree offsets".into()));
                }
                let tree = Tree {
                    feature: feature[lo..hi].to_vec(),
                    threshold: threshold[lo..hi].to_vec(),
                    left: left[lo..hi].to_vec(),
                    right: right[lo..hi].to_vec(),
                    value: value[lo..hi].to_vec(),
                };
                validate_tree(&tree, k, d)?;
                trees.push(tree);
            }
            ModelState::Forest(trees)
        }
        other => return Err(Error::Artifact(format!("unknown model state `{other}`"))),
    };
    Ok(TrainedModel {
        spec,
        labels,
        n_features,
        featurizer_ref,
        state,
    })
}

fn validate_tree(t: &Tree, k: usize, d: usize) -> Result<()> {
    let n = t.len() as i64;
    for i in 0..t.len() {
        let ok = if t.feature[i] < 0 {
            (0..k as i64).contains(&t.value[i])
        } else {
            // children always come after their parent, so traversal terminates
            t.feature[i] < d as i64
                && t.left[i] > i as i64
                && t.left[i] < n
                && t.right[i] > i as i64
                && t.right[i] < n
        };
        if !ok {
            return Err(Error::Artifact(format!("tree node {i} is malformed")));
        }
    }
    Ok(())
}

// ---- bundles -----------------------------------------------------------

fn preprocessor_meta(p: &Preprocessor) -> Value {
    json!({
        "cleaning": p.config(),
        "names": p.names().names(),
        "name_tag": p.names().tag(),
    })
}

fn preprocessor_from(meta: &Value) -> Result<Preprocessor> {
    let cleaning: CleaningConfig = field(meta, "cleaning")?;
    let names: Vec<String> = field(meta, "names")?;
    let tag: String = field(meta, "name_tag")?;
    Preprocessor::new(cleaning, NameDictionary::new(names, tag)?)
}

/// 64-bit FNV-1a, used to fingerprint featurizers.
pub fn fingerprint(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325u64, |h, &b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

/// A fitted featurizer with the preprocessing it expects.
#[derive(Clone, Debug)]
pub struct FeaturizerArtifact {
    pub preprocessor: Preprocessor,
    pub featurizer: Featurizer,
    pub metadata: BTreeMap<String, Value>,
}

impl FeaturizerArtifact {
    pub fn to_container(&self) -> Container {
        let mut c = Container::new("featurizer", Value::Null);
        let f = featurizer_into(&mut c, "featurizer.", &self.featurizer);
        c.meta = json!({
            "preprocess": preprocessor_meta(&self.preprocessor),
            "featurizer": f,
            "metadata": self.metadata,
        });
        c
    }

    pub fn from_container(mut c: Container) -> Result<Self> {
        if c.kind != "featurizer" {
            return Err(Error::Artifact(format!("expected a featurizer artifact, found `{}`", c.kind)));
        }
        let meta = c.meta.clone();
        Ok(FeaturizerArtifact {
            preprocessor: preprocessor_from(&meta["preprocess"])?,
            featurizer: featurizer_from(&mut c, "featurizer.", &meta["featurizer"])?,
            metadata: field(&meta, "metadata")?,
        })
    }

    /// Identifier stored in models trained on this featurizer.
    pub fn reference(&self) -> Result<String> {
        let bytes = self.to_container().to_bytes()?;
        Ok(format!("{}:{:016x}", self.featurizer.name(), fingerprint(&bytes)))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.to_container().write(path)
    }

    pub fn load(path: &Path) -> Result<Self> {
        FeaturizerArtifact::from_container(Container::read(path)?)
    }
}

/// A trained model together with its featurizer and preprocessing, enough to
/// label raw transactions.
#[derive(Clone, Debug)]
pub struct ModelArtifact {
    pub featurizer: FeaturizerArtifact,
    pub model: TrainedModel,
    pub metadata: BTreeMap<String, Value>,
}

impl ModelArtifact {
    pub fn to_container(&self) -> Container {
        let mut c = self.featurizer.to_container();
        c.kind = "model".into();
        let m = model_into(&mut c, "model.", &self.model);
        c.meta["model"] = m;
        c.meta["model_metadata"] = json!(self.metadata);
        c
    }

    pub fn from_container(mut c: Container) -> Result<Self> {
        if c.kind != "model" {
            return Err(Error::Artifact(format!("expected a model artifact, found `{}`", c.kind)));
        }
        let meta = c.meta.clone();
        let model = model_from(&mut c, "model.", &meta["model"])?;
        let metadata = field(&meta, "model_metadata")?;
        c.kind = "featurizer".into();
        let featurizer = FeaturizerArtifact::from_container(c)?;
        if model.n_features != featurizer.featurizer.dims() {
            return Err(Error::Artifact(format!(
                "model expects {} features, featurizer produces {}",
                model.n_features,
                featurizer.featurizer.dims()
            )));
        }
        Ok(ModelArtifact {
            featurizer,
            model,
            metadata,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.to_container().write(path)
    }

    pub fn load(path: &Path) -> Result<Self> {
        ModelArtifact::from_container(Container::read(path)?)
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        self.to_container().to_bytes()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        ModelArtifact::from_container(Container::from_bytes(bytes)?)
    }
}
