//! Contextual encoder adapters.
//!
//! An encoder turns a tokenized document into one vector per token. The
//! pooled document vector is the mean over the (truncated) token vectors.
//! Two adapters ship here: a deterministic hash-based encoder that needs no
//! model download, and an adapter that replays encodings computed offline by
//! an external language model.

use std::collections::HashMap;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::matrix::{FeatureMatrix, SequenceBatch};
use super::text::TokenizedDoc;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EncoderMode {
    #[default]
    Frozen,
    Finetunable,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncoderHandle {
    pub name: String,
    pub dimension: usize,
    pub max_tokens: usize,
    #[serde(default)]
    pub mode: EncoderMode,
}

impl EncoderHandle {
    pub fn new(name: impl Into<String>, dimension: usize, max_tokens: usize, mode: EncoderMode) -> Result<Self> {
        if dimension == 0 || max_tokens == 0 {
            return Err(Error::invalid("encoder dimension and max_tokens must be positive"));
        }
        Ok(EncoderHandle {
            name: name.into(),
            dimension,
            max_tokens,
            mode,
        })
    }

    /// The built-in hash encoder.
    pub fn hash(dimension: usize, max_tokens: usize, mode: EncoderMode) -> Self {
        Self::new(HASH_ENCODER, dimension, max_tokens, mode).expect("positive sizes")
    }
}

impl fmt::Display for EncoderHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[d={}, max={}]", self.name, self.dimension, self.max_tokens)
    }
}

pub trait Encoder: Send + Sync {
    fn handle(&self) -> &EncoderHandle;

    /// Token vectors for one document, row-major, `dimension` values per token.
    /// May return more tokens than `max_tokens`; callers truncate.
    fn encode(&self, doc: &TokenizedDoc) -> Result<Vec<f64>>;
}

pub const HASH_ENCODER: &str = "hash";
const PRECOMPUTED_PREFIX: &str = "precomputed:";

/// Deterministic stand-in for a pre-trained encoder. Each token gets a
/// pseudo-random vector seeded from its FNV-1a hash, mixed with its
/// neighbours' vectors so identical tokens differ by context.
#[derive(Debug, Clone)]
pub struct HashEncoder {
    handle: EncoderHandle,
}

impl HashEncoder {
    pub fn new(handle: EncoderHandle) -> Self {
        HashEncoder { handle }
    }

    fn token_vector(&self, token: &str) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(fnv1a(token.as_bytes()));
        (0..self.handle.dimension).map(|_| rng.gen_range(-1.0..1.0)).collect()
    }
}

pub(crate) fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        hash ^= u64::from(*b);
        hash = hash.wrapping_mul(0x0100_0000_01b3);
    }
    hash
}

impl Encoder for HashEncoder {
    fn handle(&self) -> &EncoderHandle {
        &self.handle
    }

    fn encode(&self, doc: &TokenizedDoc) -> Result<Vec<f64>> {
        let n = doc.tokens.len().min(self.handle.max_tokens);
        let base: Vec<Vec<f64>> = doc.tokens[..n].iter().map(|t| self.token_vector(t)).collect();
        let mut out = Vec::with_capacity(n * self.handle.dimension);
        for i in 0..n {
            for j in 0..self.handle.dimension {
                let mut v = base[i][j];
                if i > 0 {
                    v += 0.25 * base[i - 1][j];
                }
                if i + 1 < n {
                    v += 0.25 * base[i + 1][j];
                }
                out.push(v);
            }
        }
        Ok(out)
    }
}

#[derive(Deserialize)]
struct PrecomputedLine {
    id: String,
    tokens: Vec<Vec<f64>>,
}

/// Replays token vectors exported by an external encoder, keyed by document id.
/// File format: one JSON object per line, `{"id": ..., "tokens": [[...], ...]}`.
#[derive(Debug, Clone)]
pub struct PrecomputedEncoder {
    handle: EncoderHandle,
    by_id: HashMap<String, Vec<f64>>,
}

impl PrecomputedEncoder {
    pub fn load(handle: EncoderHandle, path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|_| Error::EncoderUnavailable(handle.name.clone()))?;
        let mut by_id = HashMap::new();
        for (idx, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let parsed: PrecomputedLine = serde_json::from_str(&line).map_err(|e| Error::Parse {
                path: path.display().to_string(),
                line: idx + 1,
                message: e.to_string(),
            })?;
            let mut flat = Vec::with_capacity(parsed.tokens.len() * handle.dimension);
            for v in parsed.tokens {
                if v.len() != handle.dimension {
                    return Err(Error::DimensionMismatch {
                        expected: handle.dimension,
                        got: v.len(),
                    });
                }
                flat.extend(v);
            }
            by_id.insert(parsed.id, flat);
        }
        Ok(PrecomputedEncoder { handle, by_id })
    }
}

impl Encoder for PrecomputedEncoder {
    fn handle(&self) -> &EncoderHandle {
        &self.handle
    }

    fn encode(&self, doc: &TokenizedDoc) -> Result<Vec<f64>> {
        self.by_id
            .get(&doc.id)
            .cloned()
            .ok_or_else(|| Error::invalid(format!("no precomputed encoding for document {:?}", doc.id)))
    }
}

/// Resolves a handle to an encoder: `hash` is built in, and
/// `precomputed:<path>` loads exported encodings. Anything else is unavailable.
pub fn load_encoder(handle: &EncoderHandle) -> Result<Box<dyn Encoder>> {
    if handle.name == HASH_ENCODER {
        return Ok(Box::new(HashEncoder::new(handle.clone())));
    }
    if let Some(path) = handle.name.strip_prefix(PRECOMPUTED_PREFIX) {
        return Ok(Box::new(PrecomputedEncoder::load(handle.clone(), path)?));
    }
    Err(Error::EncoderUnavailable(handle.name.clone()))
}

/// Encodes documents into pooled vectors and truncated token sequences.
pub fn contextual_encode(docs: &[TokenizedDoc], encoder: &dyn Encoder) -> Result<(FeatureMatrix, SequenceBatch)> {
    let handle = encoder.handle();
    let dim = handle.dimension;
    let mut sequences = SequenceBatch::new(dim, handle.max_tokens);
    let mut pooled = Vec::with_capacity(docs.len() * dim);
    for doc in docs {
        let tokens = encoder.encode(doc)?;
        sequences.push(doc.id.clone(), &tokens)?;
        let seq = sequences.tokens(sequences.len() - 1);
        let n = seq.len() / dim;
        let mut mean = vec![0.0; dim];
        for tok in seq.chunks_exact(dim) {
            for (m, x) in mean.iter_mut().zip(tok) {
                *m += x;
            }
        }
        if n > 0 {
            for m in &mut mean {
                *m /= n as f64;
            }
        }
        pooled.extend(mean);
    }
    let ids = docs.iter().map(|d| d.id.clone()).collect();
    Ok((FeatureMatrix::dense(ids, dim, pooled)?, sequences))
}
