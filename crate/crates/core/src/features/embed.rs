//! Static word-embedding tables and mean pooling over them.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use super::matrix::FeatureMatrix;
use super::text::TokenizedDoc;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    dim: usize,
    vectors: HashMap<String, Vec<f64>>,
}

impl EmbeddingTable {
    pub fn new(entries: impl IntoIterator<Item = (String, Vec<f64>)>) -> Result<Self> {
        let mut dim = None;
        let mut vectors = HashMap::new();
        for (token, v) in entries {
            match dim {
                None => dim = Some(v.len()),
                Some(d) if d != v.len() => {
                    return Err(Error::DimensionMismatch {
                        expected: d,
                        got: v.len(),
                    })
                }
                _ => {}
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::invalid(format!("non-finite vector for {token:?}")));
            }
            vectors.insert(token, v);
        }
        let dim = dim.ok_or(Error::Empty("embedding table"))?;
        if dim == 0 {
            return Err(Error::invalid("embedding dimension must be positive"));
        }
        Ok(EmbeddingTable { dim, vectors })
    }

    /// Reads the whitespace-separated text format: a token followed by its
    /// components, one token per line. A leading `count dim` header line, as
    /// written by word2vec tools, is skipped.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut entries = Vec::new();
        for (idx, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            let mut parts = line.split_whitespace();
            let Some(token) = parts.next() else { continue };
            let values: std::result::Result<Vec<f64>, _> = parts.map(str::parse).collect();
            let values = values.map_err(|e| Error::Parse {
                path: path.display().to_string(),
                line: idx + 1,
                message: e.to_string(),
            })?;
            if idx == 0 && values.len() == 1 && token.parse::<usize>().is_ok() {
                continue;
            }
            entries.push((token.to_string(), values));
        }
        Self::new(entries).map_err(|e| match e {
            Error::DimensionMismatch { expected, got } => Error::Parse {
                path: path.display().to_string(),
                line: 0,
                message: format!("inconsistent vector dimensions: {expected} vs {got}"),
            },
            other => other,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, token: &str) -> Option<&[f64]> {
        self.vectors.get(token).map(Vec::as_slice)
    }
}

/// Mean of the in-table token vectors of each document. Documents with no
/// in-table token get the zero vector.
pub fn embed_mean(docs: &[TokenizedDoc], table: &EmbeddingTable) -> Result<FeatureMatrix> {
    let rows = docs
        .iter()
        .map(|doc| {
            let mut sum = vec![0.0; table.dim];
            let mut hits = 0usize;
            for v in doc.tokens.iter().filter_map(|t| table.get(t)) {
                for (s, x) in sum.iter_mut().zip(v) {
                    *s += x;
                }
                hits += 1;
            }
            if hits > 0 {
                for s in &mut sum {
                    *s /= hits as f64;
                }
            }
            sum
        })
        .collect();
    FeatureMatrix::from_dense_rows(docs.iter().map(|d| d.id.clone()).collect(), table.dim, rows)
}
