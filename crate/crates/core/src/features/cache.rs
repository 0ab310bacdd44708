//! On-disk cache of computed feature matrices, keyed by corpus content and
//! feature name.

use std::fs;
use std::path::{Path, PathBuf};

use super::encoder::fnv1a;
use super::matrix::FeatureMatrix;
use super::text::TokenizedDoc;
use crate::{Error, Result};

/// Content hash over document ids and tokens, as 16 hex digits.
pub fn corpus_hash(docs: &[TokenizedDoc]) -> String {
    let mut bytes = Vec::new();
    for d in docs {
        bytes.extend_from_slice(d.id.as_bytes());
        bytes.push(0x1e);
        for t in &d.tokens {
            bytes.extend_from_slice(t.as_bytes());
            bytes.push(0x1f);
        }
        bytes.push(0x1d);
    }
    format!("{:016x}", fnv1a(&bytes))
}

#[derive(Debug, Clone)]
pub struct FeatureCache {
    dir: PathBuf,
}

impl FeatureCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        FeatureCache { dir: dir.into() }
    }

    pub fn path_for(&self, corpus_hash: &str, feature: &str) -> PathBuf {
        let safe: String = feature
            .chars()
            .map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' })
            .collect();
        self.dir.join(format!("{corpus_hash}-{safe}.json"))
    }

    pub fn get(&self, corpus_hash: &str, feature: &str) -> Result<Option<FeatureMatrix>> {
        let path = self.path_for(corpus_hash, feature);
        match fs::read(&path) {
            Ok(bytes) => Ok(Some(serde_json::from_slice(&bytes)?)),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(Error::io(path, e)),
        }
    }

    pub fn put(&self, corpus_hash: &str, feature: &str, matrix: &FeatureMatrix) -> Result<()> {
        fs::create_dir_all(&self.dir).map_err(|e| Error::io(&self.dir, e))?;
        let path = self.path_for(corpus_hash, feature);
        write_atomic(&path, &serde_json::to_vec(matrix)?)
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("json.tmp");
    fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}
