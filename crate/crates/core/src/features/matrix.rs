use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Document-by-dimension matrix whose rows are aligned to document ids.
///
/// Bag-of-words style features are stored row-compressed; embedding features
/// are stored dense. Both expose the same row view.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    ids: Vec<String>,
    n_dims: usize,
    storage: Storage,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum Storage {
    Dense {
        values: Vec<f64>,
    },
    Sparse {
        indptr: Vec<usize>,
        indices: Vec<u32>,
        values: Vec<f64>,
    },
}

#[derive(Debug, Clone, Copy)]
pub enum Row<'a> {
    Dense(&'a [f64]),
    Sparse { indices: &'a [u32], values: &'a [f64] },
}

impl<'a> Row<'a> {
    pub fn dot(&self, weights: &[f64]) -> f64 {
        match *self {
            Row::Dense(v) => v.iter().zip(weights).map(|(a, b)| a * b).sum(),
            Row::Sparse { indices, values } => indices.iter().zip(values).map(|(&i, v)| v * weights[i as usize]).sum(),
        }
    }

    /// `out += scale * row`
    pub fn axpy(&self, scale: f64, out: &mut [f64]) {
        match *self {
            Row::Dense(v) => {
                for (o, x) in out.iter_mut().zip(v) {
                    *o += scale * x;
                }
            }
            Row::Sparse { indices, values } => {
                for (&i, v) in indices.iter().zip(values) {
                    out[i as usize] += scale * v;
                }
            }
        }
    }

    /// Stored entries as (dimension, value). Dense rows yield every dimension.
    pub fn entries(&self) -> Box<dyn Iterator<Item = (usize, f64)> + 'a> {
        match *self {
            Row::Dense(v) => Box::new(v.iter().copied().enumerate()),
            Row::Sparse { indices, values } => Box::new(indices.iter().zip(values).map(|(&i, &v)| (i as usize, v))),
        }
    }

    pub fn to_dense(&self, n_dims: usize) -> Vec<f64> {
        let mut out = vec![0.0; n_dims];
        self.axpy(1.0, &mut out);
        out
    }

    pub fn squared_norm(&self) -> f64 {
        match *self {
            Row::Dense(v) => v.iter().map(|x| x * x).sum(),
            Row::Sparse { values, .. } => values.iter().map(|x| x * x).sum(),
        }
    }
}

fn check_finite(values: &[f64]) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::invalid("feature matrix contains non-finite values"))
    }
}

impl FeatureMatrix {
    pub fn dense(ids: Vec<String>, n_dims: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != ids.len() * n_dims {
            return Err(Error::invalid(format!(
                "{} values do not fill {} rows of {} dims",
                values.len(),
                ids.len(),
                n_dims
            )));
        }
        check_finite(&values)?;
        Ok(FeatureMatrix {
            ids,
            n_dims,
            storage: Storage::Dense { values },
        })
    }

    pub fn from_dense_rows(ids: Vec<String>, n_dims: usize, rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.len() != ids.len() {
            return Err(Error::LengthMismatch {
                left: ids.len(),
                right: rows.len(),
            });
        }
        let mut values = Vec::with_capacity(rows.len() * n_dims);
        for row in rows {
            if row.len() != n_dims {
                return Err(Error::DimensionMismatch {
                    expected: n_dims,
                    got: row.len(),
                });
            }
            values.extend(row);
        }
        Self::dense(ids, n_dims, values)
    }

    /// Rows given as (dimension, value) pairs; zeros are dropped and
    /// dimensions sorted.
    pub fn sparse(ids: Vec<String>, n_dims: usize, rows: Vec<Vec<(usize, f64)>>) -> Result<Self> {
        if rows.len() != ids.len() {
            return Err(Error::LengthMismatch {
                left: ids.len(),
                right: rows.len(),
            });
        }
        let mut indptr = Vec::with_capacity(rows.len() + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for mut row in rows {
            row.sort_by_key(|&(i, _)| i);
            for (i, v) in row {
                if i >= n_dims {
                    return Err(Error::DimensionMismatch {
                        expected: n_dims,
                        got: i + 1,
                    });
                }
                if v != 0.0 {
                    indices.push(i as u32);
                    values.push(v);
                }
            }
            indptr.push(indices.len());
        }
        check_finite(&values)?;
        Ok(FeatureMatrix {
            ids,
            n_dims,
            storage: Storage::Sparse {
                indptr,
                indices,
                values,
            },
        })
    }

    pub fn n_rows(&self) -> usize {
        self.ids.len()
    }

    pub fn n_dims(&self) -> usize {
        self.n_dims
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self.storage, Storage::Sparse { .. })
    }

    pub fn row(&self, i: usize) -> Row<'_> {
        match &self.storage {
            Storage::Dense { values } => Row::Dense(&values[i * self.n_dims..(i + 1) * self.n_dims]),
            Storage::Sparse {
                indptr,
                indices,
                values,
            } => {
                let (a, b) = (indptr[i], indptr[i + 1]);
                Row::Sparse {
                    indices: &indices[a..b],
                    values: &values[a..b],
                }
            }
        }
    }

    pub fn rows(&self) -> impl Iterator<Item = Row<'_>> + '_ {
        (0..self.n_rows()).map(move |i| self.row(i))
    }

    pub fn dense_row(&self, i: usize) -> Vec<f64> {
        self.row(i).to_dense(self.n_dims)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        match self.row(i) {
            Row::Dense(v) => v[j],
            Row::Sparse { indices, values } => indices.binary_search(&(j as u32)).map(|k| values[k]).unwrap_or(0.0),
        }
    }

    /// New matrix made of the given rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> FeatureMatrix {
        let ids = rows.iter().map(|&i| self.ids[i].clone()).collect();
        match &self.storage {
            Storage::Dense { values } => {
                let mut out = Vec::with_capacity(rows.len() * self.n_dims);
                for &i in rows {
                    out.extend_from_slice(&values[i * self.n_dims..(i + 1) * self.n_dims]);
                }
                FeatureMatrix {
                    ids,
                    n_dims: self.n_dims,
                    storage: Storage::Dense { values: out },
                }
            }
            Storage::Sparse { .. } => {
                let mut indptr = vec![0];
                let mut indices = Vec::new();
                let mut values = Vec::new();
                for &i in rows {
                    if let Row::Sparse {
                        indices: idx,
                        values: val,
                    } = self.row(i)
                    {
                        indices.extend_from_slice(idx);
                        values.extend_from_slice(val);
                    }
                    indptr.push(indices.len());
                }
                FeatureMatrix {
                    ids,
                    n_dims: self.n_dims,
                    storage: Storage::Sparse {
                        indptr,
                        indices,
                        values,
                    },
                }
            }
        }
    }

    /// Appends dense rows, keeping the current storage layout.
    pub fn append_rows(&mut self, ids: Vec<String>, rows: Vec<Vec<f64>>) -> Result<()> {
        if ids.len() != rows.len() {
            return Err(Error::LengthMismatch {
                left: ids.len(),
                right: rows.len(),
            });
        }
        for row in &rows {
            if row.len() != self.n_dims {
                return Err(Error::DimensionMismatch {
                    expected: self.n_dims,
                    got: row.len(),
                });
            }
            check_finite(row)?;
        }
        self.ids.extend(ids);
        match &mut self.storage {
            Storage::Dense { values } => {
                for row in rows {
                    values.extend(row);
                }
            }
            Storage::Sparse {
                indptr,
                indices,
                values,
            } => {
                for row in rows {
                    for (i, v) in row.into_iter().enumerate() {
                        if v != 0.0 {
                            indices.push(i as u32);
                            values.push(v);
                        }
                    }
                    indptr.push(indices.len());
                }
            }
        }
        Ok(())
    }

    /// Stored values, in row-major order.
    pub fn stored_values(&self) -> &[f64] {
        match &self.storage {
            Storage::Dense { values } => values,
            Storage::Sparse { values, .. } => values,
        }
    }
}

/// Per-document sequences of token vectors, as produced by a contextual encoder.
///
/// Every sequence has a nominal length of `max_tokens`; only the first
/// `len(i)` positions hold token vectors and the rest are zero padding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceBatch {
    ids: Vec<String>,
    dim: usize,
    max_tokens: usize,
    lengths: Vec<usize>,
    offsets: Vec<usize>,
    values: Vec<f64>,
}

impl SequenceBatch {
    pub fn new(dim: usize, max_tokens: usize) -> Self {
        SequenceBatch {
            ids: Vec::new(),
            dim,
            max_tokens,
            lengths: Vec::new(),
            offsets: vec![0],
            values: Vec::new(),
        }
    }

    /// Adds one sequence given as consecutive token vectors; longer inputs are truncated.
    pub fn push(&mut self, id: impl Into<String>, tokens: &[f64]) -> Result<()> {
        if !tokens.len().is_multiple_of(self.dim) {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: tokens.len() % self.dim,
            });
        }
        check_finite(tokens)?;
        let len = (tokens.len() / self.dim).min(self.max_tokens);
        self.ids.push(id.into());
        self.lengths.push(len);
        self.values.extend_from_slice(&tokens[..len * self.dim]);
        self.offsets.push(self.values.len());
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn max_tokens(&self) -> usize {
        self.max_tokens
    }

    /// Number of real (non-padding) positions in sequence `i`.
    pub fn valid_len(&self, i: usize) -> usize {
        self.lengths[i]
    }

    /// The unpadded token vectors of sequence `i`, row-major.
    pub fn tokens(&self, i: usize) -> &[f64] {
        &self.values[self.offsets[i]..self.offsets[i + 1]]
    }

    /// Sequence `i` padded with zeros to `max_tokens` positions.
    pub fn padded(&self, i: usize) -> Vec<f64> {
        let mut out = self.tokens(i).to_vec();
        out.resize(self.max_tokens * self.dim, 0.0);
        out
    }

    pub fn select(&self, rows: &[usize]) -> SequenceBatch {
        let mut out = SequenceBatch::new(self.dim, self.max_tokens);
        for &i in rows {
            out.push(self.ids[i].clone(), self.tokens(i))
                .expect("rows of a valid batch");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(n: usize) -> Vec<String> {
        (0..n).map(|i| i.to_string()).collect()
    }

    #[test]
    fn sparse_and_dense_rows_agree() {
        let dense = FeatureMatrix::dense(ids(2), 3, vec![1.0, 0.0, 2.0, 0.0, 0.0, 0.0]).unwrap();
        let sparse = FeatureMatrix::sparse(ids(2), 3, vec![vec![(2, 2.0), (0, 1.0)], vec![]]).unwrap();
        for i in 0..2 {
            assert_eq!(dense.dense_row(i), sparse.dense_row(i));
            assert_eq!(dense.row(i).dot(&[1.0, 2.0, 3.0]), sparse.row(i).dot(&[1.0, 2.0, 3.0]));
        }
        assert_eq!(sparse.get(0, 2), 2.0);
        assert_eq!(sparse.get(0, 1), 0.0);
    }

    #[test]
    fn rejects_bad_shapes_and_values() {
        assert!(FeatureMatrix::dense(ids(2), 3, vec![0.0; 5]).is_err());
        assert!(FeatureMatrix::dense(ids(1), 1, vec![f64::NAN]).is_err());
        assert!(FeatureMatrix::sparse(ids(1), 2, vec![vec![(2, 1.0)]]).is_err());
    }

    #[test]
    fn select_and_append() {
        let mut m = FeatureMatrix::sparse(ids(3), 2, vec![vec![(0, 1.0)], vec![(1, 2.0)], vec![]]).unwrap();
        let s = m.select_rows(&[2, 0]);
        assert_eq!(s.ids(), ["2", "0"]);
        assert_eq!(s.dense_row(1), vec![1.0, 0.0]);
        m.append_rows(vec!["x".into()], vec![vec![0.5, 0.0]]).unwrap();
        assert_eq!(m.n_rows(), 4);
        assert_eq!(m.dense_row(3), vec![0.5, 0.0]);
    }

    #[test]
    fn sequences_truncate_and_pad() {
        let mut batch = SequenceBatch::new(2, 3);
        batch.push("a", &[1.0; 10]).unwrap();
        batch.push("b", &[2.0; 2]).unwrap();
        assert_eq!(batch.valid_len(0), 3);
        assert_eq!(batch.padded(0).len(), 6);
        assert_eq!(batch.padded(1), vec![2.0, 2.0, 0.0, 0.0, 0.0, 0.0]);
        assert!(batch.push("c", &[1.0; 3]).is_err());
    }
}
