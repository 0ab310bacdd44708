//! Class rebalancing: SMOTE oversampling chained with random undersampling.
//!
//! Phase one brings every class that is below `oversample_ratio` times the
//! majority count up to exactly `floor(oversample_ratio * majority)` by
//! interpolating between a random member and one of its `k_neighbors`
//! nearest same-class neighbours. Phase two removes random original rows
//! from every class larger than `floor(smallest / target_minority_ratio)`.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::matrix::{FeatureMatrix, Row};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BalanceConfig {
    pub oversample_ratio: f64,
    pub target_minority_ratio: f64,
    pub k_neighbors: usize,
}

impl Default for BalanceConfig {
    fn default() -> Self {
        BalanceConfig {
            oversample_ratio: 0.5,
            target_minority_ratio: 1.0,
            k_neighbors: 5,
        }
    }
}

impl BalanceConfig {
    fn validate(&self) -> Result<()> {
        if !(self.target_minority_ratio > 0.0 && self.target_minority_ratio <= 1.0) {
            return Err(Error::invalid("target_minority_ratio must be in (0, 1]"));
        }
        if !(self.oversample_ratio >= 0.0 && self.oversample_ratio <= 1.0) {
            return Err(Error::invalid("oversample_ratio must be in [0, 1]"));
        }
        if self.k_neighbors == 0 {
            return Err(Error::invalid("k_neighbors must be at least 1"));
        }
        Ok(())
    }
}

/// Provenance of one synthetic row. Indices refer to rows of the input matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticSample {
    pub seed: usize,
    pub neighbor: usize,
    pub lambda: f64,
}

#[derive(Debug, Clone)]
pub struct Balanced<L> {
    pub features: FeatureMatrix,
    pub labels: Vec<L>,
    /// Input rows kept, in output order. They occupy the first `kept.len()` output rows.
    pub kept: Vec<usize>,
    /// Synthetic rows, appended after the kept rows in this order.
    pub synthetic: Vec<SyntheticSample>,
}

/// `x + lambda * (neighbor - x)`
pub fn interpolate(x: &[f64], neighbor: &[f64], lambda: f64) -> Vec<f64> {
    x.iter().zip(neighbor).map(|(a, b)| a + lambda * (b - a)).collect()
}

pub(crate) fn squared_distance(a: Row<'_>, b: Row<'_>) -> f64 {
    match (a, b) {
        (Row::Dense(x), Row::Dense(y)) => x.iter().zip(y).map(|(p, q)| (p - q) * (p - q)).sum(),
        (
            Row::Sparse {
                indices: ia,
                values: va,
            },
            Row::Sparse {
                indices: ib,
                values: vb,
            },
        ) => {
            let (mut i, mut j, mut acc) = (0, 0, 0.0);
            while i < ia.len() || j < ib.len() {
                let d = match (ia.get(i), ib.get(j)) {
                    (Some(p), Some(q)) if p == q => {
                        let d = va[i] - vb[j];
                        i += 1;
                        j += 1;
                        d
                    }
                    (Some(p), Some(q)) if p < q => {
                        i += 1;
                        va[i - 1]
                    }
                    (Some(_), None) => {
                        i += 1;
                        va[i - 1]
                    }
                    _ => {
                        j += 1;
                        vb[j - 1]
                    }
                };
                acc += d * d;
            }
            acc
        }
        _ => unreachable!("rows of one matrix share a layout"),
    }
}

/// The `k` nearest members (by Euclidean distance, ties by position) of
/// `members` to `members[at]`, excluding itself. Returned as input row indices.
pub(crate) fn nearest_neighbors(x: &FeatureMatrix, members: &[usize], at: usize, k: usize) -> Vec<usize> {
    let origin = x.row(members[at]);
    let mut dists: Vec<(f64, usize)> = members
        .iter()
        .enumerate()
        .filter(|&(pos, _)| pos != at)
        .map(|(_, &row)| (squared_distance(origin, x.row(row)), row))
        .collect();
    dists.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    dists.into_iter().take(k).map(|(_, row)| row).collect()
}

pub fn balance<L: Ord + Clone + std::fmt::Debug>(
    x: &FeatureMatrix,
    y: &[L],
    config: &BalanceConfig,
    seed: u64,
) -> Result<Balanced<L>> {
    config.validate()?;
    if x.n_rows() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.n_rows(),
            right: y.len(),
        });
    }
    let mut classes: BTreeMap<&L, Vec<usize>> = BTreeMap::new();
    for (i, label) in y.iter().enumerate() {
        classes.entry(label).or_default().push(i);
    }
    let majority = classes.values().map(Vec::len).max().unwrap_or(0);
    let over_target = (config.oversample_ratio * majority as f64 + 1e-9).floor() as usize;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut synthetic = Vec::new();
    let mut synthetic_labels = Vec::new();
    let mut final_counts: BTreeMap<&L, usize> = BTreeMap::new();

    for (label, members) in &classes {
        let needed = over_target.saturating_sub(members.len());
        final_counts.insert(label, members.len() + needed);
        if needed == 0 {
            continue;
        }
        if members.len() < config.k_neighbors + 1 {
            return Err(Error::ClassTooSmall {
                class: format!("{label:?}"),
                count: members.len(),
                required: config.k_neighbors + 1,
            });
        }
        let mut neighbor_cache: Vec<Option<Vec<usize>>> = vec![None; members.len()];
        for _ in 0..needed {
            let at = rng.gen_range(0..members.len());
            let neighbors =
                neighbor_cache[at].get_or_insert_with(|| nearest_neighbors(x, members, at, config.k_neighbors));
            let neighbor = neighbors[rng.gen_range(0..neighbors.len())];
            let lambda: f64 = rng.gen();
            synthetic.push(SyntheticSample {
                seed: members[at],
                neighbor,
                lambda,
            });
            synthetic_labels.push((*label).clone());
        }
    }

    let smallest = final_counts.values().copied().min().unwrap_or(0);
    let cap = (smallest as f64 / config.target_minority_ratio + 1e-9).floor() as usize;
    let mut removed = vec![false; y.len()];
    for (label, members) in &classes {
        let count = final_counts[label];
        if count <= cap {
            continue;
        }
        let mut pool = members.clone();
        pool.shuffle(&mut rng);
        for &i in &pool[..count - cap] {
            removed[i] = true;
        }
    }

    let kept: Vec<usize> = (0..y.len()).filter(|&i| !removed[i]).collect();
    let mut features = x.select_rows(&kept);
    let mut labels: Vec<L> = kept.iter().map(|&i| y[i].clone()).collect();
    let mut ids = Vec::with_capacity(synthetic.len());
    let mut rows = Vec::with_capacity(synthetic.len());
    for (n, s) in synthetic.iter().enumerate() {
        let a = x.dense_row(s.seed);
        let b = x.dense_row(s.neighbor);
        rows.push(interpolate(&a, &b, s.lambda));
        ids.push(format!("{}#smote{n}", x.ids()[s.seed]));
    }
    features.append_rows(ids, rows)?;
    labels.extend(synthetic_labels);
    Ok(Balanced {
        features,
        labels,
        kept,
        synthetic,
    })
}
