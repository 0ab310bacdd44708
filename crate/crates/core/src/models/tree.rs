//! Decision trees, random forests and softmax gradient-boosted trees.
//!
//! All three share one builder. Each node gathers the non-zero entries of its
//! rows column by column, so sparse bag-of-words matrices are split without
//! densifying. Implicit zeros form one extra group per feature.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::math::softmax_in_place;
use crate::features::{FeatureMatrix, Row};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        value: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

pub(crate) fn row_value(row: Row<'_>, feature: usize) -> f64 {
    match row {
        Row::Dense(v) => v[feature],
        Row::Sparse { indices, values } => match indices.binary_search(&(feature as u32)) {
            Ok(k) => values[k],
            Err(_) => 0.0,
        },
    }
}

impl Tree {
    pub fn leaf_value(&self, row: Row<'_>) -> &[f64] {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf { value } => return value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if row_value(row, *feature) <= *threshold {
                        *left
                    } else {
                        *right
                    };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match &nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) enum Criterion {
    /// Targets are weighted one-hot class vectors.
    Gini,
    /// Targets are (gradient, hessian) pairs.
    Newton { lambda: f64, min_child_weight: f64 },
}

impl Criterion {
    fn score(&self, s: &[f64]) -> f64 {
        match *self {
            Criterion::Gini => {
                let total: f64 = s.iter().sum();
                if total <= 0.0 {
                    0.0
                } else {
                    s.iter().map(|v| v * v).sum::<f64>() / total
                }
            }
            Criterion::Newton { lambda, .. } => s[0] * s[0] / (s[1] + lambda),
        }
    }

    fn leaf(&self, s: &[f64]) -> Vec<f64> {
        match *self {
            Criterion::Gini => {
                let total: f64 = s.iter().sum();
                s.iter().map(|v| v / total).collect()
            }
            Criterion::Newton { lambda, .. } => vec![-s[0] / (s[1] + lambda)],
        }
    }

    fn child_ok(&self, s: &[f64], count: usize, min_samples_leaf: usize) -> bool {
        match *self {
            Criterion::Gini => count >= min_samples_leaf,
            Criterion::Newton { min_child_weight, .. } => count >= min_samples_leaf && s[1] >= min_child_weight,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct TreeConfig {
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub min_samples_leaf: usize,
    pub max_features: Option<usize>,
    pub criterion: Criterion,
}

/// Training rows for one tree: `rows[s]` indexes the matrix and
/// `targets[s * width..]` holds that sample's statistics.
pub(crate) struct Samples<'a> {
    pub x: &'a FeatureMatrix,
    pub rows: Vec<usize>,
    pub targets: Vec<f64>,
    pub width: usize,
}

impl Samples<'_> {
    fn target(&self, s: usize) -> &[f64] {
        &self.targets[s * self.width..(s + 1) * self.width]
    }
}

fn add(acc: &mut [f64], v: &[f64]) {
    for (a, b) in acc.iter_mut().zip(v) {
        *a += b;
    }
}

struct Best {
    gain: f64,
    feature: usize,
    threshold: f64,
}

pub(crate) fn build_tree(samples: &Samples<'_>, config: &TreeConfig, rng: &mut ChaCha8Rng) -> Tree {
    let width = samples.width;
    let mut nodes: Vec<Node> = Vec::new();
    // (node slot, samples, depth)
    let root: Vec<usize> = (0..samples.rows.len()).collect();
    nodes.push(Node::Leaf { value: Vec::new() });
    let mut stack = vec![(0usize, root, 0usize)];
    while let Some((slot, members, depth)) = stack.pop() {
        let mut total = vec![0.0; width];
        for &s in &members {
            add(&mut total, samples.target(s));
        }
        let can_split = members.len() >= config.min_samples_split.max(2) && config.max_depth.is_none_or(|m| depth < m);
        let best = if can_split {
            find_split(samples, &members, &total, config, rng)
        } else {
            None
        };
        match best {
            None => {
                nodes[slot] = Node::Leaf {
                    value: config.criterion.leaf(&total),
                }
            }
            Some(best) => {
                let (left, right): (Vec<usize>, Vec<usize>) = members
                    .iter()
                    .partition(|&&s| row_value(samples.x.row(samples.rows[s]), best.feature) <= best.threshold);
                let l = nodes.len();
                nodes.push(Node::Leaf { value: Vec::new() });
                nodes.push(Node::Leaf { value: Vec::new() });
                nodes[slot] = Node::Split {
                    feature: best.feature,
                    threshold: best.threshold,
                    left: l,
                    right: l + 1,
                };
                stack.push((l + 1, right, depth + 1));
                stack.push((l, left, depth + 1));
            }
        }
    }
    Tree { nodes }
}

fn find_split(
    samples: &Samples<'_>,
    members: &[usize],
    total: &[f64],
    config: &TreeConfig,
    rng: &mut ChaCha8Rng,
) -> Option<Best> {
    let width = samples.width;
    let mut entries: Vec<(u32, f64, u32)> = Vec::new();
    for &s in members {
        for (j, v) in samples.x.row(samples.rows[s]).entries() {
            if v != 0.0 {
                entries.push((j as u32, v, s as u32));
            }
        }
    }
    entries.sort_unstable_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)).then(a.2.cmp(&b.2)));

    // Feature groups that are not constant within this node.
    let mut groups: Vec<(usize, usize, usize)> = Vec::new();
    let mut start = 0;
    while start < entries.len() {
        let f = entries[start].0;
        let mut end = start;
        while end < entries.len() && entries[end].0 == f {
            end += 1;
        }
        let has_zero = end - start < members.len();
        let varies = entries[start].1 != entries[end - 1].1;
        if has_zero || varies {
            groups.push((f as usize, start, end));
        }
        start = end;
    }
    if let Some(m) = config.max_features {
        if m < groups.len() {
            let (chosen, _) = groups.partial_shuffle(rng, m);
            let mut chosen = chosen.to_vec();
            chosen.sort_unstable();
            groups = chosen;
        }
    }

    let parent_score = config.criterion.score(total);
    let n = members.len();
    let mut best: Option<Best> = None;
    let mut nonzero = vec![0.0; width];
    let mut left = vec![0.0; width];
    let mut right = vec![0.0; width];
    for &(feature, start, end) in &groups {
        let group = &entries[start..end];
        nonzero.iter_mut().for_each(|v| *v = 0.0);
        for e in group {
            add(&mut nonzero, samples.target(e.2 as usize));
        }
        let zero_count = n - group.len();
        let zero_stats: Vec<f64> = total.iter().zip(&nonzero).map(|(t, z)| t - z).collect();
        // Sweep values in ascending order with the zero group slotted in at 0.
        let split_at = group.partition_point(|e| e.1 < 0.0);
        let mut sweep: Vec<(f64, Option<usize>)> = Vec::with_capacity(group.len() + 1);
        sweep.extend(group[..split_at].iter().map(|e| (e.1, Some(e.2 as usize))));
        if zero_count > 0 {
            sweep.push((0.0, None));
        }
        sweep.extend(group[split_at..].iter().map(|e| (e.1, Some(e.2 as usize))));

        left.iter_mut().for_each(|v| *v = 0.0);
        let mut left_count = 0usize;
        for k in 0..sweep.len() - 1 {
            match sweep[k].1 {
                Some(s) => {
                    add(&mut left, samples.target(s));
                    left_count += 1;
                }
                None => {
                    add(&mut left, &zero_stats);
                    left_count += zero_count;
                }
            }
            let (a, b) = (sweep[k].0, sweep[k + 1].0);
            if a == b {
                continue;
            }
            let right_count = n - left_count;
            for (r, (t, l)) in right.iter_mut().zip(total.iter().zip(&left)) {
                *r = t - l;
            }
            if !config.criterion.child_ok(&left, left_count, config.min_samples_leaf)
                || !config.criterion.child_ok(&right, right_count, config.min_samples_leaf)
            {
                continue;
            }
            let mut gain = config.criterion.score(&left) + config.criterion.score(&right) - parent_score;
            if let Criterion::Newton { .. } = config.criterion {
                gain *= 0.5;
            }
            if gain > 1e-12 && best.as_ref().is_none_or(|b| gain > b.gain) {
                let mut threshold = a + (b - a) / 2.0;
                if threshold >= b {
                    threshold = a;
                }
                best = Some(Best {
                    gain,
                    feature,
                    threshold,
                });
            }
        }
    }
    best
}

fn one_hot_targets(y: &[usize], weights: &[f64], n_classes: usize) -> Vec<f64> {
    let mut t = vec![0.0; y.len() * n_classes];
    for (s, (&c, &w)) in y.iter().zip(weights).enumerate() {
        t[s * n_classes + c] = w;
    }
    t
}

pub(crate) fn fit_decision_tree(
    x: &FeatureMatrix,
    y: &[usize],
    n_classes: usize,
    config: TreeConfig,
    seed: u64,
) -> Tree {
    let samples = Samples {
        x,
        rows: (0..y.len()).collect(),
        targets: one_hot_targets(y, &vec![1.0; y.len()], n_classes),
        width: n_classes,
    };
    build_tree(&samples, &config, &mut ChaCha8Rng::seed_from_u64(seed))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    pub n_classes: usize,
    pub trees: Vec<Tree>,
}

impl Forest {
    /// Mean of the trees' leaf class distributions.
    pub fn scores(&self, row: Row<'_>) -> Vec<f64> {
        let mut out = vec![0.0; self.n_classes];
        for t in &self.trees {
            add(&mut out, t.leaf_value(row));
        }
        let n = self.trees.len() as f64;
        out.iter_mut().for_each(|v| *v /= n);
        out
    }
}

pub(crate) fn fit_random_forest(
    x: &FeatureMatrix,
    y: &[usize],
    n_classes: usize,
    n_trees: usize,
    config: TreeConfig,
    seed: u64,
) -> Forest {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = y.len();
    let trees = (0..n_trees)
        .map(|_| {
            let mut multiplicity = vec![0usize; n];
            for _ in 0..n {
                multiplicity[rng.gen_range(0..n)] += 1;
            }
            let rows: Vec<usize> = (0..n).filter(|&i| multiplicity[i] > 0).collect();
            let ys: Vec<usize> = rows.iter().map(|&i| y[i]).collect();
            let ws: Vec<f64> = rows.iter().map(|&i| multiplicity[i] as f64).collect();
            let samples = Samples {
                x,
                targets: one_hot_targets(&ys, &ws, n_classes),
                rows,
                width: n_classes,
            };
            build_tree(&samples, &config, &mut rng)
        })
        .collect();
    Forest { n_classes, trees }
}

/// Softmax boosting: each round fits one Newton-step regression tree per class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Boosted {
    pub n_classes: usize,
    /// Round-major, `n_classes` trees per round, leaf values already shrunk.
    pub trees: Vec<Tree>,
}

impl Boosted {
    pub fn raw(&self, row: Row<'_>) -> Vec<f64> {
        let mut f = vec![0.0; self.n_classes];
        for (t, tree) in self.trees.iter().enumerate() {
            f[t % self.n_classes] += tree.leaf_value(row)[0];
        }
        f
    }

    pub fn scores(&self, row: Row<'_>) -> Vec<f64> {
        let mut f = self.raw(row);
        softmax_in_place(&mut f);
        f
    }
}

pub(crate) struct BoostConfig {
    pub rounds: usize,
    pub learning_rate: f64,
    pub tree: TreeConfig,
}

pub(crate) fn fit_boosted(
    x: &FeatureMatrix,
    y: &[usize],
    n_classes: usize,
    config: &BoostConfig,
    seed: u64,
) -> Boosted {
    let n = y.len();
    let k = n_classes;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f = vec![0.0; n * k];
    let mut trees = Vec::with_capacity(config.rounds * k);
    let mut p = vec![0.0; k];
    for _ in 0..config.rounds {
        let mut grads = vec![vec![0.0; 2 * n]; k];
        for i in 0..n {
            p.copy_from_slice(&f[i * k..(i + 1) * k]);
            softmax_in_place(&mut p);
            for c in 0..k {
                let target = if y[i] == c { 1.0 } else { 0.0 };
                grads[c][2 * i] = p[c] - target;
                grads[c][2 * i + 1] = (p[c] * (1.0 - p[c])).max(1e-16);
            }
        }
        for (c, targets) in grads.into_iter().enumerate() {
            let samples = Samples {
                x,
                rows: (0..n).collect(),
                targets,
                width: 2,
            };
            let mut tree = build_tree(&samples, &config.tree, &mut rng);
            for node in &mut tree.nodes {
                if let Node::Leaf { value } = node {
                    value[0] *= config.learning_rate;
                }
            }
            for i in 0..n {
                f[i * k + c] += tree.leaf_value(x.row(i))[0];
            }
            trees.push(tree);
        }
    }
    Boosted { n_classes, trees }
}
