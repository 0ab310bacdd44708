//! Small neural classifiers trained with Adam on per-sample backpropagation.
//!
//! Parameters live in one flat vector per network; each architecture knows
//! its own layout. Dense layers store weights input-major (`w[j * out + k]`)
//! so sparse inputs touch only the rows of their non-zero dimensions.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::math::{log_softmax_in_place, softmax_in_place};
use crate::features::{FeatureMatrix, Row, SequenceBatch};

#[derive(Debug, Clone, Copy)]
pub(crate) enum NetInput<'a> {
    Matrix(&'a FeatureMatrix),
    Sequences(&'a SequenceBatch),
}

impl NetInput<'_> {
    fn row(&self, i: usize) -> Row<'_> {
        match self {
            NetInput::Matrix(x) => x.row(i),
            NetInput::Sequences(_) => panic!("architecture expects a feature matrix"),
        }
    }

    fn tokens(&self, i: usize) -> &[f64] {
        match self {
            NetInput::Sequences(s) => s.tokens(i),
            NetInput::Matrix(_) => panic!("architecture expects token sequences"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Architecture {
    /// Fully connected ReLU layers.
    Mlp {
        input: usize,
        hidden: Vec<usize>,
        classes: usize,
    },
    /// Convolutions of several widths over token vectors, ReLU, max-pool over time.
    Cnn {
        dim: usize,
        widths: Vec<usize>,
        filters: usize,
        classes: usize,
    },
    /// One bidirectional LSTM layer; the two final hidden states are concatenated.
    BiLstm { dim: usize, hidden: usize, classes: usize },
    /// Trainable token-wise linear map (identity at start), tanh, masked mean
    /// pooling and a linear head.
    Adapter { dim: usize, classes: usize },
}

fn dense_len(input: usize, output: usize) -> usize {
    input * output + output
}

/// `out = b + W^T x` for a dense input.
fn dense_forward(params: &[f64], input: usize, output: usize, x: &[f64], out: &mut [f64]) {
    let (w, b) = params[..dense_len(input, output)].split_at(input * output);
    out.copy_from_slice(b);
    for (j, &xj) in x.iter().enumerate() {
        if xj != 0.0 {
            for (o, wv) in out.iter_mut().zip(&w[j * output..(j + 1) * output]) {
                *o += xj * wv;
            }
        }
    }
}

/// Accumulates parameter gradients for `dense_forward` and optionally the
/// input gradient.
fn dense_backward(
    params: &[f64],
    grads: &mut [f64],
    input: usize,
    output: usize,
    x: &[f64],
    dy: &[f64],
    dx: Option<&mut [f64]>,
) {
    let (gw, gb) = grads[..dense_len(input, output)].split_at_mut(input * output);
    for (g, d) in gb.iter_mut().zip(dy) {
        *g += d;
    }
    for (j, &xj) in x.iter().enumerate() {
        if xj != 0.0 {
            for (g, d) in gw[j * output..(j + 1) * output].iter_mut().zip(dy) {
                *g += xj * d;
            }
        }
    }
    if let Some(dx) = dx {
        let w = &params[..input * output];
        for (j, dxj) in dx.iter_mut().enumerate() {
            *dxj += w[j * output..(j + 1) * output]
                .iter()
                .zip(dy)
                .map(|(a, b)| a * b)
                .sum::<f64>();
        }
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

impl Architecture {
    pub fn classes(&self) -> usize {
        match self {
            Architecture::Mlp { classes, .. }
            | Architecture::Cnn { classes, .. }
            | Architecture::BiLstm { classes, .. }
            | Architecture::Adapter { classes, .. } => *classes,
        }
    }

    /// Width of each input row or token vector.
    pub fn input_dim(&self) -> usize {
        match self {
            Architecture::Mlp { input, .. } => *input,
            Architecture::Cnn { dim, .. } | Architecture::BiLstm { dim, .. } | Architecture::Adapter { dim, .. } => {
                *dim
            }
        }
    }

    pub fn n_params(&self) -> usize {
        match self {
            Architecture::Mlp { input, hidden, classes } => {
                let mut n = 0;
                let mut prev = *input;
                for &h in hidden {
                    n += dense_len(prev, h);
                    prev = h;
                }
                n + dense_len(prev, *classes)
            }
            Architecture::Cnn {
                dim,
                widths,
                filters,
                classes,
            } => {
                widths.iter().map(|w| dense_len(w * dim, *filters)).sum::<usize>()
                    + dense_len(widths.len() * filters, *classes)
            }
            Architecture::BiLstm { dim, hidden, classes } => {
                2 * lstm_len(*dim, *hidden) + dense_len(2 * hidden, *classes)
            }
            Architecture::Adapter { dim, classes } => dense_len(*dim, *dim) + dense_len(*dim, *classes),
        }
    }

    pub fn init(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let mut p = Vec::with_capacity(self.n_params());
        let mut uniform = |p: &mut Vec<f64>, n: usize, bound: f64| {
            p.extend((0..n).map(|_| rng.gen_range(-bound..bound)));
        };
        match self {
            Architecture::Mlp { input, hidden, classes } => {
                let mut prev = *input;
                for &h in hidden {
                    uniform(&mut p, prev * h, (6.0 / prev as f64).sqrt());
                    p.extend(std::iter::repeat_n(0.0, h));
                    prev = h;
                }
                uniform(&mut p, prev * classes, (6.0 / (prev + classes) as f64).sqrt());
                p.extend(std::iter::repeat_n(0.0, *classes));
            }
            Architecture::Cnn {
                dim,
                widths,
                filters,
                classes,
            } => {
                for w in widths {
                    uniform(&mut p, w * dim * filters, (6.0 / (w * dim) as f64).sqrt());
                    p.extend(std::iter::repeat_n(0.0, *filters));
                }
                let f = widths.len() * filters;
                uniform(&mut p, f * classes, (6.0 / (f + classes) as f64).sqrt());
                p.extend(std::iter::repeat_n(0.0, *classes));
            }
            Architecture::BiLstm { dim, hidden, classes } => {
                let bound = 1.0 / (*hidden as f64).sqrt();
                for _ in 0..2 {
                    uniform(&mut p, (dim + hidden) * 4 * hidden, bound);
                    // Gate order i, f, g, o; the forget gate starts open.
                    for gate in 0..4 {
                        let v = if gate == 1 { 1.0 } else { 0.0 };
                        p.extend(std::iter::repeat_n(v, *hidden));
                    }
                }
                let f = 2 * hidden;
                uniform(&mut p, f * classes, (6.0 / (f + classes) as f64).sqrt());
                p.extend(std::iter::repeat_n(0.0, *classes));
            }
            Architecture::Adapter { dim, classes } => {
                for j in 0..*dim {
                    for k in 0..*dim {
                        p.push(if j == k { 1.0 } else { 0.0 });
                    }
                }
                p.extend(std::iter::repeat_n(0.0, *dim));
                p.extend(std::iter::repeat_n(0.0, dim * classes + classes));
            }
        }
        debug_assert_eq!(p.len(), self.n_params());
        p
    }

    /// Logits for sample `i`. With `backprop = Some((dlogits_fn, grads))` the
    /// gradient of the loss is accumulated into `grads`.
    pub(crate) fn run(
        &self,
        params: &[f64],
        input: NetInput<'_>,
        i: usize,
        backprop: Option<(&dyn Fn(&[f64]) -> Vec<f64>, &mut [f64])>,
    ) -> Vec<f64> {
        match self {
            Architecture::Mlp {
                input: d,
                hidden,
                classes,
            } => mlp(params, *d, hidden, *classes, input.row(i), backprop),
            Architecture::Cnn {
                dim,
                widths,
                filters,
                classes,
            } => cnn(params, *dim, widths, *filters, *classes, input.tokens(i), backprop),
            Architecture::BiLstm { dim, hidden, classes } => {
                bilstm(params, *dim, *hidden, *classes, input.tokens(i), backprop)
            }
            Architecture::Adapter { dim, classes } => adapter(params, *dim, *classes, input.tokens(i), backprop),
        }
    }
}

fn mlp(
    params: &[f64],
    d: usize,
    hidden: &[usize],
    classes: usize,
    x: Row<'_>,
    backprop: Option<(&dyn Fn(&[f64]) -> Vec<f64>, &mut [f64])>,
) -> Vec<f64> {
    // Activations after ReLU, one vector per hidden layer.
    let mut acts: Vec<Vec<f64>> = Vec::with_capacity(hidden.len());
    let mut offset = 0;
    let mut prev = d;
    for (l, &h) in hidden.iter().enumerate() {
        let layer = &params[offset..offset + dense_len(prev, h)];
        let mut z = layer[prev * h..].to_vec();
        if l == 0 {
            for (j, xj) in x.entries() {
                if xj != 0.0 {
                    for (o, wv) in z.iter_mut().zip(&layer[j * h..(j + 1) * h]) {
                        *o += xj * wv;
                    }
                }
            }
        } else {
            dense_forward(layer, prev, h, &acts[l - 1], &mut z);
        }
        z.iter_mut().for_each(|v| *v = v.max(0.0));
        acts.push(z);
        offset += dense_len(prev, h);
        prev = h;
    }
    let head = offset;
    let mut logits = vec![0.0; classes];
    match acts.last() {
        Some(a) => dense_forward(&params[head..], prev, classes, a, &mut logits),
        None => {
            let layer = &params[head..];
            logits.copy_from_slice(&layer[d * classes..d * classes + classes]);
            for (j, xj) in x.entries() {
                for (o, wv) in logits.iter_mut().zip(&layer[j * classes..(j + 1) * classes]) {
                    *o += xj * wv;
                }
            }
        }
    }
    let Some((dlogits_fn, grads)) = backprop else {
        return logits;
    };
    let dlogits = dlogits_fn(&logits);
    if hidden.is_empty() {
        let g = &mut grads[head..];
        for (gb, dv) in g[d * classes..d * classes + classes].iter_mut().zip(&dlogits) {
            *gb += dv;
        }
        for (j, xj) in x.entries() {
            for (gw, dv) in g[j * classes..(j + 1) * classes].iter_mut().zip(&dlogits) {
                *gw += xj * dv;
            }
        }
        return logits;
    }
    let mut dh = vec![0.0; prev];
    dense_backward(
        &params[head..],
        &mut grads[head..],
        prev,
        classes,
        acts.last().unwrap(),
        &dlogits,
        Some(&mut dh),
    );
    let mut offsets = Vec::with_capacity(hidden.len());
    let mut o = 0;
    let mut p_in = d;
    for &h in hidden {
        offsets.push((o, p_in));
        o += dense_len(p_in, h);
        p_in = h;
    }
    for l in (0..hidden.len()).rev() {
        let h = hidden[l];
        let (off, inp) = offsets[l];
        let dz: Vec<f64> = dh
            .iter()
            .zip(&acts[l])
            .map(|(g, a)| if *a > 0.0 { *g } else { 0.0 })
            .collect();
        if l == 0 {
            let g = &mut grads[off..off + dense_len(inp, h)];
            for (gb, dv) in g[inp * h..].iter_mut().zip(&dz) {
                *gb += dv;
            }
            for (j, xj) in x.entries() {
                if xj != 0.0 {
                    for (gw, dv) in g[j * h..(j + 1) * h].iter_mut().zip(&dz) {
                        *gw += xj * dv;
                    }
                }
            }
        } else {
            let mut dprev = vec![0.0; inp];
            dense_backward(
                &params[off..],
                &mut grads[off..],
                inp,
                h,
                &acts[l - 1],
                &dz,
                Some(&mut dprev),
            );
            dh = dprev;
        }
    }
    logits
}

fn cnn(
    params: &[f64],
    dim: usize,
    widths: &[usize],
    filters: usize,
    classes: usize,
    tokens: &[f64],
    backprop: Option<(&dyn Fn(&[f64]) -> Vec<f64>, &mut [f64])>,
) -> Vec<f64> {
    let max_w = widths.iter().copied().max().unwrap_or(1);
    let len = (tokens.len() / dim).max(max_w);
    let mut seq = tokens.to_vec();
    seq.resize(len * dim, 0.0);
    let mut pooled = vec![0.0; widths.len() * filters];
    // Per width: position of each filter's maximum and its pre-activation.
    let mut arg: Vec<Vec<(usize, f64)>> = Vec::with_capacity(widths.len());
    let mut offset = 0;
    let mut z = vec![0.0; filters];
    for (wi, &w) in widths.iter().enumerate() {
        let layer = &params[offset..offset + dense_len(w * dim, filters)];
        let mut best = vec![(0usize, f64::NEG_INFINITY); filters];
        for t in 0..=len - w {
            dense_forward(layer, w * dim, filters, &seq[t * dim..(t + w) * dim], &mut z);
            for (f, &v) in z.iter().enumerate() {
                if v > best[f].1 {
                    best[f] = (t, v);
                }
            }
        }
        for (f, &(_, v)) in best.iter().enumerate() {
            pooled[wi * filters + f] = v.max(0.0);
        }
        arg.push(best);
        offset += dense_len(w * dim, filters);
    }
    let head = offset;
    let feat = widths.len() * filters;
    let mut logits = vec![0.0; classes];
    dense_forward(&params[head..], feat, classes, &pooled, &mut logits);
    let Some((dlogits_fn, grads)) = backprop else {
        return logits;
    };
    let dlogits = dlogits_fn(&logits);
    let mut dpooled = vec![0.0; feat];
    dense_backward(
        &params[head..],
        &mut grads[head..],
        feat,
        classes,
        &pooled,
        &dlogits,
        Some(&mut dpooled),
    );
    let mut offset = 0;
    for (wi, &w) in widths.iter().enumerate() {
        let n = dense_len(w * dim, filters);
        for t in 0..=len - w {
            let mut dz = vec![0.0; filters];
            let mut any = false;
            for f in 0..filters {
                let (pos, v) = arg[wi][f];
                if pos == t && v > 0.0 {
                    dz[f] = dpooled[wi * filters + f];
                    any = true;
                }
            }
            if any {
                dense_backward(
                    &params[offset..offset + n],
                    &mut grads[offset..offset + n],
                    w * dim,
                    filters,
                    &seq[t * dim..(t + w) * dim],
                    &dz,
                    None,
                );
            }
        }
        offset += n;
    }
    logits
}

fn lstm_len(dim: usize, hidden: usize) -> usize {
    (dim + hidden) * 4 * hidden + 4 * hidden
}

struct LstmStep {
    /// Gate activations i, f, g, o (each `hidden` long).
    gates: Vec<f64>,
    c: Vec<f64>,
    h: Vec<f64>,
}

/// Runs one direction; `order` lists token positions in processing order.
fn lstm_forward(params: &[f64], dim: usize, hidden: usize, tokens: &[f64], order: &[usize]) -> Vec<LstmStep> {
    let input = dim + hidden;
    let h4 = 4 * hidden;
    let mut steps: Vec<LstmStep> = Vec::with_capacity(order.len());
    let mut xh = vec![0.0; input];
    let mut z = vec![0.0; h4];
    for &t in order {
        xh[..dim].copy_from_slice(&tokens[t * dim..(t + 1) * dim]);
        match steps.last() {
            Some(prev) => xh[dim..].copy_from_slice(&prev.h),
            None => xh[dim..].iter_mut().for_each(|v| *v = 0.0),
        }
        dense_forward(params, input, h4, &xh, &mut z);
        let mut gates = z.clone();
        for k in 0..hidden {
            gates[k] = sigmoid(z[k]);
            gates[hidden + k] = sigmoid(z[hidden + k]);
            gates[2 * hidden + k] = z[2 * hidden + k].tanh();
            gates[3 * hidden + k] = sigmoid(z[3 * hidden + k]);
        }
        let mut c = vec![0.0; hidden];
        let mut h = vec![0.0; hidden];
        for k in 0..hidden {
            let c_prev = steps.last().map_or(0.0, |s| s.c[k]);
            c[k] = gates[hidden + k] * c_prev + gates[k] * gates[2 * hidden + k];
            h[k] = gates[3 * hidden + k] * c[k].tanh();
        }
        steps.push(LstmStep { gates, c, h });
    }
    steps
}

#[allow(clippy::too_many_arguments)]
fn lstm_backward(
    params: &[f64],
    grads: &mut [f64],
    dim: usize,
    hidden: usize,
    tokens: &[f64],
    order: &[usize],
    steps: &[LstmStep],
    dh_final: &[f64],
) {
    let input = dim + hidden;
    let h4 = 4 * hidden;
    let mut dh = dh_final.to_vec();
    let mut dc = vec![0.0; hidden];
    let mut xh = vec![0.0; input];
    let mut dz = vec![0.0; h4];
    for s in (0..steps.len()).rev() {
        let step = &steps[s];
        let g = &step.gates;
        for k in 0..hidden {
            let (ig, fg, gg, og) = (g[k], g[hidden + k], g[2 * hidden + k], g[3 * hidden + k]);
            let tc = step.c[k].tanh();
            let c_prev = if s > 0 { steps[s - 1].c[k] } else { 0.0 };
            let dct = dc[k] + dh[k] * og * (1.0 - tc * tc);
            dz[k] = dct * gg * ig * (1.0 - ig);
            dz[hidden + k] = dct * c_prev * fg * (1.0 - fg);
            dz[2 * hidden + k] = dct * ig * (1.0 - gg * gg);
            dz[3 * hidden + k] = dh[k] * tc * og * (1.0 - og);
            dc[k] = dct * fg;
        }
        let t = order[s];
        xh[..dim].copy_from_slice(&tokens[t * dim..(t + 1) * dim]);
        if s > 0 {
            xh[dim..].copy_from_slice(&steps[s - 1].h);
        } else {
            xh[dim..].iter_mut().for_each(|v| *v = 0.0);
        }
        let mut dxh = vec![0.0; input];
        dense_backward(params, grads, input, h4, &xh, &dz, Some(&mut dxh));
        dh.copy_from_slice(&dxh[dim..]);
    }
}

fn bilstm(
    params: &[f64],
    dim: usize,
    hidden: usize,
    classes: usize,
    tokens: &[f64],
    backprop: Option<(&dyn Fn(&[f64]) -> Vec<f64>, &mut [f64])>,
) -> Vec<f64> {
    let len = tokens.len() / dim;
    let per_dir = lstm_len(dim, hidden);
    let forward_order: Vec<usize> = (0..len).collect();
    let backward_order: Vec<usize> = (0..len).rev().collect();
    let fwd = lstm_forward(&params[..per_dir], dim, hidden, tokens, &forward_order);
    let bwd = lstm_forward(&params[per_dir..2 * per_dir], dim, hidden, tokens, &backward_order);
    let mut feat = vec![0.0; 2 * hidden];
    if let Some(s) = fwd.last() {
        feat[..hidden].copy_from_slice(&s.h);
    }
    if let Some(s) = bwd.last() {
        feat[hidden..].copy_from_slice(&s.h);
    }
    let head = 2 * per_dir;
    let mut logits = vec![0.0; classes];
    dense_forward(&params[head..], 2 * hidden, classes, &feat, &mut logits);
    let Some((dlogits_fn, grads)) = backprop else {
        return logits;
    };
    let dlogits = dlogits_fn(&logits);
    let mut dfeat = vec![0.0; 2 * hidden];
    dense_backward(
        &params[head..],
        &mut grads[head..],
        2 * hidden,
        classes,
        &feat,
        &dlogits,
        Some(&mut dfeat),
    );
    let (gf, rest) = grads.split_at_mut(per_dir);
    let gb = &mut rest[..per_dir];
    lstm_backward(
        &params[..per_dir],
        gf,
        dim,
        hidden,
        tokens,
        &forward_order,
        &fwd,
        &dfeat[..hidden],
    );
    lstm_backward(
        &params[per_dir..2 * per_dir],
        gb,
        dim,
        hidden,
        tokens,
        &backward_order,
        &bwd,
        &dfeat[hidden..],
    );
    logits
}

fn adapter(
    params: &[f64],
    dim: usize,
    classes: usize,
    tokens: &[f64],
    backprop: Option<(&dyn Fn(&[f64]) -> Vec<f64>, &mut [f64])>,
) -> Vec<f64> {
    let len = tokens.len() / dim;
    let a_len = dense_len(dim, dim);
    let mut hs: Vec<Vec<f64>> = Vec::with_capacity(len);
    let mut pooled = vec![0.0; dim];
    for t in 0..len {
        let mut u = vec![0.0; dim];
        dense_forward(&params[..a_len], dim, dim, &tokens[t * dim..(t + 1) * dim], &mut u);
        u.iter_mut().for_each(|v| *v = v.tanh());
        for (p, v) in pooled.iter_mut().zip(&u) {
            *p += v / len as f64;
        }
        hs.push(u);
    }
    let mut logits = vec![0.0; classes];
    dense_forward(&params[a_len..], dim, classes, &pooled, &mut logits);
    let Some((dlogits_fn, grads)) = backprop else {
        return logits;
    };
    let dlogits = dlogits_fn(&logits);
    let mut dpooled = vec![0.0; dim];
    dense_backward(
        &params[a_len..],
        &mut grads[a_len..],
        dim,
        classes,
        &pooled,
        &dlogits,
        Some(&mut dpooled),
    );
    for (t, h) in hs.iter().enumerate() {
        let du: Vec<f64> = h
            .iter()
            .zip(&dpooled)
            .map(|(hv, dp)| dp / len as f64 * (1.0 - hv * hv))
            .collect();
        dense_backward(
            &params[..a_len],
            &mut grads[..a_len],
            dim,
            dim,
            &tokens[t * dim..(t + 1) * dim],
            &du,
            None,
        );
    }
    logits
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub patience: usize,
    pub weight_decay: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Network {
    pub arch: Architecture,
    pub params: Vec<f64>,
}

impl Network {
    pub(crate) fn scores(&self, input: NetInput<'_>, i: usize) -> Vec<f64> {
        let mut z = self.arch.run(&self.params, input, i, None);
        softmax_in_place(&mut z);
        z
    }
}

pub(crate) struct Trained {
    pub network: Network,
    pub epochs_run: usize,
}

/// Inverse-frequency weights `n / (k * n_c)`; absent classes get weight 0.
pub(crate) fn class_weights(y: &[usize], k: usize) -> Vec<f64> {
    let mut counts = vec![0usize; k];
    for &c in y {
        counts[c] += 1;
    }
    counts
        .iter()
        .map(|&c| {
            if c == 0 {
                0.0
            } else {
                y.len() as f64 / (k as f64 * c as f64)
            }
        })
        .collect()
}

fn weighted_loss(net: &Network, input: NetInput<'_>, y: &[usize], weights: &[f64]) -> f64 {
    let mut total = 0.0;
    let mut norm = 0.0;
    for (i, &c) in y.iter().enumerate() {
        let mut z = net.arch.run(&net.params, input, i, None);
        log_softmax_in_place(&mut z);
        total -= weights[c] * z[c];
        norm += weights[c];
    }
    if norm > 0.0 {
        total / norm
    } else {
        0.0
    }
}

/// Mini-batch AdamW on class-weighted cross-entropy. With a validation set,
/// training stops after `patience` epochs without improvement in validation
/// loss and the best parameters are kept.
pub(crate) fn train_network(
    arch: Architecture,
    input: NetInput<'_>,
    y: &[usize],
    config: TrainConfig,
    validation: Option<(NetInput<'_>, &[usize])>,
    seed: u64,
) -> Trained {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = arch.classes();
    let weights = class_weights(y, k);
    let mut net = Network {
        params: arch.init(&mut rng),
        arch,
    };
    let n_params = net.params.len();
    let mut grads = vec![0.0; n_params];
    let mut m = vec![0.0; n_params];
    let mut v = vec![0.0; n_params];
    let (beta1, beta2, eps): (f64, f64, f64) = (0.9, 0.999, 1e-8);
    let mut step = 0i32;
    let mut order: Vec<usize> = (0..y.len()).collect();
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut stale = 0;
    let mut epochs_run = 0;
    for _ in 0..config.epochs {
        epochs_run += 1;
        order.shuffle(&mut rng);
        for batch in order.chunks(config.batch_size) {
            grads.iter_mut().for_each(|g| *g = 0.0);
            let norm: f64 = batch.iter().map(|&i| weights[y[i]]).sum();
            if norm <= 0.0 {
                continue;
            }
            for &i in batch {
                let scale = weights[y[i]] / norm;
                let target = y[i];
                let dlogits = move |logits: &[f64]| -> Vec<f64> {
                    let mut p = logits.to_vec();
                    softmax_in_place(&mut p);
                    p[target] -= 1.0;
                    p.iter_mut().for_each(|v| *v *= scale);
                    p
                };
                net.arch.run(&net.params, input, i, Some((&dlogits, &mut grads)));
            }
            step += 1;
            let bc1 = 1.0 - beta1.powi(step);
            let bc2 = 1.0 - beta2.powi(step);
            let lr = config.learning_rate;
            for j in 0..n_params {
                let g = grads[j];
                m[j] = beta1 * m[j] + (1.0 - beta1) * g;
                v[j] = beta2 * v[j] + (1.0 - beta2) * g * g;
                let update = (m[j] / bc1) / ((v[j] / bc2).sqrt() + eps);
                net.params[j] -= lr * (update + config.weight_decay * net.params[j]);
            }
        }
        if let Some((val_input, val_y)) = validation {
            let loss = weighted_loss(&net, val_input, val_y, &weights);
            match &best {
                Some((b, _)) if loss >= *b => {
                    stale += 1;
                    if stale >= config.patience {
                        break;
                    }
                }
                _ => {
                    best = Some((loss, net.params.clone()));
                    stale = 0;
                }
            }
        }
    }
    if let Some((_, params)) = best {
        net.params = params;
    }
    Trained {
        network: net,
        epochs_run,
    }
}
