//! Multinomial naive Bayes, one-vs-rest linear SVM and multinomial logistic
//! regression over a (possibly sparse) feature matrix.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::math::{log_softmax_in_place, softmax_in_place};
use crate::features::FeatureMatrix;
use crate::{Error, Result};

/// Weights stored class-major: `weights[c * n_dims + j]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearScorer {
    pub n_classes: usize,
    pub n_dims: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl LinearScorer {
    fn zeros(n_classes: usize, n_dims: usize) -> Self {
        LinearScorer {
            n_classes,
            n_dims,
            weights: vec![0.0; n_classes * n_dims],
            bias: vec![0.0; n_classes],
        }
    }

    pub fn margins(&self, x: &FeatureMatrix, i: usize) -> Vec<f64> {
        let row = x.row(i);
        (0..self.n_classes)
            .map(|c| self.bias[c] + row.dot(&self.weights[c * self.n_dims..(c + 1) * self.n_dims]))
            .collect()
    }
}

/// Multinomial naive Bayes with additive smoothing `alpha`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NaiveBayes {
    /// Log class priors as bias, log feature likelihoods as weights.
    pub scorer: LinearScorer,
}

impl NaiveBayes {
    pub fn fit(x: &FeatureMatrix, y: &[usize], n_classes: usize, alpha: f64) -> Result<Self> {
        if x.stored_values().iter().any(|&v| v < 0.0) {
            return Err(Error::invalid("naive Bayes needs non-negative feature values"));
        }
        let d = x.n_dims();
        let mut counts = vec![0.0; n_classes * d];
        let mut class_n = vec![0usize; n_classes];
        for (i, &c) in y.iter().enumerate() {
            class_n[c] += 1;
            x.row(i).axpy(1.0, &mut counts[c * d..(c + 1) * d]);
        }
        let mut scorer = LinearScorer::zeros(n_classes, d);
        let n = y.len() as f64;
        for c in 0..n_classes {
            scorer.bias[c] = (class_n[c] as f64 / n).ln();
            let row = &counts[c * d..(c + 1) * d];
            let total: f64 = row.iter().sum::<f64>() + alpha * d as f64;
            for j in 0..d {
                scorer.weights[c * d + j] = ((row[j] + alpha) / total).ln();
            }
        }
        Ok(NaiveBayes { scorer })
    }

    /// Posterior class probabilities.
    pub fn scores(&self, x: &FeatureMatrix, i: usize) -> Vec<f64> {
        let mut s = self.scorer.margins(x, i);
        softmax_in_place(&mut s);
        s
    }
}

/// One-vs-rest L2-regularized squared-hinge SVM solved by dual coordinate
/// descent. The intercept is learned as the weight of a constant feature.
pub fn fit_svm(
    x: &FeatureMatrix,
    y: &[usize],
    n_classes: usize,
    c: f64,
    max_iter: usize,
    tol: f64,
    seed: u64,
) -> LinearScorer {
    let n = y.len();
    let d = x.n_dims();
    let mut scorer = LinearScorer::zeros(n_classes, d);
    let diag = 0.5 / c;
    let qii: Vec<f64> = (0..n).map(|i| x.row(i).squared_norm() + 1.0 + diag).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Binary problems need only one separator; its negation scores the other class.
    let classes: Vec<usize> = if n_classes == 2 {
        vec![1]
    } else {
        (0..n_classes).collect()
    };
    for &k in &classes {
        let mut w = vec![0.0; d];
        let mut b = 0.0;
        let mut alpha = vec![0.0; n];
        let sign: Vec<f64> = y.iter().map(|&yi| if yi == k { 1.0 } else { -1.0 }).collect();
        let mut order: Vec<usize> = (0..n).collect();
        for _ in 0..max_iter {
            order.shuffle(&mut rng);
            let mut pg_max = f64::NEG_INFINITY;
            let mut pg_min = f64::INFINITY;
            for &i in &order {
                let row = x.row(i);
                let g = sign[i] * (row.dot(&w) + b) - 1.0 + diag * alpha[i];
                let pg = if alpha[i] == 0.0 { g.min(0.0) } else { g };
                pg_max = pg_max.max(pg);
                pg_min = pg_min.min(pg);
                if pg.abs() > 1e-12 {
                    let old = alpha[i];
                    alpha[i] = (old - g / qii[i]).max(0.0);
                    let delta = (alpha[i] - old) * sign[i];
                    row.axpy(delta, &mut w);
                    b += delta;
                }
            }
            if pg_max - pg_min <= tol {
                break;
            }
        }
        scorer.weights[k * d..(k + 1) * d].copy_from_slice(&w);
        scorer.bias[k] = b;
        if n_classes == 2 {
            scorer.weights[..d].iter_mut().zip(&w).for_each(|(o, v)| *o = -v);
            scorer.bias[0] = -b;
        }
    }
    scorer
}

/// Multinomial logistic regression minimizing
/// `sum_i CE_i + ||W||^2 / (2c)` (intercepts unpenalized) with L-BFGS.
pub fn fit_logistic(
    x: &FeatureMatrix,
    y: &[usize],
    n_classes: usize,
    c: f64,
    max_iter: usize,
    tol: f64,
) -> LinearScorer {
    let d = x.n_dims();
    let k = n_classes;
    let n_w = k * d;
    let objective = |theta: &[f64], grad: &mut [f64]| logistic_objective(x, y, k, c, theta, grad);
    let theta = lbfgs(vec![0.0; n_w + k], objective, max_iter, tol);
    LinearScorer {
        n_classes: k,
        n_dims: d,
        weights: theta[..n_w].to_vec(),
        bias: theta[n_w..].to_vec(),
    }
}

/// Penalized negative log-likelihood and its gradient. `theta` holds the
/// class-major weights followed by the intercepts.
pub(crate) fn logistic_objective(
    x: &FeatureMatrix,
    y: &[usize],
    k: usize,
    c: f64,
    theta: &[f64],
    grad: &mut [f64],
) -> f64 {
    let d = x.n_dims();
    let n_w = k * d;
    grad.iter_mut().for_each(|g| *g = 0.0);
    let (w, b) = theta.split_at(n_w);
    let (gw, gb) = grad.split_at_mut(n_w);
    let mut loss = 0.0;
    let mut z = vec![0.0; k];
    for (i, &yi) in y.iter().enumerate() {
        let row = x.row(i);
        for cl in 0..k {
            z[cl] = b[cl] + row.dot(&w[cl * d..(cl + 1) * d]);
        }
        log_softmax_in_place(&mut z);
        loss -= z[yi];
        for cl in 0..k {
            let p = z[cl].exp() - if cl == yi { 1.0 } else { 0.0 };
            gb[cl] += p;
            row.axpy(p, &mut gw[cl * d..(cl + 1) * d]);
        }
    }
    let inv_c = 1.0 / c;
    for (g, wv) in gw.iter_mut().zip(w) {
        *g += inv_c * wv;
        loss += 0.5 * inv_c * wv * wv;
    }
    loss
}

pub fn logistic_scores(scorer: &LinearScorer, x: &FeatureMatrix, i: usize) -> Vec<f64> {
    let mut s = scorer.margins(x, i);
    softmax_in_place(&mut s);
    s
}

/// Limited-memory BFGS with Armijo backtracking. Stops when the largest
/// gradient component falls below `tol * max(1, |f|)` or after `max_iter`
/// iterations.
pub(crate) fn lbfgs<F>(mut x: Vec<f64>, mut f: F, max_iter: usize, tol: f64) -> Vec<f64>
where
    F: FnMut(&[f64], &mut [f64]) -> f64,
{
    const MEMORY: usize = 10;
    let n = x.len();
    let mut g = vec![0.0; n];
    let mut fx = f(&x, &mut g);
    let mut s_hist: Vec<Vec<f64>> = Vec::new();
    let mut y_hist: Vec<Vec<f64>> = Vec::new();
    let mut rho_hist: Vec<f64> = Vec::new();
    let mut x_new = vec![0.0; n];
    let mut g_new = vec![0.0; n];
    for _ in 0..max_iter {
        let gmax = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if gmax <= tol * fx.abs().max(1.0) {
            break;
        }
        // Two-loop recursion for the search direction.
        let mut q = g.clone();
        let mut alphas = vec![0.0; s_hist.len()];
        for j in (0..s_hist.len()).rev() {
            alphas[j] = rho_hist[j] * dot(&s_hist[j], &q);
            axpy(-alphas[j], &y_hist[j], &mut q);
        }
        if let (Some(s), Some(yv)) = (s_hist.last(), y_hist.last()) {
            let gamma = dot(s, yv) / dot(yv, yv);
            q.iter_mut().for_each(|v| *v *= gamma);
        } else {
            let scale = 1.0 / gmax.max(1.0);
            q.iter_mut().for_each(|v| *v *= scale);
        }
        for j in 0..s_hist.len() {
            let beta = rho_hist[j] * dot(&y_hist[j], &q);
            axpy(alphas[j] - beta, &s_hist[j], &mut q);
        }
        let mut dir: Vec<f64> = q.iter().map(|v| -v).collect();
        let mut slope = dot(&g, &dir);
        if slope >= 0.0 {
            // Not a descent direction: restart from steepest descent.
            s_hist.clear();
            y_hist.clear();
            rho_hist.clear();
            dir = g.iter().map(|v| -v / gmax.max(1.0)).collect();
            slope = dot(&g, &dir);
        }
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            for i in 0..n {
                x_new[i] = x[i] + step * dir[i];
            }
            let f_new = f(&x_new, &mut g_new);
            if f_new <= fx + 1e-4 * step * slope {
                let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
                let yv: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
                let sy = dot(&s, &yv);
                if sy > 1e-12 {
                    if s_hist.len() == MEMORY {
                        s_hist.remove(0);
                        y_hist.remove(0);
                        rho_hist.remove(0);
                    }
                    rho_hist.push(1.0 / sy);
                    s_hist.push(s);
                    y_hist.push(yv);
                }
                std::mem::swap(&mut x, &mut x_new);
                std::mem::swap(&mut g, &mut g_new);
                let converged = (fx - f_new).abs() <= 1e-12 * fx.abs().max(1.0);
                fx = f_new;
                accepted = true;
                if converged {
                    return x;
                }
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    x
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}
