//! Linear SVM trained by stochastic subgradient descent on the primal.
//!
//! Minimizes `0.5 |w|^2 + C sum_i max(0, 1 - y_i (w.x_i + b))`, written per
//! sample as `lambda/2 |w|^2 + hinge_i` with `lambda = 1 / (C n)`. Steps are
//! `1 / (lambda (t + t0))` with `t0 = 1 / lambda` so the first step is about 1
//! regardless of `C`. The bias is not regularized. The returned model is the
//! average of the iterates from the second half of training.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use super::{check_training_set, require_both_classes, FeatureMatrix, LinearHyper, LinearModel};
use crate::corpus::Label;
use crate::error::{Error, Result};

pub fn train_linear_svm(
    features: &FeatureMatrix,
    labels: &[Label],
    c: f64,
    epochs: usize,
    seed: u64,
) -> Result<LinearModel> {
    check_training_set(features, labels)?;
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::invalid(format!("C must be positive, got {c}")));
    }
    if epochs == 0 {
        return Err(Error::invalid("epochs must be >= 1"));
    }
    require_both_classes(labels)?;

    let n = features.rows();
    let dim = features.cols();
    let lambda = 1.0 / (c * n as f64);
    let t0 = 1.0 / lambda;
    let total = epochs * n;
    let average_from = total / 2;

    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..n).collect();
    let mut w = vec![0.0; dim];
    let mut b = 0.0;
    let mut w_sum = vec![0.0; dim];
    let mut b_sum = 0.0;
    let mut averaged = 0usize;

    let mut t = 0usize;
    for _ in 0..epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            t += 1;
            let eta = 1.0 / (lambda * (t as f64 + t0));
            let x = features.row(i);
            let y = labels[i].sign();
            let margin = y * (dot(&w, x) + b);
            let shrink = 1.0 - eta * lambda;
            if margin < 1.0 {
                let step = eta * y;
                w.iter_mut().zip(x).for_each(|(wj, xj)| *wj = shrink * *wj + step * xj);
                b += step;
            } else {
                w.iter_mut().for_each(|wj| *wj *= shrink);
            }
            if t > average_from {
                w_sum.iter_mut().zip(&w).for_each(|(s, wj)| *s += wj);
                b_sum += b;
                averaged += 1;
            }
        }
    }

    let inv = 1.0 / averaged as f64;
    let weights: Vec<f64> = w_sum.into_iter().map(|s| s * inv).collect();
    let bias = b_sum * inv;
    if weights.iter().any(|v| !v.is_finite()) || !bias.is_finite() {
        return Err(Error::Numeric("SVM weights diverged".into()));
    }
    Ok(LinearModel {
        weights,
        bias,
        hyper: LinearHyper::Svm { c, epochs, seed },
        rks: None,
    })
}

/// Primal objective `0.5 |w|^2 + C sum_i hinge_i`.
pub fn svm_objective(
    features: &FeatureMatrix,
    labels: &[Label],
    weights: &[f64],
    bias: f64,
    c: f64,
) -> f64 {
    let hinge: f64 = features
        .row_iter()
        .zip(labels)
        .map(|(x, l)| (1.0 - l.sign() * (dot(weights, x) + bias)).max(0.0))
        .sum();
    0.5 * dot(weights, weights) + c * hinge
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
