//! L2-regularized logistic regression by full-batch gradient descent.
//!
//! Parameters are `[w; b]` over features augmented with a constant 1, and
//! the loss is `mean_i log(1 + exp(-y_i [w; b].[x_i; 1])) + l2/2 |[w; b]|^2`.

use super::{check_training_set, require_both_classes, FeatureMatrix, LinearHyper, LinearModel};
use crate::corpus::Label;
use crate::error::{Error, Result};

/// Trains from zero weights. The step is `min(lr, 1/L)` where `L` bounds the
/// loss curvature, so large `l2` cannot make the iteration diverge. `seed`
/// is recorded only; full-batch descent draws no randomness.
pub fn train_logreg(
    features: &FeatureMatrix,
    labels: &[Label],
    lr: f64,
    epochs: usize,
    l2: f64,
    seed: u64,
) -> Result<LinearModel> {
    check_training_set(features, labels)?;
    if !(lr > 0.0 && lr.is_finite()) {
        return Err(Error::invalid(format!("learning rate must be positive, got {lr}")));
    }
    if !(l2 >= 0.0 && l2.is_finite()) {
        return Err(Error::invalid(format!("l2 must be non-negative, got {l2}")));
    }
    require_both_classes(labels)?;

    let n = features.rows() as f64;
    let mean_sq_norm = features
        .row_iter()
        .map(|x| x.iter().map(|v| v * v).sum::<f64>() + 1.0)
        .sum::<f64>()
        / n;
    let step = lr.min(1.0 / (0.25 * mean_sq_norm + l2));

    let mut params = vec![0.0; features.cols() + 1];
    for _ in 0..epochs {
        let grad = logistic_gradient(features, labels, &params, l2);
        params.iter_mut().zip(&grad).for_each(|(p, g)| *p -= step * g);
    }
    if params.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("logistic regression diverged".into()));
    }
    let bias = params.pop().expect("bias parameter");
    Ok(LinearModel {
        weights: params,
        bias,
        hyper: LinearHyper::Logreg {
            lr,
            epochs,
            l2,
            seed,
        },
        rks: None,
    })
}

fn margin(x: &[f64], params: &[f64], y: f64) -> f64 {
    let (w, b) = params.split_at(x.len());
    y * (w.iter().zip(x).map(|(a, v)| a * v).sum::<f64>() + b[0])
}

/// `log(1 + exp(-m))` without overflow.
fn softplus_neg(m: f64) -> f64 {
    if m > 0.0 {
        (-m).exp().ln_1p()
    } else {
        -m + m.exp().ln_1p()
    }
}

/// `1 / (1 + exp(m))`.
fn sigmoid_neg(m: f64) -> f64 {
    if m > 0.0 {
        let e = (-m).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + m.exp())
    }
}

/// Regularized mean logistic loss at `params = [w; b]`.
pub fn logistic_objective(
    features: &FeatureMatrix,
    labels: &[Label],
    params: &[f64],
    l2: f64,
) -> f64 {
    let n = features.rows() as f64;
    let loss: f64 = features
        .row_iter()
        .zip(labels)
        .map(|(x, l)| softplus_neg(margin(x, params, l.sign())))
        .sum();
    loss / n + 0.5 * l2 * params.iter().map(|p| p * p).sum::<f64>()
}

/// Analytic gradient of [`logistic_objective`].
pub fn logistic_gradient(
    features: &FeatureMatrix,
    labels: &[Label],
    params: &[f64],
    l2: f64,
) -> Vec<f64> {
    let n = features.rows() as f64;
    let d = features.cols();
    let mut grad = vec![0.0; d + 1];
    for (x, l) in features.row_iter().zip(labels) {
        let y = l.sign();
        let coef = -y * sigmoid_neg(margin(x, params, y)) / n;
        grad[..d].iter_mut().zip(x).for_each(|(g, v)| *g += coef * v);
        grad[d] += coef;
    }
    grad.iter_mut().zip(params).for_each(|(g, p)| *g += l2 * p);
    grad
}
