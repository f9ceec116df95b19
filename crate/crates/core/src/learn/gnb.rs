//! Gaussian naive Bayes with diagonal per-class covariance.

use std::f64::consts::PI;

use super::{check_training_set, require_both_classes, FeatureMatrix};
use crate::corpus::Label;
use crate::error::{Error, Result};
use crate::rks::RksMap;

/// Per-class statistics; index 0 is OFF, index 1 is NOT.
#[derive(Debug, Clone, PartialEq)]
pub struct GnbModel {
    pub priors: [f64; 2],
    pub means: [Vec<f64>; 2],
    pub variances: [Vec<f64>; 2],
    pub var_floor: f64,
    pub rks: Option<RksMap>,
}

fn class_index(label: Label) -> usize {
    match label {
        Label::Off => 0,
        Label::Not => 1,
    }
}

impl GnbModel {
    pub fn dim(&self) -> usize {
        self.means[0].len()
    }

    /// `log p(class) + log p(x | class)` for OFF and NOT.
    pub fn log_joint(&self, x: &[f64]) -> [f64; 2] {
        let mut out = [0.0; 2];
        for (c, slot) in out.iter_mut().enumerate() {
            let ll: f64 = x
                .iter()
                .zip(&self.means[c])
                .zip(&self.variances[c])
                .map(|((v, mu), var)| -0.5 * (2.0 * PI * var).ln() - (v - mu).powi(2) / (2.0 * var))
                .sum();
            *slot = self.priors[c].ln() + ll;
        }
        out
    }

    /// `log P(OFF | x) - log P(NOT | x)`.
    pub fn log_odds(&self, x: &[f64]) -> f64 {
        let [off, not] = self.log_joint(x);
        off - not
    }

    /// `P(OFF | x)`.
    pub fn posterior_off(&self, x: &[f64]) -> f64 {
        1.0 / (1.0 + (-self.log_odds(x)).exp())
    }
}

pub fn train_gnb(features: &FeatureMatrix, labels: &[Label], var_floor: f64) -> Result<GnbModel> {
    check_training_set(features, labels)?;
    if !(var_floor > 0.0 && var_floor.is_finite()) {
        return Err(Error::invalid(format!("var_floor must be positive, got {var_floor}")));
    }
    require_both_classes(labels)?;

    let d = features.cols();
    let mut counts = [0usize; 2];
    let mut means = [vec![0.0; d], vec![0.0; d]];
    for (x, l) in features.row_iter().zip(labels) {
        let c = class_index(*l);
        counts[c] += 1;
        means[c].iter_mut().zip(x).for_each(|(m, v)| *m += v);
    }
    for c in 0..2 {
        let inv = 1.0 / counts[c] as f64;
        means[c].iter_mut().for_each(|m| *m *= inv);
    }
    let mut variances = [vec![0.0; d], vec![0.0; d]];
    for (x, l) in features.row_iter().zip(labels) {
        let c = class_index(*l);
        variances[c]
            .iter_mut()
            .zip(x.iter().zip(&means[c]))
            .for_each(|(s, (v, m))| *s += (v - m) * (v - m));
    }
    for c in 0..2 {
        let inv = 1.0 / counts[c] as f64;
        variances[c]
            .iter_mut()
            .for_each(|s| *s = (*s * inv).max(var_floor));
    }
    let n = labels.len() as f64;
    Ok(GnbModel {
        priors: [counts[0] as f64 / n, counts[1] as f64 / n],
        means,
        variances,
        var_floor,
        rks: None,
    })
}
