//! Linear classifiers (regularized least squares, linear SVM, logistic
//! regression) and Gaussian naive Bayes over dense feature matrices.
//!
//! Labels are encoded OFF = +1, NOT = -1 throughout. A model may carry a
//! random kitchen sink map; prediction then lifts raw features through the
//! map before scoring.

mod gnb;
mod io;
mod logreg;
mod rlsc;
mod svm;

pub use gnb::{train_gnb, GnbModel};
pub use io::{load_model, save_model, MODEL_MAGIC, MODEL_VERSION};
pub use logreg::{logistic_gradient, logistic_objective, train_logreg};
pub use rlsc::{ridge_solve, train_rlsc, CG_TOLERANCE, DIRECT_SOLVE_MAX_COLS};
pub use svm::{svm_objective, train_linear_svm};

use crate::corpus::Label;
use crate::error::{Error, Result};
use crate::rks::RksMap;

/// Dense row-major feature matrix with one tweet id per row.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
    ids: Vec<String>,
}

impl FeatureMatrix {
    pub fn new(cols: usize) -> Self {
        FeatureMatrix {
            rows: 0,
            cols,
            values: Vec::new(),
            ids: Vec::new(),
        }
    }

    /// Builds a matrix from rows; ids default to row indices.
    pub fn from_rows<V: AsRef<[f64]>>(cols: usize, rows: &[V]) -> Result<Self> {
        let mut m = FeatureMatrix::new(cols);
        for (i, r) in rows.iter().enumerate() {
            m.push_row(i.to_string(), r.as_ref())?;
        }
        Ok(m)
    }

    pub fn push_row(&mut self, id: impl Into<String>, row: &[f64]) -> Result<()> {
        if row.len() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                got: row.len(),
            });
        }
        if let Some(v) = row.iter().find(|v| !v.is_finite()) {
            return Err(Error::Numeric(format!("non-finite feature value {v}")));
        }
        self.values.extend_from_slice(row);
        self.ids.push(id.into());
        self.rows += 1;
        Ok(())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_iter(&self) -> impl Iterator<Item = &[f64]> {
        (0..self.rows).map(move |i| self.row(i))
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    /// Applies a feature map to every row.
    pub fn lift(&self, map: &RksMap) -> Result<FeatureMatrix> {
        if self.cols != map.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: map.input_dim(),
                got: self.cols,
            });
        }
        let out_dim = map.output_dim();
        let mut values = vec![0.0; self.rows * out_dim];
        for (i, chunk) in values.chunks_mut(out_dim).enumerate() {
            map.transform_into(self.row(i), chunk)?;
        }
        Ok(FeatureMatrix {
            rows: self.rows,
            cols: out_dim,
            values,
            ids: self.ids.clone(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LinearHyper {
    Rlsc { lambda: f64 },
    Svm { c: f64, epochs: usize, seed: u64 },
    Logreg { lr: f64, epochs: usize, l2: f64, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinearKind {
    Rlsc,
    SvmLinear,
    Logreg,
}

impl LinearHyper {
    pub fn kind(&self) -> LinearKind {
        match self {
            LinearHyper::Rlsc { .. } => LinearKind::Rlsc,
            LinearHyper::Svm { .. } => LinearKind::SvmLinear,
            LinearHyper::Logreg { .. } => LinearKind::Logreg,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub hyper: LinearHyper,
    pub rks: Option<RksMap>,
}

impl LinearModel {
    pub fn kind(&self) -> LinearKind {
        self.hyper.kind()
    }

    pub fn decision(&self, x: &[f64]) -> f64 {
        self.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + self.bias
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Linear(LinearModel),
    Gnb(GnbModel),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub label: Label,
    pub score: f64,
}

impl Model {
    pub fn rks(&self) -> Option<&RksMap> {
        match self {
            Model::Linear(m) => m.rks.as_ref(),
            Model::Gnb(m) => m.rks.as_ref(),
        }
    }

    pub fn with_rks(mut self, map: Option<RksMap>) -> Self {
        match &mut self {
            Model::Linear(m) => m.rks = map,
            Model::Gnb(m) => m.rks = map,
        }
        self
    }

    /// Dimension of the features the classifier itself scores.
    fn scored_dim(&self) -> usize {
        match self {
            Model::Linear(m) => m.weights.len(),
            Model::Gnb(m) => m.dim(),
        }
    }

    /// Dimension of the raw features `predict` expects.
    pub fn input_dim(&self) -> usize {
        self.rks()
            .map_or_else(|| self.scored_dim(), RksMap::input_dim)
    }

    /// Positive scores mean OFF.
    pub fn score(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim(),
                got: x.len(),
            });
        }
        let lifted;
        let x = match self.rks() {
            Some(map) => {
                lifted = map.transform(x)?;
                &lifted[..]
            }
            None => x,
        };
        Ok(match self {
            Model::Linear(m) => m.decision(x),
            Model::Gnb(m) => m.log_odds(x),
        })
    }

    pub fn predict(&self, features: &FeatureMatrix) -> Result<Vec<Prediction>> {
        if features.rows() > 0 && features.cols() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim(),
                got: features.cols(),
            });
        }
        features
            .row_iter()
            .map(|x| {
                let score = self.score(x)?;
                Ok(Prediction {
                    label: Label::from_score(score),
                    score,
                })
            })
            .collect()
    }
}

/// Which classifier to train, with its hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClassifierSpec {
    Rlsc { lambda: f64 },
    Svm { c: f64, epochs: usize, seed: u64 },
    Logreg { lr: f64, epochs: usize, l2: f64, seed: u64 },
    Gnb { var_floor: f64 },
}

impl ClassifierSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ClassifierSpec::Rlsc { .. } => "rlsc",
            ClassifierSpec::Svm { .. } => "svm",
            ClassifierSpec::Logreg { .. } => "logreg",
            ClassifierSpec::Gnb { .. } => "gnb",
        }
    }

    pub fn train(&self, features: &FeatureMatrix, labels: &[Label]) -> Result<Model> {
        Ok(match *self {
            ClassifierSpec::Rlsc { lambda } => Model::Linear(train_rlsc(features, labels, lambda)?),
            ClassifierSpec::Svm { c, epochs, seed } => {
                Model::Linear(train_linear_svm(features, labels, c, epochs, seed)?)
            }
            ClassifierSpec::Logreg {
                lr,
                epochs,
                l2,
                seed,
            } => Model::Linear(train_logreg(features, labels, lr, epochs, l2, seed)?),
            ClassifierSpec::Gnb { var_floor } => Model::Gnb(train_gnb(features, labels, var_floor)?),
        })
    }

    /// Trains on `map`-lifted features and embeds the map in the model.
    pub fn train_lifted(
        &self,
        features: &FeatureMatrix,
        labels: &[Label],
        map: Option<RksMap>,
    ) -> Result<Model> {
        match map {
            Some(map) => {
                let lifted = features.lift(&map)?;
                Ok(self.train(&lifted, labels)?.with_rks(Some(map)))
            }
            None => self.train(features, labels),
        }
    }
}

pub(crate) fn check_training_set(features: &FeatureMatrix, labels: &[Label]) -> Result<()> {
    if features.rows() == 0 {
        return Err(Error::DegenerateTrainingSet("no training rows".into()));
    }
    if features.rows() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: features.rows(),
            got: labels.len(),
        });
    }
    Ok(())
}

pub(crate) fn require_both_classes(labels: &[Label]) -> Result<()> {
    let off = labels.iter().filter(|l| **l == Label::Off).count();
    if off == 0 || off == labels.len() {
        return Err(Error::DegenerateTrainingSet(
            "training labels contain a single class".into(),
        ));
    }
    Ok(())
}
