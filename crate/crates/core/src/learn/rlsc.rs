//! Regularized least-squares classification.

use nalgebra::{DMatrix, DVector};

use super::{check_training_set, FeatureMatrix, LinearHyper, LinearModel};
use crate::corpus::Label;
use crate::error::{Error, Result};

/// Above this many columns the normal equations are solved matrix-free by
/// conjugate gradient instead of a dense factorization.
pub const DIRECT_SOLVE_MAX_COLS: usize = 4096;
/// Relative residual at which conjugate gradient stops.
pub const CG_TOLERANCE: f64 = 1e-10;

/// Solves `(F^T F + lambda I) w = F^T y`.
pub fn ridge_solve(features: &FeatureMatrix, targets: &[f64], lambda: f64) -> Result<Vec<f64>> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::invalid(format!("lambda must be positive, got {lambda}")));
    }
    if features.rows() == 0 {
        return Err(Error::DegenerateTrainingSet("no training rows".into()));
    }
    if targets.len() != features.rows() {
        return Err(Error::DimensionMismatch {
            expected: features.rows(),
            got: targets.len(),
        });
    }
    let a = DMatrix::from_row_slice(features.rows(), features.cols(), &features.values);
    let y = DVector::from_column_slice(targets);
    let rhs = a.tr_mul(&y);

    let w = if features.cols() <= DIRECT_SOLVE_MAX_COLS {
        let mut gram = a.tr_mul(&a);
        for i in 0..gram.nrows() {
            gram[(i, i)] += lambda;
        }
        match gram.clone().cholesky() {
            Some(chol) => chol.solve(&rhs),
            None => gram
                .lu()
                .solve(&rhs)
                .ok_or_else(|| Error::Numeric("singular normal equations".into()))?,
        }
    } else {
        conjugate_gradient(&a, &rhs, lambda)?
    };
    if w.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("non-finite ridge solution".into()));
    }
    Ok(w.as_slice().to_vec())
}

fn conjugate_gradient(a: &DMatrix<f64>, rhs: &DVector<f64>, lambda: f64) -> Result<DVector<f64>> {
    let apply = |v: &DVector<f64>| a.tr_mul(&(a * v)) + v * lambda;
    let rhs_norm = rhs.norm();
    let mut x = DVector::zeros(rhs.len());
    if rhs_norm == 0.0 {
        return Ok(x);
    }
    let mut r = rhs.clone();
    let mut p = r.clone();
    let mut rr = r.dot(&r);
    for _ in 0..10 * rhs.len().max(10) {
        let ap = apply(&p);
        let alpha = rr / p.dot(&ap);
        x.axpy(alpha, &p, 1.0);
        r.axpy(-alpha, &ap, 1.0);
        let rr_next = r.dot(&r);
        if rr_next.sqrt() <= CG_TOLERANCE * rhs_norm {
            return Ok(x);
        }
        p = &r + &p * (rr_next / rr);
        rr = rr_next;
    }
    Err(Error::Numeric("conjugate gradient did not converge".into()))
}

/// Ridge regression on +-1 targets; the bias is the coefficient of an
/// appended constant feature and is regularized like every other weight.
pub fn train_rlsc(features: &FeatureMatrix, labels: &[Label], lambda: f64) -> Result<LinearModel> {
    check_training_set(features, labels)?;
    let augmented = with_bias_column(features);
    let targets: Vec<f64> = labels.iter().map(|l| l.sign()).collect();
    let mut w = ridge_solve(&augmented, &targets, lambda)?;
    let bias = w.pop().expect("bias coefficient");
    Ok(LinearModel {
        weights: w,
        bias,
        hyper: LinearHyper::Rlsc { lambda },
        rks: None,
    })
}

pub(crate) fn with_bias_column(features: &FeatureMatrix) -> FeatureMatrix {
    let cols = features.cols() + 1;
    let mut values = Vec::with_capacity(features.rows() * cols);
    for row in features.row_iter() {
        values.extend_from_slice(row);
        values.push(1.0);
    }
    FeatureMatrix {
        rows: features.rows(),
        cols,
        values,
        ids: features.ids.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separable_pair() {
        let f = FeatureMatrix::from_rows(1, &[[-1.0], [1.0]]).unwrap();
        let m = train_rlsc(&f, &[Label::Not, Label::Off], 1e-6).unwrap();
        assert!(m.decision(&[-1.0]) < 0.0 && m.decision(&[1.0]) > 0.0);
    }

    #[test]
    fn orthonormal_columns_give_projection() {
        // columns are orthonormal: F^T F = I
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let f = FeatureMatrix::from_rows(2, &[[s, 0.0], [s, 0.0], [0.0, 1.0]]).unwrap();
        let y = [1.0, -1.0, 1.0];
        let w = ridge_solve(&f, &y, 1e-12).unwrap();
        let fty = [s - s, 1.0];
        for (a, b) in w.iter().zip(fty) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn conjugate_gradient_matches_direct() {
        let rows: Vec<Vec<f64>> = (0..30)
            .map(|i| (0..8).map(|j| ((i * 7 + j * 3) as f64).sin()).collect())
            .collect();
        let f = FeatureMatrix::from_rows(8, &rows).unwrap();
        let y: Vec<f64> = (0..30).map(|i| if i % 3 == 0 { 1.0 } else { -1.0 }).collect();
        let direct = ridge_solve(&f, &y, 0.5).unwrap();
        let a = DMatrix::from_row_slice(30, 8, &f.values);
        let cg = conjugate_gradient(&a, &a.tr_mul(&DVector::from_column_slice(&y)), 0.5).unwrap();
        for (d, c) in direct.iter().zip(cg.iter()) {
            assert!((d - c).abs() < 1e-8);
        }
    }

    #[test]
    fn empty_and_bad_lambda() {
        assert!(train_rlsc(&FeatureMatrix::new(3), &[], 1.0).is_err());
        let f = FeatureMatrix::from_rows(1, &[[1.0]]).unwrap();
        assert!(ridge_solve(&f, &[1.0], 0.0).is_err());
    }
}
