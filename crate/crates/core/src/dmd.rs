//! Dynamic mode decomposition of a tweet's word-vector signal.
//!
//! The word vectors `x_1 .. x_{m+1}` are treated as consecutive states of a
//! linear system `x_{k+1} = A x_k`. `A` is never formed: the exact-DMD
//! construction recovers its dominant eigenpairs from the snapshot matrices,
//! and the state at step `k` is `Phi * Lambda^k * b`.
//!
//! Higher-order DMD stacks `d` consecutive states into one delay vector before
//! decomposing, which lets a linear model carry `d` steps of memory.

use nalgebra::{Complex, DMatrix, DVector, Schur, SVD};

use crate::embed::{EmbeddingSequence, SentenceVector};
use crate::error::{Error, Result};

pub type C64 = Complex<f64>;

const SVD_MAX_ITER: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HodmdConfig {
    /// Delay order; 1 is plain DMD.
    pub order: usize,
    pub max_rank: usize,
    /// Singular values with `sigma_i / sigma_1 <= sv_rel_tol` are discarded.
    pub sv_rel_tol: f64,
}

impl Default for HodmdConfig {
    fn default() -> Self {
        HodmdConfig {
            order: 1,
            max_rank: 10,
            sv_rel_tol: 1e-10,
        }
    }
}

impl HodmdConfig {
    pub fn with_order(order: usize) -> Self {
        HodmdConfig {
            order,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.order < 1 {
            return Err(Error::invalid("delay order must be >= 1"));
        }
        if self.max_rank < 1 {
            return Err(Error::invalid("max rank must be >= 1"));
        }
        if !(self.sv_rel_tol > 0.0 && self.sv_rel_tol < 1.0) {
            return Err(Error::invalid("sv_rel_tol must lie in (0, 1)"));
        }
        Ok(())
    }
}

/// Time-lagged snapshot matrices; column `j` of `shifted` is the state that
/// follows column `j` of `current`.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotPair {
    pub current: DMatrix<f64>,
    pub shifted: DMatrix<f64>,
    /// Dimension of one underlying state (before delay stacking).
    pub state_dim: usize,
    pub order: usize,
}

impl SnapshotPair {
    /// Number of snapshot columns in each matrix.
    pub fn len(&self) -> usize {
        self.current.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.current.ncols() == 0
    }
}

/// Builds delay-stacked snapshot matrices of order `order`.
///
/// Sequences shorter than `order + 1` columns are padded by repeating the
/// last column; an empty sequence is an error.
pub fn build_snapshots(seq: &EmbeddingSequence, order: usize) -> Result<SnapshotPair> {
    if order < 1 {
        return Err(Error::invalid("delay order must be >= 1"));
    }
    let src = seq.matrix();
    let n = src.nrows();
    let len = src.ncols();
    if len == 0 {
        return Err(Error::invalid(format!(
            "sequence needs at least {} columns, has 0",
            order + 1
        )));
    }
    let padded_len = len.max(order + 1);
    let column = |k: usize| src.column(k.min(len - 1));

    // y_k = [x_k; ..; x_{k+order-1}], k = 0..stacked
    let stacked = padded_len - order + 1;
    let mut y = DMatrix::zeros(n * order, stacked);
    for k in 0..stacked {
        for lag in 0..order {
            y.view_mut((lag * n, k), (n, 1)).copy_from(&column(k + lag));
        }
    }
    Ok(SnapshotPair {
        current: y.columns(0, stacked - 1).into_owned(),
        shifted: y.columns(1, stacked - 1).into_owned(),
        state_dim: n,
        order,
    })
}

#[derive(Debug, Clone)]
pub struct DmdDecomposition {
    /// Exact DMD modes, one per column.
    pub modes: DMatrix<C64>,
    pub eigenvalues: DVector<C64>,
    /// Least-squares amplitudes of the first snapshot in the mode basis.
    pub amplitudes: DVector<C64>,
    /// Retained singular values of the snapshot matrix, descending.
    pub singular_values: Vec<f64>,
}

impl DmdDecomposition {
    pub fn rank(&self) -> usize {
        self.eigenvalues.len()
    }
}

pub fn compute_dmd(snap: &SnapshotPair, cfg: &HodmdConfig) -> Result<DmdDecomposition> {
    cfg.validate()?;
    let x = &snap.current;
    let xp = &snap.shifted;
    if x.is_empty() || x.iter().all(|v| *v == 0.0) {
        return Err(Error::DegenerateSignal);
    }
    if x.iter().chain(xp.iter()).any(|v| !v.is_finite()) {
        return Err(Error::Numeric("non-finite snapshot entry".into()));
    }

    let svd = SVD::try_new(x.clone(), true, true, f64::EPSILON, SVD_MAX_ITER)
        .ok_or_else(|| Error::Numeric("snapshot SVD did not converge".into()))?;
    let u = svd.u.as_ref().expect("u requested");
    let v_t = svd.v_t.as_ref().expect("v_t requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let sigma_max = svd.singular_values[order[0]];
    let kept: Vec<usize> = order
        .into_iter()
        .filter(|&i| svd.singular_values[i] / sigma_max > cfg.sv_rel_tol)
        .take(cfg.max_rank)
        .collect();
    let r = kept.len();

    let mut u_r = DMatrix::zeros(x.nrows(), r);
    let mut v_r_scaled = DMatrix::zeros(x.ncols(), r);
    for (j, &i) in kept.iter().enumerate() {
        u_r.set_column(j, &u.column(i));
        let inv = 1.0 / svd.singular_values[i];
        v_r_scaled.set_column(j, &(v_t.row(i).transpose() * inv));
    }
    // B = Xp V_r S_r^-1, reduced operator A~ = U_r^T B
    let b_mat = xp * v_r_scaled;
    let reduced = u_r.transpose() * &b_mat;

    let (eigenvalues, eigvecs) = eigen_decompose(&reduced)?;
    let modes = b_mat.map(C64::from) * eigvecs;

    let first = x.column(0).map(C64::from);
    let amplitudes = least_squares(&modes, &first, cfg.sv_rel_tol)?;

    Ok(DmdDecomposition {
        modes,
        eigenvalues,
        amplitudes,
        singular_values: kept.iter().map(|&i| svd.singular_values[i]).collect(),
    })
}

/// Eigenvalues and unit eigenvectors of a small real matrix via the complex
/// Schur form and triangular back-substitution.
fn eigen_decompose(a: &DMatrix<f64>) -> Result<(DVector<C64>, DMatrix<C64>)> {
    let n = a.nrows();
    let ac = a.map(C64::from);
    let schur = Schur::try_new(ac, f64::EPSILON, SVD_MAX_ITER)
        .ok_or_else(|| Error::Numeric("Schur decomposition did not converge".into()))?;
    let (q, t) = schur.unpack();
    let t_norm = t.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let small = f64::EPSILON * t_norm;

    let eigenvalues = DVector::from_fn(n, |i, _| t[(i, i)]);
    let mut y = DMatrix::<C64>::zeros(n, n);
    for k in 0..n {
        let lambda = t[(k, k)];
        y[(k, k)] = C64::from(1.0);
        for i in (0..k).rev() {
            let mut acc = C64::from(0.0);
            for j in (i + 1)..=k {
                acc += t[(i, j)] * y[(j, k)];
            }
            let mut denom = t[(i, i)] - lambda;
            if denom.norm() < small {
                denom = C64::from(small);
            }
            y[(i, k)] = -acc / denom;
        }
    }
    let mut w = q * y;
    for mut col in w.column_iter_mut() {
        let norm = col.norm();
        if norm > 0.0 {
            col /= C64::from(norm);
        }
    }
    Ok((eigenvalues, w))
}

/// Minimum-norm least-squares solution of `a z = rhs`, discarding singular
/// values below `rel_tol * sigma_max`.
fn least_squares(a: &DMatrix<C64>, rhs: &DVector<C64>, rel_tol: f64) -> Result<DVector<C64>> {
    let svd = SVD::try_new(a.clone(), true, true, f64::EPSILON, SVD_MAX_ITER)
        .ok_or_else(|| Error::Numeric("mode SVD did not converge".into()))?;
    let sigma_max = svd.singular_values.max();
    if sigma_max == 0.0 {
        return Ok(DVector::zeros(a.ncols()));
    }
    svd.solve(rhs, rel_tol * sigma_max)
        .map_err(|e| Error::Numeric(e.to_string()))
}

/// `Phi * Lambda^k * b`: the decomposition's estimate of snapshot `k + 1`.
pub fn predict_state(dec: &DmdDecomposition, step: usize) -> DVector<C64> {
    let exponent = i32::try_from(step).unwrap_or(i32::MAX);
    let weights = dec
        .eigenvalues
        .zip_map(&dec.amplitudes, |lambda, b| lambda.powi(exponent) * b);
    &dec.modes * weights
}

/// Fixed-length DMD feature for one tweet: the real part of the one-step
/// extrapolation past the last observed state.
///
/// For delay order `d >= 2` the extrapolated stacked vector ends with the
/// genuinely new state, so its last `n` components are returned. Empty
/// sequences and degenerate signals map to the zero vector.
pub fn sentence_feature(seq: &EmbeddingSequence, cfg: &HodmdConfig) -> SentenceVector {
    let n = seq.dim();
    if seq.is_empty() {
        return SentenceVector::zeros(n);
    }
    let Ok(snap) = build_snapshots(seq, cfg.order) else {
        return SentenceVector::zeros(n);
    };
    let Ok(dec) = compute_dmd(&snap, cfg) else {
        return SentenceVector::zeros(n);
    };
    // snap.len() + 1 stacked states were observed; predict_state(k) is state k + 1
    let next = predict_state(&dec, snap.len() + 1);
    let offset = n * (snap.order - 1);
    let values: Vec<f64> = (0..n).map(|i| next[offset + i].re).collect();
    if values.iter().all(|v| v.is_finite()) {
        SentenceVector::new(values)
    } else {
        SentenceVector::zeros(n)
    }
}
