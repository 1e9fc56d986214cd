//! Explicit kernel embedding for non-linear descriptions.
//!
//! The centered RBF Gram matrix is eigendecomposed as `U L U^T` and the
//! training samples are represented by the columns of `Phi = L^(1/2) U^T`,
//! so that `Phi^T Phi` reproduces the centered kernel. Linear machinery then
//! runs on `Phi` unchanged. New samples are mapped through their centered
//! kernel vector and the pseudo-inverse of `Phi^T`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{pseudo_inverse, sym_eig, symmetrize, DEFAULT_REL_FLOOR};

/// Eigenvalues at or below this fraction of the largest are dropped.
pub const DEFAULT_RETAIN_TOL: f64 = 1e-10;

/// `K_ij = exp(-|x_i - x_j|^2 / (2 sigma^2))` over sample columns.
pub fn rbf_kernel(x: &DMatrix<f64>, sigma: f64) -> Result<DMatrix<f64>> {
    check_sigma(sigma)?;
    let n = x.ncols();
    let denom = 2.0 * sigma * sigma;
    let mut k = DMatrix::identity(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let v = (-(x.column(i) - x.column(j)).norm_squared() / denom).exp();
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    Ok(k)
}

/// Kernel evaluations of `x` against every training column.
pub fn rbf_kernel_vector(train: &DMatrix<f64>, x: &DVector<f64>, sigma: f64) -> Result<DVector<f64>> {
    check_sigma(sigma)?;
    if x.len() != train.nrows() {
        return Err(Error::DimensionMismatch {
            context: "kernel vector",
            expected: train.nrows(),
            found: x.len(),
        });
    }
    let denom = 2.0 * sigma * sigma;
    Ok(DVector::from_iterator(
        train.ncols(),
        train
            .column_iter()
            .map(|col| (-(col - x).norm_squared() / denom).exp()),
    ))
}

fn check_sigma(sigma: f64) -> Result<()> {
    if sigma > 0.0 && sigma.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("sigma must be > 0, got {sigma}")))
    }
}

/// `(I - 11^T/N) K (I - 11^T/N)`.
pub fn center_kernel(k: &DMatrix<f64>) -> DMatrix<f64> {
    let n = k.nrows();
    if n == 0 {
        return k.clone();
    }
    let row_means = DVector::from_iterator(n, k.row_iter().map(|r| r.mean()));
    let col_means = DVector::from_iterator(n, k.column_iter().map(|c| c.mean()));
    let total = k.mean();
    let centered = DMatrix::from_fn(n, n, |i, j| k[(i, j)] - row_means[i] - col_means[j] + total);
    symmetrize(&centered)
}

/// Result of eigendecomposing a centered kernel.
#[derive(Debug, Clone)]
pub struct NptEmbedding {
    /// `r x N`; column `j` represents training sample `j`.
    pub phi: DMatrix<f64>,
    /// Retained eigenvalues, descending.
    pub eigenvalues: DVector<f64>,
}

/// Keeps eigenpairs above `rel_tol * lambda_max` and returns `Phi = L^(1/2) U^T`.
pub fn npt_embed(khat: &DMatrix<f64>, rel_tol: f64) -> Result<NptEmbedding> {
    let eig = sym_eig(khat)?;
    let n = eig.len();
    let max = if n == 0 { 0.0 } else { eig.values[n - 1] };
    if max <= 0.0 {
        return Err(Error::AllDegenerate { max });
    }
    let cutoff = rel_tol * max;
    let kept: Vec<usize> = (0..n).rev().filter(|&i| eig.values[i] > cutoff).collect();
    let phi = DMatrix::from_fn(kept.len(), n, |r, c| {
        eig.values[kept[r]].sqrt() * eig.vectors[(c, kept[r])]
    });
    let eigenvalues = DVector::from_iterator(kept.len(), kept.iter().map(|&i| eig.values[i]));
    Ok(NptEmbedding { phi, eigenvalues })
}

/// Everything needed to embed unseen samples consistently with training.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NptState {
    /// Training samples after mean removal, `D x N`.
    #[serde(with = "crate::matrix_serde::matrix")]
    pub training_x: DMatrix<f64>,
    pub sigma: f64,
    #[serde(with = "crate::matrix_serde::matrix")]
    pub kernel: DMatrix<f64>,
    #[serde(with = "crate::matrix_serde::matrix")]
    pub centered_kernel: DMatrix<f64>,
    /// `Phi`, `r x N`, as reproduced by the test-time map.
    #[serde(with = "crate::matrix_serde::matrix")]
    pub basis: DMatrix<f64>,
    /// `(Phi^T)^+`, `r x N`.
    #[serde(with = "crate::matrix_serde::matrix")]
    pub phi_pinv: DMatrix<f64>,
    pub retained_rank: usize,
}

impl NptState {
    /// Builds the kernel, centers it, and embeds the training set.
    ///
    /// Training columns of `basis` are produced by the same map used for
    /// unseen samples, so a training sample fed back through [`Self::embed`]
    /// lands on its column bit for bit.
    pub fn fit(training_x: &DMatrix<f64>, sigma: f64) -> Result<Self> {
        let kernel = rbf_kernel(training_x, sigma)?;
        let centered_kernel = center_kernel(&kernel);
        let emb = npt_embed(&centered_kernel, DEFAULT_RETAIN_TOL)?;
        let phi_pinv = pseudo_inverse(&emb.phi.transpose(), DEFAULT_REL_FLOOR)?;
        let mut state = NptState {
            training_x: training_x.clone(),
            sigma,
            kernel,
            centered_kernel,
            retained_rank: emb.phi.nrows(),
            basis: emb.phi,
            phi_pinv,
        };
        let mut basis = DMatrix::zeros(state.retained_rank, training_x.ncols());
        for (j, col) in training_x.column_iter().enumerate() {
            basis.set_column(j, &state.embed(&col.into_owned())?);
        }
        state.basis = basis;
        Ok(state)
    }

    /// Training samples in the embedded space, `r x N`.
    pub fn embedded_training(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn sample_count(&self) -> usize {
        self.training_x.ncols()
    }

    /// Embeds one (mean-removed) sample.
    pub fn embed(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        npt_embed_test(self, x)
    }
}

/// Centered kernel vector `(I - 11^T/N)(k - K 1/N)` for a new sample.
pub fn centered_kernel_vector(state: &NptState, x: &DVector<f64>) -> Result<DVector<f64>> {
    let k = rbf_kernel_vector(&state.training_x, x, state.sigma)?;
    let n = state.sample_count() as f64;
    let means = DVector::from_iterator(k.len(), state.kernel.row_iter().map(|r| r.sum() / n));
    let shifted = k - means;
    let mean = shifted.mean();
    Ok(shifted.map(|v| v - mean))
}

/// `phi = (Phi^T)^+ khat` for a new sample.
pub fn npt_embed_test(state: &NptState, x: &DVector<f64>) -> Result<DVector<f64>> {
    let khat = centered_kernel_vector(state, x)?;
    Ok(&state.phi_pinv * khat)
}
