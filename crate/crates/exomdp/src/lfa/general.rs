//! Anchored least-squares value iteration for arbitrary post-decision
//! environments and feature maps, with the explicit
//! `w = Sigma^{-1} Phi y` regression step. The storage pass is the
//! hat-basis specialization of this update.

use nalgebra::{DMatrix, DVector};
use ndarray::Array2;

use crate::error::{Error, Result};
use crate::exo::ExoKernel;

use super::WeightTable;

/// Relative eigenvalue floor below which the anchor design counts as rank
/// deficient.
const RANK_TOL: f64 = 1e-10;

/// Environment hooks needed by the anchored backward pass.
pub trait PostDecisionEnv {
    /// Post-decision state representation.
    type PostState: Copy;

    fn horizon(&self) -> usize;
    fn num_xi(&self) -> usize;
    fn feature_dim(&self) -> usize;
    fn features(&self, x: Self::PostState) -> Vec<f64>;

    /// One-step greedy backup from post-decision state `x` under the
    /// realized next exogenous state: `max_a { r(x', a, xi') +
    /// phi(f^a(x', a))^T w_next }` where `x'` is the next pre-decision
    /// state reached from `x` under `xi'`.
    fn greedy_backup(&self, x: Self::PostState, xi_next: usize, w_next: &[f64]) -> f64;
}

/// Generic anchored LSVI backward pass.
///
/// `terminal` optionally supplies salvage weights for the final stage
/// (shape `(num_xi, feature_dim)`); the default is zero. Errors with the
/// smallest eigenvalue when the anchor feature matrix is rank deficient.
pub fn general_lsvi_backward_pass<E: PostDecisionEnv>(
    env: &E,
    anchors: &[E::PostState],
    kernel: &ExoKernel,
    terminal: Option<&Array2<f64>>,
) -> Result<WeightTable> {
    let d = env.feature_dim();
    let n = anchors.len();
    let h_len = env.horizon();
    let r = env.num_xi();
    if n < d {
        return Err(Error::invalid(format!(
            "need at least feature_dim = {d} anchors, got {n}"
        )));
    }
    if kernel.num_xi() != r || kernel.horizon() != h_len {
        return Err(Error::dims(
            "kernel does not match the environment".to_string(),
        ));
    }
    if let Some(t) = terminal {
        if t.dim() != (r, d) {
            return Err(Error::dims(
                "terminal weights must be (num_xi, dim)".to_string(),
            ));
        }
    }

    // Phi is d x n; Sigma = Phi Phi^T must be positive definite.
    let mut phi = DMatrix::zeros(d, n);
    for (j, &anchor) in anchors.iter().enumerate() {
        let f = env.features(anchor);
        if f.len() != d {
            return Err(Error::dims("feature vector length mismatch".to_string()));
        }
        for (i, v) in f.into_iter().enumerate() {
            phi[(i, j)] = v;
        }
    }
    let sigma = &phi * phi.transpose();
    let eig = sigma.clone().symmetric_eigen();
    let lambda_min = eig
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    let lambda_max = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    if !(lambda_min > RANK_TOL * lambda_max.max(1.0)) {
        return Err(Error::RankDeficient { lambda_min });
    }
    let solve = |b: &DVector<f64>| -> DVector<f64> {
        // Sigma^{-1} b through the eigendecomposition.
        let mut coeffs = eig.eigenvectors.transpose() * b;
        for (c, l) in coeffs.iter_mut().zip(eig.eigenvalues.iter()) {
            *c /= *l;
        }
        &eig.eigenvectors * coeffs
    };

    let mut weights = WeightTable::zeros(h_len, r, d);
    if h_len == 0 {
        return Ok(weights);
    }

    // Final stage: salvage weights (zero unless supplied).
    if let Some(t) = terminal {
        for xi in 0..r {
            weights
                .stage_mut(h_len - 1, xi)
                .iter_mut()
                .zip(t.row(xi).iter())
                .for_each(|(w, v)| *w = *v);
        }
    }

    for h in (0..h_len.saturating_sub(1)).rev() {
        // Greedy anchor targets under each realized next exogenous state.
        let mut inner = vec![vec![0.0; r]; n];
        for (ni, &anchor) in anchors.iter().enumerate() {
            for xi_next in 0..r {
                inner[ni][xi_next] =
                    env.greedy_backup(anchor, xi_next, weights.stage(h + 1, xi_next));
            }
        }
        for xi in 0..r {
            let row = kernel.row(h, xi);
            let mut y = DVector::zeros(n);
            for (ni, vals) in inner.iter().enumerate() {
                y[ni] = row.iter().zip(vals.iter()).map(|(p, v)| p * v).sum::<f64>();
            }
            let b = &phi * y;
            let w = solve(&b);
            weights
                .stage_mut(h, xi)
                .iter_mut()
                .zip(w.iter())
                .for_each(|(dst, v)| *dst = *v);
        }
    }
    Ok(weights)
}
