//! Feature-transport diagnostic: how one post-decision step moves anchor
//! features around the grid, and whether the induced mixing matrix is
//! non-expansive.

use nalgebra::DMatrix;
use ndarray::Array2;

use crate::error::{Error, Result};

use super::{HatBasis, StorageSpec};

/// Transport matrix of one post-decision step together with its largest
/// singular value and row sums. Row sums below one indicate mass removed by
/// clipping at the capacity boundaries.
#[derive(Debug, Clone)]
pub struct TransportDiagnostic {
    /// `matrix[[n, j]]`: interpolation weight of anchor `j` in the image of
    /// anchor `n`.
    pub matrix: Array2<f64>,
    pub sigma_max: f64,
    pub row_sums: Vec<f64>,
}

/// Builds the anchor transport for one realized next price: row `n` is
/// `phi(f^a(g(rho_n, xi'), a_n))` where `a_n` is the supplied per-anchor
/// policy action. Reports the largest singular value; values at or below
/// one certify a non-expansive update.
pub fn transport_diagnostic(
    spec: &StorageSpec,
    basis: &HatBasis,
    policy_actions: &[f64],
    xi_next: usize,
) -> Result<TransportDiagnostic> {
    let n = basis.dim();
    if policy_actions.len() != n {
        return Err(Error::dims(format!(
            "need one action per anchor: got {}, expected {n}",
            policy_actions.len()
        )));
    }
    if xi_next >= spec.num_prices() {
        return Err(Error::invalid(format!(
            "price index {xi_next} out of range"
        )));
    }

    let mut matrix = Array2::zeros((n, n));
    for (ni, (&rho, &a)) in basis
        .grid()
        .anchors()
        .iter()
        .zip(policy_actions)
        .enumerate()
    {
        let x_pre = spec.pre_decision(rho);
        let x_post = spec.post_decision(x_pre, a)?;
        let (j, wl, wr) = basis.locate(x_post);
        matrix[[ni, j]] += wl;
        matrix[[ni, j + 1]] += wr;
    }

    let dm = DMatrix::from_fn(n, n, |i, j| matrix[[i, j]]);
    let sigma_max = dm.svd(false, false).singular_values[0];
    let row_sums = (0..n).map(|i| matrix.row(i).iter().sum::<f64>()).collect();
    Ok(TransportDiagnostic {
        matrix,
        sigma_max,
        row_sums,
    })
}
