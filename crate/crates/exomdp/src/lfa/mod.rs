//! Linear function approximation on post-decision states: anchor grids,
//! hat bases, exact 1-D piecewise-linear action maximization, backward
//! least-squares value iteration, and feature-transport diagnostics.

mod basis;
mod general;
mod pwl;
mod storage;
mod transport;

pub use basis::{AnchorGrid, HatBasis};
pub use general::{general_lsvi_backward_pass, PostDecisionEnv};
pub use pwl::{breakpoint_maximize, MaxResult, PiecewiseLinear1d};
pub use storage::{
    greedy_anchor_actions, lsvi_backward_pass, lsvi_backward_pass_true, lsvi_greedy_action,
    storage_action_breakpoints, GreedyChoice, StorageSpec,
};
pub use transport::{transport_diagnostic, TransportDiagnostic};

use ndarray::Array3;

use crate::error::{Error, Result};

/// Per-stage, per-exogenous-state weight vectors defining post-decision
/// values `phi(x^a)^T w[h][xi]`.
///
/// Storage is `(H + 1, num_xi, dim)` with both the final computed stage and
/// the virtual terminal slice identically zero after a backward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightTable {
    horizon: usize,
    num_xi: usize,
    dim: usize,
    w: Array3<f64>,
}

impl WeightTable {
    pub fn zeros(horizon: usize, num_xi: usize, dim: usize) -> Self {
        WeightTable {
            horizon,
            num_xi,
            dim,
            w: Array3::zeros((horizon + 1, num_xi, dim)),
        }
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn num_xi(&self) -> usize {
        self.num_xi
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Weight vector for `(stage h, exogenous state xi)`, 0-based.
    pub fn stage(&self, h: usize, xi: usize) -> &[f64] {
        self.w
            .slice(ndarray::s![h, xi, ..])
            .to_slice()
            .expect("weight rows are contiguous")
    }

    pub fn stage_mut(&mut self, h: usize, xi: usize) -> ndarray::ArrayViewMut1<'_, f64> {
        self.w.slice_mut(ndarray::s![h, xi, ..])
    }

    pub fn raw(&self) -> &Array3<f64> {
        &self.w
    }

    /// All entries finite and the terminal slice zero.
    pub fn validate(&self) -> Result<()> {
        if self.w.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("weight table contains non-finite entries"));
        }
        let last = self.w.index_axis(ndarray::Axis(0), self.horizon);
        if last.iter().any(|&v| v != 0.0) {
            return Err(Error::invalid("terminal weight slice must be zero"));
        }
        Ok(())
    }
}
