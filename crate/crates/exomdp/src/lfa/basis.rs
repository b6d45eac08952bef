//! Anchor grids and the 1-D piecewise-linear hat basis.

use crate::error::{Error, Result};

/// Strictly increasing anchor locations on a closed interval.
#[derive(Debug, Clone, PartialEq)]
pub struct AnchorGrid {
    anchors: Vec<f64>,
}

impl AnchorGrid {
    pub fn new(anchors: Vec<f64>) -> Result<Self> {
        if anchors.len() < 2 {
            return Err(Error::invalid("anchor grid needs at least two anchors"));
        }
        if anchors.iter().any(|a| !a.is_finite()) {
            return Err(Error::invalid("anchors must be finite"));
        }
        if anchors.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("anchors must be strictly increasing"));
        }
        Ok(AnchorGrid { anchors })
    }

    /// The storage benchmark grid `rho_n = (n - 1) C / (N - 1)`,
    /// spanning `[0, capacity]`.
    pub fn uniform(n: usize, capacity: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid("uniform grid needs at least two anchors"));
        }
        if !(capacity > 0.0) || !capacity.is_finite() {
            return Err(Error::invalid("capacity must be positive and finite"));
        }
        let anchors = (0..n)
            .map(|i| i as f64 * capacity / (n - 1) as f64)
            .collect();
        AnchorGrid::new(anchors)
    }

    pub fn len(&self) -> usize {
        self.anchors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.anchors.is_empty()
    }

    pub fn lo(&self) -> f64 {
        self.anchors[0]
    }

    pub fn hi(&self) -> f64 {
        *self.anchors.last().unwrap()
    }

    pub fn anchors(&self) -> &[f64] {
        &self.anchors
    }
}

/// Nodal hat basis on an anchor grid: nonnegative partition-of-unity
/// features with `phi(rho_n) = e_n` and at most two nonzero coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct HatBasis {
    grid: AnchorGrid,
}

impl HatBasis {
    pub fn new(grid: AnchorGrid) -> Self {
        HatBasis { grid }
    }

    pub fn uniform(n: usize, capacity: f64) -> Result<Self> {
        Ok(HatBasis::new(AnchorGrid::uniform(n, capacity)?))
    }

    pub fn grid(&self) -> &AnchorGrid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.grid.len()
    }

    /// Segment index and interpolation weights for `x` (clipped to the
    /// grid's span): `phi` is `weight_left` on anchor `j` and
    /// `weight_right` on anchor `j + 1`, zero elsewhere.
    pub fn locate(&self, x: f64) -> (usize, f64, f64) {
        let a = self.grid.anchors();
        let x = x.clamp(self.grid.lo(), self.grid.hi());
        // Largest segment start with a[j] <= x, capped at the final segment.
        let j = match a.binary_search_by(|v| v.partial_cmp(&x).unwrap()) {
            Ok(i) => i.min(a.len() - 2),
            Err(i) => i.saturating_sub(1).min(a.len() - 2),
        };
        let width = a[j + 1] - a[j];
        let right = (x - a[j]) / width;
        (j, 1.0 - right, right)
    }

    /// Full feature vector phi(x).
    pub fn features(&self, x: f64) -> Vec<f64> {
        let mut phi = vec![0.0; self.dim()];
        let (j, wl, wr) = self.locate(x);
        phi[j] = wl;
        phi[j + 1] += wr;
        phi
    }

    /// `phi(x)^T w` without materializing phi.
    pub fn interpolate(&self, x: f64, w: &[f64]) -> f64 {
        debug_assert_eq!(w.len(), self.dim());
        let (j, wl, wr) = self.locate(x);
        wl * w[j] + wr * w[j + 1]
    }
}
