//! Exact maximization of continuous piecewise-linear objectives on a
//! closed interval: such a function attains its maximum at a breakpoint,
//! so enumerating breakpoints is an exact solver.

use crate::error::{Error, Result};

/// Breakpoints closer than this are merged.
pub const BREAKPOINT_MERGE_TOL: f64 = 1e-12;

/// A continuous piecewise-linear objective on `[lo, hi]` described by its
/// breakpoint set and an evaluation closure.
pub struct PiecewiseLinear1d<F: Fn(f64) -> f64> {
    lo: f64,
    hi: f64,
    breakpoints: Vec<f64>,
    eval: F,
}

impl<F: Fn(f64) -> f64> PiecewiseLinear1d<F> {
    /// Builds the objective. Breakpoints outside the domain are dropped,
    /// the endpoints are ensured, and near-duplicates are merged.
    pub fn new(lo: f64, hi: f64, breakpoints: &[f64], eval: F) -> Result<Self> {
        if !lo.is_finite() || !hi.is_finite() || lo > hi {
            return Err(Error::invalid(format!("invalid domain [{lo}, {hi}]")));
        }
        if breakpoints.is_empty() {
            return Err(Error::invalid("breakpoint set must not be empty"));
        }
        let mut pts: Vec<f64> = breakpoints
            .iter()
            .copied()
            .filter(|b| {
                b.is_finite() && *b >= lo - BREAKPOINT_MERGE_TOL && *b <= hi + BREAKPOINT_MERGE_TOL
            })
            .map(|b| b.clamp(lo, hi))
            .collect();
        pts.push(lo);
        pts.push(hi);
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        pts.dedup_by(|a, b| (*a - *b).abs() <= BREAKPOINT_MERGE_TOL);
        Ok(PiecewiseLinear1d {
            lo,
            hi,
            breakpoints: pts,
            eval,
        })
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn value(&self, x: f64) -> f64 {
        (self.eval)(x)
    }
}

/// Maximizer of a piecewise-linear objective.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaxResult {
    pub argmax: f64,
    pub value: f64,
}

/// Evaluates the objective at every breakpoint and returns the maximizing
/// point (lowest on ties) and its value.
pub fn breakpoint_maximize<F: Fn(f64) -> f64>(obj: &PiecewiseLinear1d<F>) -> MaxResult {
    let mut best = MaxResult {
        argmax: obj.breakpoints[0],
        value: (obj.eval)(obj.breakpoints[0]),
    };
    for &b in &obj.breakpoints[1..] {
        let v = (obj.eval)(b);
        if v > best.value {
            best = MaxResult {
                argmax: b,
                value: v,
            };
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_objective_maxes_at_right_endpoint() {
        let obj = PiecewiseLinear1d::new(-2.0, 2.0, &[-2.0, 2.0], |a| a).unwrap();
        let m = breakpoint_maximize(&obj);
        assert_eq!(m.argmax, 2.0);
        assert_eq!(m.value, 2.0);
    }

    #[test]
    fn tent_objective_maxes_at_interior_kink() {
        let obj = PiecewiseLinear1d::new(-2.0, 2.0, &[-2.0, 0.0, 2.0], |a: f64| -a.abs()).unwrap();
        let m = breakpoint_maximize(&obj);
        assert_eq!(m.argmax, 0.0);
        assert_eq!(m.value, 0.0);
    }

    #[test]
    fn ties_resolve_to_lowest_point() {
        let obj = PiecewiseLinear1d::new(0.0, 1.0, &[0.0, 0.5, 1.0], |_| 3.0).unwrap();
        assert_eq!(breakpoint_maximize(&obj).argmax, 0.0);
    }

    #[test]
    fn constructor_filters_and_merges() {
        let obj =
            PiecewiseLinear1d::new(0.0, 1.0, &[0.5, 0.5 + 1e-15, -3.0, 7.0, 0.25], |a| a).unwrap();
        assert_eq!(obj.breakpoints(), &[0.0, 0.25, 0.5, 1.0]);
    }

    #[test]
    fn empty_breakpoints_rejected() {
        assert!(PiecewiseLinear1d::new(0.0, 1.0, &[], |a| a).is_err());
        assert!(PiecewiseLinear1d::new(1.0, 0.0, &[0.5], |a| a).is_err());
    }
}
