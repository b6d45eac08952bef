//! Estimation of the exogenous transition kernel from observed traces:
//! empirical count-ratio estimates, the optimistic L1-ball variant used by
//! the optimism baselines, and Bernoulli-thinned "lite" estimates.
//!
//! Counts support exogenous memory `m = 0` (i.i.d., per-stage marginals
//! stored under a single dummy conditioning row) and `m = 1` (first-order
//! Markov). Larger memories are rejected at configuration time.

use ndarray::Array3;
use rand::Rng;

use crate::error::{Error, Result};
use crate::exo::{ExoKernel, ExoTrace};
use crate::rng::{substream, Stream};

/// Exogenous memory order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Memory {
    /// `m = 0`: each stage's state is modeled as an independent draw.
    Iid,
    /// `m = 1`: first-order Markov chain (the default throughout).
    Markov,
}

impl Memory {
    pub fn from_order(m: usize) -> Result<Self> {
        match m {
            0 => Ok(Memory::Iid),
            1 => Ok(Memory::Markov),
            _ => Err(Error::config(
                "memory",
                format!("exogenous memory m = {m} is unsupported; only m in {{0, 1}}"),
            )),
        }
    }
}

/// Per-stage transition counts.
///
/// For `m = 1`, `n[[h, xi, xi']]` counts observed pairs `(xi_h, xi_{h+1})`
/// at source stage `h` (0-based), shape `(H - 1, Xi, Xi)`. For `m = 0`,
/// `n[[t, 0, xi]]` counts occurrences of `xi` at stage `t`, shape
/// `(H, 1, Xi)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionCounts {
    horizon: usize,
    num_xi: usize,
    memory: Memory,
    n: Array3<u64>,
}

impl TransitionCounts {
    pub fn new(horizon: usize, num_xi: usize, memory: Memory) -> Self {
        let shape = match memory {
            Memory::Markov => (horizon.saturating_sub(1), num_xi, num_xi),
            Memory::Iid => (horizon, 1, num_xi),
        };
        TransitionCounts {
            horizon,
            num_xi,
            memory,
            n: Array3::zeros(shape),
        }
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn num_xi(&self) -> usize {
        self.num_xi
    }

    pub fn memory(&self) -> Memory {
        self.memory
    }

    pub fn raw(&self) -> &Array3<u64> {
        &self.n
    }

    /// Total observations backing the conditional row used at transition
    /// stage `h` (0-based) out of exogenous state `xi`.
    pub fn row_total(&self, h: usize, xi: usize) -> u64 {
        match self.memory {
            Memory::Markov => self.n.slice(ndarray::s![h, xi, ..]).sum(),
            // The stage-(h+1) marginal backs every conditional row at h.
            Memory::Iid => self.n.slice(ndarray::s![h + 1, 0, ..]).sum(),
        }
    }

    /// Total recorded events across all cells.
    pub fn total(&self) -> u64 {
        self.n.sum()
    }

    /// Folds one trace into the counts. For `m = 1` this increments the
    /// `H - 1` cells `(h, xi_h, xi_{h+1})`; for `m = 0` it increments the
    /// `H` marginal cells `(t, xi_t)`.
    pub fn update(&mut self, trace: &ExoTrace) -> Result<()> {
        if trace.len() != self.horizon {
            return Err(Error::dims(format!(
                "trace length {} does not match horizon {}",
                trace.len(),
                self.horizon
            )));
        }
        if let Some(&bad) = trace.xi.iter().find(|&&v| v >= self.num_xi) {
            return Err(Error::invalid(format!("trace entry {bad} out of range")));
        }
        match self.memory {
            Memory::Markov => {
                for h in 0..self.horizon.saturating_sub(1) {
                    self.n[[h, trace.xi[h], trace.xi[h + 1]]] += 1;
                }
            }
            Memory::Iid => {
                for (t, &xi) in trace.xi.iter().enumerate() {
                    self.n[[t, 0, xi]] += 1;
                }
            }
        }
        Ok(())
    }
}

/// Folds one trace into a copy of `counts`.
pub fn update_counts(counts: &TransitionCounts, trace: &ExoTrace) -> Result<TransitionCounts> {
    let mut out = counts.clone();
    out.update(trace)?;
    Ok(out)
}

/// Empirical kernel: count-ratio rows where data exists, uniform rows
/// otherwise, together with the counts that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalKernel {
    counts: TransitionCounts,
    kernel: ExoKernel,
}

impl EmpiricalKernel {
    pub fn kernel(&self) -> &ExoKernel {
        &self.kernel
    }

    pub fn counts(&self) -> &TransitionCounts {
        &self.counts
    }

    /// Observation count backing row `(h, xi)`; drives the optimism bonus.
    pub fn row_total(&self, h: usize, xi: usize) -> u64 {
        self.counts.row_total(h, xi)
    }

    /// Wraps a known kernel as if it were estimated from bottomless data.
    /// Row totals saturate so optimism bonuses vanish.
    pub fn exact(kernel: ExoKernel) -> Self {
        let mut counts = TransitionCounts::new(kernel.horizon(), kernel.num_xi(), Memory::Markov);
        counts
            .n
            .fill(u64::MAX / (kernel.num_xi().max(1) as u64 * 2));
        EmpiricalKernel { counts, kernel }
    }
}

/// Maximum-likelihood kernel estimate from counts. Rows with data are
/// exact count ratios; unvisited rows fall back to the uniform
/// distribution.
pub fn estimate_kernel(counts: &TransitionCounts) -> EmpiricalKernel {
    let h_trans = counts.horizon.saturating_sub(1);
    let y = counts.num_xi;
    let uniform = 1.0 / y as f64;
    let mut probs = Array3::zeros((h_trans, y, y));

    match counts.memory {
        Memory::Markov => {
            for h in 0..h_trans {
                for xi in 0..y {
                    let row = counts.n.slice(ndarray::s![h, xi, ..]);
                    let total: u64 = row.sum();
                    let mut out = probs.slice_mut(ndarray::s![h, xi, ..]);
                    if total == 0 {
                        out.fill(uniform);
                    } else {
                        for (dst, &c) in out.iter_mut().zip(row.iter()) {
                            *dst = c as f64 / total as f64;
                        }
                    }
                }
            }
        }
        Memory::Iid => {
            // Conditional rows at stage h all equal the stage-(h+1) marginal.
            for h in 0..h_trans {
                let row = counts.n.slice(ndarray::s![h + 1, 0, ..]);
                let total: u64 = row.sum();
                for xi in 0..y {
                    let mut out = probs.slice_mut(ndarray::s![h, xi, ..]);
                    if total == 0 {
                        out.fill(uniform);
                    } else {
                        for (dst, &c) in out.iter_mut().zip(row.iter()) {
                            *dst = c as f64 / total as f64;
                        }
                    }
                }
            }
        }
    }

    let kernel =
        ExoKernel::new(counts.horizon, y, probs).expect("count ratios form valid probability rows");
    EmpiricalKernel {
        counts: counts.clone(),
        kernel,
    }
}

/// Confidence-bonus configuration for the optimistic baselines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimismConfig {
    /// Confidence multiplier `c`.
    pub c: f64,
    /// Failure probability in the bonus logarithm.
    pub delta: f64,
    /// Planned number of episodes `K`.
    pub episodes: usize,
    /// Exogenous state count `Y`.
    pub num_xi: usize,
}

impl OptimismConfig {
    pub fn new(c: f64, delta: f64, episodes: usize, num_xi: usize) -> Result<Self> {
        if c < 0.0 || !c.is_finite() {
            return Err(Error::invalid("optimism multiplier c must be >= 0"));
        }
        if !(0.0..1.0).contains(&delta) || delta == 0.0 {
            return Err(Error::invalid("delta must lie in (0, 1)"));
        }
        Ok(OptimismConfig {
            c,
            delta,
            episodes,
            num_xi,
        })
    }
}

/// Confidence radius `c * sqrt(2 Y ln(K Y / delta) / max(n, 1))` for a row
/// backed by `row_count` observations. An unvisited row is evaluated at
/// count 1; it is also uniform, so optimism already saturates there.
pub fn bonus_radius(cfg: &OptimismConfig, row_count: u64) -> f64 {
    let y = cfg.num_xi as f64;
    let k = cfg.episodes as f64;
    let n = row_count.max(1) as f64;
    cfg.c * (2.0 * y * (k * y / cfg.delta).ln() / n).sqrt()
}

/// Solves `max_q q . values` over probability vectors `q` with
/// `||q - row||_1 <= bonus` by mass transfer: add mass to the
/// highest-value index (lowest index on ties), removing it from indices in
/// ascending value order (ties again by index), never below zero. A bonus
/// of 2 or more transfers everything that can move.
pub fn optimistic_row(row: &[f64], values: &[f64], bonus: f64) -> Vec<f64> {
    debug_assert_eq!(row.len(), values.len());
    let mut q = row.to_vec();
    if bonus <= 0.0 || row.len() < 2 {
        return q;
    }

    let receiver = values
        .iter()
        .enumerate()
        .max_by(|(i, a), (j, b)| a.partial_cmp(b).unwrap().then(j.cmp(i)))
        .map(|(i, _)| i)
        .expect("non-empty row");

    let add = (bonus / 2.0).min(1.0 - q[receiver]).max(0.0);
    q[receiver] += add;

    let mut donors: Vec<usize> = (0..row.len()).filter(|&i| i != receiver).collect();
    donors.sort_by(|&i, &j| values[i].partial_cmp(&values[j]).unwrap().then(i.cmp(&j)));

    let mut need = add;
    for i in donors {
        if need <= 0.0 {
            break;
        }
        let take = need.min(q[i]);
        q[i] -= take;
        need -= take;
    }
    q
}

/// Subsampling configuration for the "lite" estimates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubsampleConfig {
    /// Keep probability for each recorded event.
    pub ratio: f64,
    /// Seed of the thinning stream.
    pub seed: u64,
}

impl SubsampleConfig {
    pub fn new(ratio: f64, seed: u64) -> Result<Self> {
        if !(ratio > 0.0 && ratio <= 1.0) {
            return Err(Error::invalid("subsample ratio must lie in (0, 1]"));
        }
        Ok(SubsampleConfig { ratio, seed })
    }
}

/// Bernoulli-thins every recorded event independently with probability
/// `cfg.ratio`. The decision for event `j` of cell `(h, row, col)` depends
/// only on `(cfg.seed, h, row, col, j)`, so growing a cell later leaves
/// earlier keep/drop decisions unchanged.
pub fn subsample_counts(counts: &TransitionCounts, cfg: &SubsampleConfig) -> TransitionCounts {
    let mut out = counts.clone();
    if cfg.ratio >= 1.0 {
        return out;
    }
    for ((h, row, col), dst) in out.n.indexed_iter_mut() {
        let total = *dst;
        if total == 0 {
            continue;
        }
        let mut stream: Stream = substream(cfg.seed, &[h as u64, row as u64, col as u64]);
        let mut kept = 0u64;
        for _ in 0..total {
            if stream.gen::<f64>() < cfg.ratio {
                kept += 1;
            }
        }
        *dst = kept;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;
    use ndarray::Axis;

    fn trace(xi: Vec<usize>, num_xi: usize) -> ExoTrace {
        ExoTrace::new(xi, num_xi).unwrap()
    }

    #[test]
    fn single_trace_counts_one_pair() {
        let counts = TransitionCounts::new(2, 2, Memory::Markov);
        let counts = update_counts(&counts, &trace(vec![0, 1], 2)).unwrap();
        assert_eq!(counts.raw()[[0, 0, 1]], 1);
        assert_eq!(counts.total(), 1);
    }

    #[test]
    fn repeated_trace_doubles_cells() {
        let counts = TransitionCounts::new(4, 3, Memory::Markov);
        let t = trace(vec![0, 2, 2, 1], 3);
        let once = update_counts(&counts, &t).unwrap();
        let twice = update_counts(&once, &t).unwrap();
        for (idx, &v) in once.raw().indexed_iter() {
            assert_eq!(twice.raw()[idx], 2 * v);
        }
        assert_eq!(twice.total(), 2 * once.total());
    }

    #[test]
    fn counting_identity_per_stage() {
        let mut counts = TransitionCounts::new(5, 4, Memory::Markov);
        let mut rng = substream(5, &[0]);
        for _ in 0..100 {
            let xi: Vec<usize> = (0..5).map(|_| rng.gen_range(0..4)).collect();
            counts.update(&trace(xi, 4)).unwrap();
        }
        for h in 0..4 {
            let stage_total: u64 = counts.raw().index_axis(Axis(0), h).sum();
            assert_eq!(stage_total, 100);
        }
    }

    #[test]
    fn iid_memory_counts_marginals() {
        let mut counts = TransitionCounts::new(3, 2, Memory::Iid);
        counts.update(&trace(vec![1, 0, 1], 2)).unwrap();
        assert_eq!(counts.total(), 3);
        assert_eq!(counts.raw()[[0, 0, 1]], 1);
        assert_eq!(counts.raw()[[1, 0, 0]], 1);
        assert_eq!(counts.raw()[[2, 0, 1]], 1);
        // Conditional rows at stage h share the stage-(h+1) marginal.
        let est = estimate_kernel(&counts);
        assert_eq!(est.kernel().row(0, 0).to_vec(), vec![1.0, 0.0]);
        assert_eq!(est.kernel().row(0, 1).to_vec(), vec![1.0, 0.0]);
        assert_eq!(est.row_total(0, 0), 1);
    }

    #[test]
    fn estimate_count_ratio_row() {
        let mut counts = TransitionCounts::new(2, 2, Memory::Markov);
        for _ in 0..3 {
            counts.update(&trace(vec![0, 0], 2)).unwrap();
        }
        counts.update(&trace(vec![0, 1], 2)).unwrap();
        let est = estimate_kernel(&counts);
        assert_eq!(est.kernel().row(0, 0).to_vec(), vec![0.75, 0.25]);
    }

    #[test]
    fn estimate_unvisited_row_is_uniform() {
        let counts = TransitionCounts::new(2, 4, Memory::Markov);
        let est = estimate_kernel(&counts);
        assert_eq!(est.kernel().row(0, 2).to_vec(), vec![0.25; 4]);
    }

    #[test]
    fn estimate_single_observation_row() {
        let mut counts = TransitionCounts::new(2, 3, Memory::Markov);
        counts.update(&trace(vec![0, 2], 3)).unwrap();
        let est = estimate_kernel(&counts);
        assert_eq!(est.kernel().row(0, 0).to_vec(), vec![0.0, 0.0, 1.0]);
    }

    #[test]
    fn estimated_rows_are_stochastic() {
        let mut counts = TransitionCounts::new(6, 5, Memory::Markov);
        let mut rng = substream(9, &[0]);
        for _ in 0..200 {
            let xi: Vec<usize> = (0..6).map(|_| rng.gen_range(0..5)).collect();
            counts.update(&trace(xi, 5)).unwrap();
        }
        estimate_kernel(&counts).kernel().validate().unwrap();
    }

    #[test]
    fn bonus_radius_frozen_value() {
        // c sqrt(2 * 5 * ln(250 * 5 / 0.01) / 100) with c = 0.3.
        let cfg = OptimismConfig::new(0.3, 0.01, 250, 5).unwrap();
        let b = bonus_radius(&cfg, 100);
        assert!((b - 0.324_999_417_148_031_1).abs() < 1e-12, "b = {b}");
    }

    #[test]
    fn bonus_radius_zero_c() {
        let cfg = OptimismConfig::new(0.0, 0.01, 100, 4).unwrap();
        assert_eq!(bonus_radius(&cfg, 0), 0.0);
        assert_eq!(bonus_radius(&cfg, 57), 0.0);
    }

    #[test]
    fn bonus_radius_scaling_and_unvisited() {
        let cfg = OptimismConfig::new(0.5, 0.01, 100, 4).unwrap();
        let b1 = bonus_radius(&cfg, 50);
        let b2 = bonus_radius(&cfg, 100);
        assert!((b1 / b2 - 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(bonus_radius(&cfg, 0), bonus_radius(&cfg, 1));
    }

    #[test]
    fn optimistic_row_basic_transfer() {
        let q = optimistic_row(&[0.5, 0.5], &[0.0, 1.0], 0.2);
        assert!((q[0] - 0.4).abs() < 1e-15);
        assert!((q[1] - 0.6).abs() < 1e-15);
    }

    #[test]
    fn optimistic_row_zero_bonus_is_identity() {
        let row = [0.2, 0.3, 0.5];
        let q = optimistic_row(&row, &[1.0, -1.0, 0.0], 0.0);
        assert_eq!(q, row.to_vec());
    }

    #[test]
    fn optimistic_row_full_transfer() {
        let q = optimistic_row(&[0.25, 0.25, 0.5], &[0.0, 2.0, 1.0], 2.0);
        assert_eq!(q, vec![0.0, 1.0, 0.0]);
        // bonus beyond 2 behaves the same
        let q = optimistic_row(&[0.25, 0.25, 0.5], &[0.0, 2.0, 1.0], 5.0);
        assert_eq!(q, vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn optimistic_row_is_feasible_and_improving() {
        let mut rng = substream(13, &[0]);
        for _ in 0..500 {
            let y = rng.gen_range(2..=5);
            let mut row: Vec<f64> = (0..y).map(|_| rng.gen::<f64>()).collect();
            let total: f64 = row.iter().sum();
            row.iter_mut().for_each(|v| *v /= total);
            let values: Vec<f64> = (0..y).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let bonus = rng.gen_range(0.0..2.5);

            let q = optimistic_row(&row, &values, bonus);
            let sum: f64 = q.iter().sum();
            assert!((sum - 1.0).abs() < 1e-12);
            assert!(q.iter().all(|&p| p >= -1e-15));
            let l1: f64 = q.iter().zip(&row).map(|(a, b)| (a - b).abs()).sum();
            assert!(l1 <= bonus + 1e-12);
            let base: f64 = row.iter().zip(&values).map(|(p, v)| p * v).sum();
            let opt: f64 = q.iter().zip(&values).map(|(p, v)| p * v).sum();
            assert!(opt >= base - 1e-12);
        }
    }

    #[test]
    fn optimistic_row_tie_breaks_to_lowest_index() {
        // Receiver tie between indices 1 and 2 goes to 1; donor tie between
        // 0 and 3 drains 0 first.
        let q = optimistic_row(&[0.25, 0.25, 0.25, 0.25], &[0.0, 1.0, 1.0, 0.0], 0.4);
        assert!((q[1] - 0.45).abs() < 1e-15);
        assert!((q[2] - 0.25).abs() < 1e-15);
        assert!((q[0] - 0.05).abs() < 1e-15);
        assert!((q[3] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn subsample_ratio_one_is_identity() {
        let mut counts = TransitionCounts::new(3, 3, Memory::Markov);
        counts.update(&trace(vec![0, 1, 2], 3)).unwrap();
        let cfg = SubsampleConfig::new(1.0, 77).unwrap();
        assert_eq!(subsample_counts(&counts, &cfg), counts);
    }

    #[test]
    fn subsample_concentrates_around_ratio() {
        // 1e4 events thinned at 0.5: kept total within 3 sqrt(1e4 * 0.25).
        let mut counts = TransitionCounts::new(2, 2, Memory::Markov);
        let t = trace(vec![0, 1], 2);
        for _ in 0..10_000 {
            counts.update(&t).unwrap();
        }
        let cfg = SubsampleConfig::new(0.5, 1234).unwrap();
        let thinned = subsample_counts(&counts, &cfg);
        let kept = thinned.total() as f64;
        let dev = 3.0 * (10_000f64 * 0.25).sqrt();
        assert!((kept - 5_000.0).abs() < dev, "kept = {kept}");
    }

    #[test]
    fn subsample_then_estimate_rows_sum_to_one() {
        let mut counts = TransitionCounts::new(4, 3, Memory::Markov);
        let mut rng = substream(3, &[1]);
        for _ in 0..50 {
            let xi: Vec<usize> = (0..4).map(|_| rng.gen_range(0..3)).collect();
            counts.update(&trace(xi, 3)).unwrap();
        }
        let cfg = SubsampleConfig::new(0.2, 9).unwrap();
        let thinned = subsample_counts(&counts, &cfg);
        estimate_kernel(&thinned).kernel().validate().unwrap();
    }

    #[test]
    fn subsample_is_deterministic_given_seed() {
        let mut counts = TransitionCounts::new(3, 2, Memory::Markov);
        let t = trace(vec![0, 1, 0], 2);
        for _ in 0..100 {
            counts.update(&t).unwrap();
        }
        let cfg = SubsampleConfig::new(0.3, 42).unwrap();
        assert_eq!(
            subsample_counts(&counts, &cfg),
            subsample_counts(&counts, &cfg)
        );
    }

    #[test]
    fn memory_order_validation() {
        assert!(Memory::from_order(0).is_ok());
        assert!(Memory::from_order(1).is_ok());
        assert!(Memory::from_order(2).is_err());
    }
}
