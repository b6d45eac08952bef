//! Core domain types for tabular exogenous MDPs.
//!
//! An exo-MDP factors the state into an endogenous index `x` and an
//! exogenous index `xi`. Actions steer `x` deterministically through the
//! known map `f(x, a, xi_next)`, while `xi` evolves as a Markov chain that
//! actions cannot influence. Rewards `r(x, a, xi)` are known and
//! time-invariant.
//!
//! Stage convention: prose in this crate speaks of stages `1..=H`; all
//! arrays are 0-indexed, so stage `h` lives at index `h - 1`. Transition
//! matrices are indexed by the *source* stage: `ExoKernel` slice `h` governs
//! the draw of the stage `h + 2` exogenous state given the stage `h + 1`
//! state (0-based: from index `h` to `h + 1`).

use ndarray::{Array1, Array2, Array3};
use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::Stream;

/// Tolerance for probability-row normalization checks.
pub const ROW_SUM_TOL: f64 = 1e-12;

/// Stage-indexed exogenous transition kernel.
///
/// `probs` has shape `(H - 1, num_xi, num_xi)`: slice `h` is the
/// row-stochastic matrix governing the transition from the stage `h + 1`
/// exogenous state to the stage `h + 2` state (1-based stages).
#[derive(Debug, Clone, PartialEq)]
pub struct ExoKernel {
    horizon: usize,
    num_xi: usize,
    probs: Array3<f64>,
}

impl ExoKernel {
    pub fn new(horizon: usize, num_xi: usize, probs: Array3<f64>) -> Result<Self> {
        if horizon == 0 || num_xi == 0 {
            return Err(Error::invalid("horizon and num_xi must be positive"));
        }
        let stages = horizon.saturating_sub(1);
        if probs.dim() != (stages, num_xi, num_xi) {
            return Err(Error::dims(format!(
                "kernel probs shape {:?}, expected ({}, {}, {})",
                probs.dim(),
                stages,
                num_xi,
                num_xi
            )));
        }
        let kernel = ExoKernel {
            horizon,
            num_xi,
            probs,
        };
        kernel.validate()?;
        Ok(kernel)
    }

    /// A kernel whose transition matrix is the same at every stage.
    pub fn time_homogeneous(horizon: usize, matrix: Array2<f64>) -> Result<Self> {
        let num_xi = matrix.nrows();
        if matrix.ncols() != num_xi {
            return Err(Error::dims("transition matrix must be square"));
        }
        let stages = horizon.saturating_sub(1);
        let mut probs = Array3::zeros((stages, num_xi, num_xi));
        for h in 0..stages {
            probs.index_axis_mut(ndarray::Axis(0), h).assign(&matrix);
        }
        ExoKernel::new(horizon, num_xi, probs)
    }

    /// Uniform rows at every stage (the no-data prior).
    pub fn uniform(horizon: usize, num_xi: usize) -> Self {
        let stages = horizon.saturating_sub(1);
        let probs = Array3::from_elem((stages, num_xi, num_xi), 1.0 / num_xi as f64);
        ExoKernel {
            horizon,
            num_xi,
            probs,
        }
    }

    /// Checks that every row is a probability vector (sum `1 ± 1e-12`,
    /// entries in `[0, 1]`).
    pub fn validate(&self) -> Result<()> {
        for h in 0..self.transition_stages() {
            for xi in 0..self.num_xi {
                let row = self.row(h, xi);
                let sum: f64 = row.iter().sum();
                if (sum - 1.0).abs() > ROW_SUM_TOL {
                    return Err(Error::invalid(format!(
                        "kernel row (h={h}, xi={xi}) sums to {sum}, expected 1"
                    )));
                }
                if row
                    .iter()
                    .any(|&p| !(-ROW_SUM_TOL..=1.0 + ROW_SUM_TOL).contains(&p))
                {
                    return Err(Error::invalid(format!(
                        "kernel row (h={h}, xi={xi}) has an entry outside [0, 1]"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn num_xi(&self) -> usize {
        self.num_xi
    }

    /// Number of transition slices, `H - 1`.
    pub fn transition_stages(&self) -> usize {
        self.probs.dim().0
    }

    /// Transition row out of `(stage index h, exogenous state xi)`.
    pub fn row(&self, h: usize, xi: usize) -> ndarray::ArrayView1<'_, f64> {
        self.probs.slice(ndarray::s![h, xi, ..])
    }

    pub fn probs(&self) -> &Array3<f64> {
        &self.probs
    }

    /// Draws the next exogenous state from row `(h, xi)`.
    pub fn sample_next(&self, h: usize, xi: usize, rng: &mut Stream) -> usize {
        sample_index(self.row(h, xi).as_slice().expect("contiguous row"), rng)
    }

    /// Samples a full exogenous trace starting from `xi1`.
    pub fn sample_trace(&self, xi1: usize, rng: &mut Stream) -> Result<ExoTrace> {
        if xi1 >= self.num_xi {
            return Err(Error::invalid(format!(
                "xi1 = {xi1} out of range for num_xi = {}",
                self.num_xi
            )));
        }
        let mut xi = Vec::with_capacity(self.horizon);
        xi.push(xi1);
        for h in 0..self.transition_stages() {
            let next = self.sample_next(h, xi[h], rng);
            xi.push(next);
        }
        Ok(ExoTrace { xi })
    }
}

/// Draws an index from a probability slice by inverse-CDF walk.
pub fn sample_index(row: &[f64], rng: &mut Stream) -> usize {
    let u: f64 = rng.gen::<f64>();
    let mut acc = 0.0;
    for (i, &p) in row.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    // Rounding may leave acc slightly below 1; fall back to the last
    // positive-probability index.
    row.iter()
        .rposition(|&p| p > 0.0)
        .expect("probability row has positive mass")
}

/// One episode's realized exogenous states `xi_1..xi_H`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExoTrace {
    pub xi: Vec<usize>,
}

impl ExoTrace {
    pub fn new(xi: Vec<usize>, num_xi: usize) -> Result<Self> {
        if let Some(&bad) = xi.iter().find(|&&v| v >= num_xi) {
            return Err(Error::invalid(format!(
                "trace entry {bad} out of range for num_xi = {num_xi}"
            )));
        }
        Ok(ExoTrace { xi })
    }

    pub fn len(&self) -> usize {
        self.xi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xi.is_empty()
    }
}

/// Full tabular exo-MDP: reward tensor, deterministic endogenous map, and
/// the ground-truth exogenous kernel.
#[derive(Debug, Clone)]
pub struct TabularExoMdp {
    pub horizon: usize,
    pub num_x: usize,
    pub num_xi: usize,
    pub num_a: usize,
    /// `reward[[x, a, xi]]`, time-invariant.
    pub reward: Array3<f64>,
    /// `endo_map[[x, a, xi_next]] = x_next`.
    pub endo_map: Array3<usize>,
    pub true_kernel: ExoKernel,
}

impl TabularExoMdp {
    pub fn new(
        horizon: usize,
        reward: Array3<f64>,
        endo_map: Array3<usize>,
        true_kernel: ExoKernel,
    ) -> Result<Self> {
        let (num_x, num_a, num_xi) = reward.dim();
        if horizon == 0 || num_x == 0 || num_a == 0 || num_xi == 0 {
            return Err(Error::invalid("all dimensions must be positive"));
        }
        if endo_map.dim() != (num_x, num_a, num_xi) {
            return Err(Error::dims(format!(
                "endo_map shape {:?} does not match reward shape {:?}",
                endo_map.dim(),
                reward.dim()
            )));
        }
        if true_kernel.horizon() != horizon || true_kernel.num_xi() != num_xi {
            return Err(Error::dims(
                "kernel horizon/num_xi do not match the MDP".to_string(),
            ));
        }
        if let Some(&bad) = endo_map.iter().find(|&&x| x >= num_x) {
            return Err(Error::invalid(format!(
                "endo_map entry {bad} out of range for num_x = {num_x}"
            )));
        }
        true_kernel.validate()?;
        Ok(TabularExoMdp {
            horizon,
            num_x,
            num_xi,
            num_a,
            reward,
            endo_map,
            true_kernel,
        })
    }

    #[inline]
    pub fn reward_at(&self, x: usize, a: usize, xi: usize) -> f64 {
        self.reward[[x, a, xi]]
    }

    #[inline]
    pub fn next_x(&self, x: usize, a: usize, xi_next: usize) -> usize {
        self.endo_map[[x, a, xi_next]]
    }
}

/// Deterministic tabular policy, `action[[h, x, xi]]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TabularPolicy {
    pub action: Array3<usize>,
}

impl TabularPolicy {
    pub fn new(action: Array3<usize>, num_a: usize) -> Result<Self> {
        if let Some(&bad) = action.iter().find(|&&a| a >= num_a) {
            return Err(Error::invalid(format!(
                "policy action {bad} out of range for num_a = {num_a}"
            )));
        }
        Ok(TabularPolicy { action })
    }

    /// The constant-action policy, mostly useful in tests.
    pub fn constant(horizon: usize, num_x: usize, num_xi: usize, a: usize) -> Self {
        TabularPolicy {
            action: Array3::from_elem((horizon, num_x, num_xi), a),
        }
    }

    #[inline]
    pub fn act(&self, h: usize, x: usize, xi: usize) -> usize {
        self.action[[h, x, xi]]
    }

    pub fn horizon(&self) -> usize {
        self.action.dim().0
    }
}

/// Stage-indexed value table `v[[h, x, xi]]` for `h` in `0..=H`; the
/// terminal slice `v[H]` is identically zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueTable {
    pub v: Array3<f64>,
}

impl ValueTable {
    pub fn zeros(horizon: usize, num_x: usize, num_xi: usize) -> Self {
        ValueTable {
            v: Array3::zeros((horizon + 1, num_x, num_xi)),
        }
    }

    /// Checks the terminal-slice invariant.
    pub fn validate(&self) -> Result<()> {
        let h = self.v.dim().0 - 1;
        if self
            .v
            .index_axis(ndarray::Axis(0), h)
            .iter()
            .any(|&v| v != 0.0)
        {
            return Err(Error::invalid("terminal value slice must be zero"));
        }
        Ok(())
    }

    /// Stage-1 slice (0-based index 0).
    pub fn stage1(&self) -> ndarray::ArrayView2<'_, f64> {
        self.v.index_axis(ndarray::Axis(0), 0)
    }
}

/// Record of one simulated episode.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeLog {
    pub trace: ExoTrace,
    pub endo: Vec<usize>,
    pub actions: Vec<usize>,
    pub rewards: Vec<f64>,
}

impl EpisodeLog {
    /// Checks internal consistency: equal lengths and the endogenous
    /// recursion `x_{h+1} = f(x_h, a_h, xi_{h+1})`.
    pub fn validate(&self, mdp: &TabularExoMdp) -> Result<()> {
        let h = mdp.horizon;
        if self.trace.len() != h
            || self.endo.len() != h
            || self.actions.len() != h
            || self.rewards.len() != h
        {
            return Err(Error::dims("episode log arrays must all have length H"));
        }
        for t in 0..h - 1 {
            let expect = mdp.next_x(self.endo[t], self.actions[t], self.trace.xi[t + 1]);
            if self.endo[t + 1] != expect {
                return Err(Error::invalid(format!(
                    "endogenous recursion violated at stage {}",
                    t + 1
                )));
            }
        }
        Ok(())
    }

    pub fn total_reward(&self) -> f64 {
        self.rewards.iter().sum()
    }
}

/// Simulates one episode under `policy` from `(x1, xi1)`, drawing the
/// exogenous path from the true kernel.
///
/// The exogenous draws consume the stream identically for every policy, so
/// two policies rolled on clones of the same stream see the same trace.
pub fn simulate_episode(
    mdp: &TabularExoMdp,
    policy: &TabularPolicy,
    x1: usize,
    xi1: usize,
    rng: &mut Stream,
) -> Result<EpisodeLog> {
    if x1 >= mdp.num_x {
        return Err(Error::invalid(format!(
            "x1 = {x1} out of range for num_x = {}",
            mdp.num_x
        )));
    }
    if xi1 >= mdp.num_xi {
        return Err(Error::invalid(format!(
            "xi1 = {xi1} out of range for num_xi = {}",
            mdp.num_xi
        )));
    }
    if policy.action.dim() != (mdp.horizon, mdp.num_x, mdp.num_xi) {
        return Err(Error::dims("policy shape does not match the MDP"));
    }

    let h = mdp.horizon;
    let mut xi = Vec::with_capacity(h);
    let mut endo = Vec::with_capacity(h);
    let mut actions = Vec::with_capacity(h);
    let mut rewards = Vec::with_capacity(h);

    let mut x = x1;
    let mut cur_xi = xi1;
    for t in 0..h {
        let a = policy.act(t, x, cur_xi);
        if a >= mdp.num_a {
            return Err(Error::invalid(format!("policy action {a} out of range")));
        }
        xi.push(cur_xi);
        endo.push(x);
        actions.push(a);
        rewards.push(mdp.reward_at(x, a, cur_xi));
        if t + 1 < h {
            let next_xi = mdp.true_kernel.sample_next(t, cur_xi, rng);
            x = mdp.next_x(x, a, next_xi);
            cur_xi = next_xi;
        }
    }
    Ok(EpisodeLog {
        trace: ExoTrace { xi },
        endo,
        actions,
        rewards,
    })
}

/// Replays `policy` from `x1` along a fixed exogenous trace and returns the
/// total reward. Pure in its arguments; in particular it does not depend on
/// whichever policy originally generated the trace.
pub fn hindsight_value(
    mdp: &TabularExoMdp,
    policy: &TabularPolicy,
    x1: usize,
    trace: &ExoTrace,
) -> Result<f64> {
    if trace.len() != mdp.horizon {
        return Err(Error::dims(format!(
            "trace length {} does not match horizon {}",
            trace.len(),
            mdp.horizon
        )));
    }
    if x1 >= mdp.num_x {
        return Err(Error::invalid(format!("x1 = {x1} out of range")));
    }
    if let Some(&bad) = trace.xi.iter().find(|&&v| v >= mdp.num_xi) {
        return Err(Error::invalid(format!("trace entry {bad} out of range")));
    }

    let mut x = x1;
    let mut total = 0.0;
    for t in 0..mdp.horizon {
        let xi = trace.xi[t];
        let a = policy.act(t, x, xi);
        total += mdp.reward_at(x, a, xi);
        if t + 1 < mdp.horizon {
            x = mdp.next_x(x, a, trace.xi[t + 1]);
        }
    }
    Ok(total)
}

/// Draws an initial exogenous state from `dist` (used by the harness; the
/// default distribution is uniform over the exogenous states).
pub fn sample_initial_xi(dist: &Array1<f64>, rng: &mut Stream) -> usize {
    sample_index(dist.as_slice().expect("contiguous dist"), rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;
    use ndarray::array;

    fn two_state_uniform(horizon: usize) -> ExoKernel {
        ExoKernel::time_homogeneous(horizon, array![[0.5, 0.5], [0.5, 0.5]]).unwrap()
    }

    /// 2x2x2 MDP with distinct rewards, f(x, a, xi') = (x + a + xi') mod 2.
    fn small_mdp(horizon: usize, kernel: ExoKernel) -> TabularExoMdp {
        let mut reward = Array3::zeros((2, 2, 2));
        let mut endo = Array3::zeros((2, 2, 2));
        for x in 0..2 {
            for a in 0..2 {
                for xi in 0..2 {
                    reward[[x, a, xi]] = (4 * x + 2 * a + xi) as f64 / 8.0;
                    endo[[x, a, xi]] = (x + a + xi) % 2;
                }
            }
        }
        TabularExoMdp::new(horizon, reward, endo, kernel).unwrap()
    }

    #[test]
    fn kernel_rejects_bad_rows() {
        let bad = ExoKernel::time_homogeneous(3, array![[0.6, 0.6], [0.5, 0.5]]);
        assert!(bad.is_err());
    }

    #[test]
    fn one_stage_rollout_reward() {
        let mdp = small_mdp(1, two_state_uniform(1));
        let policy = TabularPolicy::constant(1, 2, 2, 1);
        let mut rng = substream(0, &[1]);
        let log = simulate_episode(&mdp, &policy, 1, 0, &mut rng).unwrap();
        assert_eq!(log.rewards.len(), 1);
        assert_eq!(log.rewards[0], mdp.reward_at(1, 1, 0));
        log.validate(&mdp).unwrap();
    }

    #[test]
    fn deterministic_kernel_fixes_trace() {
        // One-hot rows: 0 -> 1 -> 0 -> 1 ...
        let kernel = ExoKernel::time_homogeneous(4, array![[0.0, 1.0], [1.0, 0.0]]).unwrap();
        let mdp = small_mdp(4, kernel);
        let policy = TabularPolicy::constant(4, 2, 2, 0);
        let mut rng = substream(3, &[9]);
        let log = simulate_episode(&mdp, &policy, 0, 0, &mut rng).unwrap();
        assert_eq!(log.trace.xi, vec![0, 1, 0, 1]);
        log.validate(&mdp).unwrap();
    }

    #[test]
    fn episode_log_consistency_holds_for_simulated_episodes() {
        let mdp = small_mdp(5, two_state_uniform(5));
        let policy = TabularPolicy::constant(5, 2, 2, 1);
        for seed in 0..50 {
            let mut rng = substream(seed, &[2]);
            let log = simulate_episode(&mdp, &policy, 0, 1, &mut rng).unwrap();
            log.validate(&mdp).unwrap();
        }
    }

    #[test]
    fn two_state_uniform_frequency_matches_half() {
        // Monte-Carlo check of the kernel sampler: empirical frequency of
        // xi_2 = 0 given xi_1 = 0 within 0.01 of 0.5 over 1e5 episodes.
        let mdp = small_mdp(2, two_state_uniform(2));
        let policy = TabularPolicy::constant(2, 2, 2, 0);
        let n = 100_000;
        let mut hits = 0usize;
        for k in 0..n {
            let mut rng = substream(11, &[k as u64]);
            let log = simulate_episode(&mdp, &policy, 0, 0, &mut rng).unwrap();
            if log.trace.xi[1] == 0 {
                hits += 1;
            }
        }
        let freq = hits as f64 / n as f64;
        assert!((freq - 0.5).abs() < 0.01, "freq = {freq}");
    }

    #[test]
    fn hindsight_single_stage() {
        let mdp = small_mdp(1, two_state_uniform(1));
        let policy = TabularPolicy::constant(1, 2, 2, 1);
        let trace = ExoTrace::new(vec![1], 2).unwrap();
        let v = hindsight_value(&mdp, &policy, 0, &trace).unwrap();
        assert_eq!(v, mdp.reward_at(0, 1, 1));
    }

    #[test]
    fn hindsight_is_independent_of_behavior_policy() {
        let mdp = small_mdp(3, two_state_uniform(3));
        let behavior_a = TabularPolicy::constant(3, 2, 2, 0);
        let behavior_b = TabularPolicy::constant(3, 2, 2, 1);
        let target = TabularPolicy::constant(3, 2, 2, 1);

        let mut rng_a = substream(21, &[0]);
        let mut rng_b = substream(21, &[0]);
        let log_a = simulate_episode(&mdp, &behavior_a, 0, 0, &mut rng_a).unwrap();
        let log_b = simulate_episode(&mdp, &behavior_b, 0, 0, &mut rng_b).unwrap();
        // Same stream, different behavior policies: identical traces.
        assert_eq!(log_a.trace, log_b.trace);

        let va = hindsight_value(&mdp, &target, 0, &log_a.trace).unwrap();
        let vb = hindsight_value(&mdp, &target, 0, &log_b.trace).unwrap();
        assert_eq!(va, vb);
    }

    #[test]
    fn hindsight_rejects_short_trace() {
        let mdp = small_mdp(3, two_state_uniform(3));
        let policy = TabularPolicy::constant(3, 2, 2, 0);
        let trace = ExoTrace::new(vec![0, 1], 2).unwrap();
        assert!(hindsight_value(&mdp, &policy, 0, &trace).is_err());
    }

    #[test]
    fn simulate_rejects_bad_indices() {
        let mdp = small_mdp(2, two_state_uniform(2));
        let policy = TabularPolicy::constant(2, 2, 2, 0);
        let mut rng = substream(0, &[0]);
        assert!(simulate_episode(&mdp, &policy, 2, 0, &mut rng).is_err());
        assert!(simulate_episode(&mdp, &policy, 0, 5, &mut rng).is_err());
    }
}
