//! Exact policy evaluation on the true model, regret metrics, and kernel
//! model-error metrics, plus Monte-Carlo evaluation of storage policies
//! against a dense-anchor oracle.

use ndarray::Array3;

use crate::error::{Error, Result};
use crate::exo::{ExoKernel, TabularExoMdp, TabularPolicy, ValueTable};
use crate::lfa::{lsvi_backward_pass_true, HatBasis, StorageSpec, WeightTable};
use crate::rng::Stream;

/// Exact backward induction of a fixed policy on the true kernel:
/// `V^pi_h(x, xi) = r(x, pi, xi) + sum_xi' P_h(xi'|xi) V^pi_{h+1}(f(x, pi, xi'), xi')`.
pub fn exact_evaluate(mdp: &TabularExoMdp, policy: &TabularPolicy) -> Result<ValueTable> {
    if policy.action.dim() != (mdp.horizon, mdp.num_x, mdp.num_xi) {
        return Err(Error::dims("policy shape does not match the MDP"));
    }
    let (h_len, nx, nxi) = (mdp.horizon, mdp.num_x, mdp.num_xi);
    let mut v = Array3::zeros((h_len + 1, nx, nxi));
    for h in (0..h_len).rev() {
        for x in 0..nx {
            for xi in 0..nxi {
                let a = policy.act(h, x, xi);
                let mut val = mdp.reward_at(x, a, xi);
                if h + 1 < h_len {
                    let row = mdp.true_kernel.row(h, xi);
                    for xi_next in 0..nxi {
                        let x_next = mdp.next_x(x, a, xi_next);
                        val += row[xi_next] * v[[h + 1, x_next, xi_next]];
                    }
                }
                v[[h, x, xi]] = val;
            }
        }
    }
    Ok(ValueTable { v })
}

/// How stage-1 value gaps are aggregated into a regret number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegretMode {
    /// Sum of `V*_1 - V^pi_1` over every initial `(x, xi)` pair.
    #[default]
    Summed,
    /// Single-state gap at a designated start state.
    Fixed { x1: usize, xi1: usize },
}

/// Stage-1 regret of `policy` against a precomputed optimal value table
/// (from planning on the true kernel).
pub fn instantaneous_regret(
    mdp: &TabularExoMdp,
    policy: &TabularPolicy,
    v_star: &ValueTable,
    mode: RegretMode,
) -> Result<f64> {
    let v_pi = exact_evaluate(mdp, policy)?;
    Ok(regret_from_tables(v_star, &v_pi, mode))
}

/// Gap between two stage-1 value tables under the given mode.
pub fn regret_from_tables(v_star: &ValueTable, v_pi: &ValueTable, mode: RegretMode) -> f64 {
    let star = v_star.stage1();
    let pi = v_pi.stage1();
    match mode {
        RegretMode::Summed => star.iter().zip(pi.iter()).map(|(s, p)| s - p).sum(),
        RegretMode::Fixed { x1, xi1 } => star[[x1, xi1]] - pi[[x1, xi1]],
    }
}

/// Mean over transition stages of the Frobenius norm of the row-matrix
/// difference between an estimated and the true kernel.
pub fn model_error_frobenius(estimate: &ExoKernel, truth: &ExoKernel) -> Result<f64> {
    if estimate.probs().dim() != truth.probs().dim() {
        return Err(Error::dims(format!(
            "kernel shapes differ: {:?} vs {:?}",
            estimate.probs().dim(),
            truth.probs().dim()
        )));
    }
    let stages = estimate.transition_stages();
    if stages == 0 {
        return Ok(0.0);
    }
    let mut total = 0.0;
    for h in 0..stages {
        let diff_sq: f64 = estimate
            .probs()
            .index_axis(ndarray::Axis(0), h)
            .iter()
            .zip(truth.probs().index_axis(ndarray::Axis(0), h).iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        total += diff_sq.sqrt();
    }
    Ok(total / stages as f64)
}

/// Dense-anchor comparator for storage regret: an LSVI pass on the true
/// price kernel with a grid four times finer than the learner's.
#[derive(Debug, Clone)]
pub struct StorageOracle {
    pub basis: HatBasis,
    pub weights: WeightTable,
}

/// Oracle anchor count relative to the learner's grid.
pub const ORACLE_ANCHOR_FACTOR: usize = 4;

pub fn make_storage_oracle(spec: &StorageSpec, learner_anchors: usize) -> Result<StorageOracle> {
    let basis = HatBasis::uniform(ORACLE_ANCHOR_FACTOR * learner_anchors, spec.capacity)?;
    let weights = lsvi_backward_pass_true(spec, &basis, &spec.price_kernel)?;
    Ok(StorageOracle { basis, weights })
}

/// Replays the greedy policy induced by `weights` along a fixed price
/// trace and returns the episode return. Deterministic given the trace.
pub fn storage_rollout(
    spec: &StorageSpec,
    basis: &HatBasis,
    weights: &WeightTable,
    x1: f64,
    trace: &crate::exo::ExoTrace,
) -> Result<f64> {
    if trace.len() != spec.horizon {
        return Err(Error::dims("price trace length must equal the horizon"));
    }
    let mut x = x1.clamp(0.0, spec.capacity);
    let mut total = 0.0;
    for (h, &xi) in trace.xi.iter().enumerate() {
        let choice = crate::lfa::lsvi_greedy_action(spec, basis, weights.stage(h, xi), x, xi)?;
        total += spec.reward(x, choice.action, xi);
        let x_post = spec.post_decision(x, choice.action)?;
        x = spec.pre_decision(x_post);
    }
    Ok(total)
}

/// Paired Monte-Carlo regret estimate of a storage policy against the
/// dense-anchor oracle, on shared price traces (common random numbers).
#[derive(Debug, Clone, Copy)]
pub struct StorageRegretEstimate {
    pub mean_return: f64,
    pub oracle_return: f64,
    /// `oracle_return - mean_return`.
    pub mean_regret: f64,
    /// Standard error of the paired per-trace regret.
    pub std_error: f64,
}

/// Estimates the mean return gap between the oracle policy and the greedy
/// policy induced by `weights`, over `num_rollouts` shared price traces
/// drawn from the true kernel starting at `x1` with a uniform initial
/// price.
pub fn evaluate_storage_policy(
    spec: &StorageSpec,
    basis: &HatBasis,
    weights: &WeightTable,
    oracle: &StorageOracle,
    x1: f64,
    num_rollouts: usize,
    rng: &mut Stream,
) -> Result<StorageRegretEstimate> {
    if num_rollouts == 0 {
        return Err(Error::invalid("num_rollouts must be at least 1"));
    }
    let traces = sample_price_traces(spec, num_rollouts, rng)?;
    evaluate_storage_policy_on_traces(spec, basis, weights, oracle, x1, &traces)
}

/// Draws `n` price traces from the true kernel with uniform initial price.
pub fn sample_price_traces(
    spec: &StorageSpec,
    n: usize,
    rng: &mut Stream,
) -> Result<Vec<crate::exo::ExoTrace>> {
    let r = spec.price_kernel.num_xi();
    let init = ndarray::Array1::from_elem(r, 1.0 / r as f64);
    sample_price_traces_with_init(spec, &init, n, rng)
}

/// Draws `n` price traces with a caller-supplied initial distribution.
pub fn sample_price_traces_with_init(
    spec: &StorageSpec,
    init: &ndarray::Array1<f64>,
    n: usize,
    rng: &mut Stream,
) -> Result<Vec<crate::exo::ExoTrace>> {
    if init.len() != spec.price_kernel.num_xi() {
        return Err(Error::dims(
            "initial price distribution length mismatch".to_string(),
        ));
    }
    (0..n)
        .map(|_| {
            let xi1 = crate::exo::sample_initial_xi(init, rng);
            spec.price_kernel.sample_trace(xi1, rng)
        })
        .collect()
}

/// Same as [`evaluate_storage_policy`] but on a caller-supplied trace set,
/// letting repeated evaluations share one fixed set of traces.
pub fn evaluate_storage_policy_on_traces(
    spec: &StorageSpec,
    basis: &HatBasis,
    weights: &WeightTable,
    oracle: &StorageOracle,
    x1: f64,
    traces: &[crate::exo::ExoTrace],
) -> Result<StorageRegretEstimate> {
    if traces.is_empty() {
        return Err(Error::invalid("need at least one evaluation trace"));
    }
    let mut diffs = Vec::with_capacity(traces.len());
    let mut policy_total = 0.0;
    let mut oracle_total = 0.0;
    for trace in traces {
        let ret = storage_rollout(spec, basis, weights, x1, trace)?;
        let opt = storage_rollout(spec, &oracle.basis, &oracle.weights, x1, trace)?;
        policy_total += ret;
        oracle_total += opt;
        diffs.push(opt - ret);
    }
    let n = traces.len() as f64;
    let mean_regret = diffs.iter().sum::<f64>() / n;
    let var = if diffs.len() > 1 {
        diffs
            .iter()
            .map(|d| (d - mean_regret) * (d - mean_regret))
            .sum::<f64>()
            / (n - 1.0)
    } else {
        0.0
    };
    Ok(StorageRegretEstimate {
        mean_return: policy_total / n,
        oracle_return: oracle_total / n,
        mean_regret,
        std_error: (var / n).sqrt(),
    })
}
