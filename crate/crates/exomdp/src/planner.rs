//! Backward dynamic programming for tabular exo-MDPs: plug-in planning on
//! an estimated kernel (the predict-then-optimize route), its optimistic
//! variant, and an exhaustive hindsight-replay planner usable as an oracle
//! on tiny instances.

use ndarray::{Array3, Array4};

use crate::error::{Error, Result};
use crate::exo::{hindsight_value, ExoKernel, ExoTrace, TabularExoMdp, TabularPolicy, ValueTable};
use crate::kernels::{bonus_radius, optimistic_row, EmpiricalKernel, OptimismConfig};

/// Output of a planning pass: greedy policy, Q tensor, and value table.
///
/// Invariants: `v[[h, x, xi]] = max_a q[[h, x, xi, a]]` and the policy picks
/// the lowest maximizing action index.
#[derive(Debug, Clone)]
pub struct PlannerOutput {
    pub policy: TabularPolicy,
    /// `q[[h, x, xi, a]]`.
    pub q: Array4<f64>,
    pub v: ValueTable,
}

fn check_kernel_dims(mdp: &TabularExoMdp, kernel: &ExoKernel) -> Result<()> {
    if kernel.horizon() != mdp.horizon || kernel.num_xi() != mdp.num_xi {
        return Err(Error::dims(format!(
            "kernel (H = {}, Xi = {}) does not match MDP (H = {}, Xi = {})",
            kernel.horizon(),
            kernel.num_xi(),
            mdp.horizon,
            mdp.num_xi
        )));
    }
    Ok(())
}

/// Exact backward induction on the supplied kernel:
/// `Q_h(x, xi, a) = r(x, a, xi) + sum_xi' P_h(xi'|xi) V_{h+1}(f(x, a, xi'), xi')`
/// with zero continuation at the final stage. Ties in the argmax go to the
/// lowest action index.
pub fn pto_plan(mdp: &TabularExoMdp, kernel: &ExoKernel) -> Result<PlannerOutput> {
    check_kernel_dims(mdp, kernel)?;
    plan_with(mdp, |h, x, _a, xi, cont_by_next_x: &Array3<f64>| {
        // cont_by_next_x is V_{h+1}; expectation over the kernel row.
        let row = kernel.row(h, xi);
        let mut acc = 0.0;
        for xi_next in 0..mdp.num_xi {
            let x_next = mdp.next_x(x, _a, xi_next);
            acc += row[xi_next] * cont_by_next_x[[h + 1, x_next, xi_next]];
        }
        acc
    })
}

/// Backward induction where every expectation over the next exogenous state
/// is replaced by its optimistic L1-ball version. The optimistic row is
/// recomputed per `(h, x, xi, a)` because the continuation value vector
/// `V_{h+1}(f(x, a, .), .)` depends on `(x, a)`.
pub fn pto_opt_plan(
    mdp: &TabularExoMdp,
    estimate: &EmpiricalKernel,
    cfg: &OptimismConfig,
) -> Result<PlannerOutput> {
    check_kernel_dims(mdp, estimate.kernel())?;
    let kernel = estimate.kernel();
    plan_with(mdp, |h, x, a, xi, v: &Array3<f64>| {
        let row = kernel.row(h, xi);
        let values: Vec<f64> = (0..mdp.num_xi)
            .map(|xi_next| v[[h + 1, mdp.next_x(x, a, xi_next), xi_next]])
            .collect();
        let bonus = bonus_radius(cfg, estimate.row_total(h, xi));
        let q_row = optimistic_row(row.as_slice().expect("contiguous row"), &values, bonus);
        q_row.iter().zip(&values).map(|(p, v)| p * v).sum()
    })
}

/// Shared backward-induction skeleton; `continuation` supplies the
/// expected next-stage value for `(h, x, a, xi)` given the value table.
fn plan_with<F>(mdp: &TabularExoMdp, continuation: F) -> Result<PlannerOutput>
where
    F: Fn(usize, usize, usize, usize, &Array3<f64>) -> f64,
{
    let (h_len, nx, nxi, na) = (mdp.horizon, mdp.num_x, mdp.num_xi, mdp.num_a);
    let mut v = Array3::zeros((h_len + 1, nx, nxi));
    let mut q = Array4::zeros((h_len, nx, nxi, na));
    let mut action = Array3::zeros((h_len, nx, nxi));

    for h in (0..h_len).rev() {
        for x in 0..nx {
            for xi in 0..nxi {
                let mut best = f64::NEG_INFINITY;
                let mut best_a = 0usize;
                for a in 0..na {
                    let mut val = mdp.reward_at(x, a, xi);
                    // The final stage has no further exogenous draw.
                    if h + 1 < h_len {
                        val += continuation(h, x, a, xi, &v);
                    }
                    q[[h, x, xi, a]] = val;
                    if val > best {
                        best = val;
                        best_a = a;
                    }
                }
                v[[h, x, xi]] = best;
                action[[h, x, xi]] = best_a;
            }
        }
    }

    Ok(PlannerOutput {
        policy: TabularPolicy { action },
        q,
        v: ValueTable { v },
    })
}

/// Exhaustive follow-the-leader planning by hindsight replay: scores every
/// deterministic policy by its mean replay value over `traces` from `x1`
/// and returns the best (lexicographically smallest on ties). Refuses when
/// the policy space exceeds `policy_cap`.
pub fn ftl_erm_plan(
    mdp: &TabularExoMdp,
    traces: &[ExoTrace],
    x1: usize,
    policy_cap: u128,
) -> Result<TabularPolicy> {
    if traces.is_empty() {
        return Err(Error::invalid("ftl_erm_plan needs at least one trace"));
    }
    if x1 >= mdp.num_x {
        return Err(Error::invalid(format!("x1 = {x1} out of range")));
    }
    let cells = mdp.horizon * mdp.num_x * mdp.num_xi;
    let count = policy_space_size(mdp.num_a, cells);
    match count {
        Some(n) if n <= policy_cap => {}
        _ => {
            let required = count
                .map(|n| n.to_string())
                .unwrap_or_else(|| format!("{}^{}", mdp.num_a, cells));
            return Err(Error::PolicyCapExceeded {
                required,
                cap: policy_cap,
            });
        }
    }
    let count = count.expect("checked above") as u64;

    let mut best_policy = None;
    let mut best_score = f64::NEG_INFINITY;
    let mut digits = vec![0usize; cells];

    for _ in 0..count {
        let policy = policy_from_digits(mdp, &digits);
        let mut total = 0.0;
        for trace in traces {
            total += hindsight_value(mdp, &policy, x1, trace)?;
        }
        let score = total / traces.len() as f64;
        // Strict improvement keeps the first (lexicographically smallest)
        // maximizer.
        if score > best_score {
            best_score = score;
            best_policy = Some(policy);
        }
        // Increment the mixed-radix counter, most significant digit first.
        for d in digits.iter_mut().rev() {
            *d += 1;
            if *d < mdp.num_a {
                break;
            }
            *d = 0;
        }
    }
    Ok(best_policy.expect("at least one policy enumerated"))
}

/// `num_a ^ cells` if it fits in `u128`.
pub fn policy_space_size(num_a: usize, cells: usize) -> Option<u128> {
    let base = num_a as u128;
    let mut acc: u128 = 1;
    for _ in 0..cells {
        acc = acc.checked_mul(base)?;
    }
    Some(acc)
}

fn policy_from_digits(mdp: &TabularExoMdp, digits: &[usize]) -> TabularPolicy {
    let mut action = Array3::zeros((mdp.horizon, mdp.num_x, mdp.num_xi));
    let mut i = 0;
    for h in 0..mdp.horizon {
        for x in 0..mdp.num_x {
            for xi in 0..mdp.num_xi {
                action[[h, x, xi]] = digits[i];
                i += 1;
            }
        }
    }
    TabularPolicy { action }
}

/// Iterates every deterministic policy of `mdp` (oracle helper for tiny
/// instances; the caller is responsible for keeping the space small).
pub fn enumerate_policies(mdp: &TabularExoMdp) -> impl Iterator<Item = TabularPolicy> + '_ {
    let cells = mdp.horizon * mdp.num_x * mdp.num_xi;
    let count = policy_space_size(mdp.num_a, cells).expect("policy space fits u128") as u64;
    let mut digits = vec![0usize; cells];
    (0..count).map(move |_| {
        let policy = policy_from_digits(mdp, &digits);
        for d in digits.iter_mut().rev() {
            *d += 1;
            if *d < mdp.num_a {
                break;
            }
            *d = 0;
        }
        policy
    })
}
