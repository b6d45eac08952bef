//! On instances small enough to enumerate every deterministic policy,
//! three routes to the optimum coincide: backward induction on the true
//! kernel, exhaustive search scored by exact evaluation, and hindsight
//! replay over sampled traces (the follow-the-leader planner).
//!
//! ```bash
//! cargo run --release --example exhaustive_oracle
//! ```

use exomdp::environments::make_tabular_benchmark;
use exomdp::evaluation::exact_evaluate;
use exomdp::exo::simulate_episode;
use exomdp::planner::{enumerate_policies, ftl_erm_plan, pto_plan};
use exomdp::rng::{substream, tag};

fn main() -> exomdp::Result<()> {
    let mut env_rng = substream(11, &[tag::ENV]);
    let mdp = make_tabular_benchmark(2, 2, 2, 2, 1.0, &mut env_rng)?;

    // Route 1: dynamic programming on the true kernel.
    let planned = pto_plan(&mdp, &mdp.true_kernel)?;

    // Route 2: brute force over all 2^(2*2*2) = 256 deterministic
    // policies, scored by exact evaluation.
    let mut best = f64::NEG_INFINITY;
    for policy in enumerate_policies(&mdp) {
        let v = exact_evaluate(&mdp, &policy)?;
        best = best.max(v.v[[0, 0, 0]]);
    }

    // Route 3: hindsight replay over sampled traces.
    let behavior = exomdp::exo::TabularPolicy::constant(2, 2, 2, 0);
    let mut traces = Vec::new();
    let mut rng = substream(11, &[tag::TRACE]);
    for _ in 0..20_000 {
        traces.push(simulate_episode(&mdp, &behavior, 0, 0, &mut rng)?.trace);
    }
    let ftl = ftl_erm_plan(&mdp, &traces, 0, 1 << 20)?;
    let ftl_value = exact_evaluate(&mdp, &ftl)?.v[[0, 0, 0]];

    println!("tiny instance (2 states, 2 exogenous, 2 actions, horizon 2), start (0, 0):");
    println!(
        "  dynamic programming on true kernel: {:.6}",
        planned.v.v[[0, 0, 0]]
    );
    println!("  exhaustive policy enumeration:      {best:.6}");
    println!("  hindsight replay over 20k traces:   {ftl_value:.6}");
    Ok(())
}
