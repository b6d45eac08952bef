//! One backward pass of the storage planner, pulled apart: the action
//! breakpoints of the piecewise-linear greedy objective, the exact
//! maximizer, and the resulting anchor weights per stage and price.
//!
//! ```bash
//! cargo run --release --example storage_planning
//! ```

use exomdp::environments::{make_storage_benchmark, StorageOverrides};
use exomdp::lfa::{lsvi_backward_pass_true, lsvi_greedy_action, storage_action_breakpoints};

fn main() -> exomdp::Result<()> {
    let (spec, basis) = make_storage_benchmark(6, 10, 10, &StorageOverrides::default())?;

    // The greedy objective a -> r(x, a, xi) + phi(f^a(x, a))^T w is
    // piecewise linear; its maximum sits on a breakpoint.
    let x = 3.7;
    let pts = storage_action_breakpoints(&spec, &basis, x);
    println!("action breakpoints at x = {x}: {pts:.3?}");

    let weights = lsvi_backward_pass_true(&spec, &basis, &spec.price_kernel)?;
    println!("\nanchor weights w[h][xi][n] from a pass on the true kernel:");
    for h in [0usize, 2, 4, 5] {
        let w = weights.stage(h, 4);
        println!(
            "  h = {}, price index 4: [{}]",
            h + 1,
            w.iter()
                .map(|v| format!("{v:.2}"))
                .collect::<Vec<_>>()
                .join(", ")
        );
    }

    println!("\ngreedy actions at stage 1 across prices (x = {x}):");
    for xi in 0..spec.num_prices() {
        let choice = lsvi_greedy_action(&spec, &basis, weights.stage(0, xi), x, xi)?;
        println!(
            "  price {:>4.1}: action {:>6.3}, q {:>7.3}",
            spec.prices[xi], choice.action, choice.q
        );
    }
    Ok(())
}
