//! Numerical check of the feature-transport condition: one post-decision
//! step moves each anchor's features by a row-stochastic interpolation
//! matrix, and on the benchmark (unit leakage, hat basis) its largest
//! singular value stays at or below one.
//!
//! ```bash
//! cargo run --release --example transport_check
//! ```

use exomdp::environments::{make_storage_benchmark, StorageOverrides};
use exomdp::lfa::{greedy_anchor_actions, lsvi_backward_pass_true, transport_diagnostic};

fn main() -> exomdp::Result<()> {
    let (spec, basis) = make_storage_benchmark(6, 10, 10, &StorageOverrides::default())?;
    let weights = lsvi_backward_pass_true(&spec, &basis, &spec.price_kernel)?;

    // Trained weights induce greedy per-anchor actions; transport is
    // checked for every realized next price at stage 2.
    let mut worst = 0.0f64;
    println!("next price   sigma_max   min row sum");
    for xi_next in 0..spec.num_prices() {
        let actions = greedy_anchor_actions(&spec, &basis, weights.stage(1, xi_next), xi_next)?;
        let diag = transport_diagnostic(&spec, &basis, &actions, xi_next)?;
        let min_row = diag.row_sums.iter().cloned().fold(f64::INFINITY, f64::min);
        println!(
            "{:>10.1}   {:>9.6}   {:>11.6}",
            spec.prices[xi_next], diag.sigma_max, min_row
        );
        worst = worst.max(diag.sigma_max);
    }
    println!("\nmax sigma_max across prices: {worst:.6} (non-expansive iff <= 1)");
    Ok(())
}
