//! Kernel estimation mechanics: empirical count ratios with uniform
//! fallback, Frobenius error decay with data, the optimistic L1-ball row,
//! and the confidence radius that drives it.
//!
//! ```bash
//! cargo run --release --example kernel_estimation
//! ```

use exomdp::environments::make_tabular_benchmark;
use exomdp::evaluation::model_error_frobenius;
use exomdp::kernels::{
    bonus_radius, estimate_kernel, optimistic_row, Memory, OptimismConfig, TransitionCounts,
};
use exomdp::rng::{substream, tag};

fn main() -> exomdp::Result<()> {
    let mut env_rng = substream(7, &[tag::ENV]);
    let mdp = make_tabular_benchmark(5, 5, 3, 5, 1.0, &mut env_rng)?;

    let mut counts = TransitionCounts::new(5, 5, Memory::Markov);
    let mut rng = substream(7, &[tag::TRACE]);
    println!("episodes   frobenius model error");
    for k in 1..=500 {
        let trace = mdp.true_kernel.sample_trace(k as usize % 5, &mut rng)?;
        counts.update(&trace)?;
        if [1, 5, 20, 50, 200, 500].contains(&k) {
            let est = estimate_kernel(&counts);
            let err = model_error_frobenius(est.kernel(), &mdp.true_kernel)?;
            println!("{k:>8}   {err:.4}");
        }
    }

    // The optimistic row tilts probability mass toward high-value states
    // within an L1 ball whose radius shrinks as the row accumulates data.
    let cfg = OptimismConfig::new(0.3, 0.01, 250, 5)?;
    let est = estimate_kernel(&counts);
    let row = est.kernel().row(0, 2).to_vec();
    let values = vec![0.1, 0.9, 0.3, 0.7, 0.5];
    println!("\nrow (h=1, xi=2):       {row:.3?}");
    for n in [1u64, 10, 100, 1000] {
        let bonus = bonus_radius(&cfg, n);
        let tilted = optimistic_row(&row, &values, bonus);
        let gain: f64 = tilted.iter().zip(&values).map(|(p, v)| p * v).sum::<f64>()
            - row.iter().zip(&values).map(|(p, v)| p * v).sum::<f64>();
        println!(
            "count {n:>5}: bonus {bonus:.3}, optimistic row {tilted:.3?}, objective gain {gain:.4}"
        );
    }
    Ok(())
}
