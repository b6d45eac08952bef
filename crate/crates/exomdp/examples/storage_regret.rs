//! Storage-control regret with anchored least-squares value iteration:
//! greedy plug-in (lsvi_pe) against the optimistic model (lsvi_opt) and
//! the subsampled estimate (lsvi_lite), over three horizon lengths.
//!
//! ```bash
//! cargo run --release --example storage_regret
//! ```

use std::path::PathBuf;

use exomdp::harness::{
    render_plots, run_storage_experiment, write_csv, Algorithm, ExperimentConfig, ExperimentKind,
};

fn main() -> exomdp::Result<()> {
    for horizon in [6usize, 8, 10] {
        let mut cfg = ExperimentConfig::default_for(ExperimentKind::Storage);
        cfg.algorithms = vec![Algorithm::LsviPe, Algorithm::LsviOpt, Algorithm::LsviLite];
        cfg.episodes = Some(100);
        cfg.seeds = (0..10).collect();
        cfg.storage.horizon = Some(horizon);
        cfg.materialize()?;

        let records = run_storage_experiment(&cfg)?;
        let out = PathBuf::from(format!("out/storage_regret/h{horizon}"));
        write_csv(&cfg, &records, &out.join("runs.csv"))?;
        render_plots(&records, &out)?;

        println!("H = {horizon}:");
        for algo in &cfg.algorithms {
            let finals: Vec<f64> = records
                .iter()
                .filter(|r| r.algorithm == *algo && r.episode == 100)
                .map(|r| r.cumulative_regret)
                .collect();
            let mean = finals.iter().sum::<f64>() / finals.len() as f64;
            println!("  {algo:>9}: mean cumulative regret at K=100 = {mean:.2}");
        }
    }
    println!("curves written to out/storage_regret/");
    Ok(())
}
