//! Regret comparison on the random tabular benchmark: plug-in planning
//! (pto) against its optimistic variant (pto_opt) and the subsampled
//! estimate (pto_lite).
//!
//! Writes runs.csv, a metadata sidecar, and SVG curves into
//! `out/tabular_regret/`. Run with:
//!
//! ```bash
//! cargo run --release --example tabular_regret
//! ```

use std::path::Path;

use exomdp::harness::{
    render_plots, run_tabular_experiment, write_csv, Algorithm, ExperimentConfig, ExperimentKind,
};

fn main() -> exomdp::Result<()> {
    let mut cfg = ExperimentConfig::default_for(ExperimentKind::Tabular);
    cfg.algorithms = vec![Algorithm::Pto, Algorithm::PtoOpt, Algorithm::PtoLite];
    cfg.episodes = Some(250);
    cfg.seeds = (0..10).collect();
    cfg.materialize()?;

    let records = run_tabular_experiment(&cfg)?;
    let out = Path::new("out/tabular_regret");
    write_csv(&cfg, &records, &out.join("runs.csv"))?;
    render_plots(&records, out)?;

    let last = cfg.episodes.unwrap();
    for algo in &cfg.algorithms {
        let finals: Vec<f64> = records
            .iter()
            .filter(|r| r.algorithm == *algo && r.episode == last)
            .map(|r| r.cumulative_regret)
            .collect();
        let mean = finals.iter().sum::<f64>() / finals.len() as f64;
        println!(
            "{algo:>8}: mean cumulative regret at K={last} over {} seeds = {mean:.2}",
            finals.len()
        );
    }
    println!("curves written to {}", out.display());
    Ok(())
}
