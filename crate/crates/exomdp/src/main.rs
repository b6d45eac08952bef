//! Thin CLI over the experiment harness. Each subcommand loads (or
//! defaults) a JSON config, applies the flag overrides, runs the
//! experiment, and writes `runs.csv`, its metadata sidecar, and SVG plots
//! into the output directory.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use exomdp::harness::{
    render_plots, run_experiment, run_peg_experiment_with_summary, write_csv, ExperimentConfig,
    ExperimentKind, RunRecord,
};
use exomdp::Error;

#[derive(Parser)]
#[command(name = "exomdp", version, about = "Exo-MDP regret benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Predict-then-optimize vs optimistic planning on random tabular
    /// exo-MDPs.
    Tabular(RunArgs),
    /// Anchored LSVI on the storage-control benchmark.
    Storage(RunArgs),
    /// Follow-the-leader vs UCB under full feedback.
    Bandit(RunArgs),
    /// Pure-exploitation greedy play with linear regret.
    PegDemo(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON experiment config; defaults are used when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Seed range `a..b` (exclusive) or `a..=b` (inclusive).
    #[arg(long)]
    seeds: Option<String>,
    /// Episode (round) count override.
    #[arg(long)]
    episodes: Option<usize>,
    /// Skip SVG rendering.
    #[arg(long)]
    no_plots: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = match &cli.command {
        Command::Tabular(a) => (ExperimentKind::Tabular, a),
        Command::Storage(a) => (ExperimentKind::Storage, a),
        Command::Bandit(a) => (ExperimentKind::Bandit, a),
        Command::PegDemo(a) => (ExperimentKind::Peg, a),
    };
    match run(kind, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            match err {
                Error::Io { .. } => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}

fn run(kind: ExperimentKind, args: &RunArgs) -> Result<(), Error> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            let cfg = ExperimentConfig::from_json(&text)?;
            if cfg.experiment != kind {
                return Err(Error::config(
                    "experiment",
                    format!(
                        "config is for `{}` but the `{}` subcommand was invoked",
                        cfg.experiment.as_str(),
                        kind.as_str()
                    ),
                ));
            }
            cfg
        }
        None => ExperimentConfig::default_for(kind),
    };
    if let Some(spec) = &args.seeds {
        cfg.seeds = parse_seed_range(spec)?;
    }
    if let Some(episodes) = args.episodes {
        cfg.episodes = Some(episodes);
    }
    cfg.materialize()?;

    let records = if kind == ExperimentKind::Peg {
        let (records, summary) = run_peg_experiment_with_summary(&cfg)?;
        println!(
            "peg: {} runs, barrier frequency {:.4}, mean final regret {:.3}",
            summary.runs, summary.barrier_frequency, summary.mean_final_regret
        );
        records
    } else {
        run_experiment(&cfg)?
    };

    let csv_path = args.out.join("runs.csv");
    let meta_path = write_csv(&cfg, &records, &csv_path)?;
    println!("wrote {}", csv_path.display());
    println!("wrote {}", meta_path.display());
    if !args.no_plots {
        for path in render_plots(&records, &args.out)? {
            println!("wrote {}", path.display());
        }
    }
    print_summary(&records);
    Ok(())
}

/// Final-episode mean cumulative regret per algorithm, with a standard
/// error across seeds.
fn print_summary(records: &[RunRecord]) {
    let last_episode = records.iter().map(|r| r.episode).max().unwrap_or(0);
    let mut by_algo: std::collections::BTreeMap<&str, Vec<f64>> = Default::default();
    for r in records.iter().filter(|r| r.episode == last_episode) {
        by_algo
            .entry(r.algorithm.as_str())
            .or_default()
            .push(r.cumulative_regret);
    }
    for (algo, vals) in by_algo {
        let n = vals.len() as f64;
        let mean = vals.iter().sum::<f64>() / n;
        let var = if vals.len() > 1 {
            vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        println!(
            "{algo}: mean cumulative regret at episode {last_episode} = {mean:.4} (SE {:.4}, {} seeds)",
            (var / n).sqrt(),
            vals.len()
        );
    }
}

fn parse_seed_range(spec: &str) -> Result<Vec<u64>, Error> {
    let bad = || Error::config("seeds", format!("cannot parse seed range `{spec}`"));
    let (lo, hi, inclusive) = if let Some((a, b)) = spec.split_once("..=") {
        (a, b, true)
    } else if let Some((a, b)) = spec.split_once("..") {
        (a, b, false)
    } else {
        // A single number means one seed.
        let s: u64 = spec.trim().parse().map_err(|_| bad())?;
        return Ok(vec![s]);
    };
    let lo: u64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: u64 = hi.trim().parse().map_err(|_| bad())?;
    let seeds: Vec<u64> = if inclusive {
        (lo..=hi).collect()
    } else {
        (lo..hi).collect()
    };
    if seeds.is_empty() {
        return Err(Error::config("seeds", "seed range is empty"));
    }
    Ok(seeds)
}
