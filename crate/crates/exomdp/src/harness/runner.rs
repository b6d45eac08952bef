//! Episode loops. Each (algorithm, seed) pair is an independent worker;
//! results merge deterministically by sort key. The protocol per episode
//! is plan-then-act: the committed policy's regret and the current model
//! error are recorded before the episode's own trace updates the counts.

use ndarray::Array1;
use rayon::prelude::*;
use std::time::Instant;

use crate::bandit::{run_exo_bandit, run_peg_series, BanditAlgo, ExoBandit, PegInstance};
use crate::environments::{make_storage_benchmark, make_tabular_benchmark, StorageOverrides};
use crate::error::{Error, Result};
use crate::evaluation::{
    instantaneous_regret, make_storage_oracle, model_error_frobenius,
    sample_price_traces_with_init, storage_rollout,
};
use crate::exo::{sample_initial_xi, simulate_episode, ExoTrace};
use crate::kernels::{
    estimate_kernel, subsample_counts, Memory, OptimismConfig, SubsampleConfig, TransitionCounts,
};
use crate::lfa::lsvi_backward_pass;
use crate::planner::{ftl_erm_plan, pto_opt_plan, pto_plan};
use crate::rng::{derive_key, substream, tag};

use super::config::{Algorithm, ExperimentConfig, ExperimentKind};
use super::RunRecord;

/// Dispatches on the experiment kind. The config must be materialized.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<RunRecord>> {
    cfg.validate()?;
    match cfg.experiment {
        ExperimentKind::Tabular => run_tabular_experiment(cfg),
        ExperimentKind::Storage => run_storage_experiment(cfg),
        ExperimentKind::Bandit => run_bandit_experiment(cfg),
        ExperimentKind::Peg => run_peg_experiment(cfg),
    }
}

fn sort_records(mut records: Vec<RunRecord>) -> Vec<RunRecord> {
    records.sort_by(|a, b| {
        a.algorithm
            .as_str()
            .cmp(b.algorithm.as_str())
            .then(a.seed.cmp(&b.seed))
            .then(a.episode.cmp(&b.episode))
    });
    records
}

/// Predict-then-optimize episode loop on the random tabular benchmark.
/// Each seed draws its own environment instance; all algorithms sharing a
/// seed see the same instance and the same exogenous traces.
pub fn run_tabular_experiment(cfg: &ExperimentConfig) -> Result<Vec<RunRecord>> {
    cfg.validate()?;
    let pairs: Vec<(Algorithm, u64)> = cfg
        .algorithms
        .iter()
        .flat_map(|&a| cfg.seeds.iter().map(move |&s| (a, s)))
        .collect();
    let nested: Vec<Vec<RunRecord>> = pairs
        .par_iter()
        .map(|&(algo, seed)| run_one_tabular(cfg, algo, seed))
        .collect::<Result<_>>()?;
    Ok(sort_records(nested.into_iter().flatten().collect()))
}

fn run_one_tabular(cfg: &ExperimentConfig, algo: Algorithm, seed: u64) -> Result<Vec<RunRecord>> {
    let t = &cfg.tabular;
    let (nx, nxi, na, horizon) = (
        t.num_x.unwrap(),
        t.num_xi.unwrap(),
        t.num_a.unwrap(),
        t.horizon.unwrap(),
    );
    let episodes = cfg.episodes.unwrap();
    let memory = Memory::from_order(cfg.memory.unwrap())?;
    let regret_mode = cfg.regret_mode.unwrap();
    let timing = cfg.record_timing.unwrap();
    let x1 = t.x1.unwrap();

    let mut env_rng = substream(seed, &[tag::ENV]);
    let mdp = make_tabular_benchmark(
        nx,
        nxi,
        na,
        horizon,
        t.dirichlet_alpha.unwrap(),
        &mut env_rng,
    )?;
    let v_star = pto_plan(&mdp, &mdp.true_kernel)?.v;
    let opt_cfg = OptimismConfig::new(
        cfg.optimism_c.unwrap(),
        cfg.optimism_delta.unwrap(),
        episodes,
        nxi,
    )?;
    let xi_init = Array1::from(t.xi_init.clone().unwrap());

    let mut counts = TransitionCounts::new(horizon, nxi, memory);
    let mut traces: Vec<ExoTrace> = Vec::new();
    let mut cumulative = 0.0;
    let mut records = Vec::with_capacity(episodes);

    for k in 1..=episodes {
        let start = Instant::now();
        let estimate = estimate_kernel(&counts);
        let (policy, model_view) = match algo {
            Algorithm::Pto => {
                let out = pto_plan(&mdp, estimate.kernel())?;
                (out.policy, estimate.kernel().clone())
            }
            Algorithm::PtoOpt => {
                let out = pto_opt_plan(&mdp, &estimate, &opt_cfg)?;
                (out.policy, estimate.kernel().clone())
            }
            Algorithm::PtoLite => {
                let sub_cfg = SubsampleConfig::new(
                    cfg.subsample_ratio.unwrap(),
                    derive_key(seed, &[tag::ALGO, algo.stream_tag(), k as u64]),
                )?;
                let lite = estimate_kernel(&subsample_counts(&counts, &sub_cfg));
                let out = pto_plan(&mdp, lite.kernel())?;
                (out.policy, lite.kernel().clone())
            }
            Algorithm::FtlErm => {
                let policy = if traces.is_empty() {
                    // No data yet: fall back to planning on the uniform
                    // prior, matching the other learners' first episode.
                    pto_plan(&mdp, estimate.kernel())?.policy
                } else {
                    ftl_erm_plan(&mdp, &traces, x1, cfg.policy_cap.unwrap() as u128)?
                };
                (policy, estimate.kernel().clone())
            }
            other => {
                return Err(Error::config(
                    "algorithms",
                    format!("`{other}` is not a tabular algorithm"),
                ))
            }
        };

        let instant = instantaneous_regret(&mdp, &policy, &v_star, regret_mode)?;
        let model_error = model_error_frobenius(&model_view, &mdp.true_kernel)?;
        cumulative += instant;

        // Act: the episode's trace is keyed by (seed, episode) only, so it
        // is shared across algorithms.
        let mut trace_rng = substream(seed, &[tag::TRACE, k as u64]);
        let xi1 = sample_initial_xi(&xi_init, &mut trace_rng);
        let log = simulate_episode(&mdp, &policy, x1, xi1, &mut trace_rng)?;
        counts.update(&log.trace)?;
        traces.push(log.trace);

        records.push(RunRecord {
            algorithm: algo,
            seed,
            episode: k,
            instant_regret: instant,
            cumulative_regret: cumulative,
            model_error,
            wall_time_ms: if timing {
                start.elapsed().as_secs_f64() * 1e3
            } else {
                0.0
            },
        });
    }
    Ok(records)
}

/// Anchored LSVI episode loop on the storage benchmark. The environment is
/// deterministic given the config; seeds drive only the traces. Regret is
/// measured against a dense-anchor pass on the true kernel using one fixed
/// set of paired evaluation traces per seed.
pub fn run_storage_experiment(cfg: &ExperimentConfig) -> Result<Vec<RunRecord>> {
    cfg.validate()?;
    let s = &cfg.storage;
    let overrides = StorageOverrides {
        capacity: s.capacity,
        a_max: s.a_max,
        eta_plus: s.eta_plus,
        eta_minus: s.eta_minus,
        leakage: s.leakage,
        trans_cost: s.trans_cost,
        holding: s.holding,
        reward_sign: s.reward_sign,
        prices: None,
    };
    let (spec, basis) = make_storage_benchmark(
        s.horizon.unwrap(),
        s.num_prices.unwrap(),
        s.num_anchors.unwrap(),
        &overrides,
    )?;
    let oracle = make_storage_oracle(&spec, s.num_anchors.unwrap())?;

    let pairs: Vec<(Algorithm, u64)> = cfg
        .algorithms
        .iter()
        .flat_map(|&a| cfg.seeds.iter().map(move |&s| (a, s)))
        .collect();
    let nested: Vec<Vec<RunRecord>> = pairs
        .par_iter()
        .map(|&(algo, seed)| run_one_storage(cfg, &spec, &basis, &oracle, algo, seed))
        .collect::<Result<_>>()?;
    Ok(sort_records(nested.into_iter().flatten().collect()))
}

fn run_one_storage(
    cfg: &ExperimentConfig,
    spec: &crate::lfa::StorageSpec,
    basis: &crate::lfa::HatBasis,
    oracle: &crate::evaluation::StorageOracle,
    algo: Algorithm,
    seed: u64,
) -> Result<Vec<RunRecord>> {
    let s = &cfg.storage;
    let episodes = cfg.episodes.unwrap();
    let memory = Memory::from_order(cfg.memory.unwrap())?;
    let timing = cfg.record_timing.unwrap();
    let x1 = s.x1.unwrap();
    let r = spec.num_prices();
    let opt_cfg = OptimismConfig::new(
        cfg.optimism_c.unwrap(),
        cfg.optimism_delta.unwrap(),
        episodes,
        r,
    )?;

    let xi_init = Array1::from(s.xi_init.clone().unwrap());

    // Fixed evaluation traces, shared by every algorithm on this seed; the
    // comparator return per trace is computed once.
    let mut eval_rng = substream(seed, &[tag::EVAL]);
    let eval_traces =
        sample_price_traces_with_init(spec, &xi_init, s.eval_rollouts.unwrap(), &mut eval_rng)?;
    let oracle_returns: Vec<f64> = eval_traces
        .iter()
        .map(|t| storage_rollout(spec, &oracle.basis, &oracle.weights, x1, t))
        .collect::<Result<_>>()?;
    let mut counts = TransitionCounts::new(spec.horizon, r, memory);
    let mut cumulative = 0.0;
    let mut records = Vec::with_capacity(episodes);

    for k in 1..=episodes {
        let start = Instant::now();
        let estimate = estimate_kernel(&counts);
        let (weights, model_view) = match algo {
            Algorithm::LsviPe => {
                let w = lsvi_backward_pass(spec, basis, &estimate, None)?;
                (w, estimate.kernel().clone())
            }
            Algorithm::LsviOpt => {
                let w = lsvi_backward_pass(spec, basis, &estimate, Some(&opt_cfg))?;
                (w, estimate.kernel().clone())
            }
            Algorithm::LsviLite => {
                let sub_cfg = SubsampleConfig::new(
                    cfg.subsample_ratio.unwrap(),
                    derive_key(seed, &[tag::ALGO, algo.stream_tag(), k as u64]),
                )?;
                let lite = estimate_kernel(&subsample_counts(&counts, &sub_cfg));
                let w = lsvi_backward_pass(spec, basis, &lite, None)?;
                (w, lite.kernel().clone())
            }
            other => {
                return Err(Error::config(
                    "algorithms",
                    format!("`{other}` is not a storage algorithm"),
                ))
            }
        };

        let mut regret_sum = 0.0;
        for (trace, oracle_ret) in eval_traces.iter().zip(&oracle_returns) {
            let ret = storage_rollout(spec, basis, &weights, x1, trace)?;
            regret_sum += oracle_ret - ret;
        }
        let instant = regret_sum / eval_traces.len() as f64;
        let model_error = model_error_frobenius(&model_view, &spec.price_kernel)?;
        cumulative += instant;

        let mut trace_rng = substream(seed, &[tag::TRACE, k as u64]);
        let xi1 = sample_initial_xi(&xi_init, &mut trace_rng);
        let trace = spec.price_kernel.sample_trace(xi1, &mut trace_rng)?;
        counts.update(&trace)?;

        records.push(RunRecord {
            algorithm: algo,
            seed,
            episode: k,
            instant_regret: instant,
            cumulative_regret: cumulative,
            model_error,
            wall_time_ms: if timing {
                start.elapsed().as_secs_f64() * 1e3
            } else {
                0.0
            },
        });
    }
    Ok(records)
}

/// Full-feedback bandit rounds. Both selectors see the same exogenous
/// draws on a given seed.
pub fn run_bandit_experiment(cfg: &ExperimentConfig) -> Result<Vec<RunRecord>> {
    cfg.validate()?;
    let b = &cfg.bandit;
    let arms = b.arms.unwrap();
    let mut means = vec![b.base_mean.unwrap(); arms];
    means[0] += b.gap.unwrap();
    let bandit = ExoBandit::bernoulli_product(&means, b.sigma.unwrap())?;
    let episodes = cfg.episodes.unwrap();
    let timing = cfg.record_timing.unwrap();

    let pairs: Vec<(Algorithm, u64)> = cfg
        .algorithms
        .iter()
        .flat_map(|&a| cfg.seeds.iter().map(move |&s| (a, s)))
        .collect();
    let nested: Vec<Vec<RunRecord>> = pairs
        .par_iter()
        .map(|&(algo, seed)| {
            let start = Instant::now();
            let kind = match algo {
                Algorithm::Ftl => BanditAlgo::Ftl,
                Algorithm::Ucb => BanditAlgo::Ucb,
                other => {
                    return Err(Error::config(
                        "algorithms",
                        format!("`{other}` is not a bandit algorithm"),
                    ))
                }
            };
            let mut rng = substream(seed, &[tag::TRACE]);
            let rounds = run_exo_bandit(&bandit, kind, episodes, &mut rng)?;
            let per_round_ms = if timing {
                start.elapsed().as_secs_f64() * 1e3 / episodes as f64
            } else {
                0.0
            };
            let mut cumulative = 0.0;
            Ok(rounds
                .iter()
                .enumerate()
                .map(|(i, round)| {
                    cumulative += round.instant_regret;
                    RunRecord {
                        algorithm: algo,
                        seed,
                        episode: i + 1,
                        instant_regret: round.instant_regret,
                        cumulative_regret: cumulative,
                        model_error: round.max_mean_error,
                        wall_time_ms: per_round_ms,
                    }
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    Ok(sort_records(nested.into_iter().flatten().collect()))
}

/// Pure-exploitation-greedy demo: each seed averages `runs_per_seed`
/// independent greedy runs round by round, making the linear regret growth
/// visible in the mean curve. Barrier-event frequency is reported by the
/// returned summary.
pub fn run_peg_experiment(cfg: &ExperimentConfig) -> Result<Vec<RunRecord>> {
    Ok(run_peg_experiment_with_summary(cfg)?.0)
}

/// Summary statistics of a greedy-demo run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PegSummary {
    pub runs: usize,
    pub barrier_frequency: f64,
    pub mean_final_regret: f64,
}

pub fn run_peg_experiment_with_summary(
    cfg: &ExperimentConfig,
) -> Result<(Vec<RunRecord>, PegSummary)> {
    cfg.validate()?;
    let p = &cfg.peg;
    let instance = PegInstance::new(p.means.clone().unwrap(), p.warm_start.unwrap())?;
    let rounds = cfg.episodes.unwrap();
    let runs_per_seed = p.runs_per_seed.unwrap();
    let timing = cfg.record_timing.unwrap();

    let per_seed: Vec<(Vec<RunRecord>, usize, f64)> = cfg
        .seeds
        .par_iter()
        .map(|&seed| -> Result<(Vec<RunRecord>, usize, f64)> {
            let start = Instant::now();
            let mut mean_instant = vec![0.0; rounds];
            let mut mean_err = vec![0.0; rounds];
            let mut barriers = 0usize;
            let mut total_regret = 0.0;
            for r in 0..runs_per_seed {
                let mut rng = substream(seed, &[tag::TRACE, r as u64]);
                let run = run_peg_series(&instance, rounds, &mut rng)?;
                for (i, (inst, err)) in run.instant_regret.iter().zip(&run.mean_error).enumerate() {
                    mean_instant[i] += inst / runs_per_seed as f64;
                    mean_err[i] += err / runs_per_seed as f64;
                }
                if run.outcome.barrier_hit {
                    barriers += 1;
                }
                total_regret += run.outcome.regret;
            }
            let per_round_ms = if timing {
                start.elapsed().as_secs_f64() * 1e3 / rounds as f64
            } else {
                0.0
            };
            let mut cumulative = 0.0;
            let records = (0..rounds)
                .map(|i| {
                    cumulative += mean_instant[i];
                    RunRecord {
                        algorithm: Algorithm::Peg,
                        seed,
                        episode: i + 1,
                        instant_regret: mean_instant[i],
                        cumulative_regret: cumulative,
                        model_error: mean_err[i],
                        wall_time_ms: per_round_ms,
                    }
                })
                .collect();
            Ok((records, barriers, total_regret))
        })
        .collect::<Result<_>>()?;

    let total_runs = runs_per_seed * cfg.seeds.len();
    let barrier_frequency =
        per_seed.iter().map(|(_, b, _)| *b).sum::<usize>() as f64 / total_runs as f64;
    let mean_final_regret = per_seed.iter().map(|(_, _, r)| *r).sum::<f64>() / total_runs as f64;
    let records = sort_records(per_seed.into_iter().flat_map(|(r, _, _)| r).collect());
    Ok((
        records,
        PegSummary {
            runs: total_runs,
            barrier_frequency,
            mean_final_regret,
        },
    ))
}
