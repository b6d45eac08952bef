//! Experiment configuration: JSON in, validated and fully materialized
//! out. Every optional field is filled with its concrete default during
//! materialization, so the metadata sidecar never depends on implicit
//! defaults and re-parses to an equal config.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluation::RegretMode;
use crate::planner::policy_space_size;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Tabular,
    Storage,
    Bandit,
    Peg,
}

impl ExperimentKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentKind::Tabular => "tabular",
            ExperimentKind::Storage => "storage",
            ExperimentKind::Bandit => "bandit",
            ExperimentKind::Peg => "peg",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize, Hash)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Pto,
    PtoOpt,
    PtoLite,
    FtlErm,
    LsviPe,
    LsviOpt,
    LsviLite,
    Ftl,
    Ucb,
    Peg,
}

impl Algorithm {
    pub fn as_str(&self) -> &'static str {
        match self {
            Algorithm::Pto => "pto",
            Algorithm::PtoOpt => "pto_opt",
            Algorithm::PtoLite => "pto_lite",
            Algorithm::FtlErm => "ftl_erm",
            Algorithm::LsviPe => "lsvi_pe",
            Algorithm::LsviOpt => "lsvi_opt",
            Algorithm::LsviLite => "lsvi_lite",
            Algorithm::Ftl => "ftl",
            Algorithm::Ucb => "ucb",
            Algorithm::Peg => "peg",
        }
    }

    pub fn parse(s: &str) -> Option<Algorithm> {
        Some(match s {
            "pto" => Algorithm::Pto,
            "pto_opt" => Algorithm::PtoOpt,
            "pto_lite" => Algorithm::PtoLite,
            "ftl_erm" => Algorithm::FtlErm,
            "lsvi_pe" => Algorithm::LsviPe,
            "lsvi_opt" => Algorithm::LsviOpt,
            "lsvi_lite" => Algorithm::LsviLite,
            "ftl" => Algorithm::Ftl,
            "ucb" => Algorithm::Ucb,
            "peg" => Algorithm::Peg,
            _ => return None,
        })
    }

    /// Stable tag for stream derivation.
    pub fn stream_tag(&self) -> u64 {
        *self as u64 + 1
    }

    fn valid_for(&self, kind: ExperimentKind) -> bool {
        matches!(
            (kind, self),
            (
                ExperimentKind::Tabular,
                Algorithm::Pto | Algorithm::PtoOpt | Algorithm::PtoLite | Algorithm::FtlErm
            ) | (
                ExperimentKind::Storage,
                Algorithm::LsviPe | Algorithm::LsviOpt | Algorithm::LsviLite
            ) | (ExperimentKind::Bandit, Algorithm::Ftl | Algorithm::Ucb)
                | (ExperimentKind::Peg, Algorithm::Peg)
        )
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Tabular benchmark parameters (paper defaults: 5 states, 5 exogenous
/// levels, 3 actions, horizon 5).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct TabularParams {
    pub num_x: Option<usize>,
    pub num_xi: Option<usize>,
    pub num_a: Option<usize>,
    pub horizon: Option<usize>,
    pub dirichlet_alpha: Option<f64>,
    /// Designated start state for fixed-mode regret and episode rollouts.
    pub x1: Option<usize>,
    pub xi1: Option<usize>,
    /// Initial exogenous distribution of each episode; uniform by default.
    pub xi_init: Option<Vec<f64>>,
}

/// Storage benchmark parameters (paper defaults: C = 10, 10 prices,
/// 10 anchors, a_max = 2, K = 100).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct StorageParams {
    pub horizon: Option<usize>,
    pub num_prices: Option<usize>,
    pub num_anchors: Option<usize>,
    pub capacity: Option<f64>,
    pub a_max: Option<f64>,
    pub eta_plus: Option<f64>,
    pub eta_minus: Option<f64>,
    pub leakage: Option<f64>,
    pub trans_cost: Option<f64>,
    pub holding: Option<f64>,
    /// Sign of the price term in the reward; the default `-1` makes
    /// charging pay the price and discharging earn it.
    pub reward_sign: Option<f64>,
    /// Paired rollouts per regret evaluation.
    pub eval_rollouts: Option<usize>,
    /// Initial storage level of each episode.
    pub x1: Option<f64>,
    /// Initial price distribution of each episode; uniform by default.
    pub xi_init: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct BanditParams {
    pub arms: Option<usize>,
    /// Gap between the best and every other arm mean.
    pub gap: Option<f64>,
    /// Mean of the non-best arms.
    pub base_mean: Option<f64>,
    /// Sub-Gaussian proxy for bound reporting (bounded rewards: 1/2).
    pub sigma: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct PegParams {
    pub means: Option<Vec<f64>>,
    pub warm_start: Option<usize>,
    /// Independent greedy runs averaged per seed.
    pub runs_per_seed: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    /// Subset of the algorithms valid for the experiment kind.
    #[serde(default)]
    pub algorithms: Vec<Algorithm>,
    /// Episodes per run (rounds, for the bandit and greedy demos).
    #[serde(default)]
    pub episodes: Option<usize>,
    /// Root seeds; one independent run per seed.
    #[serde(default)]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub tabular: TabularParams,
    #[serde(default)]
    pub storage: StorageParams,
    #[serde(default)]
    pub bandit: BanditParams,
    #[serde(default)]
    pub peg: PegParams,
    /// Optimism multiplier `c` (default 0.3 tabular, 0.5 storage).
    #[serde(default)]
    pub optimism_c: Option<f64>,
    /// Failure probability in the bonus logarithm.
    #[serde(default)]
    pub optimism_delta: Option<f64>,
    /// Keep probability of the lite estimates.
    #[serde(default)]
    pub subsample_ratio: Option<f64>,
    /// Cap on exhaustive policy enumeration.
    #[serde(default)]
    pub policy_cap: Option<u64>,
    /// Exogenous memory order, 0 or 1.
    #[serde(default)]
    pub memory: Option<usize>,
    #[serde(default)]
    pub regret_mode: Option<RegretMode>,
    /// Capture per-episode wall time. Off by default so repeated runs
    /// produce byte-identical CSV files.
    #[serde(default)]
    pub record_timing: Option<bool>,
}

impl ExperimentConfig {
    /// A fully defaulted config for the given experiment kind.
    pub fn default_for(kind: ExperimentKind) -> Self {
        let mut cfg = ExperimentConfig {
            experiment: kind,
            algorithms: Vec::new(),
            episodes: None,
            seeds: Vec::new(),
            tabular: TabularParams::default(),
            storage: StorageParams::default(),
            bandit: BanditParams::default(),
            peg: PegParams::default(),
            optimism_c: None,
            optimism_delta: None,
            subsample_ratio: None,
            policy_cap: None,
            memory: None,
            regret_mode: None,
            record_timing: None,
        };
        cfg.materialize().expect("defaults validate");
        cfg
    }

    /// Parses a JSON config without materializing it.
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::config("<root>", e.to_string()))
    }

    /// Fills every unset field with its default and validates the result.
    pub fn materialize(&mut self) -> Result<()> {
        if self.algorithms.is_empty() {
            self.algorithms = match self.experiment {
                ExperimentKind::Tabular => {
                    vec![Algorithm::Pto, Algorithm::PtoOpt, Algorithm::PtoLite]
                }
                ExperimentKind::Storage => {
                    vec![Algorithm::LsviPe, Algorithm::LsviOpt, Algorithm::LsviLite]
                }
                ExperimentKind::Bandit => vec![Algorithm::Ftl, Algorithm::Ucb],
                ExperimentKind::Peg => vec![Algorithm::Peg],
            };
        }
        if self.episodes.is_none() {
            self.episodes = Some(match self.experiment {
                ExperimentKind::Tabular => 250,
                ExperimentKind::Storage => 100,
                ExperimentKind::Bandit => 500,
                ExperimentKind::Peg => 1000,
            });
        }
        if self.seeds.is_empty() {
            self.seeds = (0..20).collect();
        }
        if self.optimism_c.is_none() {
            self.optimism_c = Some(match self.experiment {
                ExperimentKind::Storage => 0.5,
                _ => 0.3,
            });
        }
        self.optimism_delta.get_or_insert(0.01);
        self.subsample_ratio.get_or_insert(0.5);
        self.policy_cap.get_or_insert(1 << 20);
        self.memory.get_or_insert(1);
        self.regret_mode.get_or_insert(RegretMode::Summed);
        self.record_timing.get_or_insert(false);

        let t = &mut self.tabular;
        t.num_x.get_or_insert(5);
        t.num_xi.get_or_insert(5);
        t.num_a.get_or_insert(3);
        t.horizon.get_or_insert(5);
        t.dirichlet_alpha.get_or_insert(1.0);
        t.x1.get_or_insert(0);
        t.xi1.get_or_insert(0);
        if t.xi_init.is_none() {
            let n = t.num_xi.unwrap();
            t.xi_init = Some(vec![1.0 / n as f64; n]);
        }

        let s = &mut self.storage;
        s.horizon.get_or_insert(6);
        s.num_prices.get_or_insert(10);
        s.num_anchors.get_or_insert(10);
        s.capacity
            .get_or_insert(crate::environments::storage_defaults::CAPACITY);
        s.a_max
            .get_or_insert(crate::environments::storage_defaults::A_MAX);
        s.eta_plus
            .get_or_insert(crate::environments::storage_defaults::ETA_PLUS);
        s.eta_minus
            .get_or_insert(crate::environments::storage_defaults::ETA_MINUS);
        s.leakage
            .get_or_insert(crate::environments::storage_defaults::LEAKAGE);
        s.trans_cost
            .get_or_insert(crate::environments::storage_defaults::TRANS_COST);
        s.holding
            .get_or_insert(crate::environments::storage_defaults::HOLDING);
        s.reward_sign
            .get_or_insert(crate::environments::storage_defaults::REWARD_SIGN);
        s.eval_rollouts.get_or_insert(100);
        s.x1.get_or_insert(0.0);
        if s.xi_init.is_none() {
            let n = s.num_prices.unwrap();
            s.xi_init = Some(vec![1.0 / n as f64; n]);
        }

        let b = &mut self.bandit;
        b.arms.get_or_insert(5);
        b.gap.get_or_insert(0.2);
        b.base_mean.get_or_insert(0.5);
        b.sigma.get_or_insert(0.5);

        let p = &mut self.peg;
        p.means.get_or_insert_with(|| vec![0.75, 0.5]);
        p.warm_start.get_or_insert(1);
        p.runs_per_seed.get_or_insert(200);

        self.validate()
    }

    /// Field-level validation of a materialized config.
    pub fn validate(&self) -> Result<()> {
        let episodes = self.episodes.unwrap_or(0);
        if episodes == 0 {
            return Err(Error::config("episodes", "must be at least 1"));
        }
        if self.seeds.is_empty() {
            return Err(Error::config("seeds", "must be nonempty"));
        }
        for algo in &self.algorithms {
            if !algo.valid_for(self.experiment) {
                return Err(Error::config(
                    "algorithms",
                    format!(
                        "`{algo}` is not valid for the `{}` experiment",
                        self.experiment.as_str()
                    ),
                ));
            }
        }
        let c = self.optimism_c.unwrap_or(0.0);
        if !(c >= 0.0) || !c.is_finite() {
            return Err(Error::config("optimism_c", "must be finite and >= 0"));
        }
        let delta = self.optimism_delta.unwrap_or(0.01);
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::config("optimism_delta", "must lie in (0, 1)"));
        }
        let ratio = self.subsample_ratio.unwrap_or(0.5);
        if !(ratio > 0.0 && ratio <= 1.0) {
            return Err(Error::config("subsample_ratio", "must lie in (0, 1]"));
        }
        let memory = self.memory.unwrap_or(1);
        crate::kernels::Memory::from_order(memory)?;

        match self.experiment {
            ExperimentKind::Tabular => {
                let t = &self.tabular;
                let (nx, nxi, na, h) = (
                    t.num_x.unwrap_or(0),
                    t.num_xi.unwrap_or(0),
                    t.num_a.unwrap_or(0),
                    t.horizon.unwrap_or(0),
                );
                if nx == 0 || nxi == 0 || na == 0 || h == 0 {
                    return Err(Error::config("tabular", "all sizes must be at least 1"));
                }
                if !(t.dirichlet_alpha.unwrap_or(1.0) > 0.0) {
                    return Err(Error::config("tabular.dirichlet_alpha", "must be positive"));
                }
                if t.x1.unwrap_or(0) >= nx {
                    return Err(Error::config("tabular.x1", "out of range"));
                }
                if t.xi1.unwrap_or(0) >= nxi {
                    return Err(Error::config("tabular.xi1", "out of range"));
                }
                if self.algorithms.contains(&Algorithm::FtlErm) {
                    let cells = h * nx * nxi;
                    let cap = self.policy_cap.unwrap_or(1 << 20) as u128;
                    match policy_space_size(na, cells) {
                        Some(n) if n <= cap => {}
                        other => {
                            return Err(Error::config(
                                "algorithms",
                                format!(
                                    "ftl_erm needs |A|^(H |X| |Xi|) <= policy_cap = {cap}; \
                                     this instance has {}",
                                    other
                                        .map(|n| n.to_string())
                                        .unwrap_or_else(|| format!("{na}^{cells}"))
                                ),
                            ));
                        }
                    }
                }
                if let RegretMode::Fixed { x1, xi1 } = self.regret_mode.unwrap_or_default() {
                    if x1 >= nx || xi1 >= nxi {
                        return Err(Error::config("regret_mode", "fixed state out of range"));
                    }
                }
                if let Some(dist) = &t.xi_init {
                    validate_distribution("tabular.xi_init", dist, nxi)?;
                }
            }
            ExperimentKind::Storage => {
                let s = &self.storage;
                if s.horizon.unwrap_or(0) == 0 {
                    return Err(Error::config("storage.horizon", "must be at least 1"));
                }
                if s.num_prices.unwrap_or(0) < 2 {
                    return Err(Error::config("storage.num_prices", "must be at least 2"));
                }
                if s.num_anchors.unwrap_or(0) < 2 {
                    return Err(Error::config("storage.num_anchors", "must be at least 2"));
                }
                if s.eval_rollouts.unwrap_or(0) == 0 {
                    return Err(Error::config("storage.eval_rollouts", "must be at least 1"));
                }
                let sign = s.reward_sign.unwrap_or(-1.0);
                if sign != 1.0 && sign != -1.0 {
                    return Err(Error::config("storage.reward_sign", "must be +1 or -1"));
                }
                let x1 = s.x1.unwrap_or(0.0);
                let c = s.capacity.unwrap_or(10.0);
                if !(0.0..=c).contains(&x1) {
                    return Err(Error::config("storage.x1", "must lie in [0, capacity]"));
                }
                if let Some(dist) = &s.xi_init {
                    validate_distribution("storage.xi_init", dist, s.num_prices.unwrap_or(0))?;
                }
                // Remaining physical parameters are validated by
                // StorageSpec at run time with the same error type.
            }
            ExperimentKind::Bandit => {
                let b = &self.bandit;
                let arms = b.arms.unwrap_or(0);
                if arms == 0 || arms > 16 {
                    return Err(Error::config("bandit.arms", "must lie in 1..=16"));
                }
                let gap = b.gap.unwrap_or(0.0);
                let base = b.base_mean.unwrap_or(0.5);
                if !(gap > 0.0) {
                    return Err(Error::config("bandit.gap", "must be positive"));
                }
                if !(0.0..=1.0).contains(&base) || base + gap > 1.0 {
                    return Err(Error::config(
                        "bandit.base_mean",
                        "means base_mean and base_mean + gap must lie in [0, 1]",
                    ));
                }
            }
            ExperimentKind::Peg => {
                let p = &self.peg;
                let means = p.means.clone().unwrap_or_default();
                crate::bandit::PegInstance::new(means.clone(), p.warm_start.unwrap_or(1))
                    .map_err(|e| Error::config("peg.means", e.to_string()))?;
                if episodes < means.len() * p.warm_start.unwrap_or(1) {
                    return Err(Error::config(
                        "episodes",
                        "must cover the warm start (arms * warm_start rounds)",
                    ));
                }
                if p.runs_per_seed.unwrap_or(0) == 0 {
                    return Err(Error::config("peg.runs_per_seed", "must be at least 1"));
                }
            }
        }
        Ok(())
    }
}

fn validate_distribution(field: &str, dist: &[f64], len: usize) -> Result<()> {
    if dist.len() != len {
        return Err(Error::config(
            field,
            format!("needs {len} entries, got {}", dist.len()),
        ));
    }
    if dist.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
        return Err(Error::config(field, "entries must lie in [0, 1]"));
    }
    let sum: f64 = dist.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::config(field, format!("sums to {sum}, expected 1")));
    }
    Ok(())
}
