//! Full-feedback exo-bandits (follow-the-leader and its UCB counterpart)
//! and the partial-feedback pure-exploitation-greedy construction whose
//! regret grows linearly.
//!
//! In the full-feedback setting the reward map `r(a, xi)` is known, so one
//! exogenous draw reveals every arm's reward; both learners then share the
//! same empirical state and the UCB bonus, being arm-independent, cancels
//! in the argmax.

use ndarray::Array2;
use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::Stream;

/// Full-feedback bandit: known reward table over i.i.d. exogenous draws.
#[derive(Debug, Clone)]
pub struct ExoBandit {
    /// `reward_table[[a, xi]]`.
    pub reward_table: Array2<f64>,
    /// Distribution of the exogenous draw.
    pub exo_dist: Vec<f64>,
    /// Sub-Gaussian proxy used only when reporting bounds.
    pub sigma: f64,
}

impl ExoBandit {
    pub fn new(reward_table: Array2<f64>, exo_dist: Vec<f64>, sigma: f64) -> Result<Self> {
        if reward_table.nrows() == 0 || reward_table.ncols() != exo_dist.len() {
            return Err(Error::dims(
                "reward table columns must match the exogenous distribution".to_string(),
            ));
        }
        let sum: f64 = exo_dist.iter().sum();
        if (sum - 1.0).abs() > 1e-12 || exo_dist.iter().any(|&p| p < 0.0) {
            return Err(Error::invalid("exo_dist must be a probability vector"));
        }
        Ok(ExoBandit {
            reward_table,
            exo_dist,
            sigma,
        })
    }

    /// Independent Bernoulli arms with the given means, encoded exactly:
    /// the exogenous state is the joint outcome bit-vector, so one draw
    /// reveals every arm's reward.
    pub fn bernoulli_product(means: &[f64], sigma: f64) -> Result<Self> {
        let a = means.len();
        if a == 0 || a > 16 {
            return Err(Error::invalid("need between 1 and 16 arms"));
        }
        if means.iter().any(|m| !(0.0..=1.0).contains(m)) {
            return Err(Error::invalid("Bernoulli means must lie in [0, 1]"));
        }
        let states = 1usize << a;
        let mut table = Array2::zeros((a, states));
        let mut dist = vec![0.0; states];
        for s in 0..states {
            let mut p = 1.0;
            for (arm, &mu) in means.iter().enumerate() {
                let bit = (s >> arm) & 1;
                p *= if bit == 1 { mu } else { 1.0 - mu };
                table[[arm, s]] = bit as f64;
            }
            dist[s] = p;
        }
        ExoBandit::new(table, dist, sigma)
    }

    pub fn num_arms(&self) -> usize {
        self.reward_table.nrows()
    }

    /// Exact arm means under the exogenous distribution.
    pub fn arm_means(&self) -> Vec<f64> {
        (0..self.num_arms())
            .map(|a| {
                self.reward_table
                    .row(a)
                    .iter()
                    .zip(&self.exo_dist)
                    .map(|(r, p)| r * p)
                    .sum()
            })
            .collect()
    }

    pub fn optimal_mean(&self) -> f64 {
        self.arm_means()
            .into_iter()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Shared empirical state under full feedback: every arm has exactly
/// `rounds - 1` observations folded into its running sum.
#[derive(Debug, Clone, PartialEq)]
pub struct FullInfoState {
    pub sums: Vec<f64>,
    /// Current round index, starting at 1 before any observation.
    pub rounds: usize,
}

impl FullInfoState {
    pub fn new(num_arms: usize) -> Self {
        FullInfoState {
            sums: vec![0.0; num_arms],
            rounds: 1,
        }
    }

    /// Folds the revealed rewards of one exogenous draw into every arm.
    pub fn observe(&mut self, rewards: impl Iterator<Item = f64>) {
        for (s, r) in self.sums.iter_mut().zip(rewards) {
            *s += r;
        }
        self.rounds += 1;
    }

    pub fn mean(&self, arm: usize) -> f64 {
        self.sums[arm] / (self.rounds - 1) as f64
    }
}

/// Follow-the-leader: the arm with the largest empirical mean, ties to the
/// lowest index. The first round (no data) deterministically plays arm 0.
pub fn ftl_select(state: &FullInfoState) -> usize {
    if state.rounds <= 1 {
        return 0;
    }
    let mut best = 0;
    for a in 1..state.sums.len() {
        if state.mean(a) > state.mean(best) {
            best = a;
        }
    }
    best
}

/// UCB under full feedback: argmax of the empirical mean plus
/// `sqrt(2 sigma^2 ln(A K / delta) / (k - 1))`. The bonus does not depend
/// on the arm, so the selection always coincides with [`ftl_select`].
pub fn ucb_select(state: &FullInfoState, sigma: f64, episodes: usize, delta: f64) -> usize {
    if state.rounds <= 1 {
        return 0;
    }
    let a = state.sums.len() as f64;
    let k = state.rounds as f64;
    let bonus = (2.0 * sigma * sigma * (a * episodes as f64 / delta).ln() / (k - 1.0)).sqrt();
    let mut best = 0;
    let mut best_score = state.mean(0) + bonus;
    for arm in 1..state.sums.len() {
        let score = state.mean(arm) + bonus;
        if score > best_score {
            best_score = score;
            best = arm;
        }
    }
    best
}

/// Which selector drives an exo-bandit run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BanditAlgo {
    Ftl,
    Ucb,
}

/// One round of an exo-bandit run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BanditRound {
    pub arm: usize,
    /// Per-round simple regret `mu* - mu_{a_k}` from the exact means.
    pub instant_regret: f64,
    /// `max_a |muhat_a - mu_a|` after this round's update.
    pub max_mean_error: f64,
}

/// Runs `episodes` rounds of full-feedback play. The UCB variant uses
/// `delta = 1/K` as in its analysis; both variants update every arm's sum
/// each round, so the empirical state evolves identically regardless of
/// the arms actually chosen.
pub fn run_exo_bandit(
    bandit: &ExoBandit,
    algo: BanditAlgo,
    episodes: usize,
    rng: &mut Stream,
) -> Result<Vec<BanditRound>> {
    if episodes == 0 {
        return Err(Error::invalid("episodes must be at least 1"));
    }
    let means = bandit.arm_means();
    let best = bandit.optimal_mean();
    let delta = 1.0 / episodes as f64;
    let mut state = FullInfoState::new(bandit.num_arms());
    let mut rounds = Vec::with_capacity(episodes);
    for _ in 0..episodes {
        let arm = match algo {
            BanditAlgo::Ftl => ftl_select(&state),
            BanditAlgo::Ucb => ucb_select(&state, bandit.sigma, episodes, delta),
        };
        let xi = crate::exo::sample_index(&bandit.exo_dist, rng);
        state.observe((0..bandit.num_arms()).map(|a| bandit.reward_table[[a, xi]]));
        let max_mean_error = (0..bandit.num_arms())
            .map(|a| (state.mean(a) - means[a]).abs())
            .fold(0.0, f64::max);
        rounds.push(BanditRound {
            arm,
            instant_regret: best - means[arm],
            max_mean_error,
        });
    }
    Ok(rounds)
}

/// Bernoulli instance for pure-exploitation greedy play after a finite
/// warm start.
#[derive(Debug, Clone, PartialEq)]
pub struct PegInstance {
    /// Bernoulli means; the best arm must be unique.
    pub means: Vec<f64>,
    /// Warm-start pulls per arm.
    pub warm_start: usize,
}

impl PegInstance {
    pub fn new(means: Vec<f64>, warm_start: usize) -> Result<Self> {
        if means.len() < 2 {
            return Err(Error::invalid("need at least two arms"));
        }
        if warm_start == 0 {
            return Err(Error::invalid("warm_start must be at least 1"));
        }
        if means.iter().any(|m| !(0.0..=1.0).contains(m)) {
            return Err(Error::invalid("means must lie in [0, 1]"));
        }
        let inst = PegInstance { means, warm_start };
        if inst.gap() <= 0.0 {
            return Err(Error::invalid("the best arm must be strictly best"));
        }
        Ok(inst)
    }

    pub fn optimal_arm(&self) -> usize {
        let mut best = 0;
        for a in 1..self.means.len() {
            if self.means[a] > self.means[best] {
                best = a;
            }
        }
        best
    }

    /// Gap between the best and second-best mean.
    pub fn gap(&self) -> f64 {
        let best = self.optimal_arm();
        let second = self
            .means
            .iter()
            .enumerate()
            .filter(|(a, _)| *a != best)
            .map(|(_, &m)| m)
            .fold(f64::NEG_INFINITY, f64::max);
        self.means[best] - second
    }
}

/// Result of one pure-exploitation-greedy run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PegOutcome {
    /// Pseudo-regret `sum_t (mu* - mu_{a_t})` over all rounds.
    pub regret: f64,
    /// After the warm start, the optimal arm's empirical mean was exactly
    /// zero while some arm's mean was positive. On this event the greedy
    /// phase can never revisit the optimal arm.
    pub barrier_hit: bool,
    /// Pulls of the optimal arm during the greedy phase.
    pub optimal_pulls_after_warm_start: usize,
    /// `max_a |muhat_a - mu_a|` at the end of the run.
    pub final_mean_error: f64,
}

/// Simulates partial-feedback greedy play: every arm is pulled
/// `warm_start` times, then each round plays an arm with maximal empirical
/// mean over its own past pulls (ties to the lowest index).
pub fn run_peg(instance: &PegInstance, rounds: usize, rng: &mut Stream) -> Result<PegOutcome> {
    run_peg_impl(instance, rounds, rng, |_, _, _| {})
}

/// A greedy run with its per-round series retained.
#[derive(Debug, Clone, PartialEq)]
pub struct PegRun {
    pub outcome: PegOutcome,
    /// Per-round simple regret.
    pub instant_regret: Vec<f64>,
    /// Per-round `max_a |muhat_a - mu_a|`.
    pub mean_error: Vec<f64>,
}

/// [`run_peg`] with the per-round regret and estimation-error series.
pub fn run_peg_series(instance: &PegInstance, rounds: usize, rng: &mut Stream) -> Result<PegRun> {
    let mut instant_regret = Vec::with_capacity(rounds);
    let mut mean_error = Vec::with_capacity(rounds);
    let outcome = run_peg_impl(instance, rounds, rng, |_, inst, err| {
        instant_regret.push(inst);
        mean_error.push(err);
    })?;
    Ok(PegRun {
        outcome,
        instant_regret,
        mean_error,
    })
}

fn run_peg_impl(
    instance: &PegInstance,
    rounds: usize,
    rng: &mut Stream,
    mut on_round: impl FnMut(usize, f64, f64),
) -> Result<PegOutcome> {
    let a = instance.means.len();
    let warm_rounds = a * instance.warm_start;
    if rounds < warm_rounds {
        return Err(Error::invalid(format!(
            "rounds = {rounds} below the warm start length {warm_rounds}"
        )));
    }
    let best_arm = instance.optimal_arm();
    let best_mean = instance.means[best_arm];

    let mut pulls = vec![0u64; a];
    let mut successes = vec![0u64; a];
    let mut regret = 0.0;
    let pull = |arm: usize, pulls: &mut Vec<u64>, successes: &mut Vec<u64>, rng: &mut Stream| {
        pulls[arm] += 1;
        if rng.gen::<f64>() < instance.means[arm] {
            successes[arm] += 1;
        }
    };
    // Empirical mean over own pulls; arms never pulled count as zero.
    let mean = |arm: usize, pulls: &[u64], successes: &[u64]| -> f64 {
        if pulls[arm] == 0 {
            0.0
        } else {
            successes[arm] as f64 / pulls[arm] as f64
        }
    };
    let max_error = |pulls: &[u64], successes: &[u64]| -> f64 {
        (0..a)
            .map(|arm| (mean(arm, pulls, successes) - instance.means[arm]).abs())
            .fold(0.0, f64::max)
    };

    for _ in 0..instance.warm_start {
        for arm in 0..a {
            pull(arm, &mut pulls, &mut successes, rng);
            let inst = best_mean - instance.means[arm];
            regret += inst;
            on_round(arm, inst, max_error(&pulls, &successes));
        }
    }

    let barrier_hit = mean(best_arm, &pulls, &successes) == 0.0
        && (0..a).any(|arm| mean(arm, &pulls, &successes) > 0.0);

    let mut optimal_pulls_after_warm_start = 0usize;
    for _ in warm_rounds..rounds {
        let mut arm = 0;
        let mut best_emp = mean(0, &pulls, &successes);
        for candidate in 1..a {
            let m = mean(candidate, &pulls, &successes);
            if m > best_emp {
                best_emp = m;
                arm = candidate;
            }
        }
        pull(arm, &mut pulls, &mut successes, rng);
        let inst = best_mean - instance.means[arm];
        regret += inst;
        if arm == best_arm {
            optimal_pulls_after_warm_start += 1;
        }
        on_round(arm, inst, max_error(&pulls, &successes));
    }

    let final_mean_error = max_error(&pulls, &successes);
    Ok(PegOutcome {
        regret,
        barrier_hit,
        optimal_pulls_after_warm_start,
        final_mean_error,
    })
}
