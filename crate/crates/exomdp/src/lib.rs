//! Simulation and planning toolkit for exogenous MDPs.
//!
//! Exogenous MDPs split the state into a controlled endogenous part and an
//! action-independent exogenous Markov chain. Because every observed
//! exogenous trace carries information about all policies, learners that
//! never explore — follow-the-leader bandit play, predict-then-optimize
//! tabular planning, and anchored least-squares value iteration with
//! greedy actions — can be benchmarked head-to-head against their
//! optimism-based counterparts. This crate provides those learners, the
//! two benchmark environment families, regret and model-error metrics, and
//! a reproducible experiment harness with CSV and SVG output.
//!
//! Start with the runnable examples (`cargo run --release --example ...`)
//! or the `exomdp` binary's `tabular`, `storage`, `bandit`, and `peg-demo`
//! subcommands.

pub mod bandit;
pub mod environments;
pub mod error;
pub mod evaluation;
pub mod exo;
pub mod harness;
pub mod kernels;
pub mod lfa;
pub mod planner;
pub mod rng;

pub use error::{Error, Result};
