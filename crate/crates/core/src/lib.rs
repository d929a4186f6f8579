//! Active recursive Bayesian inference (RBI) over a finite state space.
//!
//! The crate is organised bottom-up:
//!
//! - [`probability`]: probability vectors on the simplex and Rényi information measures.
//! - [`inference`]: the recursive Bayesian state estimator (likelihoods, posterior updates,
//!   history bookkeeping).
//! - [`objectives`]: query-selection scores (conditional Rényi entropy, Q-/I-Momentum),
//!   greedy batch selection, baselines and the stopping rule.
//! - [`geometry`]: simplex geometry of posterior trajectories and decision boundaries.
//! - [`simulation`]: Monte-Carlo trial runner, experiment aggregation, parameter sweeps and
//!   statistical harnesses.
//!
//! All entropies and divergences are in nats.

#![forbid(unsafe_code)]

pub mod error;
pub mod geometry;
pub mod inference;
pub mod objectives;
pub mod probability;
pub mod simulation;

pub use error::{RbiError, Result};
pub use probability::{AlphaOrder, ProbabilityVector};
