use std::ops::Range;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::scenario::ScenarioConfig;
use super::trial::{run_trial, TrialResult};
use crate::error::{RbiError, Result};
use crate::probability::AlphaOrder;

/// The independent random stream of run `run_index` under `seed`.
pub fn run_rng(seed: u64, run_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(run_index);
    rng
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub num_runs: usize,
    pub num_correct: usize,
    pub accuracy: f64,
    pub mean_sequences: f64,
    /// `1 / mean_sequences`.
    pub speed: f64,
    /// `mean_sequences · N`.
    pub mean_queries: f64,
    pub runs: Vec<TrialResult>,
}

impl ExperimentSummary {
    /// Aggregates runs with exact integer sums, so the result does not depend on run order.
    pub fn from_runs(runs: Vec<TrialResult>, trials_per_sequence: usize) -> Result<Self> {
        if runs.is_empty() {
            return Err(RbiError::config("num_runs", "must be at least 1"));
        }
        let num_runs = runs.len();
        let num_correct = runs.iter().filter(|r| r.correct).count();
        let total_sequences: usize = runs.iter().map(|r| r.num_sequences).sum();
        let mean_sequences = total_sequences as f64 / num_runs as f64;
        Ok(Self {
            num_runs,
            num_correct,
            accuracy: num_correct as f64 / num_runs as f64,
            mean_sequences,
            speed: 1.0 / mean_sequences,
            mean_queries: (total_sequences * trials_per_sequence) as f64 / num_runs as f64,
            runs,
        })
    }
}

/// Runs `range` of the scenario's trials (run `i` uses [`run_rng`]`(seed, i)`) on the current
/// rayon pool, returned in run order.
pub fn run_range(scenario: &ScenarioConfig, range: Range<usize>) -> Result<Vec<TrialResult>> {
    scenario.validate()?;
    range
        .into_par_iter()
        .map(|i| run_trial(scenario, &mut run_rng(scenario.seed, i as u64)))
        .collect()
}

/// All `num_runs` trials on the current rayon pool.
pub fn run_experiment(scenario: &ScenarioConfig) -> Result<ExperimentSummary> {
    let runs = run_range(scenario, 0..scenario.num_runs)?;
    ExperimentSummary::from_runs(runs, scenario.trials_per_sequence)
}

/// Runs `f` on a dedicated pool of `threads` workers (`0` picks the rayon default).
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| RbiError::config("threads", e.to_string()))?;
    Ok(pool.install(f))
}

/// Which parameter pair a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepTarget {
    /// `(α₂, λ₂)`: `λ₂` is the initial annealed weight.
    QueryParams,
    /// `(α₁, λ₁)`.
    StoppingParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub alpha: AlphaOrder,
    pub lambda: f64,
    pub summary: ExperimentSummary,
}

/// The scenario with one `(α, λ)` pair substituted.
pub fn sweep_scenario(scenario: &ScenarioConfig, alpha: AlphaOrder, lambda: f64, target: SweepTarget) -> ScenarioConfig {
    let mut cell = scenario.clone();
    match target {
        SweepTarget::QueryParams => {
            cell.policy.alpha2 = alpha;
            cell.policy.lambda2_init = lambda;
            cell.policy.lambda2_min = cell.policy.lambda2_min.min(lambda);
        }
        SweepTarget::StoppingParams => {
            cell.stopping.alpha1 = alpha;
            cell.stopping.lambda1 = lambda;
        }
    }
    cell
}

/// Cartesian `alpha_grid × lambda_grid` sweep, alpha-major. Every cell reuses the scenario seed,
/// so cells differ only in the swept parameters.
pub fn sweep(
    scenario: &ScenarioConfig,
    alpha_grid: &[AlphaOrder],
    lambda_grid: &[f64],
    target: SweepTarget,
) -> Result<Vec<SweepCell>> {
    if alpha_grid.is_empty() {
        return Err(RbiError::config("alpha_grid", "must not be empty"));
    }
    if lambda_grid.is_empty() {
        return Err(RbiError::config("lambda_grid", "must not be empty"));
    }
    let cells: Vec<ScenarioConfig> = alpha_grid
        .iter()
        .flat_map(|&a| lambda_grid.iter().map(move |&l| (a, l)))
        .map(|(a, l)| sweep_scenario(scenario, a, l, target))
        .collect();
    for cell in &cells {
        cell.validate()?;
    }
    cells
        .iter()
        .map(|cell| {
            Ok(SweepCell {
                alpha: match target {
                    SweepTarget::QueryParams => cell.policy.alpha2,
                    SweepTarget::StoppingParams => cell.stopping.alpha1,
                },
                lambda: match target {
                    SweepTarget::QueryParams => cell.policy.lambda2_init,
                    SweepTarget::StoppingParams => cell.stopping.lambda1,
                },
                summary: run_experiment(cell)?,
            })
        })
        .collect()
}
