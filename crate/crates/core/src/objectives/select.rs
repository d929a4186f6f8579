use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::entropy::{EvidenceGrid, QuadratureSpec};
use super::momentum::{q_momentum, MomentumVariant};
use crate::error::{RbiError, Result};
use crate::inference::{History, ObservationModel, QueryBatch};
use crate::probability::AlphaOrder;

/// Query-selection policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PolicyKind {
    /// `−H_α₂(σ | ε, φ, H_s) + λ₂ M_α₂(φ, H_s)`.
    UnifiedRenyi,
    /// Shannon conditional entropy minimisation (maximum mutual information).
    MmiShannon,
    /// `−H_α₂(σ | ε, φ, H_s)` without Momentum.
    RenyiEntropyOnly,
    /// N-best: the `N` most probable states.
    PosteriorMax,
    /// `N` distinct queries uniformly at random.
    Random,
    /// Each pick is uniform with probability `epsilon_mix`, otherwise the most probable
    /// remaining state.
    EpsilonRandom,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PolicyConfig {
    pub kind: PolicyKind,
    pub alpha2: AlphaOrder,
    pub lambda2_init: f64,
    pub lambda2_min: f64,
    pub anneal_rate: f64,
    pub momentum_variant: MomentumVariant,
    pub epsilon_mix: f64,
}

impl Default for PolicyConfig {
    fn default() -> Self {
        Self {
            kind: PolicyKind::UnifiedRenyi,
            alpha2: AlphaOrder::new(2.0).expect("valid order"),
            lambda2_init: 1.0,
            lambda2_min: 0.0,
            anneal_rate: 0.9,
            momentum_variant: MomentumVariant::RealizedTrajectory,
            epsilon_mix: 0.2,
        }
    }
}

impl PolicyConfig {
    pub fn of_kind(kind: PolicyKind) -> Self {
        Self {
            kind,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let non_negative = |field: &str, v: f64| {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(RbiError::config(format!("policy.{field}"), format!("{v} must be finite and >= 0")))
            }
        };
        non_negative("lambda2_init", self.lambda2_init)?;
        non_negative("lambda2_min", self.lambda2_min)?;
        if self.lambda2_min > self.lambda2_init {
            return Err(RbiError::config(
                "policy.lambda2_min",
                format!("{} exceeds lambda2_init {}", self.lambda2_min, self.lambda2_init),
            ));
        }
        if !(self.anneal_rate > 0.0 && self.anneal_rate <= 1.0) {
            return Err(RbiError::config(
                "policy.anneal_rate",
                format!("{} outside (0, 1]", self.anneal_rate),
            ));
        }
        if !(0.0..=1.0).contains(&self.epsilon_mix) {
            return Err(RbiError::config(
                "policy.epsilon_mix",
                format!("{} outside [0, 1]", self.epsilon_mix),
            ));
        }
        Ok(())
    }
}

/// `max(λ_min, λ_init · rate^s)`.
pub fn anneal_lambda(lambda2_init: f64, anneal_rate: f64, lambda2_min: f64, sequence: usize) -> f64 {
    let exp = i32::try_from(sequence).unwrap_or(i32::MAX);
    (lambda2_init * anneal_rate.powi(exp)).max(lambda2_min)
}

/// `−H_α₂(σ | ε, φ, H_s) + λ₂ · M_α₂(φ, H_s)` for a single candidate.
pub fn unified_query_score(
    query: usize,
    history: &History,
    model: &ObservationModel,
    config: &PolicyConfig,
    lambda2: f64,
    quadrature: &QuadratureSpec,
) -> Result<f64> {
    let grid = EvidenceGrid::new(&model.evidence, quadrature)?;
    unified_score_on(&grid, query, history, model, config.alpha2, lambda2, config.momentum_variant)
}

fn unified_score_on(
    grid: &EvidenceGrid,
    query: usize,
    history: &History,
    model: &ObservationModel,
    alpha: AlphaOrder,
    lambda2: f64,
    variant: MomentumVariant,
) -> Result<f64> {
    let entropy = grid.conditional_entropy(history.current(), query, &model.likelihood, alpha)?;
    if lambda2 == 0.0 {
        return Ok(-entropy);
    }
    let momentum = q_momentum(query, history, model, alpha, variant)?;
    if momentum == f64::NEG_INFINITY {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(-entropy + lambda2 * momentum)
}

/// Scores of every candidate query under a score-based policy kind. Returns `None` for the
/// posterior-max and random kinds, which do not score candidates.
pub fn score_queries(
    history: &History,
    model: &ObservationModel,
    config: &PolicyConfig,
    lambda2: f64,
    quadrature: &QuadratureSpec,
) -> Result<Option<Vec<f64>>> {
    let (alpha, lambda2) = match config.kind {
        PolicyKind::UnifiedRenyi => (config.alpha2, lambda2),
        PolicyKind::MmiShannon => (AlphaOrder::SHANNON, 0.0),
        PolicyKind::RenyiEntropyOnly => (config.alpha2, 0.0),
        PolicyKind::PosteriorMax | PolicyKind::Random | PolicyKind::EpsilonRandom => {
            return Ok(None)
        }
    };
    let grid = EvidenceGrid::new(&model.evidence, quadrature)?;
    (0..history.num_states())
        .map(|q| unified_score_on(&grid, q, history, model, alpha, lambda2, config.momentum_variant))
        .collect::<Result<Vec<_>>>()
        .map(Some)
}

/// Position of the best score in `pool`: finite beats `-inf`/NaN, ties go to the lowest index.
fn best_in_pool(pool: &[usize], scores: &[f64]) -> usize {
    let key = |q: usize| {
        let s = scores[q];
        if s.is_nan() {
            f64::NEG_INFINITY
        } else {
            s
        }
    };
    let mut best = 0;
    for i in 1..pool.len() {
        let (a, b) = (key(pool[i]), key(pool[best]));
        if a > b || (a == b && pool[i] < pool[best]) {
            best = i;
        }
    }
    best
}

/// Greedy batch of `batch_size` distinct queries: repeatedly take the best remaining candidate
/// and remove it from the pool.
pub fn greedy_batch_select<R: Rng + ?Sized>(
    history: &History,
    model: &ObservationModel,
    config: &PolicyConfig,
    batch_size: usize,
    lambda2: f64,
    quadrature: &QuadratureSpec,
    rng: &mut R,
) -> Result<QueryBatch> {
    let n = history.num_states();
    if batch_size == 0 || batch_size > n {
        return Err(RbiError::InvalidBatch(format!(
            "batch size {batch_size} not in 1..={n}"
        )));
    }
    let posterior = history.current().values().to_vec();
    let mut pool: Vec<usize> = (0..n).collect();
    let mut picks = Vec::with_capacity(batch_size);
    match config.kind {
        PolicyKind::Random => {
            picks = sample(rng, n, batch_size).into_vec();
        }
        PolicyKind::PosteriorMax => {
            for _ in 0..batch_size {
                picks.push(pool.remove(best_in_pool(&pool, &posterior)));
            }
        }
        PolicyKind::EpsilonRandom => {
            for _ in 0..batch_size {
                let explore = rng.random::<f64>() < config.epsilon_mix;
                let at = if explore {
                    rng.random_range(0..pool.len())
                } else {
                    best_in_pool(&pool, &posterior)
                };
                picks.push(pool.remove(at));
            }
        }
        _ => {
            let scores = score_queries(history, model, config, lambda2, quadrature)?
                .expect("score-based policy");
            for _ in 0..batch_size {
                picks.push(pool.remove(best_in_pool(&pool, &scores)));
            }
        }
    }
    QueryBatch::new(picks, n)
}
