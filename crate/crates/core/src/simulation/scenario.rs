use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{RbiError, Result};
use crate::inference::{EvidenceModel, LikelihoodMatrix, MarginalMode, ObservationModel, QueryBatch};
use crate::objectives::{PolicyConfig, QuadratureSpec, StoppingConfig};
use crate::probability::{ProbabilityVector, PROBABILITY_FLOOR};

/// How the prior relates to the true target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PriorCondition {
    #[default]
    Uniform,
    /// The true target is the least probable state.
    Adversarial,
    /// The true target is the most probable state.
    Supportive,
}

/// One simulated environment plus the policy and stopping rule that act in it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub n_states: usize,
    pub true_target: usize,
    pub prior_condition: PriorCondition,
    /// Log-ratio between the most and least probable prior masses.
    pub prior_sharpness: f64,
    pub evidence: EvidenceModel,
    /// Label probabilities `L[σ][φ]`; one-hot when absent.
    pub likelihood: Option<LikelihoodMatrix>,
    #[serde(alias = "N_trials_per_sequence")]
    pub trials_per_sequence: usize,
    pub max_sequences: usize,
    pub stopping: StoppingConfig,
    pub policy: PolicyConfig,
    pub update_mode: MarginalMode,
    pub quadrature: QuadratureSpec,
    pub seed: u64,
    pub num_runs: usize,
    pub record_trajectories: bool,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            n_states: 30,
            true_target: 15,
            prior_condition: PriorCondition::Uniform,
            prior_sharpness: 4.0,
            evidence: EvidenceModel::default(),
            likelihood: None,
            trials_per_sequence: 8,
            max_sequences: 50,
            stopping: StoppingConfig::default(),
            policy: PolicyConfig::default(),
            update_mode: MarginalMode::PerTrial,
            quadrature: QuadratureSpec::default(),
            seed: 0,
            num_runs: 500,
            record_trajectories: false,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_states < 2 {
            return Err(RbiError::config("n_states", format!("{} must be at least 2", self.n_states)));
        }
        if self.true_target >= self.n_states {
            return Err(RbiError::config(
                "true_target",
                format!("{} not below n_states {}", self.true_target, self.n_states),
            ));
        }
        if !(self.prior_sharpness.is_finite() && self.prior_sharpness > 0.0) {
            return Err(RbiError::config("prior_sharpness", "must be finite and > 0"));
        }
        self.evidence.validate("evidence")?;
        if let Some(l) = &self.likelihood {
            if l.size() != self.n_states {
                return Err(RbiError::config(
                    "likelihood",
                    format!("{}x{} matrix for {} states", l.size(), l.size(), self.n_states),
                ));
            }
        }
        if self.trials_per_sequence == 0 || self.trials_per_sequence > self.n_states {
            return Err(RbiError::config(
                "trials_per_sequence",
                format!("{} not in 1..={}", self.trials_per_sequence, self.n_states),
            ));
        }
        if self.max_sequences == 0 {
            return Err(RbiError::config("max_sequences", "must be at least 1"));
        }
        if self.num_runs == 0 {
            return Err(RbiError::config("num_runs", "must be at least 1"));
        }
        self.stopping.validate()?;
        self.policy.validate()?;
        self.quadrature.validate()
    }

    pub fn observation_model(&self) -> Result<ObservationModel> {
        let likelihood = match &self.likelihood {
            Some(l) => l.clone(),
            None => LikelihoodMatrix::one_hot(self.n_states)?,
        };
        Ok(ObservationModel::new(likelihood, self.evidence))
    }
}

/// Prior over `n` states. Non-uniform priors are a softmax over ranks,
/// `p ∝ exp(−sharpness · rank / (n − 1))`, with the target pinned to the first (supportive) or
/// last (adversarial) rank and the other states ranked in random order.
pub fn make_prior<R: Rng + ?Sized>(
    condition: PriorCondition,
    n: usize,
    true_target: usize,
    sharpness: f64,
    rng: &mut R,
) -> Result<ProbabilityVector> {
    if true_target >= n {
        return Err(RbiError::IndexOutOfRange {
            what: "true_target",
            index: true_target,
            size: n,
        });
    }
    if !(sharpness > 0.0) {
        return Err(RbiError::config("prior_sharpness", "must be > 0"));
    }
    let (target_rank, first_other) = match condition {
        PriorCondition::Uniform => return ProbabilityVector::uniform(n),
        PriorCondition::Supportive => (0, 1),
        PriorCondition::Adversarial => (n - 1, 0),
    };
    let mut others: Vec<usize> = (0..n).filter(|&s| s != true_target).collect();
    others.shuffle(rng);
    let mut rank = vec![0usize; n];
    rank[true_target] = target_rank;
    for (offset, state) in others.into_iter().enumerate() {
        rank[state] = first_other + offset;
    }
    let scale = sharpness / (n - 1) as f64;
    let logits: Vec<f64> = rank.iter().map(|&r| -scale * r as f64).collect();
    Ok(ProbabilityVector::from_log_weights(&logits)?.floored(PROBABILITY_FLOOR))
}

/// Draws one evidence value per query: a label `ℓ ~ Bernoulli(L[σ][φ])`, then `ε` from that
/// label's density.
pub fn sample_evidence<R: Rng + ?Sized>(
    batch: &QueryBatch,
    sigma_true: usize,
    model: &ObservationModel,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if sigma_true >= model.num_states() {
        return Err(RbiError::IndexOutOfRange {
            what: "state",
            index: sigma_true,
            size: model.num_states(),
        });
    }
    Ok(batch
        .queries()
        .iter()
        .map(|&phi| {
            let label = rng.random::<f64>() < model.likelihood.get(sigma_true, phi);
            if label {
                model.evidence.target.sample(rng)
            } else {
                model.evidence.nontarget.sample(rng)
            }
        })
        .collect())
}
