use rand::Rng;
use serde::{Deserialize, Serialize};

use super::scenario::{make_prior, sample_evidence, ScenarioConfig};
use crate::error::Result;
use crate::inference::{map_estimate, posterior_update, History, ObservationModel, QueryBatch};
use crate::objectives::{anneal_lambda, greedy_batch_select, stopping_value};
use crate::probability::ProbabilityVector;

/// Supplies the evidence for each selected batch.
pub trait Responder<R: Rng + ?Sized> {
    fn respond(&mut self, batch: &QueryBatch, model: &ObservationModel, rng: &mut R) -> Result<Vec<f64>>;
}

/// Samples evidence from the observation model as if `true_state` were the hidden state.
#[derive(Debug, Clone, Copy)]
pub struct SimulatedResponder {
    pub true_state: usize,
}

impl<R: Rng + ?Sized> Responder<R> for SimulatedResponder {
    fn respond(&mut self, batch: &QueryBatch, model: &ObservationModel, rng: &mut R) -> Result<Vec<f64>> {
        sample_evidence(batch, self.true_state, model, rng)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    Threshold,
    MaxSequences,
}

impl StopReason {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Threshold => "threshold",
            Self::MaxSequences => "max_sequences",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub decided_state: usize,
    pub num_sequences: usize,
    pub correct: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub trajectory: Option<Vec<ProbabilityVector>>,
    pub stopped_by: StopReason,
}

/// A trial result together with everything needed to replay it.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialTrace {
    pub result: TrialResult,
    pub history: History,
    /// Stopping value after each sequence.
    pub stopping_values: Vec<f64>,
}

/// One full run of the active inference loop with simulated evidence for the scenario's target.
pub fn run_trial<R: Rng + ?Sized>(scenario: &ScenarioConfig, rng: &mut R) -> Result<TrialResult> {
    let mut responder = SimulatedResponder { true_state: scenario.true_target };
    Ok(run_trial_with(scenario, &mut responder, rng)?.result)
}

/// The active inference loop with an arbitrary evidence source.
///
/// Each sequence anneals `λ₂`, greedily selects `N` queries, collects their evidence, updates the
/// posterior and re-evaluates the stopping value. The loop ends once the stopping value falls
/// below `τ′` or after `max_sequences` sequences, and decides on the MAP state.
pub fn run_trial_with<R, S>(scenario: &ScenarioConfig, responder: &mut S, rng: &mut R) -> Result<TrialTrace>
where
    R: Rng + ?Sized,
    S: Responder<R> + ?Sized,
{
    scenario.validate()?;
    let model = scenario.observation_model()?;
    let prior = make_prior(
        scenario.prior_condition,
        scenario.n_states,
        scenario.true_target,
        scenario.prior_sharpness,
        rng,
    )?;
    let mut history = History::new(prior);
    let policy = &scenario.policy;
    let stopping = &scenario.stopping;
    let mut stop = stopping.initial_value();
    let mut stopping_values = Vec::new();

    while !stopping.should_stop(stop) && history.num_sequences() < scenario.max_sequences {
        let s = history.num_sequences();
        let lambda2 = anneal_lambda(policy.lambda2_init, policy.anneal_rate, policy.lambda2_min, s);
        let batch = greedy_batch_select(
            &history,
            &model,
            policy,
            scenario.trials_per_sequence,
            lambda2,
            &scenario.quadrature,
            rng,
        )?;
        let evidence = responder.respond(&batch, &model, rng)?;
        posterior_update(&mut history, &batch, &evidence, &model, scenario.update_mode)?;
        stop = stopping_value(&history, stopping)?;
        stopping_values.push(stop);
    }

    let decided_state = map_estimate(&history);
    let result = TrialResult {
        decided_state,
        num_sequences: history.num_sequences(),
        correct: decided_state == scenario.true_target,
        trajectory: scenario
            .record_trajectories
            .then(|| history.trajectory().cloned().collect()),
        stopped_by: if stopping.should_stop(stop) {
            StopReason::Threshold
        } else {
            StopReason::MaxSequences
        },
    };
    Ok(TrialTrace { result, history, stopping_values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inference::{EvidenceModel, Gaussian};
    use crate::objectives::{PolicyConfig, PolicyKind, StoppingConfig};
    use crate::simulation::PriorCondition;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn small() -> ScenarioConfig {
        ScenarioConfig {
            n_states: 6,
            true_target: 2,
            trials_per_sequence: 2,
            max_sequences: 20,
            ..Default::default()
        }
    }

    #[test]
    fn loose_threshold_stops_after_one_sequence() {
        let cfg = ScenarioConfig {
            stopping: StoppingConfig { tau_prime: 6f64.ln() + 1.0, ..Default::default() },
            ..small()
        };
        let r = run_trial(&cfg, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert_eq!(r.num_sequences, 1);
        assert_eq!(r.stopped_by, StopReason::Threshold);
    }

    #[test]
    fn unreachable_threshold_hits_the_cap() {
        let cfg = ScenarioConfig {
            stopping: StoppingConfig { tau_prime: -1.0, ..Default::default() },
            max_sequences: 4,
            ..small()
        };
        let r = run_trial(&cfg, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert_eq!(r.num_sequences, 4);
        assert_eq!(r.stopped_by, StopReason::MaxSequences);
    }

    #[test]
    fn near_noiseless_evidence_finds_the_target() {
        let cfg = ScenarioConfig {
            evidence: EvidenceModel::new(Gaussian::new(0.0, 1.0).unwrap(), Gaussian::new(1e6, 1.0).unwrap()).unwrap(),
            policy: PolicyConfig::of_kind(PolicyKind::PosteriorMax),
            prior_condition: PriorCondition::Supportive,
            ..small()
        };
        let correct = (0..200u64)
            .filter(|&s| run_trial(&cfg, &mut ChaCha8Rng::seed_from_u64(s)).unwrap().correct)
            .count();
        assert!(correct >= 198, "{correct}/200");
    }

    #[test]
    fn trial_is_deterministic() {
        let cfg = ScenarioConfig { record_trajectories: true, ..small() };
        let a = run_trial(&cfg, &mut ChaCha8Rng::seed_from_u64(77)).unwrap();
        let b = run_trial(&cfg, &mut ChaCha8Rng::seed_from_u64(77)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.trajectory.as_ref().unwrap().len(), a.num_sequences + 1);
    }

    #[test]
    fn trace_records_every_sequence() {
        let cfg = small();
        let mut responder = SimulatedResponder { true_state: cfg.true_target };
        let trace = run_trial_with(&cfg, &mut responder, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        assert_eq!(trace.stopping_values.len(), trace.result.num_sequences);
        assert_eq!(trace.history.num_sequences(), trace.result.num_sequences);
        assert!(trace.history.records().iter().all(|r| r.batch.len() == 2 && r.evidence.len() == 2));
    }
}
