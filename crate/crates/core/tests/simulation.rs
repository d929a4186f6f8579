use rbi_core::geometry::collinearity_residual;
use rbi_core::objectives::{PolicyConfig, PolicyKind, StoppingConfig};
use rbi_core::simulation::{
    run_experiment, run_rng, run_trial_with, with_threads, PriorCondition, ScenarioConfig,
    SimulatedResponder,
};
use rbi_core::ProbabilityVector;

const ALL_POLICIES: [PolicyKind; 6] = [
    PolicyKind::UnifiedRenyi,
    PolicyKind::MmiShannon,
    PolicyKind::RenyiEntropyOnly,
    PolicyKind::PosteriorMax,
    PolicyKind::Random,
    PolicyKind::EpsilonRandom,
];

#[test]
fn every_policy_beats_chance_on_uniform_priors() {
    for kind in ALL_POLICIES {
        let cfg = ScenarioConfig {
            policy: PolicyConfig::of_kind(kind),
            num_runs: 500,
            seed: 31,
            ..Default::default()
        };
        let summary = run_experiment(&cfg).unwrap();
        assert!(summary.accuracy > 1.0 / 30.0, "{kind:?}: {}", summary.accuracy);
        assert!(summary.runs.iter().all(|r| r.num_sequences <= cfg.max_sequences));
    }
}

#[test]
fn recorded_trajectories_are_valid_and_collinear() {
    let cfg = ScenarioConfig {
        n_states: 3,
        true_target: 2,
        trials_per_sequence: 1,
        prior_condition: PriorCondition::Adversarial,
        record_trajectories: true,
        stopping: StoppingConfig::posterior_threshold(0.99).unwrap(),
        ..Default::default()
    };
    for run in 0..50 {
        let mut responder = SimulatedResponder { true_state: cfg.true_target };
        let trace = run_trial_with(&cfg, &mut responder, &mut run_rng(cfg.seed, run)).unwrap();
        let trajectory = trace.result.trajectory.as_ref().unwrap();
        for p in trajectory {
            assert!(ProbabilityVector::new(p.values().to_vec()).is_ok());
        }
        for (i, record) in trace.history.records().iter().enumerate() {
            let r = collinearity_residual(&trajectory[i], &trajectory[i + 1], record.batch.queries()[0]).unwrap();
            assert!(r <= 1e-9, "run {run} step {i}: {r}");
        }
    }
}

#[test]
fn experiments_are_independent_of_worker_count() {
    let cfg = ScenarioConfig {
        n_states: 10,
        true_target: 4,
        trials_per_sequence: 3,
        prior_condition: PriorCondition::Adversarial,
        num_runs: 40,
        seed: 5,
        ..Default::default()
    };
    let one = with_threads(1, || run_experiment(&cfg)).unwrap().unwrap();
    let four = with_threads(4, || run_experiment(&cfg)).unwrap().unwrap();
    assert_eq!(one, four);
}

#[test]
fn stopping_momentum_never_delays_decisions() {
    let base = ScenarioConfig {
        n_states: 10,
        true_target: 7,
        trials_per_sequence: 2,
        num_runs: 60,
        seed: 12,
        stopping: StoppingConfig { alpha1: rbi_core::AlphaOrder::new(2.0).unwrap(), lambda1: 0.0, tau_prime: 0.2 },
        ..Default::default()
    };
    let relaxed = ScenarioConfig {
        stopping: StoppingConfig { lambda1: 1.0, ..base.stopping },
        ..base.clone()
    };
    let a = run_experiment(&base).unwrap();
    let b = run_experiment(&relaxed).unwrap();
    for (x, y) in a.runs.iter().zip(&b.runs) {
        assert!(y.num_sequences <= x.num_sequences);
    }
}
