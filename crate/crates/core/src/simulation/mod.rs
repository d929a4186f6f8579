//! Monte-Carlo harness: prior scenarios, evidence sampling, full trial runs, aggregated
//! experiments, parameter sweeps and statistical checks.

mod experiment;
mod harness;
mod scenario;
mod trial;

pub use experiment::{
    run_experiment, run_range, run_rng, sweep, sweep_scenario, with_threads, ExperimentSummary,
    SweepCell, SweepTarget,
};
pub use harness::{
    adversarial_throughout, collinearity_harness, momentum_ordering_grid, prop1_harness,
    CellStatus, CollinearityReport, MomentumOrderingCheck, Prop1Cell, Prop1Config, Prop1Report,
    MIN_PROP1_DRAWS,
};
pub use scenario::{make_prior, sample_evidence, PriorCondition, ScenarioConfig};
pub use trial::{run_trial, run_trial_with, Responder, SimulatedResponder, StopReason, TrialResult, TrialTrace};
