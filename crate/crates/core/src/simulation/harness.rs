//! Statistical checks of the selection and geometry propositions.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::experiment::run_rng;
use super::scenario::sample_evidence;
use crate::error::{RbiError, Result};
use crate::geometry::collinearity_residual;
use crate::inference::{
    posterior_update, EvidenceModel, History, LikelihoodMatrix, MarginalMode, ObservationModel,
    QueryBatch,
};
use crate::objectives::{q_momentum, EvidenceGrid, MomentumVariant, QuadratureSpec};
use crate::probability::{AlphaOrder, ProbabilityVector};

/// Target state `a`, competitor `b`; `q` queries `a` and `r` queries `b`.
const A: usize = 0;
const B: usize = 1;

/// Two-state, one-hot fixture: histories start from `p(a) ~ U[prior_a_min, prior_a_max]` and run
/// `sequences` single-query sequences, each asking a uniformly random state, with evidence
/// generated for the true state `a`. Only histories with `p(a | H_n) < p(b | H_n)` at every
/// `n` qualify.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Prop1Config {
    pub alpha_grid: Vec<AlphaOrder>,
    pub lambda_grid: Vec<f64>,
    /// Qualifying histories per cell.
    pub num_draws: usize,
    pub prior_a_min: f64,
    pub prior_a_max: f64,
    pub sequences: usize,
    pub evidence: EvidenceModel,
    pub quadrature: QuadratureSpec,
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for Prop1Config {
    fn default() -> Self {
        Self {
            alpha_grid: [0.5, 2.0, 5.0].iter().map(|&a| AlphaOrder::new(a).expect("valid order")).collect(),
            lambda_grid: vec![0.5, 1.0],
            num_draws: 2000,
            prior_a_min: 0.05,
            prior_a_max: 0.45,
            sequences: 3,
            evidence: EvidenceModel::default(),
            quadrature: QuadratureSpec::default(),
            tolerance: 0.02,
            seed: 0,
        }
    }
}

pub const MIN_PROP1_DRAWS: usize = 2000;

impl Prop1Config {
    pub fn validate(&self) -> Result<()> {
        if self.alpha_grid.is_empty() {
            return Err(RbiError::config("alpha_grid", "must not be empty"));
        }
        if self.lambda_grid.is_empty() {
            return Err(RbiError::config("lambda_grid", "must not be empty"));
        }
        if let Some(l) = self.lambda_grid.iter().find(|l| !(l.is_finite() && **l >= 0.0)) {
            return Err(RbiError::config("lambda_grid", format!("{l} must be finite and >= 0")));
        }
        if self.num_draws < MIN_PROP1_DRAWS {
            return Err(RbiError::config(
                "num_draws",
                format!("{} below the minimum of {MIN_PROP1_DRAWS}", self.num_draws),
            ));
        }
        if !(0.0 < self.prior_a_min && self.prior_a_min <= self.prior_a_max && self.prior_a_max < 1.0) {
            return Err(RbiError::config("prior_a_min", "need 0 < prior_a_min <= prior_a_max < 1"));
        }
        self.evidence.validate("evidence")?;
        self.quadrature.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CellStatus {
    Pass,
    Fail,
    /// No history satisfied the precondition.
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prop1Cell {
    pub alpha: AlphaOrder,
    pub lambda: f64,
    pub valid_draws: usize,
    /// Frequency of `U(q) > U(r)` for the unified score `U = −H_α + λ M_α`.
    pub lhs: f64,
    /// Frequency of `−H_α(q) > −H_α(r)`.
    pub rhs: f64,
    pub difference: f64,
    pub status: CellStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prop1Report {
    pub attempted_draws: usize,
    pub cells: Vec<Prop1Cell>,
}

impl Prop1Report {
    pub fn all_pass(&self) -> bool {
        self.cells.iter().all(|c| c.status == CellStatus::Pass)
    }
}

fn two_state_model(evidence: EvidenceModel) -> ObservationModel {
    ObservationModel::new(LikelihoodMatrix::one_hot(2).expect("two states"), evidence)
}

/// `p(a | H_n) < p(b | H_n)` for every `n = 0..=s`.
pub fn adversarial_throughout(history: &History) -> bool {
    history.trajectory().all(|p| p.get(A) < p.get(B))
}

fn draw_history<R: Rng + ?Sized>(cfg: &Prop1Config, model: &ObservationModel, rng: &mut R) -> Result<History> {
    let pa = if cfg.prior_a_max > cfg.prior_a_min {
        rng.random_range(cfg.prior_a_min..cfg.prior_a_max)
    } else {
        cfg.prior_a_min
    };
    let mut history = History::new(ProbabilityVector::new(vec![pa, 1.0 - pa])?);
    for _ in 0..cfg.sequences {
        let batch = QueryBatch::new(vec![rng.random_range(0..2)], 2)?;
        let evidence = sample_evidence(&batch, A, model, rng)?;
        posterior_update(&mut history, &batch, &evidence, model, MarginalMode::PerTrial)?;
    }
    Ok(history)
}

/// Estimates, per `(α, λ)` cell, how often the unified score orders `q` above `r` compared with
/// the entropy term alone. All cells share the same qualifying histories.
pub fn prop1_harness(cfg: &Prop1Config) -> Result<Prop1Report> {
    cfg.validate()?;
    let model = two_state_model(cfg.evidence);
    let max_attempts = cfg.num_draws.saturating_mul(50);
    let mut histories = Vec::with_capacity(cfg.num_draws);
    let mut attempted = 0;
    while histories.len() < cfg.num_draws && attempted < max_attempts {
        let mut rng = run_rng(cfg.seed, attempted as u64);
        attempted += 1;
        let h = draw_history(cfg, &model, &mut rng)?;
        if adversarial_throughout(&h) {
            histories.push(h);
        }
    }
    let grid = EvidenceGrid::new(&cfg.evidence, &cfg.quadrature)?;

    let mut cells = Vec::new();
    for &alpha in &cfg.alpha_grid {
        let mut entropy_terms = Vec::with_capacity(histories.len());
        for h in &histories {
            let neg_h = |phi| grid.conditional_entropy(h.current(), phi, &model.likelihood, alpha).map(|x| -x);
            let mom = |phi| q_momentum(phi, h, &model, alpha, MomentumVariant::RealizedTrajectory);
            entropy_terms.push((neg_h(A)?, neg_h(B)?, mom(A)?, mom(B)?));
        }
        for &lambda in &cfg.lambda_grid {
            cells.push(score_cell(alpha, lambda, &entropy_terms, cfg.tolerance));
        }
    }
    Ok(Prop1Report { attempted_draws: attempted, cells })
}

fn score_cell(alpha: AlphaOrder, lambda: f64, terms: &[(f64, f64, f64, f64)], tolerance: f64) -> Prop1Cell {
    let valid = terms.len();
    if valid == 0 {
        return Prop1Cell {
            alpha,
            lambda,
            valid_draws: 0,
            lhs: f64::NAN,
            rhs: f64::NAN,
            difference: f64::NAN,
            status: CellStatus::Skipped,
        };
    }
    let unified = |neg_h: f64, m: f64| if lambda == 0.0 { neg_h } else { neg_h + lambda * m };
    let lhs_count = terms
        .iter()
        .filter(|(hq, hr, mq, mr)| unified(*hq, *mq) > unified(*hr, *mr))
        .count();
    let rhs_count = terms.iter().filter(|(hq, hr, _, _)| hq > hr).count();
    let lhs = lhs_count as f64 / valid as f64;
    let rhs = rhs_count as f64 / valid as f64;
    Prop1Cell {
        alpha,
        lambda,
        valid_draws: valid,
        lhs,
        rhs,
        difference: lhs - rhs,
        status: if lhs >= rhs - tolerance { CellStatus::Pass } else { CellStatus::Fail },
    }
}

/// Outcome of the exhaustive check that, on two-state adversarial histories, an entropy
/// preference for `q` implies a Momentum preference for `q`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentumOrderingCheck {
    pub histories: usize,
    /// Histories where `−H_α(q) > −H_α(r)`.
    pub antecedent_held: usize,
    pub violations: usize,
}

/// Enumerates all trajectories of length `steps + 1` whose `p(a)` values come from `levels`
/// (each below 1/2) and tests `−H_α(q) > −H_α(r) ⇒ M_α(q) > M_α(r)` at every order in `alphas`.
pub fn momentum_ordering_grid(
    alphas: &[AlphaOrder],
    levels: &[f64],
    steps: usize,
    evidence: EvidenceModel,
    quadrature: &QuadratureSpec,
) -> Result<MomentumOrderingCheck> {
    if let Some(l) = levels.iter().find(|l| !(**l > 0.0 && **l < 0.5)) {
        return Err(RbiError::config("levels", format!("{l} outside (0, 1/2)")));
    }
    let model = two_state_model(evidence);
    let grid = EvidenceGrid::new(&evidence, quadrature)?;
    let mut check = MomentumOrderingCheck { histories: 0, antecedent_held: 0, violations: 0 };
    let mut index = vec![0usize; steps + 1];
    loop {
        let trajectory = index
            .iter()
            .map(|&i| ProbabilityVector::new(vec![levels[i], 1.0 - levels[i]]))
            .collect::<Result<Vec<_>>>()?;
        let history = History::from_trajectory(trajectory)?;
        for &alpha in alphas {
            check.histories += 1;
            let hq = grid.conditional_entropy(history.current(), A, &model.likelihood, alpha)?;
            let hr = grid.conditional_entropy(history.current(), B, &model.likelihood, alpha)?;
            if -hq > -hr {
                check.antecedent_held += 1;
                let mq = q_momentum(A, &history, &model, alpha, MomentumVariant::RealizedTrajectory)?;
                let mr = q_momentum(B, &history, &model, alpha, MomentumVariant::RealizedTrajectory)?;
                if mq <= mr {
                    check.violations += 1;
                }
            }
        }
        let mut k = 0;
        loop {
            if k == index.len() {
                return Ok(check);
            }
            index[k] += 1;
            if index[k] < levels.len() {
                break;
            }
            index[k] = 0;
            k += 1;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollinearityReport {
    pub updates: usize,
    pub max_residual: f64,
    pub violations: usize,
}

/// Runs `updates` random single-query posterior updates (random state count in `3..=10`,
/// random prior, query and true state, sampled evidence) and measures each step's collinearity
/// residual against the queried vertex.
pub fn collinearity_harness(updates: usize, bound: f64, seed: u64) -> Result<CollinearityReport> {
    let mut report = CollinearityReport { updates, max_residual: 0.0, violations: 0 };
    for i in 0..updates {
        let mut rng = run_rng(seed, i as u64);
        let n = rng.random_range(3..=10);
        let weights: Vec<f64> = (0..n).map(|_| rng.random_range(0.01..1.0)).collect();
        let prior = ProbabilityVector::from_weights(weights)?;
        let model = ObservationModel::new(LikelihoodMatrix::one_hot(n)?, EvidenceModel::default());
        let phi = rng.random_range(0..n);
        let truth = rng.random_range(0..n);
        let batch = QueryBatch::new(vec![phi], n)?;
        let evidence = sample_evidence(&batch, truth, &model, &mut rng)?;
        let mut history = History::new(prior.clone());
        let next = posterior_update(&mut history, &batch, &evidence, &model, MarginalMode::PerTrial)?;
        let r = collinearity_residual(&prior, &next, phi)?;
        report.max_residual = report.max_residual.max(r);
        if r > bound {
            report.violations += 1;
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_lambda_cell_is_exact() {
        let cfg = Prop1Config {
            alpha_grid: vec![AlphaOrder::new(2.0).unwrap()],
            lambda_grid: vec![0.0],
            quadrature: QuadratureSpec { points: 65, half_width_sigmas: 8.0 },
            ..Default::default()
        };
        let report = prop1_harness(&cfg).unwrap();
        let cell = &report.cells[0];
        assert_eq!(cell.lhs, cell.rhs);
        assert_eq!(cell.valid_draws, 2000);
        assert_eq!(cell.status, CellStatus::Pass);
    }

    #[test]
    fn balanced_prior_is_skipped() {
        let cfg = Prop1Config {
            alpha_grid: vec![AlphaOrder::new(2.0).unwrap()],
            lambda_grid: vec![1.0],
            prior_a_min: 0.5,
            prior_a_max: 0.5,
            quadrature: QuadratureSpec { points: 65, half_width_sigmas: 8.0 },
            ..Default::default()
        };
        let report = prop1_harness(&cfg).unwrap();
        assert_eq!(report.cells[0].status, CellStatus::Skipped);
        assert!(!report.all_pass());
    }

    #[test]
    fn too_few_draws_rejected() {
        let cfg = Prop1Config { num_draws: 100, ..Default::default() };
        assert!(prop1_harness(&cfg).is_err());
    }

    #[test]
    fn momentum_ordering_small_grid() {
        let alphas: Vec<AlphaOrder> = [0.5, 2.0].iter().map(|&a| AlphaOrder::new(a).unwrap()).collect();
        let check = momentum_ordering_grid(
            &alphas,
            &[0.05, 0.2, 0.45],
            1,
            EvidenceModel::default(),
            &QuadratureSpec::default(),
        )
        .unwrap();
        assert_eq!(check.histories, 9 * 2);
        assert_eq!(check.violations, 0);
    }

    #[test]
    fn collinearity_small() {
        let r = collinearity_harness(200, 1e-9, 1).unwrap();
        assert_eq!(r.violations, 0);
    }
}
