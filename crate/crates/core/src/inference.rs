//! Recursive Bayesian state estimation over a finite state space.
//!
//! A query `φ` presented while the true state is `σ` produces a binary label
//! `ℓ ~ Bernoulli(L[σ][φ])` and a scalar evidence `ε` drawn from the label's class-conditional
//! density. Marginalising the label gives the evidence likelihood
//!
//! ```text
//! p(ε | σ, φ) = L[σ][φ]·f_target(ε) + (1 − L[σ][φ])·f_nontarget(ε)
//! ```
//!
//! and every trial multiplies the posterior by the likelihood evidence ratio
//! `p(ε | σ, φ) / p(ε | φ, H)`. Queries and states share one index space (`Q = A`).

use std::collections::HashSet;
use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{RbiError, Result};
use crate::probability::{argmax_state, log_sum_exp, ProbabilityVector, PROBABILITY_FLOOR};

/// Named states; queries are indexed identically.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateSpace {
    labels: Vec<String>,
}

impl StateSpace {
    pub fn new(labels: Vec<String>) -> Result<Self> {
        if labels.len() < 2 {
            return Err(RbiError::config("labels", "need at least 2 states"));
        }
        let mut seen = HashSet::new();
        if let Some(dup) = labels.iter().find(|l| !seen.insert(l.as_str())) {
            return Err(RbiError::config("labels", format!("duplicate label {dup:?}")));
        }
        Ok(Self { labels })
    }

    /// States named `s0, s1, …`.
    pub fn indexed(n: usize) -> Result<Self> {
        Self::new((0..n).map(|i| format!("s{i}")).collect())
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label(&self, index: usize) -> Option<&str> {
        self.labels.get(index).map(String::as_str)
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }
}

/// `L[σ][φ] = p(ℓ = 1 | σ, φ)`, square over the shared state/query index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct LikelihoodMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl LikelihoodMatrix {
    /// `L[σ][φ] = 1(σ = φ)`: a query is relevant exactly to its own state.
    pub fn one_hot(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(RbiError::config("likelihood", "need at least 2 states"));
        }
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            entries[i * n + i] = 1.0;
        }
        Ok(Self { n, entries })
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if n < 2 {
            return Err(RbiError::config("likelihood", "need at least 2 states"));
        }
        let mut entries = Vec::with_capacity(n * n);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != n {
                return Err(RbiError::config(
                    format!("likelihood[{i}]"),
                    format!("row has {} entries, expected {n}", row.len()),
                ));
            }
            if let Some(v) = row.iter().find(|v| !(0.0..=1.0).contains(*v)) {
                return Err(RbiError::config(
                    format!("likelihood[{i}]"),
                    format!("entry {v} outside [0, 1]"),
                ));
            }
            entries.extend(row);
        }
        Ok(Self { n, entries })
    }

    pub fn size(&self) -> usize {
        self.n
    }

    /// `p(ℓ = 1 | σ = state, φ = query)`.
    pub fn get(&self, state: usize, query: usize) -> f64 {
        self.entries[state * self.n + query]
    }

    /// The column for `query`: `L[σ][query]` for every state σ.
    pub fn column(&self, query: usize) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |s| self.get(s, query))
    }

    pub fn is_one_hot(&self) -> bool {
        (0..self.n).all(|s| (0..self.n).all(|q| self.get(s, q) == if s == q { 1.0 } else { 0.0 }))
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.entries.chunks(self.n).map(<[f64]>::to_vec).collect()
    }
}

impl TryFrom<Vec<Vec<f64>>> for LikelihoodMatrix {
    type Error = RbiError;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::from_rows(rows)
    }
}

impl From<LikelihoodMatrix> for Vec<Vec<f64>> {
    fn from(m: LikelihoodMatrix) -> Self {
        m.rows()
    }
}

/// A univariate normal density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Gaussian {
    pub mean: f64,
    pub std_dev: f64,
}

impl Gaussian {
    pub fn new(mean: f64, std_dev: f64) -> Result<Self> {
        let g = Self { mean, std_dev };
        g.validate("gaussian")?;
        Ok(g)
    }

    pub(crate) fn validate(&self, field: &str) -> Result<()> {
        if !self.mean.is_finite() {
            return Err(RbiError::config(format!("{field}.mean"), "must be finite"));
        }
        if !(self.std_dev.is_finite() && self.std_dev > 0.0) {
            return Err(RbiError::config(
                format!("{field}.std_dev"),
                "must be finite and > 0",
            ));
        }
        Ok(())
    }

    pub fn ln_pdf(&self, x: f64) -> f64 {
        let z = (x - self.mean) / self.std_dev;
        -0.5 * z * z - self.std_dev.ln() - 0.5 * (2.0 * PI).ln()
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.ln_pdf(x).exp()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        Normal::new(self.mean, self.std_dev)
            .expect("validated gaussian")
            .sample(rng)
    }
}

/// Class-conditional evidence densities for target (`ℓ = 1`) and non-target (`ℓ = 0`) labels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvidenceModel {
    pub target: Gaussian,
    pub nontarget: Gaussian,
}

impl Default for EvidenceModel {
    fn default() -> Self {
        Self {
            target: Gaussian {
                mean: 0.0,
                std_dev: 1.0,
            },
            nontarget: Gaussian {
                mean: 3.0,
                std_dev: 1.5,
            },
        }
    }
}

impl EvidenceModel {
    pub fn new(target: Gaussian, nontarget: Gaussian) -> Result<Self> {
        let m = Self { target, nontarget };
        m.validate("evidence")?;
        Ok(m)
    }

    pub(crate) fn validate(&self, field: &str) -> Result<()> {
        self.target.validate(&format!("{field}.target"))?;
        self.nontarget.validate(&format!("{field}.nontarget"))
    }

    /// `ln p(ε | ℓ)` for `ℓ = 1` (target) or `ℓ = 0`.
    pub fn ln_density(&self, epsilon: f64, target: bool) -> f64 {
        if target {
            self.target.ln_pdf(epsilon)
        } else {
            self.nontarget.ln_pdf(epsilon)
        }
    }
}

/// The likelihood matrix and evidence densities together: everything needed to score
/// evidence against a state.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationModel {
    pub likelihood: LikelihoodMatrix,
    pub evidence: EvidenceModel,
}

impl ObservationModel {
    pub fn new(likelihood: LikelihoodMatrix, evidence: EvidenceModel) -> Self {
        Self {
            likelihood,
            evidence,
        }
    }

    pub fn num_states(&self) -> usize {
        self.likelihood.size()
    }

    fn check_index(&self, what: &'static str, index: usize) -> Result<()> {
        if index >= self.num_states() {
            return Err(RbiError::IndexOutOfRange {
                what,
                index,
                size: self.num_states(),
            });
        }
        Ok(())
    }

    /// `ln p(ε | σ, φ)` with the label marginalised out.
    pub fn ln_evidence_likelihood(&self, epsilon: f64, state: usize, query: usize) -> f64 {
        let l = self.likelihood.get(state, query);
        ln_mixture(
            l,
            self.evidence.ln_density(epsilon, true),
            self.evidence.ln_density(epsilon, false),
        )
    }
}

/// `ln(l·e^a + (1 − l)·e^b)` without underflow, treating `0·e^x` as 0.
pub(crate) fn ln_mixture(l: f64, ln_a: f64, ln_b: f64) -> f64 {
    if l >= 1.0 {
        ln_a
    } else if l <= 0.0 {
        ln_b
    } else {
        log_sum_exp(&[l.ln() + ln_a, (1.0 - l).ln() + ln_b])
    }
}

/// `p(ε | σ, φ) = L[σ][φ]·f_target(ε) + (1 − L[σ][φ])·f_nontarget(ε)`.
pub fn evidence_likelihood(
    epsilon: f64,
    state: usize,
    query: usize,
    model: &ObservationModel,
) -> Result<f64> {
    model.check_index("state", state)?;
    model.check_index("query", query)?;
    Ok(model.ln_evidence_likelihood(epsilon, state, query).exp())
}

/// `p(ε | φ, p) = Σ_σ p(σ)·p(ε | σ, φ)`.
pub fn evidence_marginal(
    epsilon: f64,
    query: usize,
    p: &ProbabilityVector,
    model: &ObservationModel,
) -> Result<f64> {
    model.check_index("query", query)?;
    check_dimension(model, p)?;
    Ok(ln_evidence_marginal(epsilon, query, p.values(), model).exp())
}

fn ln_evidence_marginal(epsilon: f64, query: usize, p: &[f64], model: &ObservationModel) -> f64 {
    let terms: Vec<f64> = p
        .iter()
        .enumerate()
        .map(|(s, ps)| ps.ln() + model.ln_evidence_likelihood(epsilon, s, query))
        .collect();
    log_sum_exp(&terms)
}

fn check_dimension(model: &ObservationModel, p: &ProbabilityVector) -> Result<()> {
    if p.len() != model.num_states() {
        return Err(RbiError::DimensionMismatch {
            expected: model.num_states(),
            actual: p.len(),
        });
    }
    Ok(())
}

/// A set of distinct queries presented in one sequence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct QueryBatch(Vec<usize>);

impl QueryBatch {
    /// Validates `1 ≤ len ≤ num_queries`, indices in range and pairwise distinct.
    pub fn new(queries: Vec<usize>, num_queries: usize) -> Result<Self> {
        if queries.is_empty() {
            return Err(RbiError::InvalidBatch("batch is empty".into()));
        }
        if queries.len() > num_queries {
            return Err(RbiError::InvalidBatch(format!(
                "batch of {} exceeds the {num_queries} available queries",
                queries.len()
            )));
        }
        let mut seen = HashSet::new();
        for &q in &queries {
            if q >= num_queries {
                return Err(RbiError::IndexOutOfRange {
                    what: "query",
                    index: q,
                    size: num_queries,
                });
            }
            if !seen.insert(q) {
                return Err(RbiError::InvalidBatch(format!("query {q} repeated")));
            }
        }
        Ok(Self(queries))
    }

    pub fn queries(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, query: usize) -> bool {
        self.0.contains(&query)
    }
}

/// One completed sequence: the batch, its evidence (one value per trial), and the posterior
/// after the update.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceRecord {
    pub batch: QueryBatch,
    pub evidence: Vec<f64>,
    pub posterior_after: ProbabilityVector,
}

/// `H_s`: the prior plus every completed sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct History {
    prior: ProbabilityVector,
    records: Vec<SequenceRecord>,
}

impl History {
    pub fn new(prior: ProbabilityVector) -> Self {
        Self {
            prior,
            records: Vec::new(),
        }
    }

    /// Builds a history from a posterior trajectory alone (no batches or evidence), for
    /// evaluating trajectory functionals such as the Momentum terms.
    pub fn from_trajectory(trajectory: Vec<ProbabilityVector>) -> Result<Self> {
        let mut iter = trajectory.into_iter();
        let prior = iter
            .next()
            .ok_or_else(|| RbiError::InvalidDistribution("empty trajectory".into()))?;
        let n = prior.len();
        let mut history = Self::new(prior);
        for p in iter {
            if p.len() != n {
                return Err(RbiError::DimensionMismatch {
                    expected: n,
                    actual: p.len(),
                });
            }
            history.records.push(SequenceRecord {
                batch: QueryBatch(Vec::new()),
                evidence: Vec::new(),
                posterior_after: p,
            });
        }
        Ok(history)
    }

    pub fn prior(&self) -> &ProbabilityVector {
        &self.prior
    }

    pub fn records(&self) -> &[SequenceRecord] {
        &self.records
    }

    /// `s`, the number of completed sequences.
    pub fn num_sequences(&self) -> usize {
        self.records.len()
    }

    pub fn num_states(&self) -> usize {
        self.prior.len()
    }

    /// `p(· | H_s)`.
    pub fn current(&self) -> &ProbabilityVector {
        self.records
            .last()
            .map(|r| &r.posterior_after)
            .unwrap_or(&self.prior)
    }

    /// `p(· | H_n)` for `n = 0..=s`.
    pub fn posterior_at(&self, n: usize) -> &ProbabilityVector {
        if n == 0 {
            &self.prior
        } else {
            &self.records[n - 1].posterior_after
        }
    }

    /// The `s + 1` posteriors `p(· | H_0), …, p(· | H_s)`.
    pub fn trajectory(&self) -> impl Iterator<Item = &ProbabilityVector> + '_ {
        std::iter::once(&self.prior).chain(self.records.iter().map(|r| &r.posterior_after))
    }
}

/// How the evidence marginal is conditioned inside a multi-trial sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MarginalMode {
    /// Recompute `p(ε | φ, ·)` against the running posterior before each trial.
    #[default]
    PerTrial,
    /// Condition every trial's marginal on the posterior at the start of the sequence.
    Frozen,
}

/// Applies one sequence of evidence to `history`, records it and returns the new posterior.
///
/// The result is floored at [`PROBABILITY_FLOOR`] and renormalised. Both [`MarginalMode`]s
/// yield the same normalised posterior (the marginal is state-independent); they differ only
/// in the intermediate normalisers.
pub fn posterior_update(
    history: &mut History,
    batch: &QueryBatch,
    evidence: &[f64],
    model: &ObservationModel,
    mode: MarginalMode,
) -> Result<ProbabilityVector> {
    if evidence.len() != batch.len() {
        return Err(RbiError::LengthMismatch {
            evidence: evidence.len(),
            batch: batch.len(),
        });
    }
    if let Some(e) = evidence.iter().find(|e| !e.is_finite()) {
        return Err(RbiError::NonFiniteEvidence(*e));
    }
    let start = history.current();
    check_dimension(model, start)?;
    for &q in batch.queries() {
        model.check_index("query", q)?;
    }

    let n = start.len();
    let mut log_post: Vec<f64> = start.values().iter().map(|p| p.ln()).collect();
    for (&query, &eps) in batch.queries().iter().zip(evidence) {
        let marginal_base: Vec<f64> = match mode {
            MarginalMode::PerTrial => {
                let lse = log_sum_exp(&log_post);
                log_post.iter().map(|l| (l - lse).exp()).collect()
            }
            MarginalMode::Frozen => start.values().to_vec(),
        };
        let ln_marginal = ln_evidence_marginal(eps, query, &marginal_base, model);
        if !ln_marginal.is_finite() {
            return Err(RbiError::DegenerateEvidence(format!(
                "p(ε = {eps} | φ = {query}) vanishes"
            )));
        }
        for (s, lp) in log_post.iter_mut().enumerate().take(n) {
            *lp += model.ln_evidence_likelihood(eps, s, query) - ln_marginal;
        }
    }
    let posterior = ProbabilityVector::from_log_weights(&log_post)
        .map_err(|e| RbiError::DegenerateEvidence(e.to_string()))?
        .floored(PROBABILITY_FLOOR);
    history.records.push(SequenceRecord {
        batch: batch.clone(),
        evidence: evidence.to_vec(),
        posterior_after: posterior.clone(),
    });
    Ok(posterior)
}

/// The MAP state of the current posterior (lowest index on ties).
pub fn map_estimate(history: &History) -> usize {
    argmax_state(history.current())
}
