//! Expected posterior Rényi entropy over the scalar evidence axis.
//!
//! For a candidate query `φ`,
//!
//! ```text
//! H_α(σ | ε, φ, H) = E_{p(ε | φ, H)} [ H_α(p(· | ε, φ, H)) ]
//! ```
//!
//! evaluated with a trapezoid rule on `[min μ − k·max s, max μ + k·max s]`. The integrand is
//! weighted by the evidence marginal and normalised by the quadrature of that marginal, so an
//! uninformative or degenerate case integrates exactly.
//!
//! States sharing the same label probability `L[σ][φ]` receive the same likelihood, so the
//! posterior at each grid point is summarised per group of equal `L` values. With a one-hot
//! likelihood there are only two groups per query regardless of the state count.

use serde::{Deserialize, Serialize};

use crate::error::{RbiError, Result};
use crate::inference::{ln_mixture, EvidenceModel, LikelihoodMatrix, ObservationModel};
use crate::probability::{log_sum_exp, AlphaOrder, AlphaRegime, ProbabilityVector};

pub const MIN_QUADRATURE_POINTS: usize = 33;

/// Trapezoid grid over the evidence axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadratureSpec {
    pub points: usize,
    /// Half-width of the grid beyond the extreme means, in units of the largest std-dev.
    pub half_width_sigmas: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            points: 513,
            half_width_sigmas: 8.0,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.points < MIN_QUADRATURE_POINTS {
            return Err(RbiError::config(
                "quadrature.points",
                format!("need at least {MIN_QUADRATURE_POINTS}, got {}", self.points),
            ));
        }
        if !(self.half_width_sigmas.is_finite() && self.half_width_sigmas > 0.0) {
            return Err(RbiError::config(
                "quadrature.half_width_sigmas",
                "must be finite and > 0",
            ));
        }
        Ok(())
    }
}

/// Class-conditional log-densities tabulated on the quadrature grid.
#[derive(Debug, Clone)]
pub struct EvidenceGrid {
    nodes: Vec<f64>,
    ln_weight: Vec<f64>,
    ln_target: Vec<f64>,
    ln_nontarget: Vec<f64>,
}

impl EvidenceGrid {
    pub fn new(evidence: &EvidenceModel, spec: &QuadratureSpec) -> Result<Self> {
        spec.validate()?;
        let (t, nt) = (evidence.target, evidence.nontarget);
        let spread = spec.half_width_sigmas * t.std_dev.max(nt.std_dev);
        let lo = t.mean.min(nt.mean) - spread;
        let hi = t.mean.max(nt.mean) + spread;
        let step = (hi - lo) / (spec.points - 1) as f64;
        let nodes: Vec<f64> = (0..spec.points).map(|i| lo + step * i as f64).collect();
        let ln_weight = (0..spec.points)
            .map(|i| {
                if i == 0 || i == spec.points - 1 {
                    (0.5 * step).ln()
                } else {
                    step.ln()
                }
            })
            .collect();
        Ok(Self {
            ln_target: nodes.iter().map(|&e| t.ln_pdf(e)).collect(),
            ln_nontarget: nodes.iter().map(|&e| nt.ln_pdf(e)).collect(),
            nodes,
            ln_weight,
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Expected Rényi entropy of the posterior after observing the evidence of `query`.
    pub fn conditional_entropy(
        &self,
        p: &ProbabilityVector,
        query: usize,
        likelihood: &LikelihoodMatrix,
        alpha: AlphaOrder,
    ) -> Result<f64> {
        if p.len() != likelihood.size() {
            return Err(RbiError::DimensionMismatch {
                expected: likelihood.size(),
                actual: p.len(),
            });
        }
        if query >= likelihood.size() {
            return Err(RbiError::IndexOutOfRange {
                what: "query",
                index: query,
                size: likelihood.size(),
            });
        }
        let groups = LabelGroups::new(p.values(), likelihood, query, alpha);
        let regime = alpha.regime();

        let mut ln_lik = vec![0.0; groups.len()];
        let mut ln_joint = vec![0.0; groups.len()];
        let mut log_mass = Vec::with_capacity(self.nodes.len());
        let mut entropy = Vec::with_capacity(self.nodes.len());
        for i in 0..self.nodes.len() {
            for (g, group) in groups.iter().enumerate() {
                ln_lik[g] = ln_mixture(group.label, self.ln_target[i], self.ln_nontarget[i]);
                ln_joint[g] = group.ln_mass + ln_lik[g];
            }
            let ln_marginal = log_sum_exp(&ln_joint);
            log_mass.push(self.ln_weight[i] + ln_marginal);
            if !ln_marginal.is_finite() {
                entropy.push(0.0);
                continue;
            }
            entropy.push(groups.posterior_entropy(regime, &ln_lik, ln_marginal).max(0.0));
        }

        let peak = log_mass.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !peak.is_finite() {
            return Err(RbiError::DegenerateEvidence(format!(
                "evidence marginal of query {query} underflows on the whole grid"
            )));
        }
        let (mut acc, mut norm) = (0.0, 0.0);
        for (lm, h) in log_mass.iter().zip(&entropy) {
            let w = (lm - peak).exp();
            acc += w * h;
            norm += w;
        }
        Ok(acc / norm)
    }
}

/// `H_α₂(σ | ε, φ, H)` for the posterior `p`, with a grid built from `spec`.
pub fn conditional_renyi_entropy(
    p: &ProbabilityVector,
    query: usize,
    model: &ObservationModel,
    alpha: AlphaOrder,
    spec: &QuadratureSpec,
) -> Result<f64> {
    EvidenceGrid::new(&model.evidence, spec)?.conditional_entropy(
        p,
        query,
        &model.likelihood,
        alpha,
    )
}

/// Per-group sufficient statistics of the prior for one query column.
struct LabelGroup {
    label: f64,
    /// ln Σ p over the group.
    ln_mass: f64,
    mass: f64,
    /// Order-dependent statistic: ln Σ p^α (general), Σ p ln p (Shannon),
    /// ln max p (min-entropy) or the support count (Hartley).
    stat: f64,
}

struct LabelGroups(Vec<LabelGroup>);

impl LabelGroups {
    fn new(p: &[f64], likelihood: &LikelihoodMatrix, query: usize, alpha: AlphaOrder) -> Self {
        let mut members: Vec<(f64, Vec<f64>)> = Vec::new();
        for (ps, l) in p.iter().zip(likelihood.column(query)) {
            if *ps <= 0.0 {
                continue;
            }
            match members.iter_mut().find(|(label, _)| *label == l) {
                Some((_, v)) => v.push(*ps),
                None => members.push((l, vec![*ps])),
            }
        }
        let groups = members
            .into_iter()
            .map(|(label, ps)| {
                let mass: f64 = ps.iter().sum();
                let stat = match alpha.regime() {
                    AlphaRegime::Hartley => ps.len() as f64,
                    AlphaRegime::Shannon => ps.iter().map(|x| x * x.ln()).sum(),
                    AlphaRegime::MinEntropy => ps.iter().copied().fold(0.0, f64::max).ln(),
                    AlphaRegime::General(a) => {
                        let terms: Vec<f64> = ps.iter().map(|x| a * x.ln()).collect();
                        log_sum_exp(&terms)
                    }
                };
                LabelGroup {
                    label,
                    ln_mass: mass.ln(),
                    mass,
                    stat,
                }
            })
            .collect();
        Self(groups)
    }

    fn len(&self) -> usize {
        self.0.len()
    }

    fn iter(&self) -> impl Iterator<Item = &LabelGroup> {
        self.0.iter()
    }

    /// Entropy of `p(σ) · lik_g / m`, given `ln lik_g` per group and `ln m`.
    fn posterior_entropy(&self, regime: AlphaRegime, ln_lik: &[f64], ln_marginal: f64) -> f64 {
        let live = self.0.iter().zip(ln_lik).filter(|(_, l)| l.is_finite());
        match regime {
            AlphaRegime::Hartley => live.map(|(g, _)| g.stat).sum::<f64>().ln(),
            AlphaRegime::Shannon => -live
                .map(|(g, l)| {
                    let ln_ratio = l - ln_marginal;
                    ln_ratio.exp() * (g.stat + g.mass * ln_ratio)
                })
                .sum::<f64>(),
            AlphaRegime::MinEntropy => -live
                .map(|(g, l)| g.stat + l - ln_marginal)
                .fold(f64::NEG_INFINITY, f64::max),
            AlphaRegime::General(a) => {
                let terms: Vec<f64> = live.map(|(g, l)| g.stat + a * l).collect();
                (log_sum_exp(&terms) - a * ln_marginal) / (1.0 - a)
            }
        }
    }
}
