//! Q-Momentum and I-Momentum: averaged functionals of posterior changes along a history.
//!
//! ```text
//! m_α(φ, H_n) = 1/(α−1) · ln Σ_σ p_{n+1}(σ)^α / p_n(σ)^(α−1) · L[σ][φ]
//! d_α(H_n)    = 1/(α−1) · ln Σ_σ p_{n+1}(σ)^α / p_n(σ)^(α−1)     (= D_α(p_{n+1} ‖ p_n))
//! ```
//!
//! Both are averaged over `n = 0..s−1`; an empty history has zero momentum.

use serde::{Deserialize, Serialize};

use crate::error::{RbiError, Result};
use crate::inference::{posterior_update, History, MarginalMode, ObservationModel, QueryBatch};
use crate::probability::{log_sum_exp, renyi_divergence_of, AlphaOrder, AlphaRegime};

/// Which posterior stands in for `p_{n+1}` in the Q-Momentum summand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MomentumVariant {
    /// The posterior actually reached after sequence `n + 1`.
    #[default]
    RealizedTrajectory,
    /// `p_n` re-updated with the candidate query and the first recorded evidence value of
    /// sequence `n + 1`.
    CounterfactualReupdate,
}

/// Averaged Q-Momentum `M_α(φ, H_s)`. Returns `-inf` when the candidate's likelihood column
/// has no support.
pub fn q_momentum(
    query: usize,
    history: &History,
    model: &ObservationModel,
    alpha: AlphaOrder,
    variant: MomentumVariant,
) -> Result<f64> {
    let n_states = history.num_states();
    if query >= n_states || model.num_states() != n_states {
        return Err(RbiError::IndexOutOfRange {
            what: "query",
            index: query,
            size: n_states.min(model.num_states()),
        });
    }
    let s = history.num_sequences();
    if s == 0 {
        return Ok(0.0);
    }
    let weights: Vec<f64> = model.likelihood.column(query).collect();
    if weights.iter().all(|w| *w <= 0.0) {
        return Ok(f64::NEG_INFINITY);
    }

    let mut total = 0.0;
    for n in 0..s {
        let prev = history.posterior_at(n);
        let step = match variant {
            MomentumVariant::RealizedTrajectory => {
                step_momentum(history.posterior_at(n + 1).values(), prev.values(), &weights, alpha)
            }
            MomentumVariant::CounterfactualReupdate => {
                let eps = *history.records()[n].evidence.first().ok_or_else(|| {
                    RbiError::config(
                        "policy.momentum_variant",
                        "counterfactual re-update needs recorded evidence",
                    )
                })?;
                let mut scratch = History::new(prev.clone());
                let batch = QueryBatch::new(vec![query], n_states)?;
                let next =
                    posterior_update(&mut scratch, &batch, &[eps], model, MarginalMode::PerTrial)?;
                step_momentum(next.values(), prev.values(), &weights, alpha)
            }
        };
        if step == f64::NEG_INFINITY {
            return Ok(f64::NEG_INFINITY);
        }
        total += step;
    }
    Ok(total / s as f64)
}

/// One summand `m_α` with weights `w_σ = L[σ][φ]`.
///
/// At the Shannon order the summand is singular unless `W = Σ w·p_{n+1} = 1`; there the finite
/// part of its expansion, `ln W + Σ w·p_{n+1}·ln(p_{n+1}/p_n) / W`, is used.
fn step_momentum(next: &[f64], prev: &[f64], weights: &[f64], alpha: AlphaOrder) -> f64 {
    let support = || {
        next.iter()
            .zip(prev)
            .zip(weights)
            .filter(|((pn, _), w)| **w > 0.0 && **pn > 0.0)
            .map(|((pn, pp), w)| (*pn, *pp, *w))
    };
    if support().next().is_none() {
        return f64::NEG_INFINITY;
    }
    match alpha.regime() {
        AlphaRegime::Hartley => -support().map(|(_, pp, w)| w * pp).sum::<f64>().ln(),
        AlphaRegime::Shannon => {
            let mass: f64 = support().map(|(pn, _, w)| w * pn).sum();
            let drift: f64 = support().map(|(pn, pp, w)| w * pn * (pn / pp).ln()).sum();
            mass.ln() + drift / mass
        }
        AlphaRegime::MinEntropy => support()
            .map(|(pn, pp, _)| (pn / pp).ln())
            .fold(f64::NEG_INFINITY, f64::max),
        AlphaRegime::General(a) => {
            let terms: Vec<f64> = support()
                .map(|(pn, pp, w)| w.ln() + a * pn.ln() + (1.0 - a) * pp.ln())
                .collect();
            log_sum_exp(&terms) / (a - 1.0)
        }
    }
}

/// Averaged I-Momentum `D_α(H_s)`: the mean order-α divergence between consecutive posteriors.
pub fn i_momentum(history: &History, alpha: AlphaOrder) -> Result<f64> {
    let s = history.num_sequences();
    if s == 0 {
        return Ok(0.0);
    }
    let mut total = 0.0;
    for n in 0..s {
        total += renyi_divergence_of(
            history.posterior_at(n + 1).values(),
            history.posterior_at(n).values(),
            alpha,
        )?;
    }
    Ok(total / s as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inference::{EvidenceModel, LikelihoodMatrix};
    use crate::probability::ProbabilityVector;
    use approx::assert_abs_diff_eq;

    fn pv(v: &[f64]) -> ProbabilityVector {
        ProbabilityVector::new(v.to_vec()).unwrap()
    }

    fn one_hot(n: usize) -> ObservationModel {
        ObservationModel::new(LikelihoodMatrix::one_hot(n).unwrap(), EvidenceModel::default())
    }

    fn alpha(v: f64) -> AlphaOrder {
        AlphaOrder::new(v).unwrap()
    }

    const REALIZED: MomentumVariant = MomentumVariant::RealizedTrajectory;

    #[test]
    fn empty_history_has_zero_momentum() {
        let h = History::new(ProbabilityVector::uniform(3).unwrap());
        assert_eq!(q_momentum(1, &h, &one_hot(3), alpha(2.0), REALIZED).unwrap(), 0.0);
        assert_eq!(i_momentum(&h, alpha(2.0)).unwrap(), 0.0);
    }

    #[test]
    fn constant_posterior_reduces_to_mean_log_probability() {
        // p_{n+1} = p_n  ⇒  m_2 = ln(p² / p) = ln p(φ)
        let p = pv(&[0.2, 0.5, 0.3]);
        let h = History::from_trajectory(vec![p.clone(), p.clone(), p.clone()]).unwrap();
        for q in 0..3 {
            let m = q_momentum(q, &h, &one_hot(3), alpha(2.0), REALIZED).unwrap();
            assert_abs_diff_eq!(m, p.get(q).ln(), epsilon = 1e-14);
        }
    }

    #[test]
    fn single_step_q_momentum_by_hand() {
        let h = History::from_trajectory(vec![pv(&[0.5, 0.5]), pv(&[0.8, 0.2])]).unwrap();
        let m = q_momentum(0, &h, &one_hot(2), alpha(2.0), REALIZED).unwrap();
        assert_abs_diff_eq!(m, (1.28f64).ln(), epsilon = 1e-14);
        assert_abs_diff_eq!(m, 0.2469, epsilon = 1e-4);
    }

    #[test]
    fn empty_likelihood_column_is_sentinel() {
        let l = LikelihoodMatrix::from_rows(vec![vec![1.0, 0.0], vec![0.0, 0.0]]).unwrap();
        let model = ObservationModel::new(l, EvidenceModel::default());
        let h = History::from_trajectory(vec![pv(&[0.5, 0.5]), pv(&[0.8, 0.2])]).unwrap();
        assert_eq!(
            q_momentum(1, &h, &model, alpha(2.0), REALIZED).unwrap(),
            f64::NEG_INFINITY
        );
        assert!(q_momentum(0, &h, &model, alpha(0.5), REALIZED).unwrap().is_finite());
    }

    #[test]
    fn shannon_order_is_finite() {
        let h = History::from_trajectory(vec![pv(&[0.5, 0.5]), pv(&[0.8, 0.2])]).unwrap();
        let m = q_momentum(0, &h, &one_hot(2), alpha(1.0), REALIZED).unwrap();
        // ln 0.8 + 0.8·ln(1.6)/0.8
        assert_abs_diff_eq!(m, 0.8f64.ln() + 1.6f64.ln(), epsilon = 1e-14);
    }

    #[test]
    fn i_momentum_examples() {
        let p = pv(&[0.3, 0.7]);
        let flat = History::from_trajectory(vec![p.clone(), p.clone(), p]).unwrap();
        assert_abs_diff_eq!(i_momentum(&flat, alpha(2.0)).unwrap(), 0.0, epsilon = 1e-15);

        let one = History::from_trajectory(vec![pv(&[0.5, 0.5]), pv(&[0.8, 0.2])]).unwrap();
        let d = i_momentum(&one, alpha(2.0)).unwrap();
        assert_abs_diff_eq!(d, (1.36f64).ln(), epsilon = 1e-14);
        assert_abs_diff_eq!(d, 0.3075, epsilon = 1e-4);

        let two = History::from_trajectory(vec![pv(&[0.5, 0.5]), pv(&[0.5, 0.5]), pv(&[0.8, 0.2])]).unwrap();
        assert_abs_diff_eq!(i_momentum(&two, alpha(2.0)).unwrap(), d / 2.0, epsilon = 1e-14);
    }

    #[test]
    fn counterfactual_variant_needs_evidence() {
        let h = History::from_trajectory(vec![pv(&[0.5, 0.5]), pv(&[0.8, 0.2])]).unwrap();
        assert!(q_momentum(0, &h, &one_hot(2), alpha(2.0), MomentumVariant::CounterfactualReupdate).is_err());
    }

    #[test]
    fn counterfactual_matches_realized_for_the_asked_query() {
        let model = one_hot(3);
        let mut h = History::new(pv(&[0.2, 0.3, 0.5]));
        for (q, eps) in [(1, 0.4), (2, 3.3), (1, -0.2)] {
            let batch = QueryBatch::new(vec![q], 3).unwrap();
            posterior_update(&mut h, &batch, &[eps], &model, MarginalMode::PerTrial).unwrap();
        }
        // Query 1 was asked in sequences 1 and 3 only, so the variants differ; but along a
        // history that only ever asked query 0, re-updating with query 0 reproduces it.
        let mut h0 = History::new(pv(&[0.2, 0.3, 0.5]));
        for eps in [0.4, 3.3, -0.2] {
            let batch = QueryBatch::new(vec![0], 3).unwrap();
            posterior_update(&mut h0, &batch, &[eps], &model, MarginalMode::PerTrial).unwrap();
        }
        let a = q_momentum(0, &h0, &model, alpha(2.0), REALIZED).unwrap();
        let b = q_momentum(0, &h0, &model, alpha(2.0), MomentumVariant::CounterfactualReupdate).unwrap();
        assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        let c = q_momentum(1, &h, &model, alpha(2.0), REALIZED).unwrap();
        let d = q_momentum(1, &h, &model, alpha(2.0), MomentumVariant::CounterfactualReupdate).unwrap();
        assert!((c - d).abs() > 1e-6);
    }
}
