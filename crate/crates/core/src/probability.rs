//! Probability vectors on the simplex and Rényi information measures.
//!
//! Entropy of order α:
//!
//! ```text
//! H_α(p) = 1/(1-α) · ln Σ_σ p(σ)^α
//! ```
//!
//! with the limits `H_1 = -Σ p ln p` (Shannon), `H_∞ = -ln max p` (min-entropy) and
//! `H_0 = ln |supp p|`. The order-α divergence is
//!
//! ```text
//! D_α(p ‖ q) = 1/(α-1) · ln Σ_σ p(σ)^α q(σ)^(1-α)
//! ```
//!
//! with Kullback–Leibler at α = 1 and `ln max p/q` at α = ∞.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{RbiError, Result};

/// Every posterior entry is floored at this value (then renormalised) after an update.
pub const PROBABILITY_FLOOR: f64 = 1e-12;

/// Tolerance on `Σ p = 1` accepted by [`ProbabilityVector::new`].
pub const SUM_TOLERANCE: f64 = 1e-12;

/// `|α - 1|` below this is evaluated as the Shannon limit.
pub const SHANNON_WINDOW: f64 = 1e-9;

/// α above this is evaluated as the min-entropy limit.
pub const MIN_ENTROPY_THRESHOLD: f64 = 1e9;

/// A point on the probability simplex over `n ≥ 2` states.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct ProbabilityVector(Vec<f64>);

impl ProbabilityVector {
    /// Validates `values` as a distribution: at least two finite, non-negative entries summing
    /// to one within [`SUM_TOLERANCE`].
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(RbiError::InvalidDistribution(format!(
                "need at least 2 states, got {}",
                values.len()
            )));
        }
        if let Some((i, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || **v < 0.0)
        {
            return Err(RbiError::InvalidDistribution(format!(
                "entry {i} is {v}; entries must be finite and non-negative"
            )));
        }
        let sum: f64 = values.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(RbiError::InvalidDistribution(format!(
                "entries sum to {sum}, expected 1"
            )));
        }
        Ok(Self(values))
    }

    /// Normalises non-negative weights into a distribution.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(RbiError::InvalidDistribution(
                "weights must be finite and non-negative".into(),
            ));
        }
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(RbiError::InvalidDistribution("weights sum to zero".into()));
        }
        Self::new(weights.into_iter().map(|w| w / total).collect())
    }

    /// Normalises log-weights (entries may be `-inf`) into a distribution.
    pub fn from_log_weights(log_weights: &[f64]) -> Result<Self> {
        let lse = log_sum_exp(log_weights);
        if !lse.is_finite() {
            return Err(RbiError::InvalidDistribution(
                "log-weights have no finite mass".into(),
            ));
        }
        let mut values: Vec<f64> = log_weights.iter().map(|l| (l - lse).exp()).collect();
        renormalize(&mut values);
        Self::new(values)
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(RbiError::InvalidDistribution(format!(
                "need at least 2 states, got {n}"
            )));
        }
        Ok(Self(vec![1.0 / n as f64; n]))
    }

    /// The simplex vertex `P(index)`.
    pub fn vertex(n: usize, index: usize) -> Result<Self> {
        if index >= n {
            return Err(RbiError::IndexOutOfRange {
                what: "state",
                index,
                size: n,
            });
        }
        let mut values = vec![0.0; n];
        values[index] = 1.0;
        Self::new(values)
    }

    /// Floors every entry at `floor` and renormalises.
    pub fn floored(&self, floor: f64) -> Self {
        let mut values: Vec<f64> = self.0.iter().map(|p| p.max(floor)).collect();
        renormalize(&mut values);
        Self(values)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn get(&self, index: usize) -> f64 {
        self.0[index]
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(0.0, f64::max)
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl AsRef<[f64]> for ProbabilityVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

impl<'de> Deserialize<'de> for ProbabilityVector {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let values = Vec::<f64>::deserialize(deserializer)?;
        ProbabilityVector::new(values).map_err(serde::de::Error::custom)
    }
}

fn renormalize(values: &mut [f64]) {
    let total: f64 = values.iter().sum();
    values.iter_mut().for_each(|v| *v /= total);
}

/// `ln Σ exp(x_i)`, returning `-inf` for an empty or all-`-inf` input.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// The order α of a Rényi measure, `α ∈ [0, ∞]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct AlphaOrder(f64);

/// How an [`AlphaOrder`] is evaluated numerically.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AlphaRegime {
    /// α = 0: log of the support size.
    Hartley,
    /// |α − 1| < 1e-9.
    Shannon,
    /// α > 1e9 or α = ∞.
    MinEntropy,
    General(f64),
}

impl AlphaOrder {
    pub const SHANNON: AlphaOrder = AlphaOrder(1.0);
    pub const INFINITY: AlphaOrder = AlphaOrder(f64::INFINITY);

    pub fn new(value: f64) -> Result<Self> {
        if value.is_nan() || value < 0.0 {
            return Err(RbiError::InvalidAlpha(value));
        }
        Ok(Self(value))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn regime(self) -> AlphaRegime {
        let a = self.0;
        if a == 0.0 {
            AlphaRegime::Hartley
        } else if (a - 1.0).abs() < SHANNON_WINDOW {
            AlphaRegime::Shannon
        } else if a > MIN_ENTROPY_THRESHOLD {
            AlphaRegime::MinEntropy
        } else {
            AlphaRegime::General(a)
        }
    }
}

impl fmt::Display for AlphaOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_infinite() {
            f.write_str("inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl std::str::FromStr for AlphaOrder {
    type Err = RbiError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => Ok(AlphaOrder::INFINITY),
            other => {
                let v: f64 = other.parse().map_err(|_| RbiError::InvalidAlpha(f64::NAN))?;
                AlphaOrder::new(v)
            }
        }
    }
}

// JSON has no infinity literal, so ∞ travels as the string "inf".
impl Serialize for AlphaOrder {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_infinite() {
            serializer.serialize_str("inf")
        } else {
            serializer.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for AlphaOrder {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Number(f64),
            Text(String),
        }
        match Repr::deserialize(deserializer)? {
            Repr::Number(v) => AlphaOrder::new(v).map_err(serde::de::Error::custom),
            Repr::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Rényi entropy `H_α(p)` in nats.
pub fn renyi_entropy(p: &ProbabilityVector, alpha: AlphaOrder) -> f64 {
    renyi_entropy_of(p.values(), alpha)
}

/// [`renyi_entropy`] on a raw slice that is already known to be a distribution.
pub(crate) fn renyi_entropy_of(p: &[f64], alpha: AlphaOrder) -> f64 {
    let h = match alpha.regime() {
        AlphaRegime::Hartley => (p.iter().filter(|x| **x > 0.0).count() as f64).ln(),
        AlphaRegime::Shannon => -p
            .iter()
            .filter(|x| **x > 0.0)
            .map(|x| x * x.ln())
            .sum::<f64>(),
        AlphaRegime::MinEntropy => -p.iter().copied().fold(0.0, f64::max).ln(),
        AlphaRegime::General(a) => {
            let log_sum = if (a - 1.0).abs() < 0.5 {
                // Σ p^α = Σ p + Σ p·(p^(α-1) − 1); expm1 keeps precision near α = 1.
                let mass: f64 = p.iter().sum();
                let excess: f64 = p
                    .iter()
                    .filter(|x| **x > 0.0)
                    .map(|x| x * ((a - 1.0) * x.ln()).exp_m1())
                    .sum();
                (excess + (mass - 1.0)).ln_1p()
            } else {
                let terms: Vec<f64> = p
                    .iter()
                    .filter(|x| **x > 0.0)
                    .map(|x| a * x.ln())
                    .collect();
                log_sum_exp(&terms)
            };
            log_sum / (1.0 - a)
        }
    };
    h.max(0.0)
}

/// Rényi divergence `D_α(p ‖ q)` in nats.
pub fn renyi_divergence(
    p: &ProbabilityVector,
    q: &ProbabilityVector,
    alpha: AlphaOrder,
) -> Result<f64> {
    renyi_divergence_of(p.values(), q.values(), alpha)
}

pub(crate) fn renyi_divergence_of(p: &[f64], q: &[f64], alpha: AlphaOrder) -> Result<f64> {
    if p.len() != q.len() {
        return Err(RbiError::DimensionMismatch {
            expected: p.len(),
            actual: q.len(),
        });
    }
    let regime = alpha.regime();
    let needs_support = !matches!(regime, AlphaRegime::Hartley)
        && !matches!(regime, AlphaRegime::General(a) if a < 1.0);
    if needs_support {
        if let Some(index) = p
            .iter()
            .zip(q)
            .position(|(pi, qi)| *pi > 0.0 && *qi == 0.0)
        {
            return Err(RbiError::SupportMismatch { index });
        }
    }
    // Pairs on the support of p.
    let pairs = p.iter().zip(q).filter(|(pi, _)| **pi > 0.0);
    let d = match regime {
        AlphaRegime::Hartley => -pairs.map(|(_, qi)| *qi).sum::<f64>().ln(),
        AlphaRegime::Shannon => pairs.map(|(pi, qi)| pi * (pi / qi).ln()).sum(),
        AlphaRegime::MinEntropy => pairs
            .map(|(pi, qi)| (pi / qi).ln())
            .fold(f64::NEG_INFINITY, f64::max),
        AlphaRegime::General(a) => {
            let pairs: Vec<(f64, f64)> = pairs
                .filter(|(_, qi)| **qi > 0.0)
                .map(|(pi, qi)| (*pi, *qi))
                .collect();
            let log_sum = if (a - 1.0).abs() < 0.5 {
                let mass: f64 = p.iter().sum();
                let excess: f64 = pairs
                    .iter()
                    .map(|(pi, qi)| pi * ((a - 1.0) * (pi / qi).ln()).exp_m1())
                    .sum();
                (excess + (mass - 1.0)).ln_1p()
            } else {
                let terms: Vec<f64> = pairs
                    .iter()
                    .map(|(pi, qi)| a * pi.ln() + (1.0 - a) * qi.ln())
                    .collect();
                log_sum_exp(&terms)
            };
            log_sum / (a - 1.0)
        }
    };
    Ok(d.max(0.0))
}

/// Index of the largest entry; ties go to the lowest index.
pub fn argmax_state(p: &ProbabilityVector) -> usize {
    argmax_slice(p.values())
}

pub(crate) fn argmax_slice(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn pv(v: &[f64]) -> ProbabilityVector {
        ProbabilityVector::new(v.to_vec()).unwrap()
    }

    fn alpha(v: f64) -> AlphaOrder {
        AlphaOrder::new(v).unwrap()
    }

    #[test]
    fn rejects_invalid_vectors() {
        assert!(ProbabilityVector::new(vec![1.0]).is_err());
        assert!(ProbabilityVector::new(vec![0.5, 0.6]).is_err());
        assert!(ProbabilityVector::new(vec![1.5, -0.5]).is_err());
        assert!(ProbabilityVector::new(vec![f64::NAN, 1.0]).is_err());
        assert!(ProbabilityVector::new(vec![0.1, 0.7, 0.2]).is_ok());
    }

    #[test]
    fn rejects_negative_alpha() {
        assert_eq!(AlphaOrder::new(-0.5), Err(RbiError::InvalidAlpha(-0.5)));
        assert!(AlphaOrder::new(f64::NAN).is_err());
        assert!(AlphaOrder::new(f64::INFINITY).is_ok());
    }

    #[test]
    fn uniform_entropy_is_log_n_for_every_order() {
        let p = ProbabilityVector::uniform(3).unwrap();
        for a in [0.0, 0.5, 1.0, 2.0, 7.0, f64::INFINITY] {
            assert_abs_diff_eq!(renyi_entropy(&p, alpha(a)), 3f64.ln(), epsilon = 1e-12);
        }
    }

    #[test]
    fn degenerate_entropy_is_zero() {
        let p = pv(&[1.0, 0.0, 0.0]);
        for a in [0.0, 0.5, 1.0, 2.0, f64::INFINITY] {
            assert_abs_diff_eq!(renyi_entropy(&p, alpha(a)), 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn collision_entropy_by_hand() {
        // Σ p² = 0.25 + 0.0625 + 0.0625 = 0.375
        let p = pv(&[0.5, 0.25, 0.25]);
        assert_abs_diff_eq!(renyi_entropy(&p, alpha(2.0)), -(0.375f64).ln(), epsilon = 1e-14);
        assert_abs_diff_eq!(renyi_entropy(&p, alpha(2.0)), 0.9808, epsilon = 1e-4);
    }

    #[test]
    fn hartley_counts_support() {
        let p = pv(&[0.5, 0.5, 0.0, 0.0]);
        assert_abs_diff_eq!(renyi_entropy(&p, alpha(0.0)), 2f64.ln(), epsilon = 1e-15);
    }

    #[test]
    fn divergence_examples() {
        let p = pv(&[0.3, 0.3, 0.4]);
        assert_abs_diff_eq!(renyi_divergence(&p, &p, alpha(2.0)).unwrap(), 0.0, epsilon = 1e-15);

        let p = pv(&[1.0, 0.0]);
        let q = pv(&[0.5, 0.5]);
        assert_abs_diff_eq!(
            renyi_divergence(&p, &q, alpha(2.0)).unwrap(),
            2f64.ln(),
            epsilon = 1e-14
        );

        // KL oracle: 0.6 ln(0.6/0.5) + 0.4 ln(0.4/0.5)
        let p = pv(&[0.6, 0.4]);
        let kl = 0.6 * (1.2f64).ln() + 0.4 * (0.8f64).ln();
        assert_abs_diff_eq!(renyi_divergence(&p, &q, alpha(1.0)).unwrap(), kl, epsilon = 1e-15);
        assert_abs_diff_eq!(kl, 0.0201, epsilon = 1e-4);
        assert_abs_diff_eq!(
            renyi_divergence(&p, &q, alpha(1.0 + 1e-6)).unwrap(),
            kl,
            epsilon = 1e-6
        );
    }

    #[test]
    fn divergence_support_mismatch() {
        let p = pv(&[0.5, 0.5]);
        let q = pv(&[1.0, 0.0]);
        assert_eq!(
            renyi_divergence(&p, &q, alpha(2.0)),
            Err(RbiError::SupportMismatch { index: 1 })
        );
        assert!(renyi_divergence(&p, &q, alpha(1.0)).is_err());
        // Below order one the mismatched term simply vanishes.
        assert!(renyi_divergence(&p, &q, alpha(0.5)).unwrap().is_finite());
    }

    #[test]
    fn argmax_ties_go_low() {
        assert_eq!(argmax_state(&pv(&[0.2, 0.5, 0.3])), 1);
        assert_eq!(argmax_state(&pv(&[0.4, 0.4, 0.2])), 0);
        let third = 1.0 / 3.0;
        assert_eq!(argmax_state(&pv(&[third, third, third])), 0);
    }

    #[test]
    fn floor_keeps_vector_valid() {
        let p = pv(&[1.0, 0.0, 0.0]).floored(PROBABILITY_FLOOR);
        assert!(p.values().iter().all(|x| *x > 0.0));
        assert!(ProbabilityVector::new(p.values().to_vec()).is_ok());
    }

    #[test]
    fn alpha_serde_handles_infinity() {
        let a: AlphaOrder = serde_json::from_str("\"inf\"").unwrap();
        assert_eq!(a, AlphaOrder::INFINITY);
        assert_eq!(serde_json::to_string(&a).unwrap(), "\"inf\"");
        let b: AlphaOrder = serde_json::from_str("2.5").unwrap();
        assert_eq!(b.value(), 2.5);
        assert!(serde_json::from_str::<AlphaOrder>("-1").is_err());
    }

    fn arb_distribution() -> impl Strategy<Value = ProbabilityVector> {
        prop::collection::vec(0.0f64..1.0, 2..12).prop_filter_map("zero mass", |w| {
            ProbabilityVector::from_weights(w).ok()
        })
    }

    proptest! {
        #[test]
        fn entropy_bounded_and_monotone(p in arb_distribution()) {
            let log_n = (p.len() as f64).ln();
            let grid = [0.0, 0.5, 1.0, 2.0, 5.0, f64::INFINITY];
            let mut prev = f64::INFINITY;
            for a in grid {
                let h = renyi_entropy(&p, alpha(a));
                prop_assert!(h >= 0.0 && h <= log_n + 1e-12);
                prop_assert!(h <= prev + 1e-12);
                prev = h;
            }
        }

        #[test]
        fn argmax_invariant_under_monotone_rescaling(p in arb_distribution()) {
            let rescaled = ProbabilityVector::from_weights(
                p.values().iter().map(|x| x.powf(3.0) + 2.0 * x).collect(),
            ).unwrap();
            prop_assert_eq!(argmax_state(&p), argmax_state(&rescaled));
        }

        #[test]
        fn divergence_nonnegative(p in arb_distribution(), seed in any::<u64>()) {
            let q = ProbabilityVector::from_weights(
                p.values().iter().enumerate()
                    .map(|(i, x)| x + ((seed >> (i % 60)) & 7) as f64 * 0.01 + 1e-3)
                    .collect(),
            ).unwrap();
            for a in [0.5, 2.0, 5.0] {
                prop_assert!(renyi_divergence(&p, &q, alpha(a)).unwrap() >= 0.0);
            }
        }
    }
}
