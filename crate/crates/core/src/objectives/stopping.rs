use serde::{Deserialize, Serialize};

use super::momentum::i_momentum;
use crate::error::{RbiError, Result};
use crate::inference::History;
use crate::probability::{renyi_entropy, AlphaOrder};

/// Stopping constraint `H_α₁(σ | H_s) − λ₁ D_α₁(H_s) < τ′`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StoppingConfig {
    pub alpha1: AlphaOrder,
    pub lambda1: f64,
    pub tau_prime: f64,
}

impl Default for StoppingConfig {
    /// Min-entropy with no momentum relaxation: stop once the MAP probability exceeds 0.9.
    fn default() -> Self {
        Self {
            alpha1: AlphaOrder::INFINITY,
            lambda1: 0.0,
            tau_prime: -(0.9f64.ln()),
        }
    }
}

impl StoppingConfig {
    /// The posterior-threshold rule `max p > τ` expressed as a min-entropy constraint.
    pub fn posterior_threshold(tau: f64) -> Result<Self> {
        if !(tau > 0.0 && tau <= 1.0) {
            return Err(RbiError::config("stopping.tau", format!("{tau} outside (0, 1]")));
        }
        Ok(Self {
            tau_prime: -tau.ln(),
            ..Self::default()
        })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda1.is_finite() && self.lambda1 >= 0.0) {
            return Err(RbiError::config(
                "stopping.lambda1",
                format!("{} must be finite and >= 0", self.lambda1),
            ));
        }
        if !self.tau_prime.is_finite() {
            return Err(RbiError::config("stopping.tau_prime", "must be finite"));
        }
        Ok(())
    }

    /// Value forced before the first sequence so the loop always runs at least once.
    pub fn initial_value(&self) -> f64 {
        self.tau_prime + 1.0
    }

    pub fn should_stop(&self, value: f64) -> bool {
        value < self.tau_prime
    }
}

/// `H_α₁(current posterior) − λ₁ · D_α₁(H_s)`.
pub fn stopping_value(history: &History, config: &StoppingConfig) -> Result<f64> {
    let entropy = renyi_entropy(history.current(), config.alpha1);
    if config.lambda1 == 0.0 {
        return Ok(entropy);
    }
    Ok(entropy - config.lambda1 * i_momentum(history, config.alpha1)?)
}
