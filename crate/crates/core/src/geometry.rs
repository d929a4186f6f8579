//! Geometry of posterior trajectories on the probability simplex: collinearity of single-query
//! steps, the posterior-threshold decision boundary, and its entropy-threshold counterparts.

use serde::{Deserialize, Serialize};

use crate::error::{RbiError, Result};
use crate::probability::{renyi_entropy, AlphaOrder, AlphaRegime, ProbabilityVector};

/// Confidence threshold `τ` on an `n`-state simplex, with a Rényi order for entropy contours.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundarySpec {
    pub tau: f64,
    pub n: usize,
    pub alpha: AlphaOrder,
}

impl BoundarySpec {
    pub fn new(tau: f64, n: usize, alpha: AlphaOrder) -> Result<Self> {
        let spec = Self { tau, n, alpha };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(RbiError::InvalidBoundary(format!("n = {} must exceed 1", self.n)));
        }
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return Err(RbiError::InvalidBoundary(format!("tau = {} outside (0, 1]", self.tau)));
        }
        if self.tau < 1.0 / self.n as f64 {
            return Err(RbiError::InvalidBoundary(format!(
                "tau = {} below 1/n = {}",
                self.tau,
                1.0 / self.n as f64
            )));
        }
        Ok(())
    }
}

/// Norm of the component of `p_next − p_prev` orthogonal to `P(φ) − p_prev`, where `P(φ)` is the
/// vertex of the queried state.
pub fn collinearity_residual(
    p_prev: &ProbabilityVector,
    p_next: &ProbabilityVector,
    phi: usize,
) -> Result<f64> {
    if p_prev.len() != p_next.len() {
        return Err(RbiError::DimensionMismatch {
            expected: p_prev.len(),
            actual: p_next.len(),
        });
    }
    if phi >= p_prev.len() {
        return Err(RbiError::IndexOutOfRange {
            what: "query",
            index: phi,
            size: p_prev.len(),
        });
    }
    let d: Vec<f64> = p_next.values().iter().zip(p_prev.values()).map(|(a, b)| a - b).collect();
    let u: Vec<f64> = p_prev
        .values()
        .iter()
        .enumerate()
        .map(|(i, b)| if i == phi { 1.0 - b } else { -b })
        .collect();
    let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>();
    let dd = dot(&d, &d);
    if dd == 0.0 {
        return Ok(0.0);
    }
    let uu = dot(&u, &u);
    if uu == 0.0 {
        return Ok(dd.sqrt());
    }
    let t = dot(&d, &u) / uu;
    Ok(d.iter().zip(&u).map(|(a, b)| (a - t * b).powi(2)).sum::<f64>().sqrt())
}

fn xlogx(x: f64) -> f64 {
    if x > 0.0 {
        x * x.ln()
    } else {
        0.0
    }
}

/// `τ″ = −τ ln τ − (1−τ) ln((1−τ)/(n−1))`, the Shannon entropy of the midpoint `P_m`.
pub fn tau_double_prime(b: &BoundarySpec) -> Result<f64> {
    b.validate()?;
    let rest = 1.0 - b.tau;
    let per = rest / (b.n - 1) as f64;
    Ok(-xlogx(b.tau) - if rest > 0.0 { rest * per.ln() } else { 0.0 })
}

/// `P_m`: mass `τ` on state 0 and `(1−τ)/(n−1)` elsewhere.
pub fn midpoint(b: &BoundarySpec) -> Result<ProbabilityVector> {
    b.validate()?;
    Ok(spread_point(b.tau, b.n))
}

fn spread_point(tau: f64, n: usize) -> ProbabilityVector {
    let per = (1.0 - tau) / (n - 1) as f64;
    let mut v = vec![per; n];
    v[0] = tau;
    ProbabilityVector::from_weights(v).expect("valid boundary point")
}

fn edge_point(tau: f64, n: usize) -> ProbabilityVector {
    let mut w = vec![0.0; n];
    w[0] = tau;
    w[1] = 1.0 - tau;
    ProbabilityVector::from_weights(w).expect("valid boundary point")
}

/// `v_n(τ) = [τ, (1−τ)/(n−1), …]` and `w_n(τ) = [τ, 1−τ, 0, …]`.
pub fn boundary_points(b: &BoundarySpec) -> Result<(ProbabilityVector, ProbabilityVector)> {
    b.validate()?;
    Ok((spread_point(b.tau, b.n), edge_point(b.tau, b.n)))
}

/// `H_α(v_n(τ)) − H_α(w_n(τ))`, computed from the constructed points.
pub fn entropy_gap(b: &BoundarySpec) -> Result<f64> {
    let (v, w) = boundary_points(b)?;
    Ok((renyi_entropy(&v, b.alpha) - renyi_entropy(&w, b.alpha)).max(0.0))
}

/// The `τ̃ ∈ [1/2, 1)` with `H_α(w_n(τ̃)) = H_α(v_n(τ))`, or `None` when the equi-entropy contour
/// through `v_n(τ)` never reaches the edge on that interval.
pub fn find_tilde_tau(b: &BoundarySpec) -> Result<Option<f64>> {
    b.validate()?;
    if b.n == 2 || b.tau == 1.0 {
        return Ok(Some(b.tau));
    }
    match b.alpha.regime() {
        AlphaRegime::MinEntropy => return Ok(Some(b.tau)),
        AlphaRegime::Hartley => return Ok(None),
        _ => {}
    }
    let target = renyi_entropy(&spread_point(b.tau, b.n), b.alpha);
    let h = |t: f64| renyi_entropy(&edge_point(t, b.n), b.alpha) - target;
    let (mut lo, mut hi) = (0.5, 1.0 - 1e-12);
    let (f_lo, f_hi) = (h(lo), h(hi));
    if f_lo < 0.0 || f_hi > 0.0 {
        return Ok(None);
    }
    while hi - lo > 1e-13 {
        let mid = 0.5 * (lo + hi);
        if h(mid) >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(0.5 * (lo + hi)))
}

/// Decision-region membership rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "rule")]
pub enum FeasibilityRule {
    /// `max p ≥ τ`.
    PosteriorThreshold { tau: f64 },
    /// `H_α(p) ≤ τ′`, with an absolute tolerance of `1e-12` at the boundary.
    EntropyThreshold { alpha: AlphaOrder, tau_prime: f64 },
}

pub const BOUNDARY_TOLERANCE: f64 = 1e-12;

pub fn feasible(p: &ProbabilityVector, rule: FeasibilityRule) -> bool {
    match rule {
        FeasibilityRule::PosteriorThreshold { tau } => p.max() >= tau,
        FeasibilityRule::EntropyThreshold { alpha, tau_prime } => {
            renyi_entropy(p, alpha) <= tau_prime + BOUNDARY_TOLERANCE
        }
    }
}

/// Planar coordinates of a 3-state distribution, with vertices at `(0,0)`, `(1,0)` and
/// `(1/2, √3/2)`.
pub fn barycentric_xy(p: &ProbabilityVector) -> Option<(f64, f64)> {
    if p.len() != 3 {
        return None;
    }
    let v = p.values();
    Some((v[1] + 0.5 * v[2], v[2] * 3f64.sqrt() / 2.0))
}
