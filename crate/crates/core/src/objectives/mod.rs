//! Query-selection objectives and the stopping rule.
//!
//! The unified query score of a candidate `φ` at history `H_s` is
//!
//! ```text
//! −H_α₂(σ | ε, φ, H_s) + λ₂ · M_α₂(φ, H_s)
//! ```
//!
//! (conditional Rényi entropy plus averaged Q-Momentum), and the decision constraint is
//!
//! ```text
//! H_α₁(σ | H_s) − λ₁ · D_α₁(H_s) < τ′
//! ```
//!
//! (posterior Rényi entropy relaxed by averaged I-Momentum).

mod entropy;
mod momentum;
mod select;
mod stopping;

pub use entropy::{conditional_renyi_entropy, EvidenceGrid, QuadratureSpec};
pub use momentum::{i_momentum, q_momentum, MomentumVariant};
pub use select::{
    anneal_lambda, greedy_batch_select, score_queries, unified_query_score, PolicyConfig,
    PolicyKind,
};
pub use stopping::{stopping_value, StoppingConfig};
