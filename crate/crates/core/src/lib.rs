//! Acceptance sampling plans for lot conformity assessment, formulated as a
//! hypothesis test `H0: p <= p_aql` against `HA: p >= p_lq` with bounded
//! producers' and consumers' risks.
//!
//! Finite lots use the hypergeometric model, infinite lots the binomial one.
//! Alongside the optimal-plan search the crate validates interval-based
//! sampling schemes and evaluates plans under the WELMEC interpretation
//! (continuous interpolation and pointwise variants).

pub mod cli;
pub mod error;
pub mod planner;
pub mod prob_kernel;
pub mod risk_model;
pub mod scheme;
pub mod welmec;

pub use error::{Error, Result};
pub use planner::{optimal_plan, PlanResult, PlanTable};
pub use prob_kernel::{LotSize, Plan, Probability};
pub use risk_model::{QualitySpec, RiskBounds, RiskPair};
