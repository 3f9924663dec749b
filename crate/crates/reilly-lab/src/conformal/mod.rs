//! Conformal maps into the unit sphere and Li-Yau balancing.
//!
//! [`ConformalChain`] composes the Möbius map `γ_g` with the stereographic
//! projection `π₀` (flat source) or with `π₀ ∘ π` (hyperbolic source). Its
//! conformal factor is available in closed form together with the ambient
//! gradient, which drives the identity checks in [`identities`].

mod balance;
mod chain;
pub mod identities;
mod moebius;
pub mod suite;

pub use balance::{balance, balance_with, BalanceResult, BalanceStep, PointMeasure};
pub use chain::{ConformalChain, ConformalFactor};
pub use identities::{sff_change_residual, frame_change_residual, radial_check, verify_gauss_change, verify_trace_relation, RadialCheck};
pub use suite::conformal_suite;
pub use moebius::{
    gamma_apply, gamma_g, gamma_g_jacobian, hyper_apply, hyper_inverse, hyper_pair, hyper_project, stereo_apply,
    stereo_inverse, stereo_pair, MoebiusParam, POLE_TOLERANCE,
};
