//! Numerical laboratory for Reilly-type upper bounds on the second
//! eigenvalue of divergence-form operators `L_T f = −div(T∇f)` on closed
//! submanifolds of the space forms ℝ^N, 𝕊^N and ℍ^N.
//!
//! The crate is organised as six modules:
//!
//! * [`tensorlab`]: exact pointwise tensor algebra (Newton tensors,
//!   Lovelock curvatures, Kronecker-delta oracles).
//! * [`immersion`]: parametric immersions, frames, a gallery of examples.
//! * [`meshfem`]: triangulation, P1 finite elements, eigen solvers.
//! * [`conformal`]: Möbius maps, stereographic charts, balancing.
//! * [`reilly`]: both sides of the inequalities and equality diagnostics.
//! * [`cli`]: scenario runner behind the `reilly-lab` binary.

pub mod cli;
pub mod conformal;
pub mod error;
pub mod immersion;
pub mod meshfem;
pub mod reilly;
pub mod tensorlab;

pub use error::{LabError, Result};
