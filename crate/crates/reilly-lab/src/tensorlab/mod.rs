//! Pointwise tensor algebra of submanifolds: generalized Kronecker deltas,
//! Newton transformations, mean curvatures, Gauss-equation curvature and
//! Lovelock contractions.

mod curvature;
mod kronecker;
mod quartic;
mod newton;
mod profile;
pub mod sample;
mod sff;
pub mod suite;

pub use curvature::{
    contraction_residual, contraction_rhs, gauss_curvature, lovelock, lovelock_einstein, lovelock_p,
    lovelock_scalar, ContractionResidual, CurvatureData, LovelockData, Tensor4,
};
pub use kronecker::{binomial, gen_kronecker};
pub use quartic::{quartic_minimum, quartic_minimum_brute_force, quartic_objective, QuarticMinimum};
pub use newton::{h_t, newton_sequence, newton_tensor, newton_tensor_oracle, NewtonPayload, NewtonTensor, SValue};
pub use profile::{mean_curvature_tensor, mean_profile, MeanCurvatureProfile, MeanCurvatureTensor};
pub use sff::SecondFundamentalForm;
pub use suite::{algebraic_suite, IdentityRow, ALGEBRAIC_TOLERANCE};

#[allow(unused_imports)]
pub(crate) use sff::{min_eigenvalue, sorted_eigenvalues};
