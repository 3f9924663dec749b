//! Parametric immersions into the space forms, with orthonormal frames,
//! second fundamental forms and a gallery of closed-form examples.
//!
//! Ambient coordinates follow the linear models of [`AmbientSpace`]; in the
//! hyperbolic case the timelike coordinate `x⁰` is stored last. For
//! hypersurfaces the unit normal is oriented so that the mean curvature is
//! non-negative; in higher codimension the normal frame is the Gram-Schmidt
//! completion over the ambient axes in ascending order.

mod gallery;
pub mod jet;
mod map;
mod parametric;
mod space;

pub use gallery::{clifford_ts, gallery, gallery_by_name, gallery_names, GallerySpec};
pub use jet::{Jet, Real};
pub use map::{Analytic, AmbientMap, Composed, FnMap, GenericMap, Identity};
pub use parametric::{
    pushforward_under_map, Derivatives, IntrinsicModel, LocalDerivatives, Origin, ParametricImmersion, PointFrame,
    Quotient, Reference, ReferenceValue,
};
pub use space::{AmbientSpace, Domain, Signature};
