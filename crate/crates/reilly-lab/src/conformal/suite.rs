use nalgebra::DVector;
use rand::{Rng, RngExt};

use super::chain::ConformalChain;
use super::identities::{sff_change_residual, frame_change_residual, radial_check, verify_gauss_change, verify_trace_relation};
use super::moebius::MoebiusParam;
use crate::error::Result;
use crate::immersion::{gallery, GallerySpec, ParametricImmersion};
use crate::meshfem::{triangulate, TensorField};
use crate::tensorlab::IdentityRow;

pub const FRAME_TOLERANCE: f64 = 1e-8;
pub const SFF_TOLERANCE: f64 = 1e-4;
pub const RADIAL_TOLERANCE: f64 = 1e-10;
/// Weak residual bound at [`WEAK_LEVEL`].
pub const WEAK_TOLERANCE: f64 = 5e-3;
pub const WEAK_LEVEL: usize = 4;
/// Mesh-based rows use at most this many random parameters.
pub const WEAK_INSTANCES: usize = 2;

fn surfaces() -> Vec<ParametricImmersion> {
    [
        GallerySpec::Sphere { n: 2, a: 0.6, codim: 1, c: 1 },
        GallerySpec::Ellipsoid { axes: vec![1.0, 0.8, 1.3] },
        GallerySpec::TorusOfRevolution { big: 2.0, small: 0.7 },
        GallerySpec::HyperbolicGeodesicSphere { r: 1.0, n: 2 },
        GallerySpec::VeroneseRp2,
    ]
    .iter()
    .map(|s| gallery(s).expect("fixed gallery parameters"))
    .collect()
}

fn random_param<R: Rng + ?Sized>(rng: &mut R, len: usize, radius: f64) -> Result<MoebiusParam> {
    let v = DVector::from_fn(len, |_, _| rng.random_range(-1.0..1.0));
    MoebiusParam::new((v.normalize() * radius).as_slice().to_vec())
}

/// Conformal-change relations on random Möbius parameters and points of a
/// fixed set of gallery surfaces: the pointwise frame and second fundamental
/// form relations, the radial derivatives on geodesic spheres, and the weak
/// residuals of the trace relation and of the Gauss curvature change at mesh
/// level [`WEAK_LEVEL`].
pub fn conformal_suite<R: Rng + ?Sized>(rng: &mut R, count: usize) -> Result<Vec<IdentityRow>> {
    if count == 0 {
        return Ok(Vec::new());
    }
    let items = surfaces();
    let mut frame = IdentityRow::new("conformal_frame", "pointwise", FRAME_TOLERANCE);
    let mut sff = IdentityRow::new("conformal_second_fundamental_form", "pointwise", SFF_TOLERANCE);
    let mut radial = IdentityRow::new("radial_derivative", "pointwise", RADIAL_TOLERANCE);
    for _ in 0..count {
        let imm = &items[rng.random_range(0..items.len())];
        let chain = ConformalChain::new(imm.ambient, random_param(rng, imm.ambient.dim + 1, 0.4)?)?;
        let y = imm.sample_points(rng, 1).remove(0);
        frame.record(frame_change_residual(imm, &chain, &y)?);
        sff.record(sff_change_residual(imm, &chain, &y)?);
        let c = rng.random_range(-1..=1i8);
        let r = rng.random_range(0.2..1.4);
        let chk = radial_check(c, 3, r)?;
        radial.record((chk.computed - chk.expected).abs().max(chk.phi0.abs()));
    }
    let mut trace = IdentityRow::new("conformal_trace_weak", "fem", WEAK_TOLERANCE);
    let mut gauss = IdentityRow::new("gauss_curvature_change_weak", "fem", WEAK_TOLERANCE);
    let sphere = gallery(&GallerySpec::Sphere { n: 2, a: 1.0, codim: 1, c: 1 })?;
    let ellipsoid = gallery(&GallerySpec::Ellipsoid { axes: vec![1.0, 1.0, 1.3] })?;
    let sphere_mesh = triangulate(&sphere, WEAK_LEVEL)?;
    for _ in 0..count.min(WEAK_INSTANCES) {
        let chain = ConformalChain::new(sphere.ambient, random_param(rng, sphere.ambient.dim + 1, 0.4)?)?;
        trace.record(verify_trace_relation(&sphere_mesh, &chain, &TensorField::Identity)?);
        let chain = ConformalChain::new(ellipsoid.ambient, random_param(rng, ellipsoid.ambient.dim + 1, 0.4)?)?;
        gauss.record(verify_gauss_change(&ellipsoid, &chain, WEAK_LEVEL)?);
    }
    Ok(vec![frame, sff, radial, trace, gauss])
}
