use nalgebra::DMatrix;

use crate::error::{LabError, Result};
use crate::immersion::{gallery, GallerySpec, IntrinsicModel, ParametricImmersion};
use crate::meshfem::{
    assemble, flat_torus_spectrum, product_spectrum, projective_spectrum, solve_spectrum, sphere_spectrum, triangulate,
    SpectrumResult, TensorField,
};

const STRUCTURE_TOL: f64 = 1e-9;

fn scale_spectrum(mut s: SpectrumResult, k: f64) -> SpectrumResult {
    s.eigenvalues.iter_mut().for_each(|v| *v *= k);
    s.tol_zero *= k;
    s.lambda2 *= k;
    s
}

/// Largest deviation between the tensors sampled at different points.
pub(crate) fn tensor_spread(ts: &[DMatrix<f64>]) -> f64 {
    let Some(first) = ts.first() else { return 0.0 };
    ts.iter().map(|t| (t - first).amax()).fold(0.0, f64::max)
}

/// Diagonal blocks of `t` that are multiples of the identity, one per
/// consecutive group of `dims`; errors if `t` mixes or distorts the blocks.
fn block_scalars(t: &DMatrix<f64>, dims: &[usize]) -> Result<Vec<f64>> {
    if dims.iter().sum::<usize>() != t.nrows() {
        return Err(LabError::Argument(format!("intrinsic model has dimension {} but T is {}x{}", dims.iter().sum::<usize>(), t.nrows(), t.ncols())));
    }
    let scale = t.amax().max(1e-300);
    let mut out = Vec::with_capacity(dims.len());
    let mut off = 0;
    for &d in dims {
        let s = (off..off + d).map(|i| t[(i, i)]).sum::<f64>() / d as f64;
        for i in off..off + d {
            for j in 0..t.ncols() {
                let target = if i == j { s } else { 0.0 };
                if (t[(i, j)] - target).abs() > STRUCTURE_TOL * scale {
                    return Err(LabError::Unsupported(format!(
                        "T is not a multiple of the identity on each product factor (entry ({i},{j}) = {:.3e})",
                        t[(i, j)]
                    )));
                }
            }
        }
        out.push(s);
        off += d;
    }
    Ok(out)
}

/// Spectrum of `L_T` for a parallel `T` on a geometry with a closed-form
/// intrinsic model: round spheres and projective spaces (`T = sI`),
/// products of spheres (`T` scalar on each factor) and flat tori (`T`
/// diagonal in the circle directions).
pub fn closed_form_spectrum(imm: &ParametricImmersion, t: &DMatrix<f64>, count: usize) -> Result<SpectrumResult> {
    match &imm.intrinsic {
        IntrinsicModel::Sphere { n, radius, antipodal } => {
            let s = block_scalars(t, &[*n])?[0];
            let base = if *antipodal { projective_spectrum(*n, *radius, count)? } else { sphere_spectrum(*n, *radius, count)? };
            Ok(scale_spectrum(base, s))
        }
        IntrinsicModel::Product(factors) => {
            let dims: Vec<usize> = factors.iter().map(|f| f.0).collect();
            let weights = block_scalars(t, &dims)?;
            let parts = factors
                .iter()
                .zip(&weights)
                .map(|((d, r), w)| sphere_spectrum(*d, *r, count).map(|s| (*w, s)))
                .collect::<Result<Vec<_>>>()?;
            product_spectrum(&parts, count)
        }
        IntrinsicModel::FlatTorus(lengths) => {
            let weights = block_scalars(t, &vec![1; lengths.len()])?;
            if let Some(w) = weights.iter().find(|w| !(**w > 0.0)) {
                return Err(LabError::Ellipticity(format!("T has non-positive entry {w}")));
            }
            let scaled: Vec<f64> = lengths.iter().zip(&weights).map(|(l, w)| l / w.sqrt()).collect();
            flat_torus_spectrum(&scaled, count)
        }
        IntrinsicModel::Unknown => Err(LabError::Unsupported(format!(
            "{} has no closed-form intrinsic model; use the finite element path",
            imm.name
        ))),
    }
}

/// Closed-form and finite element `λ₂` of one round-sphere factor.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FactorCheck {
    pub dim: usize,
    pub radius: f64,
    pub closed_form: f64,
    pub fem: f64,
}

impl FactorCheck {
    pub fn relative_error(&self) -> f64 {
        (self.fem - self.closed_form).abs() / self.closed_form
    }
}

/// Meshes every two-dimensional sphere factor of a product (or a round
/// `S²`) and compares its finite element `λ₂` with the closed form.
pub fn factor_spectra(imm: &ParametricImmersion, level: usize) -> Result<Vec<FactorCheck>> {
    let factors: Vec<(usize, f64)> = match &imm.intrinsic {
        IntrinsicModel::Product(f) => f.clone(),
        IntrinsicModel::Sphere { n, radius, antipodal: false } => vec![(*n, *radius)],
        _ => return Err(LabError::Unsupported(format!("{} has no round-sphere factors", imm.name))),
    };
    factors
        .iter()
        .filter(|(d, _)| *d == 2)
        .map(|&(dim, radius)| {
            let sphere = gallery(&GallerySpec::Sphere { n: 2, a: radius, codim: 1, c: 0 })?;
            let mesh = triangulate(&sphere, level)?;
            let sys = assemble(&mesh, &TensorField::Identity, None)?;
            let fem = solve_spectrum(&sys, 8.min(mesh.vertex_count()))?.lambda2;
            Ok(FactorCheck { dim, radius, closed_form: sphere_spectrum(dim, radius, 4)?.lambda2, fem })
        })
        .collect()
}
