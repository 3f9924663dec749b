use nalgebra::{DMatrix, Matrix2};
use rayon::prelude::*;

use super::mesh::{SurfaceMesh, TriangleGeometry, QUADRATURE};
use super::sparse::CsrMatrix;
use crate::error::{arg, LabError, Result};

/// Tensor `T` feeding `L_T f = −div(T∇f)`.
#[derive(Clone, Debug)]
pub enum TensorField {
    Identity,
    /// One symmetric 2×2 tensor per vertex, in that vertex's tangent frame.
    Vertex(Vec<DMatrix<f64>>),
}

impl TensorField {
    pub fn scaled(&self, s: f64, n_vertices: usize) -> TensorField {
        match self {
            TensorField::Identity => TensorField::Vertex(vec![DMatrix::identity(2, 2) * s; n_vertices]),
            TensorField::Vertex(v) => TensorField::Vertex(v.iter().map(|t| t * s).collect()),
        }
    }
}

/// Stiffness/mass pair of `L_T + q` on a mesh.
#[derive(Clone, Debug)]
pub struct AssembledSystem {
    pub k: CsrMatrix,
    pub m: CsrMatrix,
    pub has_potential: bool,
    /// Smallest eigenvalue of `T` over all quadrature points.
    pub t_min: f64,
    pub label: String,
}

impl AssembledSystem {
    pub fn size(&self) -> usize {
        self.k.n
    }
}

/// Rotation taking element-frame components to vertex-frame components:
/// the orthogonal polar factor of `F_vᵀ G F_t`.
fn transport(mesh: &SurfaceMesh, v: usize, geo: &TriangleGeometry) -> Matrix2<f64> {
    let tv = &mesh.frames[v].tangent;
    let mut m = Matrix2::zeros();
    for a in 0..2 {
        for b in 0..2 {
            m[(a, b)] = mesh.ambient.inner(&tv.column(a).into_owned(), &geo.frame.column(b).into_owned());
        }
    }
    let svd = m.svd(true, true);
    svd.u.expect("u requested") * svd.v_t.expect("v_t requested")
}

/// Element tensors at the three vertices, expressed in the element frame.
fn element_tensors(mesh: &SurfaceMesh, t: usize, geo: &TriangleGeometry, field: &TensorField) -> Result<[Matrix2<f64>; 3]> {
    match field {
        TensorField::Identity => Ok([Matrix2::identity(); 3]),
        TensorField::Vertex(vals) => {
            if !mesh.has_frames() {
                return arg("a non-identity tensor field needs vertex frames");
            }
            let mut out = [Matrix2::zeros(); 3];
            for (k, &v) in mesh.triangles[t].iter().enumerate() {
                let tv = &vals[v];
                let tm = Matrix2::new(tv[(0, 0)], tv[(0, 1)], tv[(1, 0)], tv[(1, 1)]);
                let q = transport(mesh, v, geo);
                let r = q.transpose() * tm * q;
                out[k] = (r + r.transpose()) * 0.5;
            }
            Ok(out)
        }
    }
}

struct ElementBlock {
    k: [[f64; 3]; 3],
    m: [[f64; 3]; 3],
    t_min: f64,
}

fn element_block(mesh: &SurfaceMesh, t: usize, field: &TensorField, q: Option<&[f64]>) -> Result<ElementBlock> {
    let geo = mesh.triangle_geometry(t)?;
    let tens = element_tensors(mesh, t, &geo, field)?;
    let tri = mesh.triangles[t];
    let mut k = [[0.0; 3]; 3];
    let mut m = [[0.0; 3]; 3];
    let mut t_min = f64::INFINITY;
    for (qi, (bary, w)) in QUADRATURE.iter().enumerate() {
        let tq = tens[0] * bary[0] + tens[1] * bary[1] + tens[2] * bary[2];
        let ev = tq.symmetric_eigenvalues();
        let lo = ev[0].min(ev[1]);
        if !(lo > 1e-10) {
            return Err(LabError::Ellipticity(format!(
                "T has eigenvalue {lo:.3e} at quadrature point {qi} of triangle {t} (vertices {tri:?})"
            )));
        }
        t_min = t_min.min(lo);
        let qv = q.map(|q| bary[0] * q[tri[0]] + bary[1] * q[tri[1]] + bary[2] * q[tri[2]]).unwrap_or(0.0);
        let wa = w * geo.area;
        for i in 0..3 {
            for j in 0..3 {
                k[i][j] += wa * (geo.grads[i].transpose() * tq * geo.grads[j])[(0, 0)] + wa * qv * bary[i] * bary[j];
                m[i][j] += wa * bary[i] * bary[j];
            }
        }
    }
    Ok(ElementBlock { k, m, t_min })
}

/// Assembles `K_ab = ∫ T(∇φ_a, ∇φ_b) + q φ_a φ_b` and the consistent mass
/// `M_ab = ∫ φ_a φ_b` with the three-point rule. Element blocks are computed
/// in parallel and summed in triangle order.
pub fn assemble(mesh: &SurfaceMesh, field: &TensorField, q: Option<&[f64]>) -> Result<AssembledSystem> {
    let nv = mesh.vertex_count();
    if let TensorField::Vertex(v) = field {
        if v.len() != nv {
            return arg(format!("tensor field has {} entries for {nv} vertices", v.len()));
        }
    }
    if let Some(q) = q {
        if q.len() != nv {
            return arg(format!("potential has {} entries for {nv} vertices", q.len()));
        }
    }
    let blocks: Vec<ElementBlock> = (0..mesh.triangles.len())
        .into_par_iter()
        .map(|t| element_block(mesh, t, field, q))
        .collect::<Result<_>>()?;
    let mut kt = Vec::with_capacity(9 * blocks.len());
    let mut mt = Vec::with_capacity(9 * blocks.len());
    let mut t_min = f64::INFINITY;
    for (t, b) in blocks.iter().enumerate() {
        let tri = mesh.triangles[t];
        t_min = t_min.min(b.t_min);
        for i in 0..3 {
            for j in 0..3 {
                kt.push((tri[i], tri[j], b.k[i][j]));
                mt.push((tri[i], tri[j], b.m[i][j]));
            }
        }
    }
    Ok(AssembledSystem {
        k: CsrMatrix::from_triplets(nv, kt),
        m: CsrMatrix::from_triplets(nv, mt),
        has_potential: q.is_some(),
        t_min,
        label: mesh.name.clone(),
    })
}

/// Weighted mass matrix `∫ w φ_a φ_b` for a vertex function `w`.
pub fn weighted_mass(mesh: &SurfaceMesh, w: &[f64]) -> Result<CsrMatrix> {
    let mut trip = Vec::with_capacity(9 * mesh.triangles.len());
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let geo = mesh.triangle_geometry(t)?;
        for (bary, wq) in QUADRATURE.iter() {
            let wv = bary[0] * w[tri[0]] + bary[1] * w[tri[1]] + bary[2] * w[tri[2]];
            for i in 0..3 {
                for j in 0..3 {
                    trip.push((tri[i], tri[j], wq * geo.area * wv * bary[i] * bary[j]));
                }
            }
        }
    }
    Ok(CsrMatrix::from_triplets(mesh.vertex_count(), trip))
}

/// Quadrature of a vertex function interpolated linearly: `∫ f dv`.
pub fn integrate(mesh: &SurfaceMesh, f: &[f64]) -> Result<f64> {
    let mut s = 0.0;
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let geo = mesh.triangle_geometry(t)?;
        s += geo.area * (f[tri[0]] + f[tri[1]] + f[tri[2]]) / 3.0;
    }
    Ok(s)
}
