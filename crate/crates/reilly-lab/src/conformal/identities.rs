use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::chain::{ConformalChain, ConformalFactor};
use super::moebius::MoebiusParam;
use crate::error::{LabError, Result};
use crate::immersion::{pushforward_under_map, AmbientSpace, GenericMap, Jet, ParametricImmersion, PointFrame};
use crate::meshfem::{assemble, triangulate, CsrMatrix, SurfaceMesh, TensorField};

/// Vertex test functions: the constant, every ambient coordinate and every
/// product of two coordinates.
pub fn test_functions(mesh: &SurfaceMesh) -> Vec<Vec<f64>> {
    let nv = mesh.vertex_count();
    let d = mesh.ambient.coords();
    let mut out = vec![vec![1.0; nv]];
    for a in 0..d {
        out.push(mesh.vertices.iter().map(|x| x[a]).collect());
    }
    for a in 0..d {
        for b in a..d {
            out.push(mesh.vertices.iter().map(|x| x[a] * x[b]).collect());
        }
    }
    out
}

/// `max_φ |φᵀ r| / (V · max|φ|)` over [`test_functions`].
fn weak_norm(mesh: &SurfaceMesh, r: &[f64]) -> Result<f64> {
    let v = mesh.area()?;
    Ok(test_functions(mesh)
        .iter()
        .map(|phi| {
            let scale = phi.iter().fold(0.0f64, |a, b| a.max(b.abs())).max(1e-300);
            phi.iter().zip(r).map(|(a, b)| a * b).sum::<f64>().abs() / (v * scale)
        })
        .fold(0.0, f64::max))
}

fn require_chain_matches(mesh: &SurfaceMesh, chain: &ConformalChain) -> Result<()> {
    if mesh.ambient != chain.source {
        return Err(LabError::Argument(format!(
            "mesh lives in {} of dimension {}, chain starts from {} of dimension {}",
            mesh.ambient.label(),
            mesh.ambient.dim,
            chain.source.label(),
            chain.source.dim
        )));
    }
    if !mesh.has_frames() {
        return Err(LabError::Argument("mesh carries no vertex frames".into()));
    }
    Ok(())
}

/// Tangential and normal components of `∇̄ρ` in a vertex frame.
fn split_gradient(amb: &AmbientSpace, f: &PointFrame, cf: &ConformalFactor) -> (Vec<f64>, Vec<f64>) {
    let tan = (0..f.n()).map(|i| amb.inner(&cf.grad, &f.tangent.column(i).into_owned())).collect();
    let nor = (0..f.p()).map(|a| amb.inner(&cf.grad, &f.normal.column(a).into_owned())).collect();
    (tan, nor)
}

fn residual_vector(m: &CsrMatrix, s: &[f64], k: &CsrMatrix, rho: &[f64], k_coef: f64) -> Vec<f64> {
    let ms = m.mul_vec(s);
    let kr = k.mul_vec(rho);
    ms.iter().zip(&kr).map(|(a, b)| a - k_coef * b).collect()
}

/// Weak residual of
/// `e^{2ρ} tr T = c tr T + 2 L_T ρ − tr T |(∇̄ρ)^⊥|² + 2⟨H_T, (∇̄ρ)^⊥⟩ − T′(∇ρ, ∇ρ)`
/// on a surface mesh, with `2∫φ L_T ρ` evaluated as `2∫T(∇ρ, ∇φ)`.
///
/// Surfaces only admit `T = I`.
pub fn verify_trace_relation(mesh: &SurfaceMesh, chain: &ConformalChain, field: &TensorField) -> Result<f64> {
    require_chain_matches(mesh, chain)?;
    if !matches!(field, TensorField::Identity) {
        return Err(LabError::Unsupported("on surfaces the relation is only available for T = I".into()));
    }
    let amb = mesh.ambient;
    let c = amb.curvature();
    let n = 2.0;
    let mut rho = Vec::with_capacity(mesh.vertex_count());
    let mut s = Vec::with_capacity(mesh.vertex_count());
    for (x, f) in mesh.vertices.iter().zip(&mesh.frames) {
        let cf = chain.conformal_factor(x)?;
        let (_, nor) = split_gradient(&amb, f, &cf);
        let perp2: f64 = nor.iter().map(|v| v * v).sum();
        let ht_dot: f64 = (0..f.p()).map(|a| f.h.component(a).trace() * nor[a]).sum();
        rho.push(cf.rho);
        s.push(cf.e2rho * n - c * n + n * perp2 - 2.0 * ht_dot);
    }
    let sys = assemble(mesh, &TensorField::Identity, None)?;
    weak_norm(mesh, &residual_vector(&sys.m, &s, &sys.k, &rho, 2.0))
}

fn gauss_curvature_2d(f: &PointFrame, c: f64) -> f64 {
    c + (0..f.p())
        .map(|a| {
            let h = f.h.component(a);
            h[(0, 0)] * h[(1, 1)] - h[(0, 1)] * h[(1, 0)]
        })
        .sum::<f64>()
}

/// Weak residual of the surface Ricci change `e^{2ρ}K̃ = K − Δρ`, with `K̃`
/// taken from the second fundamental form of `Γ ∘ x` in the unit sphere.
pub fn verify_gauss_change(imm: &ParametricImmersion, chain: &ConformalChain, level: usize) -> Result<f64> {
    let mesh = triangulate(imm, level)?;
    require_chain_matches(&mesh, chain)?;
    let pushed = pushforward_under_map(imm, chain.as_map(), chain.target())?;
    let c = mesh.ambient.curvature();
    let mut rho = Vec::with_capacity(mesh.vertex_count());
    let mut s = Vec::with_capacity(mesh.vertex_count());
    for ((x, f), y) in mesh.vertices.iter().zip(&mesh.frames).zip(&mesh.params) {
        let cf = chain.conformal_factor(x)?;
        let pf = pushed.frame_at(y)?;
        rho.push(cf.rho);
        s.push(cf.e2rho * gauss_curvature_2d(&pf, 1.0) - gauss_curvature_2d(f, c));
    }
    let sys = assemble(&mesh, &TensorField::Identity, None)?;
    weak_norm(&mesh, &residual_vector(&sys.m, &s, &sys.k, &rho, 1.0))
}

/// `dΓ_x(v)` by a one-parameter jet.
fn differential(chain: &ConformalChain, x: &DVector<f64>, v: &DVector<f64>) -> Result<DVector<f64>> {
    let t = Jet::variable(0.0, 0);
    let xs: Vec<Jet> = x.iter().zip(v.iter()).map(|(a, b)| t * *b + *a).collect();
    let out = chain.apply(&xs)?;
    Ok(DVector::from_iterator(out.len(), out.iter().map(|j| j.g[0])))
}

/// Pointwise check of `h̃^α_{ij} = e^{−ρ}(h^α_{ij} − ρ_α δ_{ij})`, with the
/// left side computed directly from `Φ = Γ ∘ x` in the frames
/// `ẽ_i = e^{−ρ}dΓ(e_i)`, `ẽ_α = e^{−ρ}dΓ(e_α)`. Returns the largest
/// deviation relative to `1 + max|h̃|`.
pub fn sff_change_residual(imm: &ParametricImmersion, chain: &ConformalChain, y: &[f64]) -> Result<f64> {
    let amb = imm.ambient;
    let f = imm.frame_at(y)?;
    let cf = chain.conformal_factor(&f.position)?;
    let pushed = pushforward_under_map(imm, chain.as_map(), chain.target())?;
    let pd = pushed.derivatives_at(y)?;
    let n = f.n();
    let b = &f.basis;
    let (_, rho_perp) = split_gradient(&amb, &f, &cf);
    let er = cf.rho.exp();
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for alpha in 0..f.p() {
        let ea = f.normal.column(alpha).into_owned();
        let et = differential(chain, &f.position, &ea)? / er;
        for a in 0..n {
            for bb in 0..n {
                let mut phi_ab = DVector::zeros(pd.x.len());
                for i in 0..n {
                    for j in 0..n {
                        phi_ab += &pd.ddx[i * n + j] * (b[(i, a)] * b[(j, bb)]);
                    }
                }
                let direct = phi_ab.dot(&et) / (er * er);
                let h = amb.inner(&f.xab[a * n + bb], &ea);
                let delta = if a == bb { 1.0 } else { 0.0 };
                let predicted = (h - rho_perp[alpha] * delta) / er;
                scale = scale.max(predicted.abs());
                worst = worst.max((direct - predicted).abs());
            }
        }
    }
    Ok(worst / (1.0 + scale))
}

/// Pointwise check of `Σ_A Φ^A_i Φ^A_j = e^{2ρ} δ_{ij}` in an orthonormal
/// frame; returns `max |G − e^{2ρ}I| / e^{2ρ}`.
pub fn frame_change_residual(imm: &ParametricImmersion, chain: &ConformalChain, y: &[f64]) -> Result<f64> {
    let f = imm.frame_at(y)?;
    let cf = chain.conformal_factor(&f.position)?;
    let pushed = pushforward_under_map(imm, chain.as_map(), chain.target())?;
    let pd = pushed.derivatives_at(y)?;
    let dphi = &pd.dx * &f.basis;
    let gram = dphi.transpose() * &dphi;
    let n = f.n();
    Ok((gram - DMatrix::<f64>::identity(n, n) * cf.e2rho).amax() / cf.e2rho)
}

/// Radial derivative `∇̄_ν ρ` with `ν = −∂_r` on the geodesic sphere of
/// radius `r` about the pole, for the Möbius parameter `g = (0, …, 0, g⁰)`
/// that makes `Φ⁰` vanish there.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RadialCheck {
    pub c: i8,
    pub r: f64,
    pub g0: f64,
    /// Principal curvature `cot r`, `1/r` or `coth r`.
    pub expected: f64,
    pub computed: f64,
    /// Last coordinate of `Γ` on the sphere.
    pub phi0: f64,
}

pub fn radial_check(c: i8, dim: usize, r: f64) -> Result<RadialCheck> {
    let space = AmbientSpace::new(c, dim)?;
    if dim < 2 || !(r > 0.0) || (c == 1 && !(r < std::f64::consts::FRAC_PI_2)) {
        return Err(LabError::Domain(format!("radius {r} is not admissible for curvature {c}")));
    }
    let (g0, x, nu, expected) = match c {
        1 => {
            let mut x = DVector::zeros(dim + 1);
            x[0] = r.sin();
            x[dim] = r.cos();
            let mut nu = DVector::zeros(dim + 1);
            nu[0] = -r.cos();
            nu[dim] = r.sin();
            (-r.cos(), x, nu, r.cos() / r.sin())
        }
        0 => {
            let mut x = DVector::zeros(dim);
            x[0] = r;
            let mut nu = DVector::zeros(dim);
            nu[0] = -1.0;
            (-(r * r - 1.0) / (1.0 + r * r), x, nu, 1.0 / r)
        }
        _ => {
            let mut x = DVector::zeros(dim + 1);
            x[0] = r.sinh();
            x[dim] = r.cosh();
            let mut nu = DVector::zeros(dim + 1);
            nu[0] = -r.cosh();
            nu[dim] = -r.sinh();
            (1.0 / r.cosh(), x, nu, r.cosh() / r.sinh())
        }
    };
    let mut g = vec![0.0; dim + 1];
    g[dim] = g0;
    let chain = ConformalChain::new(space, MoebiusParam::new(g)?)?;
    let cf = chain.conformal_factor(&x)?;
    let computed = space.inner(&cf.grad, &nu);
    let phi0 = chain.map_point(&x)?[dim];
    Ok(RadialCheck { c, r, g0, expected, computed, phi0 })
}
