use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::operator::{OperatorKind, OperatorSpec, PointData};
use super::spectral::{closed_form_spectrum, tensor_spread};
use crate::conformal::{balance, PointMeasure};
use crate::error::{LabError, Result};
use crate::immersion::{AmbientSpace, Domain, ParametricImmersion, PointFrame};
use crate::meshfem::{
    assemble, integrate, solve_spectrum, triangulate, weighted_mass, SpectrumResult, SurfaceMesh, TensorField,
};

/// Relative tolerance for reports backed by finite elements.
pub const FEM_TOLERANCE: f64 = 0.03;
/// Relative tolerance for reports backed by closed-form spectra.
pub const CLOSED_FORM_TOLERANCE: f64 = 1e-9;
const FEM_EIGENPAIRS: usize = 12;
const CLOSED_FORM_EIGENPAIRS: usize = 40;
const SAMPLE_SEED: u64 = 0x5eed;

/// How `λ₂` and the right-hand side are computed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "backend", rename_all = "snake_case")]
pub enum Resolution {
    /// P1 finite elements on the mesh of the given refinement level.
    Fem { level: usize },
    /// Closed-form spectra with the integrand sampled at `samples` points.
    ClosedForm { samples: usize },
}

impl Resolution {
    /// Finite elements at level 5 for surfaces, closed form otherwise.
    pub fn auto(imm: &ParametricImmersion) -> Self {
        if imm.n() == 2 {
            Resolution::Fem { level: 5 }
        } else {
            Resolution::ClosedForm { samples: 64 }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckOptions {
    pub resolution: Resolution,
    /// Balance the vertex measure and report the `H_T` alignment.
    pub balance: bool,
    /// Repeat the computation one level coarser to estimate the FEM error.
    pub estimate_discretization: bool,
}

impl CheckOptions {
    pub fn new(resolution: Resolution) -> Self {
        Self { resolution, balance: false, estimate_discretization: true }
    }
}

/// The right-hand side and trace statistics of one geometry.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RhsValue {
    /// `(1/V)∫(c tr T + |H_T|²/tr T)`, without the potential.
    pub base: f64,
    /// `q̄ = (1/V)∫q` when a potential is present.
    pub qbar: Option<f64>,
    pub volume: f64,
    pub trace_mean: f64,
    pub trace_stddev: f64,
    pub trace_min: f64,
}

impl RhsValue {
    pub fn total(&self) -> f64 {
        self.base + self.qbar.unwrap_or(0.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Preconditions {
    /// Smallest eigenvalue of `T` over all evaluation points.
    pub t_posdef_min: f64,
    /// Smallest eigenvalue of `T′ = (tr T) I − 2T`.
    pub tprime_min: f64,
    /// Smallest eigenvalue of `Σ T_{r−1} h` for Newton operators.
    pub newton_min: Option<f64>,
    pub satisfied: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EqualityDiagnostics {
    pub trace_mean: f64,
    pub trace_min: f64,
    /// Standard deviation of `tr T` divided by its mean.
    pub trace_relative_stddev: f64,
    /// `max |H_T|`.
    pub ht_max: f64,
    /// `max |H_T − tr T (∇̄ρ)^⊥|` relative to the size of both terms, for a
    /// balanced conformal chain.
    pub ht_alignment_residual: Option<f64>,
    /// `max |H_T|` inside the hypothesized sphere, scaled by `tr T·√c′`.
    pub tminimal_residual: f64,
    /// Spread of the distance to the mass centre relative to its mean; zero
    /// exactly when `M` lies on a round sphere about that centre.
    pub sphere_fit_residual: f64,
    /// `c′ = RHS/tr T`, the curvature of the hypothesized round sphere.
    pub sphere_curvature: f64,
    /// Residual of `L_T x = c′ (tr T) x` on centred positions.
    pub takahashi_residual: f64,
    /// `r₀ = (tr T/λ₂)^{1/2}`.
    pub r0: f64,
    /// Geodesic radius `arcsin r₀`, `r₀` or `arsinh r₀`.
    pub radius_estimate: Option<f64>,
    /// Set when `c = 1` and `r₀ > 1`.
    pub radius_hypothesis_violated: bool,
    /// Spread of `c′ tr T + q` relative to its mean, with potential only.
    pub potential_condition_spread: Option<f64>,
    /// Equality does not force the geometry in this case.
    pub informative_only: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Discretization {
    pub coarse_level: usize,
    pub coarse_lambda2: f64,
    /// `|λ₂(ℓ) − λ₂(ℓ−1)|/3`, the second-order Richardson error estimate.
    pub estimate: f64,
}

/// Both sides of the inequality with equality and precondition diagnostics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReillyReport {
    pub name: String,
    pub c: i8,
    pub operator: String,
    pub n: usize,
    pub p: usize,
    pub lambda2: f64,
    pub multiplicity: usize,
    /// Right-hand side, including `q̄` when a potential is present.
    pub rhs: f64,
    pub qbar: Option<f64>,
    pub gap: f64,
    pub tol_num: f64,
    pub backend: String,
    pub level: Option<usize>,
    pub vertices: Option<usize>,
    pub asserted: bool,
    pub inequality_holds: bool,
    pub preconditions: Preconditions,
    pub equality: EqualityDiagnostics,
    pub discretization: Option<Discretization>,
    /// Difference between two independent evaluations of the right-hand side.
    pub rhs_crosscheck: Option<f64>,
    pub notes: Vec<String>,
}

/// One line of `report.csv`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub name: String,
    pub c: i8,
    pub operator: String,
    pub lambda2: f64,
    pub rhs: f64,
    pub gap: f64,
    #[serde(rename = "trT_min")]
    pub trt_min: f64,
    #[serde(rename = "Tprime_min")]
    pub tprime_min: f64,
    pub radius: Option<f64>,
    pub backend: String,
}

impl ReillyReport {
    /// `gap / RHS`.
    pub fn relative_gap(&self) -> f64 {
        self.gap / self.rhs.abs().max(f64::MIN_POSITIVE)
    }

    pub fn row(&self) -> ReportRow {
        ReportRow {
            name: self.name.clone(),
            c: self.c,
            operator: self.operator.clone(),
            lambda2: self.lambda2,
            rhs: self.rhs,
            gap: self.gap,
            trt_min: self.equality.trace_min,
            tprime_min: self.preconditions.tprime_min,
            radius: self.equality.radius_estimate,
            backend: self.backend.clone(),
        }
    }
}

/// `(1/V)∫(c tr T + |H_T|²/tr T) dv` on a mesh with vertex frames, plus
/// `q̄` when the operator carries a potential. The vertex values are
/// interpolated linearly and integrated exactly over the secant triangles.
pub fn rhs_integral(mesh: &SurfaceMesh, spec: &OperatorSpec) -> Result<RhsValue> {
    let data = mesh_data(mesh, spec)?;
    mesh_rhs(mesh, &data)
}

fn mesh_data(mesh: &SurfaceMesh, spec: &OperatorSpec) -> Result<Vec<PointData>> {
    if !mesh.has_frames() {
        return Err(LabError::Argument("the right-hand side needs vertex frames".into()));
    }
    check_ambient(spec, mesh.ambient)?;
    spec.validate(2, mesh.frames[0].p())?;
    mesh.frames.par_iter().map(|f| spec.point(f)).collect()
}

fn check_ambient(spec: &OperatorSpec, amb: AmbientSpace) -> Result<()> {
    if spec.c != amb.c {
        return Err(LabError::Argument(format!("operator is declared for c = {} but the geometry lives in {}", spec.c, amb.label())));
    }
    Ok(())
}

fn mesh_rhs(mesh: &SurfaceMesh, data: &[PointData]) -> Result<RhsValue> {
    let v = mesh.area()?;
    let mean = |f: Vec<f64>| integrate(mesh, &f).map(|s| s / v);
    let base = mean(data.iter().map(|d| d.integrand).collect())?;
    let trace_mean = mean(data.iter().map(|d| d.trace).collect())?;
    let var = mean(data.iter().map(|d| (d.trace - trace_mean).powi(2)).collect())?;
    let qbar = if data.first().is_some_and(|d| d.q.is_some()) {
        Some(mean(data.iter().map(|d| d.q.unwrap_or(0.0)).collect())?)
    } else {
        None
    };
    Ok(RhsValue {
        base,
        qbar,
        volume: v,
        trace_mean,
        trace_stddev: var.max(0.0).sqrt(),
        trace_min: data.iter().map(|d| d.trace).fold(f64::INFINITY, f64::min),
    })
}

fn preconditions(data: &[PointData]) -> Preconditions {
    let t_min = data.iter().map(|d| d.t_min).fold(f64::INFINITY, f64::min);
    let tprime_min = data.iter().map(|d| d.tprime_min).fold(f64::INFINITY, f64::min);
    let newton_min = data.iter().filter_map(|d| d.newton_min).reduce(f64::min);
    let scale = data.iter().map(|d| d.trace.abs()).fold(0.0, f64::max);
    let slack = 1e-9 * scale;
    let satisfied = t_min > 0.0 && tprime_min >= -slack && newton_min.is_none_or(|m| m >= -slack);
    Preconditions { t_posdef_min: t_min, tprime_min, newton_min, satisfied }
}

/// Component of `x − center` normal to `M` and tangent to the ambient space
/// form, in normal-frame components.
fn sphere_normal(amb: &AmbientSpace, f: &PointFrame, center: &DVector<f64>) -> DVector<f64> {
    let x = &f.position;
    let mut v = x - center;
    match amb.c {
        1 => v -= x * amb.inner(&v, x),
        -1 => v += x * amb.inner(&v, x),
        _ => {}
    }
    f.normal_components(&v)
}

/// `|H_T|` after removing the component along the normal of the round
/// sphere through `M` centred at `center`.
fn ht_in_sphere(amb: &AmbientSpace, f: &PointFrame, ht: &DVector<f64>, center: &DVector<f64>) -> f64 {
    let nu = sphere_normal(amb, f, center);
    let len = nu.norm();
    let scale = (&f.position - center).norm();
    if len <= 1e-12 * scale.max(1e-300) {
        return ht.norm();
    }
    let nu = nu / len;
    (ht - &nu * ht.dot(&nu)).norm()
}

fn sphere_fit(amb: &AmbientSpace, points: impl Iterator<Item = DVector<f64>>, center: &DVector<f64>) -> f64 {
    let d: Vec<f64> = points.map(|x| {
        let v = x - center;
        amb.inner(&v, &v).abs().sqrt()
    }).collect();
    let mean = d.iter().sum::<f64>() / d.len().max(1) as f64;
    let (lo, hi) = d.iter().fold((f64::INFINITY, 0.0f64), |(a, b), v| (a.min(*v), b.max(*v)));
    (hi - lo) / mean.max(f64::MIN_POSITIVE)
}

fn radius_from(c: i8, r0: f64) -> (Option<f64>, bool) {
    match c {
        1 if r0 <= 1.0 => (Some(r0.asin()), false),
        1 => (None, true),
        0 => (Some(r0), false),
        _ => (Some(r0.asinh()), false),
    }
}

/// Lumped vertex masses `Σ_b M_ab`.
fn lumped_masses(mesh: &SurfaceMesh) -> Result<Vec<f64>> {
    let m = weighted_mass(mesh, &vec![1.0; mesh.vertex_count()])?;
    Ok(m.mul_vec(&vec![1.0; mesh.vertex_count()]))
}

fn mesh_center(mesh: &SurfaceMesh) -> Result<DVector<f64>> {
    let w = lumped_masses(mesh)?;
    let total: f64 = w.iter().sum();
    let mut c = DVector::zeros(mesh.ambient.coords());
    for (x, wi) in mesh.vertices.iter().zip(&w) {
        c += x * *wi;
    }
    Ok(c / total)
}

fn tensor_field(spec: &OperatorSpec, data: &[PointData]) -> TensorField {
    match spec.kind {
        OperatorKind::Identity => TensorField::Identity,
        _ => TensorField::Vertex(data.iter().map(|d| d.t.clone()).collect()),
    }
}

fn potential_values(data: &[PointData]) -> Option<Vec<f64>> {
    data.first()?.q?;
    Some(data.iter().map(|d| d.q.unwrap_or(0.0)).collect())
}

/// Weak form of `L_T x = c′ (tr T) x` on mass-centred coordinates:
/// `max_AB |X_Bᵀ(K − c′ M_{tr T})X_A| / max_AB |X_Bᵀ K X_A|`.
fn takahashi_weak(mesh: &SurfaceMesh, spec: &OperatorSpec, data: &[PointData], c_prime: f64) -> Result<f64> {
    let sys = assemble(mesh, &tensor_field(spec, data), None)?;
    let mt = weighted_mass(mesh, &data.iter().map(|d| d.trace).collect::<Vec<_>>())?;
    let center = mesh_center(mesh)?;
    let d = mesh.ambient.coords();
    let cols: Vec<Vec<f64>> = (0..d).map(|a| mesh.vertices.iter().map(|x| x[a] - center[a]).collect()).collect();
    let kx: Vec<Vec<f64>> = cols.iter().map(|c| sys.k.mul_vec(c)).collect();
    let mx: Vec<Vec<f64>> = cols.iter().map(|c| mt.mul_vec(c)).collect();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let (mut worst, mut scale) = (0.0f64, 0.0f64);
    for a in 0..d {
        for b in 0..d {
            let kab = dot(&cols[b], &kx[a]);
            scale = scale.max(kab.abs());
            worst = worst.max((kab - c_prime * dot(&cols[b], &mx[a])).abs());
        }
    }
    Ok(worst / scale.max(f64::MIN_POSITIVE))
}

/// Plain and sphere-relative T-minimality of a meshed surface.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TMinimality {
    /// `max |H_T|` in the ambient space form.
    pub ht_max: f64,
    /// `max |H_T|` inside the round sphere through `M` about the mass centre.
    pub ht_sphere_max: f64,
    /// Weak residual of `L_T x = c′ (tr T) x`.
    pub takahashi_residual: f64,
}

/// T-minimality diagnostics for the hypothesized sphere curvature `c′`.
pub fn t_minimality(mesh: &SurfaceMesh, spec: &OperatorSpec, c_prime: f64) -> Result<TMinimality> {
    let data = mesh_data(mesh, spec)?;
    let center = mesh_center(mesh)?;
    let ht_max = data.iter().map(|d| d.ht.norm()).fold(0.0, f64::max);
    let ht_sphere_max = mesh
        .frames
        .iter()
        .zip(&data)
        .map(|(f, d)| ht_in_sphere(&mesh.ambient, f, &d.ht, &center))
        .fold(0.0, f64::max);
    Ok(TMinimality { ht_max, ht_sphere_max, takahashi_residual: takahashi_weak(mesh, spec, &data, c_prime)? })
}

fn alignment(mesh: &SurfaceMesh, data: &[PointData]) -> Result<f64> {
    let measure = PointMeasure::new(mesh.ambient, mesh.vertices.clone(), lumped_masses(mesh)?)?;
    let chain = balance(&measure)?.require_converged()?.chain;
    let (mut worst, mut scale) = (0.0f64, 0.0f64);
    for ((x, f), d) in mesh.vertices.iter().zip(&mesh.frames).zip(data) {
        let cf = chain.conformal_factor(x)?;
        let perp = f.normal_components(&cf.grad) * d.trace;
        worst = worst.max((&d.ht - &perp).norm());
        scale = scale.max(d.ht.norm()).max(perp.norm());
    }
    Ok(worst / scale.max(f64::MIN_POSITIVE))
}

fn fem_spectrum(mesh: &SurfaceMesh, spec: &OperatorSpec, data: &[PointData]) -> Result<SpectrumResult> {
    let q = potential_values(data);
    let sys = assemble(mesh, &tensor_field(spec, data), q.as_deref())?;
    solve_spectrum(&sys, FEM_EIGENPAIRS.min(mesh.vertex_count()))
}

struct Evaluation {
    lambda2: f64,
    multiplicity: usize,
    backend: String,
    rhs: RhsValue,
    data: Vec<PointData>,
    tminimal_raw: f64,
    sphere_fit: f64,
    takahashi: f64,
    alignment: Option<f64>,
    level: Option<usize>,
    vertices: Option<usize>,
    discretization: Option<Discretization>,
    tol_num: f64,
}

fn evaluate_fem(imm: &ParametricImmersion, spec: &OperatorSpec, level: usize, opts: &CheckOptions) -> Result<Evaluation> {
    if imm.n() != 2 {
        return Err(LabError::Unsupported(format!(
            "finite elements are available for surfaces only; {} has dimension {}",
            imm.name,
            imm.n()
        )));
    }
    let mesh = triangulate(imm, level)?;
    let data = mesh_data(&mesh, spec)?;
    let spectrum = fem_spectrum(&mesh, spec, &data)?;
    let rhs = mesh_rhs(&mesh, &data)?;
    let c_prime = rhs.base / rhs.trace_mean;
    let center = mesh_center(&mesh)?;
    let tminimal_raw = mesh
        .frames
        .iter()
        .zip(&data)
        .map(|(f, d)| ht_in_sphere(&mesh.ambient, f, &d.ht, &center))
        .fold(0.0, f64::max);
    let takahashi = takahashi_weak(&mesh, spec, &data, c_prime)?;
    let sphere_fit = sphere_fit(&mesh.ambient, mesh.vertices.iter().cloned(), &center);
    let alignment = if opts.balance { Some(alignment(&mesh, &data)?) } else { None };
    let discretization = if opts.estimate_discretization && level > 0 {
        let coarse = triangulate(imm, level - 1)?;
        let cdata = mesh_data(&coarse, spec)?;
        let cl = fem_spectrum(&coarse, spec, &cdata)?.lambda2;
        Some(Discretization {
            coarse_level: level - 1,
            coarse_lambda2: cl,
            estimate: (spectrum.lambda2 - cl).abs() / 3.0,
        })
    } else {
        None
    };
    Ok(Evaluation {
        lambda2: spectrum.lambda2,
        multiplicity: spectrum.multiplicity,
        backend: spectrum.backend.label().to_string(),
        rhs,
        data,
        tminimal_raw,
        sphere_fit,
        takahashi,
        alignment,
        level: Some(level),
        vertices: Some(mesh.vertex_count()),
        discretization,
        tol_num: FEM_TOLERANCE,
    })
}

/// Domain points of the closed-form path, drawn from a fixed seed.
pub(crate) fn sample_frames(imm: &ParametricImmersion, samples: usize) -> Result<(Vec<Vec<f64>>, Vec<PointFrame>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(SAMPLE_SEED);
    let ys = imm.sample_points(&mut rng, samples.max(4));
    let frames = ys.iter().map(|y| imm.frame_at(y)).collect::<Result<Vec<_>>>()?;
    Ok((ys, frames))
}

/// Mean position over the orbit of the samples under the sign flips of the
/// sphere factors (or half-period shifts of a torus). Exact for
/// immersions that are odd in each factor.
fn symmetric_center(imm: &ParametricImmersion, ys: &[Vec<f64>]) -> Result<DVector<f64>> {
    let mut sum = DVector::zeros(imm.ambient.coords());
    let mut count = 0usize;
    for y in ys {
        let images: Vec<Vec<f64>> = match &imm.domain {
            Domain::Spheres(dims) => (0..1usize << dims.len())
                .map(|mask| {
                    let mut z = y.clone();
                    let mut off = 0;
                    for (f, &k) in dims.iter().enumerate() {
                        if mask >> f & 1 == 1 {
                            z[off..off + k + 1].iter_mut().for_each(|v| *v = -*v);
                        }
                        off += k + 1;
                    }
                    z
                })
                .collect(),
            Domain::Box { lo, hi, periodic } => (0..1usize << lo.len())
                .map(|mask| {
                    let mut z = y.clone();
                    for i in 0..lo.len() {
                        if mask >> i & 1 == 1 && periodic[i] {
                            let w = hi[i] - lo[i];
                            z[i] = lo[i] + (z[i] - lo[i] + 0.5 * w).rem_euclid(w);
                        }
                    }
                    z
                })
                .collect(),
        };
        for z in images {
            sum += imm.position(&z)?;
            count += 1;
        }
    }
    Ok(sum / count as f64)
}

fn evaluate_closed(imm: &ParametricImmersion, spec: &OperatorSpec, samples: usize) -> Result<Evaluation> {
    let (ys, frames) = sample_frames(imm, samples)?;
    let data = frames.iter().map(|f| spec.point(f)).collect::<Result<Vec<_>>>()?;
    let ts: Vec<DMatrix<f64>> = data.iter().map(|d| d.t.clone()).collect();
    let tscale = ts.iter().map(|t| t.amax()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let spread = tensor_spread(&ts);
    if spread > 1e-9 * tscale {
        return Err(LabError::Unsupported(format!(
            "T varies by {spread:.3e} over {}; closed-form spectra need a parallel T",
            imm.name
        )));
    }
    let integrands: Vec<f64> = data.iter().map(|d| d.integrand).collect();
    let iscale = integrands.iter().map(|v| v.abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let ispread = integrands.iter().map(|v| (v - integrands[0]).abs()).fold(0.0, f64::max);
    if ispread > 1e-9 * iscale {
        return Err(LabError::Unsupported(format!(
            "the integrand varies by {ispread:.3e} over {}; use the finite element path",
            imm.name
        )));
    }
    let qs: Vec<f64> = data.iter().filter_map(|d| d.q).collect();
    if qs.iter().any(|q| (q - qs[0]).abs() > 1e-12 * qs[0].abs().max(1.0)) {
        return Err(LabError::Unsupported("closed-form spectra need a constant potential".into()));
    }
    let qbar = qs.first().copied();
    let spectrum = closed_form_spectrum(imm, &data[0].t, CLOSED_FORM_EIGENPAIRS)?;
    let m = data.len() as f64;
    let trace_mean = data.iter().map(|d| d.trace).sum::<f64>() / m;
    let rhs = RhsValue {
        base: integrands.iter().sum::<f64>() / m,
        qbar,
        volume: f64::NAN,
        trace_mean,
        trace_stddev: (data.iter().map(|d| (d.trace - trace_mean).powi(2)).sum::<f64>() / m).sqrt(),
        trace_min: data.iter().map(|d| d.trace).fold(f64::INFINITY, f64::min),
    };
    let c_prime = rhs.base / trace_mean;
    let center = symmetric_center(imm, &ys)?;
    let amb = imm.ambient;
    let mut tminimal_raw: f64 = 0.0;
    let mut takahashi: f64 = 0.0;
    for (f, d) in frames.iter().zip(&data) {
        tminimal_raw = tminimal_raw.max(ht_in_sphere(&amb, f, &d.ht, &center));
        let ht_amb = &f.normal * &d.ht;
        let lx = -ht_amb + &f.position * (amb.curvature() * d.trace);
        let rel = &f.position - &center;
        let target = &rel * (c_prime * d.trace);
        takahashi = takahashi.max((lx - &target).norm() / target.norm().max(f64::MIN_POSITIVE));
    }
    Ok(Evaluation {
        lambda2: spectrum.lambda2 + qbar.unwrap_or(0.0),
        multiplicity: spectrum.multiplicity,
        backend: spectrum.backend.label().to_string(),
        rhs,
        data,
        tminimal_raw,
        sphere_fit: sphere_fit(&amb, frames.iter().map(|f| f.position.clone()), &center),
        takahashi,
        alignment: None,
        level: None,
        vertices: None,
        discretization: None,
        tol_num: CLOSED_FORM_TOLERANCE,
    })
}

/// Evaluates both sides of the inequality for `L_T (+ q)` on `imm`.
///
/// The inequality is asserted, with relative tolerance [`FEM_TOLERANCE`]
/// or [`CLOSED_FORM_TOLERANCE`], only when the preconditions hold (`T`
/// positive definite, `T′` and for Newton operators `Σ T_{r−1} h`
/// semi-definite); otherwise the report flags them and leaves the
/// inequality unasserted.
pub fn check_inequality(imm: &ParametricImmersion, spec: &OperatorSpec, resolution: Resolution) -> Result<ReillyReport> {
    check_inequality_with(imm, spec, &CheckOptions::new(resolution))
}

pub fn check_inequality_with(imm: &ParametricImmersion, spec: &OperatorSpec, opts: &CheckOptions) -> Result<ReillyReport> {
    check_ambient(spec, imm.ambient)?;
    spec.validate(imm.n(), imm.codim())?;
    let ev = match opts.resolution {
        Resolution::Fem { level } => evaluate_fem(imm, spec, level, opts)?,
        Resolution::ClosedForm { samples } => evaluate_closed(imm, spec, samples)?,
    };
    Ok(build_report(imm, spec, ev))
}

fn build_report(imm: &ParametricImmersion, spec: &OperatorSpec, ev: Evaluation) -> ReillyReport {
    let pre = preconditions(&ev.data);
    let rhs = ev.rhs.total();
    let gap = rhs - ev.lambda2;
    let asserted = pre.satisfied;
    let inequality_holds = gap >= -ev.tol_num * rhs.abs();
    let tr = ev.rhs.trace_mean;
    let c_prime = ev.rhs.base / tr;
    let spectral = ev.lambda2 - ev.rhs.qbar.unwrap_or(0.0);
    let r0 = (tr / spectral).sqrt();
    let (radius_estimate, radius_hypothesis_violated) = radius_from(spec.c, r0);
    let ht_max = ev.data.iter().map(|d| d.ht.norm()).fold(0.0, f64::max);
    let potential_condition_spread = ev.rhs.qbar.map(|_| {
        let vals: Vec<f64> = ev.data.iter().map(|d| c_prime * d.trace + d.q.unwrap_or(0.0)).collect();
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        let dev = vals.iter().map(|v| (v - mean).abs()).fold(0.0, f64::max);
        dev / mean.abs().max(f64::MIN_POSITIVE)
    });
    let mut notes = Vec::new();
    if !pre.satisfied {
        notes.push("preconditions fail: the inequality is not asserted".to_string());
    }
    let mut informative_only = false;
    if let OperatorKind::Newton { r } = spec.kind {
        if r + 2 == imm.n() {
            informative_only = true;
            notes.push(format!("r = n - 2 = {r}: equality diagnostics are informative only"));
        }
    }
    if spec.c == 1 && ht_max <= 1e-9 * tr {
        informative_only = true;
        notes.push("H_T vanishes identically: the equality characterization is not adjudicated".to_string());
    }
    if radius_hypothesis_violated {
        notes.push(format!("r0 = {r0:.6} exceeds 1: no geodesic sphere of the unit sphere has this radius"));
    }
    ReillyReport {
        name: imm.name.clone(),
        c: spec.c,
        operator: spec.label(),
        n: imm.n(),
        p: imm.codim(),
        lambda2: ev.lambda2,
        multiplicity: ev.multiplicity,
        rhs,
        qbar: ev.rhs.qbar,
        gap,
        tol_num: ev.tol_num,
        backend: ev.backend,
        level: ev.level,
        vertices: ev.vertices,
        asserted,
        inequality_holds,
        equality: EqualityDiagnostics {
            trace_mean: tr,
            trace_min: ev.rhs.trace_min,
            trace_relative_stddev: ev.rhs.trace_stddev / tr,
            ht_max,
            ht_alignment_residual: ev.alignment,
            tminimal_residual: ev.tminimal_raw / (tr * c_prime.abs().sqrt()).max(f64::MIN_POSITIVE),
            sphere_fit_residual: ev.sphere_fit,
            sphere_curvature: c_prime,
            takahashi_residual: ev.takahashi,
            r0,
            radius_estimate,
            radius_hypothesis_violated,
            potential_condition_spread,
            informative_only,
        },
        preconditions: pre,
        discretization: ev.discretization,
        rhs_crosscheck: None,
        notes,
    }
}

/// Like [`check_inequality`], for an operator that carries a potential `q`;
/// the right-hand side then includes `q̄`, and the diagnostics report the
/// spread of `c′ tr T + q`.
pub fn schrodinger_report(imm: &ParametricImmersion, spec: &OperatorSpec, resolution: Resolution) -> Result<ReillyReport> {
    if spec.potential.is_none() {
        return Err(LabError::Argument("the Schrödinger report needs a potential".into()));
    }
    check_inequality(imm, spec, resolution)
}
