use faer::linalg::solvers::Solve;
use faer::Mat;
use nalgebra::{DMatrix, DVector};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::assemble::AssembledSystem;
use super::sparse::CsrMatrix;
use crate::error::{arg, LabError, Result};

/// Systems with fewer unknowns use the dense generalized eigensolver.
pub const DENSE_LIMIT: usize = 2000;
const BLOCK: usize = 8;
const RESIDUAL_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Backend {
    Dense,
    Lanczos,
    ClosedForm,
    Product,
}

impl Backend {
    pub fn label(&self) -> &'static str {
        match self {
            Backend::Dense => "fem-dense",
            Backend::Lanczos => "fem-lanczos",
            Backend::ClosedForm => "closed-form",
            Backend::Product => "product",
        }
    }
}

#[derive(Clone, Debug)]
pub struct SpectrumResult {
    /// Ascending, repeated according to multiplicity.
    pub eigenvalues: Vec<f64>,
    /// M-orthonormal eigenvectors as columns (FEM backends only).
    pub eigenvectors: Option<DMatrix<f64>>,
    pub tol_zero: f64,
    pub lambda2: f64,
    pub multiplicity: usize,
    pub backend: Backend,
    /// Largest relative residual `‖Ku − λMu‖ / (‖Ku‖ + (|λ| + s)‖Mu‖)` with
    /// `s = 1e-4·tr K/tr M`.
    pub residual: f64,
}

impl SpectrumResult {
    fn from_eigenvalues(eigenvalues: Vec<f64>, tol_zero: f64, shifted: bool, backend: Backend) -> Result<Self> {
        let lambda2 = if shifted {
            *eigenvalues.get(1).ok_or_else(|| LabError::Argument("need at least two eigenvalues".into()))?
        } else {
            *eigenvalues
                .iter()
                .find(|&&v| v > tol_zero)
                .ok_or_else(|| LabError::NonConvergence("no eigenvalue above the zero-mode threshold".into()))?
        };
        let multiplicity = cluster_size(&eigenvalues, lambda2);
        Ok(Self { eigenvalues, eigenvectors: None, tol_zero, lambda2, multiplicity, backend, residual: 0.0 })
    }

    /// Number of eigenvalues within relative `1e-3` of the `i`-th one.
    pub fn multiplicity_at(&self, i: usize) -> usize {
        cluster_size(&self.eigenvalues, self.eigenvalues[i])
    }
}

fn cluster_size(ev: &[f64], v: f64) -> usize {
    let scale = v.abs().max(1e-300);
    ev.iter().filter(|&&x| (x - v).abs() <= 1e-3 * scale).count()
}

fn zero_tolerance(sys: &AssembledSystem) -> f64 {
    1e-8 * sys.k.trace() / sys.m.trace()
}

/// Lowest `count` eigenpairs of `K u = λ M u`.
///
/// `λ₂` is the first eigenvalue above `1e-8·tr K/tr M`; for systems with a
/// potential term it is the second eigenvalue.
pub fn solve_spectrum(sys: &AssembledSystem, count: usize) -> Result<SpectrumResult> {
    let n = sys.size();
    if count < 2 || count > n {
        return arg(format!("requested {count} eigenpairs of a system of size {n}"));
    }
    if n < DENSE_LIMIT {
        dense_solve(sys, count)
    } else {
        lanczos_solve(sys, count)
    }
}

fn relative_residual(k: &CsrMatrix, m: &CsrMatrix, lam: f64, u: &[f64]) -> f64 {
    let floor = 1e-4 * k.trace() / m.trace();
    let ku = k.mul_vec(u);
    let mu = m.mul_vec(u);
    let r: f64 = ku.iter().zip(&mu).map(|(a, b)| (a - lam * b).powi(2)).sum::<f64>().sqrt();
    let nk: f64 = ku.iter().map(|v| v * v).sum::<f64>().sqrt();
    let nm: f64 = mu.iter().map(|v| v * v).sum::<f64>().sqrt();
    r / (nk + (lam.abs() + floor) * nm + f64::MIN_POSITIVE)
}

/// Dense path: `M = LLᵀ`, symmetric eigenproblem of `L⁻¹KL⁻ᵀ`.
pub fn dense_solve(sys: &AssembledSystem, count: usize) -> Result<SpectrumResult> {
    let kd = sys.k.to_dense();
    let md = sys.m.to_dense();
    let chol = nalgebra::Cholesky::new(md).ok_or_else(|| LabError::NonConvergence("mass matrix is not positive definite".into()))?;
    let l = chol.l();
    let x = l
        .solve_lower_triangular(&kd)
        .ok_or_else(|| LabError::NonConvergence("triangular solve failed".into()))?;
    let mut a = l
        .solve_lower_triangular(&x.transpose())
        .ok_or_else(|| LabError::NonConvergence("triangular solve failed".into()))?;
    a = (&a + a.transpose()) * 0.5;
    let eig = a.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let lt = l.transpose();
    let mut vecs = DMatrix::zeros(sys.size(), count);
    let mut vals = Vec::with_capacity(count);
    let mut worst: f64 = 0.0;
    for (c, &i) in order.iter().take(count).enumerate() {
        let y = eig.eigenvectors.column(i).into_owned();
        let u = lt
            .solve_upper_triangular(&y)
            .ok_or_else(|| LabError::NonConvergence("triangular solve failed".into()))?;
        worst = worst.max(relative_residual(&sys.k, &sys.m, eig.eigenvalues[i], u.as_slice()));
        vecs.set_column(c, &u);
        vals.push(eig.eigenvalues[i]);
    }
    let mut res = SpectrumResult::from_eigenvalues(vals, zero_tolerance(sys), sys.has_potential, Backend::Dense)?;
    res.eigenvectors = Some(vecs);
    res.residual = worst;
    Ok(res)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(y: &mut [f64], s: f64, x: &[f64]) {
    y.iter_mut().zip(x).for_each(|(a, b)| *a += s * b);
}

/// Shift-invert block Lanczos with full M-orthogonalization.
///
/// The operator `(K − σM)⁻¹M` is applied through a sparse Cholesky factor;
/// a Rayleigh-Ritz step on the Krylov basis yields Ritz pairs, accepted
/// once every wanted pair has relative residual below `1e-9`.
pub fn lanczos_solve(sys: &AssembledSystem, count: usize) -> Result<SpectrumResult> {
    let n = sys.size();
    let (k, m) = (&sys.k, &sys.m);
    let scale = k.trace() / m.trace();
    let mut sigma = -1e-3 * scale;
    let mut factor = None;
    for _ in 0..6 {
        let a = k.add_scaled(m, -sigma).to_faer()?;
        match a.sp_cholesky(faer::Side::Lower) {
            Ok(f) => {
                factor = Some(f);
                break;
            }
            Err(_) => sigma *= 10.0,
        }
    }
    let llt = factor.ok_or_else(|| LabError::NonConvergence("K − σM could not be factored for any tried shift".into()))?;
    let apply = |vs: &[Vec<f64>]| -> Vec<Vec<f64>> {
        let mut rhs = Mat::<f64>::zeros(n, vs.len());
        for (j, v) in vs.iter().enumerate() {
            let mv = m.mul_vec(v);
            for i in 0..n {
                rhs[(i, j)] = mv[i];
            }
        }
        llt.solve_in_place(rhs.as_mut());
        (0..vs.len()).map(|j| (0..n).map(|i| rhs[(i, j)]).collect()).collect()
    };

    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let block = BLOCK.min(n);
    let mut pending: Vec<Vec<f64>> = (0..block).map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut mbasis: Vec<Vec<f64>> = Vec::new();
    let mut images: Vec<Vec<f64>> = Vec::new();
    let max_dim = n.min(count + 40 * block);
    let mut last_worst = f64::INFINITY;
    loop {
        let mut fresh = Vec::new();
        for mut x in pending.drain(..) {
            let before = dot(&x, &m.mul_vec(&x)).sqrt();
            for _ in 0..2 {
                for (v, mv) in basis.iter().zip(&mbasis) {
                    let c = dot(&x, mv);
                    axpy(&mut x, -c, v);
                }
            }
            let mx = m.mul_vec(&x);
            let nrm = dot(&x, &mx).sqrt();
            if nrm > 1e-10 * before.max(f64::MIN_POSITIVE) && basis.len() < max_dim {
                x.iter_mut().for_each(|v| *v /= nrm);
                let mx: Vec<f64> = mx.iter().map(|v| v / nrm).collect();
                basis.push(x.clone());
                mbasis.push(mx);
                fresh.push(x);
            }
        }
        let exhausted = fresh.is_empty() || basis.len() >= max_dim;
        if !fresh.is_empty() {
            let z = apply(&fresh);
            images.extend(z.iter().cloned());
            pending = z;
        }
        if basis.len() >= count + block || exhausted {
            let dim = images.len();
            let mut h = DMatrix::zeros(dim, dim);
            for i in 0..dim {
                for j in 0..dim {
                    h[(i, j)] = dot(&mbasis[i], &images[j]);
                }
            }
            h = (&h + h.transpose()) * 0.5;
            let eig = h.symmetric_eigen();
            let mut pairs: Vec<(f64, usize)> = eig
                .eigenvalues
                .iter()
                .enumerate()
                .filter(|(_, &t)| t > 0.0)
                .map(|(i, &t)| (sigma + 1.0 / t, i))
                .collect();
            pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
            if pairs.len() >= count {
                let mut vecs = DMatrix::zeros(n, count);
                let mut vals = Vec::with_capacity(count);
                let mut worst: f64 = 0.0;
                for (c, &(lam, i)) in pairs.iter().take(count).enumerate() {
                    let s = eig.eigenvectors.column(i);
                    let mut u = vec![0.0; n];
                    for (kk, v) in basis.iter().take(dim).enumerate() {
                        axpy(&mut u, s[kk], v);
                    }
                    worst = worst.max(relative_residual(k, m, lam, &u));
                    vecs.set_column(c, &DVector::from_vec(u));
                    vals.push(lam);
                }
                last_worst = worst;
                if worst < RESIDUAL_TOL || exhausted {
                    if worst >= RESIDUAL_TOL * 1e3 {
                        return Err(LabError::NonConvergence(format!(
                            "block Lanczos stopped at dimension {dim} with relative residual {worst:.3e}"
                        )));
                    }
                    let mut res =
                        SpectrumResult::from_eigenvalues(vals, zero_tolerance(sys), sys.has_potential, Backend::Lanczos)?;
                    res.eigenvectors = Some(vecs);
                    res.residual = worst;
                    return Ok(res);
                }
            }
        }
        if exhausted {
            return Err(LabError::NonConvergence(format!(
                "Krylov space exhausted at dimension {} (last residual {last_worst:.3e})",
                basis.len()
            )));
        }
    }
}

/// Distinct Laplace eigenvalues `k(k+n−1)/a²` of `S^n(a)` with their
/// multiplicities, for `k = 0 … kmax`; only even `k` for the antipodal
/// quotient `ℝP^n(a)`.
pub fn sphere_levels(n: usize, a: f64, antipodal: bool, kmax: usize) -> Vec<(f64, usize)> {
    let binom = |p: i64, q: i64| -> usize {
        if q < 0 || p < q {
            0
        } else {
            crate::tensorlab::binomial(p as usize, q as usize) as usize
        }
    };
    (0..=kmax)
        .filter(|k| !antipodal || k % 2 == 0)
        .map(|k| {
            let (ki, ni) = (k as i64, n as i64);
            let mult = binom(ni + ki, ni) - binom(ni + ki - 2, ni);
            ((k * (k + n - 1)) as f64 / (a * a), mult)
        })
        .collect()
}

fn expand_levels(levels: &[(f64, usize)], count: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(count);
    for &(v, mult) in levels {
        for _ in 0..mult {
            if out.len() == count {
                return out;
            }
            out.push(v);
        }
    }
    out
}

/// Closed-form Laplace spectrum of the round sphere `S^n(a)`.
pub fn sphere_spectrum(n: usize, a: f64, count: usize) -> Result<SpectrumResult> {
    closed_sphere(n, a, false, count)
}

/// Closed-form Laplace spectrum of `ℝP^n(a)`, the antipodal quotient.
pub fn projective_spectrum(n: usize, a: f64, count: usize) -> Result<SpectrumResult> {
    closed_sphere(n, a, true, count)
}

fn closed_sphere(n: usize, a: f64, antipodal: bool, count: usize) -> Result<SpectrumResult> {
    if n < 1 || !(a > 0.0) {
        return arg("sphere spectrum needs n >= 1 and a > 0");
    }
    let count = count.max(2);
    let mut kmax = 2;
    while expand_levels(&sphere_levels(n, a, antipodal, kmax), count).len() < count {
        kmax += 2;
    }
    let ev = expand_levels(&sphere_levels(n, a, antipodal, kmax), count);
    SpectrumResult::from_eigenvalues(ev, 0.0, false, Backend::ClosedForm)
}

/// Closed-form Laplace spectrum of a flat torus with circumferences `lengths`.
pub fn flat_torus_spectrum(lengths: &[f64], count: usize) -> Result<SpectrumResult> {
    if lengths.is_empty() || lengths.iter().any(|l| !(*l > 0.0)) {
        return arg("flat torus needs positive circumferences");
    }
    let count = count.max(2);
    let lmax = lengths.iter().cloned().fold(0.0, f64::max);
    let mut kmax = 1i64;
    loop {
        let mut ev = Vec::new();
        let d = lengths.len();
        let mut idx = vec![-kmax; d];
        loop {
            let v: f64 = idx.iter().zip(lengths).map(|(k, l)| (2.0 * std::f64::consts::PI * *k as f64 / l).powi(2)).sum();
            ev.push(v);
            let mut p = 0;
            while p < d {
                idx[p] += 1;
                if idx[p] <= kmax {
                    break;
                }
                idx[p] = -kmax;
                p += 1;
            }
            if p == d {
                break;
            }
        }
        ev.sort_by(f64::total_cmp);
        let bound = (2.0 * std::f64::consts::PI * (kmax + 1) as f64 / lmax).powi(2);
        let complete: Vec<f64> = ev.into_iter().filter(|&v| v < bound).collect();
        if complete.len() >= count {
            return SpectrumResult::from_eigenvalues(complete[..count].to_vec(), 0.0, false, Backend::ClosedForm);
        }
        kmax += 1;
    }
}

/// Spectrum of `L = −Σ_f t_f Δ_f` on a Riemannian product from the factor
/// spectra: all sums `Σ_f t_f λ_{i_f}`, ascending, truncated to `count`.
pub fn product_spectrum(factors: &[(f64, SpectrumResult)], count: usize) -> Result<SpectrumResult> {
    if factors.is_empty() {
        return arg("product spectrum needs at least one factor");
    }
    if let Some((t, _)) = factors.iter().find(|(t, _)| !(*t > 0.0)) {
        return arg(format!("product spectrum weight {t} is not positive"));
    }
    let count = count.max(2);
    let mut combined = vec![0.0];
    for (t, s) in factors {
        let mut next: Vec<f64> = combined.iter().flat_map(|c| s.eigenvalues.iter().map(move |l| c + t * l)).collect();
        next.sort_by(f64::total_cmp);
        next.truncate(count);
        combined = next;
    }
    let tol = factors.iter().map(|(t, s)| t * s.tol_zero).fold(0.0, f64::max);
    SpectrumResult::from_eigenvalues(combined, tol, false, Backend::Product)
}
