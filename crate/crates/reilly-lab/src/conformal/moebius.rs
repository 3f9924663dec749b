use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::immersion::Real;

/// Threshold on `1 + f` below which `γ_g` is treated as singular.
pub const POLE_TOLERANCE: f64 = 1e-14;

/// Parameter `g` of the Möbius map `γ_g`, a point of the open unit ball.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MoebiusParam {
    g: Vec<f64>,
}

impl MoebiusParam {
    pub fn new(g: Vec<f64>) -> Result<Self> {
        let n2: f64 = g.iter().map(|v| v * v).sum();
        if g.iter().any(|v| !v.is_finite()) || n2 >= 1.0 {
            return Err(LabError::Domain(format!("Möbius parameter must lie in the open unit ball, |g|² = {n2}")));
        }
        Ok(Self { g })
    }

    pub fn zero(len: usize) -> Self {
        Self { g: vec![0.0; len] }
    }

    pub fn g(&self) -> &[f64] {
        &self.g
    }

    pub fn len(&self) -> usize {
        self.g.len()
    }

    pub fn is_empty(&self) -> bool {
        self.g.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.norm2().sqrt()
    }

    fn norm2(&self) -> f64 {
        self.g.iter().map(|v| v * v).sum()
    }

    /// `λ = (1 − |g|²)^{−1/2}`.
    pub fn lambda(&self) -> f64 {
        (1.0 - self.norm2()).powf(-0.5)
    }

    /// `μ = (λ − 1)/|g|²`, written as `λ²/(λ + 1)` so that `g = 0` is regular.
    pub fn mu(&self) -> f64 {
        if self.norm2() == 0.0 {
            return 0.0;
        }
        let l = self.lambda();
        l * l / (l + 1.0)
    }
}

fn check_pole(one_plus_f: f64) -> Result<()> {
    if one_plus_f <= POLE_TOLERANCE {
        return Err(LabError::PoleProximity(format!("1 + ⟨x, g⟩ = {one_plus_f:.3e}")));
    }
    Ok(())
}

/// `γ_g(x) = (x + (μf + λ)g) / (λ(1 + f))` with `f = ⟨x, g⟩`, on any scalar type.
pub fn gamma_apply<R: Real>(x: &[R], p: &MoebiusParam) -> Result<Vec<R>> {
    if x.len() != p.len() {
        return Err(LabError::Argument(format!("point has {} coordinates, g has {}", x.len(), p.len())));
    }
    let g = p.g();
    let mut f = R::cst(0.0);
    for (xi, gi) in x.iter().zip(g) {
        f = f + *xi * *gi;
    }
    check_pole(1.0 + f.value())?;
    let (lam, mu) = (p.lambda(), p.mu());
    let num_coef = f * mu + lam;
    let den = (f + 1.0) * lam;
    Ok(x.iter().zip(g).map(|(xi, gi)| (*xi + num_coef * *gi) / den).collect())
}

/// `γ_g` on a unit vector.
pub fn gamma_g(x: &DVector<f64>, p: &MoebiusParam) -> Result<DVector<f64>> {
    let r = (x.norm() - 1.0).abs();
    if r > 1e-8 {
        return Err(LabError::Constraint(format!("γ_g needs a unit vector, |x| − 1 = {r:.3e}")));
    }
    Ok(DVector::from_vec(gamma_apply(x.as_slice(), p)?))
}

/// Jacobian `∂γ_g(y)/∂g` for a point `y` of the unit sphere.
pub fn gamma_g_jacobian(y: &[f64], p: &MoebiusParam) -> Result<DMatrix<f64>> {
    let g = p.g();
    let d = g.len();
    let f: f64 = y.iter().zip(g).map(|(a, b)| a * b).sum();
    check_pole(1.0 + f)?;
    let (lam, mu) = (p.lambda(), p.mu());
    let dlam = lam.powi(3);
    let dmu = lam.powi(4) * (lam + 2.0) / (lam + 1.0).powi(2);
    let den = lam * (1.0 + f);
    let coef = mu * f + lam;
    let gamma: Vec<f64> = (0..d).map(|i| (y[i] + coef * g[i]) / den).collect();
    Ok(DMatrix::from_fn(d, d, |i, j| {
        let dcoef = f * dmu * g[j] + mu * y[j] + dlam * g[j];
        let dnum = g[i] * dcoef + if i == j { coef } else { 0.0 };
        let dden = dlam * g[j] * (1.0 + f) + lam * y[j];
        (dnum - gamma[i] * dden) / den
    }))
}

/// Stereographic projection `π₀(x) = (2x, |x|² − 1)/(1 + |x|²)` onto `𝕊^N`.
pub fn stereo_apply<R: Real>(x: &[R]) -> Vec<R> {
    let mut s = R::cst(0.0);
    for v in x {
        s = s + *v * *v;
    }
    let den = s + 1.0;
    let mut out: Vec<R> = x.iter().map(|v| *v * 2.0 / den).collect();
    out.push((s - 1.0) / den);
    out
}

/// `π₀⁻¹(y) = ỹ/(1 − y⁰)`; the last coordinate is `y⁰`.
pub fn stereo_inverse(y: &DVector<f64>) -> Result<DVector<f64>> {
    let n = y.len() - 1;
    let d = 1.0 - y[n];
    check_pole(d)?;
    Ok(DVector::from_iterator(n, y.iter().take(n).map(|v| v / d)))
}

/// The pair `(π₀, π₀⁻¹)`.
pub fn stereo_pair() -> (fn(&DVector<f64>) -> DVector<f64>, fn(&DVector<f64>) -> Result<DVector<f64>>) {
    fn fwd(x: &DVector<f64>) -> DVector<f64> {
        DVector::from_vec(stereo_apply(x.as_slice()))
    }
    (fwd, stereo_inverse)
}

/// Poincaré projection `π(x) = x̃/(1 + x⁰)` of the hyperboloid onto the unit ball.
pub fn hyper_apply<R: Real>(x: &[R]) -> Vec<R> {
    let n = x.len() - 1;
    let den = x[n] + 1.0;
    x[..n].iter().map(|v| *v / den).collect()
}

/// Checked `π`: the input must lie on the upper sheet to `1e−8`.
pub fn hyper_project(x: &DVector<f64>) -> Result<DVector<f64>> {
    let n = x.len() - 1;
    let q: f64 = x.iter().take(n).map(|v| v * v).sum::<f64>() - x[n] * x[n];
    if (q + 1.0).abs() > 1e-8 || x[n] < 1.0 - 1e-8 {
        return Err(LabError::Constraint(format!("point is off the hyperboloid (⟨x,x⟩' + 1 = {:.3e})", q + 1.0)));
    }
    Ok(DVector::from_vec(hyper_apply(x.as_slice())))
}

/// `π⁻¹(w) = (2w, 1 + |w|²)/(1 − |w|²)`.
pub fn hyper_inverse(w: &DVector<f64>) -> Result<DVector<f64>> {
    let s = w.norm_squared();
    if s >= 1.0 {
        return Err(LabError::Domain(format!("|w|² = {s} is outside the unit ball")));
    }
    let d = 1.0 - s;
    let mut out: Vec<f64> = w.iter().map(|v| 2.0 * v / d).collect();
    out.push((1.0 + s) / d);
    Ok(DVector::from_vec(out))
}

/// The pair `(π, π⁻¹)`.
pub fn hyper_pair() -> (fn(&DVector<f64>) -> Result<DVector<f64>>, fn(&DVector<f64>) -> Result<DVector<f64>>) {
    (hyper_project, hyper_inverse)
}
