use std::sync::Arc;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::moebius::{gamma_apply, hyper_apply, stereo_apply, MoebiusParam, POLE_TOLERANCE};
use crate::error::{LabError, Result};
use crate::immersion::{AmbientMap, AmbientSpace, Analytic, GenericMap, Real};

/// The conformal map `Γ` from a space form of curvature `c ∈ {1, 0, −1}`
/// into the unit sphere: `γ_g`, `γ_g ∘ π₀` or `γ_g ∘ π₀ ∘ π`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConformalChain {
    pub source: AmbientSpace,
    pub g: MoebiusParam,
}

/// `ρ`, `e^{2ρ}` and the ambient gradient `∇̄ρ` (tangent to the source).
#[derive(Clone, Debug)]
pub struct ConformalFactor {
    pub rho: f64,
    pub e2rho: f64,
    pub grad: DVector<f64>,
}

impl ConformalChain {
    pub fn new(source: AmbientSpace, g: MoebiusParam) -> Result<Self> {
        if g.len() != source.dim + 1 {
            return Err(LabError::Argument(format!(
                "Möbius parameter for {} needs {} entries, got {}",
                source.label(),
                source.dim + 1,
                g.len()
            )));
        }
        Ok(Self { source, g })
    }

    pub fn identity_like(source: AmbientSpace) -> Self {
        Self { source, g: MoebiusParam::zero(source.dim + 1) }
    }

    /// Target model `𝕊^N(1) ⊂ ℝ^{N+1}`.
    pub fn target(&self) -> AmbientSpace {
        AmbientSpace::sphere(self.source.dim)
    }

    pub fn with_g(&self, g: MoebiusParam) -> Result<Self> {
        Self::new(self.source, g)
    }

    /// Evaluates `Γ(x)`.
    pub fn map_point(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        let res = self.source.constraint_residual(x);
        if res > 1e-8 {
            return Err(LabError::Constraint(format!("point violates the {} constraint by {res:.3e}", self.source.label())));
        }
        Ok(DVector::from_vec(self.apply(x.as_slice())?))
    }

    /// The chain as a shareable ambient map with exact jet derivatives.
    pub fn as_map(&self) -> Arc<dyn AmbientMap> {
        Arc::new(Analytic(self.clone()))
    }

    /// Closed-form conformal factor with `Γ^*h₁ = e^{2ρ} h_c`.
    pub fn conformal_factor(&self, x: &DVector<f64>) -> Result<ConformalFactor> {
        let g = self.g.g();
        let lam = self.g.lambda();
        let nn = self.source.dim;
        match self.source.c {
            1 => {
                let f = x.dot(&DVector::from_column_slice(g));
                pole(1.0 + f)?;
                let rho = -lam.ln() - (1.0 + f).ln();
                let d = DVector::from_iterator(nn + 1, g.iter().map(|gi| -gi / (1.0 + f)));
                let grad = &d - x * d.dot(x);
                Ok(ConformalFactor { rho, e2rho: (2.0 * rho).exp(), grad })
            }
            0 => {
                let (gt, g0) = (&g[..nn], g[nn]);
                let r2 = x.norm_squared();
                let xg: f64 = x.iter().zip(gt).map(|(a, b)| a * b).sum();
                let s = 1.0 + r2 + 2.0 * xg + (r2 - 1.0) * g0;
                pole(s / (1.0 + r2))?;
                let rho = 2f64.ln() - lam.ln() - s.ln();
                let grad = DVector::from_iterator(nn, (0..nn).map(|i| -2.0 * ((1.0 + g0) * x[i] + gt[i]) / s));
                Ok(ConformalFactor { rho, e2rho: (2.0 * rho).exp(), grad })
            }
            -1 => {
                let (gt, g0) = (&g[..nn], g[nn]);
                let x0 = x[nn];
                let xg: f64 = (0..nn).map(|i| x[i] * gt[i]).sum();
                let d = x0 + xg - g0;
                pole(d / x0)?;
                let rho = -lam.ln() - d.ln();
                let mut grad = DVector::from_iterator(nn + 1, (0..=nn).map(|i| if i < nn { -gt[i] / d } else { 1.0 / d }));
                let proj = self.source.inner(&grad, x);
                grad += x * proj;
                Ok(ConformalFactor { rho, e2rho: (2.0 * rho).exp(), grad })
            }
            c => Err(LabError::Unsupported(format!("curvature {c}"))),
        }
    }
}

fn pole(v: f64) -> Result<()> {
    if v <= POLE_TOLERANCE {
        return Err(LabError::PoleProximity(format!("1 + f = {v:.3e}")));
    }
    Ok(())
}

impl GenericMap for ConformalChain {
    fn apply<R: Real>(&self, x: &[R]) -> Result<Vec<R>> {
        if x.len() != self.source.coords() {
            return Err(LabError::Argument(format!(
                "{} expects {} coordinates, got {}",
                self.source.label(),
                self.source.coords(),
                x.len()
            )));
        }
        match self.source.c {
            1 => gamma_apply(x, &self.g),
            0 => gamma_apply(&stereo_apply(x), &self.g),
            -1 => gamma_apply(&stereo_apply(&hyper_apply(x)), &self.g),
            c => Err(LabError::Unsupported(format!("curvature {c}"))),
        }
    }
}
