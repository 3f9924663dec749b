use std::io::Write;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::chain::ConformalChain;
use super::moebius::{gamma_apply, gamma_g_jacobian, MoebiusParam};
use crate::error::{arg, LabError, Result};
use crate::immersion::AmbientSpace;

const MAX_ITERATIONS: usize = 500;
const BALL_MARGIN: f64 = 1e-9;

/// A finite positive measure on a space form: points with weights.
#[derive(Clone, Debug)]
pub struct PointMeasure {
    pub space: AmbientSpace,
    pub points: Vec<DVector<f64>>,
    pub weights: Vec<f64>,
}

impl PointMeasure {
    pub fn new(space: AmbientSpace, points: Vec<DVector<f64>>, weights: Vec<f64>) -> Result<Self> {
        if points.len() != weights.len() || points.is_empty() {
            return arg("measure needs one weight per point and at least one point");
        }
        if weights.iter().any(|w| !(*w >= 0.0)) {
            return arg("measure weights must be non-negative");
        }
        if !(weights.iter().sum::<f64>() > 0.0) {
            return arg("measure has zero total mass");
        }
        for (i, p) in points.iter().enumerate() {
            if p.len() != space.coords() {
                return arg(format!("point {i} has {} coordinates, expected {}", p.len(), space.coords()));
            }
        }
        let spread = points.iter().map(|p| (p - &points[0]).amax()).fold(0.0, f64::max);
        if spread < 1e-12 {
            return arg("measure is supported at a single point");
        }
        Ok(Self { space, points, weights })
    }

    pub fn mass(&self) -> f64 {
        self.weights.iter().sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BalanceStep {
    pub iteration: usize,
    pub residual: f64,
    pub gnorm: f64,
    pub step: f64,
}

#[derive(Clone, Debug)]
pub struct BalanceResult {
    pub g: MoebiusParam,
    /// `max_A |∫Φ^A dμ|`.
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Numerical rank of the final Gauss-Newton Jacobian.
    pub jacobian_rank: usize,
    pub history: Vec<BalanceStep>,
    pub chain: ConformalChain,
}

impl BalanceResult {
    pub fn require_converged(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(LabError::NonConvergence(format!(
                "balancing stopped after {} iterations with residual {:.3e}; the measure may concentrate near a point",
                self.iterations, self.residual
            )))
        }
    }

    /// Writes `iteration,residual,gnorm,step`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        for row in &self.history {
            wr.serialize(row).map_err(crate::meshfem::csv_err)?;
        }
        wr.flush()?;
        Ok(())
    }
}

fn center(ys: &[Vec<f64>], w: &[f64], p: &MoebiusParam) -> Result<DVector<f64>> {
    let d = p.len();
    let parts: Vec<Vec<f64>> = ys.par_iter().map(|y| gamma_apply(y, p)).collect::<Result<_>>()?;
    let mut m = DVector::zeros(d);
    for (v, wk) in parts.iter().zip(w) {
        for i in 0..d {
            m[i] += wk * v[i];
        }
    }
    Ok(m)
}

fn jacobian(ys: &[Vec<f64>], w: &[f64], p: &MoebiusParam) -> Result<DMatrix<f64>> {
    let d = p.len();
    let parts: Vec<DMatrix<f64>> = ys.par_iter().map(|y| gamma_g_jacobian(y, p)).collect::<Result<_>>()?;
    let mut j = DMatrix::zeros(d, d);
    for (m, wk) in parts.iter().zip(w) {
        j += m * *wk;
    }
    Ok(j)
}

fn project_to_ball(g: DVector<f64>) -> DVector<f64> {
    let r = g.norm();
    if r > 1.0 - BALL_MARGIN {
        g * ((1.0 - BALL_MARGIN) / r)
    } else {
        g
    }
}

/// Finds `g` such that `Φ = γ_g ∘ P` has vanishing mass center
/// `m(g) = Σ w_k Φ(x_k)`, where `P` maps the source space form to the unit
/// sphere (`id`, `π₀` or `π₀ ∘ π`).
///
/// Gauss-Newton on `|m(g)|²` from `g = 0` with an analytic Jacobian,
/// backtracking line search and projection into `|g| ≤ 1 − 1e−9`.
/// Converged means `max_A |m_A| ≤ 1e−8 · mass`.
pub fn balance(measure: &PointMeasure) -> Result<BalanceResult> {
    balance_with(measure, 1e-8, MAX_ITERATIONS)
}

pub fn balance_with(measure: &PointMeasure, rel_tol: f64, max_iterations: usize) -> Result<BalanceResult> {
    let base = ConformalChain::identity_like(measure.space);
    let ys: Vec<Vec<f64>> = measure
        .points
        .iter()
        .map(|x| base.map_point(x).map(|v| v.as_slice().to_vec()))
        .collect::<Result<_>>()?;
    let w = &measure.weights;
    let target = rel_tol * measure.mass();
    let d = measure.space.dim + 1;

    let mut g = DVector::<f64>::zeros(d);
    let mut p = MoebiusParam::zero(d);
    let mut m = center(&ys, w, &p)?;
    let mut history = vec![BalanceStep { iteration: 0, residual: m.amax(), gnorm: 0.0, step: 0.0 }];
    let mut rank = d;
    let mut iterations = 0;
    while m.amax() > target && iterations < max_iterations {
        iterations += 1;
        let j = jacobian(&ys, w, &p)?;
        let svd = j.svd(true, true);
        let smax = svd.singular_values.max();
        rank = svd.singular_values.iter().filter(|s| **s > 1e-10 * smax).count();
        let delta = svd
            .solve(&(-&m), 1e-12 * smax)
            .map_err(|e| LabError::NonConvergence(format!("Gauss-Newton step failed: {e}")))?;
        let f0 = m.norm_squared();
        let mut alpha = 1.0;
        let mut accepted = None;
        while alpha > 1e-12 {
            let trial = project_to_ball(&g + &delta * alpha);
            if let Ok(tp) = MoebiusParam::new(trial.as_slice().to_vec()) {
                if let Ok(tm) = center(&ys, w, &tp) {
                    if tm.norm_squared() < (1.0 - 1e-4 * alpha) * f0 {
                        accepted = Some((trial, tp, tm));
                        break;
                    }
                }
            }
            alpha *= 0.5;
        }
        let Some((ng, np, nm)) = accepted else {
            break;
        };
        let step = (&ng - &g).norm();
        g = ng;
        p = np;
        m = nm;
        history.push(BalanceStep { iteration: iterations, residual: m.amax(), gnorm: g.norm(), step });
    }
    let residual = m.amax();
    Ok(BalanceResult {
        chain: base.with_g(p.clone())?,
        g: p,
        residual,
        iterations,
        converged: residual <= target,
        jacobian_rank: rank,
        history,
    })
}
