use nalgebra::{DMatrix, DVector};

use super::kronecker::binomial;
use super::newton::{newton_sequence, SValue};
use super::sff::{min_eigenvalue, SecondFundamentalForm};
use crate::error::{LabError, Result};

/// Mean curvatures of one point.
#[derive(Clone, Debug)]
pub struct MeanCurvatureProfile {
    pub n: usize,
    /// Mean curvature vector `H^α`.
    pub h: DVector<f64>,
    pub h_len: f64,
    /// `S_0, …, S_n`; scalar for even r and for p = 1, vector otherwise.
    pub s: Vec<SValue>,
    /// `|τ|²`, present when the principal normal `H/|H|` exists.
    pub tau2: Option<f64>,
}

impl MeanCurvatureProfile {
    /// Scalar `S_r` if it exists for this order.
    pub fn s_r(&self, r: usize) -> Option<f64> {
        self.s.get(r).and_then(SValue::scalar)
    }

    /// Normalized `H_r = S_r / C(n,r)`.
    pub fn h_r(&self, r: usize) -> Option<f64> {
        self.s_r(r).map(|s| s / binomial(self.n, r) as f64)
    }

    /// Vector-valued `S_r` (a one-component vector for scalar orders).
    pub fn s_vector(&self, r: usize) -> Option<DVector<f64>> {
        self.s.get(r).map(SValue::as_vector)
    }
}

pub fn mean_profile(h: &SecondFundamentalForm) -> Result<MeanCurvatureProfile> {
    let (_, s) = newton_sequence(h, h.n())?;
    let hv = h.mean_vector();
    let h_len = hv.norm();
    let tau2 = h
        .principal_frame()
        .ok()
        .map(|pf| pf.components().iter().skip(1).map(|m| m.norm_squared()).sum());
    Ok(MeanCurvatureProfile { n: h.n(), h: hv, h_len, s, tau2 })
}

/// The tensor `T = nH·I − h^{n+1}` built on the principal normal.
#[derive(Clone, Debug)]
pub struct MeanCurvatureTensor {
    pub t: DMatrix<f64>,
    pub trace: f64,
    /// Length of the mean curvature vector.
    pub h: f64,
    /// Smallest eigenvalue of `T`.
    pub t_min: f64,
    /// Smallest eigenvalue of `T′ = (tr T) I − 2T`.
    pub tprime_min: f64,
    /// Second fundamental form in the principal normal frame.
    pub principal: SecondFundamentalForm,
}

pub fn mean_curvature_tensor(h: &SecondFundamentalForm) -> Result<MeanCurvatureTensor> {
    let principal = h.principal_frame()?;
    let n = h.n();
    let hlen = h.mean_vector().norm();
    if hlen == 0.0 {
        return Err(LabError::DegenerateNormal("|H| = 0".into()));
    }
    let eye = DMatrix::<f64>::identity(n, n);
    let t = &eye * (n as f64 * hlen) - principal.component(0);
    let trace = t.trace();
    let tprime = &eye * trace - &t * 2.0;
    Ok(MeanCurvatureTensor {
        t_min: min_eigenvalue(&t),
        tprime_min: min_eigenvalue(&tprime),
        t,
        trace,
        h: hlen,
        principal,
    })
}
