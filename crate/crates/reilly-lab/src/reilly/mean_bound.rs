use nalgebra::DMatrix;
use rand::{Rng, RngExt};
use serde::{Deserialize, Serialize};

use super::operator::OperatorSpec;
use super::report::{check_inequality, sample_frames, ReillyReport, Resolution};
use crate::error::{LabError, Result};
use crate::immersion::ParametricImmersion;
use crate::tensorlab::{quartic_minimum, mean_curvature_tensor, mean_profile, sample::random_positive_h2, SecondFundamentalForm};

/// Integrand of the bound for `T = nH·I − h^{n+1}` written through `H`,
/// `H₂`, `|τ|²` and the cross terms `Σ_ij h^{n+1}_ij h^α_ij`, `α ≥ n+2`.
pub fn mean_curvature_integrand(h: &SecondFundamentalForm, c: f64) -> Result<f64> {
    let n = h.n() as f64;
    let prof = mean_profile(h)?;
    let hh = prof.h_len;
    let h2 = prof.h_r(2).ok_or_else(|| LabError::Unsupported("H_2 is not scalar".into()))?;
    if !(h2 > 0.0) {
        return Err(LabError::Hypothesis(format!("H_2 = {h2:.3e} is not positive")));
    }
    let principal = h.principal_frame()?;
    let tau2 = prof.tau2.unwrap_or(0.0);
    let lead = principal.component(0);
    let cross: f64 = principal.components().iter().skip(1).map(|m| lead.component_mul(m).sum().powi(2)).sum();
    let nn1 = n * (n - 1.0);
    Ok(nn1 * (c * hh + (h2 + tau2 / nn1).powi(2) / hh + cross / (nn1 * nn1 * hh)))
}

/// Report for `L = −Σ(nH δ_ij − h^{n+1}_ij)∂_ij` on a geometry of dimension
/// at least 4 with `H₂ > 0`.
///
/// `λ₂` comes from the closed-form spectra; the right-hand side is the
/// average of [`mean_curvature_integrand`], and `rhs_crosscheck` holds its difference
/// from the general form `c tr T + |H_T|²/tr T` at the same points.
pub fn mean_curvature_report(imm: &ParametricImmersion, resolution: Resolution) -> Result<ReillyReport> {
    if imm.n() < 4 {
        return Err(LabError::Hypothesis(format!("{} has dimension {} < 4", imm.name, imm.n())));
    }
    let Resolution::ClosedForm { samples } = resolution else {
        return Err(LabError::Unsupported("geometries of dimension 4 and more use closed-form spectra".into()));
    };
    let (_, frames) = sample_frames(imm, samples)?;
    let c = imm.ambient.curvature();
    let values = frames.iter().map(|f| mean_curvature_integrand(&f.h, c)).collect::<Result<Vec<_>>>()?;
    let general_rhs = values.iter().sum::<f64>() / values.len() as f64;
    let spec = OperatorSpec::mean_curvature_tensor(imm.ambient.c);
    let mut report = check_inequality(imm, &spec, resolution)?;
    report.rhs_crosscheck = Some(general_rhs - report.rhs);
    report.rhs = general_rhs;
    report.gap = general_rhs - report.lambda2;
    report.inequality_holds = report.gap >= -report.tol_num * general_rhs.abs();
    Ok(report)
}

/// Outcome of the positivity study for `T` and `T′` under `H₂ > 0`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PositivityStudy {
    pub samples: usize,
    /// Samples of dimension 4, where the lower bound comes from the
    /// four-variable minimization.
    pub four_dimensional: usize,
    /// `min (nH − max|k_i|)/H`.
    pub min_t_margin: f64,
    /// `min (n(n−3)H + 2k₁)/H`.
    pub min_tprime_margin: f64,
    /// Largest deviation between the smallest eigenvalue of `T′` and
    /// `n(n−3)H + 2k₁`, relative to `H`.
    pub tprime_consistency: f64,
    /// `min (3k₁ + k₂ + k₃ + k₄ − m(a,b))/H` over four-dimensional samples,
    /// where `m` is the closed-form minimum.
    pub min_quartic_margin: f64,
    pub violations: usize,
}

impl PositivityStudy {
    pub fn all_hold(&self) -> bool {
        self.violations == 0 && self.samples > 0
    }
}

/// Random second fundamental form with `n ∈ {4, 5, 6}`, `p ∈ {1, 2, 3}` and
/// `H₂ > 0`: diagonal principal curvatures for half of the draws, full
/// random components with a positive shift along the first normal for the
/// rest.
pub fn random_h2_positive_form<R: Rng + ?Sized>(rng: &mut R) -> SecondFundamentalForm {
    let n = rng.random_range(4..=6usize);
    if rng.random_bool(0.5) {
        let k = random_positive_h2(rng, n);
        return SecondFundamentalForm::from_principal(&k).expect("valid principal curvatures");
    }
    let p = rng.random_range(1..=3usize);
    loop {
        let shift: f64 = rng.random_range(0.2..2.0);
        let comps: Vec<DMatrix<f64>> = (0..p)
            .map(|a| {
                let mut m = DMatrix::from_fn(n, n, |_, _| rng.random_range(-0.5..0.5));
                m = (&m + m.transpose()) * 0.5;
                if a == 0 {
                    m += DMatrix::identity(n, n) * shift;
                }
                m
            })
            .collect();
        let h = SecondFundamentalForm::new(comps).expect("symmetric components");
        if mean_profile(&h).ok().and_then(|pr| pr.h_r(2)).is_some_and(|v| v > 1e-3) {
            return h;
        }
    }
}

/// Checks `nH > |k_i|`, `n(n−3)H + 2k₁ > 0` and, for `n = 4`, the bound
/// `3k₁ + k₂ + k₃ + k₄ ≥ (3a − √(9a² − 24b))/2 > 0` with `a = Σk_i`,
/// `b = Σ_{i<j} k_i k_j`, where `k_i` are the eigenvalues of `h^{n+1}`.
pub fn positivity_study<R: Rng + ?Sized>(rng: &mut R, count: usize) -> Result<PositivityStudy> {
    let mut st = PositivityStudy {
        min_t_margin: f64::INFINITY,
        min_tprime_margin: f64::INFINITY,
        min_quartic_margin: f64::INFINITY,
        ..Default::default()
    };
    for _ in 0..count {
        let h = random_h2_positive_form(rng);
        let n = h.n();
        let nf = n as f64;
        let t = mean_curvature_tensor(&h)?;
        let hh = t.h;
        let mut k: Vec<f64> = t.principal.component(0).symmetric_eigenvalues().iter().copied().collect();
        k.sort_by(f64::total_cmp);
        let t_margin = (nf * hh - k.iter().map(|v| v.abs()).fold(0.0, f64::max)) / hh;
        let tp_margin = (nf * (nf - 3.0) * hh + 2.0 * k[0]) / hh;
        st.samples += 1;
        st.min_t_margin = st.min_t_margin.min(t_margin);
        st.min_tprime_margin = st.min_tprime_margin.min(tp_margin);
        st.tprime_consistency = st.tprime_consistency.max((t.tprime_min / hh - tp_margin).abs());
        let mut ok = t_margin > 0.0 && tp_margin > 0.0 && t.t_min > 0.0 && t.tprime_min > 0.0;
        if n == 4 {
            st.four_dimensional += 1;
            let a: f64 = k.iter().sum();
            let b: f64 = (0..4).flat_map(|i| (i + 1..4).map(move |j| (i, j))).map(|(i, j)| k[i] * k[j]).sum();
            let f = 3.0 * k[0] + k[1] + k[2] + k[3];
            match quartic_minimum(a, b) {
                Ok(l) => {
                    let margin = (f - l.min) / hh;
                    st.min_quartic_margin = st.min_quartic_margin.min(margin);
                    ok &= l.min > 0.0 && margin > -1e-10;
                }
                Err(_) => ok = false,
            }
        }
        if !ok {
            st.violations += 1;
        }
    }
    Ok(st)
}
