use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::immersion::ParametricImmersion;
use crate::meshfem::csv_err;
use crate::reilly::{check_inequality, check_inequality_with, CheckOptions, OperatorSpec, Resolution};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub level: usize,
    pub vertices: usize,
    pub lambda2: f64,
    pub rhs: f64,
    pub gap: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceKind {
    ClosedForm,
    /// `λ(L) + (λ(L) − λ(L−1))/3` from the two finest levels.
    Extrapolated,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceStudy {
    pub name: String,
    pub rows: Vec<ConvergenceRow>,
    pub reference: Option<f64>,
    pub reference_kind: Option<ReferenceKind>,
    /// Least-squares slope of `log|λ₂ − reference|` against `log h` with
    /// `h = 2^{−level}`.
    pub slope: Option<f64>,
    /// Points `(h, |λ₂ − reference|)` entering the fit.
    pub fit_points: Vec<(f64, f64)>,
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let m = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (sx / m, sy / m);
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// FEM reports on every level; the reference is the closed-form `λ₂` when
/// the geometry has one, otherwise the extrapolated value (then the finest
/// level is left out of the fit).
pub fn convergence_study(imm: &ParametricImmersion, spec: &OperatorSpec, levels: &[usize]) -> Result<ConvergenceStudy> {
    if levels.is_empty() {
        return Err(LabError::Argument("no levels".into()));
    }
    if levels.windows(2).any(|w| w[0] >= w[1]) {
        return Err(LabError::Argument(format!("levels {levels:?} must be strictly increasing")));
    }
    let mut rows = Vec::with_capacity(levels.len());
    for &level in levels {
        let mut opts = CheckOptions::new(Resolution::Fem { level });
        opts.estimate_discretization = false;
        let r = check_inequality_with(imm, spec, &opts)?;
        rows.push(ConvergenceRow {
            level,
            vertices: r.vertices.unwrap_or(0),
            lambda2: r.lambda2,
            rhs: r.rhs,
            gap: r.gap,
        });
    }
    let mut study = ConvergenceStudy {
        name: imm.name.clone(),
        rows,
        reference: None,
        reference_kind: None,
        slope: None,
        fit_points: Vec::new(),
    };
    if levels.len() < 2 {
        return Ok(study);
    }
    let closed = match check_inequality(imm, spec, Resolution::ClosedForm { samples: 64 }) {
        Ok(r) => Some(r.lambda2),
        Err(LabError::Unsupported(_)) => None,
        Err(e) => return Err(e),
    };
    let (reference, kind, used) = match closed {
        Some(v) => (v, ReferenceKind::ClosedForm, study.rows.len()),
        None => {
            let k = study.rows.len();
            let (fine, coarse) = (study.rows[k - 1].lambda2, study.rows[k - 2].lambda2);
            (fine + (fine - coarse) / 3.0, ReferenceKind::Extrapolated, k - 1)
        }
    };
    study.fit_points = study.rows[..used]
        .iter()
        .map(|r| (0.5f64.powi(r.level as i32), (r.lambda2 - reference).abs()))
        .collect();
    study.slope = loglog_slope(&study.fit_points);
    study.reference = Some(reference);
    study.reference_kind = Some(kind);
    Ok(study)
}

/// Writes `level,vertices,lambda2,rhs,gap`.
pub fn write_convergence_csv<W: Write>(study: &ConvergenceStudy, w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for r in &study.rows {
        wr.serialize(r).map_err(csv_err)?;
    }
    wr.flush()?;
    Ok(())
}
