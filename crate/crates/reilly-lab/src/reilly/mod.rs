//! Both sides of the sharp upper bound
//! `λ₂(L_T) ≤ (1/V)∫(c tr T + |H_T|²/tr T)`, its Schrödinger and
//! mean-curvature-tensor variants, and the diagnostics of the equality
//! case: constancy of `tr T`, T-minimality inside a round sphere, the
//! sphere radius and the linear-coordinate eigen-relation.

mod operator;
mod report;
mod spectral;
mod mean_bound;

pub use operator::{OperatorKind, OperatorSpec, PointData, Potential, PotentialProvider, TensorProvider};
pub use report::{
    check_inequality, check_inequality_with, rhs_integral, schrodinger_report, t_minimality, CheckOptions,
    Discretization, EqualityDiagnostics, Preconditions, ReillyReport, ReportRow, Resolution, RhsValue, TMinimality,
    CLOSED_FORM_TOLERANCE, FEM_TOLERANCE,
};
pub use spectral::{closed_form_spectrum, factor_spectra, FactorCheck};
pub use mean_bound::{positivity_study, random_h2_positive_form, mean_curvature_integrand, mean_curvature_report, PositivityStudy};
