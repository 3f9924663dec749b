use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::immersion::PointFrame;
use crate::tensorlab::{h_t, mean_curvature_tensor, newton_tensor, SecondFundamentalForm};

/// User-supplied tensor `T`, evaluated in the orthonormal tangent frame of a
/// point.
pub trait TensorProvider: Send + Sync {
    fn tensor(&self, frame: &PointFrame) -> Result<DMatrix<f64>>;
    fn label(&self) -> String;
}

/// User-supplied potential `q`.
pub trait PotentialProvider: Send + Sync {
    fn value(&self, frame: &PointFrame) -> f64;
    fn label(&self) -> String;
}

/// Choice of the tensor `T` in `L_T f = −div(T∇f)`.
#[derive(Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OperatorKind {
    Identity,
    /// Newton transformation `T_r`.
    Newton { r: usize },
    /// `T = nH·I − h^{n+1}` on the principal normal.
    MeanCurvatureTensor,
    #[serde(skip)]
    Custom(Arc<dyn TensorProvider>),
}

impl fmt::Debug for OperatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl OperatorKind {
    pub fn label(&self) -> String {
        match self {
            OperatorKind::Identity => "identity".into(),
            OperatorKind::Newton { r } => format!("newton{r}"),
            OperatorKind::MeanCurvatureTensor => "mean_curvature_tensor".into(),
            OperatorKind::Custom(p) => format!("custom:{}", p.label()),
        }
    }
}

/// Potential `q` of the Schrödinger-type operator `L_T + q`.
#[derive(Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Potential {
    Constant { value: f64 },
    /// `q = scale · x^axis + offset` on ambient coordinates.
    Coordinate {
        axis: usize,
        #[serde(default = "unit")]
        scale: f64,
        #[serde(default)]
        offset: f64,
    },
    #[serde(skip)]
    Custom(Arc<dyn PotentialProvider>),
}

fn unit() -> f64 {
    1.0
}

impl fmt::Debug for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl Potential {
    pub fn label(&self) -> String {
        match self {
            Potential::Constant { value } => format!("q={value}"),
            Potential::Coordinate { axis, scale, offset } => format!("q={scale}*x{axis}+{offset}"),
            Potential::Custom(p) => format!("q=custom:{}", p.label()),
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, Potential::Constant { .. })
    }

    pub fn value(&self, frame: &PointFrame) -> Result<f64> {
        match self {
            Potential::Constant { value } => Ok(*value),
            Potential::Coordinate { axis, scale, offset } => {
                let x = frame.position.get(*axis).ok_or_else(|| {
                    LabError::Argument(format!("potential axis {axis} exceeds {} ambient coordinates", frame.position.len()))
                })?;
                Ok(scale * x + offset)
            }
            Potential::Custom(p) => Ok(p.value(frame)),
        }
    }
}

/// Operator `L_T (+ q)` on a submanifold of the space form of curvature `c`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OperatorSpec {
    #[serde(flatten)]
    pub kind: OperatorKind,
    #[serde(default)]
    pub potential: Option<Potential>,
    pub c: i8,
}

impl OperatorSpec {
    pub fn identity(c: i8) -> Self {
        Self { kind: OperatorKind::Identity, potential: None, c }
    }

    pub fn newton(r: usize, c: i8) -> Self {
        Self { kind: OperatorKind::Newton { r }, potential: None, c }
    }

    pub fn mean_curvature_tensor(c: i8) -> Self {
        Self { kind: OperatorKind::MeanCurvatureTensor, potential: None, c }
    }

    pub fn with_potential(mut self, q: Potential) -> Self {
        self.potential = Some(q);
        self
    }

    pub fn label(&self) -> String {
        match &self.potential {
            Some(q) => format!("{}+{}", self.kind.label(), q.label()),
            None => self.kind.label(),
        }
    }

    /// Checks the order restriction of Newton operators: `0 ≤ r ≤ n − 2`
    /// and `r` even unless `p = 1`.
    pub fn validate(&self, n: usize, p: usize) -> Result<()> {
        if !(-1..=1).contains(&self.c) {
            return Err(LabError::Argument(format!("ambient curvature {} is not in {{-1, 0, 1}}", self.c)));
        }
        if let OperatorKind::Newton { r } = self.kind {
            if r + 2 > n {
                return Err(LabError::Argument(format!("Newton order {r} exceeds n - 2 = {}", n as i64 - 2)));
            }
            if p > 1 && r % 2 == 1 {
                return Err(LabError::Unsupported(format!("odd Newton order {r} in codimension {p}")));
            }
        }
        Ok(())
    }

    /// `T` at one point, in the tangent frame of `frame`.
    pub fn tensor(&self, frame: &PointFrame) -> Result<DMatrix<f64>> {
        let n = frame.n();
        match &self.kind {
            OperatorKind::Identity => Ok(DMatrix::identity(n, n)),
            OperatorKind::Newton { r } => Ok(newton_tensor(&frame.h, *r)?.matrix()?.clone()),
            OperatorKind::MeanCurvatureTensor => Ok(mean_curvature_tensor(&frame.h)?.t),
            OperatorKind::Custom(p) => {
                let t = p.tensor(frame)?;
                if t.nrows() != n || t.ncols() != n {
                    return Err(LabError::Argument(format!("custom T is {}x{}, expected {n}x{n}", t.nrows(), t.ncols())));
                }
                Ok(t)
            }
        }
    }

    pub fn point(&self, frame: &PointFrame) -> Result<PointData> {
        PointData::new(self, frame)
    }
}

fn min_sym_eigenvalue(m: &DMatrix<f64>) -> f64 {
    let s = (m + m.transpose()) * 0.5;
    s.symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min)
}

/// Pointwise ingredients of the inequality.
#[derive(Clone, Debug)]
pub struct PointData {
    pub t: DMatrix<f64>,
    pub trace: f64,
    /// `H_T` in normal-frame components.
    pub ht: DVector<f64>,
    /// `c tr T + |H_T|²/tr T`.
    pub integrand: f64,
    pub t_min: f64,
    /// Smallest eigenvalue of `T′ = (tr T) I − 2T`.
    pub tprime_min: f64,
    /// Smallest eigenvalue of `S_r I − T_r = Σ T_{r−1} h` for Newton operators.
    pub newton_min: Option<f64>,
    pub q: Option<f64>,
}

impl PointData {
    fn new(spec: &OperatorSpec, frame: &PointFrame) -> Result<Self> {
        let t = spec.tensor(frame)?;
        let n = t.nrows();
        let trace = t.trace();
        if !(trace > 0.0) {
            return Err(LabError::Ellipticity(format!("tr T = {trace:.3e} at {:?}", frame.position.as_slice())));
        }
        let ht = h_t(&t, &frame.h)?;
        let integrand = spec.c as f64 * trace + ht.norm_squared() / trace;
        let tprime = DMatrix::identity(n, n) * trace - &t * 2.0;
        let newton_min = match spec.kind {
            OperatorKind::Newton { r } if r > 0 => Some(newton_condition_min(&frame.h, r, &t)?),
            _ => None,
        };
        let q = spec.potential.as_ref().map(|p| p.value(frame)).transpose()?;
        Ok(Self { t_min: min_sym_eigenvalue(&t), tprime_min: min_sym_eigenvalue(&tprime), t, trace, ht, integrand, newton_min, q })
    }
}

/// Smallest eigenvalue of `Σ_{k,α} T^α_{r−1,kj} h^α_{ki} = S_r I − T_r`.
fn newton_condition_min(h: &SecondFundamentalForm, r: usize, tr: &DMatrix<f64>) -> Result<f64> {
    let n = h.n();
    let sr = crate::tensorlab::mean_profile(h)?
        .s_r(r)
        .ok_or_else(|| LabError::Unsupported(format!("S_{r} is vector valued")))?;
    Ok(min_sym_eigenvalue(&(DMatrix::identity(n, n) * sr - tr)))
}
