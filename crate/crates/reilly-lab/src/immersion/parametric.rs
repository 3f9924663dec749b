use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::jet::{Jet, MAX_PARAMS};
use super::map::{AmbientMap, Composed};
use super::space::{AmbientSpace, Domain};
use crate::error::{arg, LabError, Result};
use crate::tensorlab::SecondFundamentalForm;

/// Identification applied to the parameter domain before meshing.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Quotient {
    None,
    /// `y ~ −y` on a single sphere factor (real projective space).
    Antipodal,
}

/// How derivatives of the position map are obtained.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Derivatives {
    /// Exact, by second-order jets.
    Analytic,
    /// Central differences in local chart coordinates.
    FiniteDifference { scale: f64 },
}

/// Closed-form description of the induced Riemannian metric, when known.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum IntrinsicModel {
    Unknown,
    /// Round `S^n(radius)`, optionally quotiented by the antipodal map.
    Sphere { n: usize, radius: f64, antipodal: bool },
    /// Riemannian product of round spheres `(dim, radius)`.
    Product(Vec<(usize, f64)>),
    /// Flat torus with the given circumferences.
    FlatTorus(Vec<f64>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Origin {
    /// Closed-form value of the geometry.
    ClosedForm,
    /// Value obtained by substituting closed forms into derived formulas.
    Derived,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferenceValue {
    pub quantity: String,
    pub value: f64,
    pub origin: Origin,
}

/// Reference values attached to a gallery immersion.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Reference {
    pub values: Vec<ReferenceValue>,
    /// Principal curvatures (hypersurfaces or hypersurfaces of an
    /// intermediate sphere), ascending.
    pub principal_curvatures: Option<Vec<f64>>,
}

impl Reference {
    pub fn get(&self, quantity: &str) -> Option<f64> {
        self.values.iter().find(|v| v.quantity == quantity).map(|v| v.value)
    }

    pub fn push(&mut self, quantity: &str, value: f64, origin: Origin) {
        self.values.push(ReferenceValue { quantity: quantity.to_string(), value, origin });
    }
}

/// Immersion `x: M → ambient` given by a map on a parameter domain.
#[derive(Clone)]
pub struct ParametricImmersion {
    pub name: String,
    pub ambient: AmbientSpace,
    pub domain: Domain,
    pub quotient: Quotient,
    pub derivatives: Derivatives,
    pub intrinsic: IntrinsicModel,
    pub reference: Reference,
    map: Arc<dyn AmbientMap>,
}

impl std::fmt::Debug for ParametricImmersion {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ParametricImmersion")
            .field("name", &self.name)
            .field("ambient", &self.ambient)
            .field("domain", &self.domain)
            .field("derivatives", &self.derivatives)
            .finish()
    }
}

/// Position and parameter derivatives at one point.
#[derive(Clone, Debug)]
pub struct LocalDerivatives {
    pub x: DVector<f64>,
    /// `N × n`, column `i` is `∂x/∂t_i`.
    pub dx: DMatrix<f64>,
    /// `ddx[i * n + j] = ∂²x/∂t_i∂t_j`.
    pub ddx: Vec<DVector<f64>>,
}

/// Orthonormal frame data at one point of an immersion.
#[derive(Clone, Debug)]
pub struct PointFrame {
    pub c: f64,
    pub position: DVector<f64>,
    /// Induced metric in local chart coordinates.
    pub g: DMatrix<f64>,
    /// Chart-to-frame change of basis: `e_a = Σ_i x_i B_{ia}`.
    pub basis: DMatrix<f64>,
    /// Columns `e_1 … e_n`.
    pub tangent: DMatrix<f64>,
    /// Columns `e_{n+1} … e_{n+p}`.
    pub normal: DMatrix<f64>,
    pub h: SecondFundamentalForm,
    /// Mean curvature vector in ambient coordinates.
    pub hvec: DVector<f64>,
    /// Ambient second derivatives in the orthonormal frame, `[a * n + b]`.
    pub xab: Vec<DVector<f64>>,
    metric_diag: DVector<f64>,
}

impl PointFrame {
    pub fn n(&self) -> usize {
        self.tangent.ncols()
    }

    pub fn p(&self) -> usize {
        self.normal.ncols()
    }

    fn inner(&self, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
        a.iter().zip(b.iter()).zip(self.metric_diag.iter()).map(|((x, y), d)| x * y * d).sum()
    }

    /// Max-norm residual of `x_ab = Σ_α h^α_ab e_α − c δ_ab x` with the
    /// tangential (Christoffel) part of the second derivatives removed.
    pub fn structure_residual(&self) -> f64 {
        let n = self.n();
        let mut worst: f64 = 0.0;
        for a in 0..n {
            for b in 0..n {
                let mut v = self.xab[a * n + b].clone();
                for cc in 0..n {
                    let e = self.tangent.column(cc).into_owned();
                    let d = self.inner(&v, &e);
                    v -= e * d;
                }
                for al in 0..self.p() {
                    v -= self.normal.column(al) * self.h.component(al)[(a, b)];
                }
                if a == b {
                    v += &self.position * self.c;
                }
                worst = worst.max(v.amax());
            }
        }
        worst
    }

    /// Max deviation of `⟨e_A, e_B⟩` from `δ_AB` over tangent and normal
    /// vectors, together with their orthogonality to the position vector
    /// when `c ≠ 0`.
    pub fn orthonormality_residual(&self) -> f64 {
        let mut all: Vec<DVector<f64>> = self.tangent.column_iter().map(|c| c.into_owned()).collect();
        all.extend(self.normal.column_iter().map(|c| c.into_owned()));
        let mut worst: f64 = 0.0;
        for (i, a) in all.iter().enumerate() {
            for (j, b) in all.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((self.inner(a, b) - target).abs());
            }
            if self.c != 0.0 {
                worst = worst.max(self.inner(a, &self.position).abs());
            }
        }
        worst
    }

    /// Expresses an ambient vector in the tangent frame.
    pub fn tangent_components(&self, v: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(self.n(), self.tangent.column_iter().map(|e| self.inner(v, &e.into_owned())))
    }

    /// Expresses an ambient vector in the normal frame.
    pub fn normal_components(&self, v: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(self.p(), self.normal.column_iter().map(|e| self.inner(v, &e.into_owned())))
    }
}

impl ParametricImmersion {
    pub fn new(
        name: impl Into<String>,
        ambient: AmbientSpace,
        domain: Domain,
        map: Arc<dyn AmbientMap>,
        derivatives: Derivatives,
    ) -> Result<Self> {
        if domain.dim() == 0 || domain.dim() > MAX_PARAMS {
            return arg(format!("intrinsic dimension must be in 1..={MAX_PARAMS}"));
        }
        if domain.dim() >= ambient.dim {
            return arg("intrinsic dimension must be below the ambient dimension");
        }
        Ok(Self {
            name: name.into(),
            ambient,
            domain,
            quotient: Quotient::None,
            derivatives,
            intrinsic: IntrinsicModel::Unknown,
            reference: Reference::default(),
            map,
        })
    }

    pub fn with_quotient(mut self, q: Quotient) -> Self {
        self.quotient = q;
        self
    }

    pub fn with_intrinsic(mut self, m: IntrinsicModel) -> Self {
        self.intrinsic = m;
        self
    }

    pub fn with_reference(mut self, r: Reference) -> Self {
        self.reference = r;
        self
    }

    pub fn with_derivatives(mut self, d: Derivatives) -> Self {
        self.derivatives = d;
        self
    }

    pub fn n(&self) -> usize {
        self.domain.dim()
    }

    pub fn codim(&self) -> usize {
        self.ambient.dim - self.n()
    }

    pub fn map(&self) -> &Arc<dyn AmbientMap> {
        &self.map
    }

    pub fn position(&self, y: &[f64]) -> Result<DVector<f64>> {
        let x = self.map.eval(y)?;
        if x.len() != self.ambient.coords() {
            return Err(LabError::InvalidImmersion(format!(
                "map returns {} coordinates, ambient model has {}",
                x.len(),
                self.ambient.coords()
            )));
        }
        Ok(DVector::from_vec(x))
    }

    fn local_eval(&self, base: &[f64], t: &[f64]) -> Result<DVector<f64>> {
        let y = self.domain.chart(base, t);
        self.position(&y)
    }

    /// Position, first and second derivatives in the local chart at `y`.
    pub fn derivatives_at(&self, y: &[f64]) -> Result<LocalDerivatives> {
        self.derivatives_in_chart(y, &vec![0.0; self.n()])
    }

    /// Derivatives with respect to the chart centred at `y`, evaluated at
    /// the chart point `t0`.
    pub fn derivatives_in_chart(&self, y: &[f64], t0: &[f64]) -> Result<LocalDerivatives> {
        self.domain.validate(y)?;
        let n = self.n();
        if t0.len() != n {
            return arg("chart offset has the wrong length");
        }
        if let Derivatives::Analytic = self.derivatives {
            let t: Vec<Jet> = (0..n).map(|i| Jet::variable(t0[i], i)).collect();
            let yj = self.domain.chart(y, &t);
            if let Some(res) = self.map.eval_jet(&yj) {
                let xj = res?;
                let nn = xj.len();
                let x = DVector::from_iterator(nn, xj.iter().map(|j| j.v));
                let dx = DMatrix::from_fn(nn, n, |a, i| xj[a].g[i]);
                let ddx = (0..n * n)
                    .map(|ij| DVector::from_iterator(nn, xj.iter().map(|j| j.h[ij / n][ij % n])))
                    .collect();
                return Ok(LocalDerivatives { x, dx, ddx });
            }
        }
        let scale = match self.derivatives {
            Derivatives::FiniteDifference { scale } => scale,
            Derivatives::Analytic => 1.0,
        };
        self.fd_derivatives(y, t0, scale)
    }

    fn fd_derivatives(&self, y: &[f64], t0: &[f64], scale: f64) -> Result<LocalDerivatives> {
        let n = self.n();
        let h1 = f64::EPSILON.cbrt() * scale;
        let h2 = f64::EPSILON.powf(0.25) * scale;
        let zero = t0.to_vec();
        let x = self.local_eval(y, &zero)?;
        let nn = x.len();
        let shifted = |steps: &[(usize, f64)]| -> Result<DVector<f64>> {
            let mut t = zero.clone();
            for &(i, s) in steps {
                t[i] += s;
            }
            self.local_eval(y, &t)
        };
        let mut dx = DMatrix::zeros(nn, n);
        for i in 0..n {
            let d = (shifted(&[(i, h1)])? - shifted(&[(i, -h1)])?) / (2.0 * h1);
            dx.set_column(i, &d);
        }
        let mut ddx = vec![DVector::zeros(nn); n * n];
        for i in 0..n {
            let d2 = (shifted(&[(i, h2)])? - &x * 2.0 + shifted(&[(i, -h2)])?) / (h2 * h2);
            ddx[i * n + i] = d2;
            for j in (i + 1)..n {
                let m = (shifted(&[(i, h2), (j, h2)])? - shifted(&[(i, h2), (j, -h2)])?
                    - shifted(&[(i, -h2), (j, h2)])?
                    + shifted(&[(i, -h2), (j, -h2)])?)
                    / (4.0 * h2 * h2);
                ddx[i * n + j] = m.clone();
                ddx[j * n + i] = m;
            }
        }
        Ok(LocalDerivatives { x, dx, ddx })
    }

    /// Orthonormal frame, induced metric and second fundamental form at the
    /// domain point `y`.
    pub fn frame_at(&self, y: &[f64]) -> Result<PointFrame> {
        let ld = self.derivatives_at(y)?;
        self.frame_from(ld)
    }

    pub fn frame_from(&self, ld: LocalDerivatives) -> Result<PointFrame> {
        let LocalDerivatives { x, dx, ddx } = ld;
        let n = self.n();
        let amb = self.ambient;
        let c = amb.curvature();
        let viol = amb.constraint_residual(&x);
        if viol > 1e-8 {
            return Err(LabError::InvalidImmersion(format!(
                "{}: point violates the {} constraint by {viol:.3e}",
                self.name,
                amb.label()
            )));
        }
        let md = amb.metric_diag();
        let gdx = DMatrix::from_fn(dx.nrows(), n, |a, i| dx[(a, i)] * md[a]);
        let g = dx.transpose() * &gdx;
        let gmax = g.diagonal().amax().max(f64::MIN_POSITIVE);
        let chol = nalgebra::Cholesky::new(g.clone())
            .ok_or_else(|| LabError::SingularChart(format!("{}: Jacobian rank deficient", self.name)))?;
        let l = chol.l();
        let min_pivot = l.diagonal().iter().fold(f64::INFINITY, |m, v| m.min(*v));
        if min_pivot * min_pivot <= 1e-20 * gmax {
            return Err(LabError::SingularChart(format!("{}: Jacobian rank deficient", self.name)));
        }
        let basis = l
            .transpose()
            .try_inverse()
            .ok_or_else(|| LabError::SingularChart(format!("{}: Jacobian rank deficient", self.name)))?;
        let tangent = &dx * &basis;

        let inner = |a: &DVector<f64>, b: &DVector<f64>| -> f64 {
            a.iter().zip(b.iter()).zip(md.iter()).map(|((p, q), d)| p * q * d).sum()
        };
        let xx = inner(&x, &x);
        let tcols: Vec<DVector<f64>> = tangent.column_iter().map(|v| v.into_owned()).collect();
        let p = amb.dim - n;
        let mut normals: Vec<DVector<f64>> = Vec::with_capacity(p);
        for axis in 0..x.len() {
            if normals.len() == p {
                break;
            }
            let mut v = DVector::zeros(x.len());
            v[axis] = 1.0;
            for _ in 0..2 {
                for e in tcols.iter().chain(normals.iter()) {
                    let d = inner(&v, e);
                    v -= e * d;
                }
                if c != 0.0 {
                    let d = inner(&v, &x) / xx;
                    v -= &x * d;
                }
            }
            let n2 = inner(&v, &v);
            if n2 > 1e-6 {
                normals.push(v / n2.sqrt());
            }
        }
        if normals.len() != p {
            return Err(LabError::SingularChart(format!("{}: normal space completion failed", self.name)));
        }

        let xab: Vec<DVector<f64>> = (0..n * n)
            .map(|ab| {
                let (a, b) = (ab / n, ab % n);
                let mut v = DVector::zeros(x.len());
                for i in 0..n {
                    for j in 0..n {
                        let w = basis[(i, a)] * basis[(j, b)];
                        if w != 0.0 {
                            v += &ddx[i * n + j] * w;
                        }
                    }
                }
                v
            })
            .collect();
        let mut hs: Vec<DMatrix<f64>> = normals
            .iter()
            .map(|e| DMatrix::from_fn(n, n, |a, b| inner(&xab[a * n + b], e)))
            .collect();
        if p == 1 && hs[0].trace() < 0.0 {
            hs[0] *= -1.0;
            normals[0] *= -1.0;
        }
        let h = SecondFundamentalForm::new(hs)?;
        let hmean = h.mean_vector();
        let mut hvec = DVector::zeros(x.len());
        for (al, e) in normals.iter().enumerate() {
            hvec += e * hmean[al];
        }
        Ok(PointFrame {
            c,
            position: x,
            g,
            basis,
            tangent,
            normal: DMatrix::from_columns(&normals),
            h,
            hvec,
            xab,
            metric_diag: md,
        })
    }

    /// Random domain points (uniform in domain coordinates).
    pub fn sample_points<R: Rng + ?Sized>(&self, rng: &mut R, count: usize) -> Vec<Vec<f64>> {
        (0..count).map(|_| self.domain.random_point(rng)).collect()
    }
}

/// Immersion `Γ ∘ x` for an ambient map `Γ` into `target`.
///
/// Derivatives stay exact when both `x` and `Γ` support jets. The image of
/// `x` is probed at a few domain points; failure of `Γ` there is reported
/// as a domain error.
pub fn pushforward_under_map(
    imm: &ParametricImmersion,
    gamma: Arc<dyn AmbientMap>,
    target: AmbientSpace,
) -> Result<ParametricImmersion> {
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(7);
    for y in imm.sample_points(&mut rng, 16) {
        let x = imm.position(&y)?;
        let img = gamma
            .eval(x.as_slice())
            .map_err(|e| LabError::Domain(format!("image leaves the map's domain: {e}")))?;
        if img.len() != target.coords() {
            return arg(format!("map returns {} coordinates, target has {}", img.len(), target.coords()));
        }
    }
    let map: Arc<dyn AmbientMap> = Arc::new(Composed { inner: imm.map.clone(), outer: gamma });
    let mut out = ParametricImmersion::new(format!("pushforward({})", imm.name), target, imm.domain.clone(), map, imm.derivatives)?;
    out.quotient = imm.quotient;
    out.intrinsic = IntrinsicModel::Unknown;
    Ok(out)
}
