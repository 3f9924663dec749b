use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::jet::Real;
use super::map::{Analytic, GenericMap};
use super::parametric::{Derivatives, IntrinsicModel, Origin, ParametricImmersion, Quotient, Reference};
use super::space::{AmbientSpace, Domain};
use crate::error::{arg, LabError, Result};

fn two() -> usize {
    2
}
fn one_usize() -> usize {
    1
}
fn one() -> f64 {
    1.0
}

/// Named gallery geometry with its parameters; the serialized form is the
/// `geometry` object of scenario configs, e.g.
/// `{"name": "clifford_torus", "m": 2, "n": 4, "a": 0.7071, "c": 0}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum GallerySpec {
    /// Round `S^n(a)` inside a totally geodesic `ℝ^{n+1}` / `𝕊^{n+1}` /
    /// `ℍ^{n+1}` of the space form of dimension `n + codim`.
    Sphere {
        #[serde(default = "two")]
        n: usize,
        #[serde(default = "one")]
        a: f64,
        #[serde(default = "one_usize")]
        codim: usize,
        #[serde(default)]
        c: i8,
    },
    /// `S^m(a) × S^{n−m}(√(1−a²)) ⊂ 𝕊^{n+1}(1)`, placed in ℝ^{n+2}
    /// (c = 0) or in a geodesic sphere of ℍ^{n+2} (c = −1).
    CliffordTorus {
        m: usize,
        n: usize,
        a: f64,
        #[serde(default)]
        c: i8,
    },
    /// First standard minimal immersion of ℝP² into `S⁴(√(1/3)) ⊂ ℝ⁵`.
    VeroneseRp2,
    /// `Σ (x_i/a_i)² = 1` in ℝ^{len(axes)}.
    Ellipsoid { axes: Vec<f64> },
    /// Geodesic sphere of radius `r` in `ℍ^{n+1}(−1)`.
    HyperbolicGeodesicSphere {
        r: f64,
        #[serde(default = "two")]
        n: usize,
    },
    /// Flat product of circles with the given circumferences in ℝ^{2k}.
    FlatTorus { lengths: Vec<f64> },
    /// Torus of revolution in ℝ³ with radii `big > small`.
    TorusOfRevolution { big: f64, small: f64 },
}

/// Gallery names with a short parameter synopsis.
pub fn gallery_names() -> Vec<(&'static str, &'static str)> {
    vec![
        ("sphere", "n=2, a=1, codim=1, c=0: round S^n(a) in the space form of curvature c"),
        ("clifford_torus", "m, n, a in (0,1), c in {0,-1}: S^m(a) x S^(n-m)(sqrt(1-a^2))"),
        ("veronese_rp2", "no parameters: minimal RP^2 in S^4(sqrt(1/3)) in R^5"),
        ("ellipsoid", "axes=[a1,...,a_(n+1)]: ellipsoid in R^(n+1)"),
        ("hyperbolic_geodesic_sphere", "r>0, n=2: geodesic sphere in H^(n+1)"),
        ("flat_torus", "lengths=[L1,...,Lk]: flat torus in R^(2k)"),
        ("torus_of_revolution", "big > small > 0: torus of revolution in R^3"),
    ]
}

struct SphereMap {
    a: f64,
    pad: usize,
    c: i8,
}

impl GenericMap for SphereMap {
    fn apply<R: Real>(&self, y: &[R]) -> Result<Vec<R>> {
        let mut x: Vec<R> = y.iter().map(|v| *v * self.a).collect();
        x.extend((0..self.pad).map(|_| R::cst(0.0)));
        match self.c {
            1 => x.push(R::cst((1.0 - self.a * self.a).max(0.0).sqrt())),
            -1 => x.push(R::cst((1.0 + self.a * self.a).sqrt())),
            _ => {}
        }
        Ok(x)
    }
}

struct CliffordMap {
    m: usize,
    a: f64,
    c: i8,
}

impl GenericMap for CliffordMap {
    fn apply<R: Real>(&self, y: &[R]) -> Result<Vec<R>> {
        let b = (1.0 - self.a * self.a).sqrt();
        let mut x: Vec<R> = y[..=self.m].iter().map(|v| *v * self.a).collect();
        x.extend(y[self.m + 1..].iter().map(|v| *v * b));
        if self.c == -1 {
            x.push(R::cst(2f64.sqrt()));
        }
        Ok(x)
    }
}

struct VeroneseMap;

impl GenericMap for VeroneseMap {
    fn apply<R: Real>(&self, y: &[R]) -> Result<Vec<R>> {
        let (a, b, c) = (y[0], y[1], y[2]);
        Ok(vec![
            a * b,
            a * c,
            b * c,
            (a * a - b * b) * 0.5,
            (a * a + b * b - c * c * 2.0) / (2.0 * 3f64.sqrt()),
        ])
    }
}

struct ScaleMap {
    axes: Vec<f64>,
}

impl GenericMap for ScaleMap {
    fn apply<R: Real>(&self, y: &[R]) -> Result<Vec<R>> {
        Ok(y.iter().zip(&self.axes).map(|(v, a)| *v * *a).collect())
    }
}

struct FlatTorusMap {
    radii: Vec<f64>,
}

impl GenericMap for FlatTorusMap {
    fn apply<R: Real>(&self, u: &[R]) -> Result<Vec<R>> {
        let mut x = Vec::with_capacity(2 * u.len());
        for (ui, r) in u.iter().zip(&self.radii) {
            let th = *ui / *r;
            x.push(th.cos() * *r);
            x.push(th.sin() * *r);
        }
        Ok(x)
    }
}

struct RevolutionMap {
    big: f64,
    small: f64,
}

impl GenericMap for RevolutionMap {
    fn apply<R: Real>(&self, u: &[R]) -> Result<Vec<R>> {
        let ring = u[1].cos() * self.small + self.big;
        Ok(vec![ring * u[0].cos(), ring * u[0].sin(), u[1].sin() * self.small])
    }
}

fn sphere_reference(n: usize, a: f64, codim: usize, c: i8) -> Reference {
    let mut r = Reference::default();
    let lam = n as f64 / (a * a);
    r.push("lambda2_laplace", lam, Origin::ClosedForm);
    r.push("rhs_identity", lam, Origin::Derived);
    let radius = match c {
        0 => a,
        1 => a.asin(),
        _ => a.asinh(),
    };
    r.push("geodesic_radius", radius, Origin::ClosedForm);
    let k = (1.0 / (a * a) - c as f64).sqrt();
    r.push("principal_curvature", k, Origin::ClosedForm);
    if codim == 1 {
        r.principal_curvatures = Some(vec![k; n]);
    }
    r
}

/// Newton tensor `T_2 = diag(t,…,t,s,…,s)` of the Clifford torus.
pub fn clifford_ts(m: usize, n: usize, a: f64, c: f64) -> (f64, f64) {
    let (m, n) = (m as f64, n as f64);
    let (a2, b2) = (a * a, 1.0 - a * a);
    let t = 0.5 * ((m - 2.0) * (m - 1.0) / a2 + (n - m) * (n - m - 1.0) / b2 - (n - 1.0) * (n - 2.0) * c);
    let s = 0.5 * (m * (m - 1.0) / a2 + (n - m - 2.0) * (n - m - 1.0) / b2 - (n - 1.0) * (n - 2.0) * c);
    (t, s)
}

/// Builds a gallery immersion.
pub fn gallery(spec: &GallerySpec) -> Result<ParametricImmersion> {
    match spec {
        GallerySpec::Sphere { n, a, codim, c } => {
            let (n, a, codim, c) = (*n, *a, *codim, *c);
            if n < 1 || codim < 1 {
                return arg("sphere needs n >= 1 and codim >= 1");
            }
            if !(a > 0.0) || (c == 1 && a > 1.0) {
                return arg(format!("sphere radius {a} invalid for c = {c}"));
            }
            let ambient = AmbientSpace::new(c, n + codim)?;
            let map = Arc::new(Analytic(SphereMap { a, pad: codim - 1, c }));
            Ok(ParametricImmersion::new(
                format!("sphere(n={n},a={a},codim={codim},c={c})"),
                ambient,
                Domain::Spheres(vec![n]),
                map,
                Derivatives::Analytic,
            )?
            .with_intrinsic(IntrinsicModel::Sphere { n, radius: a, antipodal: false })
            .with_reference(sphere_reference(n, a, codim, c)))
        }
        GallerySpec::HyperbolicGeodesicSphere { r, n } => {
            if !(*r > 0.0) {
                return arg("geodesic radius must be positive");
            }
            let mut imm = gallery(&GallerySpec::Sphere { n: *n, a: r.sinh(), codim: 1, c: -1 })?;
            imm.name = format!("hyperbolic_geodesic_sphere(r={r},n={n})");
            Ok(imm)
        }
        GallerySpec::CliffordTorus { m, n, a, c } => {
            let (m, n, a, c) = (*m, *n, *a, *c);
            if !(a > 0.0 && a < 1.0) {
                return arg(format!("clifford torus needs a in (0,1), got {a}"));
            }
            if m < 1 || m >= n {
                return arg("clifford torus needs 1 <= m < n");
            }
            if c > 0 {
                return arg("clifford torus gallery item needs c <= 0");
            }
            let b = (1.0 - a * a).sqrt();
            let ambient = AmbientSpace::new(c, n + 2)?;
            let map = Arc::new(Analytic(CliffordMap { m, a, c }));
            let mut r = Reference::default();
            let mut k: Vec<f64> = vec![-b / a; m];
            k.extend(vec![a / b; n - m]);
            k.sort_by(f64::total_cmp);
            r.principal_curvatures = Some(k);
            let lam_lap = (m as f64 / (a * a)).min((n - m) as f64 / (b * b));
            r.push("lambda2_laplace", lam_lap, Origin::ClosedForm);
            if n >= 4 {
                let (t, s) = clifford_ts(m, n, a, c as f64);
                r.push("t", t, Origin::Derived);
                r.push("s", s, Origin::Derived);
                r.push("lambda2_newton2", (m as f64 * t / (a * a)).min((n - m) as f64 * s / (b * b)), Origin::Derived);
                r.push("trace_t2", m as f64 * t + (n - m) as f64 * s, Origin::Derived);
            }
            Ok(ParametricImmersion::new(
                format!("clifford_torus(m={m},n={n},a={a},c={c})"),
                ambient,
                Domain::Spheres(vec![m, n - m]),
                map,
                Derivatives::Analytic,
            )?
            .with_intrinsic(IntrinsicModel::Product(vec![(m, a), (n - m, b)]))
            .with_reference(r))
        }
        GallerySpec::VeroneseRp2 => {
            let mut r = Reference::default();
            r.push("lambda2_laplace", 6.0, Origin::ClosedForm);
            r.push("rhs_identity", 6.0, Origin::Derived);
            r.push("sphere_curvature", 3.0, Origin::ClosedForm);
            Ok(ParametricImmersion::new(
                "veronese_rp2",
                AmbientSpace::euclidean(5),
                Domain::Spheres(vec![2]),
                Arc::new(Analytic(VeroneseMap)),
                Derivatives::Analytic,
            )?
            .with_quotient(Quotient::Antipodal)
            .with_intrinsic(IntrinsicModel::Sphere { n: 2, radius: 1.0, antipodal: true })
            .with_reference(r))
        }
        GallerySpec::Ellipsoid { axes } => {
            if axes.len() < 3 || axes.iter().any(|a| !(*a > 0.0)) {
                return arg("ellipsoid needs at least 3 positive axes");
            }
            let n = axes.len() - 1;
            let label: Vec<String> = axes.iter().map(|a| a.to_string()).collect();
            ParametricImmersion::new(
                format!("ellipsoid({})", label.join(",")),
                AmbientSpace::euclidean(n + 1),
                Domain::Spheres(vec![n]),
                Arc::new(Analytic(ScaleMap { axes: axes.clone() })),
                Derivatives::Analytic,
            )
        }
        GallerySpec::FlatTorus { lengths } => {
            if lengths.is_empty() || lengths.iter().any(|l| !(*l > 0.0)) {
                return arg("flat torus needs positive circumferences");
            }
            let radii: Vec<f64> = lengths.iter().map(|l| l / (2.0 * PI)).collect();
            let lmax = lengths.iter().cloned().fold(0.0, f64::max);
            let mut r = Reference::default();
            r.push("lambda2_laplace", (2.0 * PI / lmax).powi(2), Origin::ClosedForm);
            let label: Vec<String> = lengths.iter().map(|a| a.to_string()).collect();
            Ok(ParametricImmersion::new(
                format!("flat_torus({})", label.join(",")),
                AmbientSpace::euclidean(2 * lengths.len()),
                Domain::torus(lengths),
                Arc::new(Analytic(FlatTorusMap { radii })),
                Derivatives::Analytic,
            )?
            .with_intrinsic(IntrinsicModel::FlatTorus(lengths.clone()))
            .with_reference(r))
        }
        GallerySpec::TorusOfRevolution { big, small } => {
            if !(*small > 0.0 && big > small) {
                return arg("torus of revolution needs big > small > 0");
            }
            ParametricImmersion::new(
                format!("torus_of_revolution(big={big},small={small})"),
                AmbientSpace::euclidean(3),
                Domain::torus(&[2.0 * PI, 2.0 * PI]),
                Arc::new(Analytic(RevolutionMap { big: *big, small: *small })),
                Derivatives::Analytic,
            )
        }
    }
}

/// Looks up a gallery item by name and a JSON parameter object.
pub fn gallery_by_name(name: &str, params: &serde_json::Value) -> Result<ParametricImmersion> {
    let mut obj = match params {
        serde_json::Value::Object(m) => m.clone(),
        serde_json::Value::Null => serde_json::Map::new(),
        _ => return arg("gallery parameters must be a JSON object"),
    };
    obj.insert("name".into(), serde_json::Value::String(name.into()));
    let spec: GallerySpec = serde_json::from_value(serde_json::Value::Object(obj))
        .map_err(|e| LabError::Argument(format!("gallery item '{name}': {e}")))?;
    gallery(&spec)
}
