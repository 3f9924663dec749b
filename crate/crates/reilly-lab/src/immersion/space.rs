use nalgebra::{DMatrix, DVector};
use rand::{Rng, RngExt};
use serde::{Deserialize, Serialize};

use super::jet::Real;
use crate::error::{arg, LabError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Signature {
    Euclidean,
    /// Signature (+,…,+,−); the last coordinate is `x⁰`.
    Lorentz,
}

/// Simply connected space form of curvature `c` and dimension `dim`, in its
/// standard linear model: ℝ^dim (c = 0), the unit sphere in ℝ^{dim+1}
/// (c = 1), or the hyperboloid `⟨x,x⟩′ = −1, x⁰ ≥ 1` in ℝ^{dim,1} (c = −1).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AmbientSpace {
    pub c: i8,
    pub dim: usize,
}

impl AmbientSpace {
    pub fn new(c: i8, dim: usize) -> Result<Self> {
        if !(-1..=1).contains(&c) {
            return arg(format!("ambient curvature must be -1, 0 or 1, got {c}"));
        }
        if dim == 0 {
            return arg("ambient dimension must be positive");
        }
        Ok(Self { c, dim })
    }

    pub fn euclidean(dim: usize) -> Self {
        Self { c: 0, dim }
    }

    pub fn sphere(dim: usize) -> Self {
        Self { c: 1, dim }
    }

    pub fn hyperbolic(dim: usize) -> Self {
        Self { c: -1, dim }
    }

    pub fn curvature(&self) -> f64 {
        self.c as f64
    }

    /// Number of coordinates of the linear model.
    pub fn coords(&self) -> usize {
        if self.c == 0 {
            self.dim
        } else {
            self.dim + 1
        }
    }

    pub fn signature(&self) -> Signature {
        if self.c < 0 {
            Signature::Lorentz
        } else {
            Signature::Euclidean
        }
    }

    /// Diagonal of the model inner product.
    pub fn metric_diag(&self) -> DVector<f64> {
        let mut d = DVector::from_element(self.coords(), 1.0);
        if self.c < 0 {
            let last = d.len() - 1;
            d[last] = -1.0;
        }
        d
    }

    pub fn inner(&self, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
        let mut s = a.dot(b);
        if self.c < 0 {
            let l = a.len() - 1;
            s -= 2.0 * a[l] * b[l];
        }
        s
    }

    pub fn inner_slices(&self, a: &[f64], b: &[f64]) -> f64 {
        self.inner(&DVector::from_column_slice(a), &DVector::from_column_slice(b))
    }

    /// Deviation of `x` from the model constraint (0 for c = 0).
    pub fn constraint_residual(&self, x: &DVector<f64>) -> f64 {
        match self.c {
            0 => 0.0,
            1 => (x.dot(x) - 1.0).abs(),
            _ => {
                let r = (self.inner(x, x) + 1.0).abs();
                if x[x.len() - 1] <= 0.0 {
                    r.max(1.0)
                } else {
                    r
                }
            }
        }
    }

    /// Geodesic distance between two points of the model.
    pub fn distance(&self, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
        match self.c {
            0 => (a - b).norm(),
            1 => a.dot(b).clamp(-1.0, 1.0).acos(),
            _ => (-self.inner(a, b)).max(1.0).acosh(),
        }
    }

    pub fn label(&self) -> &'static str {
        match self.c {
            0 => "euclidean",
            1 => "sphere",
            _ => "hyperbolic",
        }
    }
}

/// Parameter domain of an immersion.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Domain {
    /// Product of unit spheres `S^{d_1} × … × S^{d_k}`; a domain point is the
    /// concatenation of unit vectors in ℝ^{d_i+1}.
    Spheres(Vec<usize>),
    /// Rectangle `Π [lo_i, hi_i]`, with wrap-around on periodic axes.
    Box { lo: Vec<f64>, hi: Vec<f64>, periodic: Vec<bool> },
}

impl Domain {
    pub fn torus(periods: &[f64]) -> Self {
        Domain::Box { lo: vec![0.0; periods.len()], hi: periods.to_vec(), periodic: vec![true; periods.len()] }
    }

    pub fn dim(&self) -> usize {
        match self {
            Domain::Spheres(d) => d.iter().sum(),
            Domain::Box { lo, .. } => lo.len(),
        }
    }

    /// Number of coordinates describing a domain point.
    pub fn point_len(&self) -> usize {
        match self {
            Domain::Spheres(d) => d.iter().map(|k| k + 1).sum(),
            Domain::Box { lo, .. } => lo.len(),
        }
    }

    /// Closed means every direction wraps (compact without boundary).
    pub fn is_closed(&self) -> bool {
        match self {
            Domain::Spheres(_) => true,
            Domain::Box { periodic, .. } => periodic.iter().all(|&p| p),
        }
    }

    pub fn validate(&self, y: &[f64]) -> Result<()> {
        if y.len() != self.point_len() {
            return arg(format!("domain point has {} coordinates, expected {}", y.len(), self.point_len()));
        }
        if let Domain::Spheres(d) = self {
            let mut off = 0;
            for &k in d {
                let nrm: f64 = y[off..off + k + 1].iter().map(|v| v * v).sum::<f64>().sqrt();
                if (nrm - 1.0).abs() > 1e-8 {
                    return Err(LabError::Domain(format!("sphere factor has norm {nrm}")));
                }
                off += k + 1;
            }
        }
        Ok(())
    }

    /// Orthonormal tangent basis of each sphere factor at `y`, as columns of
    /// a `(d+1) × d` matrix; obtained by Gram-Schmidt over the coordinate
    /// axes in ascending order.
    fn sphere_tangents(y: &[f64], dims: &[usize]) -> Vec<DMatrix<f64>> {
        let mut out = Vec::with_capacity(dims.len());
        let mut off = 0;
        for &k in dims {
            let p = DVector::from_column_slice(&y[off..off + k + 1]);
            let mut basis: Vec<DVector<f64>> = vec![p.clone()];
            for axis in 0..=k {
                if basis.len() == k + 1 {
                    break;
                }
                let mut v = DVector::zeros(k + 1);
                v[axis] = 1.0;
                for _ in 0..2 {
                    for b in &basis {
                        let d = b.dot(&v);
                        v -= b * d;
                    }
                }
                let nv = v.norm();
                if nv > 1e-3 {
                    basis.push(v / nv);
                }
            }
            out.push(DMatrix::from_columns(&basis[1..]));
            off += k + 1;
        }
        out
    }

    /// Local chart centred at the domain point `base`, evaluated at local
    /// coordinates `t` (generic so it runs on jets as well as on `f64`).
    pub fn chart<R: Real>(&self, base: &[f64], t: &[R]) -> Vec<R> {
        match self {
            Domain::Box { .. } => base.iter().zip(t).map(|(b, ti)| *ti + *b).collect(),
            Domain::Spheres(dims) => {
                let tangents = Self::sphere_tangents(base, dims);
                let mut out = Vec::with_capacity(base.len());
                let (mut off, mut toff) = (0, 0);
                for (f, &k) in dims.iter().enumerate() {
                    let mut v: Vec<R> = (0..=k)
                        .map(|i| {
                            let mut s = R::cst(base[off + i]);
                            for a in 0..k {
                                s = s + t[toff + a] * tangents[f][(i, a)];
                            }
                            s
                        })
                        .collect();
                    let nrm = v.iter().fold(R::cst(0.0), |acc, x| acc + *x * *x).sqrt();
                    for x in v.iter_mut() {
                        *x = *x / nrm;
                    }
                    out.extend(v);
                    off += k + 1;
                    toff += k;
                }
                out
            }
        }
    }

    /// Uniformly distributed random domain point.
    pub fn random_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        match self {
            Domain::Box { lo, hi, .. } => lo.iter().zip(hi).map(|(a, b)| rng.random_range(*a..*b)).collect(),
            Domain::Spheres(dims) => {
                let mut out = Vec::new();
                for &k in dims {
                    loop {
                        let v: Vec<f64> = (0..=k).map(|_| rng.random_range(-1.0..1.0)).collect();
                        let n2: f64 = v.iter().map(|x| x * x).sum();
                        if n2 > 1e-4 && n2 <= 1.0 {
                            let n = n2.sqrt();
                            out.extend(v.iter().map(|x| x / n));
                            break;
                        }
                    }
                }
                out
            }
        }
    }
}
