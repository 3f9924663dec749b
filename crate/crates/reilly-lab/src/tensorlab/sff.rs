use nalgebra::{DMatrix, DVector};

use crate::error::{arg, LabError, Result};

/// Second fundamental form at one point: `h[α]` is the symmetric n×n
/// matrix `h^α_{ij}` with respect to orthonormal tangent and normal frames.
#[derive(Clone, Debug, PartialEq)]
pub struct SecondFundamentalForm {
    n: usize,
    h: Vec<DMatrix<f64>>,
}

impl SecondFundamentalForm {
    pub fn new(h: Vec<DMatrix<f64>>) -> Result<Self> {
        let Some(first) = h.first() else {
            return arg("second fundamental form needs p >= 1 normal components");
        };
        let n = first.nrows();
        if n < 2 {
            return arg(format!("intrinsic dimension {n} < 2"));
        }
        let scale = h.iter().map(|m| m.amax()).fold(1.0, f64::max);
        let mut out = Vec::with_capacity(h.len());
        for (alpha, m) in h.into_iter().enumerate() {
            if m.nrows() != n || m.ncols() != n {
                return arg(format!("component {alpha} is not {n}x{n}"));
            }
            if (&m - m.transpose()).amax() > 1e-10 * scale {
                return arg(format!("component {alpha} is not symmetric"));
            }
            out.push((&m + m.transpose()) * 0.5);
        }
        Ok(Self { n, h: out })
    }

    /// Hypersurface form `diag(k_1, …, k_n)`.
    pub fn from_principal(k: &[f64]) -> Result<Self> {
        Self::new(vec![DMatrix::from_diagonal(&DVector::from_column_slice(k))])
    }

    pub fn zeros(n: usize, p: usize) -> Result<Self> {
        Self::new(vec![DMatrix::zeros(n, n); p.max(1)])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.h.len()
    }

    pub fn components(&self) -> &[DMatrix<f64>] {
        &self.h
    }

    pub fn component(&self, alpha: usize) -> &DMatrix<f64> {
        &self.h[alpha]
    }

    /// `Σ_α Σ_ij (h^α_ij)²`.
    pub fn squared_norm(&self) -> f64 {
        self.h.iter().map(|m| m.norm_squared()).sum()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { n: self.n, h: self.h.iter().map(|m| m * s).collect() }
    }

    /// Mean curvature vector components `H^α = tr(h^α)/n`.
    pub fn mean_vector(&self) -> DVector<f64> {
        DVector::from_iterator(self.p(), self.h.iter().map(|m| m.trace() / self.n as f64))
    }

    /// Shape operator along a unit normal given by its components in the
    /// normal frame.
    pub fn along(&self, nu: &DVector<f64>) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.n, self.n);
        for (alpha, m) in self.h.iter().enumerate() {
            a += m * nu[alpha];
        }
        a
    }

    /// Principal curvatures of a hypersurface form, ascending.
    pub fn principal_curvatures(&self) -> Result<Vec<f64>> {
        if self.p() != 1 {
            return Err(LabError::Unsupported("principal curvatures need p = 1".into()));
        }
        Ok(sorted_eigenvalues(&self.h[0]))
    }

    /// Rotates the normal frame so that the first normal is `H/|H|`; the
    /// remaining normals complete it by Gram-Schmidt over the standard axes
    /// taken in ascending order.
    pub fn principal_frame(&self) -> Result<Self> {
        let hv = self.mean_vector();
        let len = hv.norm();
        let scale = self.squared_norm().sqrt().max(f64::MIN_POSITIVE);
        if len <= 1e-14 * scale || len == 0.0 {
            return Err(LabError::DegenerateNormal("|H| = 0, principal normal undefined".into()));
        }
        let basis = complete_basis(&(hv / len));
        let h = basis.iter().map(|nu| self.along(nu)).collect();
        Ok(Self { n: self.n, h })
    }
}

/// Orthonormal basis of ℝ^p whose first vector is `first`, completed by
/// Gram-Schmidt over the coordinate axes in ascending order.
pub(crate) fn complete_basis(first: &DVector<f64>) -> Vec<DVector<f64>> {
    let p = first.len();
    let mut basis = vec![first.clone()];
    for axis in 0..p {
        if basis.len() == p {
            break;
        }
        let mut v = DVector::zeros(p);
        v[axis] = 1.0;
        for _ in 0..2 {
            for b in &basis {
                let d = b.dot(&v);
                v -= b * d;
            }
        }
        let nv = v.norm();
        if nv > 1e-6 {
            basis.push(v / nv);
        }
    }
    basis
}

pub(crate) fn sorted_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let mut ev: Vec<f64> = m.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

pub(crate) fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    sorted_eigenvalues(m)[0]
}
