//! Gauss-equation curvature tensors and the Lovelock family built from
//! them, plus the contraction identity linking odd Newton tensors to
//! Lovelock curvatures.

use nalgebra::DMatrix;

use super::kronecker::{binomial, factorial, factorial_ratio, for_each_delta_term};
use super::newton::newton_tensor_oracle;
use super::sff::SecondFundamentalForm;
use crate::error::{arg, Result};

/// Dense rank-4 tensor over an n-dimensional index space.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor4 {
    pub n: usize,
    data: Vec<f64>,
}

impl Tensor4 {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n * n * n] }
    }

    #[inline]
    fn idx(&self, i: usize, j: usize, k: usize, l: usize) -> usize {
        ((i * self.n + j) * self.n + k) * self.n + l
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.data[self.idx(i, j, k, l)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, l: usize, v: f64) {
        let a = self.idx(i, j, k, l);
        self.data[a] = v;
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, k: usize, l: usize, v: f64) {
        let a = self.idx(i, j, k, l);
        self.data[a] += v;
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Riemann tensor, Ricci tensor and scalar curvature of one point.
#[derive(Clone, Debug)]
pub struct CurvatureData {
    pub c: f64,
    pub r4: Tensor4,
    pub ric: DMatrix<f64>,
    pub scalar: f64,
}

impl CurvatureData {
    /// Contracts a Riemann tensor: `R_ik = Σ_j R_ijkj`.
    pub fn from_riemann(r4: Tensor4, c: f64) -> Self {
        let n = r4.n;
        let ric = DMatrix::from_fn(n, n, |i, k| (0..n).map(|j| r4.get(i, j, k, j)).sum());
        let scalar = ric.trace();
        Self { c, r4, ric, scalar }
    }

    pub fn n(&self) -> usize {
        self.r4.n
    }
}

/// Curvature of a submanifold of the space form of curvature `c`.
pub fn gauss_curvature(h: &SecondFundamentalForm, c: f64) -> CurvatureData {
    let n = h.n();
    let hs = h.components();
    let mut r4 = Tensor4::zeros(n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let mut v = 0.0;
                    if i == k && j == l {
                        v += c;
                    }
                    if i == l && j == k {
                        v -= c;
                    }
                    for m in hs {
                        v += m[(i, k)] * m[(j, l)] - m[(i, l)] * m[(j, k)];
                    }
                    r4.set(i, j, k, l, v);
                }
            }
        }
    }
    CurvatureData::from_riemann(r4, c)
}

/// Lovelock data of order k.
#[derive(Clone, Debug)]
pub struct LovelockData {
    pub k: usize,
    /// `E^{(k)}`; identically zero when 2k + 1 > n.
    pub e: DMatrix<f64>,
    pub l: f64,
    pub p: Tensor4,
}

fn riemann_product(r4: &Tensor4, up: &[usize], lo: &[usize], factors: usize) -> f64 {
    let mut prod = 1.0;
    for q in 0..factors {
        prod *= r4.get(up[2 * q], up[2 * q + 1], lo[2 * q], lo[2 * q + 1]);
        if prod == 0.0 {
            break;
        }
    }
    prod
}

/// `E^{(k)}_{ij} = −2^{−(k+1)} Σ δ^{i_1…i_{2k} i}_{j_1…j_{2k} j} R⋯R`.
///
/// Defined for every k ≥ 0; at k = 0 the sum gives `−δ/2`.
pub fn lovelock_einstein(rd: &CurvatureData, k: usize) -> DMatrix<f64> {
    let n = rd.n();
    let mut e = DMatrix::zeros(n, n);
    for_each_delta_term(n, 2 * k + 1, |up, lo, sign| {
        let v = riemann_product(&rd.r4, up, lo, k);
        if v != 0.0 {
            e[(up[2 * k], lo[2 * k])] += sign * v;
        }
    });
    e * -(0.5f64.powi(k as i32 + 1))
}

/// `L_k = 2^{−k} Σ δ^{i_1…i_{2k}}_{j_1…j_{2k}} R⋯R`, with `L_0 = 1`.
pub fn lovelock_scalar(rd: &CurvatureData, k: usize) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let mut l = 0.0;
    for_each_delta_term(rd.n(), 2 * k, |up, lo, sign| {
        l += sign * riemann_product(&rd.r4, up, lo, k);
    });
    l * 0.5f64.powi(k as i32)
}

/// `P_{(k)}^{stlm} = 2^{−k} Σ δ^{i_1…i_{2k−2} s t}_{j_1…j_{2k−2} l m} R⋯R`.
pub fn lovelock_p(rd: &CurvatureData, k: usize) -> Tensor4 {
    let n = rd.n();
    let mut p = Tensor4::zeros(n);
    if k == 0 {
        return p;
    }
    let m = 2 * k;
    for_each_delta_term(n, m, |up, lo, sign| {
        let v = riemann_product(&rd.r4, up, lo, k - 1);
        if v != 0.0 {
            p.add(up[m - 2], up[m - 1], lo[m - 2], lo[m - 1], sign * v);
        }
    });
    let s = 0.5f64.powi(k as i32);
    for v in p.data.iter_mut() {
        *v *= s;
    }
    p
}

pub fn lovelock(rd: &CurvatureData, k: usize) -> Result<LovelockData> {
    let n = rd.n();
    if k == 0 || 2 * k > n {
        return arg(format!("Lovelock order {k} outside 1..={}", n / 2));
    }
    Ok(LovelockData {
        k,
        e: lovelock_einstein(rd, k),
        l: lovelock_scalar(rd, k),
        p: lovelock_p(rd, k),
    })
}

/// Residual of the odd-Newton contraction identity for r = 2k.
#[derive(Clone, Debug)]
pub struct ContractionResidual {
    /// `Σ_{m,α} T^α_{r−1,mj} h^α_{mi}` from the Kronecker oracle.
    pub lhs: DMatrix<f64>,
    /// The same quantity assembled from `E^{(t)}` and `L_t`.
    pub rhs: DMatrix<f64>,
    pub max_abs: f64,
}

/// Right-hand side of the contraction identity,
///
/// `(1/(2k−1)!) { (1/k)(E^{(k)} + ½L_k δ) + (−c)^k (n−1)!/(n−2k)! δ
///   + Σ_{t=1}^{k−1} (−c)^{k−t} (n−2t−1)!/(n−2k)! C(k−1,t−1)
///     ((n−2k)/t E^{(t)} + (n−2t)/(2t) L_t δ) }`.
pub fn contraction_rhs(rd: &CurvatureData, k: usize) -> Result<DMatrix<f64>> {
    let n = rd.n();
    if k == 0 || 2 * k > n {
        return arg(format!("contraction order k = {k} needs 1 <= 2k <= n = {n}"));
    }
    let c = rd.c;
    let eye = DMatrix::<f64>::identity(n, n);
    let lk = lovelock_scalar(rd, k);
    let mut acc = (lovelock_einstein(rd, k) + &eye * (0.5 * lk)) / k as f64;
    acc += &eye * ((-c).powi(k as i32) * factorial_ratio(n - 1, n - 2 * k));
    for t in 1..k {
        let coeff = (-c).powi((k - t) as i32)
            * factorial_ratio(n - 2 * t - 1, n - 2 * k)
            * binomial(k - 1, t - 1) as f64;
        if coeff == 0.0 {
            continue;
        }
        let et = lovelock_einstein(rd, t);
        let lt = lovelock_scalar(rd, t);
        acc += (et * ((n - 2 * k) as f64 / t as f64) + &eye * ((n - 2 * t) as f64 / (2 * t) as f64 * lt)) * coeff;
    }
    Ok(acc / factorial(2 * k - 1))
}

pub fn contraction_residual(h: &SecondFundamentalForm, c: f64, k: usize) -> Result<ContractionResidual> {
    let n = h.n();
    if k == 0 || 2 * k > n {
        return arg(format!("contraction order k = {k} needs 1 <= 2k <= n = {n}"));
    }
    let t = newton_tensor_oracle(h, 2 * k - 1)?;
    let comps = t.components();
    let mut lhs = DMatrix::zeros(n, n);
    for (alpha, ha) in h.components().iter().enumerate() {
        let ta = if comps.len() == 1 { comps[0] } else { comps[alpha] };
        // Σ_m T_{mj} h_{mi} = (hᵀ T)_{ij}
        lhs += ha.transpose() * ta;
    }
    let rhs = contraction_rhs(&gauss_curvature(h, c), k)?;
    let max_abs = (&lhs - &rhs).amax();
    Ok(ContractionResidual { lhs, rhs, max_abs })
}
