use nalgebra::{DMatrix, DVector};

use super::kronecker::{factorial, for_each_delta_term};
use super::sff::SecondFundamentalForm;
use crate::error::{arg, LabError, Result};

/// Payload of a Newton transformation. Even orders (and every order when
/// p = 1) are ordinary symmetric matrices; odd orders with p > 1 carry one
/// matrix per normal direction.
#[derive(Clone, Debug, PartialEq)]
pub enum NewtonPayload {
    Even(DMatrix<f64>),
    Odd(Vec<DMatrix<f64>>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct NewtonTensor {
    pub r: usize,
    pub payload: NewtonPayload,
}

impl NewtonTensor {
    pub fn is_even(&self) -> bool {
        matches!(self.payload, NewtonPayload::Even(_))
    }

    /// Matrix payload, or an unsupported-configuration error for the
    /// normal-vector-valued odd orders.
    pub fn matrix(&self) -> Result<&DMatrix<f64>> {
        match &self.payload {
            NewtonPayload::Even(m) => Ok(m),
            NewtonPayload::Odd(_) => Err(LabError::Unsupported(format!(
                "T_{} is normal-vector valued when p > 1",
                self.r
            ))),
        }
    }

    /// Component matrices indexed by α; an even payload is returned as a
    /// single component.
    pub fn components(&self) -> Vec<&DMatrix<f64>> {
        match &self.payload {
            NewtonPayload::Even(m) => vec![m],
            NewtonPayload::Odd(v) => v.iter().collect(),
        }
    }

    pub fn trace(&self) -> DVector<f64> {
        match &self.payload {
            NewtonPayload::Even(m) => DVector::from_element(1, m.trace()),
            NewtonPayload::Odd(v) => DVector::from_iterator(v.len(), v.iter().map(|m| m.trace())),
        }
    }
}

/// Mean-curvature value `S_r`: a scalar for even r (or p = 1), otherwise a
/// normal vector.
#[derive(Clone, Debug, PartialEq)]
pub enum SValue {
    Scalar(f64),
    Vector(DVector<f64>),
}

impl SValue {
    pub fn scalar(&self) -> Option<f64> {
        match self {
            SValue::Scalar(s) => Some(*s),
            SValue::Vector(_) => None,
        }
    }

    pub fn as_vector(&self) -> DVector<f64> {
        match self {
            SValue::Scalar(s) => DVector::from_element(1, *s),
            SValue::Vector(v) => v.clone(),
        }
    }
}

fn pairing(t: &DMatrix<f64>, h: &DMatrix<f64>) -> f64 {
    t.component_mul(h).sum()
}

fn uses_scalar_chain(h: &SecondFundamentalForm, r: usize) -> bool {
    h.p() == 1 || r % 2 == 0
}

/// Newton tensors `T_0, …, T_rmax` and mean curvatures `S_0, …, S_rmax`.
///
/// Even orders (and all orders when p = 1) follow the recursion
/// `T_r = S_r I − Σ_α h^α T^α_{r−1}`. Odd orders with p > 1 are summed
/// from mixed Newton tensors of the components.
pub fn newton_sequence(
    h: &SecondFundamentalForm,
    rmax: usize,
) -> Result<(Vec<NewtonTensor>, Vec<SValue>)> {
    let n = h.n();
    if rmax > n {
        return arg(format!("order {rmax} exceeds dimension {n}"));
    }
    let eye = DMatrix::<f64>::identity(n, n);
    let mut ts = vec![NewtonTensor { r: 0, payload: NewtonPayload::Even(eye.clone()) }];
    let mut ss = vec![SValue::Scalar(1.0)];
    for r in 1..=rmax {
        let prev = &ts[r - 1];
        let (t, s) = if uses_scalar_chain(h, r) {
            let comps = prev.components();
            let mut s = 0.0;
            let mut acc = DMatrix::zeros(n, n);
            for (alpha, ha) in h.components().iter().enumerate() {
                let tp = if comps.len() == 1 { comps[0] } else { comps[alpha] };
                s += pairing(tp, ha);
                acc += ha * tp;
            }
            s /= r as f64;
            (NewtonPayload::Even(&eye * s - acc), SValue::Scalar(s))
        } else {
            let mut sv = DVector::zeros(h.p());
            let mut comps = Vec::with_capacity(h.p());
            for (alpha, ha) in h.components().iter().enumerate() {
                let t = odd_component(h, r, ha);
                sv[alpha] = pairing(ts[r - 1].matrix()?, ha) / r as f64;
                comps.push(t);
            }
            (NewtonPayload::Odd(comps), SValue::Vector(sv))
        };
        ts.push(NewtonTensor { r, payload: t });
        ss.push(s);
    }
    Ok((ts, ss))
}

/// Mixed Newton tensor `(1/r!) Σ δ^{I i}_{J j} Π_a M^a_{i_a j_a}` of the
/// matrices `ms`, by the subset recursion
/// `F(S) = σ(S) I − |S|⁻¹ Σ_{m∈S} M_m F(S∖m)`,
/// `σ(S) = |S|⁻² Σ_{m∈S} tr(M_m F(S∖m))`.
fn mixed_newton(ms: &[&DMatrix<f64>], n: usize) -> DMatrix<f64> {
    let r = ms.len();
    let mut table: Vec<DMatrix<f64>> = Vec::with_capacity(1 << r);
    table.push(DMatrix::identity(n, n));
    for mask in 1usize..(1 << r) {
        let size = mask.count_ones() as f64;
        let mut sigma = 0.0;
        let mut acc = DMatrix::zeros(n, n);
        for (m, mm) in ms.iter().enumerate() {
            if mask & (1 << m) == 0 {
                continue;
            }
            let prod = *mm * &table[mask & !(1 << m)];
            sigma += prod.trace();
            acc += prod;
        }
        table.push(DMatrix::identity(n, n) * (sigma / (size * size)) - acc / size);
    }
    table.pop().expect("table holds 2^r entries")
}

/// Odd-order component `T^α_r = Σ_{β_1…β_q} F(A^{β_1}, A^{β_1}, …, A^{β_q}, A^{β_q}, A^α)`.
fn odd_component(h: &SecondFundamentalForm, r: usize, ha: &DMatrix<f64>) -> DMatrix<f64> {
    let n = h.n();
    let q = r / 2;
    let hs = h.components();
    let p = hs.len();
    let mut acc = DMatrix::zeros(n, n);
    let mut betas = vec![0usize; q];
    loop {
        let mut ms: Vec<&DMatrix<f64>> = Vec::with_capacity(r);
        for &b in &betas {
            ms.push(&hs[b]);
            ms.push(&hs[b]);
        }
        ms.push(ha);
        acc += mixed_newton(&ms, n);
        let mut pos = 0;
        loop {
            if pos == q {
                return acc;
            }
            betas[pos] += 1;
            if betas[pos] < p {
                break;
            }
            betas[pos] = 0;
            pos += 1;
        }
    }
}

/// Newton tensor `T_r` by the recursion (production path).
pub fn newton_tensor(h: &SecondFundamentalForm, r: usize) -> Result<NewtonTensor> {
    let (mut ts, _) = newton_sequence(h, r)?;
    Ok(ts.pop().expect("sequence holds r+1 entries"))
}

/// Newton tensor `T_r` straight from its generalized-Kronecker definition.
pub fn newton_tensor_oracle(h: &SecondFundamentalForm, r: usize) -> Result<NewtonTensor> {
    let n = h.n();
    if r > n {
        return arg(format!("order {r} exceeds dimension {n}"));
    }
    if r == 0 {
        return Ok(NewtonTensor { r, payload: NewtonPayload::Even(DMatrix::identity(n, n)) });
    }
    let hs = h.components();
    let inner = |a: usize, b: usize, c: usize, d: usize| -> f64 {
        hs.iter().map(|m| m[(a, b)] * m[(c, d)]).sum()
    };
    let norm = 1.0 / factorial(r);
    let pairs = r / 2;
    let scalar = uses_scalar_chain(h, r);
    let ncomp = if scalar { 1 } else { h.p() };
    let mut out = vec![DMatrix::<f64>::zeros(n, n); ncomp];
    for_each_delta_term(n, r + 1, |up, lo, sign| {
        let mut prod = sign;
        for q in 0..pairs {
            prod *= if h.p() == 1 {
                hs[0][(up[2 * q], lo[2 * q])] * hs[0][(up[2 * q + 1], lo[2 * q + 1])]
            } else {
                inner(up[2 * q], lo[2 * q], up[2 * q + 1], lo[2 * q + 1])
            };
            if prod == 0.0 {
                return;
            }
        }
        let (i, j) = (up[r], lo[r]);
        if r % 2 == 0 {
            out[0][(i, j)] += prod;
        } else if scalar {
            out[0][(i, j)] += prod * hs[0][(up[r - 1], lo[r - 1])];
        } else {
            for (alpha, m) in hs.iter().enumerate() {
                out[alpha][(i, j)] += prod * m[(up[r - 1], lo[r - 1])];
            }
        }
    });
    for m in &mut out {
        *m *= norm;
    }
    let payload = if scalar {
        NewtonPayload::Even(out.pop().unwrap())
    } else {
        NewtonPayload::Odd(out)
    };
    Ok(NewtonTensor { r, payload })
}

/// `H_T^α = Σ_ij h^α_ij T_ij`.
pub fn h_t(t: &DMatrix<f64>, h: &SecondFundamentalForm) -> Result<DVector<f64>> {
    if t.nrows() != h.n() || t.ncols() != h.n() {
        return arg(format!("T is {}x{}, expected {}x{}", t.nrows(), t.ncols(), h.n(), h.n()));
    }
    Ok(DVector::from_iterator(h.p(), h.components().iter().map(|m| pairing(t, m))))
}
