//! Seeded random-instance identity suites over unit-Frobenius second
//! fundamental forms.

use nalgebra::DMatrix;
use rand::{Rng, RngExt};
use serde::{Deserialize, Serialize};

use super::curvature::{contraction_residual, gauss_curvature, lovelock, lovelock_einstein, CurvatureData};
use super::newton::{h_t, newton_sequence, newton_tensor_oracle, NewtonPayload, SValue};
use super::profile::mean_profile;
use super::sample::random_sff;
use super::sff::SecondFundamentalForm;
use crate::error::Result;

pub const ALGEBRAIC_TOLERANCE: f64 = 1e-10;

/// Largest residual of one identity over a batch of instances.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityRow {
    pub identity: String,
    pub kind: String,
    pub instances: usize,
    pub max_residual: f64,
    pub tolerance: f64,
}

impl IdentityRow {
    pub fn new(identity: &str, kind: &str, tolerance: f64) -> Self {
        IdentityRow { identity: identity.into(), kind: kind.into(), instances: 0, max_residual: 0.0, tolerance }
    }

    pub fn record(&mut self, residual: f64) {
        self.instances += 1;
        self.max_residual = if residual.is_nan() || self.max_residual.is_nan() {
            f64::NAN
        } else {
            self.max_residual.max(residual)
        };
    }

    pub fn passed(&self) -> bool {
        self.max_residual <= self.tolerance
    }
}

fn trace_residual(h: &SecondFundamentalForm) -> Result<f64> {
    let n = h.n();
    let (ts, ss) = newton_sequence(h, n)?;
    let mut worst: f64 = 0.0;
    for r in 0..=n {
        match (&ts[r].payload, &ss[r]) {
            (NewtonPayload::Even(t), SValue::Scalar(s)) => {
                worst = worst.max((t.trace() - (n - r) as f64 * s).abs());
            }
            (NewtonPayload::Odd(ta), SValue::Vector(_)) => {
                let prev = ts[r - 1].matrix()?;
                for (alpha, m) in ta.iter().enumerate() {
                    let pair = prev.component_mul(h.component(alpha)).sum();
                    worst = worst.max((m.trace() - (n - r) as f64 / r as f64 * pair).abs());
                }
            }
            _ => return Ok(f64::INFINITY),
        }
    }
    Ok(worst)
}

fn recursion_residual(h: &SecondFundamentalForm) -> Result<f64> {
    let (ts, _) = newton_sequence(h, h.n())?;
    let mut worst: f64 = 0.0;
    for (r, t) in ts.iter().enumerate() {
        let oracle = newton_tensor_oracle(h, r)?;
        for (a, b) in t.components().iter().zip(oracle.components()) {
            worst = worst.max((*a - b).amax());
        }
    }
    Ok(worst)
}

fn lovelock_residual(cd: &CurvatureData) -> Result<f64> {
    let n = cd.n();
    let mut worst: f64 = 0.0;
    for k in 1..=n / 2 {
        let ll = lovelock(cd, k)?;
        let p = &ll.p;
        let e_prev = lovelock_einstein(cd, k - 1);
        let mut pr = DMatrix::zeros(n, n);
        let mut l_from_p = 0.0;
        for i in 0..n {
            for j in 0..n {
                let trace: f64 = (0..n).map(|s| p.get(s, i, s, j)).sum();
                let scale = 1f64.max(e_prev.norm());
                worst = worst.max((trace + (n + 1 - 2 * k) as f64 * e_prev[(i, j)]).abs() / scale);
                for s in 0..n {
                    for t in 0..n {
                        pr[(i, j)] += (0..n).map(|l| p.get(s, t, l, i) * cd.r4.get(s, t, l, j)).sum::<f64>();
                        l_from_p += p.get(s, t, i, j) * cd.r4.get(s, t, i, j);
                    }
                }
            }
        }
        let e_expect = pr * k as f64 - DMatrix::identity(n, n) * (0.5 * ll.l);
        let scale = 1f64.max(ll.e.norm()).max(e_prev.norm()).max(ll.l.abs());
        worst = worst.max((&ll.e - e_expect).amax() / scale).max((l_from_p - ll.l).abs() / scale);
    }
    Ok(worst)
}

fn gauss_scalar_residual(h: &SecondFundamentalForm, c: f64) -> f64 {
    let n = h.n() as f64;
    let cd = gauss_curvature(h, c);
    let expect = n * (n - 1.0) * c + n * n * h.mean_vector().norm_squared() - h.squared_norm();
    let ric_trace = cd.ric.trace();
    (cd.scalar - expect).abs().max((ric_trace - cd.scalar).abs())
}

fn ht_residual(h: &SecondFundamentalForm) -> Result<f64> {
    let n = h.n();
    let prof = mean_profile(h)?;
    let (ts, _) = newton_sequence(h, n)?;
    let mut worst: f64 = 0.0;
    for r in (0..n).filter(|r| h.p() == 1 || r % 2 == 0) {
        let ht = h_t(ts[r].matrix()?, h)?;
        let Some(sv) = prof.s_vector(r + 1) else { return Ok(f64::INFINITY) };
        let expect = sv * (r + 1) as f64;
        worst = worst.max((ht - expect).amax());
    }
    Ok(worst)
}

/// Runs every algebraic identity on `count` random instances drawn from
/// `rng` (dimension 2..=6, codimension 1..=3, curvature in {−1, 0, 1}).
/// The second-order contraction draws its own instance with `n ∈ {4,5,6}`.
pub fn algebraic_suite<R: Rng + ?Sized>(rng: &mut R, count: usize) -> Result<Vec<IdentityRow>> {
    if count == 0 {
        return Ok(Vec::new());
    }
    let tol = ALGEBRAIC_TOLERANCE;
    let mut rows = vec![
        IdentityRow::new("newton_traces", "algebraic", tol),
        IdentityRow::new("newton_recursion_vs_kronecker", "algebraic", tol),
        IdentityRow::new("lovelock_relations", "algebraic", tol),
        IdentityRow::new("contraction_k1_ricci", "algebraic", tol),
        IdentityRow::new("contraction_k2", "algebraic", tol),
        IdentityRow::new("gauss_scalar", "algebraic", tol),
        IdentityRow::new("h_t_newton", "algebraic", tol),
    ];
    for _ in 0..count {
        let n = rng.random_range(2..=6usize);
        let p = rng.random_range(1..=3usize);
        let c = f64::from(rng.random_range(-1..=1i32));
        let h = random_sff(rng, n, p);
        rows[0].record(trace_residual(&h)?);
        rows[1].record(recursion_residual(&h)?);
        let cd = gauss_curvature(&h, c);
        rows[2].record(lovelock_residual(&cd)?);
        let k1 = contraction_residual(&h, c, 1)?;
        let ricci = &cd.ric - DMatrix::identity(n, n) * ((n - 1) as f64 * c);
        rows[3].record(k1.max_abs.max((&k1.lhs - ricci).amax()));
        let n4 = rng.random_range(4..=6usize);
        let h4 = random_sff(rng, n4, p);
        rows[4].record(contraction_residual(&h4, c, 2)?.max_abs);
        rows[5].record(gauss_scalar_residual(&h, c));
        rows[6].record(ht_residual(&h)?);
    }
    Ok(rows)
}
