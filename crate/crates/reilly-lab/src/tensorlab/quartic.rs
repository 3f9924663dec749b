use crate::error::{LabError, Result};

/// Minimum of `f(x) = 3x₁ + x₂ + x₃ + x₄` over
/// `K_{a,b} = {Σx_i = a, Σ_{i<j} x_i x_j = b}` with its minimizer.
#[derive(Clone, Debug, PartialEq)]
pub struct QuarticMinimum {
    pub min: f64,
    pub witness: [f64; 4],
}

fn check(a: f64, b: f64) -> Result<f64> {
    let disc = 9.0 * a * a - 24.0 * b;
    if !(a > 0.0 && b > 0.0) || disc.is_nan() || disc <= 0.0 {
        return Err(LabError::Domain(format!(
            "K_(a,b) empty or degenerate for a = {a}, b = {b} (need a, b > 0 and 9a^2 > 24b)"
        )));
    }
    Ok(disc)
}

/// Closed-form minimum `(3a − √(9a² − 24b))/2`, attained at
/// `x = (s, t, t, t)` with `6t² − 3at + b = 0` and `s = a − 3t`.
pub fn quartic_minimum(a: f64, b: f64) -> Result<QuarticMinimum> {
    let disc = check(a, b)?;
    let root = disc.sqrt();
    let t = (3.0 * a + root) / 12.0;
    let s = a - 3.0 * t;
    Ok(QuarticMinimum { min: (3.0 * a - root) / 2.0, witness: [s, t, t, t] })
}

/// `f` at a point.
pub fn quartic_objective(x: &[f64; 4]) -> f64 {
    3.0 * x[0] + x[1] + x[2] + x[3]
}

/// Brute-force minimum of `f` over `K_{a,b}` by dense sampling plus local
/// descent, independent of the closed form.
///
/// `K_{a,b}` is the round 2-sphere cut from `|x|² = a² − 2b` by the
/// hyperplane `Σx = a`; it is sampled through a Fibonacci lattice on the
/// unit sphere of the hyperplane's orthogonal complement coordinates, and
/// the best sample is refined by Riemannian gradient descent with a
/// finite-difference gradient.
pub fn quartic_minimum_brute_force(a: f64, b: f64, samples: usize) -> Result<(f64, [f64; 4])> {
    check(a, b)?;
    let center = [a / 4.0; 4];
    let radius = (a * a - 2.0 * b - a * a / 4.0).sqrt();
    let s2 = 2f64.sqrt();
    let s6 = 6f64.sqrt();
    let s12 = 12f64.sqrt();
    let basis = [
        [1.0 / s2, -1.0 / s2, 0.0, 0.0],
        [1.0 / s6, 1.0 / s6, -2.0 / s6, 0.0],
        [1.0 / s12, 1.0 / s12, 1.0 / s12, -3.0 / s12],
    ];
    let point = |u: &[f64; 3]| -> [f64; 4] {
        let mut x = center;
        for (k, bk) in basis.iter().enumerate() {
            for i in 0..4 {
                x[i] += radius * u[k] * bk[i];
            }
        }
        x
    };
    let value = |u: &[f64; 3]| quartic_objective(&point(u));

    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    let m = samples.max(1);
    let mut best = (f64::INFINITY, [0.0, 0.0, 1.0]);
    for q in 0..m {
        let z = 1.0 - 2.0 * (q as f64 + 0.5) / m as f64;
        let rho = (1.0 - z * z).max(0.0).sqrt();
        let phi = golden * q as f64;
        let u = [rho * phi.cos(), rho * phi.sin(), z];
        let v = value(&u);
        if v < best.0 {
            best = (v, u);
        }
    }

    let mut u = best.1;
    let mut fu = best.0;
    let mut step = 1.0 / (m as f64).sqrt();
    let hfd = 1e-6;
    for _ in 0..10_000 {
        let mut grad = [0.0; 3];
        for k in 0..3 {
            let mut up = u;
            let mut dn = u;
            up[k] += hfd;
            dn[k] -= hfd;
            grad[k] = (value(&up) - value(&dn)) / (2.0 * hfd);
        }
        let radial: f64 = (0..3).map(|k| grad[k] * u[k]).sum();
        let tangential: [f64; 3] = std::array::from_fn(|k| grad[k] - radial * u[k]);
        let tnorm = tangential.iter().map(|v| v * v).sum::<f64>().sqrt();
        if tnorm < 1e-14 || step < 1e-15 {
            break;
        }
        let mut trial: [f64; 3] = std::array::from_fn(|k| u[k] - step * tangential[k] / tnorm);
        let tn = trial.iter().map(|v| v * v).sum::<f64>().sqrt();
        trial.iter_mut().for_each(|v| *v /= tn);
        let ft = value(&trial);
        if ft < fu {
            u = trial;
            fu = ft;
            step *= 1.2;
        } else {
            step *= 0.5;
        }
    }
    Ok((fu, point(&u)))
}
