//! Seeded random inputs for the identity suites.

use nalgebra::DMatrix;
use rand::{Rng, RngExt};

use super::curvature::{gauss_curvature, CurvatureData};
use super::sff::SecondFundamentalForm;

/// Random symmetric second fundamental form normalized to unit Frobenius
/// norm.
pub fn random_sff<R: Rng + ?Sized>(rng: &mut R, n: usize, p: usize) -> SecondFundamentalForm {
    let mut comps = Vec::with_capacity(p);
    for _ in 0..p {
        let mut m = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v: f64 = rng.random_range(-1.0..1.0);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        comps.push(m);
    }
    let sff = SecondFundamentalForm::new(comps).expect("well-formed random form");
    let norm = sff.squared_norm().sqrt();
    sff.scaled(1.0 / norm)
}

/// Random algebraic curvature tensor, obtained through the Gauss equation
/// of a random form so that every Riemann symmetry holds.
pub fn random_curvature<R: Rng + ?Sized>(rng: &mut R, n: usize, p: usize, c: f64) -> CurvatureData {
    gauss_curvature(&random_sff(rng, n, p), c)
}

/// Random principal curvatures with positive second mean curvature.
pub fn random_positive_h2<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    loop {
        let k: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..2.0)).collect();
        let s1: f64 = k.iter().sum();
        let s2: f64 = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).map(|(i, j)| k[i] * k[j]).sum();
        if s2 > 1e-3 && s1 > 0.0 {
            return k;
        }
    }
}
