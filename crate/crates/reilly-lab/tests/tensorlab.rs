use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use reilly_lab::tensorlab::sample::{random_curvature, random_positive_h2, random_sff};
use reilly_lab::tensorlab::*;

fn all_tuples(n: usize, len: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|t| (0..n).map(move |i| {
                let mut u = t.clone();
                u.push(i);
                u
            }))
            .collect();
    }
    out
}

fn fact(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

fn delta(up: &[usize], lo: &[usize]) -> f64 {
    gen_kronecker(up, lo).unwrap() as f64
}

/// Elementary symmetric polynomials from the coefficients of Π(1 + k_i x).
fn elementary(k: &[f64]) -> Vec<f64> {
    let mut e = vec![1.0];
    for &ki in k {
        let mut next = vec![0.0; e.len() + 1];
        for (d, &c) in e.iter().enumerate() {
            next[d] += c;
            next[d + 1] += c * ki;
        }
        e = next;
    }
    e
}

fn rel(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).amax() / (1.0 + b.amax())
}

/// Clifford torus S^m(a) × S^(n−m)(√(1−a²)) ⊂ S^(n+1)(1) ⊂ ℝ^(n+2): the
/// first normal is the inward radial direction, the second the normal
/// inside the unit sphere.
fn clifford_form(m: usize, n: usize, a2: f64) -> SecondFundamentalForm {
    let a = a2.sqrt();
    let b = (1.0 - a2).sqrt();
    let radial = DMatrix::identity(n, n);
    let inner = DMatrix::from_fn(n, n, |i, j| if i != j { 0.0 } else if i < m { -b / a } else { a / b });
    SecondFundamentalForm::new(vec![radial, inner]).unwrap()
}

#[test]
fn kronecker_examples() {
    assert_eq!(gen_kronecker(&[0], &[0]).unwrap(), 1);
    assert_eq!(gen_kronecker(&[0, 1], &[1, 0]).unwrap(), -1);
    assert_eq!(gen_kronecker(&[0, 1], &[0, 2]).unwrap(), 0);
    assert_eq!(gen_kronecker(&[0, 0], &[0, 0]).unwrap(), 0);
    assert!(gen_kronecker(&[0, 1], &[0]).is_err());
    let s: i32 = (0..4).map(|i2| gen_kronecker(&[0, i2], &[0, i2]).unwrap()).sum();
    assert_eq!(s, 3);
}

#[test]
fn kronecker_antisymmetry_exhaustive() {
    for n in 1..=5 {
        for l in 2..=4.min(n) {
            for up in all_tuples(n, l) {
                for lo in all_tuples(n, l) {
                    let d = delta(&up, &lo);
                    for t in 0..l {
                        for s in t + 1..l {
                            let mut sw = up.clone();
                            sw.swap(t, s);
                            assert_eq!(delta(&sw, &lo), -d);
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn kronecker_contraction_exhaustive() {
    for n in 1..=5 {
        for l in 1..=4.min(n) {
            for t in 0..=l {
                let factor = fact(n - t) / fact(n - l);
                for up in all_tuples(n, t) {
                    for lo in all_tuples(n, t) {
                        let mut sum = 0.0;
                        for tail in all_tuples(n, l - t) {
                            let u: Vec<usize> = up.iter().chain(tail.iter()).copied().collect();
                            let w: Vec<usize> = lo.iter().chain(tail.iter()).copied().collect();
                            sum += delta(&u, &w);
                        }
                        let expect = if t == 0 { factor } else { factor * delta(&up, &lo) };
                        assert_eq!(sum, expect, "n={n} l={l} t={t}");
                    }
                }
            }
        }
    }
}

#[test]
fn kronecker_laplace_expansion_exhaustive() {
    for n in 1..=5 {
        for l in 2..=4.min(n) {
            for up in all_tuples(n, l) {
                for lo in all_tuples(n, l) {
                    let mut rhs = delta(&up[l - 1..], &lo[l - 1..]) * delta(&up[..l - 1], &lo[..l - 1]);
                    for t in 0..l - 1 {
                        let mut lower = lo[..l - 1].to_vec();
                        lower[t] = lo[l - 1];
                        rhs -= delta(&up[l - 1..], &lo[t..t + 1]) * delta(&up[..l - 1], &lower);
                    }
                    assert_eq!(delta(&up, &lo), rhs);
                }
            }
        }
    }
}

#[test]
fn t0_is_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let h = random_sff(&mut rng, 4, 2);
    assert_eq!(newton_tensor(&h, 0).unwrap().matrix().unwrap(), &DMatrix::identity(4, 4));
    assert_eq!(newton_tensor_oracle(&h, 0).unwrap().matrix().unwrap(), &DMatrix::identity(4, 4));
}

#[test]
fn umbilic_t2_example() {
    let h = SecondFundamentalForm::from_principal(&[1.0; 4]).unwrap();
    let t2 = newton_tensor(&h, 2).unwrap();
    let oracle = newton_tensor_oracle(&h, 2).unwrap();
    assert!(rel(t2.matrix().unwrap(), &(DMatrix::identity(4, 4) * 3.0)) < 1e-14);
    assert!(rel(oracle.matrix().unwrap(), &(DMatrix::identity(4, 4) * 3.0)) < 1e-14);
    let prof = mean_profile(&h).unwrap();
    assert!((prof.s_r(2).unwrap() - 6.0).abs() < 1e-14);
    assert!((t2.matrix().unwrap().trace() - 12.0).abs() < 1e-13);
}

#[test]
fn recursion_matches_kronecker_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for n in 2..=6 {
        for p in 1..=3 {
            for _ in 0..3 {
                let h = random_sff(&mut rng, n, p);
                for r in 0..=n {
                    let fast = newton_tensor(&h, r).unwrap();
                    let slow = newton_tensor_oracle(&h, r).unwrap();
                    assert_eq!(fast.is_even(), slow.is_even());
                    for (a, b) in fast.components().iter().zip(slow.components()) {
                        assert!(rel(a, b) < 1e-12, "n={n} p={p} r={r}: {}", rel(a, b));
                        assert!((*a - a.transpose()).amax() < 1e-12);
                    }
                }
            }
        }
    }
}

#[test]
fn odd_order_with_higher_codimension_is_vector_valued() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let h = random_sff(&mut rng, 4, 2);
    let t = newton_tensor(&h, 1).unwrap();
    assert!(!t.is_even());
    assert!(t.matrix().is_err());
    let h1 = random_sff(&mut rng, 4, 1);
    assert!(newton_tensor(&h1, 3).unwrap().is_even());
}

#[test]
fn trace_identities() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for n in 2..=6 {
        for p in 1..=3 {
            let h = random_sff(&mut rng, n, p);
            let (ts, ss) = newton_sequence(&h, n).unwrap();
            for r in 0..=n {
                match (&ts[r].payload, &ss[r]) {
                    (NewtonPayload::Even(t), SValue::Scalar(s)) => {
                        assert!((t.trace() - (n - r) as f64 * s).abs() < 1e-12);
                    }
                    (NewtonPayload::Odd(ta), SValue::Vector(_)) => {
                        let prev = ts[r - 1].matrix().unwrap();
                        for (alpha, m) in ta.iter().enumerate() {
                            let pair = prev.component_mul(h.component(alpha)).sum();
                            let expect = (n - r) as f64 / r as f64 * pair;
                            assert!((m.trace() - expect).abs() < 1e-12);
                        }
                    }
                    _ => panic!("payload / mean curvature parity mismatch"),
                }
            }
        }
    }
}

#[test]
fn hypersurface_mean_curvatures_are_elementary_symmetric() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for n in 2..=6 {
        let h = random_sff(&mut rng, n, 1);
        let k = h.principal_curvatures().unwrap();
        let e = elementary(&k);
        let prof = mean_profile(&h).unwrap();
        for r in 0..=n {
            assert!((prof.s_r(r).unwrap() - e[r]).abs() < 1e-12, "n={n} r={r}");
            let binom = binomial(n, r) as f64;
            assert!((prof.h_r(r).unwrap() * binom - prof.s_r(r).unwrap()).abs() < 1e-14);
        }
        assert!((prof.s_r(1).unwrap() - n as f64 * prof.h[0]).abs() < 1e-14);
        let h1 = prof.h_r(1).unwrap();
        assert!(h1 * h1 >= prof.h_r(2).unwrap() - 1e-14, "Newton-Maclaurin");
    }
}

#[test]
fn round_sphere_profile() {
    let (n, a) = (4usize, 0.7f64);
    let h = SecondFundamentalForm::from_principal(&vec![1.0 / a; n]).unwrap();
    let prof = mean_profile(&h).unwrap();
    for r in 0..=n {
        let k_r = a.powi(-(r as i32));
        assert!((prof.s_r(r).unwrap() - binomial(n, r) as f64 * k_r).abs() < 1e-12);
        assert!((prof.h_r(r).unwrap() - k_r).abs() < 1e-12);
    }
}

#[test]
fn totally_geodesic_profile() {
    let h = SecondFundamentalForm::zeros(3, 2).unwrap();
    let prof = mean_profile(&h).unwrap();
    assert_eq!(prof.h_len, 0.0);
    assert!(prof.tau2.is_none());
    for r in 1..=3 {
        assert!(prof.s_vector(r).unwrap().amax() == 0.0);
    }
    assert!(matches!(mean_curvature_tensor(&h), Err(reilly_lab::LabError::DegenerateNormal(_))));
}

#[test]
fn h_t_equals_scaled_next_mean_curvature() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for n in 2..=6 {
        for p in 1..=3 {
            let h = random_sff(&mut rng, n, p);
            let prof = mean_profile(&h).unwrap();
            let (ts, _) = newton_sequence(&h, n).unwrap();
            for r in (0..n).filter(|r| p == 1 || r % 2 == 0) {
                let ht = h_t(ts[r].matrix().unwrap(), &h).unwrap();
                let expect = prof.s_vector(r + 1).unwrap() * (r + 1) as f64;
                assert!((ht - expect).amax() < 1e-12);
            }
            let ht0 = h_t(&DMatrix::identity(n, n), &h).unwrap();
            assert!((ht0 - &prof.h * n as f64).amax() < 1e-14);
        }
    }
}

#[test]
fn clifford_torus_newton_tensor() {
    let h = clifford_form(2, 4, 0.5);
    let t2 = newton_tensor(&h, 2).unwrap();
    assert!(rel(t2.matrix().unwrap(), &(DMatrix::identity(4, 4) * 2.0)) < 1e-14);
    let ht = h_t(t2.matrix().unwrap(), &h).unwrap();
    // along the normal inside the unit sphere the component is 3 S_3' = 0
    assert!(ht[1].abs() < 1e-14);
    assert!((ht[0] - 8.0).abs() < 1e-13);

    let h = clifford_form(2, 4, 1.0 / 3.0);
    let t2 = newton_tensor(&h, 2).unwrap();
    let expect = DMatrix::from_diagonal(&DVector::from_vec(vec![1.5, 1.5, 3.0, 3.0]));
    assert!(rel(t2.matrix().unwrap(), &expect) < 1e-13);
}

#[test]
fn clifford_principal_curvatures_and_ricci() {
    for &(m, n, a2) in &[(2usize, 4usize, 0.5f64), (1, 3, 0.3), (2, 5, 0.6)] {
        let a = a2.sqrt();
        let b = (1.0 - a2).sqrt();
        let h = clifford_form(m, n, a2);
        let inner = SecondFundamentalForm::new(vec![h.component(1).clone()]).unwrap();
        let k = inner.principal_curvatures().unwrap();
        for (i, ki) in k.iter().enumerate() {
            let expect = if i < m { -b / a } else { a / b };
            assert!((ki - expect).abs() < 1e-12);
        }
        let ric_flat = gauss_curvature(&h, 0.0).ric;
        let ric_sphere = gauss_curvature(&inner, 1.0).ric;
        for i in 0..n {
            let expect = if i < m { (m as f64 - 1.0) / a2 } else { (n - m) as f64 - 1.0 } / if i < m { 1.0 } else { 1.0 - a2 };
            assert!((ric_flat[(i, i)] - expect).abs() < 1e-12);
            assert!((ric_sphere[(i, i)] - expect).abs() < 1e-12);
        }
    }
}

#[test]
fn gauss_curvature_identities() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let h0 = SecondFundamentalForm::zeros(4, 2).unwrap();
    let flat = gauss_curvature(&h0, 1.0);
    for i in 0..4 {
        for j in 0..4 {
            let e = if i == j { 0.0 } else { 1.0 };
            assert_eq!(flat.r4.get(i, j, i, j), e);
        }
    }
    for c in [-1.0, 0.0, 1.0] {
        for n in 2..=6 {
            for p in 1..=3 {
                let h = random_sff(&mut rng, n, p);
                let cd = gauss_curvature(&h, c);
                let hv = h.mean_vector();
                let expect = (n * (n - 1)) as f64 * c + (n * n) as f64 * hv.norm_squared() - h.squared_norm();
                assert!((cd.scalar - expect).abs() < 1e-12);
                for i in 0..n {
                    for j in 0..n {
                        for k in 0..n {
                            for l in 0..n {
                                let v = cd.r4.get(i, j, k, l);
                                assert!((v + cd.r4.get(j, i, k, l)).abs() < 1e-14);
                                assert!((v + cd.r4.get(i, j, l, k)).abs() < 1e-14);
                                assert!((v - cd.r4.get(k, l, i, j)).abs() < 1e-14);
                            }
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn lovelock_first_order_is_einstein() {
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    for n in 2..=6 {
        let cd = random_curvature(&mut rng, n, 2, 1.0);
        let ll = lovelock(&cd, 1).unwrap();
        let einstein = &cd.ric - DMatrix::identity(n, n) * (cd.scalar / 2.0);
        if n > 2 {
            assert!((ll.e - einstein).amax() < 1e-12);
        }
        assert!((ll.l - cd.scalar).abs() < 1e-12);
    }
    let cd = random_curvature(&mut rng, 4, 1, 0.0);
    assert!(lovelock(&cd, 0).is_err());
    assert!(lovelock(&cd, 3).is_err());
}

#[test]
fn lovelock_relations() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for n in 2..=6 {
        for k in 1..=n / 2 {
            let cd = random_curvature(&mut rng, n, 2, 0.5);
            let ll = lovelock(&cd, k).unwrap();
            let p = &ll.p;
            for i in 0..n {
                for j in 0..n {
                    for m in 0..n {
                        for l in 0..n {
                            let v = p.get(i, j, m, l);
                            assert!((v + p.get(j, i, m, l)).abs() < 1e-12);
                            assert!((v + p.get(i, j, l, m)).abs() < 1e-12);
                            assert!((v - p.get(m, l, i, j)).abs() < 1e-12);
                        }
                    }
                }
            }
            let e_prev = lovelock_einstein(&cd, k - 1);
            let mut pr = DMatrix::zeros(n, n);
            let mut l_from_p = 0.0;
            for i in 0..n {
                for j in 0..n {
                    let trace: f64 = (0..n).map(|s| p.get(s, i, s, j)).sum();
                    assert!((trace + (n + 1 - 2 * k) as f64 * e_prev[(i, j)]).abs() < 1e-10);
                    for s in 0..n {
                        for t in 0..n {
                            pr[(i, j)] += (0..n).map(|l| p.get(s, t, l, i) * cd.r4.get(s, t, l, j)).sum::<f64>();
                            l_from_p += p.get(s, t, i, j) * cd.r4.get(s, t, i, j);
                        }
                    }
                }
            }
            let e_expect = -(DMatrix::identity(n, n) * (0.5 * ll.l) - pr * k as f64);
            assert!((&ll.e - e_expect).amax() < 1e-10, "n={n} k={k}");
            assert!((l_from_p - ll.l).abs() < 1e-10);
            if 2 * k < n {
                assert!((ll.e.trace() + (n - 2 * k) as f64 / 2.0 * ll.l).abs() < 1e-10);
            }
        }
    }
}

#[test]
fn zeroth_lovelock_tensor_from_the_kronecker_definition() {
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    let cd = random_curvature(&mut rng, 4, 1, 0.0);
    assert!((lovelock_einstein(&cd, 0) + DMatrix::identity(4, 4) * 0.5).amax() < 1e-15);
}

#[test]
fn contraction_identity_first_order_is_ricci() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for c in [-1.0, 0.0, 1.0] {
        for n in 2..=6 {
            for p in 1..=3 {
                let h = random_sff(&mut rng, n, p);
                let res = contraction_residual(&h, c, 1).unwrap();
                let ric = gauss_curvature(&h, c).ric;
                let expect = ric - DMatrix::identity(n, n) * ((n - 1) as f64 * c);
                assert!((&res.lhs - &expect).amax() < 1e-12);
                assert!(res.max_abs < 1e-10);
            }
        }
    }
}

#[test]
fn contraction_identity_second_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(37);
    for c in [-1.0, 0.0, 1.0] {
        for n in 4..=6 {
            for p in 1..=3 {
                let h = random_sff(&mut rng, n, p);
                let res = contraction_residual(&h, c, 2).unwrap();
                assert!(res.max_abs < 1e-10, "c={c} n={n} p={p}: {}", res.max_abs);
            }
        }
    }
    let h = random_sff(&mut rng, 6, 2);
    assert!(contraction_residual(&h, 1.0, 3).unwrap().max_abs < 1e-10);
    let zero = SecondFundamentalForm::zeros(4, 1).unwrap();
    assert_eq!(contraction_residual(&zero, 0.0, 2).unwrap().max_abs, 0.0);
}

#[test]
fn mean_curvature_tensor_examples() {
    let k = 0.8;
    let h = SecondFundamentalForm::new(vec![DMatrix::identity(4, 4) * k, DMatrix::zeros(4, 4)]).unwrap();
    let mct = mean_curvature_tensor(&h).unwrap();
    assert!((&mct.t - DMatrix::identity(4, 4) * (3.0 * k)).amax() < 1e-14);
    assert!((mct.trace - 12.0 * mct.h).abs() < 1e-13);

    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for _ in 0..200 {
        let h = random_sff(&mut rng, 5, 3);
        if let Ok(m) = mean_curvature_tensor(&h) {
            assert!((m.trace - 20.0 * m.h).abs() < 1e-12);
            assert!(m.tau2_consistent(&h));
        }
    }
}

trait TauCheck {
    fn tau2_consistent(&self, h: &SecondFundamentalForm) -> bool;
}

impl TauCheck for MeanCurvatureTensor {
    fn tau2_consistent(&self, h: &SecondFundamentalForm) -> bool {
        let prof = mean_profile(h).unwrap();
        let lead = self.principal.component(0).norm_squared();
        (prof.tau2.unwrap() + lead - h.squared_norm()).abs() < 1e-12
    }
}

#[test]
fn positivity_with_positive_second_mean_curvature() {
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    for _ in 0..1000 {
        let k = random_positive_h2(&mut rng, 4);
        let h = SecondFundamentalForm::from_principal(&k).unwrap();
        let m = mean_curvature_tensor(&h).unwrap();
        let hmean = m.h;
        let mut ks = k.clone();
        ks.sort_by(f64::total_cmp);
        assert!(ks.iter().all(|ki| 4.0 * hmean > ki.abs()));
        assert!(m.t_min > 0.0);
        assert!(m.tprime_min > 0.0);
        assert!((m.tprime_min - (4.0 * hmean + 2.0 * ks[0])).abs() < 1e-12);
        let a: f64 = ks.iter().sum();
        let b = (a * a - ks.iter().map(|v| v * v).sum::<f64>()) / 2.0;
        let bound = quartic_minimum(a, b).unwrap().min;
        assert!(3.0 * ks[0] + ks[1] + ks[2] + ks[3] >= bound - 1e-12);
    }
}

#[test]
fn quartic_minimum_examples() {
    let r = quartic_minimum(4.0, 1.0).unwrap();
    assert!((r.min - (12.0 - 120f64.sqrt()) / 2.0).abs() < 1e-14);
    assert!((r.min - 0.5227).abs() < 1e-4);
    let r = quartic_minimum(4.0, 6.0 - 1e-12).unwrap();
    assert!((r.min - 6.0).abs() < 1e-5);
    assert!(quartic_minimum(4.0, 6.0).is_err());
    assert!(quartic_minimum(-1.0, 0.1).is_err());

    let w = quartic_minimum(3.0, 1.2).unwrap();
    let x = w.witness;
    assert!((x.iter().sum::<f64>() - 3.0).abs() < 1e-13);
    let b: f64 = (0..4).flat_map(|i| (i + 1..4).map(move |j| (i, j))).map(|(i, j)| x[i] * x[j]).sum();
    assert!((b - 1.2).abs() < 1e-13);
    assert!((quartic_objective(&x) - w.min).abs() < 1e-13);

    let (bf, pt) = quartic_minimum_brute_force(4.0, 1.0, 100_000).unwrap();
    assert!((bf - r_min(4.0, 1.0)).abs() < 1e-6);
    assert!((pt.iter().sum::<f64>() - 4.0).abs() < 1e-12);
}

fn r_min(a: f64, b: f64) -> f64 {
    (3.0 * a - (9.0 * a * a - 24.0 * b).sqrt()) / 2.0
}
