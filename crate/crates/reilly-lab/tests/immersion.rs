use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use reilly_lab::immersion::*;
use reilly_lab::tensorlab::{gauss_curvature, SecondFundamentalForm};
use reilly_lab::LabError;

fn all_items() -> Vec<ParametricImmersion> {
    let specs = vec![
        GallerySpec::Sphere { n: 2, a: 1.0, codim: 1, c: 0 },
        GallerySpec::Sphere { n: 2, a: 0.6, codim: 1, c: 1 },
        GallerySpec::Sphere { n: 3, a: 1.5, codim: 2, c: 0 },
        GallerySpec::Sphere { n: 4, a: 0.8, codim: 1, c: 1 },
        GallerySpec::HyperbolicGeodesicSphere { r: 1.0, n: 2 },
        GallerySpec::CliffordTorus { m: 2, n: 4, a: 0.5f64.sqrt(), c: 0 },
        GallerySpec::CliffordTorus { m: 1, n: 2, a: 0.6, c: -1 },
        GallerySpec::VeroneseRp2,
        GallerySpec::Ellipsoid { axes: vec![1.0, 1.0, 1.3] },
        GallerySpec::FlatTorus { lengths: vec![1.0, 1.5] },
        GallerySpec::TorusOfRevolution { big: 2.0, small: 0.7 },
    ];
    specs.iter().map(|s| gallery(s).unwrap()).collect()
}

fn rng() -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(11)
}

#[test]
fn unit_sphere_has_identity_second_fundamental_form() {
    let imm = gallery(&GallerySpec::Sphere { n: 2, a: 1.0, codim: 1, c: 0 }).unwrap();
    for y in imm.sample_points(&mut rng(), 20) {
        let f = imm.frame_at(&y).unwrap();
        let h = f.h.component(0);
        assert!((h - DMatrix::<f64>::identity(2, 2)).amax() < 1e-13);
        let nu = f.normal.column(0).into_owned();
        let x = DVector::from_column_slice(&y);
        assert!((nu + x).amax() < 1e-13, "stored normal points inward");
    }
}

struct Paraboloid;
impl GenericMap for Paraboloid {
    fn apply<R: Real>(&self, u: &[R]) -> reilly_lab::Result<Vec<R>> {
        Ok(vec![u[0], u[1], (u[0] * u[0] + u[1] * u[1]) * 0.5])
    }
}

#[test]
fn graph_of_quadratic_has_identity_at_origin() {
    let domain = Domain::Box { lo: vec![-1.0, -1.0], hi: vec![1.0, 1.0], periodic: vec![false, false] };
    let analytic = ParametricImmersion::new(
        "paraboloid",
        AmbientSpace::euclidean(3),
        domain.clone(),
        Arc::new(Analytic(Paraboloid)),
        Derivatives::Analytic,
    )
    .unwrap();
    let f = analytic.frame_at(&[0.0, 0.0]).unwrap();
    assert!((f.h.component(0) - DMatrix::<f64>::identity(2, 2)).amax() < 1e-14);
    let fd = ParametricImmersion::new(
        "paraboloid-fd",
        AmbientSpace::euclidean(3),
        domain,
        Arc::new(FnMap(|u: &[f64]| Ok(vec![u[0], u[1], 0.5 * (u[0] * u[0] + u[1] * u[1])]))),
        Derivatives::FiniteDifference { scale: 1.0 },
    )
    .unwrap();
    let g = fd.frame_at(&[0.0, 0.0]).unwrap();
    assert!((g.h.component(0) - DMatrix::<f64>::identity(2, 2)).amax() < 1e-6);
}

#[test]
fn clifford_torus_principal_curvatures_in_the_unit_sphere() {
    for a in [0.5f64.sqrt(), 0.4, 0.8] {
        let imm = gallery(&GallerySpec::CliffordTorus { m: 2, n: 4, a, c: 0 }).unwrap();
        let b = (1.0 - a * a).sqrt();
        let want = imm.reference.principal_curvatures.clone().unwrap();
        for y in imm.sample_points(&mut rng(), 10) {
            let f = imm.frame_at(&y).unwrap();
            let mut nu = DVector::zeros(6);
            for i in 0..3 {
                nu[i] = b * y[i];
                nu[3 + i] = -a * y[3 + i];
            }
            let comps = f.normal_components(&nu);
            assert!((comps.norm() - 1.0).abs() < 1e-12);
            let shape = f.h.along(&comps);
            let mut ev: Vec<f64> = shape.symmetric_eigen().eigenvalues.iter().copied().collect();
            ev.sort_by(f64::total_cmp);
            for (u, v) in ev.iter().zip(&want) {
                assert!((u - v).abs() < 1e-12, "{ev:?} vs {want:?}");
            }
            assert!((want[0] + b / a).abs() < 1e-15);
        }
    }
}

#[test]
fn structure_equation_and_orthonormality_on_gallery() {
    for imm in all_items() {
        for y in imm.sample_points(&mut rng(), 12) {
            let f = imm.frame_at(&y).unwrap();
            assert!(f.orthonormality_residual() < 1e-12, "{}: {}", imm.name, f.orthonormality_residual());
            assert!(f.structure_residual() < 1e-10, "{}: {}", imm.name, f.structure_residual());
        }
        let fd = imm.clone().with_derivatives(Derivatives::FiniteDifference { scale: 1.0 });
        for y in imm.sample_points(&mut rng(), 6) {
            let fa = imm.frame_at(&y).unwrap();
            let ff = fd.frame_at(&y).unwrap();
            assert!(ff.structure_residual() < 1e-6, "{}: fd {}", imm.name, ff.structure_residual());
            assert!(
                (fa.h.squared_norm() - ff.h.squared_norm()).abs() < 1e-6 * (1.0 + fa.h.squared_norm()),
                "{}: |h|² analytic {} fd {}",
                imm.name,
                fa.h.squared_norm(),
                ff.h.squared_norm()
            );
        }
    }
}

#[test]
fn constraint_violation_and_rank_deficiency_are_typed_errors() {
    let bad = ParametricImmersion::new(
        "off-sphere",
        AmbientSpace::sphere(3),
        Domain::Spheres(vec![2]),
        Arc::new(FnMap(|y: &[f64]| Ok(vec![2.0 * y[0], 2.0 * y[1], 2.0 * y[2], 0.0]))),
        Derivatives::FiniteDifference { scale: 1.0 },
    )
    .unwrap();
    assert!(matches!(bad.frame_at(&[0.0, 0.0, 1.0]), Err(LabError::InvalidImmersion(_))));
    let flat = ParametricImmersion::new(
        "collapsed",
        AmbientSpace::euclidean(3),
        Domain::torus(&[1.0, 1.0]),
        Arc::new(FnMap(|u: &[f64]| Ok(vec![u[0], 0.0, 0.0]))),
        Derivatives::FiniteDifference { scale: 1.0 },
    )
    .unwrap();
    assert!(matches!(flat.frame_at(&[0.2, 0.3]), Err(LabError::SingularChart(_))));
    assert!(gallery(&GallerySpec::CliffordTorus { m: 2, n: 4, a: 1.2, c: 0 }).is_err());
    assert!(gallery_by_name("no_such_item", &serde_json::json!({})).is_err());
    let t = gallery_by_name("clifford_torus", &serde_json::json!({"m": 2, "n": 4, "a": 0.5})).unwrap();
    assert_eq!(t.n(), 4);
}

/// Induced metric in the chart centred at `y`, at chart point `t`.
fn metric(imm: &ParametricImmersion, y: &[f64], t: &[f64]) -> DMatrix<f64> {
    let ld = imm.derivatives_in_chart(y, t).unwrap();
    let md = imm.ambient.metric_diag();
    let g = DMatrix::from_fn(ld.dx.nrows(), ld.dx.ncols(), |a, i| ld.dx[(a, i)] * md[a]);
    ld.dx.transpose() * g
}

fn christoffel(imm: &ParametricImmersion, y: &[f64], t: &[f64], h: f64) -> Vec<f64> {
    let n = t.len();
    let g = metric(imm, y, t);
    let gi = g.clone().try_inverse().unwrap();
    let dg: Vec<DMatrix<f64>> = (0..n)
        .map(|k| {
            let (mut tp, mut tm) = (t.to_vec(), t.to_vec());
            tp[k] += h;
            tm[k] -= h;
            (metric(imm, y, &tp) - metric(imm, y, &tm)) / (2.0 * h)
        })
        .collect();
    let mut gam = vec![0.0; n * n * n];
    for l in 0..n {
        for i in 0..n {
            for j in 0..n {
                let mut s = 0.0;
                for m in 0..n {
                    s += 0.5 * gi[(l, m)] * (dg[i][(m, j)] + dg[j][(m, i)] - dg[m][(i, j)]);
                }
                gam[(l * n + i) * n + j] = s;
            }
        }
    }
    gam
}

/// Gaussian curvature of a surface from its induced metric alone.
fn intrinsic_gauss(imm: &ParametricImmersion, y: &[f64]) -> f64 {
    let h = 1e-3;
    let n = 2;
    let t0 = [0.0, 0.0];
    let gam = christoffel(imm, y, &t0, h);
    let dgam: Vec<Vec<f64>> = (0..n)
        .map(|k| {
            let (mut tp, mut tm) = (t0.to_vec(), t0.to_vec());
            tp[k] += h;
            tm[k] -= h;
            let a = christoffel(imm, y, &tp, h);
            let b = christoffel(imm, y, &tm, h);
            a.iter().zip(&b).map(|(p, q)| (p - q) / (2.0 * h)).collect()
        })
        .collect();
    let idx = |l: usize, i: usize, j: usize| (l * n + i) * n + j;
    let (i, j, k) = (1, 0, 1);
    let mut r = [0.0; 2];
    for l in 0..n {
        let mut s = dgam[j][idx(l, k, i)] - dgam[k][idx(l, j, i)];
        for m in 0..n {
            s += gam[idx(l, j, m)] * gam[idx(m, k, i)] - gam[idx(l, k, m)] * gam[idx(m, j, i)];
        }
        r[l] = s;
    }
    let g = metric(imm, y, &t0);
    (g[(0, 0)] * r[0] + g[(0, 1)] * r[1]) / g.determinant()
}

#[test]
fn gauss_equation_matches_intrinsic_curvature() {
    for imm in all_items().into_iter().filter(|i| i.n() == 2) {
        for y in imm.sample_points(&mut rng(), 5) {
            let f = imm.frame_at(&y).unwrap();
            let cd = gauss_curvature(&f.h, f.c);
            let k_ext = cd.r4.get(0, 1, 0, 1);
            let k_int = intrinsic_gauss(&imm, &y);
            assert!((k_ext - k_int).abs() < 1e-4, "{}: extrinsic {k_ext} intrinsic {k_int}", imm.name);
        }
    }
}

fn shape_in_chart(imm: &ParametricImmersion, y: &[f64], t: &[f64]) -> DMatrix<f64> {
    let ld = imm.derivatives_in_chart(y, t).unwrap();
    let n = t.len();
    let dd = ld.ddx.clone();
    let f = imm.frame_from(ld).unwrap();
    let nu = f.normal.column(0).into_owned();
    DMatrix::from_fn(n, n, |i, j| imm.ambient.inner(&dd[i * n + j], &nu))
}

#[test]
fn codazzi_symmetry_for_hypersurfaces() {
    let h = 1e-4;
    for imm in all_items().into_iter().filter(|i| i.codim() == 1) {
        let n = imm.n();
        for y in imm.sample_points(&mut rng(), 4) {
            let t0 = vec![0.0; n];
            let b = shape_in_chart(&imm, &y, &t0);
            let gam = christoffel(&imm, &y, &t0, 1e-4);
            let db: Vec<DMatrix<f64>> = (0..n)
                .map(|k| {
                    let (mut tp, mut tm) = (t0.clone(), t0.clone());
                    tp[k] += h;
                    tm[k] -= h;
                    (shape_in_chart(&imm, &y, &tp) - shape_in_chart(&imm, &y, &tm)) / (2.0 * h)
                })
                .collect();
            let cov = |i: usize, j: usize, k: usize| {
                let mut s = db[k][(i, j)];
                for l in 0..n {
                    s -= gam[(l * n + k) * n + i] * b[(l, j)] + gam[(l * n + k) * n + j] * b[(i, l)];
                }
                s
            };
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        let r = (cov(i, j, k) - cov(i, k, j)).abs();
                        assert!(r < 1e-4, "{}: codazzi residual {r}", imm.name);
                    }
                }
            }
        }
    }
}

#[test]
fn veronese_is_minimal_in_its_sphere_with_round_metric() {
    let imm = gallery(&GallerySpec::VeroneseRp2).unwrap();
    for y in imm.sample_points(&mut rng(), 10) {
        let f = imm.frame_at(&y).unwrap();
        assert!((f.position.norm_squared() - 1.0 / 3.0).abs() < 1e-14);
        let ld = imm.derivatives_at(&y).unwrap();
        let g = ld.dx.transpose() * &ld.dx;
        assert!((g - DMatrix::<f64>::identity(2, 2)).amax() < 1e-13);
        let want = -&f.position * 3.0;
        assert!((&f.hvec - want).amax() < 1e-12);
    }
}

#[test]
fn pushforward_by_identity_keeps_frames() {
    let imm = gallery(&GallerySpec::Ellipsoid { axes: vec![1.0, 1.2, 0.8] }).unwrap();
    let push = pushforward_under_map(&imm, Arc::new(Analytic(Identity)), imm.ambient).unwrap();
    assert_eq!(push.derivatives, Derivatives::Analytic);
    for y in imm.sample_points(&mut rng(), 5) {
        let a = imm.frame_at(&y).unwrap();
        let b = push.frame_at(&y).unwrap();
        assert!((a.tangent - b.tangent).amax() < 1e-15);
        assert!((a.h.component(0) - b.h.component(0)).amax() < 1e-15);
    }
}

#[test]
fn reference_records() {
    let s = gallery(&GallerySpec::Sphere { n: 2, a: 1.0, codim: 1, c: 0 }).unwrap();
    assert_eq!(s.reference.get("lambda2_laplace"), Some(2.0));
    let v = gallery(&GallerySpec::VeroneseRp2).unwrap();
    assert_eq!(v.reference.get("lambda2_laplace"), Some(6.0));
    let t = gallery(&GallerySpec::CliffordTorus { m: 2, n: 4, a: 0.5f64.sqrt(), c: 0 }).unwrap();
    assert!((t.reference.get("lambda2_newton2").unwrap() - 8.0).abs() < 1e-12);
    assert!((t.reference.get("t").unwrap() - 2.0).abs() < 1e-12);
    let hs = gallery(&GallerySpec::HyperbolicGeodesicSphere { r: 1.0, n: 2 }).unwrap();
    assert!((hs.reference.get("geodesic_radius").unwrap() - 1.0).abs() < 1e-15);
    let k = hs.reference.principal_curvatures.clone().unwrap();
    assert!((k[0] - 1.0 / 1f64.tanh()).abs() < 1e-12);
    let h = hs.frame_at(&[0.0, 0.0, 1.0]).unwrap();
    let _ = SecondFundamentalForm::from_principal(&k).unwrap();
    assert!((h.h.component(0)[(0, 0)] - k[0]).abs() < 1e-12);
}
