use nalgebra::{DMatrix, DVector};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use reilly_lab::conformal::*;
use reilly_lab::immersion::{gallery, AmbientSpace, GallerySpec, ParametricImmersion};
use reilly_lab::meshfem::{assemble, triangulate, TensorField};
use reilly_lab::LabError;

fn rng() -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(2024)
}

fn random_vec(r: &mut ChaCha8Rng, n: usize, scale: f64) -> DVector<f64> {
    DVector::from_iterator(n, (0..n).map(|_| r.random_range(-scale..scale)))
}

fn random_g(r: &mut ChaCha8Rng, n: usize, radius: f64) -> MoebiusParam {
    let v = random_vec(r, n, 1.0);
    MoebiusParam::new((v.normalize() * radius).as_slice().to_vec()).unwrap()
}

fn random_point(r: &mut ChaCha8Rng, space: AmbientSpace) -> DVector<f64> {
    let v = random_vec(r, space.dim, 1.0);
    match space.c {
        1 => {
            let mut u = random_vec(r, space.dim + 1, 1.0);
            u.normalize_mut();
            u
        }
        0 => v,
        _ => {
            let mut x = v.clone().insert_row(space.dim, 0.0);
            x[space.dim] = (1.0 + v.norm_squared()).sqrt();
            x
        }
    }
}

/// Orthonormal tangent vector at `x` built from a random direction.
fn random_tangent(r: &mut ChaCha8Rng, space: AmbientSpace, x: &DVector<f64>) -> DVector<f64> {
    let mut v = random_vec(r, space.coords(), 1.0);
    if space.c != 0 {
        let xx = space.inner(x, x);
        let p = space.inner(&v, x) / xx;
        v -= x * p;
    }
    let n = space.inner(&v, &v).sqrt();
    v / n
}

/// Geodesic through `x` with unit initial velocity `v`.
fn geodesic(space: AmbientSpace, x: &DVector<f64>, v: &DVector<f64>, t: f64) -> DVector<f64> {
    match space.c {
        1 => x * t.cos() + v * t.sin(),
        0 => x + v * t,
        _ => x * t.cosh() + v * t.sinh(),
    }
}

/// Independent evaluation of `e^{2ρ}` straight from the composition formulas.
fn factor_oracle(space: AmbientSpace, g: &MoebiusParam, x: &DVector<f64>) -> f64 {
    let gv = DVector::from_column_slice(g.g());
    let lam = 1.0 / (1.0 - gv.norm_squared()).sqrt();
    let on_sphere = |y: &DVector<f64>| 1.0 / (lam * lam * (1.0 + y.dot(&gv)).powi(2));
    let stereo = |w: &DVector<f64>| {
        let s = w.norm_squared();
        let mut y = w * (2.0 / (1.0 + s));
        y = y.insert_row(w.len(), (s - 1.0) / (1.0 + s));
        y
    };
    match space.c {
        1 => on_sphere(x),
        0 => 4.0 / (1.0 + x.norm_squared()).powi(2) * on_sphere(&stereo(x)),
        _ => {
            let n = space.dim;
            let w = x.rows(0, n) / (1.0 + x[n]);
            let s = w.norm_squared();
            (1.0 - s).powi(2) / (1.0 + s).powi(2) * on_sphere(&stereo(&w))
        }
    }
}

#[test]
fn gamma_matches_hand_evaluation() {
    let g = MoebiusParam::new(vec![0.0, 0.0, 0.5]).unwrap();
    let north = DVector::from_vec(vec![0.0, 0.0, 1.0]);
    let lam = 2.0 / 3f64.sqrt();
    let mu = (lam - 1.0) / 0.25;
    assert!((g.lambda() - lam).abs() < 1e-15 && (g.mu() - mu).abs() < 1e-14);
    let f = 0.5;
    let expected = (1.0 + (mu * f + lam) * 0.5) / (lam * (1.0 + f));
    let out = gamma_g(&north, &g).unwrap();
    assert!((out[2] - expected).abs() < 1e-15 && out[0] == 0.0 && out[1] == 0.0);

    let zero = MoebiusParam::zero(4);
    let mut r = rng();
    for _ in 0..50 {
        let x = random_point(&mut r, AmbientSpace::sphere(3));
        assert!((gamma_g(&x, &zero).unwrap() - &x).amax() < 1e-15);
        let rad = r.random_range(0.0..0.95);
        let p = random_g(&mut r, 4, rad);
        let y = gamma_g(&x, &p).unwrap();
        assert!((y.norm() - 1.0).abs() < 1e-12);
        let minus = MoebiusParam::new(p.g().iter().map(|v| -v).collect()).unwrap();
        assert!((gamma_g(&y, &minus).unwrap() - &x).amax() < 1e-10, "γ_{{−g}} inverts γ_g");
    }
}

#[test]
fn gamma_errors() {
    assert!(matches!(MoebiusParam::new(vec![1.0, 0.0]), Err(LabError::Domain(_))));
    let g = MoebiusParam::new(vec![0.0, 0.0, 0.999999]).unwrap();
    let south = DVector::from_vec(vec![0.0, 0.0, -1.0]);
    let p = MoebiusParam::new(vec![0.0, 0.0, 1.0 - 1e-16]);
    assert!(p.is_err() || matches!(gamma_g(&south, &p.unwrap()), Err(LabError::PoleProximity(_))));
    assert!(gamma_g(&south, &g).is_ok());
    assert!(matches!(gamma_g(&DVector::from_vec(vec![2.0, 0.0, 0.0]), &g), Err(LabError::Constraint(_))));
}

#[test]
fn moebius_jacobian_matches_differences() {
    let mut r = rng();
    for _ in 0..20 {
        let y = random_point(&mut r, AmbientSpace::sphere(3));
        let rad = r.random_range(0.05..0.8);
        let p = random_g(&mut r, 4, rad);
        let j = gamma_g_jacobian(y.as_slice(), &p).unwrap();
        let h = 1e-6;
        for k in 0..4 {
            let mut gp = p.g().to_vec();
            let mut gm = p.g().to_vec();
            gp[k] += h;
            gm[k] -= h;
            let fp = gamma_apply(y.as_slice(), &MoebiusParam::new(gp).unwrap()).unwrap();
            let fm = gamma_apply(y.as_slice(), &MoebiusParam::new(gm).unwrap()).unwrap();
            for i in 0..4 {
                let fd = (fp[i] - fm[i]) / (2.0 * h);
                assert!((fd - j[(i, k)]).abs() < 1e-7, "entry ({i},{k}): {fd} vs {}", j[(i, k)]);
            }
        }
    }
    // At g = 0 the Jacobian is I − y yᵀ.
    let y = DVector::from_vec(vec![0.6, 0.0, 0.8]);
    let j0 = gamma_g_jacobian(y.as_slice(), &MoebiusParam::zero(3)).unwrap();
    assert!((j0 - (DMatrix::identity(3, 3) - &y * y.transpose())).amax() < 1e-15);
}

#[test]
fn stereographic_and_poincare_round_trips() {
    let (pi0, pi0_inv) = stereo_pair();
    let origin = DVector::zeros(3);
    assert_eq!(pi0(&origin).as_slice(), &[0.0, 0.0, 0.0, -1.0]);
    let mut r = rng();
    for _ in 0..1000 {
        let x = random_vec(&mut r, 3, 3.0);
        let y = pi0(&x);
        assert!((y.norm() - 1.0).abs() < 1e-14);
        assert!((pi0_inv(&y).unwrap() - &x).amax() < 1e-12);
    }
    let (pi, pi_inv) = hyper_pair();
    let pole = DVector::from_vec(vec![0.0, 0.0, 0.0, 1.0]);
    assert_eq!(pi(&pole).unwrap().norm(), 0.0);
    for _ in 0..1000 {
        let x = random_point(&mut r, AmbientSpace::hyperbolic(3));
        let w = pi(&x).unwrap();
        assert!(w.norm() < 1.0);
        assert!((pi_inv(&w).unwrap() - &x).amax() < 1e-12 * (1.0 + x.amax()));
    }
    for &rad in &[0.3f64, 1.0, 2.5] {
        let x = DVector::from_vec(vec![rad.sinh(), 0.0, rad.cosh()]);
        assert!((pi(&x).unwrap().norm() - (rad / 2.0).tanh()).abs() < 1e-14);
    }
    assert!(matches!(pi(&DVector::from_vec(vec![1.0, 0.0, 1.0])), Err(LabError::Constraint(_))));
}

#[test]
fn conformal_factor_closed_forms() {
    let mut r = rng();
    for &c in &[1i8, 0, -1] {
        let space = AmbientSpace::new(c, 3).unwrap();
        let id = ConformalChain::identity_like(space);
        for _ in 0..30 {
            let x = random_point(&mut r, space);
            let cf = id.conformal_factor(&x).unwrap();
            let expected = match c {
                1 => 1.0,
                0 => 4.0 / (1.0 + x.norm_squared()).powi(2),
                _ => factor_oracle(space, &id.g, &x),
            };
            assert!((cf.e2rho - expected).abs() < 1e-13 * expected.max(1.0));
            let chain = ConformalChain::new(space, random_g(&mut r, 4, 0.6)).unwrap();
            let cf = chain.conformal_factor(&x).unwrap();
            let oracle = factor_oracle(space, &chain.g, &x);
            assert!((cf.e2rho - oracle).abs() < 1e-12 * oracle, "c = {c}: {} vs {oracle}", cf.e2rho);
            assert!((chain.map_point(&x).unwrap().norm() - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn chain_is_conformal_with_the_stated_factor() {
    let mut r = rng();
    let h = 1e-5;
    for &c in &[1i8, 0, -1] {
        let space = AmbientSpace::new(c, 3).unwrap();
        for _ in 0..20 {
            let chain = ConformalChain::new(space, random_g(&mut r, 4, 0.5)).unwrap();
            let x = random_point(&mut r, space);
            let cf = chain.conformal_factor(&x).unwrap();
            let u = random_tangent(&mut r, space, &x);
            let mut v = random_tangent(&mut r, space, &x);
            v -= &u * space.inner(&u, &v);
            v /= space.inner(&v, &v).sqrt();
            let push = |w: &DVector<f64>| {
                (chain.map_point(&geodesic(space, &x, w, h)).unwrap() - chain.map_point(&geodesic(space, &x, w, -h)).unwrap())
                    / (2.0 * h)
            };
            let (du, dv) = (push(&u), push(&v));
            assert!((du.norm_squared() / cf.e2rho - 1.0).abs() < 1e-8);
            assert!((dv.norm_squared() / cf.e2rho - 1.0).abs() < 1e-8);
            assert!(du.dot(&dv).abs() / cf.e2rho < 1e-8);

            // Gradient: derivative of ρ along a geodesic equals ⟨∇̄ρ, u⟩.
            let rho = |t: f64| 0.5 * factor_oracle(space, &chain.g, &geodesic(space, &x, &u, t)).ln();
            let fd = (rho(h) - rho(-h)) / (2.0 * h);
            assert!((fd - space.inner(&cf.grad, &u)).abs() < 1e-8);
            assert!(space.c == 0 || space.inner(&cf.grad, &x).abs() < 1e-12);
        }
    }
}

fn items() -> Vec<ParametricImmersion> {
    [
        GallerySpec::Sphere { n: 2, a: 0.6, codim: 1, c: 1 },
        GallerySpec::Ellipsoid { axes: vec![1.0, 0.8, 1.3] },
        GallerySpec::TorusOfRevolution { big: 2.0, small: 0.7 },
        GallerySpec::HyperbolicGeodesicSphere { r: 1.0, n: 2 },
        GallerySpec::CliffordTorus { m: 1, n: 2, a: 0.6, c: -1 },
        GallerySpec::VeroneseRp2,
    ]
    .iter()
    .map(|s| gallery(s).unwrap())
    .collect()
}

#[test]
fn pointwise_conformal_relations() {
    let mut r = rng();
    for imm in items() {
        let space = imm.ambient;
        for _ in 0..5 {
            let chain = ConformalChain::new(space, random_g(&mut r, space.dim + 1, 0.4)).unwrap();
            for y in imm.sample_points(&mut r, 4) {
                let frame_res = frame_change_residual(&imm, &chain, &y).unwrap();
                assert!(frame_res < 1e-8, "{}: metric relation {frame_res:e}", imm.name);
                let sff_res = sff_change_residual(&imm, &chain, &y).unwrap();
                assert!(sff_res < 1e-4, "{}: second fundamental form relation {sff_res:e}", imm.name);
            }
        }
    }
}

#[test]
fn trace_relation_trivial_case_and_refinement() {
    let sphere = gallery(&GallerySpec::Sphere { n: 2, a: 1.0, codim: 1, c: 1 }).unwrap();
    let mesh = triangulate(&sphere, 2).unwrap();
    let id = ConformalChain::identity_like(mesh.ambient);
    assert!(verify_trace_relation(&mesh, &id, &TensorField::Identity).unwrap() <= 1e-10);

    let mut r = rng();
    let torus = gallery(&GallerySpec::TorusOfRevolution { big: 2.0, small: 0.7 }).unwrap();
    let cases = [(sphere, 1usize..=4), (torus, 4usize..=7)];
    for (imm, levels) in cases {
        let chain = ConformalChain::new(imm.ambient, random_g(&mut r, imm.ambient.dim + 1, 0.4)).unwrap();
        let res: Vec<f64> = levels
            .map(|l| verify_trace_relation(&triangulate(&imm, l).unwrap(), &chain, &TensorField::Identity).unwrap())
            .collect();
        for w in res.windows(2) {
            assert!(w[0] / w[1] >= 3.0, "{}: residuals {res:?}", imm.name);
        }
    }
}

#[test]
fn trace_relation_rejects_non_identity_on_surfaces() {
    let imm = gallery(&GallerySpec::Sphere { n: 2, a: 1.0, codim: 1, c: 0 }).unwrap();
    let mesh = triangulate(&imm, 1).unwrap();
    let chain = ConformalChain::identity_like(mesh.ambient);
    let field = TensorField::Identity.scaled(2.0, mesh.vertex_count());
    assert!(matches!(verify_trace_relation(&mesh, &chain, &field), Err(LabError::Unsupported(_))));
}

#[test]
fn ricci_change_on_surfaces_converges() {
    let mut r = rng();
    let imm = gallery(&GallerySpec::Ellipsoid { axes: vec![1.0, 1.0, 1.3] }).unwrap();
    let chain = ConformalChain::new(imm.ambient, random_g(&mut r, 4, 0.4)).unwrap();
    let res: Vec<f64> = (1..=4).map(|l| verify_gauss_change(&imm, &chain, l).unwrap()).collect();
    for w in res.windows(2) {
        assert!(w[0] / w[1] >= 3.0, "residuals {res:?}");
    }
    assert!(res[3] < 1e-2);
}

#[test]
fn radial_derivatives_on_geodesic_spheres() {
    for &(c, r) in &[(1i8, 0.4), (1, 1.2), (0, 0.5), (0, 2.0), (-1, 0.7), (-1, 1.5)] {
        let chk = radial_check(c, 3, r).unwrap();
        assert!((chk.computed - chk.expected).abs() < 1e-10, "{chk:?}");
        assert!(chk.phi0.abs() < 1e-12, "{chk:?}");
    }
    assert!(radial_check(1, 3, 2.0).is_err());
}

fn icosphere_measure(level: usize) -> PointMeasure {
    let imm = gallery(&GallerySpec::Sphere { n: 2, a: 1.0, codim: 1, c: 0 }).unwrap();
    let mesh = triangulate(&imm, level).unwrap();
    let sys = assemble(&mesh, &TensorField::Identity, None).unwrap();
    let weights = sys.m.mul_vec(&vec![1.0; mesh.vertex_count()]);
    PointMeasure::new(AmbientSpace::sphere(2), mesh.vertices.clone(), weights).unwrap()
}

#[test]
fn balancing_symmetric_and_shifted_measures() {
    let base = icosphere_measure(3);
    let res = balance(&base).unwrap();
    assert!(res.converged && res.g.norm() <= 1e-9);

    let gstar = MoebiusParam::new(vec![0.2, -0.3, 0.5]).unwrap();
    let shifted = PointMeasure::new(
        base.space,
        base.points.iter().map(|x| gamma_g(x, &gstar).unwrap()).collect(),
        base.weights.clone(),
    )
    .unwrap();
    let res = balance(&shifted).unwrap().require_converged().unwrap();
    assert!(res.residual <= 1e-8 * shifted.mass());
    assert!(res.iterations <= 100);
    for (a, b) in res.g.g().iter().zip(gstar.g()) {
        assert!((a + b).abs() < 1e-6, "recovered {:?}", res.g);
    }
    let mut csv = Vec::new();
    res.write_csv(&mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    assert!(text.starts_with("iteration,residual,gnorm,step\n"));
    assert_eq!(text.lines().count(), res.history.len() + 1);

    // Rotating the measure rotates the recovered parameter.
    let rot = nalgebra::Rotation3::from_euler_angles(0.3, -0.7, 1.1);
    let rotated = PointMeasure::new(
        base.space,
        shifted.points.iter().map(|x| DVector::from_column_slice((rot * nalgebra::Vector3::new(x[0], x[1], x[2])).as_slice())).collect(),
        base.weights.clone(),
    )
    .unwrap();
    let rres = balance(&rotated).unwrap().require_converged().unwrap();
    let expected = rot * nalgebra::Vector3::from_column_slice(res.g.g());
    for i in 0..3 {
        assert!((rres.g.g()[i] - expected[i]).abs() < 1e-6);
    }
}

#[test]
fn balancing_antipodal_pair_and_flat_measures() {
    let pair = PointMeasure::new(
        AmbientSpace::sphere(2),
        vec![DVector::from_vec(vec![0.0, 0.6, 0.8]), DVector::from_vec(vec![0.0, -0.6, -0.8])],
        vec![1.0, 1.0],
    )
    .unwrap();
    let res = balance(&pair).unwrap();
    assert!(res.converged && res.g.norm() == 0.0);

    // A flat measure balanced through the stereographic chain.
    let imm = gallery(&GallerySpec::TorusOfRevolution { big: 2.0, small: 0.7 }).unwrap();
    let mesh = triangulate(&imm, 5).unwrap();
    let sys = assemble(&mesh, &TensorField::Identity, None).unwrap();
    let weights = sys.m.mul_vec(&vec![1.0; mesh.vertex_count()]);
    let m = PointMeasure::new(AmbientSpace::euclidean(3), mesh.vertices.clone(), weights).unwrap();
    let res = balance(&m).unwrap().require_converged().unwrap();
    let mut center = DVector::zeros(4);
    for (x, w) in m.points.iter().zip(&m.weights) {
        center += res.chain.map_point(x).unwrap() * *w;
    }
    assert!(center.amax() <= 1e-8 * m.mass());
    assert!(PointMeasure::new(AmbientSpace::sphere(2), vec![DVector::from_vec(vec![0.0, 0.0, 1.0]); 3], vec![1.0; 3]).is_err());
}
