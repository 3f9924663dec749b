//! Evaluates both sides of the eigenvalue bound on the classical equality
//! cases and on a strict ellipsoid case.

use reilly_lab::immersion::{gallery, GallerySpec};
use reilly_lab::reilly::{check_inequality, mean_curvature_report, OperatorSpec, Resolution};

fn main() -> reilly_lab::Result<()> {
    let level: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(4);
    let fem = Resolution::Fem { level };
    let closed = Resolution::ClosedForm { samples: 64 };
    let cases = [
        (GallerySpec::Sphere { n: 2, a: 1.0, codim: 1, c: 0 }, OperatorSpec::identity(0), fem),
        (GallerySpec::Ellipsoid { axes: vec![1.0, 1.0, 1.3] }, OperatorSpec::identity(0), fem),
        (GallerySpec::VeroneseRp2, OperatorSpec::identity(0), fem),
        (GallerySpec::HyperbolicGeodesicSphere { r: 1.0, n: 2 }, OperatorSpec::identity(-1), fem),
        (GallerySpec::CliffordTorus { m: 2, n: 4, a: 0.5f64.sqrt(), c: 0 }, OperatorSpec::newton(2, 0), closed),
    ];
    for (g, spec, res) in cases {
        let imm = gallery(&g)?;
        let r = check_inequality(&imm, &spec, res)?;
        println!(
            "{:<45} {:<10} lambda2 {:.6} rhs {:.6} gap {:+.3e} radius {:?} takahashi {:.3e} tmin {:.3e} disc {:?} [{}]",
            r.name, r.operator, r.lambda2, r.rhs, r.gap, r.equality.radius_estimate, r.equality.takahashi_residual,
            r.equality.tminimal_residual, r.discretization.as_ref().map(|d| d.estimate), r.backend
        );
    }
    let imm = gallery(&GallerySpec::Sphere { n: 4, a: 0.8, codim: 2, c: 0 })?;
    let r = mean_curvature_report(&imm, closed)?;
    println!("{} lambda2 {:.12} rhs {:.12} gap {:+.3e} crosscheck {:?}", r.name, r.lambda2, r.rhs, r.gap, r.rhs_crosscheck);
    Ok(())
}
