//! Balancing a Möbius-shifted icosphere measure: the recovered parameter
//! undoes the shift.

use reilly_lab::conformal::{balance, gamma_g, MoebiusParam, PointMeasure};
use reilly_lab::immersion::{gallery, AmbientSpace, GallerySpec};
use reilly_lab::meshfem::{assemble, triangulate, TensorField};

fn main() -> reilly_lab::Result<()> {
    let imm = gallery(&GallerySpec::Sphere { n: 2, a: 1.0, codim: 1, c: 0 })?;
    let mesh = triangulate(&imm, 3)?;
    let sys = assemble(&mesh, &TensorField::Identity, None)?;
    let w = sys.m.mul_vec(&vec![1.0; mesh.vertex_count()]);
    let base = PointMeasure::new(AmbientSpace::sphere(2), mesh.vertices.clone(), w.clone())?;
    let centred = balance(&base)?;
    println!("centred measure: |g| = {:.3e}, residual {:.3e}", centred.g.norm(), centred.residual);

    let shift = MoebiusParam::new(vec![0.2, -0.3, 0.5])?;
    let points = base.points.iter().map(|x| gamma_g(x, &shift)).collect::<reilly_lab::Result<Vec<_>>>()?;
    let shifted = PointMeasure::new(base.space, points, w)?;
    let res = balance(&shifted)?.require_converged()?;
    println!("shifted measure: g = {:?} after {} iterations, residual {:.3e}", res.g.g(), res.iterations, res.residual);
    for step in &res.history {
        println!("  {:>3} residual {:.3e} |g| {:.6} step {:.3}", step.iteration, step.residual, step.gnorm, step.step);
    }
    Ok(())
}
