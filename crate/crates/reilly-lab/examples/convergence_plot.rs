//! Mesh convergence of `λ₂` on the unit sphere with a log-log SVG plot.
//!
//! Usage: `convergence_plot [out_dir]`.

use std::fs;

use reilly_lab::cli::convergence::{convergence_study, write_convergence_csv};
use reilly_lab::cli::svg::convergence_svg;
use reilly_lab::immersion::{gallery, GallerySpec};
use reilly_lab::reilly::OperatorSpec;

fn main() -> reilly_lab::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "out/convergence_plot".into());
    fs::create_dir_all(&out)?;
    let imm = gallery(&GallerySpec::Sphere { n: 2, a: 1.0, codim: 1, c: 0 })?;
    let study = convergence_study(&imm, &OperatorSpec::identity(0), &[2, 3, 4, 5])?;
    for r in &study.rows {
        println!("level {} vertices {:>6} lambda2 {:.9} gap {:+.3e}", r.level, r.vertices, r.lambda2, r.gap);
    }
    println!("fitted slope {:?}", study.slope);
    write_convergence_csv(&study, fs::File::create(format!("{out}/convergence.csv"))?)?;
    if let Some(svg) = convergence_svg(&study) {
        fs::write(format!("{out}/plot.svg"), svg)?;
    }
    Ok(())
}
