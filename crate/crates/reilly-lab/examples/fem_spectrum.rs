//! Finite element spectrum of a triangulated gallery surface, written as a
//! spectra CSV together with the mesh in OFF format.
//!
//! Usage: `fem_spectrum [level] [out_dir]`.

use std::fs::{self, File};

use reilly_lab::immersion::{gallery, GallerySpec};
use reilly_lab::meshfem::{assemble, sphere_spectrum, solve_spectrum, triangulate, write_off, write_spectrum_csv, TensorField};

fn main() -> reilly_lab::Result<()> {
    let level: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(4);
    let out = std::env::args().nth(2).unwrap_or_else(|| "out/fem_spectrum".into());
    fs::create_dir_all(&out)?;
    let imm = gallery(&GallerySpec::Sphere { n: 2, a: 1.0, codim: 1, c: 0 })?;
    let mesh = triangulate(&imm, level)?;
    let sys = assemble(&mesh, &TensorField::Identity, None)?;
    let fem = solve_spectrum(&sys, 16)?;
    let exact = sphere_spectrum(2, 1.0, 16)?;
    println!("{} vertices, backend {}", mesh.vertex_count(), fem.backend.label());
    for (i, (a, b)) in fem.eigenvalues.iter().zip(&exact.eigenvalues).enumerate() {
        println!("{i:>3} fem {a:>12.6} exact {b:>8.3}");
    }
    write_spectrum_csv(&fem, File::create(format!("{out}/spectrum.csv"))?)?;
    write_off(&mesh, File::create(format!("{out}/sphere.off"))?)?;
    println!("wrote {out}/spectrum.csv and {out}/sphere.off");
    Ok(())
}
