//! Triangulated surfaces and P1 finite elements for `L_T + q`.

mod assemble;
mod io;
mod mesh;
mod solve;
mod sparse;

pub use assemble::{assemble, integrate, weighted_mass, AssembledSystem, TensorField};
pub use io::{read_off, read_spectrum_csv, spectrum_rows, write_off, write_spectrum_csv, SpectrumRow};
pub(crate) use io::csv_err;
pub use mesh::{icosphere, triangulate, SurfaceMesh, TriangleGeometry, QUADRATURE};
pub use solve::{
    dense_solve, flat_torus_spectrum, lanczos_solve, product_spectrum, projective_spectrum, solve_spectrum,
    sphere_levels, sphere_spectrum, Backend, SpectrumResult, DENSE_LIMIT,
};
pub use sparse::CsrMatrix;
