use std::io::{BufRead, Write};

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::mesh::SurfaceMesh;
use super::solve::SpectrumResult;
use crate::error::{LabError, Result};
use crate::immersion::AmbientSpace;

/// Writes an ASCII OFF file. Three-dimensional coordinates use the plain
/// `OFF` header; other dimensions use `nOFF` with an explicit dimension line.
pub fn write_off<W: Write>(mesh: &SurfaceMesh, mut w: W) -> Result<()> {
    let dim = mesh.ambient.coords();
    if dim == 3 {
        writeln!(w, "OFF")?;
    } else {
        writeln!(w, "nOFF")?;
        writeln!(w, "{dim}")?;
    }
    writeln!(w, "{} {} {}", mesh.vertices.len(), mesh.triangles.len(), mesh.edge_count())?;
    for v in &mesh.vertices {
        let row: Vec<String> = v.iter().map(|x| format!("{x:.17e}")).collect();
        writeln!(w, "{}", row.join(" "))?;
    }
    for t in &mesh.triangles {
        writeln!(w, "3 {} {} {}", t[0], t[1], t[2])?;
    }
    Ok(())
}

/// Reads an ASCII OFF (or `nOFF`) triangle mesh into the given ambient model.
/// Vertices must satisfy the model constraint to `1e-6`.
pub fn read_off<R: BufRead>(r: R, ambient: AmbientSpace, name: &str) -> Result<SurfaceMesh> {
    let mut tokens: Vec<String> = Vec::new();
    for line in r.lines() {
        let line = line?;
        let body = line.split('#').next().unwrap_or("");
        tokens.extend(body.split_whitespace().map(str::to_string));
    }
    let mut it = tokens.into_iter();
    let mut next = |what: &str| it.next().ok_or_else(|| LabError::Parse(format!("OFF: unexpected end of file reading {what}")));
    let header = next("header")?;
    let dim = match header.as_str() {
        "OFF" => 3,
        "nOFF" => parse_usize(&next("dimension")?)?,
        other => return Err(LabError::Parse(format!("OFF: unknown header `{other}`"))),
    };
    if dim != ambient.coords() {
        return Err(LabError::Parse(format!(
            "OFF: file has {dim} coordinates but {} needs {}",
            ambient.label(),
            ambient.coords()
        )));
    }
    let nv = parse_usize(&next("vertex count")?)?;
    let nf = parse_usize(&next("face count")?)?;
    let _ne = parse_usize(&next("edge count")?)?;
    let mut vertices = Vec::with_capacity(nv);
    for i in 0..nv {
        let mut v = Vec::with_capacity(dim);
        for _ in 0..dim {
            v.push(parse_f64(&next("vertex coordinate")?)?);
        }
        let v = DVector::from_vec(v);
        let res = ambient.constraint_residual(&v);
        if res > 1e-6 {
            return Err(LabError::Constraint(format!("OFF vertex {i} violates the {} constraint by {res:.3e}", ambient.label())));
        }
        vertices.push(v);
    }
    let mut triangles = Vec::with_capacity(nf);
    for f in 0..nf {
        let k = parse_usize(&next("face size")?)?;
        if k != 3 {
            return Err(LabError::Parse(format!("OFF face {f} has {k} vertices; only triangles are supported")));
        }
        let mut t = [0usize; 3];
        for slot in &mut t {
            *slot = parse_usize(&next("face index")?)?;
        }
        triangles.push(t);
    }
    let mut mesh = SurfaceMesh {
        name: name.to_string(),
        ambient,
        vertices,
        params: Vec::new(),
        triangles,
        frames: Vec::new(),
        level: 0,
        orientable: true,
    };
    if mesh.validate().is_err() {
        mesh.orientable = false;
        mesh.validate()?;
    }
    Ok(mesh)
}

fn parse_usize(s: &str) -> Result<usize> {
    s.parse().map_err(|_| LabError::Parse(format!("expected a non-negative integer, found `{s}`")))
}

fn parse_f64(s: &str) -> Result<f64> {
    s.parse().map_err(|_| LabError::Parse(format!("expected a number, found `{s}`")))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumRow {
    pub index: usize,
    pub eigenvalue: f64,
    pub multiplicity: usize,
}

/// Rows `index,eigenvalue,multiplicity` with 1-based indices.
pub fn spectrum_rows(s: &SpectrumResult) -> Vec<SpectrumRow> {
    (0..s.eigenvalues.len())
        .map(|i| SpectrumRow { index: i + 1, eigenvalue: s.eigenvalues[i], multiplicity: s.multiplicity_at(i) })
        .collect()
}

pub fn write_spectrum_csv<W: Write>(s: &SpectrumResult, w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for row in spectrum_rows(s) {
        wr.serialize(row).map_err(csv_err)?;
    }
    wr.flush()?;
    Ok(())
}

pub fn read_spectrum_csv<R: std::io::Read>(r: R) -> Result<Vec<SpectrumRow>> {
    csv::Reader::from_reader(r).deserialize().map(|row| row.map_err(csv_err)).collect()
}

pub(crate) fn csv_err(e: csv::Error) -> LabError {
    LabError::Parse(format!("csv: {e}"))
}
