use std::collections::{BTreeMap, HashMap};

use nalgebra::{DMatrix, DVector, Vector2};
use rayon::prelude::*;

use crate::error::{LabError, Result};
use crate::immersion::{AmbientSpace, Domain, ParametricImmersion, PointFrame, Quotient};

/// Three-point degree-2 triangle rule: barycentric coordinates and weights
/// as fractions of the triangle area.
pub const QUADRATURE: [([f64; 3], f64); 3] = [
    ([2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0], 1.0 / 3.0),
    ([1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0], 1.0 / 3.0),
    ([1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0], 1.0 / 3.0),
];

/// Triangulated closed surface in a space-form model.
#[derive(Clone, Debug)]
pub struct SurfaceMesh {
    pub name: String,
    pub ambient: AmbientSpace,
    pub vertices: Vec<DVector<f64>>,
    /// Domain point of each vertex; empty for imported meshes.
    pub params: Vec<Vec<f64>>,
    pub triangles: Vec<[usize; 3]>,
    /// Frame of the immersion at each vertex; empty for imported meshes.
    pub frames: Vec<PointFrame>,
    pub level: usize,
    pub orientable: bool,
}

/// Flat (secant) geometry of one triangle.
#[derive(Clone, Debug)]
pub struct TriangleGeometry {
    pub area: f64,
    /// Orthonormal basis of the triangle plane, as ambient columns.
    pub frame: DMatrix<f64>,
    /// Gradients of the three hat functions in `frame` coordinates.
    pub grads: [Vector2<f64>; 3],
}

impl SurfaceMesh {
    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn has_frames(&self) -> bool {
        self.frames.len() == self.vertices.len()
    }

    pub fn triangle_geometry(&self, t: usize) -> Result<TriangleGeometry> {
        let [a, b, c] = self.triangles[t];
        let x0 = &self.vertices[a];
        let e1 = &self.vertices[b] - x0;
        let e2 = &self.vertices[c] - x0;
        let amb = &self.ambient;
        let l1 = amb.inner(&e1, &e1);
        if !(l1 > 0.0) {
            return Err(LabError::Topology(format!("triangle {t} has a degenerate edge")));
        }
        let l1 = l1.sqrt();
        let f1 = &e1 / l1;
        let p12 = amb.inner(&e2, &f1);
        let r = &e2 - &f1 * p12;
        let l2 = amb.inner(&r, &r);
        if !(l2 > 0.0) {
            return Err(LabError::Topology(format!("triangle {t} has zero area")));
        }
        let l2 = l2.sqrt();
        let f2 = r / l2;
        let area = 0.5 * l1 * l2;
        // Edge coordinates E = [[l1, p12], [0, l2]]; hat gradients are the columns of E^{-T}.
        let g1 = Vector2::new(1.0 / l1, -p12 / (l1 * l2));
        let g2 = Vector2::new(0.0, 1.0 / l2);
        let g0 = -(g1 + g2);
        Ok(TriangleGeometry { area, frame: DMatrix::from_columns(&[f1, f2]), grads: [g0, g1, g2] })
    }

    /// Total area `V`.
    pub fn area(&self) -> Result<f64> {
        let mut s = 0.0;
        for t in 0..self.triangles.len() {
            s += self.triangle_geometry(t)?.area;
        }
        Ok(s)
    }

    pub fn edge_count(&self) -> usize {
        self.edge_map().len()
    }

    fn edge_map(&self) -> BTreeMap<(usize, usize), Vec<(usize, bool)>> {
        let mut m: BTreeMap<(usize, usize), Vec<(usize, bool)>> = BTreeMap::new();
        for (t, tri) in self.triangles.iter().enumerate() {
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                let key = (a.min(b), a.max(b));
                m.entry(key).or_default().push((t, a < b));
            }
        }
        m
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.vertices.len() as i64 - self.edge_count() as i64 + self.triangles.len() as i64
    }

    pub fn max_edge_length(&self) -> f64 {
        self.edge_map()
            .keys()
            .map(|&(a, b)| self.ambient.distance(&self.vertices[a], &self.vertices[b]))
            .fold(0.0, f64::max)
    }

    /// Checks watertightness (every edge in exactly two triangles), positive
    /// areas and, for orientable meshes, consistent orientation.
    pub fn validate(&self) -> Result<()> {
        for (t, tri) in self.triangles.iter().enumerate() {
            if tri.iter().any(|&v| v >= self.vertices.len()) || tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2]
            {
                return Err(LabError::Topology(format!("triangle {t} has invalid vertex indices")));
            }
            self.triangle_geometry(t)?;
        }
        for (&(a, b), uses) in &self.edge_map() {
            if uses.len() != 2 {
                return Err(LabError::Topology(format!("edge ({a},{b}) is shared by {} triangles", uses.len())));
            }
            if self.orientable && uses[0].1 == uses[1].1 {
                return Err(LabError::Topology(format!("edge ({a},{b}) has inconsistent orientation")));
            }
        }
        Ok(())
    }
}

/// Subdivided icosahedron on the unit sphere `S²`: level `ℓ` has
/// `10·4^ℓ + 2` vertices. Triangles are oriented outward.
pub fn icosphere(level: usize) -> (Vec<[f64; 3]>, Vec<[usize; 3]>) {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let raw = [
        [-1.0, phi, 0.0],
        [1.0, phi, 0.0],
        [-1.0, -phi, 0.0],
        [1.0, -phi, 0.0],
        [0.0, -1.0, phi],
        [0.0, 1.0, phi],
        [0.0, -1.0, -phi],
        [0.0, 1.0, -phi],
        [phi, 0.0, -1.0],
        [phi, 0.0, 1.0],
        [-phi, 0.0, -1.0],
        [-phi, 0.0, 1.0],
    ];
    let norm = |v: [f64; 3]| {
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        [v[0] / n, v[1] / n, v[2] / n]
    };
    let mut verts: Vec<[f64; 3]> = raw.iter().map(|v| norm(*v)).collect();
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..level {
        let mut cache: HashMap<(usize, usize), usize> = HashMap::new();
        let mut mid = |a: usize, b: usize, verts: &mut Vec<[f64; 3]>| -> usize {
            let key = (a.min(b), a.max(b));
            if let Some(&i) = cache.get(&key) {
                return i;
            }
            let (p, q) = (verts[a], verts[b]);
            verts.push(norm([(p[0] + q[0]) / 2.0, (p[1] + q[1]) / 2.0, (p[2] + q[2]) / 2.0]));
            let i = verts.len() - 1;
            cache.insert(key, i);
            i
        };
        let mut next = Vec::with_capacity(faces.len() * 4);
        for &[a, b, c] in &faces {
            let ab = mid(a, b, &mut verts);
            let bc = mid(b, c, &mut verts);
            let ca = mid(c, a, &mut verts);
            next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    (verts, faces)
}

/// Antipodal quotient of an antipodally symmetric triangulation of `S²`.
/// Returns the representative vertex indices (into the input) and the
/// triangles re-indexed into that list.
fn antipodal_quotient(verts: &[[f64; 3]], faces: &[[usize; 3]]) -> Result<(Vec<usize>, Vec<[usize; 3]>)> {
    let key = |v: &[f64; 3]| -> (i64, i64, i64) {
        let q = |x: f64| (x * 1e9).round() as i64;
        (q(v[0]), q(v[1]), q(v[2]))
    };
    let index: HashMap<(i64, i64, i64), usize> = verts.iter().enumerate().map(|(i, v)| (key(v), i)).collect();
    let mut rep = vec![usize::MAX; verts.len()];
    let mut kept = Vec::new();
    for (i, v) in verts.iter().enumerate() {
        let j = *index
            .get(&key(&[-v[0], -v[1], -v[2]]))
            .ok_or_else(|| LabError::Topology("triangulation is not antipodally symmetric".into()))?;
        if rep[i] == usize::MAX {
            rep[i] = kept.len();
            rep[j] = kept.len();
            kept.push(i.min(j));
        }
    }
    let mut seen = std::collections::HashSet::new();
    let mut tris = Vec::with_capacity(faces.len() / 2);
    for f in faces {
        let t = [rep[f[0]], rep[f[1]], rep[f[2]]];
        let mut s = t;
        s.sort_unstable();
        if seen.insert(s) {
            tris.push(t);
        }
    }
    Ok((kept, tris))
}

/// Periodic structured grid of `n0 × n1` vertices, each square split into
/// two triangles.
fn periodic_grid(n0: usize, n1: usize) -> Vec<[usize; 3]> {
    let id = |i: usize, j: usize| (i % n0) * n1 + (j % n1);
    let mut tris = Vec::with_capacity(2 * n0 * n1);
    for i in 0..n0 {
        for j in 0..n1 {
            tris.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            tris.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    tris
}

/// Triangulates a closed 2-dimensional immersion.
///
/// Sphere charts use the subdivided icosahedron (`10·4^ℓ + 2` vertices,
/// halved for the antipodal quotient); torus charts, a periodic
/// `2^ℓ × 2^ℓ` grid. Frames are computed at every vertex.
pub fn triangulate(imm: &ParametricImmersion, level: usize) -> Result<SurfaceMesh> {
    if imm.n() != 2 {
        return Err(LabError::Topology(format!("{}: only surfaces can be triangulated", imm.name)));
    }
    if !imm.domain.is_closed() {
        return Err(LabError::Topology(format!("{}: chart is not closed", imm.name)));
    }
    let (params, triangles, orientable): (Vec<Vec<f64>>, Vec<[usize; 3]>, bool) = match &imm.domain {
        Domain::Spheres(d) if d.as_slice() == [2] => {
            let (v, f) = icosphere(level);
            match imm.quotient {
                Quotient::None => (v.iter().map(|p| p.to_vec()).collect(), f, true),
                Quotient::Antipodal => {
                    let (kept, tris) = antipodal_quotient(&v, &f)?;
                    (kept.iter().map(|&i| v[i].to_vec()).collect(), tris, false)
                }
            }
        }
        Domain::Spheres(d) if d.as_slice() == [1, 1] => {
            let nn = 1usize << level;
            let mut p = Vec::with_capacity(nn * nn);
            for i in 0..nn {
                for j in 0..nn {
                    let (a, b) = (
                        2.0 * std::f64::consts::PI * i as f64 / nn as f64,
                        2.0 * std::f64::consts::PI * j as f64 / nn as f64,
                    );
                    p.push(vec![a.cos(), a.sin(), b.cos(), b.sin()]);
                }
            }
            (p, periodic_grid(nn, nn), true)
        }
        Domain::Box { lo, hi, .. } => {
            let nn = 1usize << level;
            let mut p = Vec::with_capacity(nn * nn);
            for i in 0..nn {
                for j in 0..nn {
                    p.push(vec![
                        lo[0] + (hi[0] - lo[0]) * i as f64 / nn as f64,
                        lo[1] + (hi[1] - lo[1]) * j as f64 / nn as f64,
                    ]);
                }
            }
            (p, periodic_grid(nn, nn), true)
        }
        other => {
            return Err(LabError::Topology(format!("{}: cannot mesh domain {other:?}", imm.name)));
        }
    };
    let frames: Vec<PointFrame> = params.par_iter().map(|y| imm.frame_at(y)).collect::<Result<_>>()?;
    let vertices = frames.iter().map(|f| f.position.clone()).collect();
    let mesh = SurfaceMesh {
        name: imm.name.clone(),
        ambient: imm.ambient,
        vertices,
        params,
        triangles,
        frames,
        level,
        orientable,
    };
    mesh.validate()?;
    Ok(mesh)
}
