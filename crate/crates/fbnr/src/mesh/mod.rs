//! Unstructured polyhedral meshes.
//!
//! A [`Mesh`] stores vertices, planar polygonal faces and cells. Each face is
//! referenced by at most two cells; per-cell orientation flags make the
//! stored face normal outward for the referencing cell. Meshes are immutable
//! after construction, so all queries are safe to share across threads.

mod generate;
mod vtk;

pub use generate::{generate_cuboid_mesh, generate_tet_mesh, tet_mesh_from_arrays};
pub use vtk::{load_vtk, parse_vtk, write_vtk_tets};

use std::collections::HashMap;

use crate::truncation::Plane;
use crate::{Error, Result, Vec3, ZERO_TOL};

/// Axis-aligned box.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    pub fn volume(&self) -> f64 {
        let d = self.max - self.min;
        d.x * d.y * d.z
    }

    pub fn of_points(points: &[Vec3]) -> Aabb {
        let mut min = Vec3::repeat(f64::INFINITY);
        let mut max = Vec3::repeat(f64::NEG_INFINITY);
        for p in points {
            min = min.inf(p);
            max = max.sup(p);
        }
        Aabb { min, max }
    }
}

/// Planar polygonal face. Vertices are ordered counter-clockwise with
/// respect to `unit_normal`.
#[derive(Debug, Clone)]
pub struct Face {
    pub vertex_indices: Vec<u32>,
    pub unit_normal: Vec3,
    pub area: f64,
    pub centroid: Vec3,
}

/// Reference from a cell to a face. `orientation` is +1 when the stored face
/// normal points out of the cell and -1 otherwise.
#[derive(Debug, Clone, Copy)]
pub struct FaceRef {
    pub face: u32,
    pub orientation: i8,
}

/// Polyhedral cell described by its oriented boundary faces.
#[derive(Debug, Clone)]
pub struct Cell {
    pub face_refs: Vec<FaceRef>,
    pub volume: f64,
    pub centroid: Vec3,
    /// Sorted, deduplicated vertex labels of the cell.
    pub vertex_indices: Vec<u32>,
}

/// Neighborhood kinds: cells sharing a full face, at least one edge
/// (two vertices of a face pair), or at least one vertex with the center.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StencilKind {
    Face,
    Edge,
    Vertex,
}

/// A center cell together with its neighborhood; the center is listed first,
/// the remaining members are sorted by label.
#[derive(Debug, Clone)]
pub struct Stencil {
    pub center: usize,
    pub members: Vec<usize>,
    pub kind: StencilKind,
}

impl Stencil {
    /// Members excluding the center.
    pub fn neighbors(&self) -> &[usize] {
        &self.members[1..]
    }
}

#[derive(Debug, Clone)]
pub struct Mesh {
    pub vertices: Vec<Vec3>,
    pub faces: Vec<Face>,
    pub cells: Vec<Cell>,
    pub domain_bounds: Aabb,
    /// Cells referencing each face: `[owner, neighbor]`, -1 when absent.
    face_cells: Vec<[i64; 2]>,
    /// Cells incident to each vertex, sorted.
    vertex_cells: Vec<Vec<u32>>,
}

impl Mesh {
    /// Builds a mesh from raw polyhedra. Every cell is given as a list of
    /// vertex loops, each ordered counter-clockwise around the cell-outward
    /// normal. Shared faces are deduplicated by their sorted vertex set; the
    /// first referencing cell becomes the owner and fixes the stored
    /// orientation.
    pub fn from_polyhedra(
        vertices: Vec<Vec3>,
        cell_faces: Vec<Vec<Vec<u32>>>,
        expected_volume: Option<f64>,
    ) -> Result<Mesh> {
        let mut faces: Vec<Face> = Vec::new();
        let mut face_cells: Vec<[i64; 2]> = Vec::new();
        let mut lookup: HashMap<Vec<u32>, u32> = HashMap::new();
        let mut cells: Vec<Cell> = Vec::with_capacity(cell_faces.len());

        for (k, loops) in cell_faces.into_iter().enumerate() {
            let mut face_refs = Vec::with_capacity(loops.len());
            let mut cell_verts: Vec<u32> = Vec::new();
            for loop_ in loops {
                if loop_.len() < 3 {
                    return Err(Error::InvalidMesh(format!(
                        "cell {k} has a face with {} vertices",
                        loop_.len()
                    )));
                }
                for &v in &loop_ {
                    if v as usize >= vertices.len() {
                        return Err(Error::InvalidMesh(format!(
                            "cell {k} references vertex {v} out of bounds"
                        )));
                    }
                }
                cell_verts.extend_from_slice(&loop_);
                let mut key = loop_.clone();
                key.sort_unstable();
                match lookup.get(&key) {
                    Some(&fi) => {
                        if face_cells[fi as usize][1] >= 0 {
                            return Err(Error::InvalidMesh(format!(
                                "face {fi} referenced by more than two cells"
                            )));
                        }
                        face_cells[fi as usize][1] = k as i64;
                        face_refs.push(FaceRef {
                            face: fi,
                            orientation: -1,
                        });
                    }
                    None => {
                        let fi = faces.len() as u32;
                        lookup.insert(key, fi);
                        faces.push(build_face(&vertices, loop_)?);
                        face_cells.push([k as i64, -1]);
                        face_refs.push(FaceRef {
                            face: fi,
                            orientation: 1,
                        });
                    }
                }
            }
            cell_verts.sort_unstable();
            cell_verts.dedup();
            let (volume, centroid) = cell_volume_centroid(&vertices, &faces, &face_refs);
            if volume <= 0.0 {
                return Err(Error::NonPositiveVolume { cell: k, volume });
            }
            cells.push(Cell {
                face_refs,
                volume,
                centroid,
                vertex_indices: cell_verts,
            });
        }

        let mut vertex_cells = vec![Vec::new(); vertices.len()];
        for (k, cell) in cells.iter().enumerate() {
            for &v in &cell.vertex_indices {
                vertex_cells[v as usize].push(k as u32);
            }
        }

        let domain_bounds = Aabb::of_points(&vertices);
        let mesh = Mesh {
            vertices,
            faces,
            cells,
            domain_bounds,
            face_cells,
            vertex_cells,
        };
        mesh.validate(expected_volume)?;
        Ok(mesh)
    }

    /// Convenience constructor for a standalone polyhedron (faces outward).
    pub fn single_cell(vertices: Vec<Vec3>, faces: Vec<Vec<u32>>) -> Result<Mesh> {
        Mesh::from_polyhedra(vertices, vec![faces], None)
    }

    pub fn vertex(&self, i: u32) -> Vec3 {
        self.vertices[i as usize]
    }

    /// Owner and neighbor cell of a face (-1 when absent).
    pub fn face_cells(&self, face: u32) -> [i64; 2] {
        self.face_cells[face as usize]
    }

    /// Cells incident to a vertex.
    pub fn cells_at_vertex(&self, v: u32) -> &[u32] {
        &self.vertex_cells[v as usize]
    }

    /// Unit co-normals of a face, one per edge `(v_m, v_{m+1})`: in-plane,
    /// orthogonal to the face normal, pointing out of the polygon.
    pub fn face_conormals(&self, face: u32) -> Vec<Vec3> {
        let f = &self.faces[face as usize];
        let n = f.vertex_indices.len();
        (0..n)
            .map(|m| {
                let a = self.vertex(f.vertex_indices[m]);
                let b = self.vertex(f.vertex_indices[(m + 1) % n]);
                (b - a).cross(&f.unit_normal) / (b - a).norm()
            })
            .collect()
    }

    /// Checks the structural invariants: coplanar faces, unit normals,
    /// closed cell boundaries, positive volumes and (when the expected
    /// domain volume is known) the volume partition.
    pub fn validate(&self, expected_volume: Option<f64>) -> Result<()> {
        for (fi, face) in self.faces.iter().enumerate() {
            if (face.unit_normal.norm() - 1.0).abs() > 1e-14 {
                return Err(Error::InvalidMesh(format!("face {fi} normal not unit")));
            }
            let v0 = self.vertex(face.vertex_indices[0]);
            let diam = face
                .vertex_indices
                .iter()
                .map(|&v| (self.vertex(v) - face.centroid).norm())
                .fold(0.0, f64::max)
                * 2.0;
            for &v in &face.vertex_indices {
                let off = (self.vertex(v) - v0).dot(&face.unit_normal).abs();
                if off > 1e-12 * diam.max(1e-300) {
                    return Err(Error::InvalidMesh(format!(
                        "face {fi} is not planar (offset {off:.3e}, diameter {diam:.3e})"
                    )));
                }
            }
        }
        let mut total = 0.0;
        for (k, cell) in self.cells.iter().enumerate() {
            if cell.volume <= 0.0 {
                return Err(Error::NonPositiveVolume {
                    cell: k,
                    volume: cell.volume,
                });
            }
            total += cell.volume;
            let mut closure = Vec3::zeros();
            let mut surface = 0.0;
            for fr in &cell.face_refs {
                let f = &self.faces[fr.face as usize];
                closure += f.unit_normal * (f.area * fr.orientation as f64);
                surface += f.area;
            }
            if closure.norm() > 1e-10 * surface {
                return Err(Error::InvalidMesh(format!(
                    "cell {k} boundary not closed (defect {:.3e})",
                    closure.norm()
                )));
            }
        }
        if let Some(expected) = expected_volume {
            if (total - expected).abs() > 1e-10 * expected {
                return Err(Error::InvalidMesh(format!(
                    "cell volumes sum to {total:.15e}, expected {expected:.15e}"
                )));
            }
        }
        Ok(())
    }

    /// Debugging dump: vertices, faces and cells as index lists.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "vertices": self.vertices.iter().map(|v| [v.x, v.y, v.z]).collect::<Vec<_>>(),
            "faces": self.faces.iter().map(|f| f.vertex_indices.clone()).collect::<Vec<_>>(),
            "cells": self.cells.iter().map(|c| {
                c.face_refs.iter().map(|r| (r.face, r.orientation)).collect::<Vec<_>>()
            }).collect::<Vec<_>>(),
            "domain_bounds": self.domain_bounds,
        })
    }
}

fn build_face(vertices: &[Vec3], loop_: Vec<u32>) -> Result<Face> {
    // Newell's method: the accumulated cross products equal twice the
    // area-weighted normal for a planar CCW loop.
    let mut newell = Vec3::zeros();
    let n = loop_.len();
    for m in 0..n {
        let a = vertices[loop_[m] as usize];
        let b = vertices[loop_[(m + 1) % n] as usize];
        newell += a.cross(&b);
    }
    let norm = newell.norm();
    if norm <= 0.0 {
        return Err(Error::InvalidMesh("face with zero area".into()));
    }
    let unit_normal = newell / norm;
    let area = 0.5 * norm;

    // Area-weighted fan centroid (signed triangle areas handle concave loops).
    let v0 = vertices[loop_[0] as usize];
    let mut acc = Vec3::zeros();
    let mut acc_area = 0.0;
    for m in 1..n - 1 {
        let a = vertices[loop_[m] as usize];
        let b = vertices[loop_[m + 1] as usize];
        let tri2 = (a - v0).cross(&(b - v0)).dot(&unit_normal);
        acc += (v0 + a + b) * (tri2 / 3.0);
        acc_area += tri2;
    }
    let centroid = acc / acc_area;

    Ok(Face {
        vertex_indices: loop_,
        unit_normal,
        area,
        centroid,
    })
}

/// Volume and centroid by the divergence theorem: signed tetrahedra spanned
/// by the origin and the fan triangles of each oriented face. Exact for
/// planar faces, no convexity assumption.
fn cell_volume_centroid(vertices: &[Vec3], faces: &[Face], refs: &[FaceRef]) -> (f64, Vec3) {
    let mut vol6 = 0.0;
    let mut moment = Vec3::zeros();
    for fr in refs {
        let f = &faces[fr.face as usize];
        let sign = fr.orientation as f64;
        let v0 = vertices[f.vertex_indices[0] as usize];
        for m in 1..f.vertex_indices.len() - 1 {
            let a = vertices[f.vertex_indices[m] as usize];
            let b = vertices[f.vertex_indices[m + 1] as usize];
            let det = v0.dot(&a.cross(&b)) * sign;
            vol6 += det;
            moment += (v0 + a + b) * (det / 4.0);
        }
    }
    (vol6 / 6.0, moment / vol6)
}

/// Builds the neighborhood of `center`. The face kind gathers cells sharing
/// a full face, the edge kind cells owning a face that shares at least two
/// vertex labels with a face of the center, the vertex kind cells sharing at
/// least one vertex.
pub fn build_neighborhood(mesh: &Mesh, center: usize, kind: StencilKind) -> Stencil {
    let mut members: Vec<usize> = Vec::new();
    match kind {
        StencilKind::Face => {
            for fr in &mesh.cells[center].face_refs {
                let [a, b] = mesh.face_cells(fr.face);
                for c in [a, b] {
                    if c >= 0 && c as usize != center {
                        members.push(c as usize);
                    }
                }
            }
        }
        StencilKind::Vertex => {
            for &v in &mesh.cells[center].vertex_indices {
                for &c in mesh.cells_at_vertex(v) {
                    if c as usize != center {
                        members.push(c as usize);
                    }
                }
            }
        }
        StencilKind::Edge => {
            let center_faces: Vec<&[u32]> = mesh.cells[center]
                .face_refs
                .iter()
                .map(|fr| mesh.faces[fr.face as usize].vertex_indices.as_slice())
                .collect();
            let mut candidates: Vec<usize> = Vec::new();
            for &v in &mesh.cells[center].vertex_indices {
                for &c in mesh.cells_at_vertex(v) {
                    if c as usize != center {
                        candidates.push(c as usize);
                    }
                }
            }
            candidates.sort_unstable();
            candidates.dedup();
            'cand: for u in candidates {
                for fr in &mesh.cells[u].face_refs {
                    let fv = &mesh.faces[fr.face as usize].vertex_indices;
                    for cf in &center_faces {
                        if shared_labels(fv, cf) >= 2 {
                            members.push(u);
                            continue 'cand;
                        }
                    }
                }
            }
        }
    }
    members.sort_unstable();
    members.dedup();
    debug_assert!(
        kind != StencilKind::Face || members.len() <= mesh.cells[center].face_refs.len()
    );
    let mut all = Vec::with_capacity(members.len() + 1);
    all.push(center);
    all.extend(members);
    Stencil {
        center,
        members: all,
        kind,
    }
}

fn shared_labels(a: &[u32], b: &[u32]) -> usize {
    // Face vertex lists are short; quadratic scan beats allocation.
    a.iter().filter(|v| b.contains(v)).count()
}

/// Vertex status against a plane: 0 within the tubular tolerance, otherwise
/// the sign of the level set.
pub fn classify_point(plane: &Plane, x: Vec3) -> i8 {
    let lambda = plane.signed_dist(x);
    if lambda.abs() < ZERO_TOL {
        0
    } else if lambda > 0.0 {
        1
    } else {
        -1
    }
}

/// Edge status from the statuses of its two vertices.
///
/// `1` exterior, `-1` interior, `0` intersected, `2`/`-2` degenerate
/// exterior/interior (one vertex on the plane), `3` degenerate intersected
/// (both vertices on the plane).
pub fn classify_edge(status_a: i8, status_b: i8) -> i8 {
    debug_assert!((-1..=1).contains(&status_a) && (-1..=1).contains(&status_b));
    match (status_a, status_b) {
        (1, 1) => 1,
        (-1, -1) => -1,
        (1, -1) | (-1, 1) => 0,
        (1, 0) | (0, 1) => 2,
        (-1, 0) | (0, -1) => -2,
        (0, 0) => 3,
        _ => unreachable!("vertex statuses are in {{-1,0,1}}"),
    }
}
