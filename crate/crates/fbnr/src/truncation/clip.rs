//! Halfspace clipping of convex polyhedra, used for symmetric volume
//! differences and for extracting the plane patch inside a cell.

use std::collections::HashMap;

use super::Plane;
use crate::mesh::Mesh;
use crate::{Vec3, ZERO_TOL};

/// Standalone polyhedron: vertex coordinates plus faces as vertex loops
/// ordered counter-clockwise around the outward normal.
#[derive(Debug, Clone)]
pub struct Polyhedron {
    pub vertices: Vec<Vec3>,
    pub faces: Vec<Vec<u32>>,
}

/// A clipped polyhedron together with the index of the cap face lying on
/// the cutting plane (absent when the plane does not cut the interior).
#[derive(Debug, Clone)]
pub struct ClipResult {
    pub poly: Polyhedron,
    pub cap_face: Option<usize>,
}

impl Polyhedron {
    /// Extracts a mesh cell with all face loops oriented outward.
    pub fn from_cell(mesh: &Mesh, cell: usize) -> Polyhedron {
        let c = &mesh.cells[cell];
        let mut map: HashMap<u32, u32> = HashMap::new();
        let mut vertices = Vec::new();
        let mut faces = Vec::with_capacity(c.face_refs.len());
        for fr in &c.face_refs {
            let src = &mesh.faces[fr.face as usize].vertex_indices;
            let mut loop_: Vec<u32> = src
                .iter()
                .map(|&v| {
                    *map.entry(v).or_insert_with(|| {
                        vertices.push(mesh.vertex(v));
                        (vertices.len() - 1) as u32
                    })
                })
                .collect();
            if fr.orientation < 0 {
                loop_.reverse();
            }
            faces.push(loop_);
        }
        Polyhedron { vertices, faces }
    }

    /// Signed volume by the divergence theorem (positive for outward-oriented
    /// faces).
    pub fn volume(&self) -> f64 {
        let mut vol6 = 0.0;
        for loop_ in &self.faces {
            let v0 = self.vertices[loop_[0] as usize];
            for m in 1..loop_.len() - 1 {
                let a = self.vertices[loop_[m] as usize];
                let b = self.vertices[loop_[m + 1] as usize];
                vol6 += v0.dot(&a.cross(&b));
            }
        }
        vol6 / 6.0
    }

    /// Area and centroid of one face. Fan triangulation; exact for convex
    /// faces, where every fan triangle is positively oriented.
    pub fn face_area_centroid(&self, face: usize) -> (f64, Vec3) {
        let loop_ = &self.faces[face];
        let v0 = self.vertices[loop_[0] as usize];
        let mut area = 0.0;
        let mut moment = Vec3::zeros();
        for m in 1..loop_.len() - 1 {
            let a = self.vertices[loop_[m] as usize];
            let b = self.vertices[loop_[m + 1] as usize];
            let tri = (a - v0).cross(&(b - v0)).norm() / 2.0;
            area += tri;
            moment += (v0 + a + b) * (tri / 3.0);
        }
        if area <= 0.0 {
            return (0.0, v0);
        }
        (area, moment / area)
    }

    /// Clips the polyhedron against the negative halfspace of `plane`
    /// (`lambda <= 0` is kept). Returns `None` when nothing of positive
    /// volume remains. Assumes a convex polyhedron: the cap polygon is
    /// recovered by an angular sort of the section vertices.
    pub fn clip_halfspace(&self, plane: &Plane) -> Option<ClipResult> {
        let lambda: Vec<f64> = self
            .vertices
            .iter()
            .map(|&v| {
                let l = plane.signed_dist(v);
                if l.abs() < ZERO_TOL {
                    0.0
                } else {
                    l
                }
            })
            .collect();

        if !lambda.iter().any(|&l| l < 0.0) {
            return None;
        }
        if !lambda.iter().any(|&l| l > 0.0) {
            return Some(ClipResult {
                poly: self.clone(),
                cap_face: None,
            });
        }

        let mut vertices: Vec<Vec3> = Vec::new();
        let mut old_map: HashMap<u32, u32> = HashMap::new();
        let mut cut_map: HashMap<(u32, u32), u32> = HashMap::new();
        let mut on_plane: Vec<u32> = Vec::new();
        let mut faces: Vec<Vec<u32>> = Vec::new();
        let mut coplanar_face = false;

        for loop_ in &self.faces {
            let nv = loop_.len();
            let mut out: Vec<u32> = Vec::new();
            for m in 0..nv {
                let u = loop_[m];
                let v = loop_[(m + 1) % nv];
                let (lu, lv) = (lambda[u as usize], lambda[v as usize]);
                if lu <= 0.0 {
                    let idx = *old_map.entry(u).or_insert_with(|| {
                        vertices.push(self.vertices[u as usize]);
                        (vertices.len() - 1) as u32
                    });
                    out.push(idx);
                    if lu == 0.0 {
                        on_plane.push(idx);
                    }
                }
                if lu * lv < 0.0 {
                    let key = (u.min(v), u.max(v));
                    let idx = *cut_map.entry(key).or_insert_with(|| {
                        let t = lu / (lu - lv);
                        let p = self.vertices[u as usize]
                            + (self.vertices[v as usize] - self.vertices[u as usize]) * t;
                        vertices.push(p);
                        (vertices.len() - 1) as u32
                    });
                    out.push(idx);
                    on_plane.push(idx);
                }
            }
            out.dedup();
            if out.len() > 1 && out.first() == out.last() {
                out.pop();
            }
            if out.len() >= 3 {
                if loop_.iter().all(|&u| lambda[u as usize] == 0.0) {
                    coplanar_face = true;
                }
                faces.push(out);
            }
        }

        on_plane.sort_unstable();
        on_plane.dedup();

        let mut cap_face = None;
        if on_plane.len() >= 3 && !coplanar_face {
            let n = plane.normal();
            // Any orthonormal tangent basis of the plane.
            let u_axis = if n.x.abs() < 0.9 {
                Vec3::x().cross(&n).normalize()
            } else {
                Vec3::y().cross(&n).normalize()
            };
            let v_axis = n.cross(&u_axis);
            let center: Vec3 =
                on_plane.iter().map(|&i| vertices[i as usize]).sum::<Vec3>()
                    / on_plane.len() as f64;
            let mut ring: Vec<(f64, u32)> = on_plane
                .iter()
                .map(|&i| {
                    let d = vertices[i as usize] - center;
                    (d.dot(&v_axis).atan2(d.dot(&u_axis)), i)
                })
                .collect();
            ring.sort_by(|a, b| a.0.total_cmp(&b.0));
            let loop_: Vec<u32> = ring.into_iter().map(|(_, i)| i).collect();
            // The angular sort around (u, v) yields a loop that is CCW with
            // respect to +n, the outward direction of the kept region.
            cap_face = Some(faces.len());
            faces.push(loop_);
        }

        let poly = Polyhedron { vertices, faces };
        if poly.volume() <= 0.0 {
            return None;
        }
        Some(ClipResult { poly, cap_face })
    }
}
