//! Brute-force clipping oracle, independent of the face-based truncation
//! path: polygons are clipped Sutherland-Hodgman style as plain coordinate
//! loops, the section polygon is rebuilt from the collected cut points, and
//! the volume follows from the divergence theorem.

use fbnr::mesh::Mesh;
use fbnr::truncation::Plane;
use fbnr::Vec3;

/// Outward-oriented coordinate loops of a mesh cell.
pub fn cell_polygons(mesh: &Mesh, cell: usize) -> Vec<Vec<Vec3>> {
    mesh.cells[cell]
        .face_refs
        .iter()
        .map(|fr| {
            let face = &mesh.faces[fr.face as usize];
            let mut loop_: Vec<Vec3> = face
                .vertex_indices
                .iter()
                .map(|&v| mesh.vertex(v))
                .collect();
            if fr.orientation < 0 {
                loop_.reverse();
            }
            loop_
        })
        .collect()
}

/// Clips a closed polygon soup against `lambda <= 0`, closing the result
/// with a section polygon. Convex input assumed.
pub fn clip_polygons(polys: &[Vec<Vec3>], plane: &Plane) -> Vec<Vec<Vec3>> {
    let normal = plane.normal();
    let mut out: Vec<Vec<Vec3>> = Vec::new();
    let mut section: Vec<Vec3> = Vec::new();

    for poly in polys {
        let d: Vec<f64> = poly
            .iter()
            .map(|&p| {
                let l = plane.signed_dist(p);
                if l.abs() < 1e-14 {
                    0.0
                } else {
                    l
                }
            })
            .collect();
        let mut kept: Vec<Vec3> = Vec::new();
        for i in 0..poly.len() {
            let j = (i + 1) % poly.len();
            if d[i] <= 0.0 {
                kept.push(poly[i]);
                if d[i] == 0.0 {
                    section.push(poly[i]);
                }
            }
            if d[i] * d[j] < 0.0 {
                let t = d[i] / (d[i] - d[j]);
                let p = poly[i] + (poly[j] - poly[i]) * t;
                kept.push(p);
                section.push(p);
            }
        }
        if kept.len() >= 3 {
            out.push(kept);
        }
    }

    // Deduplicate the section points and close the cut with one polygon,
    // sorted by angle around the section centroid (convexity).
    let mut unique: Vec<Vec3> = Vec::new();
    'pts: for p in section {
        for q in &unique {
            if (p - q).norm() < 1e-12 {
                continue 'pts;
            }
        }
        unique.push(p);
    }
    if unique.len() >= 3 {
        let center = unique.iter().sum::<Vec3>() / unique.len() as f64;
        let u_axis = if normal.x.abs() < 0.9 {
            Vec3::x().cross(&normal).normalize()
        } else {
            Vec3::y().cross(&normal).normalize()
        };
        let v_axis = normal.cross(&u_axis);
        unique.sort_by(|a, b| {
            let pa = (a - center).dot(&v_axis).atan2((a - center).dot(&u_axis));
            let pb = (b - center).dot(&v_axis).atan2((b - center).dot(&u_axis));
            pa.total_cmp(&pb)
        });
        // Counter-clockwise around +normal, the outward direction of the
        // kept side.
        out.push(unique);
    }
    out
}

/// Volume of a closed, outward-oriented polygon soup.
pub fn polygons_volume(polys: &[Vec<Vec3>]) -> f64 {
    let mut vol6 = 0.0;
    for poly in polys {
        for m in 1..poly.len() - 1 {
            vol6 += poly[0].dot(&poly[m].cross(&poly[m + 1]));
        }
    }
    vol6 / 6.0
}

/// Oracle volume fraction of a cell truncated by a plane.
pub fn oracle_alpha(mesh: &Mesh, cell: usize, plane: &Plane) -> f64 {
    let clipped = clip_polygons(&cell_polygons(mesh, cell), plane);
    (polygons_volume(&clipped) / mesh.cells[cell].volume).clamp(0.0, 1.0)
}
