//! Structured mesh generators: equidistant cuboid grids and tetrahedral
//! grids obtained by six-way subdivision of cuboid cells, with optional
//! deterministic jitter of the interior vertices.

use super::{Aabb, Mesh};
use crate::rng::SplitMix64;
use crate::{Error, Result, Vec3};

/// Generates an `n x n x n` cuboid mesh of `domain`. The mesh has `n^3`
/// cells and `3 n^2 (n+1)` faces.
pub fn generate_cuboid_mesh(n: usize, domain: Aabb) -> Result<Mesh> {
    if n == 0 {
        return Err(Error::InvalidArgument("resolution must be >= 1".into()));
    }
    let d = domain.max - domain.min;
    if d.x <= 0.0 || d.y <= 0.0 || d.z <= 0.0 {
        return Err(Error::InvalidArgument("degenerate domain".into()));
    }
    let (vertices, vid) = grid_vertices(n, &domain);
    let mut cell_faces = Vec::with_capacity(n * n * n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let v = |di: usize, dj: usize, dk: usize| vid(i + di, j + dj, k + dk);
                // Outward-oriented quads of the hexahedron (i,j,k).
                cell_faces.push(vec![
                    vec![v(0, 0, 0), v(0, 1, 0), v(1, 1, 0), v(1, 0, 0)], // z-
                    vec![v(0, 0, 1), v(1, 0, 1), v(1, 1, 1), v(0, 1, 1)], // z+
                    vec![v(0, 0, 0), v(1, 0, 0), v(1, 0, 1), v(0, 0, 1)], // y-
                    vec![v(0, 1, 0), v(0, 1, 1), v(1, 1, 1), v(1, 1, 0)], // y+
                    vec![v(0, 0, 0), v(0, 0, 1), v(0, 1, 1), v(0, 1, 0)], // x-
                    vec![v(1, 0, 0), v(1, 1, 0), v(1, 1, 1), v(1, 0, 1)], // x+
                ]);
            }
        }
    }
    Mesh::from_polyhedra(vertices, cell_faces, Some(domain.volume()))
}

/// Generates a conforming tetrahedral mesh of `domain` by splitting each of
/// the `n^3` grid cells into six tetrahedra around the main diagonal.
/// Interior grid vertices are displaced by a deterministic, seeded jitter of
/// up to `jitter` times the grid spacing, which breaks the structured
/// symmetry while keeping all cell volumes positive (the displacement is
/// capped at 0.3 internally, well below the flip threshold).
pub fn generate_tet_mesh(n: usize, domain: Aabb, jitter: f64, seed: u64) -> Result<Mesh> {
    if n == 0 {
        return Err(Error::InvalidArgument("resolution must be >= 1".into()));
    }
    let (mut vertices, vid) = grid_vertices(n, &domain);
    if jitter > 0.0 {
        let amp = jitter.min(0.3);
        let d = domain.max - domain.min;
        let h = Vec3::new(d.x / n as f64, d.y / n as f64, d.z / n as f64);
        for i in 1..n {
            for j in 1..n {
                for k in 1..n {
                    let idx = vid(i, j, k) as usize;
                    let mut rng = SplitMix64::new(seed ^ (idx as u64).wrapping_mul(0x9E37_79B9));
                    let off = Vec3::new(
                        (2.0 * rng.next_f64() - 1.0) * amp * h.x,
                        (2.0 * rng.next_f64() - 1.0) * amp * h.y,
                        (2.0 * rng.next_f64() - 1.0) * amp * h.z,
                    );
                    vertices[idx] += off;
                }
            }
        }
    }

    // Six tetrahedra per cube, all sharing the diagonal v000-v111. The same
    // template in every cube yields a conforming triangulation.
    const PATHS: [[usize; 3]; 6] = [
        [0, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ];
    let mut tets: Vec<[u32; 4]> = Vec::with_capacity(6 * n * n * n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for path in PATHS {
                    let mut corner = [0usize; 3];
                    let mut quad = [0u32; 4];
                    quad[0] = vid(i, j, k);
                    for (step, &axis) in path.iter().enumerate() {
                        corner[axis] = 1;
                        quad[step + 1] = vid(i + corner[0], j + corner[1], k + corner[2]);
                    }
                    tets.push(quad);
                }
            }
        }
    }
    tet_mesh_from_arrays(vertices, tets, Some(domain.volume()))
}

/// Assembles a mesh from tetrahedron connectivity, fixing inverted elements
/// by swapping two vertices.
pub fn tet_mesh_from_arrays(
    vertices: Vec<Vec3>,
    mut tets: Vec<[u32; 4]>,
    expected_volume: Option<f64>,
) -> Result<Mesh> {
    for t in &mut tets {
        let [a, b, c, d] = [
            vertices[t[0] as usize],
            vertices[t[1] as usize],
            vertices[t[2] as usize],
            vertices[t[3] as usize],
        ];
        if (b - a).cross(&(c - a)).dot(&(d - a)) < 0.0 {
            t.swap(1, 2);
        }
    }
    let cell_faces = tets.iter().map(|t| tet_faces(*t)).collect();
    Mesh::from_polyhedra(vertices, cell_faces, expected_volume)
}

/// Outward-oriented triangular faces of a positively oriented tetrahedron.
pub(super) fn tet_faces(t: [u32; 4]) -> Vec<Vec<u32>> {
    vec![
        vec![t[0], t[2], t[1]],
        vec![t[0], t[1], t[3]],
        vec![t[1], t[2], t[3]],
        vec![t[2], t[0], t[3]],
    ]
}

#[allow(clippy::type_complexity)]
fn grid_vertices(n: usize, domain: &Aabb) -> (Vec<Vec3>, impl Fn(usize, usize, usize) -> u32) {
    let m = n + 1;
    let d = domain.max - domain.min;
    let mut vertices = Vec::with_capacity(m * m * m);
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                vertices.push(Vec3::new(
                    domain.min.x + d.x * i as f64 / n as f64,
                    domain.min.y + d.y * j as f64 / n as f64,
                    domain.min.z + d.z * k as f64 / n as f64,
                ));
            }
        }
    }
    (vertices, move |i, j, k| ((i * m + j) * m + k) as u32)
}
