//! Shared fixtures for the integration suites: an independent polyhedron
//! clipping oracle and random cell generators.

#![allow(dead_code)]

pub mod oracle;

use fbnr::mesh::{generate_cuboid_mesh, Aabb, Mesh};
use fbnr::rng::SplitMix64;
use fbnr::truncation::{Plane, Polyhedron};
use fbnr::Vec3;

pub fn sym_box() -> Aabb {
    Aabb {
        min: Vec3::new(-1.0, -1.0, -1.0),
        max: Vec3::new(1.0, 1.0, 1.0),
    }
}

pub fn unit_box() -> Aabb {
    Aabb {
        min: Vec3::zeros(),
        max: Vec3::new(1.0, 1.0, 1.0),
    }
}

pub fn unit_cube_mesh() -> Mesh {
    generate_cuboid_mesh(1, unit_box()).unwrap()
}

/// The reference halfspace of the benchmark.
pub fn reference_halfspace() -> fbnr::surfaces::Hypersurface {
    fbnr::surfaces::Hypersurface::halfspace(reference_point(), reference_normal())
}

pub fn reference_normal() -> Vec3 {
    Vec3::new(1.0, -3.0, 6.0) / 46.0_f64.sqrt()
}

pub fn reference_point() -> Vec3 {
    Vec3::new(0.4534, 0.5442, 0.4330)
}

pub fn random_unit_vector(rng: &mut SplitMix64) -> Vec3 {
    loop {
        let v = Vec3::new(
            rng.range(-1.0, 1.0),
            rng.range(-1.0, 1.0),
            rng.range(-1.0, 1.0),
        );
        let n = v.norm();
        if n > 1e-3 && n <= 1.0 {
            return v / n;
        }
    }
}

/// Random single-tetrahedron mesh with volume bounded away from zero.
pub fn random_tet_cell(rng: &mut SplitMix64) -> Mesh {
    loop {
        let v: Vec<Vec3> = (0..4)
            .map(|_| {
                Vec3::new(
                    rng.range(-1.0, 1.0),
                    rng.range(-1.0, 1.0),
                    rng.range(-1.0, 1.0),
                )
            })
            .collect();
        let vol = (v[1] - v[0]).cross(&(v[2] - v[0])).dot(&(v[3] - v[0])) / 6.0;
        if vol.abs() < 2e-2 {
            continue;
        }
        let t: [usize; 4] = if vol > 0.0 { [0, 1, 2, 3] } else { [0, 2, 1, 3] };
        let f = |a: usize, b: usize, c: usize| vec![t[a] as u32, t[b] as u32, t[c] as u32];
        return Mesh::single_cell(v, vec![f(0, 2, 1), f(0, 1, 3), f(1, 2, 3), f(2, 0, 3)])
            .unwrap();
    }
}

/// Random parallelepiped: an affine image of the unit cube, so all faces
/// stay planar.
pub fn random_hex_cell(rng: &mut SplitMix64) -> Mesh {
    loop {
        let origin = Vec3::new(
            rng.range(-0.5, 0.5),
            rng.range(-0.5, 0.5),
            rng.range(-0.5, 0.5),
        );
        let cols: Vec<Vec3> = (0..3)
            .map(|_| {
                Vec3::new(
                    rng.range(-1.0, 1.0),
                    rng.range(-1.0, 1.0),
                    rng.range(-1.0, 1.0),
                )
            })
            .collect();
        let det = cols[0].cross(&cols[1]).dot(&cols[2]);
        if det.abs() < 5e-2 {
            continue;
        }
        let (a, b, c) = if det > 0.0 {
            (cols[0], cols[1], cols[2])
        } else {
            (cols[1], cols[0], cols[2])
        };
        let corner = |i: usize, j: usize, k: usize| {
            origin + a * i as f64 + b * j as f64 + c * k as f64
        };
        let vertices = vec![
            corner(0, 0, 0),
            corner(1, 0, 0),
            corner(1, 1, 0),
            corner(0, 1, 0),
            corner(0, 0, 1),
            corner(1, 0, 1),
            corner(1, 1, 1),
            corner(0, 1, 1),
        ];
        let faces = vec![
            vec![0, 3, 2, 1],
            vec![4, 5, 6, 7],
            vec![0, 1, 5, 4],
            vec![1, 2, 6, 5],
            vec![2, 3, 7, 6],
            vec![3, 0, 4, 7],
        ];
        return Mesh::single_cell(vertices, faces).unwrap();
    }
}

/// Random convex polyhedron: the unit cube clipped by a few planes through
/// its interior. Rejects results with sliver faces so that mesh validation
/// tolerances hold.
pub fn random_convex_cell(rng: &mut SplitMix64) -> Mesh {
    'outer: loop {
        let cube = unit_cube_mesh();
        let mut poly = Polyhedron::from_cell(&cube, 0);
        let cuts = 2 + (rng.next_u64() % 3) as usize;
        for _ in 0..cuts {
            let n = random_unit_vector(rng);
            let point = Vec3::new(
                rng.range(0.25, 0.75),
                rng.range(0.25, 0.75),
                rng.range(0.25, 0.75),
            );
            let plane = Plane::from_normal(point, n, 0.0);
            match poly.clip_halfspace(&plane) {
                Some(clip) => poly = clip.poly,
                None => continue 'outer,
            }
        }
        if poly.volume() < 5e-2 {
            continue;
        }
        // Reject slivers: short edges or tiny faces stress the planarity
        // tolerance without adding coverage.
        for face in &poly.faces {
            for m in 0..face.len() {
                let a = poly.vertices[face[m] as usize];
                let b = poly.vertices[face[(m + 1) % face.len()] as usize];
                if (a - b).norm() < 1e-3 {
                    continue 'outer;
                }
            }
        }
        match Mesh::single_cell(poly.vertices.clone(), poly.faces.clone()) {
            Ok(mesh) => return mesh,
            Err(_) => continue,
        }
    }
}

/// A cell drawn from the tetra / hexa / convex-polyhedron mix.
pub fn random_cell(rng: &mut SplitMix64, index: usize) -> Mesh {
    match index % 3 {
        0 => random_tet_cell(rng),
        1 => random_hex_cell(rng),
        _ => random_convex_cell(rng),
    }
}

/// Random plane whose signed distance keeps the cut inside the cell's
/// vertex-projection range with the given margin fractions.
pub fn random_cutting_plane(rng: &mut SplitMix64, mesh: &Mesh, margin: f64) -> Plane {
    let phi = rng.range(0.0, std::f64::consts::TAU);
    let theta = rng.range(0.02, std::f64::consts::PI - 0.02);
    let x_base = mesh.cells[0].centroid;
    let template = Plane::new(phi, theta, 0.0, x_base);
    let n = template.normal();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &v in &mesh.cells[0].vertex_indices {
        let d = (mesh.vertex(v) - x_base).dot(&n);
        lo = lo.min(d);
        hi = hi.max(d);
    }
    let span = hi - lo;
    Plane::new(
        phi,
        theta,
        rng.range(lo + margin * span, hi - margin * span),
        x_base,
    )
}

/// Finite-difference window guard: the plane clears every vertex of the
/// cell(s) by more than the step the window can move it.
pub fn clears_vertices(mesh: &Mesh, cells: &[usize], plane: &Plane, margin: f64) -> bool {
    cells.iter().all(|&k| {
        mesh.cells[k]
            .vertex_indices
            .iter()
            .all(|&v| plane.signed_dist(mesh.vertex(v)).abs() > margin)
    })
}
