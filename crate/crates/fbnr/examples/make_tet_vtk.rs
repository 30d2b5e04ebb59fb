//! Writes a jittered tetrahedral mesh of the benchmark domain [-1,1]^3 as a
//! legacy VTK file, ready for `fbnr --mesh vtk:<path>`.
//!
//! Usage: `cargo run --example make_tet_vtk -- <n> <out.vtk> [jitter] [seed]`

use fbnr::mesh::{generate_tet_mesh, write_vtk_tets, Aabb};
use fbnr::Vec3;

fn main() {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(4);
    let out = args.next().unwrap_or_else(|| "tets.vtk".into());
    let jitter: f64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(0.15);
    let seed: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(2024);
    let domain = Aabb {
        min: Vec3::new(-1.0, -1.0, -1.0),
        max: Vec3::new(1.0, 1.0, 1.0),
    };
    let mesh = generate_tet_mesh(n, domain, jitter, seed).unwrap();
    let tets: Vec<[u32; 4]> = mesh
        .cells
        .iter()
        .map(|c| {
            let v = &c.vertex_indices;
            [v[0], v[1], v[2], v[3]]
        })
        .collect();
    write_vtk_tets(&out, &mesh.vertices, &tets).unwrap();
    eprintln!("wrote {} tetrahedra to {}", tets.len(), out);
}
