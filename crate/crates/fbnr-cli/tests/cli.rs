//! End-to-end checks of the command-line harness.

use std::fs;
use std::path::Path;
use std::process::Command;

fn fbnr() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fbnr"))
}

fn read(path: &Path) -> String {
    fs::read_to_string(path).unwrap_or_else(|e| panic!("reading {}: {e}", path.display()))
}

#[test]
fn init_writes_field_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let surface = dir.path().join("sphere.json");
    fs::write(
        &surface,
        r#"{"kind":"sphere","center":[0.0,0.0,0.0],"radius":0.8}"#,
    )
    .unwrap();
    let status = fbnr()
        .args(["init", "--mesh", "cube:4", "--depth", "2"])
        .arg("--surface")
        .arg(&surface)
        .arg("--out")
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(status.success());

    let csv = read(&dir.path().join("field.csv"));
    assert!(csv.starts_with("# units:"));
    assert!(csv.contains("spec_hash:"));
    assert!(csv.lines().nth(1).unwrap().starts_with("cell_id,alpha,nx,ny,nz"));
    assert_eq!(csv.lines().count(), 2 + 64);
    let json: serde_json::Value =
        serde_json::from_str(&read(&dir.path().join("field.json"))).unwrap();
    assert_eq!(json["alpha"].as_array().unwrap().len(), 64);
}

#[test]
fn halfspace_benchmark_summary() {
    let dir = tempfile::tempdir().unwrap();
    let status = fbnr()
        .args(["halfspace", "--mesh", "cube:5", "--stencil", "vertex", "--scheme", "fbnr"])
        .arg("--out")
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    let summary: serde_json::Value =
        serde_json::from_str(&read(&dir.path().join("summary_fbnr_cube-5.json"))).unwrap();
    assert_eq!(summary["outliers"].as_array().unwrap().len(), 0);
    assert!(summary["max_error"].as_f64().unwrap() <= 1e-12);
    let results = read(&dir.path().join("results_fbnr_cube-5.csv"));
    assert!(results
        .lines()
        .nth(1)
        .unwrap()
        .starts_with("cell_id,phi,theta,s,nx,ny,nz,error,grad_norm,iters,status"));
}

#[test]
fn errormap_emits_grid_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    // Find an interface cell from the init output first.
    let status = fbnr()
        .args(["init", "--mesh", "cube:5"])
        .arg("--out")
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    let field = read(&dir.path().join("field.csv"));
    let cell: usize = field
        .lines()
        .skip(2)
        .find_map(|line| {
            let mut parts = line.split(',');
            let id: usize = parts.next()?.parse().ok()?;
            let alpha: f64 = parts.next()?.parse().ok()?;
            (alpha > 1e-9 && alpha < 1.0 - 1e-9).then_some(id)
        })
        .expect("an interface cell");

    let status = fbnr()
        .args(["errormap", "--mesh", "cube:5", "--grid-half-res", "12"])
        .args(["--cell", &cell.to_string()])
        .arg("--out")
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    let map = read(&dir.path().join("map.csv"));
    // Two header lines plus the 2M x M grid.
    assert_eq!(map.lines().count(), 2 + 2 * 12 * 12);
    assert!(read(&dir.path().join("trace.csv")).contains("gauss-newton"));
    assert!(read(&dir.path().join("stencil.csv")).lines().count() > 3);
}

#[test]
fn convergence_reruns_are_byte_identical() {
    let surface_dir = tempfile::tempdir().unwrap();
    let surface = surface_dir.path().join("sphere.json");
    fs::write(
        &surface,
        r#"{"kind":"sphere","center":[0.0,0.0,0.0],"radius":0.8}"#,
    )
    .unwrap();
    let mut outputs = Vec::new();
    for _ in 0..2 {
        let dir = tempfile::tempdir().unwrap();
        let status = fbnr()
            .args(["convergence", "--mesh", "cube:5", "--mesh", "cube:7", "--depth", "2"])
            .args(["--scheme", "fbnr", "--scheme", "lse"])
            .arg("--surface")
            .arg(&surface)
            .arg("--out")
            .arg(dir.path())
            .status()
            .unwrap();
        assert!(status.success());
        outputs.push(read(&dir.path().join("convergence.csv")));
    }
    assert_eq!(outputs[0], outputs[1]);
    assert!(outputs[0].lines().count() >= 2 + 4);
}

#[test]
fn halfspace_on_ingested_vtk_mesh() {
    let dir = tempfile::tempdir().unwrap();
    let domain = fbnr::mesh::Aabb {
        min: fbnr::Vec3::new(-1.0, -1.0, -1.0),
        max: fbnr::Vec3::new(1.0, 1.0, 1.0),
    };
    let mesh = fbnr::mesh::generate_tet_mesh(4, domain, 0.15, 2024).unwrap();
    let tets: Vec<[u32; 4]> = mesh
        .cells
        .iter()
        .map(|c| {
            let v = &c.vertex_indices;
            [v[0], v[1], v[2], v[3]]
        })
        .collect();
    let vtk = dir.path().join("tets.vtk");
    fbnr::mesh::write_vtk_tets(&vtk, &mesh.vertices, &tets).unwrap();

    let status = fbnr()
        .arg("halfspace")
        .arg("--mesh")
        .arg(format!("vtk:{}", vtk.display()))
        .args(["--stencil", "edge"])
        .arg("--out")
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    let summaries: Vec<_> = fs::read_dir(dir.path())
        .unwrap()
        .filter_map(|e| {
            let p = e.unwrap().path();
            p.file_name()?.to_str()?.starts_with("summary_").then_some(p)
        })
        .collect();
    assert_eq!(summaries.len(), 1);
    let summary: serde_json::Value = serde_json::from_str(&read(&summaries[0])).unwrap();
    assert_eq!(summary["outliers"].as_array().unwrap().len(), 0);
}

#[test]
fn invalid_arguments_exit_nonzero() {
    assert!(!fbnr()
        .args(["halfspace", "--mesh", "pyramid:3"])
        .output()
        .unwrap()
        .status
        .success());
    assert!(!fbnr()
        .args(["convergence", "--mesh", "cube:4", "--scheme", "elvira"])
        .output()
        .unwrap()
        .status
        .success());
    // Convergence needs an explicit surface.
    assert!(!fbnr()
        .args(["convergence", "--mesh", "cube:4"])
        .output()
        .unwrap()
        .status
        .success());
}
