//! Experiment description, mesh loading and the spec hash stamped into every
//! output file.

use anyhow::{bail, Context, Result};
use serde::Serialize;

use fbnr::mesh::{generate_cuboid_mesh, load_vtk, Aabb, Mesh, StencilKind};
use fbnr::reconstruct::{ReconConfig, Scheme};
use fbnr::surfaces::Hypersurface;
use fbnr::Vec3;

use crate::CommonArgs;

/// Everything that determines an experiment's output, serialized
/// canonically and hashed so that reruns are traceable.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentSpec {
    pub scheme: Scheme,
    pub mesh: String,
    pub stencil: StencilKind,
    pub surface: Hypersurface,
    pub depth: usize,
    pub seed: Option<u64>,
    pub config: ReconConfig,
}

impl ExperimentSpec {
    pub fn new(
        common: &CommonArgs,
        scheme: Scheme,
        mesh_name: &str,
        surface: &Hypersurface,
        config: &ReconConfig,
    ) -> ExperimentSpec {
        ExperimentSpec {
            scheme,
            mesh: mesh_name.to_string(),
            stencil: common.stencil,
            surface: surface.clone(),
            depth: common.depth,
            seed: common.seed,
            config: *config,
        }
    }

    /// FNV-1a hash of the canonical JSON serialization.
    pub fn hash(&self) -> String {
        let text = serde_json::to_string(self).unwrap_or_default();
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in text.bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
        format!("{h:016x}")
    }
}

/// The benchmark domain.
pub fn benchmark_domain() -> Aabb {
    Aabb {
        min: Vec3::new(-1.0, -1.0, -1.0),
        max: Vec3::new(1.0, 1.0, 1.0),
    }
}

/// Loads a mesh source of the form `cube:N` or `vtk:path`.
pub fn load_mesh(name: &str) -> Result<Mesh> {
    match name.split_once(':') {
        Some(("cube", n)) => {
            let n: usize = n.parse().with_context(|| format!("resolution in `{name}`"))?;
            Ok(generate_cuboid_mesh(n, benchmark_domain())?)
        }
        Some(("vtk", path)) => Ok(load_vtk(path)?),
        _ => bail!("mesh source `{name}` is neither cube:N nor vtk:path"),
    }
}

/// Filesystem-safe tag of a mesh source, used in output file names.
pub fn file_tag(name: &str) -> String {
    match name.split_once(':') {
        Some(("cube", n)) => format!("cube-{n}"),
        Some(("vtk", path)) => {
            let stem = std::path::Path::new(path)
                .file_stem()
                .and_then(|s| s.to_str())
                .unwrap_or("mesh");
            format!("vtk-{stem}")
        }
        _ => name.replace(['/', ':', '\\'], "-"),
    }
}

/// Cartesian product of the requested schemes and meshes.
pub fn mesh_matrix(common: &CommonArgs) -> Result<Vec<(Scheme, String, Mesh)>> {
    let mut out = Vec::new();
    for scheme in &common.schemes {
        for name in &common.meshes {
            out.push((*scheme, name.clone(), load_mesh(name)?));
        }
    }
    Ok(out)
}
