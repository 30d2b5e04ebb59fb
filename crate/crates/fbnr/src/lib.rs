//! Geometric Volume-of-Fluid toolkit for reconstructing PLIC interface
//! normals from volume fractions on unstructured polyhedral meshes.
//!
//! The central entry point is [`reconstruct::reconstruct_field`], which runs
//! a volume-conserving Gauss-Newton minimization over plane orientations for
//! every interface cell of a mesh. The supporting layers are usable on their
//! own:
//!
//! * [`mesh`]: polyhedral meshes (generated cuboid/tetrahedral grids or
//!   legacy VTK files), neighborhoods and point/edge classification,
//! * [`truncation`]: volume fractions, immersed areas and analytic
//!   derivatives for a cell cut by a plane, plus polyhedron clipping,
//! * [`positioning`]: the implicit-bracketing solver for the signed
//!   distance that matches a prescribed volume fraction,
//! * [`surfaces`]: benchmark hypersurfaces and volume-fraction
//!   initialization,
//! * [`initguess`]: least-squares and Gauss-Green gradient estimators used
//!   both as initial guesses and as standalone baselines,
//! * [`metrics`]: normal-alignment and symmetric-volume-difference error
//!   measures and convergence-order fits.
//!
//! # Example
//!
//! Reconstructing the boundary of a halfspace from its exact volume
//! fractions recovers the reference normal in every interface cell:
//!
//! ```
//! use fbnr::mesh::{generate_cuboid_mesh, Aabb, StencilKind};
//! use fbnr::reconstruct::{reconstruct_field, ReconConfig, Scheme};
//! use fbnr::surfaces::{init_volume_fractions, Hypersurface};
//! use fbnr::Vec3;
//!
//! let domain = Aabb {
//!     min: Vec3::new(-1.0, -1.0, -1.0),
//!     max: Vec3::new(1.0, 1.0, 1.0),
//! };
//! let mesh = generate_cuboid_mesh(4, domain)?;
//! let normal = Vec3::new(1.0, -3.0, 6.0).normalize();
//! let surface = Hypersurface::halfspace(Vec3::new(0.45, 0.54, 0.43), normal);
//! let field = init_volume_fractions(&mesh, &surface, 0)?;
//!
//! let config = ReconConfig::for_stencil(StencilKind::Vertex);
//! let sweep = reconstruct_field(&mesh, &field, &config, Scheme::Fbnr);
//! assert!(!sweep.results.is_empty());
//! for result in sweep.results.values() {
//!     assert!((1.0 - result.normal.dot(&normal)).abs() < 1e-6);
//! }
//! # Ok::<(), fbnr::Error>(())
//! ```

pub mod initguess;
pub mod mesh;
pub mod metrics;
pub mod positioning;
pub mod reconstruct;
pub mod rng;
pub mod surfaces;
pub mod truncation;

use thiserror::Error;

/// Vector type used throughout the crate.
pub type Vec3 = nalgebra::Vector3<f64>;

/// Points with absolute level-set value below this are treated as lying on
/// the plane. Mesh sizes are O(1), so an absolute tolerance is appropriate.
pub const ZERO_TOL: f64 = 1e-14;

/// Threshold on `1 - <n_f, n>^2` below which a face counts as parallel to
/// the cutting plane and the edge-coefficient division is skipped.
pub const PARALLEL_TOL: f64 = 1e-12;

/// Volume fractions within `EPS_ALPHA` of 0 or 1 mark bulk cells; the
/// interface band is `[EPS_ALPHA, 1 - EPS_ALPHA]`.
pub const EPS_ALPHA: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("vtk parse error (line {line}): {message}")]
    VtkParse { line: usize, message: String },
    #[error("unsupported vtk cell type {0} (only tetrahedra (10) and hexahedra (12))")]
    UnsupportedCellType(i64),
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("cell {cell} has non-positive volume {volume:.3e}")]
    NonPositiveVolume { cell: usize, volume: f64 },
    #[error("degenerate cell: zero volume")]
    DegenerateCell,
    #[error("volume fraction {alpha:.3e} outside the interface band")]
    TargetOutsideBand { alpha: f64 },
    #[error("positioning did not converge (residual {residual:.3e} after {iterations} truncations)")]
    PositioningDiverged { residual: f64, iterations: usize },
    #[error("plane is tangent to the cell: the area derivative vanishes")]
    TangentPlane,
    #[error("plane does not intersect the cell")]
    EmptyIntersection,
    #[error("stencil of cell {cell} carries no usable direction (uniform data)")]
    UnreconstructableStencil { cell: usize },
    #[error("surface error: {0}")]
    Surface(String),
    #[error("{0}")]
    InvalidArgument(String),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
