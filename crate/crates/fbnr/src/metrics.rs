//! Reconstruction quality measures: area-weighted normal alignment,
//! mesh-global symmetric volume difference, and convergence-order fits.

use std::collections::BTreeMap;

use crate::mesh::Mesh;
use crate::positioning::position_plane;
use crate::reconstruct::{ReconstructionResult, Status};
use crate::surfaces::{Hypersurface, VolumeFractionField};
use crate::truncation::{symmetric_volume_difference, truncate_with_gradient, Plane};
use crate::{Error, Result, EPS_ALPHA};

/// An error measure sampled over increasing resolutions together with its
/// fitted convergence order.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ConvergenceSeries {
    /// `(resolution measure, error)` pairs, resolutions strictly increasing.
    pub points: Vec<(f64, f64)>,
    pub fitted_order: f64,
}

impl ConvergenceSeries {
    pub fn fit(points: Vec<(f64, f64)>) -> Result<ConvergenceSeries> {
        let fitted_order = convergence_order(&points)?;
        Ok(ConvergenceSeries {
            points,
            fitted_order,
        })
    }
}

/// Aggregated value with the number of interface cells that had no
/// reconstruction result and were excluded.
#[derive(Debug, Clone, Copy)]
pub struct Aggregate {
    pub value: f64,
    pub missing: usize,
    /// Cells included in the average.
    pub count: usize,
    /// Included cells whose reconstruction ended degenerate (their last
    /// iterate still enters the average).
    pub degenerate: usize,
}

/// Area-weighted average normal alignment `<|1 - <n_rec, n_ref>|>` over the
/// data-wise intersected cells. The weight of each cell is the area of its
/// reconstructed plane patch, `d alpha/d s * |cell|`.
pub fn normal_alignment(
    mesh: &Mesh,
    results: &BTreeMap<usize, ReconstructionResult>,
    field: &VolumeFractionField,
) -> Result<Aggregate> {
    let mut weighted = 0.0;
    let mut total_area = 0.0;
    let mut missing = 0;
    let mut count = 0;
    let mut degenerate = 0;
    for (k, reference) in interface_normals(field) {
        let Some(res) = results.get(&k) else {
            missing += 1;
            continue;
        };
        let plane = Plane::new(res.phi, res.theta, res.s, mesh.cells[k].centroid);
        let patch_area = truncate_with_gradient(mesh, k, &plane)?.grad.d_s * mesh.cells[k].volume;
        let dn = (1.0 - res.normal.dot(&reference)).abs();
        weighted += patch_area * dn;
        total_area += patch_area;
        count += 1;
        if res.status == Status::Degenerate {
            degenerate += 1;
        }
    }
    if total_area <= 0.0 {
        return Err(Error::InvalidArgument(
            "no interface cells with results".into(),
        ));
    }
    Ok(Aggregate {
        value: weighted / total_area,
        missing,
        count,
        degenerate,
    })
}

/// Mesh-global symmetric volume difference between the reconstructed planes
/// and reference planes of the initialization normals, both positioned to
/// the prescribed volume fraction, normalized by the volume enclosed by the
/// hypersurface.
pub fn symmetric_volume_error(
    mesh: &Mesh,
    results: &BTreeMap<usize, ReconstructionResult>,
    field: &VolumeFractionField,
    surface: &Hypersurface,
) -> Result<Aggregate> {
    // Halfspaces enclose no finite volume; the immersed volume of the field
    // takes its place as the normalizer.
    let v_sigma = surface.enclosed_volume().unwrap_or_else(|_| {
        field
            .alpha
            .iter()
            .zip(&mesh.cells)
            .map(|(a, c)| a * c.volume)
            .sum()
    });
    if v_sigma <= 0.0 {
        return Err(Error::InvalidArgument(
            "no immersed volume to normalize the symmetric difference".into(),
        ));
    }
    let mut total = 0.0;
    let mut missing = 0;
    let mut count = 0;
    let mut degenerate = 0;
    for (k, reference) in interface_normals(field) {
        let Some(res) = results.get(&k) else {
            missing += 1;
            continue;
        };
        let x_base = mesh.cells[k].centroid;
        let rec_plane = Plane::new(res.phi, res.theta, res.s, x_base);
        let (phi_ref, theta_ref) = crate::truncation::vec_to_angles(reference);
        let s_ref = position_plane(mesh, k, x_base, phi_ref, theta_ref, field.alpha[k])?;
        let ref_plane = Plane::new(phi_ref, theta_ref, s_ref, x_base);
        total += symmetric_volume_difference(mesh, k, &rec_plane, &ref_plane);
        count += 1;
        if res.status == Status::Degenerate {
            degenerate += 1;
        }
    }
    Ok(Aggregate {
        value: total / v_sigma,
        missing,
        count,
        degenerate,
    })
}

fn interface_normals(
    field: &VolumeFractionField,
) -> impl Iterator<Item = (usize, crate::Vec3)> + '_ {
    field.alpha.iter().enumerate().filter_map(|(k, &a)| {
        if (EPS_ALPHA..=1.0 - EPS_ALPHA).contains(&a) {
            field.normals[k].map(|n| (k, n))
        } else {
            None
        }
    })
}

/// Least-squares slope of `log(error)` against `log(resolution)`, negated:
/// order 2 means the error decays like the inverse square of the resolution
/// measure.
pub fn convergence_order(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::InvalidArgument(
            "convergence fit needs at least two points".into(),
        ));
    }
    for w in points.windows(2) {
        if w[1].0 <= w[0].0 {
            return Err(Error::InvalidArgument(
                "resolutions must be strictly increasing".into(),
            ));
        }
    }
    if points.iter().any(|&(r, e)| r <= 0.0 || e <= 0.0) {
        return Err(Error::InvalidArgument(
            "resolutions and errors must be positive".into(),
        ));
    }
    let n = points.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(r, e) in points {
        let (x, y) = (r.ln(), e.ln());
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    Ok(-slope)
}
