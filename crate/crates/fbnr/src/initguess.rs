//! Volume-fraction gradient estimators used to seed the minimization and as
//! standalone baseline reconstructions: least-squares fits over centroid
//! differences (with or without bulk cells) and the node-averaged
//! Gauss-Green evaluation.

use nalgebra::Matrix3;

use crate::mesh::{Mesh, Stencil};
use crate::surfaces::VolumeFractionField;
use crate::truncation::vec_to_angles;
use crate::{Error, Result, Vec3, EPS_ALPHA};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GradientMethod {
    /// Least squares over all neighbors.
    Lse,
    /// Least squares excluding data-wise bulk neighbors.
    LseStar,
    /// Divergence theorem with node-averaged face values.
    GaussGreen,
}

#[derive(Debug, Clone)]
pub struct GradientEstimate {
    /// Estimated spatial gradient of the volume fraction.
    pub gradient: Vec3,
    pub method: GradientMethod,
    /// Set when the least-squares matrix is numerically singular (coplanar
    /// usable centroids) or the stencil is too small.
    pub singular: bool,
    pub det_a: f64,
}

/// Least-squares estimate of the volume-fraction gradient in the stencil
/// center from centroid and volume-fraction differences. With
/// `use_bulk = false` (the starred variant), bulk members are excluded.
pub fn lse_gradient(
    mesh: &Mesh,
    stencil: &Stencil,
    field: &VolumeFractionField,
    use_bulk: bool,
) -> GradientEstimate {
    let method = if use_bulk {
        GradientMethod::Lse
    } else {
        GradientMethod::LseStar
    };
    let center = stencil.center;
    let x0 = mesh.cells[center].centroid;
    let a0 = field.alpha[center];

    let mut mat = Matrix3::zeros();
    let mut rhs = Vec3::zeros();
    let mut usable = 0usize;
    for &k in stencil.neighbors() {
        if !use_bulk && field.is_bulk(k) {
            continue;
        }
        let dx = mesh.cells[k].centroid - x0;
        let da = field.alpha[k] - a0;
        mat += dx * dx.transpose();
        rhs += dx * da;
        usable += 1;
    }

    let det_a = mat.determinant();
    let norm = mat.norm();
    let singular = usable < 3 || det_a.abs() < 1e-16 * norm.powi(3).max(f64::MIN_POSITIVE);
    // A rank-deficient system still yields a usable direction through the
    // least-norm solution; the caller resolves the sign ambiguity.
    let gradient = mat
        .svd(true, true)
        .solve(&rhs, 1e-14 * norm.max(1e-300))
        .unwrap_or_else(|_| Vec3::zeros());
    GradientEstimate {
        gradient,
        method,
        singular,
        det_a,
    }
}

/// Centroid connection from the member with the smallest volume fraction to
/// the one with the largest; ties break toward the lowest cell label.
/// `None` when all members carry the same value.
fn extreme_span(mesh: &Mesh, stencil: &Stencil, field: &VolumeFractionField) -> Option<Vec3> {
    let mut by_label: Vec<usize> = stencil.members.clone();
    by_label.sort_unstable();
    let mut min_k = by_label[0];
    let mut max_k = by_label[0];
    for &k in &by_label[1..] {
        if field.alpha[k] < field.alpha[min_k] {
            min_k = k;
        }
        if field.alpha[k] > field.alpha[max_k] {
            max_k = k;
        }
    }
    if field.alpha[min_k] == field.alpha[max_k] {
        return None;
    }
    Some(mesh.cells[max_k].centroid - mesh.cells[min_k].centroid)
}

/// Flips `direction` so that it points from the centroid of the member with
/// the smallest volume fraction toward the one with the largest (the
/// outward sense of a gradient). Returns the fixed vector and a flag that is
/// set when the data is uniform and no fix is possible.
pub fn orientation_fix(
    direction: Vec3,
    mesh: &Mesh,
    stencil: &Stencil,
    field: &VolumeFractionField,
) -> (Vec3, bool) {
    match extreme_span(mesh, stencil, field) {
        None => (direction, true),
        Some(span) if direction.dot(&span) < 0.0 => (-direction, false),
        Some(_) => (direction, false),
    }
}

/// Gauss-Green gradient: the cell average of the gradient equals the sum of
/// outward face normals weighted by face-average volume fractions. Face
/// averages are means of node averages; a node average is the mean of the
/// volume fractions of the stencil cells containing that node. A node whose
/// incident cells are not all stencil members is averaged over the covered
/// subset (at least the center) and sets the coverage flag.
pub fn gauss_green_gradient(
    mesh: &Mesh,
    stencil: &Stencil,
    field: &VolumeFractionField,
) -> (GradientEstimate, bool) {
    let center = stencil.center;
    let mut members = stencil.members.clone();
    members.sort_unstable();

    let mut gradient = Vec3::zeros();
    let mut uncovered = false;
    for fr in &mesh.cells[center].face_refs {
        let face = &mesh.faces[fr.face as usize];
        let mut face_avg = 0.0;
        for &v in &face.vertex_indices {
            let mut node_avg = 0.0;
            let mut count = 0usize;
            for &c in mesh.cells_at_vertex(v) {
                if members.binary_search(&(c as usize)).is_ok() {
                    node_avg += field.alpha[c as usize];
                    count += 1;
                } else {
                    uncovered = true;
                }
            }
            if count == 0 {
                node_avg = field.alpha[center];
                count = 1;
            }
            face_avg += node_avg / count as f64;
        }
        face_avg /= face.vertex_indices.len() as f64;
        gradient += face.unit_normal * (fr.orientation as f64 * face.area * face_avg);
    }
    gradient /= mesh.cells[center].volume;
    (
        GradientEstimate {
            gradient,
            method: GradientMethod::GaussGreen,
            singular: false,
            det_a: 0.0,
        },
        uncovered,
    )
}

/// Initial orientation for the minimization: the normal is the negated,
/// orientation-fixed gradient estimate of the chosen scheme, converted to
/// spherical angles. Falls back to the direction between the extreme
/// volume-fraction centroids when the estimate is singular or vanishes.
pub fn initial_orientation(
    mesh: &Mesh,
    stencil: &Stencil,
    field: &VolumeFractionField,
    method: GradientMethod,
) -> Result<(f64, f64)> {
    let estimate = match method {
        GradientMethod::Lse => lse_gradient(mesh, stencil, field, true),
        GradientMethod::LseStar => lse_gradient(mesh, stencil, field, false),
        GradientMethod::GaussGreen => gauss_green_gradient(mesh, stencil, field).0,
    };

    let direction = if !estimate.singular && estimate.gradient.norm() >= EPS_ALPHA {
        orientation_fix(estimate.gradient, mesh, stencil, field).0
    } else {
        extreme_span(mesh, stencil, field)
            .filter(|s| s.norm() > 0.0)
            .ok_or(Error::UnreconstructableStencil {
                cell: stencil.center,
            })?
    };

    let normal = -direction.normalize();
    Ok(vec_to_angles(normal))
}
