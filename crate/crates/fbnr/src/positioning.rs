//! Interface positioning: find the signed distance at which a plane of
//! fixed orientation truncates a prescribed volume fraction from a cell.
//!
//! Between consecutive projected vertex distances the volume fraction is an
//! increasing cubic polynomial of the signed distance, so a single
//! truncation determines it exactly on the containing bracket. The solver
//! walks brackets with locally quadratic steps and extracts the root of the
//! cubic once the target bracket is reached.

use crate::truncation::{truncate_profile, truncate_with_gradient, Plane};
pub use crate::truncation::CubicProfile as CubicModel;
use crate::{Error, Result, Vec3, EPS_ALPHA, ZERO_TOL};

/// Hard cap on the number of truncations; desk-scale cases need fewer than
/// five, so hitting the cap signals inconsistent geometry.
const MAX_TRUNCATIONS: usize = 50;

/// Residual tolerance for the cubic root extraction.
const ROOT_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy)]
pub struct PositionResult {
    pub s: f64,
    /// Number of cell truncations performed.
    pub truncations: usize,
    /// Residual of the cubic model at the returned position.
    pub residual: f64,
}

/// Signed distance `s*` with `alpha(s*) = alpha_target` for the plane of
/// orientation `(phi, theta)` anchored at `x_base`.
pub fn position_plane(
    mesh: &crate::mesh::Mesh,
    cell: usize,
    x_base: Vec3,
    phi: f64,
    theta: f64,
    alpha_target: f64,
) -> Result<f64> {
    position_plane_detailed(mesh, cell, x_base, phi, theta, alpha_target).map(|r| r.s)
}

pub fn position_plane_detailed(
    mesh: &crate::mesh::Mesh,
    cell: usize,
    x_base: Vec3,
    phi: f64,
    theta: f64,
    alpha_target: f64,
) -> Result<PositionResult> {
    if !(EPS_ALPHA..=1.0 - EPS_ALPHA).contains(&alpha_target) {
        return Err(Error::TargetOutsideBand {
            alpha: alpha_target,
        });
    }
    let template = Plane::new(phi, theta, 0.0, x_base);
    let brackets = projected_distances(mesh, cell, &template);
    let (s_min, s_max) = (brackets[0], *brackets.last().unwrap());

    // Bounds with known volume fractions 0 and 1.
    let mut lo = s_min;
    let mut hi = s_max;
    let mut s = spline_guess(alpha_target, s_min, s_max);
    let mut truncations = 0;

    while truncations < MAX_TRUNCATIONS {
        s = s.clamp(lo, hi);
        let prof = truncate_profile(mesh, cell, &template.with_s(s))?;
        truncations += 1;

        // Bracket containing the current iterate.
        let i = bracket_index(&brackets, s);
        let (b_lo, b_hi) = (brackets[i], brackets[i + 1]);
        let alpha_lo = prof.eval(b_lo - s).clamp(0.0, 1.0);
        let alpha_hi = prof.eval(b_hi - s).clamp(0.0, 1.0);

        const SLACK: f64 = 1e-13;
        if alpha_target >= alpha_lo - SLACK && alpha_target <= alpha_hi + SLACK {
            let root = cubic_root(&prof, s, alpha_target, b_lo, b_hi);
            return Ok(PositionResult {
                s: root.0,
                truncations,
                residual: root.1,
            });
        }

        if alpha_target < alpha_lo {
            hi = b_lo;
        } else {
            lo = b_hi;
        }

        // Locally quadratic step toward the target; bisection as safeguard.
        let next = quadratic_step(&prof, s, alpha_target, lo, hi)
            .unwrap_or(0.5 * (lo + hi));
        s = next;
    }
    Err(Error::PositioningDiverged {
        residual: f64::NAN,
        iterations: truncations,
    })
}

/// Derivatives of the positioned distance with respect to the orientation,
/// obtained by differentiating the volume constraint:
/// `d s*/d phi = -(d alpha/d phi) / (d alpha/d s)` at `s = s*`.
pub fn position_gradient(
    mesh: &crate::mesh::Mesh,
    cell: usize,
    plane: &Plane,
) -> Result<(f64, f64)> {
    let tr = truncate_with_gradient(mesh, cell, plane)?;
    if tr.grad.d_s <= ZERO_TOL {
        return Err(Error::TangentPlane);
    }
    Ok((-tr.grad.d_phi / tr.grad.d_s, -tr.grad.d_theta / tr.grad.d_s))
}

/// Sorted distinct projected vertex distances of the cell; distances closer
/// than the zero tolerance are merged. These delimit the brackets on which
/// the volume fraction is cubic.
pub fn projected_distances(mesh: &crate::mesh::Mesh, cell: usize, plane: &Plane) -> Vec<f64> {
    let n = plane.normal();
    let mut d: Vec<f64> = mesh.cells[cell]
        .vertex_indices
        .iter()
        .map(|&v| (mesh.vertex(v) - plane.x_base).dot(&n))
        .collect();
    d.sort_by(f64::total_cmp);
    d.dedup_by(|a, b| (*a - *b).abs() < ZERO_TOL);
    d
}

/// Closed-form initial guess: inverse of the cubic spline interpolation of
/// the volume fraction between the extreme projected vertex distances.
pub fn spline_guess(alpha_target: f64, s_min: f64, s_max: f64) -> f64 {
    let arg = (2.0 * alpha_target - 1.0).clamp(-1.0, 1.0);
    let u = 0.5 - ((arg.acos() - 2.0 * std::f64::consts::PI) / 3.0).cos();
    s_min + (s_max - s_min) * u
}

fn bracket_index(brackets: &[f64], s: f64) -> usize {
    let i = brackets.partition_point(|&d| d <= s);
    i.saturating_sub(1).min(brackets.len() - 2)
}

/// Root of the local quadratic model inside the admissible interval,
/// nearest the expansion point; `None` when complex, outside, or the model
/// is too flat.
fn quadratic_step(prof: &CubicModel, s: f64, target: f64, lo: f64, hi: f64) -> Option<f64> {
    let f0 = prof.alpha - target;
    let (d1, d2) = (prof.d1, prof.d2);
    let admissible = |z: &f64| *z > lo && *z < hi;
    if d2.abs() < 1e-300 {
        if d1.abs() < 1e-300 {
            return None;
        }
        return Some(s - f0 / d1).filter(admissible);
    }
    let disc = d1 * d1 - 2.0 * d2 * f0;
    if disc < 0.0 {
        return None;
    }
    let sq = disc.sqrt();
    let mut roots = [s + (-d1 + sq) / d2, s + (-d1 - sq) / d2];
    roots.sort_by(|a, b| (a - s).abs().total_cmp(&(b - s).abs()));
    roots.into_iter().find(admissible)
}

/// Safeguarded Newton iteration on the cubic within `[b_lo, b_hi]`.
fn cubic_root(prof: &CubicModel, s: f64, target: f64, b_lo: f64, b_hi: f64) -> (f64, f64) {
    let f = |z: f64| prof.eval(z - s) - target;
    let mut lo = b_lo;
    let mut hi = b_hi;
    // The cubic is nondecreasing on the bracket.
    let mut z = 0.5 * (lo + hi);
    let mut fz = f(z);
    for _ in 0..100 {
        if fz.abs() <= ROOT_TOL {
            break;
        }
        if fz > 0.0 {
            hi = z;
        } else {
            lo = z;
        }
        let d = prof.eval_deriv(z - s);
        let newton = z - fz / d;
        z = if d > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo < f64::EPSILON * (hi.abs() + lo.abs() + 1.0) {
            break;
        }
        fz = f(z);
    }
    (z, fz.abs())
}
