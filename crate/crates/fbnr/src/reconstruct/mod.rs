//! Interface normal reconstruction: a damped, box-clipped Gauss-Newton
//! minimization of the volume-fraction mismatch over the plane orientation,
//! with the volume constraint in the center cell enforced implicitly through
//! the positioned signed distance.

use std::collections::BTreeMap;

use nalgebra::{Matrix2, Vector2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::initguess::{initial_orientation, GradientMethod};
use crate::mesh::{build_neighborhood, Mesh, Stencil, StencilKind};
use crate::positioning::{position_gradient, position_plane};
use crate::surfaces::{interface_cells, VolumeFractionField};
use crate::truncation::{angles_to_normal, truncate, truncate_with_gradient, Plane};
use crate::{Error, Result, Vec3};

/// Reconstruction scheme selector: the Gauss-Newton minimization or one of
/// the gradient-estimate baselines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    Fbnr,
    Lse,
    LseStar,
    Gg,
}

impl std::str::FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fbnr" => Ok(Scheme::Fbnr),
            "lse" => Ok(Scheme::Lse),
            "lse-star" => Ok(Scheme::LseStar),
            "gg" => Ok(Scheme::Gg),
            other => Err(Error::InvalidArgument(format!(
                "unknown scheme `{other}` (expected fbnr, lse, lse-star or gg)"
            ))),
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Scheme::Fbnr => "fbnr",
            Scheme::Lse => "lse",
            Scheme::LseStar => "lse-star",
            Scheme::Gg => "gg",
        })
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ReconConfig {
    /// Termination threshold on the error-gradient norm.
    pub grad_tol: f64,
    pub max_iters: usize,
    /// Number of step halvings attempted in the line search.
    pub line_search_max: usize,
    /// Polar edge length of the step-clipping box.
    pub box_theta: f64,
    /// Even exponent controlling the widening of the box near the poles.
    pub box_exponent: i32,
    /// Weight of data-wise bulk members; applied on face stencils only.
    pub bulk_weight: f64,
    pub eps_alpha: f64,
    pub stencil_kind: StencilKind,
}

impl Default for ReconConfig {
    fn default() -> Self {
        ReconConfig {
            grad_tol: 1e-4,
            max_iters: 20,
            line_search_max: 6,
            box_theta: std::f64::consts::FRAC_PI_4,
            box_exponent: 12,
            bulk_weight: 1e9,
            eps_alpha: crate::EPS_ALPHA,
            stencil_kind: StencilKind::Vertex,
        }
    }
}

impl ReconConfig {
    pub fn for_stencil(kind: StencilKind) -> Self {
        ReconConfig {
            stencil_kind: kind,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StepKind {
    Init,
    GaussNewton,
    SteepestDescent,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TraceStep {
    pub phi: f64,
    pub theta: f64,
    pub error: f64,
    pub grad_norm: f64,
    pub kind: StepKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Converged,
    MaxIters,
    Degenerate,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReconstructionResult {
    pub phi: f64,
    pub theta: f64,
    pub s: f64,
    pub normal: Vec3,
    pub error: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub trace: Vec<TraceStep>,
    pub status: Status,
}

/// Per-neighbor weights: data-wise bulk members carry the penalty weight on
/// face stencils (which rarely contain more than one bulk cell) and unit
/// weight on the spatially extensive kinds. The center is excluded: it is
/// a constraint, not a penalty.
pub fn assign_weights(
    stencil: &Stencil,
    field: &VolumeFractionField,
    config: &ReconConfig,
) -> Vec<f64> {
    stencil
        .neighbors()
        .iter()
        .map(|&k| {
            if field.is_bulk(k) && stencil.kind == StencilKind::Face {
                config.bulk_weight
            } else {
                1.0
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtendOutcome {
    AlreadyHadBulk,
    Extended,
    NoBulkFound,
}

/// Dynamic stencil extension: when the stencil contains no data-wise bulk
/// cell, the neighborhood (of the same kind) of the first member by label
/// whose own neighborhood contains a bulk cell is appended.
pub fn extend_stencil(
    mesh: &Mesh,
    stencil: &Stencil,
    field: &VolumeFractionField,
) -> (Stencil, ExtendOutcome) {
    if stencil.neighbors().iter().any(|&k| field.is_bulk(k))
        || field.is_bulk(stencil.center)
    {
        return (stencil.clone(), ExtendOutcome::AlreadyHadBulk);
    }
    let mut by_label = stencil.members.clone();
    by_label.sort_unstable();
    for u in by_label {
        let extension = build_neighborhood(mesh, u, stencil.kind);
        if extension.members.iter().any(|&k| field.is_bulk(k)) {
            let mut members = stencil.members.clone();
            members.extend(extension.members);
            let center = stencil.center;
            members.retain(|&k| k != center);
            members.sort_unstable();
            members.dedup();
            members.insert(0, center);
            return (
                Stencil {
                    center,
                    members,
                    kind: stencil.kind,
                },
                ExtendOutcome::Extended,
            );
        }
    }
    (stencil.clone(), ExtendOutcome::NoBulkFound)
}

/// Unconstrained error: half the weighted squared mismatch of induced and
/// prescribed volume fractions over the non-center members, with the plane
/// positioned to conserve the center volume fraction. Returns the error and
/// the positioned signed distance.
pub fn error_value(
    mesh: &Mesh,
    stencil: &Stencil,
    field: &VolumeFractionField,
    weights: &[f64],
    phi: f64,
    theta: f64,
) -> Result<(f64, f64)> {
    let center = stencil.center;
    let x_base = mesh.cells[center].centroid;
    let s = position_plane(mesh, center, x_base, phi, theta, field.alpha[center])?;
    let plane = Plane::new(phi, theta, s, x_base);
    let mut error = 0.0;
    for (&k, &w) in stencil.neighbors().iter().zip(weights) {
        let alpha = truncate(mesh, k, &plane)?.alpha;
        let diff = alpha - field.alpha[k];
        error += 0.5 * w * diff * diff;
    }
    Ok((error, s))
}

#[derive(Debug, Clone)]
pub struct ErrorGradient {
    pub grad: Vector2<f64>,
    /// Gauss-Newton approximation of the Hessian (no second derivatives).
    pub hessian: Matrix2<f64>,
    pub error: f64,
    pub s: f64,
}

/// Error, gradient and Gauss-Newton Hessian at an orientation. The gradient
/// of each member fraction includes the implicit motion of the positioned
/// distance through the chain rule.
pub fn error_gradient(
    mesh: &Mesh,
    stencil: &Stencil,
    field: &VolumeFractionField,
    weights: &[f64],
    phi: f64,
    theta: f64,
) -> Result<ErrorGradient> {
    let center = stencil.center;
    let x_base = mesh.cells[center].centroid;
    let s = position_plane(mesh, center, x_base, phi, theta, field.alpha[center])?;
    let plane = Plane::new(phi, theta, s, x_base);
    let (ds_phi, ds_theta) = position_gradient(mesh, center, &plane)?;

    let mut grad = Vector2::zeros();
    let mut hessian = Matrix2::zeros();
    let mut error = 0.0;
    for (&k, &w) in stencil.neighbors().iter().zip(weights) {
        let tr = truncate_with_gradient(mesh, k, &plane)?;
        let g = if tr.degenerate_gradient {
            // One-sided analytic derivative at a near-parallel face; a plain
            // finite difference of the fraction is more trustworthy here.
            member_gradient_fd(mesh, k, &plane)?
        } else {
            tr.grad
        };
        let grad_k = Vector2::new(g.d_phi + g.d_s * ds_phi, g.d_theta + g.d_s * ds_theta);
        let diff = tr.alpha - field.alpha[k];
        grad += grad_k * (w * diff);
        hessian += grad_k * grad_k.transpose() * w;
        error += 0.5 * w * diff * diff;
    }
    Ok(ErrorGradient {
        grad,
        hessian,
        error,
        s,
    })
}

fn member_gradient_fd(mesh: &Mesh, cell: usize, plane: &Plane) -> Result<crate::truncation::PlaneGrad> {
    let h = 1e-7;
    let at = |phi: f64, theta: f64, s: f64| -> Result<f64> {
        Ok(truncate(mesh, cell, &Plane::new(phi, theta, s, plane.x_base))?.alpha)
    };
    Ok(crate::truncation::PlaneGrad {
        d_s: (at(plane.phi, plane.theta, plane.s + h)? - at(plane.phi, plane.theta, plane.s - h)?)
            / (2.0 * h),
        d_phi: (at(plane.phi + h, plane.theta, plane.s)? - at(plane.phi - h, plane.theta, plane.s)?)
            / (2.0 * h),
        d_theta: (at(plane.phi, plane.theta + h, plane.s)?
            - at(plane.phi, plane.theta - h, plane.s)?)
            / (2.0 * h),
    })
}

/// Scales a step so that its endpoint stays inside the clipping box centered
/// at the current orientation; the direction is preserved. The box has polar
/// edge `box_theta` and an azimuthal edge that widens steeply toward the
/// poles to compensate the metric distortion of the parametrization.
pub fn clip_step(
    p: (f64, f64),
    dp: Vector2<f64>,
    box_theta: f64,
    box_exponent: i32,
) -> Vector2<f64> {
    let d_phi_box = phi_edge_length(p.1, box_theta, box_exponent);
    let mut t = 1.0_f64;
    if dp.x.abs() > 0.5 * d_phi_box {
        t = t.min(0.5 * d_phi_box / dp.x.abs());
    }
    if dp.y.abs() > 0.5 * box_theta {
        t = t.min(0.5 * box_theta / dp.y.abs());
    }
    dp * t
}

/// Azimuthal edge length of the clipping box as a function of theta.
pub fn phi_edge_length(theta: f64, box_theta: f64, box_exponent: i32) -> f64 {
    let pi = std::f64::consts::PI;
    let ratio = (2.0 * theta - pi) / (pi - box_theta);
    (box_theta + (pi - box_theta) * ratio.powi(box_exponent)).min(2.0 * pi)
}

/// Maps an orientation back to the unit sphere `[0, 2pi) x [0, pi]`: polar
/// overshoots reflect with a half-turn of the azimuth, which leaves the
/// normal unchanged.
pub fn wrap_orientation(phi: f64, theta: f64) -> (f64, f64) {
    let pi = std::f64::consts::PI;
    let (phi, theta) = if theta < 0.0 {
        (phi + pi, -theta)
    } else if theta > pi {
        (phi + pi, 2.0 * pi - theta)
    } else {
        (phi, theta)
    };
    (phi.rem_euclid(2.0 * pi), theta)
}

/// Runs the Gauss-Newton minimization for one interface cell.
///
/// The initial orientation comes from the bulk-excluding least-squares
/// estimate. Each iteration solves the 2x2 Gauss-Newton system, clips the
/// step to the reachable box, and halves it until the error strictly
/// decreases; when that fails the step falls back to steepest descent, and
/// when no descent is possible at all the iteration stops as degenerate.
pub fn reconstruct_cell(
    mesh: &Mesh,
    center: usize,
    field: &VolumeFractionField,
    config: &ReconConfig,
) -> Result<ReconstructionResult> {
    let stencil = build_neighborhood(mesh, center, config.stencil_kind);
    let (stencil, _) = extend_stencil(mesh, &stencil, field);
    let weights = assign_weights(&stencil, field, config);
    let (phi0, theta0) = initial_orientation(mesh, &stencil, field, GradientMethod::LseStar)?;
    minimize(mesh, &stencil, field, &weights, (phi0, theta0), config)
}

/// Runs the minimization on an explicit stencil from an explicit initial
/// orientation; used for attractor diagnostics.
pub fn reconstruct_stencil(
    mesh: &Mesh,
    stencil: &Stencil,
    field: &VolumeFractionField,
    weights: &[f64],
    p0: (f64, f64),
    config: &ReconConfig,
) -> Result<ReconstructionResult> {
    minimize(mesh, stencil, field, weights, p0, config)
}

/// Absolute floor of the gradient termination threshold.
const GRAD_TOL_FLOOR: f64 = 1e-10;

fn minimize(
    mesh: &Mesh,
    stencil: &Stencil,
    field: &VolumeFractionField,
    weights: &[f64],
    p0: (f64, f64),
    config: &ReconConfig,
) -> Result<ReconstructionResult> {
    let mut p = p0;
    let mut state = error_gradient(mesh, stencil, field, weights, p.0, p.1)?;
    let mut trace = vec![TraceStep {
        phi: p.0,
        theta: p.1,
        error: state.error,
        grad_norm: state.grad.norm(),
        kind: StepKind::Init,
    }];
    let mut status = Status::MaxIters;
    let mut iterations = 0;

    // The tolerance acts relative to the initial gradient, floored so that
    // already-stationary starts terminate immediately and capped by the
    // nominal value so that large penalty weights cannot inflate it. The
    // squared factor exploits the quadratic contraction near zero-residual
    // minima: it costs at most one extra step but lands the error at the
    // squared level.
    let threshold = config
        .grad_tol
        .min((config.grad_tol * config.grad_tol * state.grad.norm()).max(GRAD_TOL_FLOOR));

    for _ in 0..config.max_iters {
        let grad_norm = state.grad.norm();
        if grad_norm < threshold {
            status = Status::Converged;
            break;
        }

        // Gauss-Newton direction; fall back to steepest descent when the
        // approximate Hessian is numerically singular.
        let h = state.hessian;
        let det = h.m11 * h.m22 - h.m12 * h.m21;
        let gn_dir = if det.abs() > 1e-14 * h.norm() * h.norm() {
            Some(Vector2::new(
                (-state.grad.x * h.m22 + state.grad.y * h.m12) / det,
                (state.grad.x * h.m21 - state.grad.y * h.m11) / det,
            ))
        } else {
            None
        };

        let mut accepted: Option<((f64, f64), StepKind)> = None;
        let attempts: [(Option<Vector2<f64>>, StepKind); 2] = [
            (gn_dir, StepKind::GaussNewton),
            (Some(-state.grad), StepKind::SteepestDescent),
        ];
        'outer: for (dir, kind) in attempts {
            let Some(dir) = dir else { continue };
            let dp = clip_step(p, dir, config.box_theta, config.box_exponent);
            for i in 0..config.line_search_max {
                let t = 0.5_f64.powi(i as i32);
                let trial = wrap_orientation(p.0 + t * dp.x, p.1 + t * dp.y);
                let (e_trial, _) =
                    match error_value(mesh, stencil, field, weights, trial.0, trial.1) {
                        Ok(v) => v,
                        Err(_) => continue,
                    };
                if e_trial < state.error {
                    accepted = Some((trial, kind));
                    break 'outer;
                }
            }
        }

        let Some((p_new, kind)) = accepted else {
            // No direction reduces the error: a local minimum. Only a
            // substantial remaining gradient marks the stencil degenerate.
            status = if grad_norm < config.grad_tol {
                Status::Converged
            } else {
                Status::Degenerate
            };
            break;
        };
        p = p_new;
        state = match error_gradient(mesh, stencil, field, weights, p.0, p.1) {
            Ok(s) => s,
            Err(_) => {
                status = Status::Degenerate;
                break;
            }
        };
        iterations += 1;
        trace.push(TraceStep {
            phi: p.0,
            theta: p.1,
            error: state.error,
            grad_norm: state.grad.norm(),
            kind,
        });
    }

    if status == Status::MaxIters && state.grad.norm() < threshold {
        status = Status::Converged;
    }

    Ok(ReconstructionResult {
        phi: p.0,
        theta: p.1,
        s: state.s,
        normal: angles_to_normal(p.0, p.1),
        error: state.error,
        grad_norm: state.grad.norm(),
        iterations,
        trace,
        status,
    })
}

/// Baseline reconstruction: orientation from a gradient estimate, positioned
/// to conserve the center volume fraction, without minimization.
pub fn baseline_cell(
    mesh: &Mesh,
    center: usize,
    field: &VolumeFractionField,
    config: &ReconConfig,
    method: GradientMethod,
) -> Result<ReconstructionResult> {
    let stencil = build_neighborhood(mesh, center, config.stencil_kind);
    let weights = assign_weights(&stencil, field, config);
    let (phi, theta) = initial_orientation(mesh, &stencil, field, method)?;
    let (error, s) = error_value(mesh, &stencil, field, &weights, phi, theta)?;
    Ok(ReconstructionResult {
        phi,
        theta,
        s,
        normal: angles_to_normal(phi, theta),
        error,
        grad_norm: f64::NAN,
        iterations: 0,
        trace: vec![TraceStep {
            phi,
            theta,
            error,
            grad_norm: f64::NAN,
            kind: StepKind::Init,
        }],
        status: Status::Converged,
    })
}

/// One grid sample of a local error map.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ErrorMapRow {
    pub phi: f64,
    pub theta: f64,
    pub log10_error: f64,
    /// Unit direction of the error gradient (zero when the gradient is).
    pub grad_dir: (f64, f64),
    /// Unit direction of the Gauss-Newton step.
    pub step_dir: (f64, f64),
}

/// Evaluates the error functional of one stencil on the equidistant
/// `2M x M` midpoint grid covering the unit sphere, row by row in `theta`
/// for each `phi`. Every sample also carries the directions of the error
/// gradient and of the Gauss-Newton step.
pub fn error_map(
    mesh: &Mesh,
    stencil: &Stencil,
    field: &VolumeFractionField,
    weights: &[f64],
    grid_half_res: usize,
) -> Vec<ErrorMapRow> {
    let m = grid_half_res;
    let pi = std::f64::consts::PI;
    let mut samples = Vec::with_capacity(2 * m * m);
    for i in 1..=(2 * m) {
        for j in 1..=m {
            let phi = pi * (2 * i - 1) as f64 / (2 * m) as f64;
            let theta = pi * (2 * j - 1) as f64 / (2 * m) as f64;
            samples.push((phi, theta));
        }
    }
    samples
        .into_par_iter()
        .map(|(phi, theta)| {
            let unit = |v: Vector2<f64>| {
                let n = v.norm();
                if n > 0.0 {
                    (v.x / n, v.y / n)
                } else {
                    (0.0, 0.0)
                }
            };
            match error_gradient(mesh, stencil, field, weights, phi, theta) {
                Ok(state) => {
                    let h = state.hessian;
                    let det = h.m11 * h.m22 - h.m12 * h.m21;
                    let step = if det.abs() > 1e-14 * h.norm() * h.norm() {
                        Vector2::new(
                            (-state.grad.x * h.m22 + state.grad.y * h.m12) / det,
                            (state.grad.x * h.m21 - state.grad.y * h.m11) / det,
                        )
                    } else {
                        -state.grad
                    };
                    ErrorMapRow {
                        phi,
                        theta,
                        log10_error: state.error.max(1e-300).log10(),
                        grad_dir: unit(state.grad),
                        step_dir: unit(step),
                    }
                }
                Err(_) => ErrorMapRow {
                    phi,
                    theta,
                    log10_error: f64::NAN,
                    grad_dir: (0.0, 0.0),
                    step_dir: (0.0, 0.0),
                },
            }
        })
        .collect()
}

/// Per-cell reconstruction results and failures of a whole-field sweep.
#[derive(Debug, Clone, Default)]
pub struct FieldReconstruction {
    pub results: BTreeMap<usize, ReconstructionResult>,
    pub failures: BTreeMap<usize, String>,
}

/// Reconstructs every interface cell of the field with the chosen scheme.
/// Cells run in parallel; the output is deterministic for a given mesh,
/// field and configuration. Per-cell failures are collected, the sweep never
/// aborts.
pub fn reconstruct_field(
    mesh: &Mesh,
    field: &VolumeFractionField,
    config: &ReconConfig,
    scheme: Scheme,
) -> FieldReconstruction {
    let labels = interface_cells(field, config.eps_alpha);
    let outcomes: Vec<(usize, Result<ReconstructionResult>)> = labels
        .into_par_iter()
        .map(|k| {
            let res = match scheme {
                Scheme::Fbnr => reconstruct_cell(mesh, k, field, config),
                Scheme::Lse => baseline_cell(mesh, k, field, config, GradientMethod::Lse),
                Scheme::LseStar => baseline_cell(mesh, k, field, config, GradientMethod::LseStar),
                Scheme::Gg => baseline_cell(mesh, k, field, config, GradientMethod::GaussGreen),
            };
            (k, res)
        })
        .collect();

    let mut out = FieldReconstruction::default();
    for (k, res) in outcomes {
        match res {
            Ok(r) => {
                out.results.insert(k, r);
            }
            Err(e) => {
                out.failures.insert(k, e.to_string());
            }
        }
    }
    out
}
