//! Volume fractions, immersed areas and their analytic derivatives for a
//! polyhedral cell truncated by a plane.
//!
//! The volume of the truncated cell is assembled from face contributions
//! `(B0_f + s B1_f) A_f`, where the immersed area `A_f` of each face is in
//! turn a sum of edge contributions `(C0_fm + s C1_fm) l_fm` with the
//! immersed edge length `l_fm`. All coefficients are inner products of mesh
//! geometry with the plane normal, which makes the derivatives with respect
//! to the signed distance and the spherical angles available in closed form.

mod clip;

pub use clip::{ClipResult, Polyhedron};

use smallvec::SmallVec;

use crate::mesh::{classify_edge, Mesh};
use crate::{Error, Result, Vec3, PARALLEL_TOL, ZERO_TOL};

/// Out-of-range volume fractions beyond this are treated as an internal
/// inconsistency rather than roundoff.
const ALPHA_CLAMP_TOL: f64 = 1e-12;

/// Cutting plane, parametrized by spherical angles of its normal and the
/// signed distance `s` to a fixed reference point.
///
/// The level set is `lambda(x) = <x - x_base, n> - s`; the negative
/// halfspace `lambda <= 0` is the immersed side.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct Plane {
    pub phi: f64,
    pub theta: f64,
    pub s: f64,
    pub x_base: Vec3,
}

impl Plane {
    pub fn new(phi: f64, theta: f64, s: f64, x_base: Vec3) -> Self {
        Plane {
            phi,
            theta,
            s,
            x_base,
        }
    }

    /// Plane through the orientation given by a unit normal.
    pub fn from_normal(x_base: Vec3, normal: Vec3, s: f64) -> Self {
        let (phi, theta) = vec_to_angles(normal);
        Plane {
            phi,
            theta,
            s,
            x_base,
        }
    }

    pub fn normal(&self) -> Vec3 {
        angles_to_normal(self.phi, self.theta)
    }

    /// Derivatives of the normal with respect to phi and theta.
    pub fn normal_derivs(&self) -> (Vec3, Vec3) {
        let (sp, cp) = self.phi.sin_cos();
        let (st, ct) = self.theta.sin_cos();
        (
            Vec3::new(-sp * st, cp * st, 0.0),
            Vec3::new(cp * ct, sp * ct, -st),
        )
    }

    /// Level-set value of a point.
    pub fn signed_dist(&self, x: Vec3) -> f64 {
        (x - self.x_base).dot(&self.normal()) - self.s
    }

    /// The same point set with inverted normal; swaps the halfspaces.
    pub fn flipped(&self) -> Plane {
        Plane::from_normal(self.x_base, -self.normal(), -self.s)
    }

    pub fn with_s(&self, s: f64) -> Plane {
        Plane { s, ..*self }
    }
}

/// Spherical angles of the plane normal: `n = [cos(phi) sin(theta),
/// sin(phi) sin(theta), cos(theta)]`.
pub fn angles_to_normal(phi: f64, theta: f64) -> Vec3 {
    let (sp, cp) = phi.sin_cos();
    let (st, ct) = theta.sin_cos();
    Vec3::new(cp * st, sp * st, ct)
}

/// Inverse of [`angles_to_normal`] with `phi` in `[0, 2pi)`, `theta` in
/// `[0, pi]` and the pole convention `phi = 0` whenever `theta` is 0 or pi.
pub fn vec_to_angles(n: Vec3) -> (f64, f64) {
    let theta = n.z.clamp(-1.0, 1.0).acos();
    if theta == 0.0 || theta == std::f64::consts::PI {
        return (0.0, theta);
    }
    let phi = n.y.atan2(n.x).rem_euclid(std::f64::consts::TAU);
    (phi, theta)
}

/// Gradient of a scalar with respect to the plane parameters `(s, phi,
/// theta)`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PlaneGrad {
    pub d_s: f64,
    pub d_phi: f64,
    pub d_theta: f64,
}

/// Result of truncating a cell with a plane.
#[derive(Debug, Clone)]
pub struct TruncationResult {
    /// Volume fraction of the negative halfspace, in `[0, 1]`.
    pub alpha: f64,
    /// Immersed area per face of the cell (cell face order).
    pub immersed_areas: Vec<f64>,
    /// Derivatives of `alpha`; zero unless requested.
    pub grad: PlaneGrad,
    /// Set when a face is near-parallel to the plane while partially
    /// immersed; the analytic derivative is one-sided there and a caller may
    /// fall back to finite differences.
    pub degenerate_gradient: bool,
}

/// Truncated volume fraction and immersed face areas.
pub fn truncate(mesh: &Mesh, cell: usize, plane: &Plane) -> Result<TruncationResult> {
    truncate_impl(mesh, cell, plane, false)
}

/// Truncated volume fraction together with the analytic gradient
/// `(d alpha/ds, d alpha/d phi, d alpha/d theta)`.
pub fn truncate_with_gradient(mesh: &Mesh, cell: usize, plane: &Plane) -> Result<TruncationResult> {
    truncate_impl(mesh, cell, plane, true)
}

/// Per-vertex level-set data of a cell.
struct VertexData {
    ids: SmallVec<[u32; 16]>,
    lambda: SmallVec<[f64; 16]>,
    status: SmallVec<[i8; 16]>,
    d_phi: SmallVec<[f64; 16]>,
    d_theta: SmallVec<[f64; 16]>,
}

impl VertexData {
    fn gather(mesh: &Mesh, cell: usize, plane: &Plane, derivs: bool) -> VertexData {
        let n = plane.normal();
        let (dn_phi, dn_theta) = plane.normal_derivs();
        let ids: SmallVec<[u32; 16]> =
            SmallVec::from_slice(&mesh.cells[cell].vertex_indices);
        let mut lambda = SmallVec::with_capacity(ids.len());
        let mut status = SmallVec::with_capacity(ids.len());
        let mut d_phi = SmallVec::new();
        let mut d_theta = SmallVec::new();
        for &v in &ids {
            let r = mesh.vertex(v) - plane.x_base;
            let l = r.dot(&n) - plane.s;
            lambda.push(l);
            status.push(if l.abs() < ZERO_TOL {
                0
            } else if l > 0.0 {
                1
            } else {
                -1
            });
            if derivs {
                d_phi.push(r.dot(&dn_phi));
                d_theta.push(r.dot(&dn_theta));
            }
        }
        VertexData {
            ids,
            lambda,
            status,
            d_phi,
            d_theta,
        }
    }

    #[inline]
    fn slot(&self, v: u32) -> usize {
        // Cell vertex lists are sorted at construction.
        self.ids.binary_search(&v).expect("vertex belongs to cell")
    }
}

/// Immersed length of an edge and (optionally) its derivative factors.
///
/// For an intersected edge the immersed fraction is the linear interpolation
/// of the level set along the edge; its derivative follows from the motion
/// of the cut endpoint.
#[inline]
fn edge_immersion(
    status_a: i8,
    status_b: i8,
    lam_a: f64,
    lam_b: f64,
    len: f64,
) -> (f64, EdgeCut) {
    match classify_edge(status_a, status_b) {
        1 | 2 => (0.0, EdgeCut::None),
        -1 | -2 | 3 => (len, EdgeCut::None),
        0 => {
            let (l_neg, l_pos, neg_is_a) = if lam_a < 0.0 {
                (lam_a, lam_b, true)
            } else {
                (lam_b, lam_a, false)
            };
            let denom = l_neg - l_pos;
            (
                len * l_neg / denom,
                EdgeCut::Interpolated {
                    l_neg,
                    l_pos,
                    inv_denom2: 1.0 / (denom * denom),
                    neg_is_a,
                },
            )
        }
        _ => unreachable!(),
    }
}

#[derive(Clone, Copy)]
enum EdgeCut {
    /// Fully immersed or fully exterior: the length does not respond to
    /// plane motion (to first order within the current bracket).
    None,
    Interpolated {
        l_neg: f64,
        l_pos: f64,
        inv_denom2: f64,
        neg_is_a: bool,
    },
}

impl EdgeCut {
    /// d length / d parameter, given the endpoint level-set derivatives.
    #[inline]
    fn deriv(&self, len: f64, d_lam_a: f64, d_lam_b: f64) -> f64 {
        match *self {
            EdgeCut::None => 0.0,
            EdgeCut::Interpolated {
                l_neg,
                l_pos,
                inv_denom2,
                neg_is_a,
            } => {
                let (d_neg, d_pos) = if neg_is_a {
                    (d_lam_a, d_lam_b)
                } else {
                    (d_lam_b, d_lam_a)
                };
                len * (l_neg * d_pos - l_pos * d_neg) * inv_denom2
            }
        }
    }
}

fn truncate_impl(
    mesh: &Mesh,
    cell: usize,
    plane: &Plane,
    want_grad: bool,
) -> Result<TruncationResult> {
    let c = &mesh.cells[cell];
    if c.volume <= 0.0 {
        return Err(Error::DegenerateCell);
    }
    let n = plane.normal();
    let (dn_phi, dn_theta) = plane.normal_derivs();
    let s = plane.s;
    let vd = VertexData::gather(mesh, cell, plane, want_grad);

    let mut vol3 = 0.0;
    let mut g = PlaneGrad::default();
    let mut degenerate = false;
    let mut areas = Vec::with_capacity(c.face_refs.len());

    for fr in &c.face_refs {
        let face = &mesh.faces[fr.face as usize];
        let omega = fr.orientation as f64;
        let nf = face.unit_normal;
        let a = omega * nf.dot(&n);
        let x1 = mesh.vertex(face.vertex_indices[0]);
        let b0 = omega * (x1 - plane.x_base).dot(&nf);
        let b1 = -a;
        let one_m_a2 = 1.0 - a * a;

        let nv = face.vertex_indices.len();
        let mut area = 0.0;
        let mut d_area = PlaneGrad::default();

        if one_m_a2.abs() < PARALLEL_TOL {
            // Face (anti)parallel to the plane: immersed entirely or not at
            // all; the edge coefficients are singular and unnecessary.
            let mut all_in = true;
            let mut all_out = true;
            for &v in &face.vertex_indices {
                match vd.status[vd.slot(v)] {
                    1 => all_in = false,
                    -1 => all_out = false,
                    _ => {}
                }
            }
            if all_in {
                area = face.area;
            } else if !all_out && want_grad {
                degenerate = true;
            }
        } else {
            let inv = 1.0 / one_m_a2;
            // Projection of the face onto its normal axis; invariant under
            // the orientation flip.
            let proj = nf * x1.dot(&nf);
            let cc = (proj - plane.x_base).dot(&n);
            let (cc_phi, cc_theta) = if want_grad {
                ((proj - plane.x_base).dot(&dn_phi), (proj - plane.x_base).dot(&dn_theta))
            } else {
                (0.0, 0.0)
            };
            let (a_phi, a_theta) = (omega * nf.dot(&dn_phi), omega * nf.dot(&dn_theta));

            for m in 0..nv {
                let va = face.vertex_indices[m];
                let vb = face.vertex_indices[(m + 1) % nv];
                let xa = mesh.vertex(va);
                let xb = mesh.vertex(vb);
                let edge = xb - xa;
                let len = edge.norm();
                let conormal = edge.cross(&nf) / len;

                let sa = vd.slot(va);
                let sb = vd.slot(vb);
                let (ell, cut) = edge_immersion(
                    vd.status[sa],
                    vd.status[sb],
                    vd.lambda[sa],
                    vd.lambda[sb],
                    len,
                );

                let bb = -conormal.dot(&n);
                let c1 = bb * inv;
                let c0 = xa.dot(&conormal) - cc * c1;
                area += (c0 + s * c1) * ell;

                if want_grad {
                    let d_ell_s = cut.deriv(len, -1.0, -1.0);
                    let d_ell_phi = cut.deriv(len, vd.d_phi[sa], vd.d_phi[sb]);
                    let d_ell_theta = cut.deriv(len, vd.d_theta[sa], vd.d_theta[sb]);

                    let bb_phi = -conormal.dot(&dn_phi);
                    let bb_theta = -conormal.dot(&dn_theta);
                    let c1_phi = bb_phi * inv + 2.0 * bb * a * a_phi * inv * inv;
                    let c1_theta = bb_theta * inv + 2.0 * bb * a * a_theta * inv * inv;
                    let c0_phi = -(cc_phi * c1 + cc * c1_phi);
                    let c0_theta = -(cc_theta * c1 + cc * c1_theta);

                    let coeff = c0 + s * c1;
                    d_area.d_s += c1 * ell + coeff * d_ell_s;
                    d_area.d_phi += (c0_phi + s * c1_phi) * ell + coeff * d_ell_phi;
                    d_area.d_theta += (c0_theta + s * c1_theta) * ell + coeff * d_ell_theta;
                }
            }
            area *= 0.5;
            d_area.d_s *= 0.5;
            d_area.d_phi *= 0.5;
            d_area.d_theta *= 0.5;
        }

        areas.push(area);
        let support = b0 + s * b1;
        vol3 += support * area;
        if want_grad {
            let (a_phi, a_theta) = (omega * nf.dot(&dn_phi), omega * nf.dot(&dn_theta));
            g.d_s += b1 * area + support * d_area.d_s;
            g.d_phi += s * (-a_phi) * area + support * d_area.d_phi;
            g.d_theta += s * (-a_theta) * area + support * d_area.d_theta;
        }
    }

    let inv3v = 1.0 / (3.0 * c.volume);
    let mut alpha = vol3 * inv3v;
    if !(-ALPHA_CLAMP_TOL..=1.0 + ALPHA_CLAMP_TOL).contains(&alpha) {
        return Err(Error::InvalidArgument(format!(
            "volume fraction {alpha} outside [0,1] beyond roundoff"
        )));
    }
    alpha = alpha.clamp(0.0, 1.0);
    if want_grad {
        g.d_s *= inv3v;
        g.d_phi *= inv3v;
        g.d_theta *= inv3v;
    }

    Ok(TruncationResult {
        alpha,
        immersed_areas: areas,
        grad: g,
        degenerate_gradient: degenerate,
    })
}

/// Volume fraction and its first three derivatives in the signed distance,
/// evaluated at `plane.s`. Within a bracket of the projected vertex
/// distances these determine the (cubic) volume fraction exactly.
#[derive(Debug, Clone, Copy)]
pub struct CubicProfile {
    pub alpha: f64,
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
}

impl CubicProfile {
    /// Evaluates the cubic expansion at signed distance `z` (about the
    /// expansion point `s`).
    pub fn eval(&self, dz: f64) -> f64 {
        self.alpha + dz * (self.d1 + dz * (self.d2 / 2.0 + dz * self.d3 / 6.0))
    }

    pub fn eval_deriv(&self, dz: f64) -> f64 {
        self.d1 + dz * (self.d2 + dz * self.d3 / 2.0)
    }
}

/// Computes the cubic profile of the volume fraction in `s` at `plane.s`.
pub fn truncate_profile(mesh: &Mesh, cell: usize, plane: &Plane) -> Result<CubicProfile> {
    let c = &mesh.cells[cell];
    if c.volume <= 0.0 {
        return Err(Error::DegenerateCell);
    }
    let n = plane.normal();
    let s = plane.s;
    let vd = VertexData::gather(mesh, cell, plane, false);

    let mut vol3 = [0.0; 4];
    for fr in &c.face_refs {
        let face = &mesh.faces[fr.face as usize];
        let omega = fr.orientation as f64;
        let nf = face.unit_normal;
        let a = omega * nf.dot(&n);
        let x1 = mesh.vertex(face.vertex_indices[0]);
        let b0 = omega * (x1 - plane.x_base).dot(&nf);
        let b1 = -a;
        let one_m_a2 = 1.0 - a * a;

        let mut area = 0.0;
        let mut area_d1 = 0.0;
        let mut area_d2 = 0.0;

        if one_m_a2.abs() < PARALLEL_TOL {
            let fully_in = face
                .vertex_indices
                .iter()
                .all(|&v| vd.status[vd.slot(v)] <= 0);
            if fully_in {
                area = face.area;
            }
        } else {
            let inv = 1.0 / one_m_a2;
            let proj = nf * x1.dot(&nf);
            let cc = (proj - plane.x_base).dot(&n);
            let nv = face.vertex_indices.len();
            for m in 0..nv {
                let va = face.vertex_indices[m];
                let vb = face.vertex_indices[(m + 1) % nv];
                let xa = mesh.vertex(va);
                let xb = mesh.vertex(vb);
                let edge = xb - xa;
                let len = edge.norm();
                let conormal = edge.cross(&nf) / len;

                let sa = vd.slot(va);
                let sb = vd.slot(vb);
                let (ell, cut) = edge_immersion(
                    vd.status[sa],
                    vd.status[sb],
                    vd.lambda[sa],
                    vd.lambda[sb],
                    len,
                );
                let d_ell_s = cut.deriv(len, -1.0, -1.0);

                let bb = -conormal.dot(&n);
                let c1 = bb * inv;
                let c0 = xa.dot(&conormal) - cc * c1;
                area += (c0 + s * c1) * ell;
                area_d1 += c1 * ell + (c0 + s * c1) * d_ell_s;
                area_d2 += c1 * d_ell_s;
            }
            area *= 0.5;
            area_d1 *= 0.5;
            // The half of the product rule cancels against the two equal
            // cross terms, leaving a full sum of c1 * dl.
        }

        let support = b0 + s * b1;
        vol3[0] += support * area;
        vol3[1] += b1 * area + support * area_d1;
        vol3[2] += 2.0 * b1 * area_d1 + support * area_d2;
        vol3[3] += 3.0 * b1 * area_d2;
    }

    let inv3v = 1.0 / (3.0 * c.volume);
    Ok(CubicProfile {
        alpha: (vol3[0] * inv3v).clamp(0.0, 1.0),
        d1: vol3[1] * inv3v,
        d2: vol3[2] * inv3v,
        d3: vol3[3] * inv3v,
    })
}

/// Gradient of the volume fraction from the transport-theorem form: the
/// plane patch inside the cell is extracted by clipping, and the affine
/// normal-velocity integrand is integrated exactly from the patch area and
/// centroid. Returns the gradient and a flag that is set when the
/// intersection polygon is empty.
pub fn reynolds_gradient(mesh: &Mesh, cell: usize, plane: &Plane) -> Result<(PlaneGrad, bool)> {
    let poly = Polyhedron::from_cell(mesh, cell);
    let clipped = poly.clip_halfspace(plane);
    let Some(clip) = clipped else {
        return Ok((PlaneGrad::default(), true));
    };
    let Some(cap) = clip.cap_face else {
        return Ok((PlaneGrad::default(), true));
    };
    let (area, centroid) = clip.poly.face_area_centroid(cap);
    if area <= 0.0 {
        return Ok((PlaneGrad::default(), true));
    }

    let n = plane.normal();
    let (sp, cp) = plane.phi.sin_cos();
    let (st, ct) = plane.theta.sin_cos();
    let e1 = Vec3::new(-sp, cp, 0.0);
    let e2 = Vec3::new(cp * ct, sp * ct, -st);
    let tangent = centroid - plane.x_base - n * plane.s;
    let t1 = e1.dot(&tangent);
    let t2 = e2.dot(&tangent);

    let inv_v = 1.0 / mesh.cells[cell].volume;
    Ok((
        PlaneGrad {
            d_s: area * inv_v,
            d_phi: -area * st * t1 * inv_v,
            d_theta: -area * t2 * inv_v,
        },
        false,
    ))
}

/// Volume of the region of the cell on which the halfspace assignments of
/// the two planes disagree. Symmetric in its arguments and non-negative;
/// computed by sequential polyhedron clipping.
pub fn symmetric_volume_difference(mesh: &Mesh, cell: usize, plane1: &Plane, plane2: &Plane) -> f64 {
    let poly = Polyhedron::from_cell(mesh, cell);
    let part = |first: &Plane, second: &Plane| -> f64 {
        match poly.clip_halfspace(&first.flipped()) {
            Some(clip) => match clip.poly.clip_halfspace(second) {
                Some(inner) => inner.poly.volume(),
                None => 0.0,
            },
            None => 0.0,
        }
    };
    part(plane1, plane2) + part(plane2, plane1)
}
