//! Benchmark hypersurfaces (halfspace, sphere, ellipsoids, perturbed
//! spheres), their level sets and exact normals, and the volume-fraction
//! initializer.

pub mod harmonics;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::mesh::Mesh;
use crate::rng::SplitMix64;
use crate::truncation::{truncate, vec_to_angles, Plane};
use crate::{Error, Result, Vec3, EPS_ALPHA};

/// Sphere whose cubed radius is expanded in real spherical harmonics,
/// `R(phi, theta) = (sum c_lm Y_lm)^(1/3)`. Expanding the cube of the radius
/// makes the enclosed volume `c_00 sqrt(4 pi) / 3` exactly.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(from = "PerturbedSphereSpec", into = "PerturbedSphereSpec")]
pub struct PerturbedSphere {
    pub center: Vec3,
    pub radius: f64,
    pub l_max: usize,
    pub sigma0: f64,
    pub seed: u64,
    coeffs: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct PerturbedSphereSpec {
    center: Vec3,
    radius: f64,
    l_max: usize,
    sigma0: f64,
    seed: u64,
}

impl From<PerturbedSphereSpec> for PerturbedSphere {
    fn from(s: PerturbedSphereSpec) -> Self {
        PerturbedSphere::new(s.center, s.radius, s.l_max, s.sigma0, s.seed)
    }
}

impl From<PerturbedSphere> for PerturbedSphereSpec {
    fn from(p: PerturbedSphere) -> Self {
        PerturbedSphereSpec {
            center: p.center,
            radius: p.radius,
            l_max: p.l_max,
            sigma0: p.sigma0,
            seed: p.seed,
        }
    }
}

impl PerturbedSphere {
    pub fn new(center: Vec3, radius: f64, l_max: usize, sigma0: f64, seed: u64) -> Self {
        let coeffs = perturbed_sphere_coeffs(radius, l_max, sigma0, seed);
        PerturbedSphere {
            center,
            radius,
            l_max,
            sigma0,
            seed,
            coeffs,
        }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }
}

/// Benchmark hypersurface. The level set is negative on the interior side.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Hypersurface {
    /// Interior halfspace `<x - point, normal> <= 0`.
    Halfspace { point: Vec3, normal: Vec3 },
    Sphere { center: Vec3, radius: f64 },
    Ellipsoid { center: Vec3, semiaxes: Vec3 },
    PerturbedSphere(PerturbedSphere),
}

/// Spherical-harmonic coefficients of a perturbed sphere: `c_00` carries the
/// base radius, the higher modes are Gaussian with variance `sigma0`,
/// generated by the Box-Muller transform from a seeded uniform stream.
pub fn perturbed_sphere_coeffs(radius: f64, l_max: usize, sigma0: f64, seed: u64) -> Vec<f64> {
    let mut coeffs = vec![0.0; harmonics::coeff_count(l_max)];
    coeffs[0] = (4.0 * std::f64::consts::PI).sqrt() * radius.powi(3);
    let mut rng = SplitMix64::new(seed);
    for l in 1..=l_max {
        for m in -(l as i64)..=(l as i64) {
            let gamma1 = rng.next_f64();
            let gamma2 = rng.next_f64();
            coeffs[harmonics::coeff_index(l, m)] = sigma0.sqrt()
                * (-2.0 * gamma1.ln()).sqrt()
                * (2.0 * std::f64::consts::PI * gamma2).cos();
        }
    }
    coeffs
}

impl Hypersurface {
    pub fn sphere(center: Vec3, radius: f64) -> Self {
        Hypersurface::Sphere { center, radius }
    }

    pub fn halfspace(point: Vec3, normal: Vec3) -> Self {
        Hypersurface::Halfspace {
            point,
            normal: normal.normalize(),
        }
    }

    /// Level-set value; negative inside the enclosed phase.
    pub fn level_set(&self, x: Vec3) -> f64 {
        match self {
            Hypersurface::Halfspace { point, normal } => {
                (x - point).dot(&normal.normalize())
            }
            Hypersurface::Sphere { center, radius } => (x - center).norm() - radius,
            Hypersurface::Ellipsoid { center, semiaxes } => {
                let d = x - center;
                (d.x / semiaxes.x).powi(2) + (d.y / semiaxes.y).powi(2)
                    + (d.z / semiaxes.z).powi(2)
                    - 1.0
            }
            Hypersurface::PerturbedSphere(p) => {
                let d = x - p.center;
                let r = d.norm();
                let (phi, theta) = vec_to_angles(d / r);
                r - harmonics::eval_sum(&p.coeffs, p.l_max, theta, phi).cbrt()
            }
        }
    }

    /// Unit normal of the level set (normalized gradient), pointing from the
    /// interior to the exterior phase.
    pub fn exact_normal(&self, x: Vec3) -> Result<Vec3> {
        match self {
            Hypersurface::Halfspace { normal, .. } => Ok(normal.normalize()),
            Hypersurface::Sphere { center, .. } => {
                let d = x - center;
                let r = d.norm();
                if r == 0.0 {
                    return Err(Error::Surface("normal undefined at the center".into()));
                }
                Ok(d / r)
            }
            Hypersurface::Ellipsoid { center, semiaxes } => {
                let d = x - center;
                let g = Vec3::new(
                    2.0 * d.x / (semiaxes.x * semiaxes.x),
                    2.0 * d.y / (semiaxes.y * semiaxes.y),
                    2.0 * d.z / (semiaxes.z * semiaxes.z),
                );
                let n = g.norm();
                if n == 0.0 {
                    return Err(Error::Surface("normal undefined at the center".into()));
                }
                Ok(g / n)
            }
            Hypersurface::PerturbedSphere(p) => {
                let d = x - p.center;
                let r = d.norm();
                if r == 0.0 {
                    return Err(Error::Surface("normal undefined at the center".into()));
                }
                let (phi, theta) = vec_to_angles(d / r);
                let (u, du_dt, du_dp_over_sin) =
                    harmonics::eval_sum_with_derivs(&p.coeffs, p.l_max, theta, phi);
                let scale = u.cbrt().powi(-2) / 3.0;
                let (sp, cp) = phi.sin_cos();
                let (st, ct) = theta.sin_cos();
                let e_r = d / r;
                let e_theta = Vec3::new(cp * ct, sp * ct, -st);
                let e_phi = Vec3::new(-sp, cp, 0.0);
                // grad lambda = e_r - (dR/dtheta e_theta + dR/dphi/sin e_phi)/r
                let g = e_r - (e_theta * (scale * du_dt) + e_phi * (scale * du_dp_over_sin)) / r;
                Ok(g.normalize())
            }
        }
    }

    /// Analytic volume enclosed by the surface; the halfspace is unbounded.
    pub fn enclosed_volume(&self) -> Result<f64> {
        match self {
            Hypersurface::Halfspace { .. } => Err(Error::Surface(
                "halfspace encloses an unbounded volume".into(),
            )),
            Hypersurface::Sphere { radius, .. } => {
                Ok(4.0 / 3.0 * std::f64::consts::PI * radius.powi(3))
            }
            Hypersurface::Ellipsoid { semiaxes, .. } => Ok(4.0 / 3.0
                * std::f64::consts::PI
                * semiaxes.x
                * semiaxes.y
                * semiaxes.z),
            Hypersurface::PerturbedSphere(p) => {
                Ok(p.coeffs[0] * (4.0 * std::f64::consts::PI).sqrt() / 3.0)
            }
        }
    }

    /// The halfspace boundary as a cutting plane.
    pub fn as_plane(&self) -> Option<Plane> {
        match self {
            Hypersurface::Halfspace { point, normal } => {
                Some(Plane::from_normal(*point, normal.normalize(), 0.0))
            }
            _ => None,
        }
    }

    /// Closest-point projection of `x` onto the surface along the level-set
    /// gradient.
    pub fn project(&self, x: Vec3) -> Result<Vec3> {
        let mut p = x;
        for _ in 0..50 {
            let l = self.level_set(p);
            if l.abs() < 1e-13 {
                return Ok(p);
            }
            let n = self.exact_normal(p)?;
            // First-order distance estimate: lambda / |grad lambda|, with the
            // gradient magnitude recovered by a directional difference.
            let h = 1e-6;
            let dl = (self.level_set(p + n * h) - self.level_set(p - n * h)) / (2.0 * h);
            if dl.abs() < 1e-12 {
                return Err(Error::Surface("projection stalled".into()));
            }
            p -= n * (l / dl);
        }
        if self.level_set(p).abs() < 1e-6 {
            Ok(p)
        } else {
            Err(Error::Surface(format!(
                "projection from ({}, {}, {}) did not converge",
                x.x, x.y, x.z
            )))
        }
    }
}

/// Per-cell volume fractions and reference normals.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VolumeFractionField {
    pub alpha: Vec<f64>,
    /// Reference normals, present on intersected cells.
    pub normals: Vec<Option<Vec3>>,
}

impl VolumeFractionField {
    pub fn is_bulk(&self, cell: usize) -> bool {
        !(EPS_ALPHA..=1.0 - EPS_ALPHA).contains(&self.alpha[cell])
    }

    /// CSV rows `cell_id, alpha, nx, ny, nz` (zero normal on bulk cells).
    pub fn write_csv(&self, mut w: impl std::io::Write) -> std::io::Result<()> {
        writeln!(w, "cell_id,alpha,nx,ny,nz")?;
        for (k, a) in self.alpha.iter().enumerate() {
            let n = self.normals[k].unwrap_or_else(Vec3::zeros);
            writeln!(w, "{},{},{},{},{}", k, a, n.x, n.y, n.z)?;
        }
        Ok(())
    }
}

/// Labels of the cells whose volume fraction lies inside the interface band.
pub fn interface_cells(field: &VolumeFractionField, eps_alpha: f64) -> Vec<usize> {
    field
        .alpha
        .iter()
        .enumerate()
        .filter(|(_, &a)| (eps_alpha..=1.0 - eps_alpha).contains(&a))
        .map(|(k, _)| k)
        .collect()
}

/// Initializes volume fractions on a mesh.
///
/// Halfspaces go through the truncation module and are exact. Curved
/// surfaces are integrated per cell by recursive subdivision of a
/// tetrahedral decomposition: sub-tetrahedra whose vertices are safely on
/// one side are classified outright, the rest recurse down to `depth` levels
/// and are finished with a planar cut of the interpolated level set.
/// Reference normals are the exact normals at the closest surface point of
/// each intersected cell's centroid.
pub fn init_volume_fractions(
    mesh: &Mesh,
    surface: &Hypersurface,
    depth: usize,
) -> Result<VolumeFractionField> {
    if let Some(plane) = surface.as_plane() {
        let alpha: Vec<f64> = (0..mesh.cells.len())
            .into_par_iter()
            .map(|k| truncate(mesh, k, &plane).map(|t| t.alpha))
            .collect::<Result<_>>()?;
        let normal = plane.normal();
        let normals = alpha
            .iter()
            .map(|&a| ((EPS_ALPHA..=1.0 - EPS_ALPHA).contains(&a)).then_some(normal))
            .collect();
        return Ok(VolumeFractionField { alpha, normals });
    }

    let alpha: Vec<f64> = (0..mesh.cells.len())
        .into_par_iter()
        .map(|k| cell_fraction(mesh, k, surface, depth))
        .collect::<Result<_>>()?;
    let normals: Vec<Option<Vec3>> = (0..mesh.cells.len())
        .into_par_iter()
        .map(|k| -> Result<Option<Vec3>> {
            if (EPS_ALPHA..=1.0 - EPS_ALPHA).contains(&alpha[k]) {
                let foot = surface.project(mesh.cells[k].centroid)?;
                Ok(Some(surface.exact_normal(foot)?))
            } else {
                Ok(None)
            }
        })
        .collect::<Result<_>>()?;
    Ok(VolumeFractionField { alpha, normals })
}

fn cell_fraction(mesh: &Mesh, cell: usize, surface: &Hypersurface, depth: usize) -> Result<f64> {
    let c = &mesh.cells[cell];
    let mut interior = 0.0;
    for fr in &c.face_refs {
        let face = &mesh.faces[fr.face as usize];
        let v = &face.vertex_indices;
        for m in 1..v.len() - 1 {
            let (a, b) = if fr.orientation > 0 {
                (v[m], v[m + 1])
            } else {
                (v[m + 1], v[m])
            };
            let tet = [
                c.centroid,
                mesh.vertex(v[0]),
                mesh.vertex(a),
                mesh.vertex(b),
            ];
            interior += tet_interior_volume(&tet, surface, depth);
        }
    }
    Ok((interior / c.volume).clamp(0.0, 1.0))
}

/// Volume of the interior phase inside a tetrahedron.
fn tet_interior_volume(tet: &[Vec3; 4], surface: &Hypersurface, depth: usize) -> f64 {
    let lam = [
        surface.level_set(tet[0]),
        surface.level_set(tet[1]),
        surface.level_set(tet[2]),
        surface.level_set(tet[3]),
    ];
    let volume = tet_volume(tet);
    if volume <= 0.0 {
        return 0.0;
    }

    let all_in = lam.iter().all(|&l| l <= 0.0);
    let all_out = lam.iter().all(|&l| l >= 0.0);
    if all_in || all_out {
        // Same-sign vertices do not rule out a grazing intersection; accept
        // only when the smallest level-set value clears the tetrahedron
        // diameter on the local gradient scale.
        let diam = tet_diameter(tet);
        let min_abs = lam.iter().fold(f64::INFINITY, |m, l| m.min(l.abs()));
        let grad = gradient_scale(surface, tet_centroid(tet));
        if min_abs > 1.5 * diam * grad {
            return if all_in { volume } else { 0.0 };
        }
    }

    if depth == 0 {
        return volume * tet_negative_fraction(tet, &lam);
    }

    let mid = |i: usize, j: usize| (tet[i] + tet[j]) * 0.5;
    let m01 = mid(0, 1);
    let m02 = mid(0, 2);
    let m03 = mid(0, 3);
    let m12 = mid(1, 2);
    let m13 = mid(1, 3);
    let m23 = mid(2, 3);
    let children = [
        [tet[0], m01, m02, m03],
        [tet[1], m01, m12, m13],
        [tet[2], m02, m12, m23],
        [tet[3], m03, m13, m23],
        [m01, m23, m02, m03],
        [m01, m23, m03, m13],
        [m01, m23, m13, m12],
        [m01, m23, m12, m02],
    ];
    children
        .iter()
        .map(|t| tet_interior_volume(t, surface, depth - 1))
        .sum()
}

fn tet_volume(t: &[Vec3; 4]) -> f64 {
    ((t[1] - t[0]).cross(&(t[2] - t[0])).dot(&(t[3] - t[0])) / 6.0).abs()
}

fn tet_centroid(t: &[Vec3; 4]) -> Vec3 {
    (t[0] + t[1] + t[2] + t[3]) / 4.0
}

fn tet_diameter(t: &[Vec3; 4]) -> f64 {
    let mut d: f64 = 0.0;
    for i in 0..4 {
        for j in i + 1..4 {
            d = d.max((t[i] - t[j]).norm());
        }
    }
    d
}

/// Local magnitude of the level-set gradient, used to convert level values
/// into distance estimates.
fn gradient_scale(surface: &Hypersurface, x: Vec3) -> f64 {
    match surface {
        Hypersurface::Halfspace { .. } | Hypersurface::Sphere { .. } => 1.0,
        Hypersurface::Ellipsoid { center, semiaxes } => {
            let d = x - center;
            let g = Vec3::new(
                2.0 * d.x / (semiaxes.x * semiaxes.x),
                2.0 * d.y / (semiaxes.y * semiaxes.y),
                2.0 * d.z / (semiaxes.z * semiaxes.z),
            );
            g.norm().max(1e-6)
        }
        // |grad| = sqrt(1 + |surface gradient of R|^2 / r^2) >= 1; the
        // perturbations considered are gentle, so a flat bound suffices.
        Hypersurface::PerturbedSphere(_) => 1.25,
    }
}

/// Fraction of the tetrahedron on the negative side of the linear
/// interpolant of the vertex level-set values (the planar cut).
pub(crate) fn tet_negative_fraction(tet: &[Vec3; 4], lam: &[f64; 4]) -> f64 {
    let neg: Vec<usize> = (0..4).filter(|&i| lam[i] < 0.0).collect();
    match neg.len() {
        0 => 0.0,
        4 => 1.0,
        1 => corner_fraction(lam, neg[0]),
        3 => {
            let pos = (0..4).find(|i| !neg.contains(i)).unwrap();
            1.0 - corner_fraction(lam, pos)
        }
        2 => {
            let (a, b) = (neg[0], neg[1]);
            let pos: Vec<usize> = (0..4).filter(|i| !neg.contains(i)).collect();
            let (c, d) = (pos[0], pos[1]);
            let cut = |i: usize, j: usize| {
                let t = lam[i] / (lam[i] - lam[j]);
                tet[i] + (tet[j] - tet[i]) * t
            };
            // The immersed wedge is a prism between the triangles
            // (a, p_ac, p_ad) and (b, p_bc, p_bd); both are convex, so the
            // three-tetrahedron split is exact.
            let (pac, pad, pbc, pbd) = (cut(a, c), cut(a, d), cut(b, c), cut(b, d));
            let v = tet_volume(tet);
            let w = tet_volume(&[tet[a], pac, pad, tet[b]])
                + tet_volume(&[pac, pad, tet[b], pbc])
                + tet_volume(&[pad, tet[b], pbc, pbd]);
            (w / v).clamp(0.0, 1.0)
        }
        _ => unreachable!(),
    }
}

/// `prod_j lambda_i / (lambda_i - lambda_j)`: the volume fraction of the
/// corner simplex at vertex `i`.
fn corner_fraction(lam: &[f64; 4], i: usize) -> f64 {
    let mut f = 1.0;
    for j in 0..4 {
        if j != i {
            f *= lam[i] / (lam[i] - lam[j]);
        }
    }
    f.clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests;
