use super::*;
use crate::mesh::{generate_cuboid_mesh, Aabb};

fn sym_box() -> Aabb {
    Aabb {
        min: Vec3::new(-1.0, -1.0, -1.0),
        max: Vec3::new(1.0, 1.0, 1.0),
    }
}

#[test]
fn sphere_level_set_and_normal() {
    let s = Hypersurface::sphere(Vec3::zeros(), 0.8);
    assert!(s.level_set(Vec3::new(0.8, 0.0, 0.0)).abs() < 1e-15);
    assert!(s.level_set(Vec3::zeros()) < 0.0);
    let n = s.exact_normal(Vec3::new(0.8, 0.0, 0.0)).unwrap();
    assert!((n - Vec3::new(1.0, 0.0, 0.0)).norm() < 1e-15);
}

#[test]
fn halfspace_normal_everywhere() {
    let n_ref = Vec3::new(1.0, -3.0, 6.0) / 46.0_f64.sqrt();
    let s = Hypersurface::halfspace(Vec3::new(0.1, 0.2, 0.3), n_ref);
    for p in [Vec3::zeros(), Vec3::new(1.0, 2.0, -0.5)] {
        assert!((s.exact_normal(p).unwrap() - n_ref).norm() < 1e-14);
    }
}

#[test]
fn perturbed_sphere_degenerates_to_sphere() {
    let p = PerturbedSphere::new(Vec3::zeros(), 0.8, 3, 0.0, 1);
    let surf = Hypersurface::PerturbedSphere(p);
    for dir in [
        Vec3::new(1.0, 0.0, 0.0),
        Vec3::new(0.0, 0.3, 0.7).normalize(),
        Vec3::new(-0.5, 0.5, -0.3).normalize(),
    ] {
        assert!(surf.level_set(dir * 0.8).abs() < 1e-13);
        let n = surf.exact_normal(dir * 0.8).unwrap();
        assert!((n - dir).norm() < 1e-12);
    }
}

#[test]
fn coeff_layout_and_values() {
    let coeffs = perturbed_sphere_coeffs(0.8, 3, 0.0, 77);
    assert_eq!(coeffs.len(), 16);
    // c00 carries the cubed base radius.
    let expected = (4.0 * std::f64::consts::PI).sqrt() * 0.512;
    assert!((coeffs[0] - expected).abs() < 1e-12);
    assert!((expected - 1.814_992_7).abs() < 1e-6);
    // sigma0 = 0 zeroes all higher modes.
    assert!(coeffs[1..].iter().all(|&c| c == 0.0));
}

#[test]
fn coeffs_deterministic() {
    let a = perturbed_sphere_coeffs(0.8, 6, 5e-4, 42);
    let b = perturbed_sphere_coeffs(0.8, 6, 5e-4, 42);
    assert_eq!(a, b);
    let c = perturbed_sphere_coeffs(0.8, 6, 5e-4, 43);
    assert_ne!(a, c);
}

#[test]
fn enclosed_volumes() {
    let sphere = Hypersurface::sphere(Vec3::zeros(), 0.8);
    assert!((sphere.enclosed_volume().unwrap() - 4.0 * std::f64::consts::PI * 0.512 / 3.0).abs()
        < 1e-12);
    assert!((sphere.enclosed_volume().unwrap() - 2.144_66).abs() < 1e-5);

    let oblate = Hypersurface::Ellipsoid {
        center: Vec3::zeros(),
        semiaxes: Vec3::new(0.8, 0.8, 0.4),
    };
    assert!((oblate.enclosed_volume().unwrap() - 1.072_33).abs() < 1e-5);

    // Independent of higher modes for perturbed spheres.
    let p = Hypersurface::PerturbedSphere(PerturbedSphere::new(Vec3::zeros(), 0.8, 6, 5e-4, 42));
    assert!((p.enclosed_volume().unwrap() - 4.0 * std::f64::consts::PI * 0.512 / 3.0).abs()
        < 1e-12);

    let hs = Hypersurface::halfspace(Vec3::zeros(), Vec3::new(0.0, 0.0, 1.0));
    assert!(hs.enclosed_volume().is_err());
}

#[test]
fn perturbed_radius_positive_for_benchmark_parameters() {
    for l_max in [3, 6, 9] {
        let p = PerturbedSphere::new(Vec3::zeros(), 0.8, l_max, 5e-4, 42);
        let mut min_val = f64::INFINITY;
        for j in 0..360 {
            let theta = std::f64::consts::PI * (j as f64 + 0.5) / 360.0;
            for i in 0..720 {
                let phi = std::f64::consts::TAU * (i as f64 + 0.5) / 720.0;
                let u = harmonics::eval_sum(p.coeffs(), l_max, theta, phi);
                min_val = min_val.min(u);
            }
        }
        assert!(min_val > 0.0, "l_max={l_max}: min {min_val}");
    }
}

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration on the
/// Legendre polynomial.
fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            // Evaluate P_n and its derivative by the three-term recurrence.
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (mut p0, mut p1) = (1.0, x);
        for k in 2..=n {
            let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
            p0 = p1;
            p1 = p2;
        }
        let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

#[test]
fn harmonics_orthonormal_on_quadrature_grid() {
    // Gauss-Legendre in cos(theta) integrates the polynomial products
    // exactly; the uniform azimuthal grid handles the trigonometric factors.
    let l_max = 6;
    let count = harmonics::coeff_count(l_max);
    let nodes = gauss_legendre(l_max + 2);
    let n_phi = 4 * l_max + 4;
    let mut gram = vec![0.0; count * count];
    for &(x, w_theta) in &nodes {
        let theta = x.acos();
        for i in 0..n_phi {
            let phi = std::f64::consts::TAU * (i as f64 + 0.5) / n_phi as f64;
            let w = w_theta * std::f64::consts::TAU / n_phi as f64;
            let basis = harmonics::eval_basis(l_max, theta, phi);
            for a in 0..count {
                for b in a..count {
                    gram[a * count + b] += w * basis[a] * basis[b];
                }
            }
        }
    }
    for a in 0..count {
        for b in a..count {
            let want = if a == b { 1.0 } else { 0.0 };
            assert!(
                (gram[a * count + b] - want).abs() < 1e-8,
                "({a},{b}): {}",
                gram[a * count + b]
            );
        }
    }
}

#[test]
fn init_bulk_cells_exact() {
    let mesh = generate_cuboid_mesh(6, sym_box()).unwrap();
    let sphere = Hypersurface::sphere(Vec3::zeros(), 0.8);
    let field = init_volume_fractions(&mesh, &sphere, 2).unwrap();
    for (k, cell) in mesh.cells.iter().enumerate() {
        let r = cell.centroid.norm();
        // Cells clearly inside or outside (margin of one cell diagonal).
        let diag = (2.0 / 6.0) * 3.0_f64.sqrt();
        if r < 0.8 - diag {
            assert_eq!(field.alpha[k], 1.0, "cell {k}");
        } else if r > 0.8 + diag {
            assert_eq!(field.alpha[k], 0.0, "cell {k}");
        }
    }
}

#[test]
fn init_halfspace_matches_truncation_exactly() {
    let mesh = generate_cuboid_mesh(4, sym_box()).unwrap();
    let n_ref = Vec3::new(1.0, -3.0, 6.0) / 46.0_f64.sqrt();
    let point = Vec3::new(0.4534, 0.5442, 0.4330);
    let hs = Hypersurface::halfspace(point, n_ref);
    let field = init_volume_fractions(&mesh, &hs, 0).unwrap();
    let plane = hs.as_plane().unwrap();
    for k in 0..mesh.cells.len() {
        let direct = crate::truncation::truncate(&mesh, k, &plane).unwrap().alpha;
        assert!((field.alpha[k] - direct).abs() <= 1e-14);
    }
}

#[test]
fn init_sphere_volume_self_convergence() {
    // The global volume error of the initializer falls at second order in
    // the subdivision depth once past the unrefined level.
    let mesh = generate_cuboid_mesh(8, sym_box()).unwrap();
    let sphere = Hypersurface::sphere(Vec3::zeros(), 0.8);
    let exact = sphere.enclosed_volume().unwrap();
    let mut errors = Vec::new();
    for depth in 1..5 {
        let field = init_volume_fractions(&mesh, &sphere, depth).unwrap();
        let vol: f64 = field
            .alpha
            .iter()
            .zip(&mesh.cells)
            .map(|(a, c)| a * c.volume)
            .sum();
        errors.push(((vol - exact) / exact).abs().max(1e-16));
    }
    // Order with respect to the refinement factor 2 per depth level.
    let points: Vec<(f64, f64)> = errors
        .iter()
        .enumerate()
        .map(|(d, e)| (2.0_f64.powi(d as i32), *e))
        .collect();
    let order = crate::metrics::convergence_order(&points).unwrap();
    assert!(order >= 1.9, "self-convergence order {order}, errors {errors:?}");
}

#[test]
fn marching_tet_fraction_matches_truncation() {
    // The planar leaf cut of the initializer must agree with the face-based
    // truncation for a linear level set, across all sign patterns.
    let mut rng = crate::rng::SplitMix64::new(99);
    let mut seen = [false; 3];
    for _ in 0..300 {
        let verts: Vec<Vec3> = (0..4)
            .map(|_| Vec3::new(rng.range(-1.0, 1.0), rng.range(-1.0, 1.0), rng.range(-1.0, 1.0)))
            .collect();
        let vol = (verts[1] - verts[0])
            .cross(&(verts[2] - verts[0]))
            .dot(&(verts[3] - verts[0]))
            / 6.0;
        if vol.abs() < 2e-2 {
            continue;
        }
        let order: [usize; 4] = if vol > 0.0 { [0, 1, 2, 3] } else { [0, 2, 1, 3] };
        let f = |a: usize, b: usize, c: usize| {
            vec![order[a] as u32, order[b] as u32, order[c] as u32]
        };
        let mesh = crate::mesh::Mesh::single_cell(
            verts.clone(),
            vec![f(0, 2, 1), f(0, 1, 3), f(1, 2, 3), f(2, 0, 3)],
        )
        .unwrap();

        let n = Vec3::new(rng.range(-1.0, 1.0), rng.range(-1.0, 1.0), rng.range(-1.0, 1.0))
            .normalize();
        let point = mesh.cells[0].centroid + n * rng.range(-0.3, 0.3);
        let plane = crate::truncation::Plane::from_normal(point, n, 0.0);

        let tet = [verts[0], verts[1], verts[2], verts[3]];
        let lam = tet.map(|v| plane.signed_dist(v));
        let negatives = lam.iter().filter(|&&l| l < 0.0).count();
        if (1..=3).contains(&negatives) {
            seen[negatives - 1] = true;
        }
        let expected = crate::truncation::truncate(&mesh, 0, &plane).unwrap().alpha;
        let got = tet_negative_fraction(&tet, &lam);
        assert!((got - expected).abs() < 1e-12, "{got} vs {expected}");
    }
    assert!(seen.iter().all(|&s| s), "sign patterns covered: {seen:?}");
}

#[test]
fn ellipsoid_level_set_normal_and_init() {
    let oblate = Hypersurface::Ellipsoid {
        center: Vec3::zeros(),
        semiaxes: Vec3::new(0.8, 0.8, 0.4),
    };
    // On-axis surface points and their normals.
    assert!(oblate.level_set(Vec3::new(0.8, 0.0, 0.0)).abs() < 1e-15);
    assert!(oblate.level_set(Vec3::new(0.0, 0.0, 0.4)).abs() < 1e-15);
    assert!(oblate.level_set(Vec3::zeros()) < 0.0);
    let n = oblate.exact_normal(Vec3::new(0.0, 0.0, 0.4)).unwrap();
    assert!((n - Vec3::new(0.0, 0.0, 1.0)).norm() < 1e-14);
    // A generic surface point: the normal of x^2/a^2 + ... = 1 is x_i/a_i^2.
    let p = Vec3::new(0.8 * 0.6, 0.0, 0.4 * 0.8);
    assert!(oblate.level_set(p).abs() < 1e-14);
    let n = oblate.exact_normal(p).unwrap();
    let expect = Vec3::new(p.x / (0.8 * 0.8), 0.0, p.z / (0.4 * 0.4)).normalize();
    assert!((n - expect).norm() < 1e-14);

    // Initialized total volume approaches the closed form.
    let mesh = generate_cuboid_mesh(10, sym_box()).unwrap();
    let field = init_volume_fractions(&mesh, &oblate, 3).unwrap();
    let vol: f64 = field
        .alpha
        .iter()
        .zip(&mesh.cells)
        .map(|(a, c)| a * c.volume)
        .sum();
    let exact = oblate.enclosed_volume().unwrap();
    assert!(
        ((vol - exact) / exact).abs() < 2e-3,
        "{vol} vs {exact}"
    );
}

#[test]
fn interface_cell_band() {
    let field = VolumeFractionField {
        alpha: vec![0.0, 1e-10, 1e-9, 0.5, 1.0 - 1e-10, 1.0],
        normals: vec![None; 6],
    };
    assert_eq!(interface_cells(&field, 1e-9), vec![2, 3]);
    let bulk = VolumeFractionField {
        alpha: vec![0.0, 1.0],
        normals: vec![None; 2],
    };
    assert!(interface_cells(&bulk, 1e-9).is_empty());
}

#[test]
fn reference_normals_on_sphere() {
    let mesh = generate_cuboid_mesh(8, sym_box()).unwrap();
    let sphere = Hypersurface::sphere(Vec3::zeros(), 0.8);
    let field = init_volume_fractions(&mesh, &sphere, 2).unwrap();
    for k in interface_cells(&field, 1e-9) {
        let n = field.normals[k].expect("interface cell has a reference normal");
        let radial = mesh.cells[k].centroid.normalize();
        assert!((n - radial).norm() < 0.05, "cell {k}");
        assert!((n.norm() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn surface_json_round_trip() {
    let surf = Hypersurface::PerturbedSphere(PerturbedSphere::new(
        Vec3::zeros(),
        0.8,
        6,
        5e-4,
        42,
    ));
    let text = serde_json::to_string(&surf).unwrap();
    let back: Hypersurface = serde_json::from_str(&text).unwrap();
    match (&surf, &back) {
        (Hypersurface::PerturbedSphere(a), Hypersurface::PerturbedSphere(b)) => {
            assert_eq!(a.coeffs(), b.coeffs());
        }
        _ => panic!("variant changed"),
    }
}
