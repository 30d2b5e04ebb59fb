//! Property tests for the geometric invariants.

mod common;

use proptest::prelude::*;

use fbnr::reconstruct::{clip_step, phi_edge_length, wrap_orientation};
use fbnr::rng::SplitMix64;
use fbnr::truncation::{
    angles_to_normal, symmetric_volume_difference, truncate, Plane,
};
use fbnr::Vec3;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// The volume fractions of a plane and its flipped twin sum to one.
    #[test]
    fn complement_identity(seed in any::<u64>(), cut in 0.05f64..0.95) {
        let mut rng = SplitMix64::new(seed);
        let mesh = common::random_cell(&mut rng, (seed % 3) as usize);
        let mut plane = common::random_cutting_plane(&mut rng, &mesh, 0.0);
        plane.s += (cut - 0.5) * 0.2;
        let a = truncate(&mesh, 0, &plane).unwrap().alpha;
        let b = truncate(&mesh, 0, &plane.flipped()).unwrap().alpha;
        prop_assert!((a + b - 1.0).abs() < 1e-12, "{a} + {b}");
    }

    /// The volume fraction is nondecreasing in the signed distance.
    #[test]
    fn monotone_in_signed_distance(seed in any::<u64>()) {
        let mut rng = SplitMix64::new(seed);
        let mesh = common::random_cell(&mut rng, (seed % 3) as usize);
        let plane = common::random_cutting_plane(&mut rng, &mesh, 0.0);
        let mut last = -1.0f64;
        for i in 0..30 {
            let s = plane.s - 1.0 + 2.0 * i as f64 / 29.0;
            let a = truncate(&mesh, 0, &plane.with_s(s)).unwrap().alpha;
            prop_assert!(a >= last - 1e-12);
            last = a;
        }
    }

    /// Moving the reference point with a compensating signed distance leaves
    /// the fraction unchanged.
    #[test]
    fn base_point_translation_invariance(
        seed in any::<u64>(),
        dx in -2.0f64..2.0, dy in -2.0f64..2.0, dz in -2.0f64..2.0,
    ) {
        let mut rng = SplitMix64::new(seed);
        let mesh = common::random_cell(&mut rng, (seed % 3) as usize);
        let plane = common::random_cutting_plane(&mut rng, &mesh, 0.05);
        let shift = Vec3::new(dx, dy, dz);
        let moved = Plane {
            x_base: plane.x_base + shift,
            s: plane.s - shift.dot(&plane.normal()),
            ..plane
        };
        let a = truncate(&mesh, 0, &plane).unwrap().alpha;
        let b = truncate(&mesh, 0, &moved).unwrap().alpha;
        prop_assert!((a - b).abs() < 1e-12);
    }

    /// The symmetric volume difference is symmetric and non-negative.
    #[test]
    fn symmetric_difference_properties(seed in any::<u64>()) {
        let mut rng = SplitMix64::new(seed);
        let mesh = common::random_cell(&mut rng, (seed % 3) as usize);
        let p1 = common::random_cutting_plane(&mut rng, &mesh, -0.1);
        let p2 = common::random_cutting_plane(&mut rng, &mesh, -0.1);
        let a = symmetric_volume_difference(&mesh, 0, &p1, &p2);
        let b = symmetric_volume_difference(&mesh, 0, &p2, &p1);
        prop_assert!(a >= 0.0);
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a));
        prop_assert!(a <= mesh.cells[0].volume * (1.0 + 1e-12));
    }

    /// Wrapping the spherical angles preserves the normal.
    #[test]
    fn wrap_preserves_normal(phi in -12.0f64..12.0, theta in -0.9f64..4.0) {
        let (wp, wt) = wrap_orientation(phi, theta);
        prop_assert!((0.0..std::f64::consts::TAU).contains(&wp));
        prop_assert!((0.0..=std::f64::consts::PI).contains(&wt));
        let d = (angles_to_normal(phi, theta) - angles_to_normal(wp, wt)).norm();
        prop_assert!(d < 1e-12);
    }

    /// Clipped steps stay inside the orientation box and keep direction.
    #[test]
    fn clip_step_containment(
        phi in 0.0f64..std::f64::consts::TAU,
        theta in 0.0f64..std::f64::consts::PI,
        dphi in -100.0f64..100.0,
        dtheta in -100.0f64..100.0,
    ) {
        let box_theta = std::f64::consts::FRAC_PI_4;
        let dp = nalgebra::Vector2::new(dphi, dtheta);
        let clipped = clip_step((phi, theta), dp, box_theta, 12);
        let half_phi = 0.5 * phi_edge_length(theta, box_theta, 12);
        prop_assert!(clipped.x.abs() <= half_phi * (1.0 + 1e-12));
        prop_assert!(clipped.y.abs() <= 0.5 * box_theta * (1.0 + 1e-12));
        if dp.norm() > 0.0 && clipped.norm() > 0.0 {
            prop_assert!(dp.dot(&clipped) / (dp.norm() * clipped.norm()) > 1.0 - 1e-12);
        }
    }

    /// The derivative of the fraction with respect to the signed distance is
    /// non-negative (it is the plane patch area over the cell volume).
    #[test]
    fn area_derivative_nonnegative(seed in any::<u64>()) {
        let mut rng = SplitMix64::new(seed);
        let mesh = common::random_cell(&mut rng, (seed % 3) as usize);
        let plane = common::random_cutting_plane(&mut rng, &mesh, 0.02);
        let tr = fbnr::truncation::truncate_with_gradient(&mesh, 0, &plane).unwrap();
        prop_assert!(tr.grad.d_s >= -1e-12);
    }
}
