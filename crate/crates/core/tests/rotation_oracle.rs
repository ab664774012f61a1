//! Rotation conversions against an independent quaternion oracle, plus the
//! round-trip and Gram-Schmidt property suites.

#![allow(clippy::needless_range_loop)]

mod common;

use proptest::prelude::*;
use sparsepose::rng::Rng64;
use sparsepose::rotations::{
    angular_velocity, axis_angle_to_matrix, geodesic_angle, matrix_to_6d, matrix_to_axis_angle,
    recover_6d, AxisAngle, RotMatrix, Rotation6D,
};

#[test]
fn rodrigues_matches_quaternion_oracle() {
    // includes the fixed probe used by the unit tests
    let mut rng = Rng64::new(2024);
    let mut cases = vec![AxisAngle::new([0.3, -0.2, 0.1])];
    for _ in 0..1000 {
        cases.push(common::random_rotation_axis_angle(&mut rng));
    }
    for aa in cases {
        let got = axis_angle_to_matrix(aa).unwrap();
        let want = common::quat_oracle_matrix(aa);
        common::assert_mat_close(&got, &want, 1e-12, "rodrigues vs quaternion");
    }
}

#[test]
fn axis_angle_round_trip_1000() {
    let mut rng = Rng64::new(7);
    for _ in 0..1000 {
        let aa = common::random_rotation_axis_angle(&mut rng);
        let m = axis_angle_to_matrix(aa).unwrap();
        let back = axis_angle_to_matrix(matrix_to_axis_angle(&m)).unwrap();
        common::assert_mat_close(&back, &m.rows(), 1e-6, "axis-angle round trip");
    }
}

#[test]
fn six_d_round_trip_1000() {
    let mut rng = Rng64::new(8);
    for _ in 0..1000 {
        let aa = common::random_rotation_axis_angle(&mut rng);
        let m = axis_angle_to_matrix(aa).unwrap();
        let rec = recover_6d(&matrix_to_6d(&m)).unwrap();
        common::assert_mat_close(&rec, &m.rows(), 1e-9, "6D round trip");
    }
}

#[test]
fn gram_schmidt_output_is_always_valid() {
    let mut rng = Rng64::new(9);
    let mut checked = 0;
    while checked < 1000 {
        let code = Rotation6D::new([
            rng.uniform(-3.0, 3.0),
            rng.uniform(-3.0, 3.0),
            rng.uniform(-3.0, 3.0),
            rng.uniform(-3.0, 3.0),
            rng.uniform(-3.0, 3.0),
            rng.uniform(-3.0, 3.0),
        ]);
        match recover_6d(&code) {
            Ok(m) => {
                assert!(m.is_valid(), "recovered matrix violates invariants");
                assert!((m.det() - 1.0).abs() < 1e-6);
                checked += 1;
            }
            Err(_) => {
                // degenerate draws are legal inputs to reject, not failures
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn geodesic_is_symmetric(seed in 0u64..1_000_000) {
        let mut rng = Rng64::new(seed);
        let a = axis_angle_to_matrix(common::random_rotation_axis_angle(&mut rng)).unwrap();
        let b = axis_angle_to_matrix(common::random_rotation_axis_angle(&mut rng)).unwrap();
        let d_ab = geodesic_angle(&a, &b);
        let d_ba = geodesic_angle(&b, &a);
        prop_assert!((d_ab - d_ba).abs() < 1e-12);
        prop_assert!((0.0..=std::f64::consts::PI).contains(&d_ab));
    }

    #[test]
    fn geodesic_identity_of_indiscernibles(seed in 0u64..1_000_000) {
        let mut rng = Rng64::new(seed);
        let a = axis_angle_to_matrix(common::random_rotation_axis_angle(&mut rng)).unwrap();
        prop_assert!(geodesic_angle(&a, &a) < 1e-9);
    }

    #[test]
    fn angular_velocity_recovers_the_step(seed in 0u64..1_000_000) {
        let mut rng = Rng64::new(seed);
        let r = axis_angle_to_matrix(common::random_rotation_axis_angle(&mut rng)).unwrap();
        let delta = axis_angle_to_matrix(common::random_rotation_axis_angle(&mut rng)).unwrap();
        let cur = r.mul(&delta);
        let omega = angular_velocity(&r, &cur);
        common::assert_mat_close(&omega, &delta.rows(), 1e-12, "angular velocity");
    }

    #[test]
    fn recover_is_scale_invariant(seed in 0u64..1_000_000, scale in 0.1f64..10.0) {
        let mut rng = Rng64::new(seed);
        let m = axis_angle_to_matrix(common::random_rotation_axis_angle(&mut rng)).unwrap();
        let code = matrix_to_6d(&m);
        let scaled = Rotation6D::new([
            code.r[0] * scale, code.r[1] * scale, code.r[2] * scale,
            code.r[3] * scale, code.r[4] * scale, code.r[5] * scale,
        ]);
        let rec = recover_6d(&scaled).unwrap();
        common::assert_mat_close(&rec, &m.rows(), 1e-9, "scale invariance");
    }
}

#[test]
fn canonical_angle_stays_in_range() {
    let mut rng = Rng64::new(10);
    for _ in 0..1000 {
        let raw = [
            rng.uniform(-10.0, 10.0),
            rng.uniform(-10.0, 10.0),
            rng.uniform(-10.0, 10.0),
        ];
        let aa = AxisAngle::new(raw);
        assert!(aa.angle() <= std::f64::consts::PI + 1e-12);
        // canonicalization preserves the rotation itself
        let direct = axis_angle_to_matrix(AxisAngle { v: raw }).unwrap();
        let canon = axis_angle_to_matrix(aa).unwrap();
        common::assert_mat_close(&canon, &direct.rows(), 1e-9, "canonicalization");
    }
}

#[test]
fn matrix_constructors_agree_with_axis_angle() {
    for angle in [-2.1, -0.5, 0.0, 0.3, 1.7] {
        let rx = axis_angle_to_matrix(AxisAngle::new([angle, 0.0, 0.0])).unwrap();
        common::assert_mat_close(&RotMatrix::rx(angle), &rx.rows(), 1e-12, "rx");
        let ry = axis_angle_to_matrix(AxisAngle::new([0.0, angle, 0.0])).unwrap();
        common::assert_mat_close(&RotMatrix::ry(angle), &ry.rows(), 1e-12, "ry");
        let rz = axis_angle_to_matrix(AxisAngle::new([0.0, 0.0, angle])).unwrap();
        common::assert_mat_close(&RotMatrix::rz(angle), &rz.rows(), 1e-12, "rz");
    }
}
