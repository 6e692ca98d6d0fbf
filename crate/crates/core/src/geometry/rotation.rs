//! Angle-axis ↔ rotation matrix conversions.

use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};

/// Rodrigues' formula. `|a|` is the rotation angle in radians.
pub fn angle_axis_to_rotation(a: &Vector3<f64>) -> Matrix3<f64> {
    let theta2 = a.norm_squared();
    let k = skew(a);
    if theta2 < 1e-24 {
        return Matrix3::identity() + k;
    }
    let theta = theta2.sqrt();
    let (s, c) = theta.sin_cos();
    Matrix3::identity() + k * (s / theta) + k * k * ((1.0 - c) / theta2)
}

/// Inverse of [`angle_axis_to_rotation`] with angle in `[0, π]`.
///
/// Near π the axis comes from the column of the symmetric part's `n nᵀ` term
/// with the largest diagonal entry.
pub fn rotation_to_angle_axis(r: &Matrix3<f64>) -> Vector3<f64> {
    let cos = ((r.trace() - 1.0) * 0.5).clamp(-1.0, 1.0);
    let w = Vector3::new(
        r[(2, 1)] - r[(1, 2)],
        r[(0, 2)] - r[(2, 0)],
        r[(1, 0)] - r[(0, 1)],
    );
    let sin = 0.5 * w.norm();
    let theta = sin.atan2(cos);
    if theta < 1e-6 {
        // sin θ / θ ≈ 1 - θ²/6
        return w * (0.5 * (1.0 + theta * theta / 6.0));
    }
    if PI - theta > 1e-4 {
        return w * (theta / (2.0 * sin));
    }
    // symmetric part is cos θ·I + (1 - cos θ)·n nᵀ
    let sym = (r + r.transpose()) * 0.5;
    let b = (sym - Matrix3::identity() * cos) / (1.0 - cos);
    let i = (0..3)
        .max_by(|&i, &j| b[(i, i)].total_cmp(&b[(j, j)]))
        .expect("three candidates");
    let mut axis = b.column(i).into_owned() / b[(i, i)].max(0.0).sqrt();
    axis.normalize_mut();
    // keep the sign consistent with the antisymmetric part when it is informative
    if axis.dot(&w) < 0.0 {
        axis = -axis;
    }
    axis * theta
}

/// Geodesic angle between two rotations, radians.
pub fn rotation_angle_between(a: &Matrix3<f64>, b: &Matrix3<f64>) -> f64 {
    rotation_to_angle_axis(&(a * b.transpose())).norm()
}

/// Among the representations `a + 2πk·â` of the same rotation, the one closest
/// to `reference`.
pub fn unwrap_angle_axis(a: &Vector3<f64>, reference: &Vector3<f64>) -> Vector3<f64> {
    let theta = a.norm();
    if theta < 1e-12 {
        // identity: candidates are 2πk along any axis; pick along the reference
        let r = reference.norm();
        if r < PI {
            return *a;
        }
        let k = (r / (2.0 * PI)).round();
        return reference / r * (2.0 * PI * k);
    }
    let axis = a / theta;
    let mut best = *a;
    let mut best_d = (a - reference).norm_squared();
    // representations θ + 2πk along axis, including negative multiples
    let proj = reference.dot(&axis);
    let k0 = ((proj - theta) / (2.0 * PI)).round();
    for k in [k0 - 1.0, k0, k0 + 1.0] {
        let cand = axis * (theta + 2.0 * PI * k);
        let d = (cand - reference).norm_squared();
        if d < best_d {
            best = cand;
            best_d = d;
        }
    }
    best
}

fn skew(a: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -a.z, a.y, a.z, 0.0, -a.x, -a.y, a.x, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn identity_has_zero_vector() {
        assert_eq!(
            rotation_to_angle_axis(&Matrix3::identity()),
            Vector3::zeros()
        );
    }

    #[test]
    fn quarter_turn_about_z() {
        let r = Matrix3::new(0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0);
        let a = rotation_to_angle_axis(&r);
        assert!((a - Vector3::new(0.0, 0.0, PI / 2.0)).norm() < 1e-12);
        assert!((angle_axis_to_rotation(&a) - r).norm() < 1e-12);
    }

    #[test]
    fn half_turn_recovers_axis() {
        let axis = Vector3::new(1.0, 2.0, -2.0).normalize();
        let r = angle_axis_to_rotation(&(axis * PI));
        let a = rotation_to_angle_axis(&r);
        assert!((a.norm() - PI).abs() < 1e-9);
        assert!((angle_axis_to_rotation(&a) - r).norm() < 1e-9);
    }

    #[test]
    fn matches_nalgebra_scaled_axis() {
        let a = Vector3::new(0.4, -1.2, 0.7);
        let r = angle_axis_to_rotation(&a);
        let na_r = nalgebra::Rotation3::new(a);
        assert!((r - na_r.matrix()).norm() < 1e-12);
    }

    #[test]
    fn unwrap_picks_nearest_chart() {
        let a = Vector3::new(0.0, 0.0, PI - 0.05);
        let b = Vector3::new(0.0, 0.0, -(PI - 0.05)); // same axis, just across ±π
        let u = unwrap_angle_axis(&b, &a);
        assert!((u - Vector3::new(0.0, 0.0, PI + 0.05)).norm() < 1e-12);
        assert!((angle_axis_to_rotation(&u) - angle_axis_to_rotation(&b)).norm() < 1e-12);
    }

    proptest! {
        #[test]
        fn roundtrip_random_rotations(x in -1.0f64..1.0, y in -1.0f64..1.0, z in -1.0f64..1.0, angle in 0.0f64..(PI - 1e-3)) {
            let v = Vector3::new(x, y, z);
            prop_assume!(v.norm() > 1e-3);
            let a = v.normalize() * angle;
            let r = angle_axis_to_rotation(&a);
            let back = angle_axis_to_rotation(&rotation_to_angle_axis(&r));
            prop_assert!((back - r).norm() < 1e-9);
        }

        #[test]
        fn roundtrip_near_half_turn(x in -1.0f64..1.0, y in -1.0f64..1.0, z in -1.0f64..1.0, gap in 0.0f64..1e-3) {
            let v = Vector3::new(x, y, z);
            prop_assume!(v.norm() > 1e-3);
            let a = v.normalize() * (PI - gap);
            let r = angle_axis_to_rotation(&a);
            let back = rotation_to_angle_axis(&r);
            prop_assert!((angle_axis_to_rotation(&back) - r).norm() < 1e-9);
            prop_assert!((back.norm() - (PI - gap)).abs() < 1e-9);
        }
    }
}
