//! Closed-form SE(3) left Jacobian blocks.
//!
//! Tangent vectors are ordered `[translation; rotation]`, matching the twist
//! convention `[v; w]`. The left Jacobian has the block form
//! `[[J_l(phi), Q(rho, phi)], [0, J_l(phi)]]` where `Q` couples translation
//! and rotation.

use nalgebra::{Matrix3, Vector3};

use super::so3::{self, skew, SMALL_ANGLE};

/// Coupling block of the SE(3) left Jacobian.
pub fn q_matrix(rho: &Vector3<f64>, phi: &Vector3<f64>) -> Matrix3<f64> {
    let theta = phi.norm();
    let (c2, c3, c4) = if theta < SMALL_ANGLE {
        let t2 = theta * theta;
        (
            1.0 / 6.0 - t2 / 120.0 + t2 * t2 / 5040.0,
            1.0 / 24.0 - t2 / 720.0 + t2 * t2 / 40320.0,
            1.0 / 120.0 - t2 / 2520.0 + t2 * t2 / 120960.0,
        )
    } else {
        let (s, c) = theta.sin_cos();
        let t3 = theta * theta * theta;
        (
            (theta - s) / t3,
            (theta * theta + 2.0 * c - 2.0) / (2.0 * t3 * theta),
            (2.0 * theta - 3.0 * s + theta * c) / (2.0 * t3 * theta * theta),
        )
    };
    let p = skew(phi);
    let r = skew(rho);
    let pr = p * r;
    let rp = r * p;
    let prp = pr * p;
    0.5 * r
        + c2 * (pr + rp + prp)
        + c3 * (p * pr + rp * p - 3.0 * prp)
        + c4 * (prp * p + p * rp * p)
}

/// SE(3) left Jacobian as four 3x3 blocks `(top-left, top-right)`; the
/// bottom-right equals the top-left and the bottom-left is zero.
pub fn left_jacobian_blocks(rho: &Vector3<f64>, phi: &Vector3<f64>) -> (Matrix3<f64>, Matrix3<f64>) {
    (so3::left_jacobian(phi), q_matrix(rho, phi))
}

/// Inverse SE(3) left Jacobian blocks `(top-left, top-right)`.
pub fn left_jacobian_inv_blocks(
    rho: &Vector3<f64>,
    phi: &Vector3<f64>,
) -> (Matrix3<f64>, Matrix3<f64>) {
    let jinv = so3::left_jacobian_inv(phi);
    let q = q_matrix(rho, phi);
    (jinv, -jinv * q * jinv)
}
