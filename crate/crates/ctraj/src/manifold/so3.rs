//! Closed-form SO(3) maps: exponential, logarithm, and left Jacobians.
//!
//! Rotations are stored as 3x3 matrices. All trigonometric coefficient
//! functions fall back to Taylor series below [`SMALL_ANGLE`] to avoid
//! cancellation in the sin/cos quotients.

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};

/// Angle below which series expansions replace the closed forms.
pub const SMALL_ANGLE: f64 = 1e-6;

/// Margin around pi inside which the logarithm is rejected as ambiguous.
pub const PI_BOUNDARY: f64 = 1e-9;

/// Skew-symmetric matrix of `w`, i.e. `skew(w) * v = w x v`.
#[rustfmt::skip]
pub fn skew(w: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(
        0.0, -w.z, w.y,
        w.z, 0.0, -w.x,
        -w.y, w.x, 0.0,
    )
}

/// `(1 - cos t) / t^2` with series fallback.
fn coeff_b(theta: f64) -> f64 {
    if theta < SMALL_ANGLE {
        let t2 = theta * theta;
        0.5 - t2 / 24.0 + t2 * t2 / 720.0
    } else {
        (1.0 - theta.cos()) / (theta * theta)
    }
}

/// `(t - sin t) / t^3` with series fallback.
fn coeff_c(theta: f64) -> f64 {
    if theta < SMALL_ANGLE {
        let t2 = theta * theta;
        1.0 / 6.0 - t2 / 120.0 + t2 * t2 / 5040.0
    } else {
        (theta - theta.sin()) / (theta * theta * theta)
    }
}

/// `sin t / t` with series fallback.
fn coeff_a(theta: f64) -> f64 {
    if theta < SMALL_ANGLE {
        let t2 = theta * theta;
        1.0 - t2 / 6.0 + t2 * t2 / 120.0
    } else {
        theta.sin() / theta
    }
}

/// Rodrigues formula, `exp(skew(phi))`.
pub fn exp(phi: &Vector3<f64>) -> Matrix3<f64> {
    let theta = phi.norm();
    let k = skew(phi);
    Matrix3::identity() + coeff_a(theta) * k + coeff_b(theta) * (k * k)
}

/// Rotation angle of `r`, in [0, pi].
pub fn angle(r: &Matrix3<f64>) -> f64 {
    let cos = ((r.trace() - 1.0) * 0.5).clamp(-1.0, 1.0);
    let w = anti_part(r);
    w.norm().atan2(cos)
}

fn anti_part(r: &Matrix3<f64>) -> Vector3<f64> {
    // vee((r - r^T) / 2) = sin(theta) * axis
    Vector3::new(
        0.5 * (r[(2, 1)] - r[(1, 2)]),
        0.5 * (r[(0, 2)] - r[(2, 0)]),
        0.5 * (r[(1, 0)] - r[(0, 1)]),
    )
}

/// Logarithm of a rotation matrix.
///
/// Fails with [`Error::AngleAtBoundary`] within [`PI_BOUNDARY`] of pi, where
/// the two antipodal branches coincide and the caller has to decide.
pub fn log(r: &Matrix3<f64>) -> Result<Vector3<f64>> {
    let cos = ((r.trace() - 1.0) * 0.5).clamp(-1.0, 1.0);
    let w = anti_part(r);
    let s = w.norm();
    let theta = s.atan2(cos);
    if std::f64::consts::PI - theta < PI_BOUNDARY {
        return Err(Error::AngleAtBoundary { angle: theta });
    }
    if theta < SMALL_ANGLE {
        // w = sin(theta) axis, theta / sin(theta) ~ 1 + theta^2/6
        return Ok(w * (1.0 + theta * theta / 6.0));
    }
    if theta < 2.9 {
        return Ok(w * (theta / s));
    }
    // Near pi the antisymmetric part loses the axis; recover it from the
    // symmetric part (1 - cos) a a^T and use w only for the sign.
    let b = 0.5 * (r + r.transpose()) - cos * Matrix3::identity();
    let mut best = 0;
    for i in 1..3 {
        if b[(i, i)] > b[(best, best)] {
            best = i;
        }
    }
    let col = b.column(best).into_owned();
    let mut axis = col / col.norm();
    if axis.dot(&w) < 0.0 {
        axis = -axis;
    }
    Ok(axis * theta)
}

/// Left Jacobian of SO(3).
pub fn left_jacobian(phi: &Vector3<f64>) -> Matrix3<f64> {
    let theta = phi.norm();
    let k = skew(phi);
    Matrix3::identity() + coeff_b(theta) * k + coeff_c(theta) * (k * k)
}

/// `(1/t^2) - (1 + cos t) / (2 t sin t)` with series fallback.
fn coeff_e(theta: f64) -> f64 {
    if theta < SMALL_ANGLE {
        let t2 = theta * theta;
        1.0 / 12.0 + t2 / 720.0 + t2 * t2 / 30240.0
    } else {
        1.0 / (theta * theta) - (1.0 + theta.cos()) / (2.0 * theta * theta.sin())
    }
}

/// Inverse of the left Jacobian of SO(3). Requires `|phi| < 2 pi`.
pub fn left_jacobian_inv(phi: &Vector3<f64>) -> Matrix3<f64> {
    let theta = phi.norm();
    let k = skew(phi);
    Matrix3::identity() - 0.5 * k + coeff_e(theta) * (k * k)
}

/// Project a nearly orthonormal matrix back onto SO(3).
pub fn orthonormalize(m: &Matrix3<f64>) -> Matrix3<f64> {
    let svd = m.svd(true, true);
    let u = svd.u.unwrap();
    let vt = svd.v_t.unwrap();
    let mut r = u * vt;
    if r.determinant() < 0.0 {
        let mut u = u;
        u.column_mut(2).neg_mut();
        r = u * vt;
    }
    r
}
