//! Measurement and motion-prior factors.
//!
//! Every factor stores its measurement together with a whitening matrix `W`
//! (the inverse lower Cholesky factor of the measurement covariance), so the
//! solver minimizes plain squared norms of whitened residuals. Jacobians are
//! reported per connected parameter block for left-tangent perturbations.

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::manifold::{right_jacobian_inv, Group, KinematicState, ManifoldElement};
use crate::manifold::so3::skew;

/// Inverse lower Cholesky factor of `cov`, so `|W r|^2 = r^T cov^{-1} r`.
pub fn whitener_from_covariance(cov: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = cov.nrows();
    let chol = cov.clone().cholesky().ok_or_else(|| Error::InvalidArgument {
        detail: "measurement covariance must be positive definite".into(),
    })?;
    chol.l()
        .solve_lower_triangular(&DMatrix::identity(n, n))
        .ok_or_else(|| Error::InvalidArgument {
            detail: "degenerate covariance Cholesky factor".into(),
        })
}

/// Kinds of residual terms the estimator understands.
#[derive(Clone, Debug)]
pub enum FactorKind {
    /// Direct observation of the Euclidean position block.
    Position { z: DVector<f64> },
    /// Body-frame angular rate plus gyro bias.
    Gyro { z: Vector3<f64> },
    /// Body-frame specific force with gravity and accelerometer bias.
    Accel { z: Vector3<f64> },
    /// Relative pose of a known fiducial in the camera frame.
    FiducialPose {
        z: ManifoldElement,
        cam_from_body: ManifoldElement,
        tag_in_inertial: ManifoldElement,
    },
    /// WNOJ motion prior between the states at two sample times.
    MotionPrior { t_start: f64 },
}

/// One residual term of the estimation problem.
#[derive(Clone, Debug)]
pub struct Factor {
    pub kind: FactorKind,
    pub stamp: f64,
    pub(crate) whitener: DMatrix<f64>,
}

impl Factor {
    pub fn position(stamp: f64, z: DVector<f64>, cov: &DMatrix<f64>) -> Result<Self> {
        if cov.nrows() != z.len() {
            return Err(Error::DimensionMismatch {
                expected: z.len(),
                actual: cov.nrows(),
            });
        }
        Ok(Factor {
            kind: FactorKind::Position { z },
            stamp,
            whitener: whitener_from_covariance(cov)?,
        })
    }

    pub fn gyro(stamp: f64, z: Vector3<f64>, cov: &Matrix3<f64>) -> Result<Self> {
        Ok(Factor {
            kind: FactorKind::Gyro { z },
            stamp,
            whitener: whitener_from_covariance(&DMatrix::from_column_slice(3, 3, cov.as_slice()))?,
        })
    }

    pub fn accel(stamp: f64, z: Vector3<f64>, cov: &Matrix3<f64>) -> Result<Self> {
        Ok(Factor {
            kind: FactorKind::Accel { z },
            stamp,
            whitener: whitener_from_covariance(&DMatrix::from_column_slice(3, 3, cov.as_slice()))?,
        })
    }

    pub fn fiducial(
        stamp: f64,
        z: ManifoldElement,
        cam_from_body: ManifoldElement,
        tag_in_inertial: ManifoldElement,
        cov: &DMatrix<f64>,
    ) -> Result<Self> {
        if z.group() != Group::Se3 {
            return Err(Error::InvalidArgument {
                detail: "fiducial measurements are SE(3) elements".into(),
            });
        }
        Ok(Factor {
            kind: FactorKind::FiducialPose {
                z,
                cam_from_body,
                tag_in_inertial,
            },
            stamp,
            whitener: whitener_from_covariance(cov)?,
        })
    }

    pub(crate) fn motion_prior(t_start: f64, t_end: f64, q_dt: &DMatrix<f64>) -> Result<Self> {
        Ok(Factor {
            kind: FactorKind::MotionPrior { t_start },
            stamp: t_end,
            whitener: whitener_from_covariance(q_dt)?,
        })
    }

    pub fn residual_dim(&self) -> usize {
        self.whitener.nrows()
    }

    pub fn is_measurement(&self) -> bool {
        !matches!(self.kind, FactorKind::MotionPrior { .. })
    }

    pub fn is_imu(&self) -> bool {
        matches!(self.kind, FactorKind::Gyro { .. } | FactorKind::Accel { .. })
    }

    pub fn is_absolute(&self) -> bool {
        matches!(
            self.kind,
            FactorKind::Position { .. } | FactorKind::FiducialPose { .. }
        )
    }
}

/// Raw (unwhitened) measurement residual and its chain factors against the
/// interpolated kinematic state: `r`, `dr/d(value)`, `dr/d(vel)`,
/// `dr/d(acc)`, and `dr/d(bias)` where applicable.
pub(crate) struct MeasurementLin {
    pub residual: DVector<f64>,
    pub d_value: DMatrix<f64>,
    pub d_vel: DMatrix<f64>,
    pub d_acc: DMatrix<f64>,
    pub d_bias: Option<DMatrix<f64>>,
}

/// Body-frame angular rate implied by a kinematic state.
///
/// The stored velocity is the left-tangent derivative of the inertial-to-
/// body transform, which is the negated body twist.
pub fn body_angular_rate(state: &KinematicState) -> Vector3<f64> {
    -state.velocity.rotation_block()
}

/// Body-frame acceleration sensed by the accelerometer (without gravity or
/// bias): the rate of change of the body-frame velocity vector.
///
/// On SE(3) that is the negated translation block of the second left-tangent
/// derivative. On the split group the same quantity expands to
/// `w x (R p_dot) + R p_ddot`, keeping the two representations consistent
/// with one shared measurement stream.
pub fn body_acceleration(state: &KinematicState) -> Result<Vector3<f64>> {
    let group = state.group();
    match group {
        Group::Se3 => {
            let t = state.acceleration.translation_block();
            Ok(-Vector3::new(t[0], t[1], t[2]))
        }
        Group::So3xR3 => {
            let rot = state.value.rotation();
            let pd = state.velocity.translation_block();
            let pdd = state.acceleration.translation_block();
            let omega_left = state.velocity.rotation_block();
            let v_body = rot * Vector3::new(pd[0], pd[1], pd[2]);
            Ok(omega_left.cross(&v_body) + rot * Vector3::new(pdd[0], pdd[1], pdd[2]))
        }
        _ => Err(Error::InvalidArgument {
            detail: "IMU models need SE(3) or SO(3) x R^3 trajectories".into(),
        }),
    }
}

/// Predicted fiducial pose `T_cam_from_tag` for a trajectory state.
pub fn fiducial_prediction(
    state_value: &ManifoldElement,
    cam_from_body: &ManifoldElement,
    tag_in_inertial: &ManifoldElement,
) -> Result<ManifoldElement> {
    let pose = state_value.as_pose()?;
    Ok(cam_from_body.compose(&pose).compose(&tag_in_inertial.inverse()))
}

impl Factor {
    /// Evaluates the unwhitened residual and state-level chain factors at an
    /// interpolated state. Motion priors are handled separately.
    pub(crate) fn linearize_measurement(
        &self,
        state: &KinematicState,
        gyro_bias: Option<&DVector<f64>>,
        accel_bias: Option<&DVector<f64>>,
        gravity: f64,
    ) -> Result<MeasurementLin> {
        let group = state.group();
        let d = group.dim();
        match &self.kind {
            FactorKind::Position { z } => {
                let p = state.value.body_position();
                let mut d_value = DMatrix::zeros(z.len(), d);
                // The position block of a Euclidean state is the element
                // itself; left-tangent perturbations add directly.
                d_value
                    .view_mut((0, 0), (z.len(), z.len()))
                    .copy_from(&(-DMatrix::identity(z.len(), z.len())));
                Ok(MeasurementLin {
                    residual: z - p,
                    d_value,
                    d_vel: DMatrix::zeros(z.len(), d),
                    d_acc: DMatrix::zeros(z.len(), d),
                    d_bias: None,
                })
            }
            FactorKind::Gyro { z } => {
                let bias = gyro_bias.ok_or_else(|| Error::InvalidArgument {
                    detail: "gyro factor without a gyro bias block".into(),
                })?;
                let omega = body_angular_rate(state);
                let predicted = omega + Vector3::new(bias[0], bias[1], bias[2]);
                let mut d_vel = DMatrix::zeros(3, d);
                // r = z - (-S dg + b): +S on the rotation rows.
                for i in 0..3 {
                    d_vel[(i, d - 3 + i)] = 1.0;
                }
                Ok(MeasurementLin {
                    residual: DVector::from_column_slice((z - predicted).as_slice()),
                    d_value: DMatrix::zeros(3, d),
                    d_vel,
                    d_acc: DMatrix::zeros(3, d),
                    d_bias: Some(-DMatrix::identity(3, 3)),
                })
            }
            FactorKind::Accel { z } => {
                let bias = accel_bias.ok_or_else(|| Error::InvalidArgument {
                    detail: "accel factor without an accel bias block".into(),
                })?;
                let r_ib = state.value.rotation();
                let a = body_acceleration(state)?;
                let grav = gravity * r_ib * Vector3::z();
                let predicted = a - grav + Vector3::new(bias[0], bias[1], bias[2]);
                let mut d_value = DMatrix::zeros(3, d);
                let mut d_vel = DMatrix::zeros(3, d);
                let mut d_acc = DMatrix::zeros(3, d);
                match group {
                    Group::Se3 => {
                        // a = -S_t ddg; gravity depends on the rotation part.
                        for i in 0..3 {
                            d_acc[(i, i)] = 1.0;
                        }
                        let g_skew = skew(&(r_ib * Vector3::z())) * gravity;
                        // dr/d(value rot) = -d(predicted)/d(phi) = -(+g (Re3)^x)
                        for c in 0..3 {
                            for r in 0..3 {
                                d_value[(r, 3 + c)] = -g_skew[(r, c)];
                            }
                        }
                    }
                    Group::So3xR3 => {
                        // a = w_l x (R p_dot) + R p_ddot, with the gravity
                        // term -g R e3 sharing the rotation dependence.
                        let pd = state.velocity.translation_block();
                        let p_dot = Vector3::new(pd[0], pd[1], pd[2]);
                        let omega_left = state.velocity.rotation_block();
                        let v_body = r_ib * p_dot;
                        let w_skew = skew(&omega_left);
                        // d(predicted)/d(phi): each R-dependent product
                        // contributes -(term)^x under a left perturbation.
                        let dpred_dphi = -w_skew * skew(&v_body)
                            - skew(&(r_ib
                                * (Vector3::new(
                                    state.acceleration.coords[0],
                                    state.acceleration.coords[1],
                                    state.acceleration.coords[2],
                                ) - gravity * Vector3::z())));
                        let dpred_dpdot = w_skew * r_ib;
                        let dpred_domega = -skew(&v_body);
                        for c in 0..3 {
                            for r in 0..3 {
                                d_value[(r, 3 + c)] = -dpred_dphi[(r, c)];
                                d_vel[(r, c)] = -dpred_dpdot[(r, c)];
                                d_vel[(r, 3 + c)] = -dpred_domega[(r, c)];
                                d_acc[(r, c)] = -r_ib[(r, c)];
                            }
                        }
                    }
                    _ => {
                        return Err(Error::InvalidArgument {
                            detail: "IMU models need SE(3) or SO(3) x R^3 trajectories".into(),
                        })
                    }
                }
                Ok(MeasurementLin {
                    residual: DVector::from_column_slice((z - predicted).as_slice()),
                    d_value,
                    d_vel,
                    d_acc,
                    d_bias: Some(-DMatrix::identity(3, 3)),
                })
            }
            FactorKind::FiducialPose {
                z,
                cam_from_body,
                tag_in_inertial,
            } => {
                let predicted = fiducial_prediction(&state.value, cam_from_body, tag_in_inertial)?;
                let r = z.compose(&predicted.inverse()).log()?;
                // dr/d(pose tangent) = -J_r^{-1}(r) Ad_{cam_from_body}.
                let mut d_pose = -right_jacobian_inv(&r) * cam_from_body.adjoint();
                if group == Group::So3xR3 {
                    // Chain through the split-to-pose map: [-R, 0; 0, I].
                    let rot = state.value.rotation();
                    let mut m = DMatrix::identity(6, 6);
                    for c in 0..3 {
                        for rr in 0..3 {
                            m[(rr, c)] = -rot[(rr, c)];
                        }
                    }
                    d_pose *= m;
                }
                Ok(MeasurementLin {
                    residual: r.coords,
                    d_value: d_pose,
                    d_vel: DMatrix::zeros(6, d),
                    d_acc: DMatrix::zeros(6, d),
                    d_bias: None,
                })
            }
            FactorKind::MotionPrior { .. } => Err(Error::InvalidArgument {
                detail: "motion priors are linearized against two states".into(),
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn whitener_reproduces_weighted_norm() {
        let cov = DMatrix::from_row_slice(2, 2, &[0.04, 0.01, 0.01, 0.09]);
        let w = whitener_from_covariance(&cov).unwrap();
        let r = DVector::from_column_slice(&[0.3, -0.7]);
        let direct = (r.transpose() * cov.clone().lu().try_inverse().unwrap() * &r)[(0, 0)];
        let whitened = (&w * &r).norm_squared();
        assert_relative_eq!(whitened, direct, epsilon = 1e-12);
    }
}
