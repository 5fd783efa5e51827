//! White-noise-on-acceleration / white-noise-on-jerk motion models.
//!
//! Provides the state-transition matrices and process covariances of the two
//! models in closed form, linear motion-prior residuals for arbitrary
//! time-invariant linear systems, and the Lie-group motion-prior residual
//! with its analytic Jacobians. States stack as `[pos; vel]` (WNOA) or
//! `[pos; vel; acc]` (WNOJ) with `d` entries per block.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{integrate_vector, kron};
use crate::manifold::{
    left_jacobian_inv, right_jacobian_inv, small_adjoint, KinematicState, TangentVector,
};

/// Selects the white-noise derivative of the motion model.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelOrder {
    /// White noise on acceleration; state is `[pos; vel]`.
    Wnoa,
    /// White noise on jerk; state is `[pos; vel; acc]`.
    Wnoj,
}

impl ModelOrder {
    /// Number of `d`-sized blocks in the stacked state.
    pub fn blocks(&self) -> usize {
        match self {
            ModelOrder::Wnoa => 2,
            ModelOrder::Wnoj => 3,
        }
    }
}

/// Power-spectral density of the driving white noise, a symmetric
/// positive-definite `d x d` matrix.
#[derive(Clone, Debug)]
pub struct ProcessNoise {
    q: DMatrix<f64>,
}

impl ProcessNoise {
    pub fn new(q: DMatrix<f64>) -> Result<Self> {
        if q.nrows() != q.ncols() {
            return Err(Error::DimensionMismatch {
                expected: q.nrows(),
                actual: q.ncols(),
            });
        }
        if (&q - q.transpose()).abs().max() > 1e-12 {
            return Err(Error::InvalidArgument {
                detail: "process noise must be symmetric".into(),
            });
        }
        if q.clone().cholesky().is_none() {
            return Err(Error::InvalidArgument {
                detail: "process noise must be positive definite".into(),
            });
        }
        Ok(ProcessNoise { q })
    }

    pub fn isotropic(d: usize, psd: f64) -> Self {
        ProcessNoise {
            q: DMatrix::identity(d, d) * psd,
        }
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        ProcessNoise {
            q: DMatrix::from_diagonal(&DVector::from_column_slice(diag)),
        }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.q
    }

    pub fn dim(&self) -> usize {
        self.q.nrows()
    }
}

/// Transition matrix in scalar (per-coordinate) form, `blocks x blocks`.
pub(crate) fn transition_scalar(dt: f64, order: ModelOrder) -> DMatrix<f64> {
    match order {
        ModelOrder::Wnoa => DMatrix::from_row_slice(2, 2, &[1.0, dt, 0.0, 1.0]),
        ModelOrder::Wnoj => DMatrix::from_row_slice(
            3,
            3,
            &[1.0, dt, 0.5 * dt * dt, 0.0, 1.0, dt, 0.0, 0.0, 1.0],
        ),
    }
}

/// Process covariance in scalar form (unit PSD), `blocks x blocks`.
pub(crate) fn covariance_scalar(dt: f64, order: ModelOrder) -> DMatrix<f64> {
    let dt2 = dt * dt;
    let dt3 = dt2 * dt;
    match order {
        ModelOrder::Wnoa => DMatrix::from_row_slice(2, 2, &[dt3 / 3.0, dt2 / 2.0, dt2 / 2.0, dt]),
        ModelOrder::Wnoj => {
            let dt4 = dt3 * dt;
            let dt5 = dt4 * dt;
            DMatrix::from_row_slice(
                3,
                3,
                &[
                    dt5 / 20.0,
                    dt4 / 8.0,
                    dt3 / 6.0,
                    dt4 / 8.0,
                    dt3 / 3.0,
                    dt2 / 2.0,
                    dt3 / 6.0,
                    dt2 / 2.0,
                    dt,
                ],
            )
        }
    }
}

/// Block-upper-triangular state transition over an interval of length `dt`.
pub fn transition_matrix(dt: f64, order: ModelOrder, d: usize) -> DMatrix<f64> {
    kron(&transition_scalar(dt, order), &DMatrix::identity(d, d))
}

/// Accumulated process covariance over an interval of length `dt`.
///
/// Closed form of the white-noise integral; `dt` must be positive.
pub fn process_covariance(dt: f64, order: ModelOrder, q: &ProcessNoise) -> Result<DMatrix<f64>> {
    if dt <= 0.0 {
        return Err(Error::DegenerateInterval { dt });
    }
    Ok(process_covariance_unchecked(dt, order, q))
}

/// Same closed form without the positivity check; `dt = 0` yields zeros.
pub(crate) fn process_covariance_unchecked(
    dt: f64,
    order: ModelOrder,
    q: &ProcessNoise,
) -> DMatrix<f64> {
    kron(&covariance_scalar(dt, order), q.matrix())
}

type InputFn = Arc<dyn Fn(f64) -> DVector<f64> + Send + Sync>;

/// Time-invariant linear system `dx = A x + B u + L w`.
#[derive(Clone)]
pub struct LinearSystem {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub l: DMatrix<f64>,
    input: Option<InputFn>,
}

impl LinearSystem {
    pub fn new(
        a: DMatrix<f64>,
        b: DMatrix<f64>,
        l: DMatrix<f64>,
        input: Option<InputFn>,
    ) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n || b.nrows() != n || l.nrows() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: a.ncols().max(b.nrows()).max(l.nrows()),
            });
        }
        Ok(LinearSystem { a, b, l, input })
    }

    /// Companion-form WNOA or WNOJ system of coordinate dimension `d`,
    /// without a known input.
    pub fn canonical(order: ModelOrder, d: usize) -> Self {
        let blocks = order.blocks();
        let n = blocks * d;
        let mut a = DMatrix::zeros(n, n);
        for b in 0..blocks - 1 {
            for i in 0..d {
                a[(b * d + i, (b + 1) * d + i)] = 1.0;
            }
        }
        let mut l = DMatrix::zeros(n, d);
        for i in 0..d {
            l[((blocks - 1) * d + i, i)] = 1.0;
        }
        LinearSystem {
            a,
            b: DMatrix::zeros(n, 1),
            l,
            input: None,
        }
    }

    pub fn with_input(mut self, b: DMatrix<f64>, input: InputFn) -> Self {
        self.b = b;
        self.input = Some(input);
        self
    }

    pub fn state_dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn has_input(&self) -> bool {
        self.input.is_some()
    }

    /// State transition matrix `exp(A dt)`.
    pub fn transition(&self, dt: f64) -> DMatrix<f64> {
        (&self.a * dt).exp()
    }

    /// Forced response `int_{t0}^{t1} exp(A (t1 - s)) B u(s) ds`.
    pub fn forced_response(&self, t0: f64, t1: f64) -> DVector<f64> {
        match &self.input {
            None => DVector::zeros(self.state_dim()),
            Some(u) => integrate_vector(
                |s| self.transition(t1 - s) * &self.b * u(s),
                t0,
                t1,
                8,
            ),
        }
    }
}

/// Linear motion-prior residual over `[t_j, t_j + dt]`.
///
/// With a known input the prior-mean terms contribute the forced response;
/// without one the residual reduces to `x_{j+1} - Phi(dt) x_j`.
pub fn linear_prior_residual(
    x_j: &DVector<f64>,
    x_j1: &DVector<f64>,
    t_j: f64,
    dt: f64,
    sys: &LinearSystem,
) -> Result<DVector<f64>> {
    let n = sys.state_dim();
    if x_j.len() != n || x_j1.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: x_j.len(),
        });
    }
    let phi = sys.transition(dt);
    Ok(x_j1 - phi * x_j - sys.forced_response(t_j, t_j + dt))
}

/// Local increment and first derivative between two kinematic states.
///
/// Returns `(xi, J_l^{-1}(xi), xi_dot)` where `xi = Log(g_{j+1} g_j^{-1})`
/// and `xi_dot = J_l^{-1}(xi) dg_{j+1}`.
pub(crate) fn relative_motion(
    s_j: &KinematicState,
    s_j1: &KinematicState,
) -> Result<(TangentVector, DMatrix<f64>, DVector<f64>)> {
    if s_j.group() != s_j1.group() {
        return Err(Error::InvalidArgument {
            detail: "motion prior states must share one group".into(),
        });
    }
    let xi = s_j1.value.compose(&s_j.value.inverse()).log()?;
    let jinv = left_jacobian_inv(&xi);
    let xi_dot = &jinv * &s_j1.velocity.coords;
    Ok((xi, jinv, xi_dot))
}

/// Lie-group WNOJ motion-prior residual between two states `dt` apart.
///
/// Rows stack the position, velocity, and acceleration defects of the local
/// WNOJ model expressed in global variables. On a Euclidean group this
/// reduces exactly to the linear WNOJ residual.
pub fn lie_prior_residual(
    s_j: &KinematicState,
    s_j1: &KinematicState,
    dt: f64,
) -> Result<DVector<f64>> {
    if dt <= 0.0 {
        return Err(Error::DegenerateInterval { dt });
    }
    let (xi, jinv, xi_dot) = relative_motion(s_j, s_j1)?;
    let d = s_j.group().dim();
    let xi_dot_tv = TangentVector::new(s_j.group(), xi_dot.clone())?;
    let mut r = DVector::zeros(3 * d);
    r.rows_mut(0, d).copy_from(
        &(&xi.coords - &s_j.velocity.coords * dt - &s_j.acceleration.coords * (0.5 * dt * dt)),
    );
    r.rows_mut(d, d)
        .copy_from(&(&xi_dot - &s_j.velocity.coords - &s_j.acceleration.coords * dt));
    r.rows_mut(2 * d, d).copy_from(
        &(&jinv * &s_j1.acceleration.coords
            - small_adjoint(&xi_dot_tv) * &s_j1.velocity.coords * 0.5
            - &s_j.acceleration.coords),
    );
    Ok(r)
}

/// Analytic Jacobians of [`lie_prior_residual`].
///
/// Returned in parameter order `(g_j, dg_j, ddg_j, g_{j+1}, dg_{j+1},
/// ddg_{j+1})`, each `3d x d`, for left-tangent perturbations of the group
/// elements and additive perturbations of the derivatives. The blocks
/// involving the left-Jacobian derivative are first-order approximations,
/// accurate for small velocities; the constant blocks are exact.
pub fn lie_prior_jacobians(
    s_j: &KinematicState,
    s_j1: &KinematicState,
    dt: f64,
) -> Result<[DMatrix<f64>; 6]> {
    if dt <= 0.0 {
        return Err(Error::DegenerateInterval { dt });
    }
    let (xi, jinv, xi_dot) = relative_motion(s_j, s_j1)?;
    let group = s_j.group();
    let d = group.dim();
    let id = DMatrix::identity(d, d);

    let ad_vel1 = small_adjoint(&s_j1.velocity);
    let ad_acc1 = small_adjoint(&s_j1.acceleration);
    let ad_xi_dot = small_adjoint(&TangentVector::new(group, xi_dot)?);

    let dxi_dgj = -right_jacobian_inv(&xi);
    let dxi_dgj1 = jinv.clone();
    let dxid_dgj = 0.5 * &ad_vel1 * &dxi_dgj;
    let dxid_dgj1 = 0.5 * &ad_vel1 * &dxi_dgj1;

    let stack = |top: &DMatrix<f64>, mid: &DMatrix<f64>, bot: &DMatrix<f64>| {
        let mut out = DMatrix::zeros(3 * d, d);
        out.rows_mut(0, d).copy_from(top);
        out.rows_mut(d, d).copy_from(mid);
        out.rows_mut(2 * d, d).copy_from(bot);
        out
    };

    let j_gj = stack(
        &dxi_dgj,
        &dxid_dgj,
        &(0.5 * &ad_acc1 * &dxi_dgj + 0.5 * &ad_vel1 * &dxid_dgj),
    );
    let j_dgj = stack(&(-dt * &id), &(-&id), &DMatrix::zeros(d, d));
    let j_ddgj = stack(&(-0.5 * dt * dt * &id), &(-dt * &id), &(-&id));
    let j_gj1 = stack(
        &dxi_dgj1,
        &dxid_dgj1,
        &(0.5 * &ad_acc1 * &dxi_dgj1 + 0.5 * &ad_vel1 * &dxid_dgj1),
    );
    let j_dgj1 = stack(
        &DMatrix::zeros(d, d),
        &jinv,
        &(-0.5 * (&ad_xi_dot - &ad_vel1 * &jinv)),
    );
    let j_ddgj1 = stack(&DMatrix::zeros(d, d), &DMatrix::zeros(d, d), &jinv);

    Ok([j_gj, j_dgj, j_ddgj, j_gj1, j_dgj1, j_ddgj1])
}
