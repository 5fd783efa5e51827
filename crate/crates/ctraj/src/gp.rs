//! Gaussian-process trajectory representation.
//!
//! A trajectory is parameterized by full kinematic states at a set of
//! estimation times. Queries between estimation times evaluate the posterior
//! mean of the underlying WNOA/WNOJ model: two interpolation coefficient
//! matrices blend the bracketing states. On Lie groups the blend happens in
//! the local tangent coordinates of the left bracketing state and is mapped
//! back through the exponential.
//!
//! [`min_norm_interp`] solves the equivalent minimum-norm control problem by
//! quadrature and serves as an independent check on the closed-form
//! coefficients.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{integrate_matrix, kron};
use crate::manifold::{
    left_jacobian, left_jacobian_inv, right_jacobian_inv, small_adjoint, Group, KinematicState,
    ManifoldElement, TangentVector,
};
use crate::motion::{
    covariance_scalar, transition_scalar, LinearSystem, ModelOrder, ProcessNoise,
};

/// Blending matrices of the posterior-mean interpolation at one query time.
#[derive(Clone, Debug)]
pub struct InterpCoeffs {
    /// Coefficient of the left bracketing state.
    pub lambda: DMatrix<f64>,
    /// Coefficient of the right bracketing state.
    pub omega: DMatrix<f64>,
    /// Index of the left bracketing estimation time.
    pub segment: usize,
    /// Query position inside the segment, in [0, 1].
    pub u: f64,
}

/// Interpolation coefficients for a query at `tau` inside `[t_n, t_n1]`.
///
/// `omega = Q_tau Phi(t_n1, tau)^T Q_dt^{-1}` and
/// `lambda = Phi(tau, t_n) - omega Phi(t_n1, t_n)`. For the WNOA/WNOJ models
/// the process noise cancels and the blocks reduce to scalars times the
/// identity, which is how they are computed here.
pub fn interp_coeffs(
    tau: f64,
    t_n: f64,
    t_n1: f64,
    order: ModelOrder,
    q: &ProcessNoise,
) -> Result<InterpCoeffs> {
    if t_n1 <= t_n {
        return Err(Error::DegenerateInterval { dt: t_n1 - t_n });
    }
    if tau < t_n || tau > t_n1 {
        return Err(Error::OutOfSegment {
            tau,
            start: t_n,
            end: t_n1,
        });
    }
    let d = q.dim();
    let (lambda_s, omega_s) = scalar_coeffs(tau - t_n, t_n1 - t_n, order);
    let id = DMatrix::identity(d, d);
    Ok(InterpCoeffs {
        lambda: kron(&lambda_s, &id),
        omega: kron(&omega_s, &id),
        segment: 0,
        u: (tau - t_n) / (t_n1 - t_n),
    })
}

/// Scalar-form coefficients (per coordinate) as `blocks x blocks` matrices.
fn scalar_coeffs(s: f64, dt: f64, order: ModelOrder) -> (DMatrix<f64>, DMatrix<f64>) {
    let q_s = covariance_scalar(s, order);
    let q_dt = covariance_scalar(dt, order);
    let q_dt_inv = q_dt
        .lu()
        .try_inverse()
        .expect("closed-form process covariance is invertible for dt > 0");
    let omega = &q_s * transition_scalar(dt - s, order).transpose() * q_dt_inv;
    let lambda = transition_scalar(s, order) - &omega * transition_scalar(dt, order);
    (lambda, omega)
}

/// Trajectory represented by kinematic states at increasing estimation times.
#[derive(Clone)]
pub struct GpTrajectory {
    group: Group,
    order: ModelOrder,
    times: Vec<f64>,
    states: Vec<KinematicState>,
    q: ProcessNoise,
}

impl GpTrajectory {
    /// Builds a trajectory; times must be strictly increasing and every
    /// state must live on `group`. Under the WNOA model the acceleration
    /// entries of the states are ignored.
    pub fn new(
        group: Group,
        order: ModelOrder,
        times: Vec<f64>,
        states: Vec<KinematicState>,
        q: ProcessNoise,
    ) -> Result<Self> {
        if times.len() != states.len() {
            return Err(Error::DimensionMismatch {
                expected: times.len(),
                actual: states.len(),
            });
        }
        if times.len() < 2 {
            return Err(Error::InvalidArgument {
                detail: "a GP trajectory needs at least two estimation times".into(),
            });
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument {
                detail: "estimation times must be strictly increasing".into(),
            });
        }
        if states.iter().any(|s| s.group() != group) {
            return Err(Error::InvalidArgument {
                detail: "all states must live on the trajectory group".into(),
            });
        }
        if q.dim() != group.dim() {
            return Err(Error::DimensionMismatch {
                expected: group.dim(),
                actual: q.dim(),
            });
        }
        Ok(GpTrajectory {
            group,
            order,
            times,
            states,
            q,
        })
    }

    pub fn group(&self) -> Group {
        self.group
    }

    pub fn order(&self) -> ModelOrder {
        self.order
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[KinematicState] {
        &self.states
    }

    pub fn states_mut(&mut self) -> &mut [KinematicState] {
        &mut self.states
    }

    pub fn process_noise(&self) -> &ProcessNoise {
        &self.q
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.times[0], *self.times.last().unwrap())
    }

    /// Index of the segment containing `tau`; a query exactly on an
    /// estimation time belongs to the segment on its left.
    pub fn segment_for(&self, tau: f64) -> Result<usize> {
        let (start, end) = self.domain();
        let tol = 1e-9 * (end - start).abs().max(1.0);
        if tau < start - tol || tau > end + tol {
            return Err(Error::OutOfRange { tau, start, end });
        }
        let idx = self.times.partition_point(|t| *t < tau);
        Ok(idx.saturating_sub(1).min(self.times.len() - 2))
    }

    /// Coefficients for a query at `tau`, with the segment index filled in.
    pub fn coeffs_at(&self, tau: f64) -> Result<InterpCoeffs> {
        let seg = self.segment_for(tau)?;
        let (t0, t1) = (self.times[seg], self.times[seg + 1]);
        let mut c = interp_coeffs(tau.clamp(t0, t1), t0, t1, self.order, &self.q)?;
        c.segment = seg;
        Ok(c)
    }

    /// Index of the estimation time exactly equal to `tau`, if any.
    fn exact_hit(&self, seg: usize, tau: f64) -> Option<usize> {
        if self.times[seg] == tau {
            Some(seg)
        } else if self.times[seg + 1] == tau {
            Some(seg + 1)
        } else {
            None
        }
    }

    /// Posterior-mean state at `tau` for Euclidean trajectories, stacked as
    /// `[pos; vel; acc]` (WNOJ) or `[pos; vel]` (WNOA).
    pub fn interp_linear(&self, tau: f64) -> Result<DVector<f64>> {
        if !matches!(self.group, Group::Euclidean(_)) {
            return Err(Error::InvalidArgument {
                detail: "interp_linear requires a Euclidean trajectory".into(),
            });
        }
        let seg = self.segment_for(tau)?;
        let blocks = self.order.blocks();
        let d = self.group.dim();
        if let Some(i) = self.exact_hit(seg, tau) {
            return Ok(self.states[i].to_stacked().rows(0, blocks * d).into_owned());
        }
        let c = self.coeffs_at(tau)?;
        let x0 = self.states[seg].to_stacked().rows(0, blocks * d).into_owned();
        let x1 = self.states[seg + 1]
            .to_stacked()
            .rows(0, blocks * d)
            .into_owned();
        Ok(&c.lambda * x0 + &c.omega * x1)
    }

    /// Posterior-mean kinematic state at `tau` on any group.
    pub fn interp_lie(&self, tau: f64) -> Result<KinematicState> {
        let seg = self.segment_for(tau)?;
        if let Some(i) = self.exact_hit(seg, tau) {
            return Ok(self.states[i].clone());
        }
        let local = LocalSegment::build(self, seg)?;
        let c = self.coeffs_at(tau)?;
        local.state_at(&c)
    }

    /// Interpolated state plus its Jacobians with respect to the two
    /// bracketing parameter triples.
    ///
    /// Each Jacobian is `3d x 3d`: output rows `[g; dg; ddg]`, input columns
    /// `[g_n; dg_n; ddg_n]` (left tangent on the group element, additive on
    /// the derivatives). The group-element blocks inherit the first-order
    /// left-Jacobian-derivative approximation and are accurate for small
    /// segment velocities; see the motion-prior Jacobians for the same
    /// caveat.
    pub fn interp_lie_jacobians(
        &self,
        tau: f64,
    ) -> Result<(KinematicState, [DMatrix<f64>; 2], usize)> {
        let seg = self.segment_for(tau)?;
        let d = self.group.dim();
        let n = 3 * d;
        if let Some(i) = self.exact_hit(seg, tau) {
            let mut j0 = DMatrix::zeros(n, n);
            let mut j1 = DMatrix::zeros(n, n);
            if i == seg {
                j0 = DMatrix::identity(n, n);
            } else {
                j1 = DMatrix::identity(n, n);
            }
            return Ok((self.states[i].clone(), [j0, j1], seg));
        }
        let local = LocalSegment::build(self, seg)?;
        let c = self.coeffs_at(tau)?;
        let (state, jacs) = local.state_and_jacobians_at(&c)?;
        Ok((state, jacs, seg))
    }
}

/// Pre-computed per-segment quantities shared by every query in the segment.
struct LocalSegment<'a> {
    traj: &'a GpTrajectory,
    seg: usize,
    gamma0: DVector<f64>,
    gamma1: DVector<f64>,
    xi1: TangentVector,
    j1_inv: DMatrix<f64>,
    xi1_dot: DVector<f64>,
}

impl<'a> LocalSegment<'a> {
    fn build(traj: &'a GpTrajectory, seg: usize) -> Result<Self> {
        let d = traj.group.dim();
        let blocks = traj.order.blocks();
        let s0 = &traj.states[seg];
        let s1 = &traj.states[seg + 1];
        let xi1 = s1.value.compose(&s0.value.inverse()).log()?;
        let j1_inv = left_jacobian_inv(&xi1);
        let xi1_dot = &j1_inv * &s1.velocity.coords;
        let mut gamma0 = DVector::zeros(blocks * d);
        let mut gamma1 = DVector::zeros(blocks * d);
        gamma0.rows_mut(d, d).copy_from(&s0.velocity.coords);
        gamma1.rows_mut(0, d).copy_from(&xi1.coords);
        gamma1.rows_mut(d, d).copy_from(&xi1_dot);
        if blocks == 3 {
            gamma0.rows_mut(2 * d, d).copy_from(&s0.acceleration.coords);
            let xi1_dot_tv = TangentVector::new(traj.group, xi1_dot.clone())?;
            let xi1_ddot = &j1_inv * &s1.acceleration.coords
                - small_adjoint(&xi1_dot_tv) * &s1.velocity.coords * 0.5;
            gamma1.rows_mut(2 * d, d).copy_from(&xi1_ddot);
        }
        Ok(LocalSegment {
            traj,
            seg,
            gamma0,
            gamma1,
            xi1,
            j1_inv,
            xi1_dot,
        })
    }

    fn gamma_at(&self, c: &InterpCoeffs) -> DVector<f64> {
        &c.lambda * &self.gamma0 + &c.omega * &self.gamma1
    }

    fn globals(
        &self,
        gamma: &DVector<f64>,
    ) -> Result<(KinematicState, TangentVector, DMatrix<f64>, DVector<f64>)> {
        let group = self.traj.group;
        let d = group.dim();
        let xi_t = TangentVector::new(group, gamma.rows(0, d).into_owned())?;
        let j_t = left_jacobian(&xi_t);
        let g_t = ManifoldElement::exp(&xi_t).compose(&self.traj.states[self.seg].value);
        let g_dot = &j_t * gamma.rows(d, d).into_owned();
        let (g_ddot, acc_inner) = if self.traj.order.blocks() == 3 {
            let xi_dot_tv = TangentVector::new(group, gamma.rows(d, d).into_owned())?;
            let inner =
                gamma.rows(2 * d, d).into_owned() + small_adjoint(&xi_dot_tv) * &g_dot * 0.5;
            (&j_t * &inner, inner)
        } else {
            (DVector::zeros(d), DVector::zeros(d))
        };
        let state = KinematicState::new(
            g_t,
            TangentVector::new(group, g_dot)?,
            TangentVector::new(group, g_ddot)?,
        )?;
        Ok((state, xi_t, j_t, acc_inner))
    }

    fn state_at(&self, c: &InterpCoeffs) -> Result<KinematicState> {
        let gamma = self.gamma_at(c);
        Ok(self.globals(&gamma)?.0)
    }

    fn state_and_jacobians_at(
        &self,
        c: &InterpCoeffs,
    ) -> Result<(KinematicState, [DMatrix<f64>; 2])> {
        let group = self.traj.group;
        let d = group.dim();
        let blocks = self.traj.order.blocks();
        let s1 = &self.traj.states[self.seg + 1];
        let gamma = self.gamma_at(c);
        let (state, xi_t, j_t, acc_inner) = self.globals(&gamma)?;

        // Local increment derivatives (Appendix-style blocks).
        let dxi1_dg0 = -right_jacobian_inv(&self.xi1);
        let dxi1_dg1 = self.j1_inv.clone();
        let ad_vel1 = small_adjoint(&s1.velocity);
        let dxid1_dg0 = 0.5 * &ad_vel1 * &dxi1_dg0;
        let dxid1_dg1 = 0.5 * &ad_vel1 * &dxi1_dg1;
        let (dxidd1_dg0, dxidd1_dg1, dxidd1_dv1) = if blocks == 3 {
            let ad_acc1 = small_adjoint(&s1.acceleration);
            let ad_xid1 =
                small_adjoint(&TangentVector::new(group, self.xi1_dot.clone())?);
            (
                0.5 * &ad_acc1 * &dxi1_dg0 + 0.5 * &ad_vel1 * &dxid1_dg0,
                0.5 * &ad_acc1 * &dxi1_dg1 + 0.5 * &ad_vel1 * &dxid1_dg1,
                -0.5 * (&ad_xid1 - &ad_vel1 * &self.j1_inv),
            )
        } else {
            let z = DMatrix::zeros(d, d);
            (z.clone(), z.clone(), z)
        };

        // dgamma[i]/dparam for the six parameters, each d x d.
        let block = |m: &DMatrix<f64>, i: usize, j: usize| m.view((i * d, j * d), (d, d)).into_owned();
        let zero = DMatrix::zeros(d, d);
        // Parameter order: g0, v0, a0, g1, v1, a1.
        let mut dgamma = vec![vec![zero.clone(); 6]; blocks];
        for (i, row) in dgamma.iter_mut().enumerate() {
            let (li1, li2) = (block(&c.lambda, i, 1), if blocks == 3 {
                block(&c.lambda, i, 2)
            } else {
                zero.clone()
            });
            let (oi0, oi1) = (block(&c.omega, i, 0), block(&c.omega, i, 1));
            let oi2 = if blocks == 3 {
                block(&c.omega, i, 2)
            } else {
                zero.clone()
            };
            row[0] = &oi0 * &dxi1_dg0 + &oi1 * &dxid1_dg0 + &oi2 * &dxidd1_dg0;
            row[1] = li1;
            row[2] = li2;
            row[3] = &oi0 * &dxi1_dg1 + &oi1 * &dxid1_dg1 + &oi2 * &dxidd1_dg1;
            row[4] = &oi1 * &self.j1_inv + &oi2 * &dxidd1_dv1;
            row[5] = &oi2 * &self.j1_inv;
        }

        // Global chains.
        let ad_exp = ManifoldElement::exp(&xi_t).adjoint();
        let xid_t = TangentVector::new(group, gamma.rows(d, d).into_owned())?;
        let ad_xid_t = small_adjoint(&xid_t);
        let ad_gdot = small_adjoint(&state.velocity);
        let ad_inner = small_adjoint(&TangentVector::new(group, acc_inner)?);

        let n = 3 * d;
        let mut jacs = [DMatrix::zeros(n, n), DMatrix::zeros(n, n)];
        for p in 0..6 {
            let d_xi = &dgamma[0][p];
            let d_xid = if blocks == 3 { &dgamma[1][p] } else { &dgamma[1][p] };
            let mut d_g = &j_t * d_xi;
            if p == 0 {
                d_g += &ad_exp;
            }
            let d_gdot = -0.5 * &ad_xid_t * d_xi + &j_t * d_xid;
            let d_gddot = if blocks == 3 {
                let d_xidd = &dgamma[2][p];
                -0.5 * &ad_inner * d_xi
                    + &j_t * (d_xidd - 0.5 * &ad_gdot * d_xid + 0.5 * &ad_xid_t * &d_gdot)
            } else {
                DMatrix::zeros(d, d)
            };
            let (side, col) = (p / 3, p % 3);
            let target = &mut jacs[side];
            target.view_mut((0, col * d), (d, d)).copy_from(&d_g);
            target.view_mut((d, col * d), (d, d)).copy_from(&d_gdot);
            target.view_mut((2 * d, col * d), (d, d)).copy_from(&d_gddot);
        }
        Ok((state, jacs))
    }
}

/// Minimum-norm-control interpolation for an arbitrary controllable linear
/// system, evaluated by quadrature.
///
/// Solves for the noise trajectory of least energy that carries the system
/// from `x_n` at `t_n` to `x_n1` at `t_n1` and returns the resulting state at
/// `tau`. Serves as the independent oracle for the closed-form GP
/// interpolation.
pub fn min_norm_interp(
    tau: f64,
    t_n: f64,
    t_n1: f64,
    x_n: &DVector<f64>,
    x_n1: &DVector<f64>,
    sys: &LinearSystem,
) -> Result<DVector<f64>> {
    if t_n1 <= t_n {
        return Err(Error::DegenerateInterval { dt: t_n1 - t_n });
    }
    if tau < t_n || tau > t_n1 {
        return Err(Error::OutOfSegment {
            tau,
            start: t_n,
            end: t_n1,
        });
    }
    let llt = &sys.l * sys.l.transpose();
    let gramian = integrate_matrix(
        |s| {
            let p = sys.transition(t_n1 - s);
            &p * &llt * p.transpose()
        },
        t_n,
        t_n1,
        8,
    );
    let svd = gramian.clone().svd(false, false);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if condition > 1e12 {
        return Err(Error::SingularGramian { condition });
    }
    let rhs = x_n1 - sys.transition(t_n1 - t_n) * x_n - sys.forced_response(t_n, t_n1);
    let mu = gramian
        .lu()
        .solve(&rhs)
        .ok_or(Error::SingularGramian { condition })?;
    let cross = integrate_matrix(
        |s| sys.transition(tau - s) * &llt * sys.transition(t_n1 - s).transpose(),
        t_n,
        tau.max(t_n + f64::EPSILON),
        8,
    );
    let scale = if tau > t_n { 1.0 } else { 0.0 };
    Ok(sys.transition(tau - t_n) * x_n + sys.forced_response(t_n, tau) + cross * mu * scale)
}

/// Posterior-mean interpolation between two explicit states, including the
/// known-input terms of the prior mean.
///
/// `sys` supplies the input model; the blending coefficients come from the
/// closed-form `order`/`q` pair, so this is the analytic counterpart of
/// [`min_norm_interp`].
pub fn interp_between(
    tau: f64,
    t_n: f64,
    t_n1: f64,
    x_n: &DVector<f64>,
    x_n1: &DVector<f64>,
    order: ModelOrder,
    q: &ProcessNoise,
    sys: &LinearSystem,
) -> Result<DVector<f64>> {
    let c = interp_coeffs(tau, t_n, t_n1, order, q)?;
    let full = sys.forced_response(t_n, t_n1);
    let partial = sys.forced_response(t_n, tau);
    Ok(&c.lambda * x_n + &c.omega * (x_n1 - full) + partial)
}
