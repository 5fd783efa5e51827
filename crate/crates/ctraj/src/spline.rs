//! Uniform B-spline trajectory representation.
//!
//! Control points live on the configuration manifold; knots are uniform with
//! period `dt`. Evaluation uses the cumulative form: the blending weights
//! `b(u) = C~_k mu(u)` scale geodesic increments between consecutive control
//! points. On Euclidean groups this coincides with the classical basis-sum
//! form; on Lie groups the increments compose through the exponential and
//! the first two time derivatives follow a recursion over the segment
//! window. Control-point Jacobians of value, velocity, and acceleration are
//! exact (no small-angle approximations).
//!
//! A query at `t` inside `(t_n, t_{n+1}]` normalizes to `u in (0, 1]`; the
//! left domain edge maps to `u = 0` of the first full segment.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::manifold::{
    left_jacobian, left_jacobian_inv, small_adjoint, Group, KinematicState, ManifoldElement,
    TangentVector,
};

/// Largest supported spline order.
pub const MAX_ORDER: usize = 12;

/// Cumulative blending matrix of one spline order.
///
/// Row `j` holds the polynomial coefficients of the cumulative weight
/// `b_j(u)` in ascending powers of `u`; `b_0` is identically one inside the
/// domain.
#[derive(Debug)]
pub struct BlendingMatrix {
    order: usize,
    cumulative: DMatrix<f64>,
}

impl BlendingMatrix {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn cumulative(&self) -> &DMatrix<f64> {
        &self.cumulative
    }

    /// Cumulative weights `d^deriv b / du^deriv` at `u`.
    pub fn weights(&self, u: f64, deriv: usize) -> DVector<f64> {
        let k = self.order;
        let mut out = DVector::zeros(k);
        for j in 0..k {
            let mut acc = 0.0;
            // Horner evaluation of the deriv-th derivative.
            for p in (deriv..k).rev() {
                let mut fall = 1.0;
                for q in 0..deriv {
                    fall *= (p - q) as f64;
                }
                acc = acc * u + self.cumulative[(j, p)] * fall;
            }
            out[j] = acc;
        }
        out
    }
}

/// Active-window basis polynomials on one segment, computed by the
/// Cox-de Boor recurrence over integer knots.
///
/// Entry `w` of the result holds the coefficients (ascending powers of `u`)
/// of the basis function attached to the `w`-th control point of the window.
fn basis_polynomials(k: usize) -> Vec<Vec<f64>> {
    // Polynomials keyed by support start index i (support [i, i + order)).
    let mut by_start: HashMap<i64, Vec<f64>> = HashMap::new();
    by_start.insert(0, vec![1.0]);
    for order in 2..=k {
        let mut next: HashMap<i64, Vec<f64>> = HashMap::new();
        let denom = (order - 1) as f64;
        for i in (1 - order as i64)..=0 {
            let zero = Vec::new();
            let left = by_start.get(&i).unwrap_or(&zero);
            let right = by_start.get(&(i + 1)).unwrap_or(&zero);
            // (u - i)/denom * left + (i + order - u)/denom * right
            let mut poly = vec![0.0; order];
            for (p, &c) in left.iter().enumerate() {
                poly[p] += c * (-(i as f64)) / denom;
                poly[p + 1] += c / denom;
            }
            for (p, &c) in right.iter().enumerate() {
                poly[p] += c * (i as f64 + order as f64) / denom;
                poly[p + 1] -= c / denom;
            }
            next.insert(i, poly);
        }
        by_start = next;
    }
    (0..k)
        .map(|w| {
            let i = w as i64 + 1 - k as i64;
            let mut coeffs = by_start.get(&i).cloned().unwrap_or_default();
            coeffs.resize(k, 0.0);
            coeffs
        })
        .collect()
}

fn build_blending(k: usize) -> BlendingMatrix {
    let basis = basis_polynomials(k);
    let mut cumulative = DMatrix::zeros(k, k);
    for j in 0..k {
        for basis_row in basis.iter().skip(j) {
            for (p, &c) in basis_row.iter().enumerate() {
                cumulative[(j, p)] += c;
            }
        }
    }
    BlendingMatrix {
        order: k,
        cumulative,
    }
}

/// Cumulative blending matrix for order `k`, cached per order.
pub fn blending_matrix(k: usize) -> Result<Arc<BlendingMatrix>> {
    if !(2..=MAX_ORDER).contains(&k) {
        return Err(Error::UnsupportedOrder { order: k });
    }
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<BlendingMatrix>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().unwrap();
    Ok(map.entry(k).or_insert_with(|| Arc::new(build_blending(k))).clone())
}

/// Uniform B-spline trajectory over a group.
#[derive(Clone)]
pub struct SplineTrajectory {
    group: Group,
    order: usize,
    knot_start: f64,
    dt: f64,
    control_points: Vec<ManifoldElement>,
    basis: Arc<BlendingMatrix>,
}

/// Jacobians of one spline sample with respect to its window of control
/// points.
#[derive(Clone, Debug)]
pub struct SplineJacobians {
    /// Index of the first influencing control point; the window covers
    /// `first .. first + order`.
    pub first: usize,
    pub value: Vec<DMatrix<f64>>,
    pub velocity: Vec<DMatrix<f64>>,
    pub acceleration: Vec<DMatrix<f64>>,
}

impl SplineTrajectory {
    /// Builds a spline; `knot_start` is the time of the first knot, and at
    /// least `order` control points are required.
    pub fn new(
        group: Group,
        order: usize,
        knot_start: f64,
        dt: f64,
        control_points: Vec<ManifoldElement>,
    ) -> Result<Self> {
        if dt <= 0.0 {
            return Err(Error::DegenerateInterval { dt });
        }
        if control_points.len() < order {
            return Err(Error::InvalidArgument {
                detail: format!(
                    "order {order} needs at least {order} control points, got {}",
                    control_points.len()
                ),
            });
        }
        if control_points.iter().any(|p| p.group() != group) {
            return Err(Error::InvalidArgument {
                detail: "all control points must live on the trajectory group".into(),
            });
        }
        let basis = blending_matrix(order)?;
        Ok(SplineTrajectory {
            group,
            order,
            knot_start,
            dt,
            control_points,
            basis,
        })
    }

    /// Spline whose evaluation domain covers `[t0, t1]`, with every control
    /// point set to `init`.
    pub fn covering(
        group: Group,
        order: usize,
        dt: f64,
        t0: f64,
        t1: f64,
        init: &ManifoldElement,
    ) -> Result<Self> {
        if t1 <= t0 {
            return Err(Error::DegenerateInterval { dt: t1 - t0 });
        }
        let segments = ((t1 - t0) / dt - 1e-9).ceil().max(1.0) as usize;
        let count = segments + order - 1;
        let knot_start = t0 - (order as f64 - 1.0) * dt;
        SplineTrajectory::new(group, order, knot_start, dt, vec![init.clone(); count])
    }

    pub fn group(&self) -> Group {
        self.group
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn knot_period(&self) -> f64 {
        self.dt
    }

    pub fn control_points(&self) -> &[ManifoldElement] {
        &self.control_points
    }

    pub fn control_points_mut(&mut self) -> &mut [ManifoldElement] {
        &mut self.control_points
    }

    /// Greville abscissa of control point `i`: the time at which sampling a
    /// trajectory to initialize this control point reproduces constant-rate
    /// motion exactly.
    pub fn greville_time(&self, i: usize) -> f64 {
        self.knot_start + (i as f64 + 0.5 * self.order as f64) * self.dt
    }

    pub fn domain(&self) -> (f64, f64) {
        let n = self.control_points.len();
        (
            self.knot_start + (self.order as f64 - 1.0) * self.dt,
            self.knot_start + n as f64 * self.dt,
        )
    }

    /// Window start index and normalized segment coordinate for a query.
    pub(crate) fn locate(&self, t: f64) -> Result<(usize, f64)> {
        let n = self.control_points.len();
        let (start, end) = self.domain();
        let tol = 1e-9 * (end - start).abs().max(1.0);
        if t < start - tol || t > end + tol {
            return Err(Error::OutOfDomain { t, start, end });
        }
        let k = self.order;
        let u_global = ((t - self.knot_start) / self.dt).clamp(k as f64 - 1.0, n as f64);
        let seg = (u_global.ceil() as usize).clamp(k, n);
        let u = u_global - (seg as f64 - 1.0);
        Ok((seg - k, u))
    }

    fn weights_scaled(&self, u: f64, deriv: usize) -> DVector<f64> {
        self.basis.weights(u, deriv) / self.dt.powi(deriv as i32)
    }

    /// Sample a Euclidean spline or one of its first two time derivatives.
    pub fn eval_vector(&self, t: f64, deriv: usize) -> Result<DVector<f64>> {
        if !matches!(self.group, Group::Euclidean(_)) {
            return Err(Error::InvalidArgument {
                detail: "eval_vector requires a Euclidean spline".into(),
            });
        }
        if deriv > 2 {
            return Err(Error::InvalidArgument {
                detail: "only derivatives 0..=2 are supported".into(),
            });
        }
        let (w0, u) = self.locate(t)?;
        let b = self.weights_scaled(u, deriv);
        let d = self.group.dim();
        let mut out = if deriv == 0 {
            self.control_points[w0].euclidean_coords().clone()
        } else {
            DVector::zeros(d)
        };
        for j in 1..self.order {
            let diff = self.control_points[w0 + j].euclidean_coords()
                - self.control_points[w0 + j - 1].euclidean_coords();
            out += diff * b[j];
        }
        Ok(out)
    }

    /// Sample the spline on any group: value plus the first two left-tangent
    /// derivatives, via the geodesic-increment recursion.
    pub fn eval_lie(&self, t: f64) -> Result<KinematicState> {
        let (w0, u) = self.locate(t)?;
        let b = self.weights_scaled(u, 0);
        let bd = self.weights_scaled(u, 1);
        let bdd = self.weights_scaled(u, 2);
        let d = self.group.dim();
        let mut g = self.control_points[w0].clone();
        let mut vel = DVector::zeros(d);
        let mut acc = DVector::zeros(d);
        for j in 1..self.order {
            let omega = self.control_points[w0 + j - 1]
                .inverse()
                .compose(&self.control_points[w0 + j])
                .log()?;
            let ad_g = g.adjoint();
            let step = &ad_g * &omega.coords;
            let vel_gain = &step * bd[j];
            let new_vel = &vel + &vel_gain;
            let gain_tv = TangentVector::new(self.group, vel_gain)?;
            acc = acc - small_adjoint(&gain_tv) * &vel + step * bdd[j];
            vel = new_vel;
            g = g.compose(&ManifoldElement::exp(&TangentVector::new(
                self.group,
                &omega.coords * b[j],
            )?));
        }
        KinematicState::new(
            g,
            TangentVector::new(self.group, vel)?,
            TangentVector::new(self.group, acc)?,
        )
    }

    /// Sample plus exact Jacobians of `{value, velocity, acceleration}` with
    /// respect to each control point in the window, in left-tangent
    /// coordinates.
    pub fn lie_jacobians(&self, t: f64) -> Result<(KinematicState, SplineJacobians)> {
        let (w0, u) = self.locate(t)?;
        let k = self.order;
        let b = self.weights_scaled(u, 0);
        let bd = self.weights_scaled(u, 1);
        let bdd = self.weights_scaled(u, 2);
        let d = self.group.dim();
        let zero = DMatrix::zeros(d, d);

        let mut g = self.control_points[w0].clone();
        let mut vel = DVector::zeros(d);
        let mut acc = DVector::zeros(d);
        let mut d_g = vec![zero.clone(); k];
        let mut d_vel = vec![zero.clone(); k];
        let mut d_acc = vec![zero.clone(); k];
        d_g[0] = DMatrix::identity(d, d);

        for j in 1..k {
            let earlier = &self.control_points[w0 + j - 1];
            let omega = earlier.inverse().compose(&self.control_points[w0 + j]).log()?;
            let ad_g = g.adjoint();
            let step = &ad_g * &omega.coords;
            let vel_gain_vec = &step * bd[j];
            let acc_gain_vec = &step * bdd[j];
            let new_vel = &vel + &vel_gain_vec;

            // dOmega/d(cp): same matrix, opposite signs on the two points.
            let domega_later = left_jacobian_inv(&omega) * earlier.inverse().adjoint();
            let scaled_tv = TangentVector::new(self.group, &omega.coords * b[j])?;
            let da_scale = left_jacobian(&scaled_tv) * b[j];

            let ad_vel_gain =
                small_adjoint(&TangentVector::new(self.group, vel_gain_vec.clone())?);
            let ad_new_vel = small_adjoint(&TangentVector::new(self.group, new_vel.clone())?);
            let ad_old_vel = small_adjoint(&TangentVector::new(self.group, vel.clone())?);
            let ad_acc_gain =
                small_adjoint(&TangentVector::new(self.group, acc_gain_vec.clone())?);

            for l in 0..k {
                let domega = if l == j - 1 {
                    Some(-&domega_later)
                } else if l == j {
                    Some(domega_later.clone())
                } else {
                    None
                };
                let d_g_prev = d_g[l].clone();
                let d_vel_prev = d_vel[l].clone();
                d_g[l] = d_g_prev.clone();
                d_vel[l] = &d_vel_prev - &ad_vel_gain * &d_g_prev;
                d_acc[l] = &d_acc[l] - &ad_acc_gain * &d_g_prev;
                if let Some(dom) = domega {
                    d_g[l] += &ad_g * (&da_scale * &dom);
                    d_vel[l] += &ad_g * (&dom * bd[j]);
                    d_acc[l] += &ad_g * (&dom * bdd[j]);
                }
                d_acc[l] += &ad_old_vel * &d_vel[l] - &ad_new_vel * &d_vel_prev;
            }

            acc = acc - ad_vel_gain * &vel + acc_gain_vec;
            vel = new_vel;
            g = g.compose(&ManifoldElement::exp(&scaled_tv));
        }

        let state = KinematicState::new(
            g,
            TangentVector::new(self.group, vel)?,
            TangentVector::new(self.group, acc)?,
        )?;
        Ok((
            state,
            SplineJacobians {
                first: w0,
                value: d_g,
                velocity: d_vel,
                acceleration: d_acc,
            },
        ))
    }
}
