//! Factor-graph nonlinear least squares over either trajectory
//! representation.
//!
//! Parameter blocks are the trajectory parameters (full kinematic-state
//! triples for GP trajectories, control points for splines) followed by
//! optional constant IMU bias blocks. Group-valued blocks update by
//! left-multiplicative retraction `Exp(delta) g`; Euclidean blocks add.
//! The normal equations are assembled block-sparse in natural time order
//! and solved by block Cholesky inside a Levenberg-Marquardt loop.

mod block_cholesky;
pub mod factors;

pub use factors::{Factor, FactorKind};

use std::time::Instant;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::gp::GpTrajectory;
use crate::manifold::{Group, KinematicState, ManifoldElement, TangentVector};
use crate::motion::{
    lie_prior_jacobians, lie_prior_residual, process_covariance, ModelOrder, ProcessNoise,
};
use crate::spline::SplineTrajectory;
use block_cholesky::BlockSparseSym;

/// Either trajectory representation behind one state-query contract.
#[derive(Clone)]
pub enum Trajectory {
    Gp(GpTrajectory),
    Spline(SplineTrajectory),
}

/// Jacobians of one interpolated state against one parameter block.
pub(crate) struct BlockJac {
    pub block: usize,
    pub d_value: DMatrix<f64>,
    pub d_vel: DMatrix<f64>,
    pub d_acc: DMatrix<f64>,
}

impl Trajectory {
    pub fn group(&self) -> Group {
        match self {
            Trajectory::Gp(t) => t.group(),
            Trajectory::Spline(t) => t.group(),
        }
    }

    pub fn domain(&self) -> (f64, f64) {
        match self {
            Trajectory::Gp(t) => t.domain(),
            Trajectory::Spline(t) => t.domain(),
        }
    }

    /// Number of trajectory parameter blocks.
    pub fn block_count(&self) -> usize {
        match self {
            Trajectory::Gp(t) => t.states().len(),
            Trajectory::Spline(t) => t.control_points().len(),
        }
    }

    /// Local dimension of one trajectory block.
    pub fn block_dim(&self) -> usize {
        match self {
            Trajectory::Gp(t) => 3 * t.group().dim(),
            Trajectory::Spline(t) => t.group().dim(),
        }
    }

    /// Total number of floating-point values in the estimation parameters.
    pub fn param_float_count(&self) -> usize {
        self.block_count() * self.block_dim()
    }

    /// Full kinematic state at `t`.
    pub fn state(&self, t: f64) -> Result<KinematicState> {
        match self {
            Trajectory::Gp(traj) => traj.interp_lie(t),
            Trajectory::Spline(traj) => traj.eval_lie(t),
        }
    }

    /// Parameter blocks whose perturbation moves the state at `t`.
    pub fn connected_blocks(&self, t: f64) -> Result<Vec<usize>> {
        match self {
            Trajectory::Gp(traj) => {
                let seg = traj.segment_for(t)?;
                if traj.times()[seg] == t {
                    Ok(vec![seg])
                } else if traj.times()[seg + 1] == t {
                    Ok(vec![seg + 1])
                } else {
                    Ok(vec![seg, seg + 1])
                }
            }
            Trajectory::Spline(traj) => {
                let (w0, _) = traj.locate(t)?;
                Ok((w0..w0 + traj.order()).collect())
            }
        }
    }

    pub(crate) fn state_with_jacobians(
        &self,
        t: f64,
    ) -> Result<(KinematicState, Vec<BlockJac>)> {
        match self {
            Trajectory::Gp(traj) => {
                let d = traj.group().dim();
                let (state, jacs, seg) = traj.interp_lie_jacobians(t)?;
                let hits = self.connected_blocks(t)?;
                let mut out = Vec::with_capacity(2);
                for (side, jac) in jacs.iter().enumerate() {
                    let block = seg + side;
                    if !hits.contains(&block) {
                        continue;
                    }
                    out.push(BlockJac {
                        block,
                        d_value: jac.rows(0, d).into_owned(),
                        d_vel: jac.rows(d, d).into_owned(),
                        d_acc: jac.rows(2 * d, d).into_owned(),
                    });
                }
                Ok((state, out))
            }
            Trajectory::Spline(traj) => {
                let (state, jacs) = traj.lie_jacobians(t)?;
                let out = (0..traj.order())
                    .map(|l| BlockJac {
                        block: jacs.first + l,
                        d_value: jacs.value[l].clone(),
                        d_vel: jacs.velocity[l].clone(),
                        d_acc: jacs.acceleration[l].clone(),
                    })
                    .collect();
                Ok((state, out))
            }
        }
    }

    /// Applies a local step to one trajectory block.
    pub fn retract_block(&mut self, idx: usize, delta: &DVector<f64>) {
        let group = self.group();
        let d = group.dim();
        match self {
            Trajectory::Gp(traj) => {
                let s = &mut traj.states_mut()[idx];
                let step = TangentVector::new(group, delta.rows(0, d).into_owned())
                    .expect("step dimension checked by caller");
                s.value = ManifoldElement::exp(&step).compose(&s.value);
                s.velocity.coords += delta.rows(d, d);
                s.acceleration.coords += delta.rows(2 * d, d);
            }
            Trajectory::Spline(traj) => {
                let step = TangentVector::new(group, delta.clone())
                    .expect("step dimension checked by caller");
                let cp = &mut traj.control_points_mut()[idx];
                *cp = ManifoldElement::exp(&step).compose(cp);
            }
        }
    }
}

/// Solver settings.
#[derive(Clone, Debug, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub max_iters: usize,
    pub lm_lambda0: f64,
    pub lambda_scale: f64,
    /// Relative decrease of the cost below which iteration stops.
    pub cost_tol: f64,
    /// Solve measurement-only first, then the full problem, when
    /// regularization terms are present.
    pub two_stage: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            max_iters: 100,
            lm_lambda0: 1e-4,
            lambda_scale: 10.0,
            cost_tol: 1e-8,
            two_stage: false,
        }
    }
}

/// Why the solver stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Termination {
    Converged,
    MaxIterations,
    /// Damping grew past its ceiling without an acceptable step.
    LambdaLimit,
}

/// Outcome of one solve.
#[derive(Clone, Debug)]
pub struct SolveReport {
    pub iterations: usize,
    pub initial_cost: f64,
    pub final_cost: f64,
    /// Cost after each accepted step (full-problem cost in two-stage runs
    /// only for the final stage).
    pub cost_history: Vec<f64>,
    pub residual_jacobian_seconds: f64,
    pub linear_solve_seconds: f64,
    pub total_seconds: f64,
    pub termination: Termination,
}

const LAMBDA_MAX: f64 = 1e16;
const LAMBDA_MIN: f64 = 1e-12;

/// Block-sparse estimation problem over one trajectory.
pub struct Problem {
    pub trajectory: Trajectory,
    factors: Vec<Factor>,
    gyro_bias: Option<DVector<f64>>,
    accel_bias: Option<DVector<f64>>,
    gravity: f64,
    prior_order: ModelOrder,
    prior_noise: ProcessNoise,
}

impl Problem {
    /// Problem over a GP trajectory; motion priors reuse the trajectory's
    /// own model.
    pub fn from_gp(trajectory: GpTrajectory) -> Self {
        let order = trajectory.order();
        let q = trajectory.process_noise().clone();
        Problem {
            trajectory: Trajectory::Gp(trajectory),
            factors: Vec::new(),
            gyro_bias: None,
            accel_bias: None,
            gravity: 9.81,
            prior_order: order,
            prior_noise: q,
        }
    }

    /// Problem over a spline trajectory; `q` is the process noise of the
    /// WNOJ motion priors.
    pub fn from_spline(trajectory: SplineTrajectory, q: ProcessNoise) -> Self {
        Problem {
            trajectory: Trajectory::Spline(trajectory),
            factors: Vec::new(),
            gyro_bias: None,
            accel_bias: None,
            gravity: 9.81,
            prior_order: ModelOrder::Wnoj,
            prior_noise: q,
        }
    }

    pub fn with_gravity(mut self, gravity: f64) -> Self {
        self.gravity = gravity;
        self
    }

    pub fn gravity(&self) -> f64 {
        self.gravity
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn gyro_bias(&self) -> Option<&DVector<f64>> {
        self.gyro_bias.as_ref()
    }

    pub fn accel_bias(&self) -> Option<&DVector<f64>> {
        self.accel_bias.as_ref()
    }

    fn in_domain(&self, t: f64) -> bool {
        let (start, end) = self.trajectory.domain();
        let tol = 1e-9 * (end - start).abs().max(1.0);
        t >= start - tol && t <= end + tol
    }

    /// Adds a factor; its stamp must lie inside the trajectory domain.
    /// IMU factors activate the corresponding constant bias block.
    pub fn add_factor(&mut self, factor: Factor) -> Result<()> {
        if !self.in_domain(factor.stamp) {
            let (start, end) = self.trajectory.domain();
            return Err(Error::OutOfRange {
                tau: factor.stamp,
                start,
                end,
            });
        }
        match &factor.kind {
            FactorKind::Gyro { .. } => {
                self.gyro_bias.get_or_insert_with(|| DVector::zeros(3));
            }
            FactorKind::Accel { .. } => {
                self.accel_bias.get_or_insert_with(|| DVector::zeros(3));
            }
            FactorKind::MotionPrior { t_start } => {
                if !self.in_domain(*t_start) {
                    let (start, end) = self.trajectory.domain();
                    return Err(Error::OutOfRange {
                        tau: *t_start,
                        start,
                        end,
                    });
                }
            }
            _ => {}
        }
        self.factors.push(factor);
        Ok(())
    }

    /// Appends WNOJ motion-prior factors at uniformly spaced sample times.
    ///
    /// GP trajectories place one prior per consecutive pair of estimation
    /// times (the sample times coincide with them); splines sample every
    /// `sample_period` seconds across the domain. Returns the number of
    /// priors added.
    pub fn add_motion_priors(&mut self, sample_period: f64) -> Result<usize> {
        if sample_period <= 0.0 {
            return Err(Error::DegenerateInterval { dt: sample_period });
        }
        let times: Vec<f64> = match &self.trajectory {
            Trajectory::Gp(traj) => traj.times().to_vec(),
            Trajectory::Spline(traj) => {
                let (start, end) = traj.domain();
                let count = ((end - start) / sample_period + 1e-9).floor() as usize + 1;
                (0..count).map(|j| start + j as f64 * sample_period).collect()
            }
        };
        if times.len() < 2 {
            log::warn!(
                "motion-prior period {sample_period} exceeds the trajectory span; no priors added"
            );
            return Ok(0);
        }
        let mut added = 0;
        for pair in times.windows(2) {
            let dt = pair[1] - pair[0];
            let q_dt = process_covariance(dt, self.prior_order, &self.prior_noise)?;
            self.add_factor(Factor::motion_prior(pair[0], pair[1], &q_dt)?)?;
            added += 1;
        }
        Ok(added)
    }

    fn gyro_bias_index(&self) -> Option<usize> {
        self.gyro_bias
            .as_ref()
            .map(|_| self.trajectory.block_count())
    }

    fn accel_bias_index(&self) -> Option<usize> {
        self.accel_bias.as_ref().map(|_| {
            self.trajectory.block_count() + usize::from(self.gyro_bias.is_some())
        })
    }

    /// Local dimensions of all parameter blocks.
    pub fn block_dims(&self) -> Vec<usize> {
        let mut dims =
            vec![self.trajectory.block_dim(); self.trajectory.block_count()];
        if self.gyro_bias.is_some() {
            dims.push(3);
        }
        if self.accel_bias.is_some() {
            dims.push(3);
        }
        dims
    }

    /// Indices of the parameter blocks a factor touches.
    pub fn factor_blocks(&self, factor: &Factor) -> Result<Vec<usize>> {
        let mut blocks = match &factor.kind {
            FactorKind::MotionPrior { t_start } => {
                let mut b = self.trajectory.connected_blocks(*t_start)?;
                for extra in self.trajectory.connected_blocks(factor.stamp)? {
                    if !b.contains(&extra) {
                        b.push(extra);
                    }
                }
                b
            }
            _ => self.trajectory.connected_blocks(factor.stamp)?,
        };
        match &factor.kind {
            FactorKind::Gyro { .. } => blocks.push(self.gyro_bias_index().unwrap()),
            FactorKind::Accel { .. } => blocks.push(self.accel_bias_index().unwrap()),
            _ => {}
        }
        Ok(blocks)
    }

    /// Whitened residual and per-block whitened Jacobians of one factor.
    fn linearize_factor(
        &self,
        factor: &Factor,
        with_jacobians: bool,
    ) -> Result<(DVector<f64>, Vec<(usize, DMatrix<f64>)>)> {
        let w = &factor.whitener;
        match &factor.kind {
            FactorKind::MotionPrior { t_start } => {
                let dt = factor.stamp - t_start;
                if !with_jacobians {
                    let s0 = self.trajectory.state(*t_start)?;
                    let s1 = self.trajectory.state(factor.stamp)?;
                    return Ok((w * lie_prior_residual(&s0, &s1, dt)?, Vec::new()));
                }
                let (s0, bj0) = self.trajectory.state_with_jacobians(*t_start)?;
                let (s1, bj1) = self.trajectory.state_with_jacobians(factor.stamp)?;
                let r = lie_prior_residual(&s0, &s1, dt)?;
                let parts = lie_prior_jacobians(&s0, &s1, dt)?;
                let d = self.trajectory.group().dim();
                let join = |a: &DMatrix<f64>, b: &DMatrix<f64>, c: &DMatrix<f64>| {
                    let mut m = DMatrix::zeros(3 * d, 3 * d);
                    m.columns_mut(0, d).copy_from(a);
                    m.columns_mut(d, d).copy_from(b);
                    m.columns_mut(2 * d, d).copy_from(c);
                    m
                };
                let a0 = join(&parts[0], &parts[1], &parts[2]);
                let a1 = join(&parts[3], &parts[4], &parts[5]);
                let mut by_block: Vec<(usize, DMatrix<f64>)> = Vec::new();
                let mut accumulate = |a: &DMatrix<f64>, bjs: &[BlockJac]| {
                    for bj in bjs {
                        let mut stacked = DMatrix::zeros(3 * d, bj.d_value.ncols());
                        stacked.rows_mut(0, d).copy_from(&bj.d_value);
                        stacked.rows_mut(d, d).copy_from(&bj.d_vel);
                        stacked.rows_mut(2 * d, d).copy_from(&bj.d_acc);
                        let contribution = w * a * stacked;
                        if let Some(existing) =
                            by_block.iter_mut().find(|(b, _)| *b == bj.block)
                        {
                            existing.1 += contribution;
                        } else {
                            by_block.push((bj.block, contribution));
                        }
                    }
                };
                accumulate(&a0, &bj0);
                accumulate(&a1, &bj1);
                Ok((w * r, by_block))
            }
            _ => {
                if !with_jacobians {
                    let state = self.trajectory.state(factor.stamp)?;
                    let lin = factor.linearize_measurement(
                        &state,
                        self.gyro_bias.as_ref(),
                        self.accel_bias.as_ref(),
                        self.gravity,
                    )?;
                    return Ok((w * lin.residual, Vec::new()));
                }
                let (state, bjs) = self.trajectory.state_with_jacobians(factor.stamp)?;
                let lin = factor.linearize_measurement(
                    &state,
                    self.gyro_bias.as_ref(),
                    self.accel_bias.as_ref(),
                    self.gravity,
                )?;
                let mut by_block = Vec::with_capacity(bjs.len() + 1);
                for bj in &bjs {
                    let j = &lin.d_value * &bj.d_value
                        + &lin.d_vel * &bj.d_vel
                        + &lin.d_acc * &bj.d_acc;
                    by_block.push((bj.block, w * j));
                }
                if let Some(db) = &lin.d_bias {
                    let idx = match &factor.kind {
                        FactorKind::Gyro { .. } => self.gyro_bias_index().unwrap(),
                        FactorKind::Accel { .. } => self.accel_bias_index().unwrap(),
                        _ => unreachable!("only IMU factors carry bias Jacobians"),
                    };
                    by_block.push((idx, w * db));
                }
                Ok((w * lin.residual, by_block))
            }
        }
    }

    /// Total whitened cost over a subset of factors.
    fn masked_cost(&self, keep: &[bool]) -> Result<f64> {
        let mut cost = 0.0;
        for (f, keep) in self.factors.iter().zip(keep) {
            if !keep {
                continue;
            }
            let (r, _) = self.linearize_factor(f, false)?;
            cost += r.norm_squared();
        }
        if !cost.is_finite() {
            return Err(Error::InvalidArgument {
                detail: "non-finite cost".into(),
            });
        }
        Ok(cost)
    }

    /// Whitened cost of the full problem at the current parameters.
    pub fn cost(&self) -> Result<f64> {
        self.masked_cost(&vec![true; self.factors.len()])
    }

    fn apply_step(&mut self, offsets: &[usize], dims: &[usize], delta: &DVector<f64>) {
        let t_blocks = self.trajectory.block_count();
        for idx in 0..t_blocks {
            let seg = delta.rows(offsets[idx], dims[idx]).into_owned();
            self.trajectory.retract_block(idx, &seg);
        }
        let mut next = t_blocks;
        if let Some(b) = self.gyro_bias.as_mut() {
            *b += delta.rows(offsets[next], 3).into_owned();
            next += 1;
        }
        if let Some(b) = self.accel_bias.as_mut() {
            *b += delta.rows(offsets[next], 3).into_owned();
        }
    }

    fn clone_params(&self) -> (Trajectory, Option<DVector<f64>>, Option<DVector<f64>>) {
        (
            self.trajectory.clone(),
            self.gyro_bias.clone(),
            self.accel_bias.clone(),
        )
    }

    fn restore_params(
        &mut self,
        saved: (Trajectory, Option<DVector<f64>>, Option<DVector<f64>>),
    ) {
        self.trajectory = saved.0;
        self.gyro_bias = saved.1;
        self.accel_bias = saved.2;
    }

    /// Levenberg-Marquardt over the factors selected by `keep`.
    fn lm(
        &mut self,
        config: &SolverConfig,
        keep: &[bool],
        report: &mut SolveReport,
    ) -> Result<(f64, Termination)> {
        let dims = self.block_dims();
        let mut offsets = Vec::with_capacity(dims.len());
        let mut acc = 0;
        for &d in &dims {
            offsets.push(acc);
            acc += d;
        }
        let total = acc;

        let mut lambda = config.lm_lambda0;
        let t_rj = Instant::now();
        let mut cost = self.masked_cost(keep)?;
        let (mut h, mut g) = self.assemble(keep, &dims, &offsets, total)?;
        report.residual_jacobian_seconds += t_rj.elapsed().as_secs_f64();
        if g.amax() <= 1e-13 * (1.0 + cost) {
            return Ok((cost, Termination::Converged));
        }

        let mut iterations = 0;
        let termination = loop {
            if iterations >= config.max_iters {
                break Termination::MaxIterations;
            }
            // Inner loop: grow lambda until a step is computable and
            // decreases the cost.
            let mut accepted = None;
            loop {
                let t_ls = Instant::now();
                let solved = h.damped(lambda).factorize().map(|f| f.solve(&(-&g)));
                report.linear_solve_seconds += t_ls.elapsed().as_secs_f64();
                match solved {
                    None => {
                        let next = if lambda == 0.0 { 1e-4 } else { lambda * config.lambda_scale };
                        if next > LAMBDA_MAX {
                            return Err(Error::RankDeficient {
                                detail: "normal equations not positive definite at maximum damping"
                                    .into(),
                            });
                        }
                        lambda = next;
                    }
                    Some(delta) => {
                        let saved = self.clone_params();
                        self.apply_step(&offsets, &dims, &delta);
                        let t_cost = Instant::now();
                        let new_cost = self.masked_cost(keep);
                        report.residual_jacobian_seconds += t_cost.elapsed().as_secs_f64();
                        match new_cost {
                            Ok(c) if c <= cost => {
                                accepted = Some(c);
                                break;
                            }
                            _ => {
                                self.restore_params(saved);
                                let next = if lambda == 0.0 {
                                    1e-4
                                } else {
                                    lambda * config.lambda_scale
                                };
                                if next > LAMBDA_MAX {
                                    break;
                                }
                                lambda = next;
                            }
                        }
                    }
                }
            }
            let new_cost = match accepted {
                None => break Termination::LambdaLimit,
                Some(c) => c,
            };
            iterations += 1;
            report.cost_history.push(new_cost);
            let decrease = cost - new_cost;
            cost = new_cost;
            if decrease <= config.cost_tol * cost.max(1e-300) {
                break Termination::Converged;
            }
            lambda = (lambda / config.lambda_scale).max(LAMBDA_MIN);
            let t_rj = Instant::now();
            let hg = self.assemble(keep, &dims, &offsets, total)?;
            report.residual_jacobian_seconds += t_rj.elapsed().as_secs_f64();
            h = hg.0;
            g = hg.1;
        };
        report.iterations += iterations;
        Ok((cost, termination))
    }

    fn assemble(
        &self,
        keep: &[bool],
        dims: &[usize],
        offsets: &[usize],
        total: usize,
    ) -> Result<(BlockSparseSym, DVector<f64>)> {
        let mut h = BlockSparseSym::new(dims.to_vec());
        let mut g = DVector::zeros(total);
        for (f, keep) in self.factors.iter().zip(keep) {
            if !keep {
                continue;
            }
            let (r, jacs) = self.linearize_factor(f, true)?;
            for (bi, ji) in &jacs {
                let jit = ji.transpose();
                let mut seg = g.rows_mut(offsets[*bi], dims[*bi]);
                seg += &jit * &r;
                for (bj, jj) in &jacs {
                    if bj > bi {
                        continue;
                    }
                    h.add_block(*bi, *bj, &(&jit * jj));
                }
            }
        }
        Ok((h, g))
    }

    /// Runs the solver.
    ///
    /// With `two_stage` enabled and regularization factors present, a first
    /// pass fits the absolute measurements alone and warm-starts the full
    /// problem, mirroring how poorly initialized group-valued problems are
    /// usually coaxed to converge. Costs reported are full-problem costs.
    pub fn solve(&mut self, config: &SolverConfig) -> Result<SolveReport> {
        if !self.factors.iter().any(|f| f.is_absolute()) {
            return Err(Error::RankDeficient {
                detail: "no position or fiducial factor anchors the trajectory gauge".into(),
            });
        }
        let start = Instant::now();
        let mut report = SolveReport {
            iterations: 0,
            initial_cost: 0.0,
            final_cost: 0.0,
            cost_history: Vec::new(),
            residual_jacobian_seconds: 0.0,
            linear_solve_seconds: 0.0,
            total_seconds: 0.0,
            termination: Termination::Converged,
        };
        report.initial_cost = self.cost()?;
        let has_regularizers = self.factors.iter().any(|f| !f.is_measurement() || f.is_imu());
        if config.two_stage && has_regularizers {
            let keep: Vec<bool> = self.factors.iter().map(|f| f.is_absolute()).collect();
            if keep.iter().any(|k| *k) {
                self.lm(config, &keep, &mut report)?;
                report.cost_history.clear();
            }
        }
        let keep = vec![true; self.factors.len()];
        let (final_cost, termination) = self.lm(config, &keep, &mut report)?;
        report.final_cost = final_cost;
        report.termination = termination;
        report.total_seconds = start.elapsed().as_secs_f64();
        Ok(report)
    }

    /// Boolean block-sparsity pattern of the Gauss-Newton information
    /// matrix implied by the current factor set.
    pub fn info_pattern(&self) -> Result<InfoPattern> {
        let n = self.block_dims().len();
        let mut set = vec![false; n * n];
        for f in &self.factors {
            let blocks = self.factor_blocks(f)?;
            for &i in &blocks {
                for &j in &blocks {
                    set[i * n + j] = true;
                }
            }
        }
        Ok(InfoPattern { n, set })
    }
}

/// Block-level sparsity bitmap of `H^T H`.
#[derive(Clone, Debug)]
pub struct InfoPattern {
    pub n: usize,
    set: Vec<bool>,
}

impl InfoPattern {
    pub fn is_set(&self, i: usize, j: usize) -> bool {
        self.set[i * self.n + j]
    }

    /// Largest block distance to a nonzero off-diagonal entry.
    pub fn semi_bandwidth(&self) -> usize {
        let mut band = 0;
        for i in 0..self.n {
            for j in 0..self.n {
                if self.is_set(i, j) {
                    band = band.max(i.abs_diff(j));
                }
            }
        }
        band
    }

    /// True when every nonzero entry is within one block of the diagonal.
    pub fn is_block_tridiagonal(&self) -> bool {
        self.semi_bandwidth() <= 1
    }

    pub fn occupied(&self) -> usize {
        self.set.iter().filter(|b| **b).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::{Matrix3, Vector3};
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    use crate::estimator::factors::{body_acceleration, body_angular_rate, fiducial_prediction};
    use crate::motion::transition_matrix;

    fn random_tangent(rng: &mut StdRng, group: Group, scale: f64) -> TangentVector {
        let d = group.dim();
        TangentVector::new(
            group,
            DVector::from_fn(d, |_, _| rng.gen_range(-scale..scale)),
        )
        .unwrap()
    }

    /// Constant-twist GP trajectory plus matching times.
    fn geodesic_gp(group: Group, vel: &TangentVector, times: &[f64]) -> GpTrajectory {
        let states = times
            .iter()
            .map(|&t| {
                let step = TangentVector::new(group, &vel.coords * t).unwrap();
                KinematicState::new(
                    ManifoldElement::exp(&step),
                    vel.clone(),
                    group.zero_tangent(),
                )
                .unwrap()
            })
            .collect();
        GpTrajectory::new(
            group,
            ModelOrder::Wnoj,
            times.to_vec(),
            states,
            ProcessNoise::isotropic(group.dim(), 1.0),
        )
        .unwrap()
    }

    fn bounded_tangent(rng: &mut StdRng, group: Group, max_norm: f64) -> TangentVector {
        let d = group.dim();
        let v: DVector<f64> = DVector::from_fn(d, |_, _| rng.gen_range(-1.0..1.0));
        let n = v.norm().max(1e-12);
        let mag: f64 = rng.gen_range(0.0..max_norm);
        TangentVector::new(group, v * (mag / n)).unwrap()
    }

    /// Trajectory whose pose increments stay consistent with its stored
    /// velocities, with velocity and acceleration norms below `vel`.
    fn smooth_gp(rng: &mut StdRng, group: Group, times: &[f64], vel: f64) -> GpTrajectory {
        let mut g = ManifoldElement::exp(&random_tangent(rng, group, 1.0));
        let mut velocity = bounded_tangent(rng, group, vel);
        let mut states = Vec::new();
        for i in 0..times.len() {
            if i > 0 {
                let dt = times[i] - times[i - 1];
                let step = &velocity.coords * dt + bounded_tangent(rng, group, 0.2 * vel * dt).coords;
                g = ManifoldElement::exp(&TangentVector::new(group, step).unwrap()).compose(&g);
                velocity = bounded_tangent(rng, group, vel);
            }
            states.push(
                KinematicState::new(
                    g.clone(),
                    velocity.clone(),
                    bounded_tangent(rng, group, vel),
                )
                .unwrap(),
            );
        }
        GpTrajectory::new(
            group,
            ModelOrder::Wnoj,
            times.to_vec(),
            states,
            ProcessNoise::isotropic(group.dim(), 1.0),
        )
        .unwrap()
    }

    fn smooth_spline(
        rng: &mut StdRng,
        group: Group,
        k: usize,
        count: usize,
        spread: f64,
    ) -> SplineTrajectory {
        let mut cps = vec![ManifoldElement::exp(&random_tangent(rng, group, 1.0))];
        for _ in 1..count {
            let step = ManifoldElement::exp(&random_tangent(rng, group, spread));
            cps.push(cps.last().unwrap().compose(&step));
        }
        SplineTrajectory::new(group, k, 0.0, 0.5, cps).unwrap()
    }

    /// Central-difference check of every Jacobian a factor reports.
    fn check_factor_jacobians(problem: &mut Problem, tol: f64) {
        let dims = problem.block_dims();
        let mut offsets = Vec::new();
        let mut acc = 0;
        for &d in &dims {
            offsets.push(acc);
            acc += d;
        }
        let eps = 1e-6;
        for fi in 0..problem.factors().len() {
            let f = problem.factors()[fi].clone();
            let (_, jacs) = problem.linearize_factor(&f, true).unwrap();
            for (block, jac) in &jacs {
                for c in 0..dims[*block] {
                    let mut probe = |sign: f64| {
                        let saved = problem.clone_params();
                        let mut delta = DVector::zeros(acc);
                        delta[offsets[*block] + c] = sign * eps;
                        problem.apply_step(&offsets, &dims, &delta);
                        let r = problem.linearize_factor(&f, false).unwrap().0;
                        problem.restore_params(saved);
                        r
                    };
                    let fd = (probe(1.0) - probe(-1.0)) / (2.0 * eps);
                    let col = jac.column(c).into_owned();
                    let scale = fd.norm().max(1.0);
                    assert!(
                        (&col - &fd).norm() <= tol * scale,
                        "factor {fi} block {block} col {c}: rel err {} vs tol {tol}",
                        (&col - &fd).norm() / scale
                    );
                }
            }
        }
    }

    #[test]
    fn position_residual_is_zero_at_truth_and_unit_after_whitening() {
        let mut rng = StdRng::seed_from_u64(7);
        let group = Group::Euclidean(2);
        let traj = smooth_gp(&mut rng, group, &[0.0, 0.5, 1.0], 1.0);
        let mut problem = Problem::from_gp(traj);
        let t = 0.3;
        let truth = problem.trajectory.state(t).unwrap().value.body_position();
        let cov = DMatrix::identity(2, 2) * 1e-4;
        problem
            .add_factor(Factor::position(t, truth.clone(), &cov).unwrap())
            .unwrap();
        let (r, _) = problem
            .linearize_factor(&problem.factors()[0].clone(), false)
            .unwrap();
        assert_relative_eq!(r.norm(), 0.0, epsilon = 1e-12);

        let offset = &truth + DVector::from_column_slice(&[0.01, 0.0]);
        problem
            .add_factor(Factor::position(t, offset, &cov).unwrap())
            .unwrap();
        let (r, _) = problem
            .linearize_factor(&problem.factors()[1].clone(), false)
            .unwrap();
        assert_relative_eq!(r, DVector::from_column_slice(&[1.0, 0.0]), epsilon = 1e-10);
    }

    #[test]
    fn position_jacobians_match_finite_differences() {
        let mut rng = StdRng::seed_from_u64(11);
        let group = Group::Euclidean(2);
        let traj = smooth_gp(&mut rng, group, &[0.0, 0.5, 1.0], 1.0);
        let mut problem = Problem::from_gp(traj);
        let cov = DMatrix::identity(2, 2) * 1e-4;
        for &t in &[0.2, 0.5, 0.77] {
            let z = DVector::from_fn(2, |_, _| rng.gen_range(-1.0..1.0));
            problem.add_factor(Factor::position(t, z, &cov).unwrap()).unwrap();
        }
        check_factor_jacobians(&mut problem, 1e-8);
    }

    fn stationary_level_gp(times: &[f64]) -> GpTrajectory {
        geodesic_gp(Group::Se3, &Group::Se3.zero_tangent(), times)
    }

    #[test]
    fn imu_residuals_vanish_on_consistent_measurements() {
        let traj = stationary_level_gp(&[0.0, 0.5, 1.0]);
        let mut problem = Problem::from_gp(traj);
        let cov = Matrix3::identity() * 1e-4;
        // Stationary level pose: zero rate, gravity-only specific force.
        problem
            .add_factor(Factor::gyro(0.25, Vector3::zeros(), &cov).unwrap())
            .unwrap();
        let g_reading = -problem.gravity() * Vector3::z();
        problem
            .add_factor(Factor::accel(0.25, g_reading, &cov).unwrap())
            .unwrap();
        for i in 0..2 {
            let (r, _) = problem
                .linearize_factor(&problem.factors()[i].clone(), false)
                .unwrap();
            assert_relative_eq!(r.norm(), 0.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn gyro_bias_absorbs_constant_offset() {
        let traj = stationary_level_gp(&[0.0, 0.5, 1.0]);
        let mut problem = Problem::from_gp(traj);
        let cov = Matrix3::identity() * 1e-4;
        let bias = Vector3::new(0.1, 0.0, 0.0);
        problem.add_factor(Factor::gyro(0.25, bias, &cov).unwrap()).unwrap();
        *problem.gyro_bias.as_mut().unwrap() = DVector::from_column_slice(bias.as_slice());
        let (r, _) = problem
            .linearize_factor(&problem.factors()[0].clone(), false)
            .unwrap();
        assert_relative_eq!(r.norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn imu_jacobians_match_finite_differences_gp_and_spline() {
        let mut rng = StdRng::seed_from_u64(13);
        for group in [Group::Se3, Group::So3xR3] {
            let cov = Matrix3::identity() * 1e-2;
            // GP trajectory: approximate Jacobians, loose tolerance.
            let traj = smooth_gp(&mut rng, group, &[0.0, 1.0, 2.0], 0.04);
            let mut problem = Problem::from_gp(traj);
            for &t in &[0.4, 1.3] {
                problem
                    .add_factor(
                        Factor::gyro(
                            t,
                            Vector3::new(rng.gen_range(-0.1..0.1), 0.0, 0.1),
                            &cov,
                        )
                        .unwrap(),
                    )
                    .unwrap();
                problem
                    .add_factor(
                        Factor::accel(
                            t,
                            Vector3::new(0.1, rng.gen_range(-0.3..0.3), -9.7),
                            &cov,
                        )
                        .unwrap(),
                    )
                    .unwrap();
            }
            check_factor_jacobians(&mut problem, 1e-3);

            // Spline trajectory: exact Jacobians, tight tolerance.
            let traj = smooth_spline(&mut rng, group, 4, 9, 0.08);
            let (start, end) = traj.domain();
            let mut problem = Problem::from_spline(traj, ProcessNoise::isotropic(6, 1.0));
            for i in 0..3 {
                let t = start + (end - start) * (0.2 + 0.25 * i as f64);
                problem
                    .add_factor(Factor::gyro(t, Vector3::new(0.02, -0.01, 0.05), &cov).unwrap())
                    .unwrap();
                problem
                    .add_factor(Factor::accel(t, Vector3::new(0.3, 0.1, -9.8), &cov).unwrap())
                    .unwrap();
            }
            check_factor_jacobians(&mut problem, 1e-6);
        }
    }

    fn camera_offset() -> ManifoldElement {
        ManifoldElement::se3_from_parts(&Matrix3::identity(), &Vector3::new(0.0, 0.0, 0.1))
    }

    #[test]
    fn fiducial_residual_zero_at_prediction_and_linear_in_perturbation() {
        let mut rng = StdRng::seed_from_u64(17);
        let traj = smooth_gp(&mut rng, Group::Se3, &[0.0, 1.0], 0.2);
        let mut problem = Problem::from_gp(traj);
        let tag = Group::Se3.identity();
        let t = 0.6;
        let state = problem.trajectory.state(t).unwrap();
        let pred = fiducial_prediction(&state.value, &camera_offset(), &tag).unwrap();
        let cov = DMatrix::identity(6, 6) * 0.05;
        problem
            .add_factor(Factor::fiducial(t, pred.clone(), camera_offset(), tag.clone(), &cov).unwrap())
            .unwrap();
        let f0 = problem.factors()[0].clone();
        let (r, _) = problem.linearize_factor(&f0, false).unwrap();
        assert_relative_eq!(r.norm(), 0.0, epsilon = 1e-12);

        // Left-perturbed measurement: whitened residual ~ W delta.
        let delta = random_tangent(&mut rng, Group::Se3, 1e-4);
        let z = ManifoldElement::exp(&delta).compose(&pred);
        problem
            .add_factor(Factor::fiducial(t, z, camera_offset(), tag, &cov).unwrap())
            .unwrap();
        let f1 = problem.factors()[1].clone();
        let (r, _) = problem.linearize_factor(&f1, false).unwrap();
        let expected = &f1.whitener * &delta.coords;
        assert_relative_eq!(r, expected, epsilon = 1e-7);
    }

    #[test]
    fn fiducial_jacobians_match_finite_differences() {
        let mut rng = StdRng::seed_from_u64(19);
        for group in [Group::Se3, Group::So3xR3] {
            let cov = DMatrix::identity(6, 6) * 0.05;
            let tag = Group::Se3.identity();
            let traj = smooth_gp(&mut rng, group, &[0.0, 1.0, 2.0], 0.04);
            let mut problem = Problem::from_gp(traj);
            for &t in &[0.5, 1.0, 1.7] {
                let state = problem.trajectory.state(t).unwrap();
                let z = ManifoldElement::exp(&random_tangent(&mut rng, Group::Se3, 0.05))
                    .compose(&fiducial_prediction(&state.value, &camera_offset(), &tag).unwrap());
                problem
                    .add_factor(Factor::fiducial(t, z, camera_offset(), tag.clone(), &cov).unwrap())
                    .unwrap();
            }
            check_factor_jacobians(&mut problem, 1e-3);

            let traj = smooth_spline(&mut rng, group, 4, 9, 0.08);
            let (start, _) = traj.domain();
            let mut problem = Problem::from_spline(traj, ProcessNoise::isotropic(6, 1.0));
            for i in 0..3 {
                let t = start + 0.4 + 0.7 * i as f64;
                let state = problem.trajectory.state(t).unwrap();
                let z = ManifoldElement::exp(&random_tangent(&mut rng, Group::Se3, 0.05))
                    .compose(&fiducial_prediction(&state.value, &camera_offset(), &tag).unwrap());
                problem
                    .add_factor(Factor::fiducial(t, z, camera_offset(), tag.clone(), &cov).unwrap())
                    .unwrap();
            }
            check_factor_jacobians(&mut problem, 1e-6);
        }
    }

    #[test]
    fn motion_prior_jacobians_match_finite_differences() {
        let mut rng = StdRng::seed_from_u64(23);
        // GP: priors land on estimation times. The whitener redistributes
        // the first-order approximation error across rows, so this check
        // runs at gentler velocities than the unwhitened module suites.
        let traj = smooth_gp(&mut rng, Group::Se3, &[0.0, 1.0, 2.0], 0.025);
        let mut problem = Problem::from_gp(traj);
        assert_eq!(problem.add_motion_priors(1.0).unwrap(), 2);
        check_factor_jacobians(&mut problem, 1e-3);

        // Spline: priors interpolate control points; the prior blocks are
        // approximate, so the interpolated velocities must stay small.
        let traj = smooth_spline(&mut rng, Group::Se3, 4, 10, 0.015);
        let mut problem = Problem::from_spline(traj, ProcessNoise::isotropic(6, 1.0));
        assert!(problem.add_motion_priors(1.5).unwrap() >= 1);
        check_factor_jacobians(&mut problem, 1e-3);
    }

    #[test]
    fn motion_prior_counts_follow_sampling_rules() {
        let mut rng = StdRng::seed_from_u64(29);
        let traj = smooth_gp(&mut rng, Group::Se3, &[0.0, 0.5, 1.0, 1.5, 2.0], 0.05);
        let mut problem = Problem::from_gp(traj);
        assert_eq!(problem.add_motion_priors(0.5).unwrap(), 4);

        // Spline with knot period 0.5 and one prior every three knots.
        let traj = smooth_spline(&mut rng, Group::Se3, 4, 15, 0.05); // domain 6 s
        let (start, end) = traj.domain();
        let span = end - start;
        let mut problem = Problem::from_spline(traj, ProcessNoise::isotropic(6, 1.0));
        let added = problem.add_motion_priors(1.5).unwrap();
        assert_eq!(added, (span / 1.5 + 1e-9).floor() as usize);

        // Degenerate period: longer than the span.
        let traj = smooth_spline(&mut rng, Group::Se3, 4, 8, 0.05);
        let mut problem = Problem::from_spline(traj, ProcessNoise::isotropic(6, 1.0));
        assert_eq!(problem.add_motion_priors(100.0).unwrap(), 0);
    }

    #[test]
    fn linear_problem_converges_in_one_gauss_newton_step() {
        let mut rng = StdRng::seed_from_u64(31);
        let group = Group::Euclidean(2);
        let times: Vec<f64> = (0..6).map(|i| i as f64 * 0.4).collect();
        let traj = GpTrajectory::new(
            group,
            ModelOrder::Wnoj,
            times.clone(),
            times.iter().map(|_| KinematicState::at_rest(group)).collect(),
            ProcessNoise::isotropic(2, 1.0),
        )
        .unwrap();
        let mut problem = Problem::from_gp(traj);
        let cov = DMatrix::identity(2, 2) * 1e-4;
        for i in 0..20 {
            let t = 2.0 * i as f64 / 19.0;
            let z = DVector::from_column_slice(&[
                (0.5 * t).sin() + 1e-3 * rng.gen_range(-1.0..1.0),
                t,
            ]);
            problem.add_factor(Factor::position(t, z, &cov).unwrap()).unwrap();
        }
        problem.add_motion_priors(0.4).unwrap();
        let config = SolverConfig {
            lm_lambda0: 0.0,
            ..SolverConfig::default()
        };
        let report = problem.solve(&config).unwrap();
        assert!(report.iterations <= 2, "linear solve took {}", report.iterations);
        assert!(report.final_cost <= report.initial_cost);
        // Gradient at the solution vanishes.
        let dims = problem.block_dims();
        let mut offsets = Vec::new();
        let mut acc = 0;
        for &d in &dims {
            offsets.push(acc);
            acc += d;
        }
        let keep = vec![true; problem.factors().len()];
        let (_, g) = problem.assemble(&keep, &dims, &offsets, acc).unwrap();
        assert!(g.amax() <= 1e-10, "gradient {}", g.amax());
    }

    #[test]
    fn zero_noise_problem_at_truth_reports_zero_iterations() {
        let mut rng = StdRng::seed_from_u64(37);
        let vel = random_tangent(&mut rng, Group::Se3, 0.3);
        let times: Vec<f64> = (0..11).map(|i| i as f64 * 0.2).collect();
        let traj = geodesic_gp(Group::Se3, &vel, &times);
        let mut problem = Problem::from_gp(traj);
        let tag = Group::Se3.identity();
        let cov = DMatrix::identity(6, 6) * 0.05;
        for i in 0..11 {
            let t = i as f64 * 0.2;
            let state = problem.trajectory.state(t).unwrap();
            let z = fiducial_prediction(&state.value, &camera_offset(), &tag).unwrap();
            problem
                .add_factor(Factor::fiducial(t, z, camera_offset(), tag.clone(), &cov).unwrap())
                .unwrap();
        }
        let report = problem.solve(&SolverConfig::default()).unwrap();
        assert_eq!(report.iterations, 0);
        assert!(report.final_cost <= 1e-16, "cost {}", report.final_cost);
    }

    #[test]
    fn unanchored_problem_is_rank_deficient() {
        let mut rng = StdRng::seed_from_u64(41);
        let traj = smooth_gp(&mut rng, Group::Se3, &[0.0, 0.5, 1.0], 0.05);
        let mut problem = Problem::from_gp(traj);
        problem.add_motion_priors(0.5).unwrap();
        let cov = Matrix3::identity() * 1e-4;
        problem
            .add_factor(Factor::gyro(0.3, Vector3::zeros(), &cov).unwrap())
            .unwrap();
        assert!(matches!(
            problem.solve(&SolverConfig::default()),
            Err(Error::RankDeficient { .. })
        ));
    }

    #[test]
    fn accepted_costs_never_increase() {
        let mut rng = StdRng::seed_from_u64(43);
        let times: Vec<f64> = (0..8).map(|i| i as f64 * 0.3).collect();
        let truth = smooth_gp(&mut rng, Group::Se3, &times, 0.2);
        let init = GpTrajectory::new(
            Group::Se3,
            ModelOrder::Wnoj,
            times.clone(),
            times.iter().map(|_| KinematicState::at_rest(Group::Se3)).collect(),
            ProcessNoise::isotropic(6, 1.0),
        )
        .unwrap();
        let mut problem = Problem::from_gp(init);
        let tag = Group::Se3.identity();
        let cov = DMatrix::identity(6, 6) * 0.05;
        for &t in &times {
            let state = truth.interp_lie(t).unwrap();
            let z = ManifoldElement::exp(&random_tangent(&mut rng, Group::Se3, 0.02))
                .compose(&fiducial_prediction(&state.value, &camera_offset(), &tag).unwrap());
            problem
                .add_factor(Factor::fiducial(t, z, camera_offset(), tag.clone(), &cov).unwrap())
                .unwrap();
        }
        problem.add_motion_priors(0.3).unwrap();
        let report = problem
            .solve(&SolverConfig {
                two_stage: true,
                ..SolverConfig::default()
            })
            .unwrap();
        for w in report.cost_history.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-12));
        }
        assert!(report.final_cost <= report.initial_cost);
        assert!(
            report.residual_jacobian_seconds + report.linear_solve_seconds
                <= report.total_seconds + 1e-9
        );
    }

    #[test]
    fn info_pattern_shapes() {
        let mut rng = StdRng::seed_from_u64(47);
        // GP with priors and interpolated measurements: block-tridiagonal.
        let times: Vec<f64> = (0..6).map(|i| i as f64 * 0.5).collect();
        let traj = smooth_gp(&mut rng, Group::Se3, &times, 0.05);
        let mut problem = Problem::from_gp(traj);
        let tag = Group::Se3.identity();
        let cov = DMatrix::identity(6, 6) * 0.05;
        for i in 0..24 {
            let t = 2.5 * i as f64 / 23.0;
            let state = problem.trajectory.state(t).unwrap();
            let z = fiducial_prediction(&state.value, &camera_offset(), &tag).unwrap();
            problem
                .add_factor(Factor::fiducial(t, z, camera_offset(), tag.clone(), &cov).unwrap())
                .unwrap();
        }
        problem.add_motion_priors(0.5).unwrap();
        let pattern = problem.info_pattern().unwrap();
        assert!(pattern.is_block_tridiagonal());

        // Spline with measurement factors only: semi-bandwidth k - 1.
        for k in [4, 6] {
            let traj = smooth_spline(&mut rng, Group::Se3, k, k + 8, 0.05);
            let (start, end) = traj.domain();
            let mut problem = Problem::from_spline(traj, ProcessNoise::isotropic(6, 1.0));
            for i in 0..30 {
                let t = start + (end - start) * i as f64 / 29.0;
                let state = problem.trajectory.state(t).unwrap();
                let z = fiducial_prediction(&state.value, &camera_offset(), &tag).unwrap();
                problem
                    .add_factor(Factor::fiducial(t, z, camera_offset(), tag.clone(), &cov).unwrap())
                    .unwrap();
            }
            assert_eq!(problem.info_pattern().unwrap().semi_bandwidth(), k - 1);
        }

        // A single factor touching one block marks one diagonal block.
        let traj = smooth_gp(&mut rng, Group::Se3, &[0.0, 1.0, 2.0], 0.05);
        let mut problem = Problem::from_gp(traj);
        let state = problem.trajectory.state(1.0).unwrap();
        let z = fiducial_prediction(&state.value, &camera_offset(), &tag).unwrap();
        problem
            .add_factor(Factor::fiducial(1.0, z, camera_offset(), tag, &cov).unwrap())
            .unwrap();
        let pattern = problem.info_pattern().unwrap();
        assert_eq!(pattern.occupied(), 1);
        assert!(pattern.is_set(1, 1));
    }

    #[test]
    fn consistency_helpers_match_twist_conventions() {
        // A pure-rotation geodesic about z: left-tangent velocity is the
        // negated body rate.
        let mut vel = Group::Se3.zero_tangent();
        vel.coords[5] = -0.3;
        let traj = geodesic_gp(Group::Se3, &vel, &[0.0, 1.0]);
        let s = traj.interp_lie(0.5).unwrap();
        assert_relative_eq!(
            body_angular_rate(&s),
            Vector3::new(0.0, 0.0, 0.3),
            epsilon = 1e-12
        );
        assert_relative_eq!(body_acceleration(&s).unwrap(), Vector3::zeros(), epsilon = 1e-12);
        // Same motion on the split group.
        let mut vel = Group::So3xR3.zero_tangent();
        vel.coords[5] = -0.3;
        let traj = geodesic_gp(Group::So3xR3, &vel, &[0.0, 1.0]);
        let s = traj.interp_lie(0.5).unwrap();
        assert_relative_eq!(
            body_angular_rate(&s),
            Vector3::new(0.0, 0.0, 0.3),
            epsilon = 1e-12
        );
    }

    #[test]
    fn euclidean_motion_prior_factor_matches_transition_form() {
        // GP prior between two Euclidean states equals x1 - Phi x0 whitened.
        let mut rng = StdRng::seed_from_u64(53);
        let traj = smooth_gp(&mut rng, Group::Euclidean(2), &[0.0, 0.7], 2.0);
        let x0 = traj.states()[0].to_stacked();
        let x1 = traj.states()[1].to_stacked();
        let mut problem = Problem::from_gp(traj);
        problem.add_motion_priors(0.7).unwrap();
        let f = problem.factors()[0].clone();
        let (r, _) = problem.linearize_factor(&f, false).unwrap();
        let raw = &x1 - transition_matrix(0.7, ModelOrder::Wnoj, 2) * &x0;
        assert_relative_eq!(r, &f.whitener * raw, epsilon = 1e-12);
    }
}
