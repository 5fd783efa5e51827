//! Monte-Carlo benchmark harness.
//!
//! Runs grids of (representation x order x density x regularization) cells
//! over simulated scenarios, with paired seeds across cells so every
//! representation sees the same measurement realizations. Emits one CSV row
//! per trial plus a median row per cell, block-sparsity bitmaps, and
//! post-solve trajectory query throughput.

use std::io::Write as IoWrite;
use std::path::Path;

use nalgebra::{DVector, Matrix3, Vector3};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimator::{Factor, Problem, SolveReport, SolverConfig, Termination, Trajectory};
use crate::gp::GpTrajectory;
use crate::manifold::so3::skew;
use crate::manifold::{Group, KinematicState, ManifoldElement, TangentVector};
use crate::motion::{ModelOrder, ProcessNoise};
use crate::sim::{simulate, GroundTruth, MeasurementSet, SimConfig};
use crate::spline::SplineTrajectory;

/// The six trajectory representations under comparison.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Representation {
    GpSe3,
    GpSo3xR3,
    SplineSe3,
    SplineSo3xR3,
    GpEuclid,
    SplineEuclid,
}

impl Representation {
    pub fn group(&self, euclid_dim: usize) -> Group {
        match self {
            Representation::GpSe3 | Representation::SplineSe3 => Group::Se3,
            Representation::GpSo3xR3 | Representation::SplineSo3xR3 => Group::So3xR3,
            Representation::GpEuclid | Representation::SplineEuclid => Group::Euclidean(euclid_dim),
        }
    }

    pub fn is_gp(&self) -> bool {
        matches!(
            self,
            Representation::GpSe3 | Representation::GpSo3xR3 | Representation::GpEuclid
        )
    }

    pub fn label(&self) -> &'static str {
        match self {
            Representation::GpSe3 => "gp-se3",
            Representation::GpSo3xR3 => "gp-so3xr3",
            Representation::SplineSe3 => "spline-se3",
            Representation::SplineSo3xR3 => "spline-so3xr3",
            Representation::GpEuclid => "gp-euclid",
            Representation::SplineEuclid => "spline-euclid",
        }
    }
}

/// Which regularization terms enter the problem.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Regularization {
    None,
    Mp,
    Imu,
    MpImu,
}

impl Regularization {
    pub fn uses_mp(&self) -> bool {
        matches!(self, Regularization::Mp | Regularization::MpImu)
    }

    pub fn uses_imu(&self) -> bool {
        matches!(self, Regularization::Imu | Regularization::MpImu)
    }

    pub fn label(&self) -> &'static str {
        match self {
            Regularization::None => "none",
            Regularization::Mp => "mp",
            Regularization::Imu => "imu",
            Regularization::MpImu => "mp+imu",
        }
    }
}

/// Axes of one Monte-Carlo comparison.
#[derive(Clone, Debug, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct ExperimentGrid {
    pub representations: Vec<Representation>,
    pub spline_orders: Vec<usize>,
    /// Spline knot periods, seconds.
    pub knot_periods: Vec<f64>,
    /// GP estimation-time strides (state every n-th anchor measurement).
    pub gp_strides: Vec<usize>,
    pub regularizations: Vec<Regularization>,
    pub trials: usize,
    /// Spline motion-prior period as a multiple of the knot period.
    pub mp_period_factor: f64,
    /// Sampling rate of the RMSE grid, Hz.
    pub rmse_grid_hz: f64,
    /// Post-solve query-throughput probe rate, Hz (0 disables).
    pub query_hz: f64,
}

impl Default for ExperimentGrid {
    fn default() -> Self {
        ExperimentGrid {
            representations: vec![Representation::GpSe3, Representation::SplineSe3],
            spline_orders: vec![4],
            knot_periods: vec![0.1],
            gp_strides: vec![1],
            regularizations: vec![Regularization::Imu],
            trials: 20,
            mp_period_factor: 3.0,
            rmse_grid_hz: 100.0,
            query_hz: 1000.0,
        }
    }
}

/// Execution knobs.
#[derive(Clone, Debug, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct OutputConfig {
    /// Run trials serially so wall-clock timing columns are clean.
    pub timing_serial: bool,
    pub jobs: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            timing_serial: true,
            jobs: 1,
        }
    }
}

/// Full benchmark configuration (the JSON config file).
#[derive(Clone, Debug, Default, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct BenchConfig {
    pub scenario: SimConfig,
    pub grid: ExperimentGrid,
    pub solver: SolverConfig,
    pub output: OutputConfig,
}

/// One grid cell.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cell {
    pub representation: Representation,
    /// Spline order (unused for GP cells).
    pub order: usize,
    /// Spline knot period (unused for GP cells).
    pub knot_period: f64,
    /// GP stride (unused for spline cells).
    pub gp_stride: usize,
    pub regularization: Regularization,
    /// Spline motion-prior period as a multiple of the knot period.
    pub mp_period_factor: f64,
}

impl Cell {
    pub fn label(&self) -> String {
        if self.representation.is_gp() {
            format!(
                "{}/ngp{}/{}",
                self.representation.label(),
                self.gp_stride,
                self.regularization.label()
            )
        } else {
            format!(
                "{}/k{}/dt{}/{}",
                self.representation.label(),
                self.order,
                self.knot_period,
                self.regularization.label()
            )
        }
    }
}

/// One output row: full cell provenance plus metrics.
#[derive(Clone, Debug)]
pub struct MetricsRow {
    pub cell: Cell,
    /// Trial index; `None` marks the cell median row.
    pub trial: Option<usize>,
    pub seed: u64,
    pub position_rmse: f64,
    pub rotation_rmse: f64,
    pub velocity_rmse: f64,
    pub twist_rmse: f64,
    pub solve_seconds: f64,
    pub residual_jacobian_seconds: f64,
    pub linear_solve_seconds: f64,
    pub iterations: usize,
    pub param_floats: usize,
    pub query_rate: f64,
    pub termination: String,
}

impl MetricsRow {
    pub fn csv_header() -> &'static str {
        "representation,order,knot_period,gp_stride,regularization,trial,seed,\
         position_rmse,rotation_rmse,velocity_rmse,twist_rmse,solve_seconds,\
         residual_jacobian_seconds,linear_solve_seconds,iterations,param_floats,\
         query_rate,termination"
    }

    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.cell.representation.label(),
            self.cell.order,
            self.cell.knot_period,
            self.cell.gp_stride,
            self.cell.regularization.label(),
            self.trial.map(|t| t.to_string()).unwrap_or_else(|| "median".into()),
            self.seed,
            self.position_rmse,
            self.rotation_rmse,
            self.velocity_rmse,
            self.twist_rmse,
            self.solve_seconds,
            self.residual_jacobian_seconds,
            self.linear_solve_seconds,
            self.iterations,
            self.param_floats,
            self.query_rate,
            self.termination,
        )
    }
}

/// Median as the usual order statistic (average of the two central values
/// for even counts). NaNs sort last.
pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Greater));
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Converts an SE(3) kinematic state into another representation's group.
pub fn state_in_group(state: &KinematicState, group: Group) -> Result<KinematicState> {
    if state.group() == group {
        return Ok(state.clone());
    }
    match (state.group(), group) {
        (Group::Se3, Group::So3xR3) => {
            let rot = state.value.rotation();
            let r = Vector3::from_column_slice(state.value.body_position().as_slice());
            let g_trans = state.velocity.translation_block();
            let g_trans = Vector3::new(g_trans[0], g_trans[1], g_trans[2]);
            let omega_left = state.velocity.rotation_block();
            let a_trans = state.acceleration.translation_block();
            let a_trans = Vector3::new(a_trans[0], a_trans[1], a_trans[2]);
            // From the left-tangent relations of T = (R, -R r):
            // dg_trans = -R r_dot, ddg_trans = -w^x R r_dot - R r_ddot.
            let r_dot = -(rot.transpose() * g_trans);
            let r_ddot = rot.transpose() * (-a_trans + skew(&omega_left) * g_trans);
            let mut vel = DVector::zeros(6);
            vel.rows_mut(0, 3).copy_from(&r_dot);
            vel.rows_mut(3, 3).copy_from(&omega_left);
            let mut acc = DVector::zeros(6);
            acc.rows_mut(0, 3).copy_from(&r_ddot);
            acc.rows_mut(3, 3).copy_from(&state.acceleration.rotation_block());
            KinematicState::new(
                ManifoldElement::so3xr3_from_parts(&rot, &r),
                TangentVector::new(group, vel)?,
                TangentVector::new(group, acc)?,
            )
        }
        _ => Err(Error::InvalidArgument {
            detail: format!("no conversion from {:?} to {:?}", state.group(), group),
        }),
    }
}

/// Position, rotation, velocity, and twist RMSE of a solved trajectory
/// against the dense ground truth, sampled at `grid_hz` over the overlap of
/// the two domains.
#[derive(Clone, Copy, Debug, Default)]
pub struct RmseBundle {
    pub position: f64,
    pub rotation: f64,
    pub velocity: f64,
    pub twist: f64,
    pub samples: usize,
}

pub fn rmse(truth: &GroundTruth, traj: &Trajectory, grid_hz: f64) -> Result<RmseBundle> {
    if grid_hz <= 0.0 {
        return Err(Error::InvalidArgument {
            detail: "rmse grid rate must be positive".into(),
        });
    }
    let (t0, t1) = truth.span();
    let (d0, d1) = traj.domain();
    let start = t0.max(d0);
    let end = t1.min(d1);
    if end <= start {
        return Err(Error::OutOfRange {
            tau: start,
            start: d0,
            end: d1,
        });
    }
    let mut acc = RmseBundle::default();
    let truth_dt = truth.times[1] - truth.times[0];
    let step = ((1.0 / grid_hz) / truth_dt).round().max(1.0) as usize;
    let first = ((start - truth.times[0]) / truth_dt).ceil().max(0.0) as usize;
    let mut sums = [0.0f64; 4];
    let mut idx = first;
    while idx < truth.times.len() {
        let t = truth.times[idx];
        if t > end + 1e-12 {
            break;
        }
        idx += step;
        let est = traj.state(t)?;
        let tru = state_in_group(truth.state_at(t)?, traj.group())?;
        let dp = est.value.body_position() - tru.value.body_position();
        sums[0] += dp.norm_squared();
        if !matches!(traj.group(), Group::Euclidean(_)) {
            let rel = est.value.rotation() * tru.value.rotation().transpose();
            let angle = crate::manifold::so3::log(&rel)
                .map(|v| v.norm())
                .unwrap_or(std::f64::consts::PI);
            sums[1] += angle * angle;
        }
        let dvel = &est.velocity.coords - &tru.velocity.coords;
        sums[3] += dvel.norm_squared();
        let dv = est.velocity.translation_block() - tru.velocity.translation_block();
        sums[2] += dv.norm_squared();
        acc.samples += 1;
    }
    let n = acc.samples as f64;
    acc.position = (sums[0] / n).sqrt();
    acc.rotation = (sums[1] / n).sqrt();
    acc.velocity = (sums[2] / n).sqrt();
    acc.twist = (sums[3] / n).sqrt();
    Ok(acc)
}

/// Estimation times for a GP cell: every `stride`-th anchor stamp, with the
/// scenario endpoints forced in so the trajectory domain covers every
/// measurement.
fn gp_times(anchor_stamps: &[f64], stride: usize, duration: f64) -> Vec<f64> {
    let mut times: Vec<f64> = anchor_stamps.iter().cloned().step_by(stride.max(1)).collect();
    if times.first().copied() != Some(0.0) {
        times.insert(0, 0.0);
    }
    if times.last().copied().unwrap_or(0.0) + 1e-12 < duration {
        times.push(duration);
    }
    times
}

/// Builds the estimation problem for one cell from a measurement set.
///
/// Trajectory parameters start at identity/zero. The motion-prior process
/// noise comes from the scenario's PSD, falling back to a unit PSD when the
/// scenario is noise-free (the weights must stay positive definite).
pub fn assemble_problem(
    cfg: &SimConfig,
    meas: &MeasurementSet,
    cell: &Cell,
) -> Result<Problem> {
    let group = cell.representation.group(2);
    let d = group.dim();
    let q_diag: Vec<f64> = if cfg.noise.q_diag.iter().all(|&x| x == 0.0) {
        vec![1.0; d]
    } else if cfg.noise.q_diag.len() == d {
        cfg.noise.q_diag.clone()
    } else {
        return Err(Error::DimensionMismatch {
            expected: d,
            actual: cfg.noise.q_diag.len(),
        });
    };
    let q = ProcessNoise::from_diagonal(&q_diag);

    let anchor: Vec<f64> = if cfg.scenario.is_linear() {
        meas.position.iter().map(|m| m.stamp).collect()
    } else {
        let mut stamps: Vec<f64> = meas.fiducial.iter().map(|m| m.stamp).collect();
        stamps.dedup();
        stamps
    };

    let mut problem = if cell.representation.is_gp() {
        let times = gp_times(&anchor, cell.gp_stride, cfg.duration);
        let states = times.iter().map(|_| KinematicState::at_rest(group)).collect();
        Problem::from_gp(GpTrajectory::new(
            group,
            ModelOrder::Wnoj,
            times,
            states,
            q.clone(),
        )?)
    } else {
        let traj = SplineTrajectory::covering(
            group,
            cell.order,
            cell.knot_period,
            0.0,
            cfg.duration,
            &group.identity(),
        )?;
        Problem::from_spline(traj, q.clone())
    };

    if cfg.scenario.is_linear() {
        for m in &meas.position {
            problem.add_factor(Factor::position(m.stamp, m.value.clone(), &m.covariance)?)?;
        }
    } else {
        let cam_from_body = cfg.camera.cam_from_body.to_se3();
        let tags: Vec<ManifoldElement> = cfg.tags.iter().map(|p| p.to_se3()).collect();
        for m in &meas.fiducial {
            problem.add_factor(Factor::fiducial(
                m.stamp,
                m.value.clone(),
                cam_from_body.clone(),
                tags[m.tag].clone(),
                &m.covariance,
            )?)?;
        }
        if cell.regularization.uses_imu() {
            for m in &meas.gyro {
                let cov = Matrix3::from_column_slice(m.covariance.as_slice());
                problem.add_factor(Factor::gyro(
                    m.stamp,
                    Vector3::from_column_slice(m.value.as_slice()),
                    &cov,
                )?)?;
            }
            for m in &meas.accel {
                let cov = Matrix3::from_column_slice(m.covariance.as_slice());
                problem.add_factor(Factor::accel(
                    m.stamp,
                    Vector3::from_column_slice(m.value.as_slice()),
                    &cov,
                )?)?;
            }
        }
    }
    if cell.regularization.uses_mp() {
        let period = if cell.representation.is_gp() {
            // Samples coincide with the estimation times; the period value
            // is not used there.
            1.0
        } else {
            cell.knot_period * cell.mp_period_factor
        };
        problem.add_motion_priors(period)?;
    }
    Ok(problem)
}

/// Re-initializes a problem's trajectory parameters from ground truth.
///
/// GP states sample the truth at the estimation times; spline control points
/// sample it at their Greville times (extrapolating geodesically past the
/// ends), which reproduces constant-twist truth exactly.
pub fn initialize_at_truth(problem: &mut Problem, truth: &GroundTruth) -> Result<()> {
    let group = problem.trajectory.group();
    let grid_dt = truth.times[1] - truth.times[0];
    let sample = |t: f64| -> Result<KinematicState> {
        let idx = (((t - truth.times[0]) / grid_dt).round() as i64)
            .clamp(0, truth.times.len() as i64 - 1) as usize;
        let base = &truth.states[idx];
        let remainder = t - truth.times[idx];
        let mut out = base.clone();
        if remainder != 0.0 {
            // Geodesic extension; exact on constant-twist truth.
            let step =
                TangentVector::new(base.group(), &base.velocity.coords * remainder)?;
            out.value = ManifoldElement::exp(&step).compose(&base.value);
            out.velocity.coords += &base.acceleration.coords * remainder;
        }
        state_in_group(&out, group)
    };
    match &mut problem.trajectory {
        Trajectory::Gp(traj) => {
            let times = traj.times().to_vec();
            for (i, t) in times.iter().enumerate() {
                traj.states_mut()[i] = sample(*t)?;
            }
        }
        Trajectory::Spline(traj) => {
            for i in 0..traj.control_points().len() {
                let t = traj.greville_time(i);
                traj.control_points_mut()[i] = sample(t)?.value;
            }
        }
    }
    Ok(())
}

/// Wall-clock throughput of full-state queries over a uniform grid.
pub fn query_throughput(traj: &Trajectory, rate_hz: f64, duration: f64) -> Result<f64> {
    if rate_hz <= 0.0 || duration <= 0.0 {
        return Err(Error::InvalidArgument {
            detail: "query rate and duration must be positive".into(),
        });
    }
    let (start, end) = traj.domain();
    let count = (rate_hz * duration).round() as usize;
    let span = (end - start).min(duration);
    let clock = std::time::Instant::now();
    for i in 0..count {
        let t = start + span * (i as f64 / count as f64);
        std::hint::black_box(traj.state(t)?);
    }
    Ok(count as f64 / clock.elapsed().as_secs_f64())
}

/// Text bitmap of the information-matrix block pattern: `#` occupied,
/// `.` empty; the empty problem renders as the empty string.
pub fn dump_sparsity(problem: &Problem) -> Result<String> {
    if problem.factors().is_empty() {
        return Ok(String::new());
    }
    let pattern = problem.info_pattern()?;
    let mut out = String::with_capacity(pattern.n * (pattern.n + 1));
    for i in 0..pattern.n {
        for j in 0..pattern.n {
            out.push(if pattern.is_set(i, j) { '#' } else { '.' });
        }
        out.push('\n');
    }
    Ok(out)
}

/// Expands the grid axes into concrete cells.
pub fn cells_of(grid: &ExperimentGrid) -> Vec<Cell> {
    let mut cells = Vec::new();
    for &representation in &grid.representations {
        for &regularization in &grid.regularizations {
            if representation.is_gp() {
                for &stride in &grid.gp_strides {
                    cells.push(Cell {
                        representation,
                        order: 0,
                        knot_period: 0.0,
                        gp_stride: stride,
                        regularization,
                        mp_period_factor: grid.mp_period_factor,
                    });
                }
            } else {
                for &order in &grid.spline_orders {
                    for &dt in &grid.knot_periods {
                        cells.push(Cell {
                            representation,
                            order,
                            knot_period: dt,
                            gp_stride: 0,
                            regularization,
                            mp_period_factor: grid.mp_period_factor,
                        });
                    }
                }
            }
        }
    }
    cells
}

/// Runs one trial of one cell.
pub fn run_trial(
    cfg: &BenchConfig,
    cell: &Cell,
    trial: usize,
) -> Result<MetricsRow> {
    let mut sim_cfg = cfg.scenario.clone();
    sim_cfg.seed = cfg.scenario.seed.wrapping_add(trial as u64);
    let (truth, meas) = simulate(&sim_cfg)?;
    let mut problem = assemble_problem(&sim_cfg, &meas, cell)?;
    let mut solver = cfg.solver.clone();
    solver.two_stage = cfg.solver.two_stage
        && (cell.regularization.uses_mp() || cell.regularization.uses_imu());
    let report = problem.solve(&solver);
    let (report, termination) = match report {
        Ok(r) => {
            let label = format!("{:?}", r.termination);
            (Some(r), label)
        }
        Err(e) => (None, format!("{e}")),
    };
    let bundle = match &report {
        Some(_) => rmse(&truth, &problem.trajectory, cfg.grid.rmse_grid_hz)?,
        None => RmseBundle {
            position: f64::NAN,
            rotation: f64::NAN,
            velocity: f64::NAN,
            twist: f64::NAN,
            samples: 0,
        },
    };
    let query_rate = if cfg.grid.query_hz > 0.0 && report.is_some() {
        query_throughput(&problem.trajectory, cfg.grid.query_hz, sim_cfg.duration)?
    } else {
        0.0
    };
    let default_report = SolveReport {
        iterations: 0,
        initial_cost: f64::NAN,
        final_cost: f64::NAN,
        cost_history: Vec::new(),
        residual_jacobian_seconds: 0.0,
        linear_solve_seconds: 0.0,
        total_seconds: 0.0,
        termination: Termination::LambdaLimit,
    };
    let r = report.unwrap_or(default_report);
    Ok(MetricsRow {
        cell: *cell,
        trial: Some(trial),
        seed: sim_cfg.seed,
        position_rmse: bundle.position,
        rotation_rmse: bundle.rotation,
        velocity_rmse: bundle.velocity,
        twist_rmse: bundle.twist,
        solve_seconds: r.total_seconds,
        residual_jacobian_seconds: r.residual_jacobian_seconds,
        linear_solve_seconds: r.linear_solve_seconds,
        iterations: r.iterations,
        param_floats: problem.trajectory.param_float_count(),
        query_rate,
        termination,
    })
}

fn median_row(cell: &Cell, rows: &[MetricsRow]) -> MetricsRow {
    let take = |f: &dyn Fn(&MetricsRow) -> f64| {
        median(&rows.iter().map(|r| f(r)).collect::<Vec<_>>())
    };
    MetricsRow {
        cell: *cell,
        trial: None,
        seed: rows.first().map(|r| r.seed).unwrap_or(0),
        position_rmse: take(&|r| r.position_rmse),
        rotation_rmse: take(&|r| r.rotation_rmse),
        velocity_rmse: take(&|r| r.velocity_rmse),
        twist_rmse: take(&|r| r.twist_rmse),
        solve_seconds: take(&|r| r.solve_seconds),
        residual_jacobian_seconds: take(&|r| r.residual_jacobian_seconds),
        linear_solve_seconds: take(&|r| r.linear_solve_seconds),
        iterations: rows.iter().map(|r| r.iterations).sum::<usize>() / rows.len().max(1),
        param_floats: rows.first().map(|r| r.param_floats).unwrap_or(0),
        query_rate: take(&|r| r.query_rate),
        termination: "median".into(),
    }
}

/// Runs every cell and trial; trials run in parallel when allowed by the
/// output config, and results merge deterministically by (cell, trial).
pub fn run_grid(cfg: &BenchConfig) -> Result<Vec<MetricsRow>> {
    let cells = cells_of(&cfg.grid);
    let jobs = if cfg.output.timing_serial {
        1
    } else {
        cfg.output.jobs.max(1)
    };
    let mut rows = Vec::new();
    for cell in &cells {
        let trial_rows: Vec<Result<MetricsRow>> = if jobs > 1 {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(jobs)
                .build()
                .map_err(|e| Error::InvalidArgument {
                    detail: format!("thread pool: {e}"),
                })?;
            pool.install(|| {
                (0..cfg.grid.trials)
                    .into_par_iter()
                    .map(|t| run_trial(cfg, cell, t))
                    .collect()
            })
        } else {
            (0..cfg.grid.trials).map(|t| run_trial(cfg, cell, t)).collect()
        };
        let mut ok_rows = Vec::new();
        for r in trial_rows {
            match r {
                Ok(row) => {
                    ok_rows.push(row.clone());
                    rows.push(row);
                }
                Err(e) => {
                    log::warn!("trial failed in cell {}: {e}", cell.label());
                    rows.push(MetricsRow {
                        cell: *cell,
                        trial: Some(usize::MAX),
                        seed: 0,
                        position_rmse: f64::NAN,
                        rotation_rmse: f64::NAN,
                        velocity_rmse: f64::NAN,
                        twist_rmse: f64::NAN,
                        solve_seconds: 0.0,
                        residual_jacobian_seconds: 0.0,
                        linear_solve_seconds: 0.0,
                        iterations: 0,
                        param_floats: 0,
                        query_rate: 0.0,
                        termination: format!("{e}"),
                    });
                }
            }
        }
        rows.push(median_row(cell, &ok_rows));
    }
    Ok(rows)
}

/// Writes rows as CSV with a full header.
pub fn write_csv(path: &Path, rows: &[MetricsRow]) -> std::io::Result<()> {
    let mut s = String::from(MetricsRow::csv_header());
    s.push('\n');
    for r in rows {
        s.push_str(&r.to_csv());
        s.push('\n');
    }
    std::fs::File::create(path)?.write_all(s.as_bytes())
}

/// Writes the per-cell median rows as a markdown table.
pub fn write_summary(path: &Path, rows: &[MetricsRow]) -> std::io::Result<()> {
    let mut s = String::from(
        "| cell | position RMSE | rotation RMSE | velocity RMSE | twist RMSE | solve s | iters |\n\
         |---|---|---|---|---|---|---|\n",
    );
    for r in rows.iter().filter(|r| r.trial.is_none()) {
        s.push_str(&format!(
            "| {} | {:.6} | {:.6} | {:.6} | {:.6} | {:.4} | {} |\n",
            r.cell.label(),
            r.position_rmse,
            r.rotation_rmse,
            r.velocity_rmse,
            r.twist_rmse,
            r.solve_seconds,
            r.iterations,
        ));
    }
    std::fs::File::create(path)?.write_all(s.as_bytes())
}
