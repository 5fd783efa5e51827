//! Ground-truth trajectory and sensor simulators.
//!
//! Four scenarios: a planar WNOJ random trajectory with position
//! measurements, a planar circular sinusoid, an SE(3) WNOJ random trajectory,
//! and an SE(3) circular sinusoid with the camera aimed at the origin. IMU
//! and fiducial-pose measurement synthesis is shared by the SE(3) scenarios.
//!
//! All randomness flows through counter-based generator streams derived from
//! the master seed, one stream per sensor, so outputs are reproducible
//! independent of evaluation order. A sensor sigma of exactly zero disables
//! its noise and records a unit nominal covariance instead (weights must
//! stay positive definite).


use std::io::Write;
use std::path::Path;

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::manifold::{Group, KinematicState, ManifoldElement, TangentVector};
use crate::manifold::so3::skew;
use crate::motion::{process_covariance_unchecked, transition_matrix, ModelOrder, ProcessNoise};

/// Which ground-truth trajectory to generate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Scenario {
    LinearWnoj,
    LinearSinusoid,
    Se3Wnoj,
    Se3Sinusoid,
}

impl Scenario {
    pub fn group(&self) -> Group {
        match self {
            Scenario::LinearWnoj | Scenario::LinearSinusoid => Group::Euclidean(2),
            _ => Group::Se3,
        }
    }

    pub fn is_linear(&self) -> bool {
        matches!(self, Scenario::LinearWnoj | Scenario::LinearSinusoid)
    }
}

/// Sensor and integration rates, in Hz.
#[derive(Clone, Debug, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct Rates {
    pub truth_hz: f64,
    pub position_hz: f64,
    pub imu_hz: f64,
    pub camera_hz: f64,
}

impl Default for Rates {
    fn default() -> Self {
        Rates {
            truth_hz: 1000.0,
            position_hz: 100.0,
            imu_hz: 100.0,
            camera_hz: 10.0,
        }
    }
}

/// Noise parameters; sigmas are standard deviations, `q_diag` is the
/// process-noise power-spectral-density diagonal.
#[derive(Clone, Debug, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct NoiseConfig {
    pub q_diag: Vec<f64>,
    pub position_sigma: f64,
    pub sigma_g: f64,
    pub sigma_a: f64,
    pub sigma_bg: f64,
    pub sigma_ba: f64,
    /// Constant fiducial pose covariance scale (used outside FOV mode).
    pub sigma_c: f64,
    /// Pixel projection sigma for the propagated covariance (FOV mode).
    pub sigma_p: f64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        NoiseConfig {
            q_diag: vec![1.0, 0.01],
            position_sigma: 0.01,
            sigma_g: 0.005,
            sigma_a: 0.005,
            sigma_bg: 0.005,
            sigma_ba: 0.005,
            sigma_c: 0.05,
            sigma_p: 0.5,
        }
    }
}

/// Serializable rigid transform: rotation vector plus translation column.
#[derive(Clone, Debug, Default, serde::Serialize, serde::Deserialize)]
pub struct PoseSpec {
    pub rotvec: [f64; 3],
    pub translation: [f64; 3],
}

impl PoseSpec {
    pub fn to_se3(&self) -> ManifoldElement {
        let rot = crate::manifold::so3::exp(&Vector3::from_column_slice(&self.rotvec));
        ManifoldElement::se3_from_parts(&rot, &Vector3::from_column_slice(&self.translation))
    }
}

/// Pinhole camera intrinsics and mounting.
#[derive(Clone, Debug, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct CameraConfig {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub tag_side: f64,
    pub cam_from_body: PoseSpec,
}

impl Default for CameraConfig {
    fn default() -> Self {
        CameraConfig {
            fx: 620.0,
            fy: 620.0,
            cx: 320.0,
            cy: 240.0,
            tag_side: 0.4,
            cam_from_body: PoseSpec {
                rotvec: [0.0; 3],
                translation: [0.0, 0.0, 0.1],
            },
        }
    }
}

/// Full simulation configuration; the seed determines every output.
#[derive(Clone, Debug, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct SimConfig {
    pub scenario: Scenario,
    pub duration: f64,
    pub rates: Rates,
    pub noise: NoiseConfig,
    pub camera: CameraConfig,
    pub tags: Vec<PoseSpec>,
    /// Keep the fiducial in view and propagate the pixel covariance through
    /// the projection model; otherwise measure regardless with a constant
    /// covariance.
    pub fov_constrained: bool,
    pub seed: u64,
    /// Circle radius of the sinusoid scenarios, m.
    pub circle_radius: f64,
    /// Circle angular rate, rad/s.
    pub circle_rate: f64,
    /// Vertical oscillation amplitude, m (SE(3) sinusoid only).
    pub vertical_amplitude: f64,
    /// Vertical oscillation rate, rad/s.
    pub vertical_rate: f64,
    /// Linear scenarios: initial velocity.
    pub initial_velocity: [f64; 2],
    /// SE(3) WNOJ: initial twist and twist rate (left-tangent convention).
    pub initial_twist: [f64; 6],
    pub initial_twist_rate: [f64; 6],
    /// SE(3) WNOJ: initial body position in the inertial frame.
    pub initial_position: [f64; 3],
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            scenario: Scenario::LinearWnoj,
            duration: 20.0,
            rates: Rates::default(),
            noise: NoiseConfig::default(),
            camera: CameraConfig::default(),
            tags: vec![PoseSpec::default()],
            fov_constrained: false,
            seed: 1234,
            circle_radius: 2.0,
            circle_rate: 0.5,
            vertical_amplitude: 0.3,
            vertical_rate: 2.0,
            initial_velocity: [1.0, 0.0],
            initial_twist: [0.0; 6],
            initial_twist_rate: [0.0; 6],
            initial_position: [0.0, 0.0, 1.0],
        }
    }
}

impl SimConfig {
    /// Paper-style defaults for each scenario.
    pub fn default_for(scenario: Scenario) -> Self {
        let mut cfg = SimConfig {
            scenario,
            ..SimConfig::default()
        };
        match scenario {
            Scenario::LinearWnoj => {}
            Scenario::LinearSinusoid => {
                cfg.noise.q_diag = vec![1.0, 1.0];
            }
            Scenario::Se3Wnoj => {
                cfg.duration = 10.0;
                cfg.noise.q_diag = vec![5.0, 5.0, 5.0, 1.5, 1.5, 1.5];
                cfg.fov_constrained = false;
            }
            Scenario::Se3Sinusoid => {
                cfg.duration = 10.0;
                cfg.noise.q_diag = vec![5.0, 5.0, 5.0, 1.5, 1.5, 1.5];
                cfg.fov_constrained = true;
            }
        }
        cfg
    }

    fn stream(&self, id: u64) -> ChaCha12Rng {
        let mut rng = ChaCha12Rng::seed_from_u64(self.seed);
        rng.set_stream(id);
        rng
    }
}

const STREAM_PROCESS: u64 = 0;
const STREAM_POSITION: u64 = 1;
const STREAM_GYRO: u64 = 2;
const STREAM_ACCEL: u64 = 3;
const STREAM_GYRO_BIAS: u64 = 4;
const STREAM_ACCEL_BIAS: u64 = 5;
const STREAM_FIDUCIAL: u64 = 6;

/// Densely sampled true trajectory plus true bias walks.
#[derive(Clone, Debug)]
pub struct GroundTruth {
    pub group: Group,
    pub times: Vec<f64>,
    pub states: Vec<KinematicState>,
    /// IMU bias truth, sampled at the IMU stamps (empty for linear runs).
    pub bias_stamps: Vec<f64>,
    pub gyro_bias: Vec<Vector3<f64>>,
    pub accel_bias: Vec<Vector3<f64>>,
}

impl GroundTruth {
    pub fn span(&self) -> (f64, f64) {
        (self.times[0], *self.times.last().unwrap())
    }

    /// State at a time on the dense grid.
    pub fn state_at(&self, t: f64) -> Result<&KinematicState> {
        let dt = self.times[1] - self.times[0];
        let idx = ((t - self.times[0]) / dt).round() as isize;
        if idx < 0 || idx as usize >= self.times.len() {
            let (start, end) = self.span();
            return Err(Error::OutOfRange { tau: t, start, end });
        }
        let idx = idx as usize;
        if (self.times[idx] - t).abs() > 1e-9 {
            return Err(Error::InvalidArgument {
                detail: format!("time {t} is off the truth grid"),
            });
        }
        Ok(&self.states[idx])
    }
}

/// One vector-valued measurement with its covariance.
#[derive(Clone, Debug)]
pub struct Measurement {
    pub stamp: f64,
    pub value: DVector<f64>,
    pub covariance: DMatrix<f64>,
}

/// One fiducial pose measurement.
#[derive(Clone, Debug)]
pub struct PoseMeasurement {
    pub stamp: f64,
    pub tag: usize,
    pub value: ManifoldElement,
    pub covariance: DMatrix<f64>,
}

/// Everything the sensors produced over one run.
#[derive(Clone, Debug, Default)]
pub struct MeasurementSet {
    pub position: Vec<Measurement>,
    pub gyro: Vec<Measurement>,
    pub accel: Vec<Measurement>,
    pub fiducial: Vec<PoseMeasurement>,
}

fn normal_vec(rng: &mut ChaCha12Rng, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.sample(StandardNormal))
}

/// Lower Cholesky factor of a PSD matrix, or `None` when it is zero.
fn noise_factor(cov: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    if cov.amax() == 0.0 {
        return None;
    }
    Some(
        cov.clone()
            .cholesky()
            .expect("noise covariance must be positive semidefinite")
            .l(),
    )
}

fn nominal_or(cov: DMatrix<f64>) -> DMatrix<f64> {
    if cov.amax() == 0.0 {
        DMatrix::identity(cov.nrows(), cov.ncols())
    } else {
        cov
    }
}

fn grid(duration: f64, hz: f64) -> Vec<f64> {
    let count = (duration * hz).round() as usize;
    (0..=count).map(|i| i as f64 / hz).collect()
}

/// Dispatches to the configured scenario.
pub fn simulate(cfg: &SimConfig) -> Result<(GroundTruth, MeasurementSet)> {
    match cfg.scenario {
        Scenario::LinearWnoj => sim_linear_wnoj(cfg),
        Scenario::LinearSinusoid => sim_linear_sinusoid(cfg),
        Scenario::Se3Wnoj => {
            let truth = sim_se3_wnoj(cfg)?;
            let meas = sim_se3_sensors(cfg, &truth)?;
            Ok((truth, meas))
        }
        Scenario::Se3Sinusoid => {
            let truth = sim_se3_sinusoid(cfg)?;
            let meas = sim_se3_sensors(cfg, &truth)?;
            Ok((truth, meas))
        }
    }
}

fn sim_se3_sensors(cfg: &SimConfig, truth: &GroundTruth) -> Result<MeasurementSet> {
    let mut meas = MeasurementSet::default();
    let (gyro, accel, bias) = sim_imu(truth, cfg)?;
    meas.gyro = gyro;
    meas.accel = accel;
    meas.fiducial = sim_fiducial(truth, cfg)?;
    let _ = bias; // bias truth is already folded into `truth` by sim_imu
    Ok(meas)
}

/// Exact discrete WNOJ propagation with position measurements.
pub fn sim_linear_wnoj(cfg: &SimConfig) -> Result<(GroundTruth, MeasurementSet)> {
    let d = 2;
    let q = DMatrix::from_diagonal(&DVector::from_column_slice(&cfg.noise.q_diag));
    if q.nrows() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            actual: q.nrows(),
        });
    }
    let times = grid(cfg.duration, cfg.rates.truth_hz);
    let h = 1.0 / cfg.rates.truth_hz;
    let phi = transition_matrix(h, ModelOrder::Wnoj, d);
    let q_h = if q.amax() > 0.0 {
        process_covariance_unchecked(h, ModelOrder::Wnoj, &ProcessNoise::new(q.clone())?)
    } else {
        DMatrix::zeros(3 * d, 3 * d)
    };
    let noise_l = noise_factor(&q_h);
    let mut rng = cfg.stream(STREAM_PROCESS);

    let mut x = DVector::zeros(3 * d);
    x[2] = cfg.initial_velocity[0];
    x[3] = cfg.initial_velocity[1];
    let mut states = Vec::with_capacity(times.len());
    states.push(KinematicState::from_stacked(d, &x)?);
    for _ in 1..times.len() {
        x = &phi * &x;
        if let Some(l) = &noise_l {
            x += l * normal_vec(&mut rng, 3 * d);
        }
        states.push(KinematicState::from_stacked(d, &x)?);
    }
    let truth = GroundTruth {
        group: Group::Euclidean(d),
        times,
        states,
        bias_stamps: Vec::new(),
        gyro_bias: Vec::new(),
        accel_bias: Vec::new(),
    };
    let meas = position_measurements(cfg, &truth)?;
    Ok((truth, meas))
}

/// Planar circular trajectory with position measurements.
pub fn sim_linear_sinusoid(cfg: &SimConfig) -> Result<(GroundTruth, MeasurementSet)> {
    let d = 2;
    let times = grid(cfg.duration, cfg.rates.truth_hz);
    let (r, w) = (cfg.circle_radius, cfg.circle_rate);
    let states = times
        .iter()
        .map(|&t| {
            let (s, c) = (w * t).sin_cos();
            let x = DVector::from_column_slice(&[
                r * c,
                r * s,
                -r * w * s,
                r * w * c,
                -r * w * w * c,
                -r * w * w * s,
            ]);
            KinematicState::from_stacked(d, &x)
        })
        .collect::<Result<Vec<_>>>()?;
    let truth = GroundTruth {
        group: Group::Euclidean(d),
        times,
        states,
        bias_stamps: Vec::new(),
        gyro_bias: Vec::new(),
        accel_bias: Vec::new(),
    };
    let meas = position_measurements(cfg, &truth)?;
    Ok((truth, meas))
}

fn position_measurements(cfg: &SimConfig, truth: &GroundTruth) -> Result<MeasurementSet> {
    let sigma = cfg.noise.position_sigma;
    let cov = DMatrix::identity(2, 2) * sigma * sigma;
    let recorded = nominal_or(cov.clone());
    let noise_l = noise_factor(&cov);
    let mut rng = cfg.stream(STREAM_POSITION);
    let mut meas = MeasurementSet::default();
    for &t in &grid(cfg.duration, cfg.rates.position_hz) {
        let state = truth.state_at(t)?;
        let mut z = state.value.body_position();
        if let Some(l) = &noise_l {
            z += l * normal_vec(&mut rng, 2);
        }
        meas.position.push(Measurement {
            stamp: t,
            value: z,
            covariance: recorded.clone(),
        });
    }
    Ok(meas)
}

/// SE(3) WNOJ trajectory integrated on the group at the truth rate.
///
/// White jerk drives the twist rate; the pose advances by the exponential of
/// the midpoint twist, and twist and twist rate use trapezoidal updates.
pub fn sim_se3_wnoj(cfg: &SimConfig) -> Result<GroundTruth> {
    let group = Group::Se3;
    let d = 6;
    let q = DMatrix::from_diagonal(&DVector::from_column_slice(&cfg.noise.q_diag));
    if q.nrows() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            actual: q.nrows(),
        });
    }
    let times = grid(cfg.duration, cfg.rates.truth_hz);
    let h = 1.0 / cfg.rates.truth_hz;
    // White jerk over one step: N(0, Q / h).
    let jerk_l = noise_factor(&(&q / h));
    let mut rng = cfg.stream(STREAM_PROCESS);

    let r0 = Vector3::from_column_slice(&cfg.initial_position);
    let mut value = ManifoldElement::se3_from_parts(&Matrix3::identity(), &(-r0));
    let mut vel = DVector::from_column_slice(&cfg.initial_twist);
    let mut acc = DVector::from_column_slice(&cfg.initial_twist_rate);

    let mut states = Vec::with_capacity(times.len());
    let make = |value: &ManifoldElement, vel: &DVector<f64>, acc: &DVector<f64>| {
        KinematicState::new(
            value.clone(),
            TangentVector::new(group, vel.clone()).unwrap(),
            TangentVector::new(group, acc.clone()).unwrap(),
        )
        .unwrap()
    };
    states.push(make(&value, &vel, &acc));
    for _ in 1..times.len() {
        let jerk = match &jerk_l {
            Some(l) => l * normal_vec(&mut rng, d),
            None => DVector::zeros(d),
        };
        let acc_new = &acc + &jerk * h;
        let vel_new = &vel + (&acc + &acc_new) * (0.5 * h);
        let vel_mid = (&vel + &vel_new) * 0.5;
        let step = TangentVector::new(group, vel_mid * h)?;
        value = ManifoldElement::exp(&step).compose(&value);
        vel = vel_new;
        acc = acc_new;
        states.push(make(&value, &vel, &acc));
    }
    Ok(GroundTruth {
        group,
        times,
        states,
        bias_stamps: Vec::new(),
        gyro_bias: Vec::new(),
        accel_bias: Vec::new(),
    })
}

/// SE(3) circular sinusoid: the body rides a circle with a vertical bob and
/// keeps its camera axis on the origin. Velocities and accelerations come
/// from analytic differentiation of the construction.
pub fn sim_se3_sinusoid(cfg: &SimConfig) -> Result<GroundTruth> {
    let group = Group::Se3;
    let times = grid(cfg.duration, cfg.rates.truth_hz);
    let (radius, w) = (cfg.circle_radius, cfg.circle_rate);
    let (amp, wv) = (cfg.vertical_amplitude, cfg.vertical_rate);
    // Constant attitude factor: R_body_to_inertial(t) = Rz(w t) * A, columns
    // x_b = [0,1,0], y_b = [0,0,-1], z_b = [-1,0,0] at t = 0 so the camera
    // z-axis faces the origin from the circle.
    let a_const = Matrix3::from_columns(&[
        Vector3::new(0.0, 1.0, 0.0),
        Vector3::new(0.0, 0.0, -1.0),
        Vector3::new(-1.0, 0.0, 0.0),
    ]);
    // Left-tangent angular velocity of R_I^B is constant.
    let omega_left = -(a_const.transpose() * Vector3::z()) * w;
    let states = times
        .iter()
        .map(|&t| {
            let (s, c) = (w * t).sin_cos();
            let r = Vector3::new(radius * c, radius * s, amp * (wv * t).sin());
            let rdot = Vector3::new(-radius * w * s, radius * w * c, amp * wv * (wv * t).cos());
            let rddot = Vector3::new(
                -radius * w * w * c,
                -radius * w * w * s,
                -amp * wv * wv * (wv * t).sin(),
            );
            let rot_bi = rot_z(w * t) * a_const;
            let r_ib = rot_bi.transpose();
            let value = ManifoldElement::se3_from_parts(&r_ib, &(-(r_ib * r)));
            let mut vel = DVector::zeros(6);
            vel.rows_mut(0, 3).copy_from(&(-(r_ib * rdot)));
            vel.rows_mut(3, 3).copy_from(&omega_left);
            let mut acc = DVector::zeros(6);
            acc.rows_mut(0, 3)
                .copy_from(&(-(skew(&omega_left) * (r_ib * rdot)) - r_ib * rddot));
            KinematicState::new(
                value,
                TangentVector::new(group, vel)?,
                TangentVector::new(group, acc)?,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GroundTruth {
        group,
        times,
        states,
        bias_stamps: Vec::new(),
        gyro_bias: Vec::new(),
        accel_bias: Vec::new(),
    })
}

fn rot_z(angle: f64) -> Matrix3<f64> {
    let (s, c) = angle.sin_cos();
    Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

/// Gyro and accelerometer synthesis with random-walk biases.
///
/// Returns the two measurement lists and writes the bias truth into copies
/// of the stamps; callers fold them into the ground truth via the returned
/// triple.
#[allow(clippy::type_complexity)]
pub fn sim_imu(
    truth: &GroundTruth,
    cfg: &SimConfig,
) -> Result<(Vec<Measurement>, Vec<Measurement>, Vec<f64>)> {
    let stamps = grid(cfg.duration, cfg.rates.imu_hz);
    let dt = 1.0 / cfg.rates.imu_hz;
    let n = &cfg.noise;
    let gyro_cov = DMatrix::identity(3, 3) * n.sigma_g * n.sigma_g;
    let accel_cov = DMatrix::identity(3, 3) * n.sigma_a * n.sigma_a;
    let gyro_rec = nominal_or(gyro_cov.clone());
    let accel_rec = nominal_or(accel_cov.clone());
    let mut rng_g = cfg.stream(STREAM_GYRO);
    let mut rng_a = cfg.stream(STREAM_ACCEL);
    let mut rng_bg = cfg.stream(STREAM_GYRO_BIAS);
    let mut rng_ba = cfg.stream(STREAM_ACCEL_BIAS);

    let mut b_g = Vector3::zeros();
    let mut b_a = Vector3::zeros();
    // The bias driver is the sampled derivative (units rad/s^2, m/s^3), so
    // one Euler step advances the bias by h * eta.
    let walk_g = n.sigma_bg * dt;
    let walk_a = n.sigma_ba * dt;

    let mut gyro = Vec::with_capacity(stamps.len());
    let mut accel = Vec::with_capacity(stamps.len());
    let mut bias_g = Vec::with_capacity(stamps.len());
    let mut bias_a = Vec::with_capacity(stamps.len());
    for &t in &stamps {
        let state = truth.state_at(t)?;
        let omega = crate::estimator::factors::body_angular_rate(state);
        let a_body = crate::estimator::factors::body_acceleration(state)?;
        let gravity = 9.81 * state.value.rotation() * Vector3::z();

        let mut z_g = omega + b_g;
        if n.sigma_g > 0.0 {
            let eta: DVector<f64> = normal_vec(&mut rng_g, 3) * n.sigma_g;
            z_g += Vector3::from_column_slice(eta.as_slice());
        }
        gyro.push(Measurement {
            stamp: t,
            value: DVector::from_column_slice(z_g.as_slice()),
            covariance: gyro_rec.clone(),
        });

        let mut z_a = a_body - gravity + b_a;
        if n.sigma_a > 0.0 {
            let eta: DVector<f64> = normal_vec(&mut rng_a, 3) * n.sigma_a;
            z_a += Vector3::from_column_slice(eta.as_slice());
        }
        accel.push(Measurement {
            stamp: t,
            value: DVector::from_column_slice(z_a.as_slice()),
            covariance: accel_rec.clone(),
        });

        bias_g.push(b_g);
        bias_a.push(b_a);
        if walk_g > 0.0 {
            let step: DVector<f64> = normal_vec(&mut rng_bg, 3) * walk_g;
            b_g += Vector3::from_column_slice(step.as_slice());
        }
        if walk_a > 0.0 {
            let step: DVector<f64> = normal_vec(&mut rng_ba, 3) * walk_a;
            b_a += Vector3::from_column_slice(step.as_slice());
        }
    }
    Ok((gyro, accel, stamps))
}

/// Corner-projection Jacobian stack used to propagate pixel noise through
/// the pose-from-tag model.
fn projection_information(
    pred: &ManifoldElement,
    cam: &CameraConfig,
) -> Result<DMatrix<f64>> {
    let half = cam.tag_side * 0.5;
    let corners = [
        Vector3::new(-half, -half, 0.0),
        Vector3::new(half, -half, 0.0),
        Vector3::new(half, half, 0.0),
        Vector3::new(-half, half, 0.0),
    ];
    let rot = pred.rotation();
    let trans = pred.translation();
    let mut j = DMatrix::zeros(8, 6);
    for (i, corner) in corners.iter().enumerate() {
        let p = rot * corner + trans;
        if p.z <= 1e-3 {
            return Err(Error::TagBehindCamera { tag: 0, stamp: 0.0 });
        }
        let u = cam.fx * p.x / p.z + cam.cx;
        let v = cam.fy * p.y / p.z + cam.cy;
        if u < 0.0 || u > 2.0 * cam.cx || v < 0.0 || v > 2.0 * cam.cy {
            return Err(Error::TagBehindCamera { tag: 0, stamp: 0.0 });
        }
        // d(uv)/d(point) * d(point)/d(left perturbation [rho; phi]).
        let z_inv = 1.0 / p.z;
        let duv_dp = DMatrix::from_row_slice(
            2,
            3,
            &[
                cam.fx * z_inv,
                0.0,
                -cam.fx * p.x * z_inv * z_inv,
                0.0,
                cam.fy * z_inv,
                -cam.fy * p.y * z_inv * z_inv,
            ],
        );
        let mut dp_dxi = DMatrix::zeros(3, 6);
        dp_dxi
            .view_mut((0, 0), (3, 3))
            .copy_from(&Matrix3::identity());
        dp_dxi.view_mut((0, 3), (3, 3)).copy_from(&(-skew(&p)));
        j.view_mut((2 * i, 0), (2, 6)).copy_from(&(duv_dp * dp_dxi));
    }
    Ok(j)
}

/// Fiducial pose covariance implied by pixel noise at a relative pose.
pub fn pnp_covariance(
    pred: &ManifoldElement,
    cam: &CameraConfig,
    sigma_p: f64,
) -> Result<DMatrix<f64>> {
    let j = projection_information(pred, cam)?;
    let info = j.transpose() * &j / (sigma_p * sigma_p);
    info.try_inverse().ok_or_else(|| Error::InvalidArgument {
        detail: "projection information is singular".into(),
    })
}

/// Fiducial pose measurements for all configured tags.
pub fn sim_fiducial(truth: &GroundTruth, cfg: &SimConfig) -> Result<Vec<PoseMeasurement>> {
    let cam_from_body = cfg.camera.cam_from_body.to_se3();
    let tags: Vec<ManifoldElement> = cfg.tags.iter().map(|p| p.to_se3()).collect();
    let mut rng = cfg.stream(STREAM_FIDUCIAL);
    let mut out = Vec::new();
    for &t in &grid(cfg.duration, cfg.rates.camera_hz) {
        let state = truth.state_at(t)?;
        let pose = state.value.as_pose()?;
        for (tag_idx, tag) in tags.iter().enumerate() {
            let pred = cam_from_body.compose(&pose).compose(&tag.inverse());
            let cov = if cfg.fov_constrained {
                match pnp_covariance(&pred, &cfg.camera, cfg.noise.sigma_p.max(1e-12)) {
                    Ok(cov) => {
                        if cfg.noise.sigma_p == 0.0 {
                            DMatrix::zeros(6, 6)
                        } else {
                            cov
                        }
                    }
                    Err(Error::TagBehindCamera { .. }) => continue,
                    Err(e) => return Err(e),
                }
            } else {
                DMatrix::identity(6, 6) * cfg.noise.sigma_c
            };
            let recorded = nominal_or(cov.clone());
            let mut value = pred;
            if let Some(l) = noise_factor(&cov) {
                let eta = l * normal_vec(&mut rng, 6);
                value = ManifoldElement::exp(&TangentVector::new(Group::Se3, eta)?)
                    .compose(&value);
            }
            out.push(PoseMeasurement {
                stamp: t,
                tag: tag_idx,
                value,
                covariance: recorded,
            });
        }
    }
    Ok(out)
}

fn write_cov_header(out: &mut String, dim: usize) {
    for i in 0..dim {
        for j in i..dim {
            out.push_str(&format!(",cov_{i}{j}"));
        }
    }
}

fn write_cov_row(out: &mut String, cov: &DMatrix<f64>) {
    for i in 0..cov.nrows() {
        for j in i..cov.ncols() {
            out.push_str(&format!(",{}", cov[(i, j)]));
        }
    }
}

/// Writes the ground truth and each sensor's measurements as CSV, one file
/// per sensor, covariance stored as its upper triangle.
pub fn export_csv(dir: &Path, truth: &GroundTruth, meas: &MeasurementSet) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    let d = truth.group.dim();

    let mut s = String::from("stamp");
    for i in 0..d {
        s.push_str(&format!(",pose_{i}"));
    }
    for i in 0..d {
        s.push_str(&format!(",vel_{i}"));
    }
    for i in 0..d {
        s.push_str(&format!(",acc_{i}"));
    }
    s.push('\n');
    for (t, state) in truth.times.iter().zip(&truth.states) {
        s.push_str(&format!("{t}"));
        let pose: Vec<f64> = match truth.group {
            Group::Euclidean(_) => state.value.euclidean_coords().iter().cloned().collect(),
            _ => {
                let mut v: Vec<f64> = state
                    .value
                    .body_position()
                    .iter()
                    .cloned()
                    .collect();
                let r = crate::manifold::so3::log(&state.value.rotation())
                    .unwrap_or_else(|_| Vector3::zeros());
                v.extend(r.iter());
                v
            }
        };
        for x in pose {
            s.push_str(&format!(",{x}"));
        }
        for x in state.velocity.coords.iter() {
            s.push_str(&format!(",{x}"));
        }
        for x in state.acceleration.coords.iter() {
            s.push_str(&format!(",{x}"));
        }
        s.push('\n');
    }
    std::fs::File::create(dir.join("truth.csv"))?.write_all(s.as_bytes())?;

    let vector_file = |name: &str, rows: &[Measurement], dim: usize| -> std::io::Result<()> {
        if rows.is_empty() {
            return Ok(());
        }
        let mut s = String::from("stamp");
        for i in 0..dim {
            s.push_str(&format!(",z_{i}"));
        }
        write_cov_header(&mut s, dim);
        s.push('\n');
        for m in rows {
            s.push_str(&format!("{}", m.stamp));
            for x in m.value.iter() {
                s.push_str(&format!(",{x}"));
            }
            write_cov_row(&mut s, &m.covariance);
            s.push('\n');
        }
        std::fs::File::create(dir.join(name))?.write_all(s.as_bytes())
    };
    vector_file("position.csv", &meas.position, 2)?;
    vector_file("gyro.csv", &meas.gyro, 3)?;
    vector_file("accel.csv", &meas.accel, 3)?;

    if !meas.fiducial.is_empty() {
        let mut s = String::from("stamp,tag,tx,ty,tz,rx,ry,rz");
        write_cov_header(&mut s, 6);
        s.push('\n');
        for m in &meas.fiducial {
            let t = m.value.translation();
            let r = crate::manifold::so3::log(&m.value.rotation())
                .unwrap_or_else(|_| Vector3::zeros());
            s.push_str(&format!(
                "{},{},{},{},{},{},{},{}",
                m.stamp, m.tag, t.x, t.y, t.z, r.x, r.y, r.z
            ));
            write_cov_row(&mut s, &m.covariance);
            s.push('\n');
        }
        std::fs::File::create(dir.join("fiducial.csv"))?.write_all(s.as_bytes())?;
    }
    Ok(())
}
