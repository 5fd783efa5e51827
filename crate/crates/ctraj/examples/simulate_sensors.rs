//! Runs the SE(3) sinusoid simulator and exports ground truth plus sensor
//! streams (gyro, accelerometer, fiducial poses) as CSV.
//!
//!     cargo run --release --example simulate_sensors [out_dir]

use ctraj::sim::{export_csv, simulate, Scenario, SimConfig};

fn main() {
    let out = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "sim_out".to_string());
    let mut cfg = SimConfig::default_for(Scenario::Se3Sinusoid);
    cfg.duration = 5.0;
    cfg.seed = 42;
    let (truth, meas) = simulate(&cfg).unwrap();
    println!(
        "simulated {:.1} s: {} truth samples, {} gyro, {} accel, {} fiducial poses",
        cfg.duration,
        truth.times.len(),
        meas.gyro.len(),
        meas.accel.len(),
        meas.fiducial.len()
    );
    let first = &meas.fiducial[0];
    println!(
        "first fiducial pose at t = {} (tag {}): translation ({:+.3}, {:+.3}, {:+.3})",
        first.stamp,
        first.tag,
        first.value.translation()[0],
        first.value.translation()[1],
        first.value.translation()[2],
    );
    println!(
        "propagated pose covariance trace: {:.3e}",
        first.covariance.trace()
    );
    export_csv(std::path::Path::new(&out), &truth, &meas).unwrap();
    println!("wrote CSV files to {out}/");
}
