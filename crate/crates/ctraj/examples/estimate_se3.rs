//! Camera + IMU sensor fusion on SE(3): simulate the circular sinusoid,
//! then estimate it with a GP and a cubic spline under each regularization,
//! reporting pose errors and solver timing.
//!
//!     cargo run --release --example estimate_se3

use ctraj::bench::{run_trial, BenchConfig, Cell, Regularization, Representation};
use ctraj::sim::{Scenario, SimConfig};

fn main() {
    let mut cfg = BenchConfig::default();
    cfg.scenario = SimConfig::default_for(Scenario::Se3Sinusoid);
    cfg.solver.two_stage = true;
    cfg.grid.query_hz = 1000.0;

    println!("representation   | reg    | pos RMSE | rot RMSE | iters | solve s | queries/s");
    for representation in [Representation::GpSe3, Representation::SplineSe3] {
        for reg in [
            Regularization::None,
            Regularization::Mp,
            Regularization::Imu,
            Regularization::MpImu,
        ] {
            let cell = Cell {
                representation,
                order: 4,
                knot_period: 0.1,
                gp_stride: 1,
                regularization: reg,
                mp_period_factor: 3.0,
            };
            let row = run_trial(&cfg, &cell, 0).unwrap();
            println!(
                "{:<16} | {:<6} | {:>8.5} | {:>8.5} | {:>5} | {:>7.3} | {:>9.0}",
                representation.label(),
                reg.label(),
                row.position_rmse,
                row.rotation_rmse,
                row.iterations,
                row.solve_seconds,
                row.query_rate
            );
        }
    }
}
