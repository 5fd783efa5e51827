//! Post-solve trajectory query throughput: how fast each representation
//! serves full kinematic states over a 1 kHz grid.
//!
//!     cargo run --release --example query_throughput

use ctraj::bench::{assemble_problem, query_throughput, Cell, Regularization, Representation};
use ctraj::estimator::SolverConfig;
use ctraj::sim::{simulate, Scenario, SimConfig};

fn main() {
    let mut cfg = SimConfig::default_for(Scenario::Se3Sinusoid);
    cfg.duration = 10.0;
    let (_, meas) = simulate(&cfg).unwrap();
    let solver = SolverConfig {
        two_stage: true,
        ..SolverConfig::default()
    };
    for (label, cell) in [
        ("gp-se3", Cell {
            representation: Representation::GpSe3,
            order: 0,
            knot_period: 0.0,
            gp_stride: 1,
            regularization: Regularization::Imu,
            mp_period_factor: 3.0,
        }),
        ("spline-se3 k=4", Cell {
            representation: Representation::SplineSe3,
            order: 4,
            knot_period: 0.1,
            gp_stride: 0,
            regularization: Regularization::Imu,
            mp_period_factor: 3.0,
        }),
        ("spline-se3 k=6", Cell {
            representation: Representation::SplineSe3,
            order: 6,
            knot_period: 0.1,
            gp_stride: 0,
            regularization: Regularization::Imu,
            mp_period_factor: 3.0,
        }),
    ] {
        let mut problem = assemble_problem(&cfg, &meas, &cell).unwrap();
        problem.solve(&solver).unwrap();
        let rate = query_throughput(&problem.trajectory, 1000.0, cfg.duration).unwrap();
        println!("{label:<15}: {rate:>10.0} state queries/s");
    }
}
