//! The planar WNOJ estimation problem end to end: simulate position
//! measurements, fit GP and spline trajectories with and without motion
//! priors, and compare their errors at matched parameter budgets.
//!
//!     cargo run --release --example estimate_linear

use ctraj::bench::{run_trial, BenchConfig, Cell, Regularization, Representation};
use ctraj::sim::{Scenario, SimConfig};

fn main() {
    let mut cfg = BenchConfig::default();
    cfg.scenario = SimConfig::default_for(Scenario::LinearWnoj);
    cfg.grid.query_hz = 0.0;

    // One state every 20th measurement vs. a spline with the same float
    // count (*3 control points per GP state for a WNOJ model).
    let gp = Cell {
        representation: Representation::GpEuclid,
        order: 0,
        knot_period: 0.0,
        gp_stride: 20,
        regularization: Regularization::Mp,
        mp_period_factor: 3.0,
    };
    let spline = Cell {
        representation: Representation::SplineEuclid,
        order: 4,
        knot_period: 20.0 / 300.0,
        gp_stride: 0,
        regularization: Regularization::Mp,
        mp_period_factor: 3.0,
    };
    println!("representation      | priors | floats | position RMSE | velocity RMSE | solve s");
    for cell in [gp, spline] {
        for reg in [Regularization::None, Regularization::Mp] {
            let mut c = cell;
            c.regularization = reg;
            let row = run_trial(&cfg, &c, 0).unwrap();
            println!(
                "{:<19} | {:<6} | {:>6} | {:>13.6} | {:>13.6} | {:.4}",
                c.representation.label(),
                reg.label(),
                row.param_floats,
                row.position_rmse,
                row.velocity_rmse,
                row.solve_seconds
            );
        }
    }
}
