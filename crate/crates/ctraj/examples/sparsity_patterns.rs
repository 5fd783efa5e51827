//! Information-matrix block-sparsity patterns: GP problems stay
//! block-tridiagonal while spline problems widen with the order.
//!
//!     cargo run --release --example sparsity_patterns

use ctraj::bench::{assemble_problem, dump_sparsity, Cell, Regularization, Representation};
use ctraj::sim::{simulate, Scenario, SimConfig};

fn main() {
    let mut cfg = SimConfig::default_for(Scenario::Se3Wnoj);
    cfg.duration = 2.0;
    let (_, meas) = simulate(&cfg).unwrap();

    let cells = [
        ("GP, priors + interpolated fiducials", Cell {
            representation: Representation::GpSe3,
            order: 0,
            knot_period: 0.0,
            gp_stride: 2,
            regularization: Regularization::Mp,
            mp_period_factor: 3.0,
        }),
        ("spline k = 4, fiducials only", Cell {
            representation: Representation::SplineSe3,
            order: 4,
            knot_period: 0.1,
            gp_stride: 0,
            regularization: Regularization::None,
            mp_period_factor: 3.0,
        }),
        ("spline k = 6, fiducials only", Cell {
            representation: Representation::SplineSe3,
            order: 6,
            knot_period: 0.1,
            gp_stride: 0,
            regularization: Regularization::None,
            mp_period_factor: 3.0,
        }),
    ];
    for (label, cell) in cells {
        let problem = assemble_problem(&cfg, &meas, &cell).unwrap();
        let pattern = problem.info_pattern().unwrap();
        println!(
            "== {label}: {} blocks, semi-bandwidth {}",
            pattern.n,
            pattern.semi_bandwidth()
        );
        print!("{}", dump_sparsity(&problem).unwrap());
        println!();
    }
}
