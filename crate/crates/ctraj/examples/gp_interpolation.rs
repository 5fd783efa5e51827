//! Gaussian-process trajectory interpolation on a vector space and on SE(3),
//! cross-checked against the minimum-norm optimal-control oracle.
//!
//!     cargo run --release --example gp_interpolation

use ctraj::gp::{interp_between, min_norm_interp, GpTrajectory};
use ctraj::manifold::{Group, KinematicState, ManifoldElement, TangentVector};
use ctraj::motion::{LinearSystem, ModelOrder, ProcessNoise};
use nalgebra::DVector;

fn main() {
    // Planar WNOJ posterior-mean interpolation between two stacked states.
    let sys = LinearSystem::canonical(ModelOrder::Wnoj, 2);
    let q = ProcessNoise::isotropic(2, 1.0);
    let x0 = DVector::from_column_slice(&[0.0, 0.0, 1.0, 0.2, 0.0, 0.0]);
    let x1 = DVector::from_column_slice(&[1.1, 0.3, 0.9, 0.4, -0.2, 0.1]);
    println!("linear WNOJ segment, states at t = 0 and t = 1:");
    for i in 0..=4 {
        let tau = i as f64 * 0.25;
        let x = interp_between(tau, 0.0, 1.0, &x0, &x1, ModelOrder::Wnoj, &q, &sys).unwrap();
        let oracle = min_norm_interp(tau, 0.0, 1.0, &x0, &x1, &sys).unwrap();
        println!(
            "  tau = {tau:.2}: position ({:+.4}, {:+.4}), control-oracle gap {:.1e}",
            x[0],
            x[1],
            (&x - &oracle).norm()
        );
    }

    // SE(3) trajectory: two states one second apart, interpolated on the
    // group through the local WNOJ model.
    let group = Group::Se3;
    let vel = TangentVector::from_slice(group, &[0.4, 0.0, 0.1, 0.0, 0.0, 0.5]).unwrap();
    let states: Vec<KinematicState> = [0.0, 1.0]
        .iter()
        .map(|&t| {
            KinematicState::new(
                ManifoldElement::exp(&TangentVector::new(group, &vel.coords * t).unwrap()),
                vel.clone(),
                group.zero_tangent(),
            )
            .unwrap()
        })
        .collect();
    let traj = GpTrajectory::new(
        group,
        ModelOrder::Wnoj,
        vec![0.0, 1.0],
        states,
        ProcessNoise::isotropic(6, 1.0),
    )
    .unwrap();
    println!("SE(3) constant-twist segment:");
    for i in 0..=4 {
        let tau = i as f64 * 0.25;
        let s = traj.interp_lie(tau).unwrap();
        let p = s.value.body_position();
        println!(
            "  tau = {tau:.2}: body position ({:+.4}, {:+.4}, {:+.4}), |twist| {:.4}",
            p[0],
            p[1],
            p[2],
            s.velocity.coords.norm()
        );
    }
}
