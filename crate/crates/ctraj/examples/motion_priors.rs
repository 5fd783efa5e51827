//! WNOA/WNOJ motion models: transition matrices, process covariances, and
//! the Lie-group motion-prior residual.
//!
//!     cargo run --release --example motion_priors

use ctraj::manifold::{Group, KinematicState, ManifoldElement, TangentVector};
use ctraj::motion::{
    lie_prior_residual, process_covariance, transition_matrix, ModelOrder, ProcessNoise,
};

fn main() {
    println!("WNOJ transition over 1 s (scalar blocks):");
    println!("{:.3}", transition_matrix(1.0, ModelOrder::Wnoj, 1));
    println!("WNOJ process covariance over 1 s, unit PSD:");
    println!("{:.4}", process_covariance(1.0, ModelOrder::Wnoj, &ProcessNoise::isotropic(1, 1.0)).unwrap());

    // A constant-twist trajectory satisfies the noise-free model exactly.
    let group = Group::Se3;
    let vel = TangentVector::from_slice(group, &[0.3, -0.1, 0.2, 0.1, 0.0, 0.4]).unwrap();
    let dt = 0.5;
    let state_at = |t: f64| {
        KinematicState::new(
            ManifoldElement::exp(&TangentVector::new(group, &vel.coords * t).unwrap()),
            vel.clone(),
            group.zero_tangent(),
        )
        .unwrap()
    };
    let r = lie_prior_residual(&state_at(0.0), &state_at(dt), dt).unwrap();
    println!("prior residual on a geodesic: |r| = {:.2e}", r.norm());

    // Perturbing the arrival state produces a nonzero defect.
    let mut off = state_at(dt);
    off.velocity.coords[0] += 0.2;
    let r = lie_prior_residual(&state_at(0.0), &off, dt).unwrap();
    println!("prior residual with a velocity defect: |r| = {:.4}", r.norm());
}
