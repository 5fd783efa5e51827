//! Uniform cumulative B-splines on a vector space and on SE(3): blending
//! weights, evaluation, derivatives, and control-point Jacobians.
//!
//!     cargo run --release --example spline_interpolation

use ctraj::manifold::{Group, ManifoldElement, TangentVector};
use ctraj::spline::{blending_matrix, SplineTrajectory};
use nalgebra::DVector;

fn main() {
    // Cumulative blending weights for a cubic (order 4) spline.
    let basis = blending_matrix(4).unwrap();
    println!("order-4 cumulative weights b(u):");
    for u in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let w = basis.weights(u, 0);
        println!(
            "  u = {u:.2}: [{:.4}, {:.4}, {:.4}, {:.4}]",
            w[0], w[1], w[2], w[3]
        );
    }

    // A planar spline through drifting control points.
    let cps: Vec<ManifoldElement> = (0..8)
        .map(|i| {
            let t = i as f64 * 0.5;
            ManifoldElement::euclidean(DVector::from_column_slice(&[t.cos(), 0.5 * t]))
        })
        .collect();
    let traj = SplineTrajectory::new(Group::Euclidean(2), 4, 0.0, 0.5, cps).unwrap();
    let (start, end) = traj.domain();
    println!("planar spline domain [{start:.2}, {end:.2}]:");
    for i in 0..=4 {
        let t = start + (end - start) * i as f64 / 4.0;
        let p = traj.eval_vector(t, 0).unwrap();
        let v = traj.eval_vector(t, 1).unwrap();
        println!(
            "  t = {t:.2}: p = ({:+.4}, {:+.4}), dp = ({:+.4}, {:+.4})",
            p[0], p[1], v[0], v[1]
        );
    }

    // An SE(3) spline: a gentle helix of control points. The evaluation
    // returns the pose plus the first two left-tangent derivatives, and the
    // Jacobians cover the k influencing control points.
    let group = Group::Se3;
    let step = ManifoldElement::exp(
        &TangentVector::from_slice(group, &[0.2, 0.05, 0.0, 0.0, 0.0, 0.3]).unwrap(),
    );
    let mut cps = vec![group.identity()];
    for _ in 1..9 {
        cps.push(cps.last().unwrap().compose(&step));
    }
    let traj = SplineTrajectory::new(group, 4, 0.0, 0.4, cps).unwrap();
    let (start, end) = traj.domain();
    let t = 0.5 * (start + end);
    let (state, jacs) = traj.lie_jacobians(t).unwrap();
    println!(
        "SE(3) spline at t = {t:.2}: |twist| = {:.4}, window starts at control point {}",
        state.velocity.coords.norm(),
        jacs.first
    );
    for (l, j) in jacs.value.iter().enumerate() {
        println!("  |d pose / d cp_{}| = {:.4}", jacs.first + l, j.norm());
    }
}
