//! Tour of the Lie-group layer: exponential/logarithm maps, adjoints, and
//! left/right Jacobians on SO(3), SE(3), SO(3) x R^3, and R^d.
//!
//!     cargo run --release --example lie_groups

use ctraj::manifold::{
    left_jacobian, left_jacobian_inv, right_jacobian, small_adjoint, Group, ManifoldElement,
    TangentVector,
};

fn main() {
    for group in [Group::So3, Group::Se3, Group::So3xR3, Group::Euclidean(3)] {
        let d = group.dim();
        println!("== {group:?} (dimension {d})");

        // A tangent vector and its exponential.
        let coords: Vec<f64> = (0..d).map(|i| 0.3 * (i as f64 + 1.0) / d as f64).collect();
        let xi = TangentVector::from_slice(group, &coords).unwrap();
        let g = ManifoldElement::exp(&xi);
        let back = g.log().unwrap();
        println!(
            "  log(exp(xi)) roundtrip error: {:.2e}",
            (&back.coords - &xi.coords).norm()
        );

        // Adjoint homomorphism: Ad_{gh} = Ad_g Ad_h.
        let h = ManifoldElement::exp(&TangentVector::from_slice(group, &vec![0.1; d]).unwrap());
        let lhs = g.compose(&h).adjoint();
        let rhs = g.adjoint() * h.adjoint();
        println!("  adjoint homomorphism defect: {:.2e}", (lhs - rhs).norm());

        // The small adjoint is alternating: ad(xi) xi = 0.
        println!(
            "  alternating property |ad(xi) xi|: {:.2e}",
            (small_adjoint(&xi) * &xi.coords).norm()
        );

        // Left/right Jacobian identities.
        let j = left_jacobian(&xi);
        let jinv = left_jacobian_inv(&xi);
        let id = nalgebra::DMatrix::<f64>::identity(d, d);
        println!("  |J_l J_l^-1 - I|: {:.2e}", (&j * &jinv - &id).norm());
        let jr = right_jacobian(&xi);
        println!(
            "  |J_l - Ad_exp(xi) J_r|: {:.2e}",
            (&j - g.adjoint() * jr).norm()
        );
    }
}
