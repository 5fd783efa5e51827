//! Matrix Lie group algebra layer.
//!
//! Supports SO(3), SE(3), the product group SO(3) x R^3, and R^d as the
//! trivial group. Exponential/logarithm maps, adjoints, and left/right
//! Jacobians with their inverses are provided for each. Group derivatives
//! (velocities, accelerations) are perturbations in the left tangent space
//! throughout: `g(t + h) ~ Exp(h * dg) g(t)`.
//!
//! SE(3) and SO(3) x R^3 tangent coordinates are ordered
//! `[translation; rotation]`.

mod se3;
pub(crate) mod so3;

pub use so3::{PI_BOUNDARY, SMALL_ANGLE};

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};

use crate::error::{Error, Result};
use so3::skew;

/// Identifies which group an element or tangent vector belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Group {
    So3,
    Se3,
    So3xR3,
    /// R^d under addition.
    Euclidean(usize),
}

impl Group {
    /// Dimension of the Lie algebra.
    pub fn dim(&self) -> usize {
        match self {
            Group::So3 => 3,
            Group::Se3 | Group::So3xR3 => 6,
            Group::Euclidean(d) => *d,
        }
    }

    pub fn identity(&self) -> ManifoldElement {
        match self {
            Group::So3 => ManifoldElement::So3(Matrix3::identity()),
            Group::Se3 => ManifoldElement::Se3 {
                rot: Matrix3::identity(),
                trans: Vector3::zeros(),
            },
            Group::So3xR3 => ManifoldElement::So3xR3 {
                rot: Matrix3::identity(),
                trans: Vector3::zeros(),
            },
            Group::Euclidean(d) => ManifoldElement::Euclidean(DVector::zeros(*d)),
        }
    }

    pub fn zero_tangent(&self) -> TangentVector {
        TangentVector {
            group: *self,
            coords: DVector::zeros(self.dim()),
        }
    }
}

/// A vector in the Lie algebra, expressed in R^d coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct TangentVector {
    pub group: Group,
    pub coords: DVector<f64>,
}

impl TangentVector {
    pub fn new(group: Group, coords: DVector<f64>) -> Result<Self> {
        if coords.len() != group.dim() {
            return Err(Error::DimensionMismatch {
                expected: group.dim(),
                actual: coords.len(),
            });
        }
        Ok(TangentVector { group, coords })
    }

    pub fn from_slice(group: Group, coords: &[f64]) -> Result<Self> {
        Self::new(group, DVector::from_column_slice(coords))
    }

    /// Translation block for SE(3) / SO(3) x R^3, the full vector otherwise.
    pub fn translation_block(&self) -> DVector<f64> {
        match self.group {
            Group::Se3 | Group::So3xR3 => self.coords.rows(0, 3).into_owned(),
            _ => self.coords.clone(),
        }
    }

    /// Rotation block for groups with a rotation factor.
    pub fn rotation_block(&self) -> Vector3<f64> {
        match self.group {
            Group::So3 => Vector3::new(self.coords[0], self.coords[1], self.coords[2]),
            Group::Se3 | Group::So3xR3 => {
                Vector3::new(self.coords[3], self.coords[4], self.coords[5])
            }
            Group::Euclidean(_) => Vector3::zeros(),
        }
    }

    fn rot3(&self) -> Vector3<f64> {
        self.rotation_block()
    }

    fn trans3(&self) -> Vector3<f64> {
        Vector3::new(self.coords[0], self.coords[1], self.coords[2])
    }
}

/// A point on one of the supported groups.
#[derive(Clone, Debug, PartialEq)]
pub enum ManifoldElement {
    So3(Matrix3<f64>),
    Se3 { rot: Matrix3<f64>, trans: Vector3<f64> },
    So3xR3 { rot: Matrix3<f64>, trans: Vector3<f64> },
    Euclidean(DVector<f64>),
}

const ORTHONORMAL_TOL: f64 = 1e-9;

fn checked_rotation(m: &Matrix3<f64>) -> Matrix3<f64> {
    let defect = (m.transpose() * m - Matrix3::identity()).norm();
    if defect > 1e-13 || (m.determinant() - 1.0).abs() > 1e-13 {
        debug_assert!(
            defect < ORTHONORMAL_TOL,
            "rotation defect {defect} exceeds construction tolerance"
        );
        so3::orthonormalize(m)
    } else {
        *m
    }
}

impl ManifoldElement {
    pub fn group(&self) -> Group {
        match self {
            ManifoldElement::So3(_) => Group::So3,
            ManifoldElement::Se3 { .. } => Group::Se3,
            ManifoldElement::So3xR3 { .. } => Group::So3xR3,
            ManifoldElement::Euclidean(v) => Group::Euclidean(v.len()),
        }
    }

    /// SO(3) element from a (nearly) orthonormal matrix; re-orthonormalized.
    pub fn rotation_from_matrix(m: &Matrix3<f64>) -> Self {
        ManifoldElement::So3(checked_rotation(m))
    }

    /// SE(3) element with `trans` the translation column of the homogeneous
    /// matrix; the rotation is re-orthonormalized.
    pub fn se3_from_parts(rot: &Matrix3<f64>, trans: &Vector3<f64>) -> Self {
        ManifoldElement::Se3 {
            rot: checked_rotation(rot),
            trans: *trans,
        }
    }

    /// Product-group element `(R, p)`; `p` composes additively.
    pub fn so3xr3_from_parts(rot: &Matrix3<f64>, trans: &Vector3<f64>) -> Self {
        ManifoldElement::So3xR3 {
            rot: checked_rotation(rot),
            trans: *trans,
        }
    }

    pub fn euclidean(v: DVector<f64>) -> Self {
        ManifoldElement::Euclidean(v)
    }

    /// Rotation factor; identity for Euclidean elements.
    pub fn rotation(&self) -> Matrix3<f64> {
        match self {
            ManifoldElement::So3(r)
            | ManifoldElement::Se3 { rot: r, .. }
            | ManifoldElement::So3xR3 { rot: r, .. } => *r,
            ManifoldElement::Euclidean(_) => Matrix3::identity(),
        }
    }

    /// Translation factor; zero for SO(3) and Euclidean elements.
    pub fn translation(&self) -> Vector3<f64> {
        match self {
            ManifoldElement::Se3 { trans, .. } | ManifoldElement::So3xR3 { trans, .. } => *trans,
            _ => Vector3::zeros(),
        }
    }

    /// Coordinates of a Euclidean element.
    pub fn euclidean_coords(&self) -> &DVector<f64> {
        match self {
            ManifoldElement::Euclidean(v) => v,
            _ => panic!("euclidean_coords called on a non-Euclidean element"),
        }
    }

    /// View this element as a rigid transform `T` (inertial-to-body).
    ///
    /// SE(3) elements pass through. For the product group `(R, p)` where `p`
    /// is the body position in the inertial frame, the transform is
    /// `[[R, -R p], [0, 1]]`.
    pub fn as_pose(&self) -> Result<ManifoldElement> {
        match self {
            ManifoldElement::Se3 { .. } => Ok(self.clone()),
            ManifoldElement::So3xR3 { rot, trans } => Ok(ManifoldElement::Se3 {
                rot: *rot,
                trans: -(rot * trans),
            }),
            _ => Err(Error::InvalidArgument {
                detail: "pose view requires SE(3) or SO(3) x R^3".into(),
            }),
        }
    }

    /// Position of the body origin in the inertial frame.
    pub fn body_position(&self) -> DVector<f64> {
        match self {
            ManifoldElement::Se3 { rot, trans } => {
                DVector::from_column_slice((-(rot.transpose() * trans)).as_slice())
            }
            ManifoldElement::So3xR3 { trans, .. } => DVector::from_column_slice(trans.as_slice()),
            ManifoldElement::Euclidean(v) => v.clone(),
            ManifoldElement::So3(_) => DVector::zeros(0),
        }
    }

    pub fn compose(&self, rhs: &ManifoldElement) -> ManifoldElement {
        match (self, rhs) {
            (ManifoldElement::So3(a), ManifoldElement::So3(b)) => ManifoldElement::So3(a * b),
            (
                ManifoldElement::Se3 { rot: r1, trans: t1 },
                ManifoldElement::Se3 { rot: r2, trans: t2 },
            ) => ManifoldElement::Se3 {
                rot: r1 * r2,
                trans: r1 * t2 + t1,
            },
            (
                ManifoldElement::So3xR3 { rot: r1, trans: t1 },
                ManifoldElement::So3xR3 { rot: r2, trans: t2 },
            ) => ManifoldElement::So3xR3 {
                rot: r1 * r2,
                trans: t1 + t2,
            },
            (ManifoldElement::Euclidean(a), ManifoldElement::Euclidean(b)) => {
                ManifoldElement::Euclidean(a + b)
            }
            _ => panic!("compose on mismatched groups"),
        }
    }

    pub fn inverse(&self) -> ManifoldElement {
        match self {
            ManifoldElement::So3(r) => ManifoldElement::So3(r.transpose()),
            ManifoldElement::Se3 { rot, trans } => ManifoldElement::Se3 {
                rot: rot.transpose(),
                trans: -(rot.transpose() * trans),
            },
            ManifoldElement::So3xR3 { rot, trans } => ManifoldElement::So3xR3 {
                rot: rot.transpose(),
                trans: -trans,
            },
            ManifoldElement::Euclidean(v) => ManifoldElement::Euclidean(-v),
        }
    }

    /// Exponential map, `Exp = exp o wedge`.
    pub fn exp(xi: &TangentVector) -> ManifoldElement {
        match xi.group {
            Group::So3 => ManifoldElement::So3(so3::exp(&xi.rot3())),
            Group::Se3 => {
                let phi = xi.rot3();
                ManifoldElement::Se3 {
                    rot: so3::exp(&phi),
                    trans: so3::left_jacobian(&phi) * xi.trans3(),
                }
            }
            Group::So3xR3 => ManifoldElement::So3xR3 {
                rot: so3::exp(&xi.rot3()),
                trans: xi.trans3(),
            },
            Group::Euclidean(_) => ManifoldElement::Euclidean(xi.coords.clone()),
        }
    }

    /// Logarithm map, `Log = vee o log`.
    ///
    /// Fails with [`Error::AngleAtBoundary`] when the rotation angle is
    /// within `1e-9` of pi.
    pub fn log(&self) -> Result<TangentVector> {
        match self {
            ManifoldElement::So3(r) => {
                let phi = so3::log(r)?;
                TangentVector::from_slice(Group::So3, phi.as_slice())
            }
            ManifoldElement::Se3 { rot, trans } => {
                let phi = so3::log(rot)?;
                let rho = so3::left_jacobian_inv(&phi) * trans;
                let mut coords = DVector::zeros(6);
                coords.rows_mut(0, 3).copy_from(&rho);
                coords.rows_mut(3, 3).copy_from(&phi);
                Ok(TangentVector {
                    group: Group::Se3,
                    coords,
                })
            }
            ManifoldElement::So3xR3 { rot, trans } => {
                let phi = so3::log(rot)?;
                let mut coords = DVector::zeros(6);
                coords.rows_mut(0, 3).copy_from(trans);
                coords.rows_mut(3, 3).copy_from(&phi);
                Ok(TangentVector {
                    group: Group::So3xR3,
                    coords,
                })
            }
            ManifoldElement::Euclidean(v) => Ok(TangentVector {
                group: self.group(),
                coords: v.clone(),
            }),
        }
    }

    /// Adjoint representation `Ad_g`.
    pub fn adjoint(&self) -> DMatrix<f64> {
        match self {
            ManifoldElement::So3(r) => DMatrix::from_column_slice(3, 3, r.as_slice()),
            ManifoldElement::Se3 { rot, trans } => {
                let mut ad = DMatrix::zeros(6, 6);
                set_block3(&mut ad, 0, 0, rot);
                set_block3(&mut ad, 0, 3, &(skew(trans) * rot));
                set_block3(&mut ad, 3, 3, rot);
                ad
            }
            ManifoldElement::So3xR3 { rot, .. } => {
                let mut ad = DMatrix::identity(6, 6);
                set_block3(&mut ad, 3, 3, rot);
                ad
            }
            ManifoldElement::Euclidean(v) => DMatrix::identity(v.len(), v.len()),
        }
    }

    /// Rotation angle of the rotation factor (zero for Euclidean).
    pub fn rotation_angle(&self) -> f64 {
        match self {
            ManifoldElement::Euclidean(_) => 0.0,
            other => so3::angle(&other.rotation()),
        }
    }
}

fn set_block3(m: &mut DMatrix<f64>, row: usize, col: usize, block: &Matrix3<f64>) {
    for c in 0..3 {
        for r in 0..3 {
            m[(row + r, col + c)] = block[(r, c)];
        }
    }
}

/// Adjoint representation of an algebra element (the `curly-wedge` operator).
///
/// Linear in `xi` and alternating: `small_adjoint(xi) * xi = 0`.
pub fn small_adjoint(xi: &TangentVector) -> DMatrix<f64> {
    match xi.group {
        Group::So3 => {
            let k = skew(&xi.rot3());
            DMatrix::from_column_slice(3, 3, k.as_slice())
        }
        Group::Se3 => {
            let mut ad = DMatrix::zeros(6, 6);
            let k = skew(&xi.rot3());
            set_block3(&mut ad, 0, 0, &k);
            set_block3(&mut ad, 0, 3, &skew(&xi.trans3()));
            set_block3(&mut ad, 3, 3, &k);
            ad
        }
        Group::So3xR3 => {
            let mut ad = DMatrix::zeros(6, 6);
            set_block3(&mut ad, 3, 3, &skew(&xi.rot3()));
            ad
        }
        Group::Euclidean(d) => DMatrix::zeros(d, d),
    }
}

/// Left Jacobian of the group at `xi`.
pub fn left_jacobian(xi: &TangentVector) -> DMatrix<f64> {
    match xi.group {
        Group::So3 => {
            let j = so3::left_jacobian(&xi.rot3());
            DMatrix::from_column_slice(3, 3, j.as_slice())
        }
        Group::Se3 => {
            let (j, q) = se3::left_jacobian_blocks(&xi.trans3(), &xi.rot3());
            let mut out = DMatrix::zeros(6, 6);
            set_block3(&mut out, 0, 0, &j);
            set_block3(&mut out, 0, 3, &q);
            set_block3(&mut out, 3, 3, &j);
            out
        }
        Group::So3xR3 => {
            let mut out = DMatrix::identity(6, 6);
            set_block3(&mut out, 3, 3, &so3::left_jacobian(&xi.rot3()));
            out
        }
        Group::Euclidean(d) => DMatrix::identity(d, d),
    }
}

/// Inverse left Jacobian of the group at `xi`.
pub fn left_jacobian_inv(xi: &TangentVector) -> DMatrix<f64> {
    match xi.group {
        Group::So3 => {
            let j = so3::left_jacobian_inv(&xi.rot3());
            DMatrix::from_column_slice(3, 3, j.as_slice())
        }
        Group::Se3 => {
            let (j, q) = se3::left_jacobian_inv_blocks(&xi.trans3(), &xi.rot3());
            let mut out = DMatrix::zeros(6, 6);
            set_block3(&mut out, 0, 0, &j);
            set_block3(&mut out, 0, 3, &q);
            set_block3(&mut out, 3, 3, &j);
            out
        }
        Group::So3xR3 => {
            let mut out = DMatrix::identity(6, 6);
            set_block3(&mut out, 3, 3, &so3::left_jacobian_inv(&xi.rot3()));
            out
        }
        Group::Euclidean(d) => DMatrix::identity(d, d),
    }
}

fn negated(xi: &TangentVector) -> TangentVector {
    TangentVector {
        group: xi.group,
        coords: -&xi.coords,
    }
}

/// Right Jacobian, `J_r(xi) = J_l(-xi)`.
pub fn right_jacobian(xi: &TangentVector) -> DMatrix<f64> {
    left_jacobian(&negated(xi))
}

/// Inverse right Jacobian.
pub fn right_jacobian_inv(xi: &TangentVector) -> DMatrix<f64> {
    left_jacobian_inv(&negated(xi))
}

/// Full kinematic state: group element plus first and second left-tangent
/// derivatives.
#[derive(Clone, Debug)]
pub struct KinematicState {
    pub value: ManifoldElement,
    pub velocity: TangentVector,
    pub acceleration: TangentVector,
}

impl KinematicState {
    pub fn new(
        value: ManifoldElement,
        velocity: TangentVector,
        acceleration: TangentVector,
    ) -> Result<Self> {
        let g = value.group();
        if velocity.group != g || acceleration.group != g {
            return Err(Error::InvalidArgument {
                detail: "kinematic state parts must share one group".into(),
            });
        }
        Ok(KinematicState {
            value,
            velocity,
            acceleration,
        })
    }

    /// State at rest at the group identity.
    pub fn at_rest(group: Group) -> Self {
        KinematicState {
            value: group.identity(),
            velocity: group.zero_tangent(),
            acceleration: group.zero_tangent(),
        }
    }

    pub fn group(&self) -> Group {
        self.value.group()
    }

    /// Stacks a Euclidean state into `[pos; vel; acc]`.
    pub fn to_stacked(&self) -> DVector<f64> {
        let d = self.group().dim();
        let mut out = DVector::zeros(3 * d);
        out.rows_mut(0, d).copy_from(&self.value.body_position());
        out.rows_mut(d, d).copy_from(&self.velocity.coords);
        out.rows_mut(2 * d, d).copy_from(&self.acceleration.coords);
        out
    }

    /// Builds a Euclidean state from a stacked `[pos; vel; acc]` vector.
    pub fn from_stacked(d: usize, x: &DVector<f64>) -> Result<Self> {
        if x.len() != 3 * d {
            return Err(Error::DimensionMismatch {
                expected: 3 * d,
                actual: x.len(),
            });
        }
        let g = Group::Euclidean(d);
        Ok(KinematicState {
            value: ManifoldElement::Euclidean(x.rows(0, d).into_owned()),
            velocity: TangentVector::new(g, x.rows(d, d).into_owned())?,
            acceleration: TangentVector::new(g, x.rows(2 * d, d).into_owned())?,
        })
    }
}
