//! Rigid-body algebra on SO(3)/SE(3).
//!
//! Tangent vectors are ordered rotation first, translation second:
//! `ξ = (ω, ρ)`. Perturbations are right-multiplicative, `T ← T·exp(ξ)`,
//! and all Jacobians in this module follow that convention.

use std::f64::consts::PI;
use std::fmt;
use std::ops::Mul;

use nalgebra::{Matrix3, Matrix6, Quaternion, UnitQuaternion, Vector3, Vector6};

use super::GeometryError;

pub type Vec3 = Vector3<f64>;
pub type Mat3 = Matrix3<f64>;
pub type Vec6 = Vector6<f64>;
pub type Mat6 = Matrix6<f64>;

/// Below this angle, exp/log use a second-order Taylor expansion.
const SMALL_ANGLE: f64 = 1e-6;
/// Below this angle, the Jacobian coefficients with catastrophic cancellation
/// switch to their power series.
const SERIES_ANGLE: f64 = 0.1;
/// Rotations this close to π have no unique logarithm.
const PI_MARGIN: f64 = 1e-12;

/// Skew-symmetric matrix with `hat(a)·b = a × b`.
pub fn hat(v: &Vec3) -> Mat3 {
    Mat3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// Rotation in 3D, stored as a unit quaternion.
#[derive(Clone, Copy, PartialEq)]
pub struct Rot3(UnitQuaternion<f64>);

impl Rot3 {
    pub fn identity() -> Self {
        Rot3(UnitQuaternion::identity())
    }

    /// Rotation of `yaw` radians about +z.
    pub fn from_yaw(yaw: f64) -> Self {
        Self::exp(&Vec3::new(0.0, 0.0, yaw))
    }

    /// Builds a rotation from an orthonormal matrix.
    pub fn from_matrix(m: &Mat3) -> Self {
        let rot = nalgebra::Rotation3::from_matrix_unchecked(*m);
        Rot3(UnitQuaternion::from_rotation_matrix(&rot))
    }

    /// Exponential map from a rotation vector (radians).
    pub fn exp(omega: &Vec3) -> Self {
        let theta_sq = omega.norm_squared();
        let theta = theta_sq.sqrt();
        let (w, k) = if theta < SMALL_ANGLE {
            (1.0 - theta_sq / 8.0, 0.5 - theta_sq / 48.0)
        } else {
            let half = 0.5 * theta;
            (half.cos(), half.sin() / theta)
        };
        let q = Quaternion::new(w, k * omega.x, k * omega.y, k * omega.z);
        Rot3(UnitQuaternion::new_normalize(q))
    }

    /// Rotation vector with angle in `[0, π)`.
    pub fn log(&self) -> Result<Vec3, GeometryError> {
        let q = self.0.quaternion();
        // q and -q are the same rotation; pick the hemisphere with w >= 0.
        let (w, v) = if q.w < 0.0 { (-q.w, -q.imag()) } else { (q.w, q.imag()) };
        let s = v.norm();
        if s < SMALL_ANGLE {
            let w_sq = w * w;
            return Ok(v * (2.0 / w) * (1.0 - s * s / (3.0 * w_sq)));
        }
        let theta = 2.0 * s.atan2(w);
        if PI - theta <= PI_MARGIN {
            return Err(GeometryError::LogAtPi { angle: theta });
        }
        Ok(v * (theta / s))
    }

    /// Rotation angle in `[0, π]`.
    pub fn angle(&self) -> f64 {
        let q = self.0.quaternion();
        2.0 * q.imag().norm().atan2(q.w.abs())
    }

    /// Heading of the body x axis projected onto the horizontal plane.
    pub fn yaw(&self) -> f64 {
        let x = self.rotate(&Vec3::x());
        x.y.atan2(x.x)
    }

    pub fn inverse(&self) -> Self {
        Rot3(self.0.inverse())
    }

    pub fn matrix(&self) -> Mat3 {
        *self.0.to_rotation_matrix().matrix()
    }

    pub fn rotate(&self, v: &Vec3) -> Vec3 {
        self.0 * v
    }

    pub fn quaternion(&self) -> &UnitQuaternion<f64> {
        &self.0
    }

    /// Normalizes the input unless it is already unit length to within
    /// rounding, so stored quaternions read back bit-exact.
    pub fn from_quaternion(w: f64, x: f64, y: f64, z: f64) -> Self {
        let q = Quaternion::new(w, x, y, z);
        if (q.norm_squared() - 1.0).abs() <= 4.0 * f64::EPSILON {
            Rot3(UnitQuaternion::new_unchecked(q))
        } else {
            Rot3(UnitQuaternion::new_normalize(q))
        }
    }

    /// Composition; the result is renormalized so long chains stay on SO(3).
    pub fn compose(&self, other: &Rot3) -> Rot3 {
        Rot3(UnitQuaternion::new_normalize(
            self.0.into_inner() * other.0.into_inner(),
        ))
    }
}

impl Mul for Rot3 {
    type Output = Rot3;
    fn mul(self, rhs: Rot3) -> Rot3 {
        self.compose(&rhs)
    }
}

impl fmt::Debug for Rot3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let q = self.0.quaternion();
        write!(f, "Rot3(w={}, x={}, y={}, z={})", q.w, q.i, q.j, q.k)
    }
}

/// Tangent vector of SE(3): rotational part `omega` (rad) and translational
/// part `rho` (m).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Twist6 {
    pub omega: Vec3,
    pub rho: Vec3,
}

impl Twist6 {
    pub fn zero() -> Self {
        Self {
            omega: Vec3::zeros(),
            rho: Vec3::zeros(),
        }
    }

    pub fn new(omega: Vec3, rho: Vec3) -> Self {
        Self { omega, rho }
    }

    pub fn from_vector(v: &Vec6) -> Self {
        Self {
            omega: Vec3::new(v[0], v[1], v[2]),
            rho: Vec3::new(v[3], v[4], v[5]),
        }
    }

    pub fn to_vector(&self) -> Vec6 {
        Vec6::new(
            self.omega.x,
            self.omega.y,
            self.omega.z,
            self.rho.x,
            self.rho.y,
            self.rho.z,
        )
    }

    pub fn scale(&self, s: f64) -> Twist6 {
        Twist6::new(self.omega * s, self.rho * s)
    }

    pub fn norm_inf(&self) -> f64 {
        self.to_vector().amax()
    }
}

/// Rigid transform. Maps points from the child frame into the parent frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose3 {
    pub rotation: Rot3,
    pub translation: Vec3,
}

impl Pose3 {
    pub fn identity() -> Self {
        Self {
            rotation: Rot3::identity(),
            translation: Vec3::zeros(),
        }
    }

    pub fn new(rotation: Rot3, translation: Vec3) -> Self {
        Self { rotation, translation }
    }

    pub fn from_translation(x: f64, y: f64, z: f64) -> Self {
        Self::new(Rot3::identity(), Vec3::new(x, y, z))
    }

    /// Level pose at `(x, y, z)` with heading `yaw`.
    pub fn from_xyz_yaw(x: f64, y: f64, z: f64, yaw: f64) -> Self {
        Self::new(Rot3::from_yaw(yaw), Vec3::new(x, y, z))
    }

    pub fn compose(&self, other: &Pose3) -> Pose3 {
        Pose3 {
            rotation: self.rotation.compose(&other.rotation),
            translation: self.rotation.rotate(&other.translation) + self.translation,
        }
    }

    pub fn inverse(&self) -> Pose3 {
        let inv = self.rotation.inverse();
        Pose3 {
            rotation: inv,
            translation: -inv.rotate(&self.translation),
        }
    }

    /// `self⁻¹ · other`: the pose of `other` expressed in the frame of `self`.
    pub fn between(&self, other: &Pose3) -> Pose3 {
        self.inverse().compose(other)
    }

    pub fn transform_point(&self, p: &Vec3) -> Vec3 {
        self.rotation.rotate(p) + self.translation
    }

    /// Right-multiplicative retraction `self · exp(xi)`.
    pub fn retract(&self, xi: &Twist6) -> Pose3 {
        self.compose(&se3_exp(xi))
    }

    /// Adjoint for the `(ω, ρ)` ordering: `exp(Ad·ξ) = T·exp(ξ)·T⁻¹`.
    pub fn adjoint(&self) -> Mat6 {
        let r = self.rotation.matrix();
        let mut ad = Mat6::zeros();
        ad.fixed_view_mut::<3, 3>(0, 0).copy_from(&r);
        ad.fixed_view_mut::<3, 3>(3, 3).copy_from(&r);
        ad.fixed_view_mut::<3, 3>(3, 0).copy_from(&(hat(&self.translation) * r));
        ad
    }

    pub fn is_finite(&self) -> bool {
        let q = self.rotation.quaternion();
        self.translation.iter().all(|v| v.is_finite()) && [q.w, q.i, q.j, q.k].iter().all(|v| v.is_finite())
    }
}

impl Mul for Pose3 {
    type Output = Pose3;
    fn mul(self, rhs: Pose3) -> Pose3 {
        self.compose(&rhs)
    }
}

/// Scalar coefficients shared by the SO(3)/SE(3) series.
struct AngleCoeffs {
    theta_sq: f64,
    /// (1 - cos θ) / θ²
    b: f64,
    /// (θ - sin θ) / θ³
    c: f64,
}

impl AngleCoeffs {
    fn new(omega: &Vec3) -> Self {
        let theta_sq = omega.norm_squared();
        let theta = theta_sq.sqrt();
        let b = if theta < SMALL_ANGLE {
            0.5 - theta_sq / 24.0
        } else {
            let s = (0.5 * theta).sin() / theta;
            2.0 * s * s
        };
        let c = if theta < SERIES_ANGLE {
            let t2 = theta_sq;
            1.0 / 6.0 - t2 / 120.0 + t2 * t2 / 5040.0 - t2 * t2 * t2 / 362_880.0 + t2 * t2 * t2 * t2 / 39_916_800.0
        } else {
            (theta - theta.sin()) / (theta_sq * theta)
        };
        Self { theta_sq, b, c }
    }
}

/// Left Jacobian of SO(3); it also maps `ρ` to the translation of `exp(ξ)`.
pub fn so3_left_jacobian(omega: &Vec3) -> Mat3 {
    let k = AngleCoeffs::new(omega);
    let w = hat(omega);
    Mat3::identity() + w * k.b + w * w * k.c
}

/// Inverse of [`so3_left_jacobian`].
pub fn so3_left_jacobian_inv(omega: &Vec3) -> Mat3 {
    let theta_sq = omega.norm_squared();
    let theta = theta_sq.sqrt();
    let f = if theta < SERIES_ANGLE {
        let t2 = theta_sq;
        1.0 / 12.0 + t2 / 720.0 + t2 * t2 / 30_240.0 + t2 * t2 * t2 / 1_209_600.0
    } else {
        // (1 + cos θ) / sin θ = cot(θ/2), which stays finite up to π.
        1.0 / theta_sq - 1.0 / ((0.5 * theta).tan() * 2.0 * theta)
    };
    let w = hat(omega);
    Mat3::identity() - w * 0.5 + w * w * f
}

/// Coupling block of the SE(3) left Jacobian (lower-left in `(ω, ρ)` order).
fn se3_left_coupling(omega: &Vec3, rho: &Vec3) -> Mat3 {
    let k = AngleCoeffs::new(omega);
    let theta = k.theta_sq.sqrt();
    let t2 = k.theta_sq;
    // (θ²/2 + cos θ - 1) / θ⁴
    let d = if theta < SERIES_ANGLE {
        1.0 / 24.0 - t2 / 720.0 + t2 * t2 / 40_320.0 - t2 * t2 * t2 / 3_628_800.0
    } else {
        (0.5 * t2 + theta.cos() - 1.0) / (t2 * t2)
    };
    // (2θ - 3 sin θ + θ cos θ) / (2θ⁵)
    let g = if theta < SERIES_ANGLE {
        1.0 / 120.0 - t2 / 2520.0 + t2 * t2 / 120_960.0 - t2 * t2 * t2 / 9_979_200.0
    } else {
        (2.0 * theta - 3.0 * theta.sin() + theta * theta.cos()) / (2.0 * t2 * t2 * theta)
    };
    let p = hat(omega);
    let r = hat(rho);
    let pr = p * r;
    let rp = r * p;
    let prp = pr * p;
    r * 0.5 + (pr + rp + prp) * k.c + (p * pr + rp * p - prp * 3.0) * d + (prp * p + p * prp) * g
}

/// Left Jacobian of SE(3) in `(ω, ρ)` order.
pub fn se3_left_jacobian(xi: &Twist6) -> Mat6 {
    let j = so3_left_jacobian(&xi.omega);
    let q = se3_left_coupling(&xi.omega, &xi.rho);
    let mut out = Mat6::zeros();
    out.fixed_view_mut::<3, 3>(0, 0).copy_from(&j);
    out.fixed_view_mut::<3, 3>(3, 3).copy_from(&j);
    out.fixed_view_mut::<3, 3>(3, 0).copy_from(&q);
    out
}

/// Inverse of the SE(3) left Jacobian in `(ω, ρ)` order.
pub fn se3_left_jacobian_inv(xi: &Twist6) -> Mat6 {
    let j_inv = so3_left_jacobian_inv(&xi.omega);
    let q = se3_left_coupling(&xi.omega, &xi.rho);
    let mut out = Mat6::zeros();
    out.fixed_view_mut::<3, 3>(0, 0).copy_from(&j_inv);
    out.fixed_view_mut::<3, 3>(3, 3).copy_from(&j_inv);
    out.fixed_view_mut::<3, 3>(3, 0).copy_from(&(-j_inv * q * j_inv));
    out
}

/// Inverse right Jacobian: `log(exp(ξ)·exp(δ)) ≈ ξ + J_r⁻¹(ξ)·δ`.
pub fn se3_right_jacobian_inv(xi: &Twist6) -> Mat6 {
    se3_left_jacobian_inv(&xi.scale(-1.0))
}

/// SE(3) exponential map.
pub fn se3_exp(xi: &Twist6) -> Pose3 {
    Pose3 {
        rotation: Rot3::exp(&xi.omega),
        translation: so3_left_jacobian(&xi.omega) * xi.rho,
    }
}

/// SE(3) logarithm; fails when the rotation angle reaches π.
pub fn se3_log(pose: &Pose3) -> Result<Twist6, GeometryError> {
    let omega = pose.rotation.log()?;
    let rho = so3_left_jacobian_inv(&omega) * pose.translation;
    Ok(Twist6 { omega, rho })
}
