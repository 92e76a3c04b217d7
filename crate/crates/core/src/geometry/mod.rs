//! Pose algebra for localization and planar primitives for avoidance.

pub mod polygon;
mod se3;
mod vec2;

pub use se3::{
    hat, se3_exp, se3_left_jacobian, se3_left_jacobian_inv, se3_log, se3_right_jacobian_inv, so3_left_jacobian,
    so3_left_jacobian_inv, Mat3, Mat6, Pose3, Rot3, Twist6, Vec3, Vec6,
};
pub use vec2::Vec2;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("rotation angle {angle} is at π; logarithm is not unique")]
    LogAtPi { angle: f64 },
    #[error("degenerate polygon: {0}")]
    DegeneratePolygon(String),
    #[error("polygon is self-intersecting")]
    SelfIntersecting,
    #[error("polygon vertices must be in counter-clockwise order")]
    ClockwisePolygon,
}
