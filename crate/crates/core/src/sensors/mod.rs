//! Synthetic odometry drift and fiducial-marker camera.

mod calibrate;
mod camera;
mod odometry;

pub use calibrate::{calibrate_drift, no_tag_mse, Calibration, CalibrationError};
pub use camera::{CameraModel, Mount, TagObservation};
pub use odometry::{OdometryModel, OdometryParams};
