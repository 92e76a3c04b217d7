//! Landmark-based pose-graph localization.
//!
//! Pose variables are linked by odometry factors and anchored by priors and
//! observations of markers with known world poses. Landmarks are constants,
//! so the unknowns are poses only.

pub mod dump;
mod estimator;
mod factor;
mod graph;
mod solver;

pub use estimator::{
    run_estimator, EstimatorSettings, EstimatorStats, NoiseSigma, Observation, ObservationBatch, SlidingWindowEstimator,
};
pub use factor::{Factor, FactorKind, Linearized};
pub use graph::{FactorGraph, GnSettings, OptimizeReport};
pub use solver::BlockTridiagonal;

use thiserror::Error;

use crate::geometry::{GeometryError, Pose3};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SlamError {
    #[error("normal equations are singular (is the gauge anchored?)")]
    Singular,
    #[error("invalid factor: {0}")]
    InvalidFactor(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("dump line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Fixed landmark site carrying up to two markers.
#[derive(Debug, Clone, PartialEq)]
pub struct Landmark {
    /// Tag id of the first marker; further markers count up from it.
    pub tag_id: u32,
    pub world_pose: Pose3,
    /// Marker poses relative to `world_pose`.
    pub marker_offsets: Vec<Pose3>,
}

impl Landmark {
    /// `(tag_id, world pose)` of every marker.
    pub fn markers(&self) -> impl Iterator<Item = (u32, Pose3)> + '_ {
        self.marker_offsets
            .iter()
            .enumerate()
            .map(|(k, off)| (self.tag_id + k as u32, self.world_pose.compose(off)))
    }
}
