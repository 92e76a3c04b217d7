use crate::geometry::{se3_log, se3_right_jacobian_inv, GeometryError, Mat6, Pose3, Vec6};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FactorKind {
    Prior,
    Odometry,
    LandmarkObservation,
}

/// Measurement constraint on one or two pose variables.
///
/// `sigma` holds standard deviations in tangent order `(ω, ρ)`: three
/// rotational components in radians, then three translational in meters.
#[derive(Debug, Clone, PartialEq)]
pub enum Factor {
    Prior {
        pose: usize,
        measurement: Pose3,
        sigma: Vec6,
    },
    /// `measurement` is the pose of `to` seen from `from`.
    Odometry {
        from: usize,
        to: usize,
        measurement: Pose3,
        sigma: Vec6,
    },
    /// `measurement` is the body-frame pose of a marker whose world pose is
    /// the fixed `landmark`.
    Landmark {
        pose: usize,
        tag_id: u32,
        landmark: Pose3,
        measurement: Pose3,
        sigma: Vec6,
    },
}

/// Whitened residual and its Jacobian blocks, one per connected pose.
#[derive(Debug, Clone, PartialEq)]
pub struct Linearized {
    pub residual: Vec6,
    pub first: (usize, Mat6),
    pub second: Option<(usize, Mat6)>,
}

impl Factor {
    pub fn kind(&self) -> FactorKind {
        match self {
            Factor::Prior { .. } => FactorKind::Prior,
            Factor::Odometry { .. } => FactorKind::Odometry,
            Factor::Landmark { .. } => FactorKind::LandmarkObservation,
        }
    }

    pub fn sigma(&self) -> &Vec6 {
        match self {
            Factor::Prior { sigma, .. } | Factor::Odometry { sigma, .. } | Factor::Landmark { sigma, .. } => sigma,
        }
    }

    pub fn measurement(&self) -> &Pose3 {
        match self {
            Factor::Prior { measurement, .. }
            | Factor::Odometry { measurement, .. }
            | Factor::Landmark { measurement, .. } => measurement,
        }
    }

    pub fn variables(&self) -> (usize, Option<usize>) {
        match *self {
            Factor::Prior { pose, .. } | Factor::Landmark { pose, .. } => (pose, None),
            Factor::Odometry { from, to, .. } => (from, Some(to)),
        }
    }

    /// Error pose whose logarithm is the residual.
    fn error_pose(&self, poses: &[Pose3]) -> Pose3 {
        match self {
            Factor::Prior { pose, measurement, .. } => measurement.between(&poses[*pose]),
            Factor::Odometry {
                from, to, measurement, ..
            } => measurement.between(&poses[*from].between(&poses[*to])),
            Factor::Landmark {
                pose,
                landmark,
                measurement,
                ..
            } => measurement.between(&poses[*pose].between(landmark)),
        }
    }

    /// Residual before whitening.
    pub fn raw_residual(&self, poses: &[Pose3]) -> Result<Vec6, GeometryError> {
        Ok(se3_log(&self.error_pose(poses))?.to_vector())
    }

    /// Residual divided component-wise by `sigma`.
    pub fn residual(&self, poses: &[Pose3]) -> Result<Vec6, GeometryError> {
        Ok(self.raw_residual(poses)?.component_div(self.sigma()))
    }

    /// Jacobians of the whitened residual with respect to right
    /// perturbations `T ← T·exp(δ)` of each connected pose.
    pub fn linearize(&self, poses: &[Pose3]) -> Result<Linearized, GeometryError> {
        let xi = se3_log(&self.error_pose(poses))?;
        let jr_inv = se3_right_jacobian_inv(&xi);
        let w = Mat6::from_diagonal(&self.sigma().map(|s| 1.0 / s));
        let residual = xi.to_vector().component_div(self.sigma());
        let lin = match self {
            Factor::Prior { pose, .. } => Linearized {
                residual,
                first: (*pose, w * jr_inv),
                second: None,
            },
            Factor::Odometry { from, to, .. } => {
                let ad = poses[*to].between(&poses[*from]).adjoint();
                Linearized {
                    residual,
                    first: (*from, -(w * jr_inv * ad)),
                    second: Some((*to, w * jr_inv)),
                }
            }
            Factor::Landmark { pose, landmark, .. } => {
                let ad = landmark.between(&poses[*pose]).adjoint();
                Linearized {
                    residual,
                    first: (*pose, -(w * jr_inv * ad)),
                    second: None,
                }
            }
        };
        Ok(lin)
    }

    /// `½‖r‖²` of the whitened residual.
    pub fn cost(&self, poses: &[Pose3]) -> Result<f64, GeometryError> {
        Ok(0.5 * self.residual(poses)?.norm_squared())
    }
}
