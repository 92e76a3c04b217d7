use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::geometry::{se3_exp, Pose3, Twist6, Vec3};

/// Drift model of the onboard state estimate, per simulation step.
///
/// The translational error of each step is a slowly wandering bias plus
/// white noise, both in the body frame; rotation gets white noise only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OdometryParams {
    /// White translational noise σ per step (m).
    pub white_translation: [f64; 3],
    /// White rotational noise σ per step (rad), about x, y, z.
    pub white_rotation: [f64; 3],
    /// Random-walk σ of the bias per step (m/step).
    pub bias_walk: [f64; 3],
    pub initial_bias: [f64; 3],
    /// Multiplier on every σ above (not on the initial bias).
    pub scale: f64,
}

impl Default for OdometryParams {
    fn default() -> Self {
        Self {
            white_translation: [1e-3, 1e-3, 2e-4],
            white_rotation: [1e-5, 1e-5, 2e-4],
            bias_walk: [1e-6, 1e-6, 0.0],
            initial_bias: [0.0; 3],
            scale: 1.0,
        }
    }
}

impl OdometryParams {
    pub fn noiseless() -> Self {
        Self {
            white_translation: [0.0; 3],
            white_rotation: [0.0; 3],
            bias_walk: [0.0; 3],
            initial_bias: [0.0; 3],
            scale: 1.0,
        }
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }

    pub fn is_valid(&self) -> bool {
        self.scale >= 0.0
            && self.scale.is_finite()
            && self
                .white_translation
                .iter()
                .chain(&self.white_rotation)
                .chain(&self.bias_walk)
                .all(|s| *s >= 0.0 && s.is_finite())
            && self.initial_bias.iter().all(|b| b.is_finite())
    }
}

#[derive(Debug, Clone)]
pub struct OdometryModel {
    params: OdometryParams,
    bias: Vec3,
    rng: ChaCha8Rng,
}

fn gaussian3(rng: &mut ChaCha8Rng, sigma: &[f64; 3], scale: f64) -> Vec3 {
    let mut v = Vec3::zeros();
    for i in 0..3 {
        let z: f64 = rng.sample(StandardNormal);
        v[i] = z * sigma[i] * scale;
    }
    v
}

impl OdometryModel {
    pub fn new(params: OdometryParams, rng: ChaCha8Rng) -> Self {
        Self {
            bias: Vec3::from(params.initial_bias),
            params,
            rng,
        }
    }

    pub fn params(&self) -> &OdometryParams {
        &self.params
    }

    pub fn bias(&self) -> Vec3 {
        self.bias
    }

    /// Noisy measurement of one step's body-frame motion.
    pub fn step(&mut self, true_delta: &Pose3) -> Pose3 {
        let p = &self.params;
        let omega = gaussian3(&mut self.rng, &p.white_rotation, p.scale);
        let rho = self.bias + gaussian3(&mut self.rng, &p.white_translation, p.scale);
        self.bias += gaussian3(&mut self.rng, &p.bias_walk, p.scale);
        if omega == Vec3::zeros() && rho == Vec3::zeros() {
            return *true_delta;
        }
        true_delta.compose(&se3_exp(&Twist6::new(omega, rho)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn noiseless_is_exact() {
        let mut m = OdometryModel::new(OdometryParams::noiseless(), ChaCha8Rng::seed_from_u64(0));
        let d = Pose3::from_xyz_yaw(0.01, 0.003, 0.0, 0.02);
        assert_eq!(m.step(&d), d);
    }

    #[test]
    fn constant_bias_accumulates_linearly() {
        let params = OdometryParams {
            initial_bias: [0.01, 0.0, 0.0],
            ..OdometryParams::noiseless()
        };
        let mut m = OdometryModel::new(params, ChaCha8Rng::seed_from_u64(0));
        let mut pose = Pose3::identity();
        for _ in 0..100 {
            pose = pose.compose(&m.step(&Pose3::identity()));
        }
        assert!((pose.translation.x - 1.0).abs() < 1e-12);
        assert_eq!(pose.translation.y, 0.0);
    }

    #[test]
    fn same_seed_same_stream() {
        let run = |seed| {
            let mut m = OdometryModel::new(OdometryParams::default(), ChaCha8Rng::seed_from_u64(seed));
            (0..50)
                .map(|_| m.step(&Pose3::identity()).translation)
                .collect::<Vec<_>>()
        };
        assert_eq!(run(3), run(3));
        assert_ne!(run(3), run(4));
    }
}
