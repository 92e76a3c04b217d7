use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::geometry::polygon::segment_crosses_interior;
use crate::geometry::{se3_exp, Pose3, Rot3, Twist6, Vec2, Vec3, Vec6};
use crate::slam::{Landmark, Observation};

/// Camera placement on the body.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Mount {
    pub translation: [f64; 3],
    pub yaw_deg: f64,
    pub pitch_deg: f64,
}

impl Default for Mount {
    fn default() -> Self {
        Self {
            translation: [0.0; 3],
            yaw_deg: 0.0,
            pitch_deg: 0.0,
        }
    }
}

impl Mount {
    /// Body → camera transform.
    pub fn pose(&self) -> Pose3 {
        let yaw = Rot3::from_yaw(self.yaw_deg.to_radians());
        let pitch = Rot3::exp(&Vec3::new(0.0, self.pitch_deg.to_radians(), 0.0));
        Pose3::new(yaw * pitch, Vec3::from(self.translation))
    }
}

/// Forward-looking frustum camera. The optical axis is camera +x, with +y
/// left and +z up, matching the body frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CameraModel {
    pub horizontal_half_fov_deg: f64,
    pub vertical_half_fov_deg: f64,
    pub min_range: f64,
    pub max_range: f64,
    pub mount: Mount,
    /// Dropout probability at `min_range`.
    pub dropout_base: f64,
    /// Dropout probability at `max_range`; linear in between.
    pub dropout_far: f64,
    pub noise_translation: f64,
    pub noise_rotation: f64,
    /// Noise grows as `σ₀·(1 + k·range)`.
    pub range_coefficient: f64,
}

impl Default for CameraModel {
    fn default() -> Self {
        Self {
            horizontal_half_fov_deg: 45.0,
            vertical_half_fov_deg: 35.0,
            min_range: 0.2,
            max_range: 2.5,
            mount: Mount::default(),
            dropout_base: 0.1,
            dropout_far: 0.5,
            noise_translation: 0.02,
            noise_rotation: 0.01,
            range_coefficient: 0.3,
        }
    }
}

/// Marker pose relative to the camera, as a detector would report it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TagObservation {
    pub tag_id: u32,
    pub relative: Pose3,
    pub range: f64,
    pub timestamp: f64,
}

impl CameraModel {
    pub fn ideal() -> Self {
        Self {
            dropout_base: 0.0,
            dropout_far: 0.0,
            noise_translation: 0.0,
            noise_rotation: 0.0,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        let fov_ok = |d: f64| d > 0.0 && d < 90.0;
        if !fov_ok(self.horizontal_half_fov_deg) || !fov_ok(self.vertical_half_fov_deg) {
            return Err("half fields of view must lie in (0, 90) degrees".into());
        }
        if !(self.min_range >= 0.0 && self.min_range < self.max_range) {
            return Err(format!(
                "need 0 <= min_range < max_range, got {} and {}",
                self.min_range, self.max_range
            ));
        }
        for (name, p) in [("dropout_base", self.dropout_base), ("dropout_far", self.dropout_far)] {
            if !(0.0..1.0).contains(&p) && !(name == "dropout_far" && p == 1.0) {
                return Err(format!("{name} must lie in [0, 1), got {p}"));
            }
        }
        if !(self.noise_translation >= 0.0 && self.noise_rotation >= 0.0 && self.range_coefficient >= 0.0) {
            return Err("noise parameters must be non-negative".into());
        }
        Ok(())
    }

    pub fn dropout_at(&self, range: f64) -> f64 {
        let span = self.max_range - self.min_range;
        let frac = ((range - self.min_range) / span).clamp(0.0, 1.0);
        self.dropout_base + (self.dropout_far - self.dropout_base) * frac
    }

    /// Noise σ in tangent order `(ω, ρ)` at `range`.
    pub fn sigma_at(&self, range: f64) -> Vec6 {
        let g = 1.0 + self.range_coefficient * range;
        let r = self.noise_rotation * g;
        let t = self.noise_translation * g;
        Vec6::new(r, r, r, t, t, t)
    }

    /// Geometric visibility of a marker from a camera pose: range, field of
    /// view, facing and line of sight.
    pub fn sees(&self, camera: &Pose3, marker: &Pose3, obstacles: &[Vec<Vec2>]) -> Option<f64> {
        let rel = camera.between(marker).translation;
        let range = rel.norm();
        if range < self.min_range || range > self.max_range || rel.x <= 0.0 {
            return None;
        }
        let h = rel.y.atan2(rel.x).abs();
        let v = rel.z.atan2(rel.x).abs();
        if h > self.horizontal_half_fov_deg.to_radians() || v > self.vertical_half_fov_deg.to_radians() {
            return None;
        }
        let normal = marker.rotation.rotate(&Vec3::x());
        if normal.dot(&(marker.translation - camera.translation)) >= 0.0 {
            return None;
        }
        let a = Vec2::new(camera.translation.x, camera.translation.y);
        let b = Vec2::new(marker.translation.x, marker.translation.y);
        if obstacles.iter().any(|p| segment_crosses_interior(p, a, b)) {
            return None;
        }
        Some(range)
    }

    /// Simulated detections from a body pose.
    ///
    /// Every marker consumes the same number of random draws whether or not
    /// it is visible, so with a fixed seed the detections are monotone in
    /// dropout and range settings.
    pub fn detect<R: Rng>(
        &self,
        body: &Pose3,
        landmarks: &[Landmark],
        obstacles: &[Vec<Vec2>],
        timestamp: f64,
        rng: &mut R,
    ) -> Vec<TagObservation> {
        let camera = body.compose(&self.mount.pose());
        let mut out = Vec::new();
        for site in landmarks {
            for (tag_id, marker) in site.markers() {
                let u: f64 = rng.gen();
                let mut z = Vec6::zeros();
                for i in 0..6 {
                    z[i] = rng.sample(StandardNormal);
                }
                let Some(range) = self.sees(&camera, &marker, obstacles) else {
                    continue;
                };
                if u < self.dropout_at(range) {
                    continue;
                }
                let truth = camera.between(&marker);
                let xi = z.component_mul(&self.sigma_at(range));
                let relative = if xi == Vec6::zeros() {
                    truth
                } else {
                    truth.compose(&se3_exp(&Twist6::from_vector(&xi)))
                };
                out.push(TagObservation {
                    tag_id,
                    relative,
                    range,
                    timestamp,
                });
            }
        }
        out
    }

    /// Converts detections into body-frame estimator observations.
    pub fn to_observations(&self, detections: &[TagObservation], landmarks: &[Landmark]) -> Vec<Observation> {
        let mount = self.mount.pose();
        detections
            .iter()
            .filter_map(|d| {
                let landmark = landmarks
                    .iter()
                    .flat_map(|l| l.markers())
                    .find(|(id, _)| *id == d.tag_id)?
                    .1;
                Some(Observation {
                    tag_id: d.tag_id,
                    landmark,
                    measurement: mount.compose(&d.relative),
                    sigma: self.sigma_at(d.range),
                })
            })
            .collect()
    }
}
