//! Fixed-lag smoother over the most recent poses.
//!
//! Between corrections the newest pose is dead reckoned from odometry. When
//! a batch of landmark observations arrives it is attached to the pose at
//! its capture step and the whole window is re-optimized. Poses leaving the
//! window are folded into a diagonal prior on the new oldest pose.

use std::collections::VecDeque;

use nalgebra::SMatrix;
use serde::{Deserialize, Serialize};

use super::factor::Factor;
use super::graph::{FactorGraph, GnSettings, OptimizeReport};
use super::SlamError;
use crate::geometry::{Mat6, Pose3, Vec6};

/// Per-axis standard deviations, split by rotation and translation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSigma {
    /// Radians about x, y, z.
    pub rotation: [f64; 3],
    /// Meters along x, y, z.
    pub translation: [f64; 3],
}

impl NoiseSigma {
    pub fn uniform(rotation: f64, translation: f64) -> Self {
        Self {
            rotation: [rotation; 3],
            translation: [translation; 3],
        }
    }

    /// Tangent-ordered `(ω, ρ)` vector.
    pub fn to_vec6(&self) -> Vec6 {
        let [a, b, c] = self.rotation;
        let [d, e, f] = self.translation;
        Vec6::new(a, b, c, d, e, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimatorSettings {
    /// Pose variables kept in the window; 0 keeps every pose.
    pub window: usize,
    pub odometry_sigma: NoiseSigma,
    pub initial_sigma: NoiseSigma,
    pub gauss_newton: GnSettings,
}

impl Default for EstimatorSettings {
    fn default() -> Self {
        Self {
            window: 50,
            odometry_sigma: NoiseSigma {
                rotation: [0.01; 3],
                translation: [0.02, 0.02, 0.005],
            },
            initial_sigma: NoiseSigma::uniform(0.01, 0.01),
            gauss_newton: GnSettings::default(),
        }
    }
}

/// One marker sighting converted to the body frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub tag_id: u32,
    /// World pose of the observed marker.
    pub landmark: Pose3,
    /// Marker pose relative to the body.
    pub measurement: Pose3,
    pub sigma: Vec6,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EstimatorStats {
    /// Batches that triggered an optimization.
    pub corrections: usize,
    /// Observations whose capture pose had already left the window.
    pub stale_observations: usize,
    pub last_report: Option<OptimizeReport>,
}

#[derive(Debug, Clone)]
pub struct SlidingWindowEstimator {
    settings: EstimatorSettings,
    /// Step index of `poses[0]`.
    first: usize,
    poses: VecDeque<Pose3>,
    /// `odometry[k]` joins `poses[k]` and `poses[k + 1]`.
    odometry: VecDeque<Pose3>,
    observations: VecDeque<(usize, Observation)>,
    prior: (Pose3, Vec6),
    stats: EstimatorStats,
}

impl SlidingWindowEstimator {
    pub fn new(initial: Pose3, settings: EstimatorSettings) -> Self {
        Self {
            settings,
            first: 0,
            poses: VecDeque::from([initial]),
            odometry: VecDeque::new(),
            observations: VecDeque::new(),
            prior: (initial, settings.initial_sigma.to_vec6()),
            stats: EstimatorStats::default(),
        }
    }

    pub fn settings(&self) -> &EstimatorSettings {
        &self.settings
    }

    pub fn stats(&self) -> &EstimatorStats {
        &self.stats
    }

    /// Step index of the newest pose.
    pub fn step(&self) -> usize {
        self.first + self.poses.len() - 1
    }

    pub fn oldest_step(&self) -> usize {
        self.first
    }

    pub fn estimate(&self) -> Pose3 {
        *self.poses.back().expect("window is never empty")
    }

    pub fn estimate_at(&self, step: usize) -> Option<Pose3> {
        step.checked_sub(self.first).and_then(|k| self.poses.get(k)).copied()
    }

    /// Appends a pose dead reckoned from `delta` and returns its step.
    pub fn push_odometry(&mut self, delta: Pose3) -> usize {
        let next = self.estimate().compose(&delta);
        self.poses.push_back(next);
        self.odometry.push_back(delta);
        let window = self.settings.window;
        while window > 0 && self.poses.len() > window.max(2) {
            self.marginalize_oldest();
        }
        self.step()
    }

    fn marginalize_oldest(&mut self) {
        let x0 = self.poses[0];
        let x1 = self.poses[1];
        let odo_sigma = self.settings.odometry_sigma.to_vec6();
        let mut local = vec![
            Factor::Prior {
                pose: 0,
                measurement: self.prior.0,
                sigma: self.prior.1,
            },
            Factor::Odometry {
                from: 0,
                to: 1,
                measurement: self.odometry[0],
                sigma: odo_sigma,
            },
        ];
        while self.observations.front().is_some_and(|(s, _)| *s == self.first) {
            let (_, o) = self.observations.pop_front().expect("checked");
            local.push(landmark_factor(0, &o));
        }
        let sigma = schur_sigma(&local, &[x0, x1]).unwrap_or_else(|| {
            (self.prior.1.component_mul(&self.prior.1) + odo_sigma.component_mul(&odo_sigma)).map(f64::sqrt)
        });
        self.prior = (x1, sigma);
        self.poses.pop_front();
        self.odometry.pop_front();
        self.first += 1;
    }

    /// Attaches observations captured at `capture_step` and re-optimizes.
    ///
    /// Returns `None` when nothing usable was added.
    pub fn add_observations(
        &mut self,
        capture_step: usize,
        observations: &[Observation],
    ) -> Result<Option<OptimizeReport>, SlamError> {
        if observations.is_empty() {
            return Ok(None);
        }
        if capture_step < self.first {
            self.stats.stale_observations += observations.len();
            return Ok(None);
        }
        if capture_step > self.step() {
            return Err(SlamError::InvalidFactor(format!(
                "observation captured at step {capture_step} after newest pose {}",
                self.step()
            )));
        }
        let at = self.observations.partition_point(|(s, _)| *s <= capture_step);
        for (k, o) in observations.iter().enumerate() {
            self.observations.insert(at + k, (capture_step, *o));
        }
        let mut graph = self.graph();
        let report = graph.optimize()?;
        for (dst, src) in self.poses.iter_mut().zip(graph.poses) {
            *dst = src;
        }
        self.stats.corrections += 1;
        self.stats.last_report = Some(report);
        Ok(Some(report))
    }

    /// Snapshot of the current window as a factor graph (local indices).
    pub fn graph(&self) -> FactorGraph {
        let mut g = FactorGraph::new(self.poses.iter().copied().collect());
        g.settings = self.settings.gauss_newton;
        g.factors.reserve(self.odometry.len() + self.observations.len() + 1);
        g.factors.push(Factor::Prior {
            pose: 0,
            measurement: self.prior.0,
            sigma: self.prior.1,
        });
        let odo_sigma = self.settings.odometry_sigma.to_vec6();
        for (k, z) in self.odometry.iter().enumerate() {
            g.factors.push(Factor::Odometry {
                from: k,
                to: k + 1,
                measurement: *z,
                sigma: odo_sigma,
            });
        }
        for (s, o) in &self.observations {
            g.factors.push(landmark_factor(s - self.first, o));
        }
        g
    }
}

fn landmark_factor(pose: usize, o: &Observation) -> Factor {
    Factor::Landmark {
        pose,
        tag_id: o.tag_id,
        landmark: o.landmark,
        measurement: o.measurement,
        sigma: o.sigma,
    }
}

/// Marginal standard deviations of pose 1 after eliminating pose 0 from
/// the given two-pose factors.
fn schur_sigma(factors: &[Factor], poses: &[Pose3; 2]) -> Option<Vec6> {
    let mut h = SMatrix::<f64, 12, 12>::zeros();
    for f in factors {
        let lin = f.linearize(poses).ok()?;
        let mut j = SMatrix::<f64, 6, 12>::zeros();
        j.fixed_view_mut::<6, 6>(0, 6 * lin.first.0).copy_from(&lin.first.1);
        if let Some((k, jk)) = lin.second {
            j.fixed_view_mut::<6, 6>(0, 6 * k).copy_from(&jk);
        }
        h += j.transpose() * j;
    }
    let h00: Mat6 = h.fixed_view::<6, 6>(0, 0).into();
    let h01: Mat6 = h.fixed_view::<6, 6>(0, 6).into();
    let h11: Mat6 = h.fixed_view::<6, 6>(6, 6).into();
    let h00_inv = h00.cholesky()?.inverse();
    let lambda = h11 - h01.transpose() * h00_inv * h01;
    let cov = lambda.cholesky()?.inverse();
    let sigma = cov.diagonal().map(|v| v.max(0.0).sqrt());
    sigma.iter().all(|s| *s > 0.0 && s.is_finite()).then_some(sigma)
}

/// Observations captured at `capture_step` and fused at `apply_step`.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationBatch {
    pub capture_step: usize,
    pub apply_step: usize,
    pub observations: Vec<Observation>,
}

/// Runs the estimator over recorded streams. Element `k` of the result is
/// the estimate of step `k` after every batch applied at or before `k`.
pub fn run_estimator(
    initial: Pose3,
    odometry: &[Pose3],
    batches: &[ObservationBatch],
    settings: EstimatorSettings,
) -> Result<Vec<Pose3>, SlamError> {
    let mut est = SlidingWindowEstimator::new(initial, settings);
    let mut order: Vec<&ObservationBatch> = batches.iter().collect();
    order.sort_by_key(|b| (b.apply_step, b.capture_step));
    let mut pending = order.into_iter().peekable();
    let mut out = Vec::with_capacity(odometry.len() + 1);
    for step in 0..=odometry.len() {
        if step > 0 {
            est.push_odometry(odometry[step - 1]);
        }
        while let Some(b) = pending.next_if(|b| b.apply_step <= step) {
            est.add_observations(b.capture_step, &b.observations)?;
        }
        out.push(est.estimate());
    }
    Ok(out)
}
