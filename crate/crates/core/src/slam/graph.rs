use serde::{Deserialize, Serialize};

use super::factor::{Factor, FactorKind};
use super::solver::BlockTridiagonal;
use super::SlamError;
use crate::geometry::{Pose3, Twist6, Vec6};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GnSettings {
    pub max_iterations: usize,
    pub cost_tolerance: f64,
    pub step_tolerance: f64,
    /// Times a cost-increasing step is halved before giving up.
    pub max_halvings: usize,
}

impl Default for GnSettings {
    fn default() -> Self {
        Self {
            max_iterations: 100,
            cost_tolerance: 1e-9,
            step_tolerance: 1e-8,
            max_halvings: 8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizeReport {
    pub iterations: usize,
    pub initial_cost: f64,
    pub final_cost: f64,
    pub converged: bool,
    /// Total step halvings across all iterations.
    pub halvings: usize,
}

/// Pose-only factor graph with fixed landmarks.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FactorGraph {
    pub poses: Vec<Pose3>,
    pub factors: Vec<Factor>,
    pub settings: GnSettings,
}

impl FactorGraph {
    pub fn new(poses: Vec<Pose3>) -> Self {
        Self {
            poses,
            factors: Vec::new(),
            settings: GnSettings::default(),
        }
    }

    pub fn add(&mut self, factor: Factor) -> Result<(), SlamError> {
        let n = self.poses.len();
        let (a, b) = factor.variables();
        if a >= n || b.is_some_and(|b| b >= n) {
            return Err(SlamError::InvalidFactor(format!(
                "{:?} references a missing pose",
                factor.variables()
            )));
        }
        if let Some(b) = b {
            if b != a + 1 {
                return Err(SlamError::InvalidFactor(format!(
                    "odometry must join consecutive poses, got {a} -> {b}"
                )));
            }
        }
        if !factor.sigma().iter().all(|s| *s > 0.0 && s.is_finite()) {
            return Err(SlamError::InvalidFactor(format!(
                "non-positive sigma {:?}",
                factor.sigma()
            )));
        }
        self.factors.push(factor);
        Ok(())
    }

    pub fn cost_at(&self, poses: &[Pose3]) -> Result<f64, SlamError> {
        let mut total = 0.0;
        for f in &self.factors {
            total += f.cost(poses)?;
        }
        Ok(total)
    }

    pub fn cost(&self) -> Result<f64, SlamError> {
        self.cost_at(&self.poses)
    }

    pub fn count(&self, kind: FactorKind) -> usize {
        self.factors.iter().filter(|f| f.kind() == kind).count()
    }

    /// Gauss-Newton normal equations `H δ = -g` at `poses`.
    pub fn normal_equations(&self, poses: &[Pose3]) -> Result<(BlockTridiagonal, Vec<Vec6>), SlamError> {
        let n = poses.len();
        let mut h = BlockTridiagonal::zeros(n);
        let mut g = vec![Vec6::zeros(); n];
        for f in &self.factors {
            let lin = f.linearize(poses)?;
            let (i, ji) = lin.first;
            h.diag[i] += ji.transpose() * ji;
            g[i] += ji.transpose() * lin.residual;
            if let Some((j, jj)) = lin.second {
                if j != i + 1 {
                    return Err(SlamError::InvalidFactor(format!(
                        "odometry must join consecutive poses, got {i} -> {j}"
                    )));
                }
                h.diag[j] += jj.transpose() * jj;
                g[j] += jj.transpose() * lin.residual;
                h.upper[i] += ji.transpose() * jj;
            }
        }
        Ok((h, g))
    }

    /// Nonlinear least squares by Gauss-Newton with step halving.
    ///
    /// The cost never increases between accepted iterates; if eight
    /// halvings cannot reduce it the current poses are kept and the loop
    /// stops.
    pub fn optimize(&mut self) -> Result<OptimizeReport, SlamError> {
        let s = self.settings;
        let initial_cost = self.cost()?;
        let mut cost = initial_cost;
        let mut report = OptimizeReport {
            iterations: 0,
            initial_cost,
            final_cost: initial_cost,
            converged: false,
            halvings: 0,
        };
        if self.poses.is_empty() {
            report.converged = true;
            return Ok(report);
        }
        while report.iterations < s.max_iterations {
            report.iterations += 1;
            let (h, g) = self.normal_equations(&self.poses)?;
            let neg_g: Vec<Vec6> = g.iter().map(|v| -v).collect();
            let delta = h.solve(&neg_g).ok_or(SlamError::Singular)?;
            let step_norm = delta.iter().map(|d| d.amax()).fold(0.0, f64::max);

            let mut scale = 1.0;
            let mut accepted = None;
            for attempt in 0..=s.max_halvings {
                let trial: Vec<Pose3> = self
                    .poses
                    .iter()
                    .zip(&delta)
                    .map(|(p, d)| p.retract(&Twist6::from_vector(&(d * scale))))
                    .collect();
                // A trial step can land on a rotation of π; treat that like a
                // cost increase.
                if let Ok(c) = self.cost_at(&trial) {
                    if c <= cost {
                        accepted = Some((trial, c));
                        break;
                    }
                }
                if attempt < s.max_halvings {
                    scale *= 0.5;
                    report.halvings += 1;
                }
            }
            let Some((trial, new_cost)) = accepted else {
                report.converged = true;
                break;
            };
            self.poses = trial;
            let decrease = cost - new_cost;
            cost = new_cost;
            if decrease.abs() < s.cost_tolerance || step_norm * scale < s.step_tolerance {
                report.converged = true;
                break;
            }
        }
        report.final_cost = cost;
        Ok(report)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Vec3;

    #[test]
    fn two_pose_closed_form() {
        let mut g = FactorGraph::new(vec![Pose3::identity(), Pose3::identity()]);
        g.add(Factor::Prior {
            pose: 0,
            measurement: Pose3::identity(),
            sigma: Vec6::repeat(1.0),
        })
        .unwrap();
        g.add(Factor::Odometry {
            from: 0,
            to: 1,
            measurement: Pose3::from_translation(1.0, 0.0, 0.0),
            sigma: Vec6::repeat(1.0),
        })
        .unwrap();
        let r = g.optimize().unwrap();
        assert!(r.converged);
        assert!(r.final_cost < 1e-20);
        assert!((g.poses[1].translation - Vec3::new(1.0, 0.0, 0.0)).amax() < 1e-9);
        assert!(g.poses[0].translation.amax() < 1e-9);
    }

    #[test]
    fn unanchored_chain_is_singular() {
        let mut g = FactorGraph::new(vec![Pose3::identity(), Pose3::identity()]);
        g.add(Factor::Odometry {
            from: 0,
            to: 1,
            measurement: Pose3::from_translation(1.0, 0.0, 0.0),
            sigma: Vec6::repeat(1.0),
        })
        .unwrap();
        assert!(matches!(g.optimize(), Err(SlamError::Singular)));
    }

    #[test]
    fn rejects_bad_factors() {
        let mut g = FactorGraph::new(vec![Pose3::identity(); 3]);
        let skip = Factor::Odometry {
            from: 0,
            to: 2,
            measurement: Pose3::identity(),
            sigma: Vec6::repeat(1.0),
        };
        assert!(g.add(skip).is_err());
        let missing = Factor::Prior {
            pose: 3,
            measurement: Pose3::identity(),
            sigma: Vec6::repeat(1.0),
        };
        assert!(g.add(missing).is_err());
        let zero_sigma = Factor::Prior {
            pose: 0,
            measurement: Pose3::identity(),
            sigma: Vec6::zeros(),
        };
        assert!(g.add(zero_sigma).is_err());
    }
}
