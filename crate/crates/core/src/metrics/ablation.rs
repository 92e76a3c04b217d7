use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{mse, AblationReport};
use crate::mission::ShapeKind;
use crate::scenario::{AblationTrajectory, ConfigError, Scenario};
use crate::sim::simulate;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TagConfig {
    #[serde(rename = "no_tag")]
    NoTag,
    #[serde(rename = "1_tag")]
    OneTag,
    #[serde(rename = "2_tags")]
    TwoTags,
}

impl TagConfig {
    pub const ALL: [TagConfig; 3] = [TagConfig::NoTag, TagConfig::OneTag, TagConfig::TwoTags];

    pub fn markers(self) -> u8 {
        match self {
            TagConfig::NoTag => 0,
            TagConfig::OneTag => 1,
            TagConfig::TwoTags => 2,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            TagConfig::NoTag => "no_tag",
            TagConfig::OneTag => "1_tag",
            TagConfig::TwoTags => "2_tags",
        }
    }
}

#[derive(Debug, Error)]
pub enum AblationError {
    #[error("scenario has no landmark sites")]
    NoLandmarks,
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error("run ({}, {}, seed {seed}) failed: {message}", .trajectory.as_str(), .config.label())]
    Run {
        trajectory: ShapeKind,
        config: TagConfig,
        seed: u64,
        message: String,
    },
}

/// One cell of the ablation grid with a concrete seed.
#[derive(Debug, Clone)]
pub struct AblationRun {
    pub trajectory: ShapeKind,
    pub config: TagConfig,
    pub seed: u64,
    pub scenario: Scenario,
}

impl AblationRun {
    pub fn new(base: &Scenario, entry: &AblationTrajectory, config: TagConfig, seed: u64) -> Result<Self, ConfigError> {
        let spec = entry.trajectory.spec("ablation.trajectory")?;
        let mut scenario = base.clone();
        scenario.set_trajectory(&entry.trajectory);
        scenario.set_markers(config.markers());
        scenario.odometry.scale = entry.odometry_scale;
        scenario.seed = seed;
        Ok(Self {
            trajectory: spec.shape.kind(),
            config,
            seed,
            scenario,
        })
    }

    /// Mission MSE of this run.
    pub fn mse(&self) -> Result<f64, AblationError> {
        let fail = |message: String| AblationError::Run {
            trajectory: self.trajectory,
            config: self.config,
            seed: self.seed,
            message,
        };
        let out = simulate(&self.scenario)?;
        if let Some(f) = out.failure {
            return Err(fail(f));
        }
        mse(&out.log).map_err(|e| fail(e.to_string()))
    }
}

/// Every trajectory of `base.ablation` under each tag configuration and
/// seed. Runs execute in parallel; the report is in grid order.
pub fn run_ablation(base: &Scenario, seeds: &[u64]) -> Result<AblationReport, AblationError> {
    if base.landmarks.is_empty() {
        return Err(AblationError::NoLandmarks);
    }
    let mut runs = Vec::new();
    for entry in &base.ablation.trajectories {
        for config in TagConfig::ALL {
            for &seed in seeds {
                runs.push(AblationRun::new(base, entry, config, seed)?);
            }
        }
    }
    let results: Vec<f64> = runs.par_iter().map(AblationRun::mse).collect::<Result<_, _>>()?;
    let mut samples: Vec<(ShapeKind, TagConfig, Vec<f64>)> = Vec::new();
    for (run, value) in runs.iter().zip(results) {
        match samples.last_mut() {
            Some((t, c, v)) if *t == run.trajectory && *c == run.config => v.push(value),
            _ => samples.push((run.trajectory, run.config, vec![value])),
        }
    }
    Ok(AblationReport::from_samples(samples))
}
