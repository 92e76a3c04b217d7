//! Ground-truth comparison, MSE statistics and the tag ablation harness.

mod ablation;
mod log;

pub use ablation::{run_ablation, AblationError, AblationRun, TagConfig};
pub use log::{LogError, LogRecord, TrajectoryLog, CSV_HEADER};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mission::ShapeKind;
use crate::vehicle::FlightMode;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("empty-log: no FLYING records{}", .0.map(|u| format!(" for uav {u}")).unwrap_or_default())]
    EmptyLog(Option<usize>),
}

/// Mean over FLYING records of the squared 3D position error (m²).
pub fn mse(log: &TrajectoryLog) -> Result<f64, MetricsError> {
    mean_sq(log.records().iter().filter(|r| r.mode == FlightMode::Flying)).ok_or(MetricsError::EmptyLog(None))
}

pub fn mse_for(log: &TrajectoryLog, uav: usize) -> Result<f64, MetricsError> {
    mean_sq(
        log.records()
            .iter()
            .filter(|r| r.uav == uav && r.mode == FlightMode::Flying),
    )
    .ok_or(MetricsError::EmptyLog(Some(uav)))
}

/// Horizontal-only variant of [`mse`].
pub fn mse_2d(log: &TrajectoryLog) -> Result<f64, MetricsError> {
    let (sum, n) = log
        .records()
        .iter()
        .filter(|r| r.mode == FlightMode::Flying)
        .fold((0.0, 0usize), |(s, n), r| {
            let dx = r.estimate[0] - r.truth[0];
            let dy = r.estimate[1] - r.truth[1];
            (s + dx * dx + dy * dy, n + 1)
        });
    if n == 0 {
        return Err(MetricsError::EmptyLog(None));
    }
    Ok(sum / n as f64)
}

/// Largest 3D position error over FLYING records.
pub fn max_error(log: &TrajectoryLog) -> Result<f64, MetricsError> {
    log.records()
        .iter()
        .filter(|r| r.mode == FlightMode::Flying)
        .map(|r| r.error_sq().sqrt())
        .reduce(f64::max)
        .ok_or(MetricsError::EmptyLog(None))
}

fn mean_sq<'a>(records: impl Iterator<Item = &'a LogRecord>) -> Option<f64> {
    let (sum, n) = records.fold((0.0, 0usize), |(s, n), r| (s + r.error_sq(), n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// Relative improvement of `value` over `baseline`, in percent.
pub fn improvement_pct(baseline: f64, value: f64) -> f64 {
    100.0 * (baseline - value) / baseline
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellStats {
    pub mean: f64,
    /// Sample standard deviation (zero for a single seed).
    pub std: f64,
    pub seeds: usize,
    pub per_seed: Vec<f64>,
}

impl CellStats {
    pub fn from_samples(samples: &[f64]) -> Self {
        let n = samples.len();
        let mean = samples.iter().sum::<f64>() / n as f64;
        let std = if n > 1 {
            (samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        Self {
            mean,
            std,
            seeds: n,
            per_seed: samples.to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationCell {
    pub trajectory: ShapeKind,
    pub config: TagConfig,
    pub mse: CellStats,
    /// Improvement over the no-tag cell of the same trajectory (%).
    pub improvement_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct AblationReport {
    pub cells: Vec<AblationCell>,
}

impl AblationReport {
    /// Builds cells from per-seed MSE samples, filling improvements.
    pub fn from_samples(samples: Vec<(ShapeKind, TagConfig, Vec<f64>)>) -> Self {
        let mut cells: Vec<AblationCell> = samples
            .into_iter()
            .map(|(trajectory, config, s)| AblationCell {
                trajectory,
                config,
                mse: CellStats::from_samples(&s),
                improvement_pct: 0.0,
            })
            .collect();
        let baselines: Vec<(ShapeKind, f64)> = cells
            .iter()
            .filter(|c| c.config == TagConfig::NoTag)
            .map(|c| (c.trajectory, c.mse.mean))
            .collect();
        for c in &mut cells {
            if let Some((_, base)) = baselines.iter().find(|(t, _)| *t == c.trajectory) {
                c.improvement_pct = improvement_pct(*base, c.mse.mean);
            }
        }
        Self { cells }
    }

    pub fn cell(&self, trajectory: ShapeKind, config: TagConfig) -> Option<&AblationCell> {
        self.cells
            .iter()
            .find(|c| c.trajectory == trajectory && c.config == config)
    }

    /// Aligned text table: one row per tag configuration, one column per
    /// trajectory, `mean(±std)` in m².
    pub fn to_table(&self) -> String {
        let mut trajectories: Vec<ShapeKind> = Vec::new();
        let mut configs: Vec<TagConfig> = Vec::new();
        for c in &self.cells {
            if !trajectories.contains(&c.trajectory) {
                trajectories.push(c.trajectory);
            }
            if !configs.contains(&c.config) {
                configs.push(c.config);
            }
        }
        let cell_text = |t, c| {
            self.cell(t, c)
                .map(|x| format!("{:.3}(±{:.3})", x.mse.mean, x.mse.std))
                .unwrap_or_else(|| "-".into())
        };
        let mut rows = vec![std::iter::once("MSE (m²)".to_string())
            .chain(trajectories.iter().map(|t| t.as_str().to_string()))
            .collect::<Vec<_>>()];
        for &c in &configs {
            rows.push(
                std::iter::once(c.label().to_string())
                    .chain(trajectories.iter().map(|&t| cell_text(t, c)))
                    .collect(),
            );
        }
        for &c in configs.iter().filter(|c| **c != TagConfig::NoTag) {
            rows.push(
                std::iter::once(format!("improvement {}", c.label()))
                    .chain(trajectories.iter().map(|&t| {
                        self.cell(t, c)
                            .map(|x| format!("{:.1}%", x.improvement_pct))
                            .unwrap_or_else(|| "-".into())
                    }))
                    .collect(),
            );
        }
        let widths: Vec<usize> = (0..rows[0].len())
            .map(|i| rows.iter().map(|r| r[i].chars().count()).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        for r in &rows {
            let line: Vec<String> = r
                .iter()
                .zip(&widths)
                .enumerate()
                .map(|(i, (s, w))| {
                    let pad = w - s.chars().count();
                    if i == 0 {
                        format!("{s}{}", " ".repeat(pad))
                    } else {
                        format!("{}{s}", " ".repeat(pad))
                    }
                })
                .collect();
            out.push_str(line.join("  ").trim_end());
            out.push('\n');
        }
        out
    }
}
