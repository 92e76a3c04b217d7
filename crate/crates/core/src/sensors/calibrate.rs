use rayon::prelude::*;
use thiserror::Error;

use super::OdometryParams;
use crate::metrics::{AblationError, AblationRun, TagConfig};
use crate::scenario::{AblationTrajectory, Scenario};

/// Relative MSE error at which the search stops early.
const STOP_TOLERANCE: f64 = 0.05;
/// Relative MSE error still accepted when iterations run out.
const ACCEPT_TOLERANCE: f64 = 0.25;

#[derive(Debug, Error)]
pub enum CalibrationError {
    #[error("target MSE must be positive, got {0}")]
    BadTarget(f64),
    #[error("uncalibratable: {0}")]
    Uncalibratable(String),
    #[error(transparent)]
    Run(#[from] AblationError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Calibration {
    pub odometry: OdometryParams,
    /// Mean no-tag MSE at the chosen scale (m²).
    pub mse: f64,
    pub evaluations: usize,
}

/// Mean no-tag MSE across `seeds` with the odometry noise scaled by `scale`.
pub fn no_tag_mse(
    base: &Scenario,
    entry: &AblationTrajectory,
    scale: f64,
    seeds: &[u64],
) -> Result<f64, AblationError> {
    let entry = AblationTrajectory {
        odometry_scale: scale,
        ..entry.clone()
    };
    let runs: Vec<AblationRun> = seeds
        .iter()
        .map(|&s| AblationRun::new(base, &entry, TagConfig::NoTag, s))
        .collect::<Result<_, _>>()?;
    let values: Vec<f64> = runs.par_iter().map(AblationRun::mse).collect::<Result<_, _>>()?;
    Ok(values.iter().sum::<f64>() / values.len() as f64)
}

/// Bisection on the odometry noise scale so the mean no-tag MSE over
/// `seeds` matches `target_mse`. Scale 0 gives MSE 0, so only the upper
/// end of the bracket is searched for, by doubling.
pub fn calibrate_drift(
    base: &Scenario,
    entry: &AblationTrajectory,
    target_mse: f64,
    seeds: &[u64],
    iterations: usize,
) -> Result<Calibration, CalibrationError> {
    if !(target_mse > 0.0 && target_mse.is_finite()) {
        return Err(CalibrationError::BadTarget(target_mse));
    }
    let mut evaluations = 0;
    let mut eval = |scale: f64| {
        evaluations += 1;
        no_tag_mse(base, entry, scale, seeds)
    };
    let rel = |m: f64| (m - target_mse).abs() / target_mse;

    let mut lo = 0.0;
    let mut hi = if entry.odometry_scale > 0.0 {
        entry.odometry_scale
    } else {
        1.0
    };
    let mut best = (f64::NAN, f64::INFINITY);
    let mut used = 0;
    loop {
        let m = eval(hi)?;
        used += 1;
        if rel(m) < rel(best.1) {
            best = (hi, m);
        }
        if rel(m) <= STOP_TOLERANCE {
            return Ok(finish(base, hi, m, evaluations));
        }
        if m >= target_mse {
            break;
        }
        if used >= iterations {
            return Err(CalibrationError::Uncalibratable(format!(
                "MSE {m:.4} at scale {hi} still below target {target_mse} after {used} evaluations"
            )));
        }
        lo = hi;
        hi *= 2.0;
    }
    while used < iterations {
        let mid = 0.5 * (lo + hi);
        let m = eval(mid)?;
        used += 1;
        if rel(m) < rel(best.1) {
            best = (mid, m);
        }
        if rel(m) <= STOP_TOLERANCE {
            return Ok(finish(base, mid, m, evaluations));
        }
        if m < target_mse {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if rel(best.1) <= ACCEPT_TOLERANCE {
        Ok(finish(base, best.0, best.1, evaluations))
    } else {
        Err(CalibrationError::Uncalibratable(format!(
            "closest MSE {:.4} at scale {} is not within 25% of {target_mse}",
            best.1, best.0
        )))
    }
}

fn finish(base: &Scenario, scale: f64, mse: f64, evaluations: usize) -> Calibration {
    Calibration {
        odometry: base.odometry.with_scale(scale),
        mse,
        evaluations,
    }
}
