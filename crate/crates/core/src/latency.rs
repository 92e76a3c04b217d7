//! Timing of the marker-correction pipeline.
//!
//! Frames are captured periodically and become available to the processor
//! after the transfer delay. The processor handles one frame at a time and,
//! whenever it is free, takes the newest frame that has arrived; frames it
//! never gets to are dropped. A correction is applied when processing ends.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineTiming {
    /// Seconds between captures.
    pub capture_period: f64,
    /// Frames per second the link delivers; a frame needs `1/rate` to arrive.
    pub transfer_rate: f64,
    /// Seconds to detect markers in one frame.
    pub processing_time: f64,
}

impl Default for PipelineTiming {
    fn default() -> Self {
        Self {
            capture_period: 0.066,
            transfer_rate: 8.5,
            processing_time: 0.163,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correction {
    pub capture_time: f64,
    pub apply_time: f64,
}

impl PipelineTiming {
    /// Captures are fused as soon as they are taken.
    pub fn instantaneous(capture_period: f64) -> Self {
        Self {
            capture_period,
            transfer_rate: f64::INFINITY,
            processing_time: 0.0,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.capture_period > 0.0 && self.capture_period.is_finite()) {
            return Err(format!("capture_period must be positive, got {}", self.capture_period));
        }
        if !(self.transfer_rate > 0.0) {
            return Err(format!("transfer_rate must be positive, got {}", self.transfer_rate));
        }
        if !(self.processing_time >= 0.0 && self.processing_time.is_finite()) {
            return Err(format!(
                "processing_time must be non-negative, got {}",
                self.processing_time
            ));
        }
        Ok(())
    }

    pub fn transfer_delay(&self) -> f64 {
        1.0 / self.transfer_rate
    }

    /// Steady-state correction rate (Hz).
    pub fn nominal_rate(&self) -> f64 {
        1.0 / self.capture_period.max(self.processing_time)
    }
}

/// Every admitted capture with its apply time, for captures in
/// `[0, duration)`.
pub fn schedule_corrections(timing: &PipelineTiming, duration: f64) -> Vec<Correction> {
    let period = timing.capture_period;
    let delay = timing.transfer_delay();
    let capture = |k: u64| k as f64 * period;
    let mut out = Vec::new();
    let mut free_at = 0.0_f64;
    let mut next: u64 = 0;
    loop {
        if capture(next) >= duration {
            break;
        }
        // Newest frame already delivered when the processor frees up.
        let arrived = ((free_at - delay) / period).floor();
        let k = if arrived >= next as f64 {
            let k = arrived as u64;
            // Guard against rounding pushing the index past a capture that
            // has not arrived yet.
            if capture(k) + delay > free_at {
                k.saturating_sub(1).max(next)
            } else {
                k
            }
        } else {
            next
        };
        let c = capture(k);
        if c >= duration {
            break;
        }
        let start = free_at.max(c + delay);
        let apply = start + timing.processing_time;
        out.push(Correction {
            capture_time: c,
            apply_time: apply,
        });
        free_at = apply;
        next = k + 1;
    }
    out
}

/// Mean rate of corrections applied within `[from, to)`.
pub fn observed_rate(corrections: &[Correction], from: f64, to: f64) -> f64 {
    let n = corrections
        .iter()
        .filter(|c| c.apply_time >= from && c.apply_time < to)
        .count();
    n as f64 / (to - from)
}
