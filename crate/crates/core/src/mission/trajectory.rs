use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::MissionError;
use crate::geometry::Vec2;

pub const CIRCLE_POINTS_PER_LAP: usize = 36;
pub const FIGURE8_POINTS_PER_LAP: usize = 72;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ShapeKind {
    Box,
    Circle,
    Figure8,
}

impl ShapeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ShapeKind::Box => "BOX",
            ShapeKind::Circle => "CIRCLE",
            ShapeKind::Figure8 => "FIGURE8",
        }
    }
}

/// Closed flight pattern centered on the origin of its own frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape {
    /// Axis-aligned rectangle.
    Box {
        width: f64,
        height: f64,
    },
    Circle {
        radius: f64,
    },
    /// Gerono lemniscate `x = a·sin t`, `y = b·sin t·cos t`.
    Figure8 {
        a: f64,
        b: f64,
    },
}

impl Shape {
    pub fn kind(&self) -> ShapeKind {
        match self {
            Shape::Box { .. } => ShapeKind::Box,
            Shape::Circle { .. } => ShapeKind::Circle,
            Shape::Figure8 { .. } => ShapeKind::Figure8,
        }
    }

    /// Figure-8 with `b = aspect·a`, scaled so one lap is `lap_length`.
    pub fn figure8_with_lap_length(lap_length: f64, aspect: f64) -> Result<Shape, MissionError> {
        if !(lap_length > 0.0 && aspect > 0.0) {
            return Err(MissionError::InvalidTrajectory(format!(
                "lap_length {lap_length} and aspect {aspect} must be positive"
            )));
        }
        let (mut lo, mut hi) = (0.0, 1.0);
        while (Shape::Figure8 { a: hi, b: aspect * hi }).lap_length() < lap_length {
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if (Shape::Figure8 {
                a: mid,
                b: aspect * mid,
            })
            .lap_length()
                < lap_length
            {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-14 * hi {
                break;
            }
        }
        let a = 0.5 * (lo + hi);
        Ok(Shape::Figure8 { a, b: aspect * a })
    }

    pub fn validate(&self) -> Result<(), MissionError> {
        let ok = match *self {
            Shape::Box { width, height } => width > 0.0 && height > 0.0,
            Shape::Circle { radius } => radius > 0.0,
            Shape::Figure8 { a, b } => a > 0.0 && b > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(MissionError::InvalidTrajectory(format!(
                "non-positive dimension in {self:?}"
            )))
        }
    }

    /// Analytic or numerically integrated length of one lap (m).
    pub fn lap_length(&self) -> f64 {
        match *self {
            Shape::Box { width, height } => 2.0 * (width + height),
            Shape::Circle { radius } => 2.0 * PI * radius,
            Shape::Figure8 { a, b } => {
                let speed = |t: f64| {
                    let dx = a * t.cos();
                    let dy = b * (2.0 * t).cos();
                    dx.hypot(dy)
                };
                integrate(speed, 0.0, 2.0 * PI)
            }
        }
    }

    /// Half extents of the bounding box.
    pub fn half_extent(&self) -> Vec2 {
        match *self {
            Shape::Box { width, height } => Vec2::new(width / 2.0, height / 2.0),
            Shape::Circle { radius } => Vec2::new(radius, radius),
            Shape::Figure8 { a, b } => Vec2::new(a, b / 2.0),
        }
    }

    /// Point where each lap starts and ends.
    pub fn start_point(&self) -> Vec2 {
        match *self {
            Shape::Box { width, height } => Vec2::new(-width / 2.0, -height / 2.0),
            Shape::Circle { radius } => Vec2::new(radius, 0.0),
            Shape::Figure8 { .. } => Vec2::ZERO,
        }
    }

    /// Setpoints of one lap, ending back at [`Shape::start_point`].
    pub fn lap_setpoints(&self) -> Vec<Vec2> {
        match *self {
            Shape::Box { width, height } => {
                let (w, h) = (width / 2.0, height / 2.0);
                vec![Vec2::new(w, -h), Vec2::new(w, h), Vec2::new(-w, h), Vec2::new(-w, -h)]
            }
            Shape::Circle { radius } => (1..=CIRCLE_POINTS_PER_LAP)
                .map(|k| Vec2::from_angle(2.0 * PI * k as f64 / CIRCLE_POINTS_PER_LAP as f64) * radius)
                .collect(),
            Shape::Figure8 { a, b } => (1..=FIGURE8_POINTS_PER_LAP)
                .map(|k| {
                    let t = 2.0 * PI * k as f64 / FIGURE8_POINTS_PER_LAP as f64;
                    Vec2::new(a * t.sin(), b * t.sin() * t.cos())
                })
                .collect(),
        }
    }
}

/// Composite Gauss-Legendre quadrature (5 points on 512 panels).
fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    const NODES: [f64; 5] = [
        0.0,
        -0.538_469_310_105_683_1,
        0.538_469_310_105_683_1,
        -0.906_179_845_938_664,
        0.906_179_845_938_664,
    ];
    const WEIGHTS: [f64; 5] = [
        0.568_888_888_888_888_9,
        0.478_628_670_499_366_5,
        0.478_628_670_499_366_5,
        0.236_926_885_056_189_1,
        0.236_926_885_056_189_1,
    ];
    let panels = 512;
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|i| {
            let mid = a + (i as f64 + 0.5) * h;
            NODES
                .iter()
                .zip(WEIGHTS)
                .map(|(x, w)| w * f(mid + 0.5 * h * x))
                .sum::<f64>()
                * 0.5
                * h
        })
        .sum()
}

/// Rectangle `[min, max]` the flight area is confined to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bounds {
    pub min: Vec2,
    pub max: Vec2,
}

impl Bounds {
    pub fn contains(&self, p: Vec2) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySpec {
    pub shape: Shape,
    pub center: Vec2,
    pub laps: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// World-frame setpoints; the path starts at `start`.
    pub setpoints: Vec<Vec2>,
    pub start: Vec2,
    /// `laps × lap length` (m).
    pub length: f64,
}

pub fn generate_trajectory(spec: &TrajectorySpec, arena: Option<&Bounds>) -> Result<Trajectory, MissionError> {
    spec.shape.validate()?;
    if spec.laps == 0 {
        return Err(MissionError::InvalidTrajectory("laps must be at least 1".into()));
    }
    if let Some(b) = arena {
        let e = spec.shape.half_extent();
        let lo = spec.center - e;
        let hi = spec.center + e;
        if !b.contains(lo) || !b.contains(hi) {
            return Err(MissionError::InvalidTrajectory(format!(
                "{} spanning {lo:?}..{hi:?} leaves the arena {:?}..{:?}",
                spec.shape.kind().as_str(),
                b.min,
                b.max
            )));
        }
    }
    let lap: Vec<Vec2> = spec
        .shape
        .lap_setpoints()
        .into_iter()
        .map(|p| p + spec.center)
        .collect();
    let setpoints = (0..spec.laps).flat_map(|_| lap.iter().copied()).collect();
    Ok(Trajectory {
        setpoints,
        start: spec.shape.start_point() + spec.center,
        length: spec.laps as f64 * spec.shape.lap_length(),
    })
}
