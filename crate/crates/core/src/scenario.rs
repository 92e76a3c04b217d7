//! Scenario file format.
//!
//! A scenario is a single YAML document. Every parameter block can be
//! omitted and falls back to its defaults; see `docs/scenario.md` for the
//! full schema.

use std::collections::BTreeSet;
use std::path::Path;

use serde::Deserialize;
use thiserror::Error;

use crate::geometry::polygon::{contains_strict, signed_area, validate_ccw};
use crate::geometry::{Pose3, Vec2};
use crate::latency::PipelineTiming;
use crate::mission::{
    generate_trajectory, Action, Bounds, MissionPlan, MissionTask, Shape, ShapeKind, Sync, Target, TrajectorySpec,
};
use crate::orca::OrcaParams;
use crate::planner::Planner;
use crate::sensors::{CameraModel, OdometryParams};
use crate::slam::{EstimatorSettings, Landmark};
use crate::vehicle::VehicleParams;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at line {line}, column {column}: {path}: {message}")]
    Parse {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
}

fn invalid<T>(path: impl Into<String>, message: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError::Invalid {
        path: path.into(),
        message: message.into(),
    })
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObstacleConfig {
    #[serde(default)]
    pub name: Option<String>,
    /// Vertices in either winding; stored counter-clockwise after loading.
    pub polygon: Vec<Vec2>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SiteConfig {
    #[serde(default)]
    pub name: Option<String>,
    /// Id of the first marker; a site reserves two consecutive ids.
    pub tag_id: u32,
    pub position: [f64; 3],
    /// Direction the markers face (degrees, CCW from +x).
    pub yaw_deg: f64,
    #[serde(default = "default_markers")]
    pub markers: u8,
    /// Lateral distance between the two markers of a dual site (m).
    #[serde(default = "default_spacing")]
    pub spacing: f64,
}

fn default_markers() -> u8 {
    2
}

fn default_spacing() -> f64 {
    0.3
}

impl SiteConfig {
    pub fn landmark(&self) -> Landmark {
        let [x, y, z] = self.position;
        let half = self.spacing / 2.0;
        let marker_offsets = match self.markers {
            0 => vec![],
            1 => vec![Pose3::identity()],
            _ => vec![
                Pose3::from_translation(0.0, -half, 0.0),
                Pose3::from_translation(0.0, half, 0.0),
            ],
        };
        Landmark {
            tag_id: self.tag_id,
            world_pose: Pose3::from_xyz_yaw(x, y, z, self.yaw_deg.to_radians()),
            marker_offsets,
        }
    }

    fn label(&self, i: usize) -> String {
        match &self.name {
            Some(n) => format!("landmarks[{i}] ({n})"),
            None => format!("landmarks[{i}]"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UavConfig {
    pub id: usize,
    pub start: Vec2,
    #[serde(default)]
    pub yaw_deg: f64,
    #[serde(default = "default_radius")]
    pub radius: f64,
    /// Defaults to `vehicle.max_speed`.
    #[serde(default)]
    pub max_speed: Option<f64>,
}

fn default_radius() -> f64 {
    0.1
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlannerConfig {
    /// Clearance added around obstacles before planning (m).
    pub margin: f64,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self { margin: 0.275 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(untagged)]
enum TargetConfig {
    Id(usize),
    Name(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
enum ActionKind {
    Takeoff,
    Goto,
    Trajectory,
    Hover,
    Land,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
enum SyncConfig {
    Barrier,
    Independent,
}

/// Shape parameters shared by mission tasks and ablation entries.
#[derive(Debug, Clone, Copy, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShapeConfig {
    pub shape: Option<ShapeKind>,
    /// BOX: square side (m).
    pub side: Option<f64>,
    /// BOX: `[width, height]` (m).
    pub size: Option<Vec2>,
    /// CIRCLE radius (m).
    pub radius: Option<f64>,
    /// FIGURE8: length of one lap (m).
    pub lap_length: Option<f64>,
    /// FIGURE8: half width `a` (m), as an alternative to `lap_length`.
    pub amplitude: Option<f64>,
    /// FIGURE8: `b / a`, default 2.
    pub aspect: Option<f64>,
    pub laps: Option<usize>,
    pub center: Option<Vec2>,
}

impl ShapeConfig {
    pub fn spec(&self, path: &str) -> Result<TrajectorySpec, ConfigError> {
        let Some(kind) = self.shape else {
            return invalid(format!("{path}.shape"), "required for TRAJECTORY");
        };
        let require = |v: Option<f64>, key: &str| match v {
            Some(x) if x > 0.0 && x.is_finite() => Ok(x),
            Some(x) => invalid(format!("{path}.{key}"), format!("must be positive, got {x}")),
            None => invalid(format!("{path}.{key}"), format!("required for {}", kind.as_str())),
        };
        let shape = match kind {
            ShapeKind::Box => match (self.side, self.size) {
                (Some(_), Some(_)) => return invalid(format!("{path}.side"), "give either side or size"),
                (_, Some(s)) => Shape::Box {
                    width: require(Some(s.x), "size")?,
                    height: require(Some(s.y), "size")?,
                },
                (side, None) => {
                    let s = require(side, "side")?;
                    Shape::Box { width: s, height: s }
                }
            },
            ShapeKind::Circle => Shape::Circle {
                radius: require(self.radius, "radius")?,
            },
            ShapeKind::Figure8 => {
                let aspect = match self.aspect {
                    None => 2.0,
                    a => require(a, "aspect")?,
                };
                match (self.lap_length, self.amplitude) {
                    (Some(_), Some(_)) => {
                        return invalid(format!("{path}.lap_length"), "give either lap_length or amplitude")
                    }
                    (None, Some(a)) => {
                        let a = require(Some(a), "amplitude")?;
                        Shape::Figure8 { a, b: aspect * a }
                    }
                    (l, None) => Shape::figure8_with_lap_length(require(l, "lap_length")?, aspect).map_err(|e| {
                        ConfigError::Invalid {
                            path: format!("{path}.lap_length"),
                            message: e.to_string(),
                        }
                    })?,
                }
            }
        };
        let laps = self.laps.unwrap_or(1);
        if laps == 0 {
            return invalid(format!("{path}.laps"), "must be at least 1");
        }
        Ok(TrajectorySpec {
            shape,
            center: self.center.unwrap_or(Vec2::ZERO),
            laps,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskConfig {
    #[serde(default)]
    target: Option<TargetConfig>,
    action: ActionKind,
    #[serde(default)]
    sync: Option<SyncConfig>,
    /// TAKEOFF altitude (m).
    #[serde(default)]
    height: Option<f64>,
    #[serde(default)]
    setpoint: Option<Vec2>,
    /// HOVER time (s).
    #[serde(default)]
    duration: Option<f64>,
    #[serde(default, rename = "trajectory")]
    shape: Option<ShapeConfig>,
}

impl TaskConfig {
    fn to_task(&self, path: &str) -> Result<MissionTask, ConfigError> {
        let target = match &self.target {
            None => Target::All,
            Some(TargetConfig::Id(i)) => Target::Uav(*i),
            Some(TargetConfig::Name(s)) if s.eq_ignore_ascii_case("all") => Target::All,
            Some(TargetConfig::Name(s)) => {
                return invalid(format!("{path}.target"), format!("expected a uav id or ALL, got {s:?}"))
            }
        };
        let sync = match self.sync {
            None => Sync::default(),
            Some(SyncConfig::Barrier) => Sync::Barrier,
            Some(SyncConfig::Independent) => Sync::Independent,
        };
        let unexpected = |key: &str, present: bool| {
            if present {
                invalid(format!("{path}.{key}"), format!("not used by {:?}", self.action))
            } else {
                Ok(())
            }
        };
        let action = match self.action {
            ActionKind::Takeoff => {
                let Some(height) = self.height else {
                    return invalid(format!("{path}.height"), "required for TAKEOFF");
                };
                if !(height > 0.0 && height.is_finite()) {
                    return invalid(format!("{path}.height"), format!("must be positive, got {height}"));
                }
                Action::Takeoff { height }
            }
            ActionKind::Goto => {
                let Some(setpoint) = self.setpoint else {
                    return invalid(format!("{path}.setpoint"), "required for GOTO");
                };
                Action::Goto { setpoint }
            }
            ActionKind::Trajectory => {
                let Some(shape) = &self.shape else {
                    return invalid(format!("{path}.trajectory"), "required for TRAJECTORY");
                };
                Action::Trajectory(shape.spec(&format!("{path}.trajectory"))?)
            }
            ActionKind::Hover => {
                let Some(duration) = self.duration else {
                    return invalid(format!("{path}.duration"), "required for HOVER");
                };
                if !(duration >= 0.0 && duration.is_finite()) {
                    return invalid(
                        format!("{path}.duration"),
                        format!("must be non-negative, got {duration}"),
                    );
                }
                Action::Hover { duration }
            }
            ActionKind::Land => Action::Land,
        };
        unexpected("height", self.height.is_some() && self.action != ActionKind::Takeoff)?;
        unexpected("setpoint", self.setpoint.is_some() && self.action != ActionKind::Goto)?;
        unexpected("duration", self.duration.is_some() && self.action != ActionKind::Hover)?;
        unexpected(
            "trajectory",
            self.shape.is_some() && self.action != ActionKind::Trajectory,
        )?;
        Ok(MissionTask { target, action, sync })
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AblationTrajectory {
    pub trajectory: ShapeConfig,
    /// Odometry noise multiplier used for this trajectory.
    #[serde(default = "one")]
    pub odometry_scale: f64,
    /// No-tag MSE the drift is calibrated to (m²).
    #[serde(default)]
    pub target_mse: Option<f64>,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AblationConfig {
    pub seeds: usize,
    pub trajectories: Vec<AblationTrajectory>,
}

impl Default for AblationConfig {
    fn default() -> Self {
        let entry = |shape: ShapeConfig, target: f64| AblationTrajectory {
            trajectory: ShapeConfig { laps: Some(3), ..shape },
            odometry_scale: 1.0,
            target_mse: Some(target),
        };
        Self {
            seeds: 20,
            trajectories: vec![
                entry(
                    ShapeConfig {
                        shape: Some(ShapeKind::Box),
                        side: Some(2.368),
                        ..Default::default()
                    },
                    0.25,
                ),
                entry(
                    ShapeConfig {
                        shape: Some(ShapeKind::Circle),
                        radius: Some(1.9715),
                        ..Default::default()
                    },
                    0.24,
                ),
                entry(
                    ShapeConfig {
                        shape: Some(ShapeKind::Figure8),
                        lap_length: Some(16.773),
                        ..Default::default()
                    },
                    0.64,
                ),
            ],
        }
    }
}

fn default_avoidance_margin() -> f64 {
    0.05
}

fn default_tick_rate() -> f64 {
    20.0
}

fn default_max_duration() -> f64 {
    1200.0
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub seed: u64,
    /// Simulation ticks per second.
    #[serde(default = "default_tick_rate")]
    pub tick_rate: f64,
    /// Simulated seconds before an unfinished mission counts as failed.
    #[serde(default = "default_max_duration")]
    pub max_duration: f64,
    pub arena: Bounds,
    #[serde(default)]
    pub obstacles: Vec<ObstacleConfig>,
    #[serde(default)]
    pub landmarks: Vec<SiteConfig>,
    pub uavs: Vec<UavConfig>,
    pub mission: Vec<TaskConfig>,
    #[serde(default)]
    pub camera: CameraModel,
    #[serde(default)]
    pub odometry: OdometryParams,
    #[serde(default)]
    pub latency: PipelineTiming,
    #[serde(default)]
    pub orca: OrcaParams,
    /// Extra radius each UAV claims in collision avoidance to absorb
    /// localization error and velocity lag (m).
    #[serde(default = "default_avoidance_margin")]
    pub avoidance_margin: f64,
    #[serde(default)]
    pub estimator: EstimatorSettings,
    #[serde(default)]
    pub vehicle: VehicleParams,
    #[serde(default)]
    pub planner: PlannerConfig,
    #[serde(default)]
    pub ablation: AblationConfig,
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario, ConfigError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_scenario(&text)
}

pub fn parse_scenario(text: &str) -> Result<Scenario, ConfigError> {
    let de = serde_yaml::Deserializer::from_str(text);
    let mut scenario: Scenario = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        let (line, column) = inner.location().map(|l| (l.line(), l.column())).unwrap_or((0, 0));
        ConfigError::Parse {
            path,
            line,
            column,
            message: inner.to_string(),
        }
    })?;
    scenario.normalize();
    scenario.validate()?;
    Ok(scenario)
}

impl Scenario {
    fn normalize(&mut self) {
        for o in &mut self.obstacles {
            if signed_area(&o.polygon) < 0.0 {
                o.polygon.reverse();
            }
        }
    }

    pub fn obstacle_polygons(&self) -> Vec<Vec<Vec2>> {
        self.obstacles.iter().map(|o| o.polygon.clone()).collect()
    }

    pub fn landmarks(&self) -> Vec<Landmark> {
        self.landmarks
            .iter()
            .map(SiteConfig::landmark)
            .filter(|l| !l.marker_offsets.is_empty())
            .collect()
    }

    pub fn max_speed(&self, uav: &UavConfig) -> f64 {
        uav.max_speed.unwrap_or(self.vehicle.max_speed)
    }

    pub fn tasks(&self) -> Result<Vec<MissionTask>, ConfigError> {
        self.mission
            .iter()
            .enumerate()
            .map(|(k, t)| t.to_task(&format!("mission[{k}]")))
            .collect()
    }

    pub fn plan(&self) -> Result<MissionPlan, ConfigError> {
        let starts = self.uavs.iter().map(|u| (u.id, u.start)).collect();
        MissionPlan::new(self.tasks()?, starts, Some(self.arena)).map_err(|e| ConfigError::Invalid {
            path: "mission".into(),
            message: e.to_string(),
        })
    }

    /// Sets the marker count of every landmark site.
    pub fn set_markers(&mut self, markers: u8) {
        for s in &mut self.landmarks {
            s.markers = markers;
        }
    }

    /// Replaces the path of every TRAJECTORY task with `shape`.
    pub fn set_trajectory(&mut self, shape: &ShapeConfig) {
        for t in &mut self.mission {
            if t.action == ActionKind::Trajectory {
                t.shape = Some(*shape);
            }
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.tick_rate > 0.0 && self.tick_rate.is_finite()) {
            return invalid("tick_rate", format!("must be positive, got {}", self.tick_rate));
        }
        if !(self.max_duration > 0.0 && self.max_duration.is_finite()) {
            return invalid("max_duration", format!("must be positive, got {}", self.max_duration));
        }
        let a = &self.arena;
        if !(a.min.is_finite() && a.max.is_finite() && a.min.x < a.max.x && a.min.y < a.max.y) {
            return invalid("arena", "min must be below max in both axes");
        }
        for (i, o) in self.obstacles.iter().enumerate() {
            validate_ccw(&o.polygon).map_err(|e| ConfigError::Invalid {
                path: format!("obstacles[{i}].polygon"),
                message: e.to_string(),
            })?;
            if let Some(v) = o.polygon.iter().find(|v| !a.contains(**v)) {
                return invalid(
                    format!("obstacles[{i}].polygon"),
                    format!("vertex {v:?} outside the arena"),
                );
            }
        }
        let obstacle_label = |j: usize| match &self.obstacles[j].name {
            Some(n) => format!("obstacles[{j}] ({n})"),
            None => format!("obstacles[{j}]"),
        };
        let mut tags = BTreeSet::new();
        for (i, s) in self.landmarks.iter().enumerate() {
            let path = format!("landmarks[{i}]");
            if !s.position.iter().all(|x| x.is_finite()) || !s.yaw_deg.is_finite() {
                return invalid(format!("{path}.position"), "must be finite");
            }
            let p = Vec2::new(s.position[0], s.position[1]);
            if !a.contains(p) {
                return invalid(format!("{path}.position"), format!("{p:?} outside the arena"));
            }
            if s.markers > 2 {
                return invalid(
                    format!("{path}.markers"),
                    format!("must be 0, 1 or 2, got {}", s.markers),
                );
            }
            if !(s.spacing > 0.0 && s.spacing.is_finite()) {
                return invalid(
                    format!("{path}.spacing"),
                    format!("must be positive, got {}", s.spacing),
                );
            }
            if let Some(j) = self.obstacles.iter().position(|o| contains_strict(&o.polygon, p)) {
                return invalid(
                    format!("{path}.position"),
                    format!("{} lies inside {}", s.label(i), obstacle_label(j)),
                );
            }
            for id in [s.tag_id, s.tag_id.wrapping_add(1)] {
                if !tags.insert(id) {
                    return invalid(
                        format!("{path}.tag_id"),
                        format!("tag id {id} already used by another site"),
                    );
                }
            }
        }
        if self.uavs.is_empty() {
            return invalid("uavs", "at least one UAV is required");
        }
        let mut ids = BTreeSet::new();
        for (i, u) in self.uavs.iter().enumerate() {
            let path = format!("uavs[{i}]");
            if !ids.insert(u.id) {
                return invalid(format!("{path}.id"), format!("duplicate id {}", u.id));
            }
            if !a.contains(u.start) {
                return invalid(format!("{path}.start"), format!("{:?} outside the arena", u.start));
            }
            if let Some(j) = self.obstacles.iter().position(|o| contains_strict(&o.polygon, u.start)) {
                return invalid(format!("{path}.start"), format!("inside {}", obstacle_label(j)));
            }
            if !(u.radius > 0.0 && u.radius.is_finite()) {
                return invalid(format!("{path}.radius"), format!("must be positive, got {}", u.radius));
            }
            let v = self.max_speed(u);
            if !(v > 0.0 && v.is_finite()) {
                return invalid(format!("{path}.max_speed"), format!("must be positive, got {v}"));
            }
        }
        self.camera.validate().map_err(|m| ConfigError::Invalid {
            path: "camera".into(),
            message: m,
        })?;
        if !self.odometry.is_valid() {
            return invalid("odometry", "noise parameters must be finite and non-negative");
        }
        self.latency.validate().map_err(|m| ConfigError::Invalid {
            path: "latency".into(),
            message: m,
        })?;
        let o = &self.orca;
        for (key, v) in [
            ("time_horizon", o.time_horizon),
            ("time_step", o.time_step),
            ("obstacle_spacing", o.obstacle_spacing),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return invalid(format!("orca.{key}"), format!("must be positive, got {v}"));
            }
        }
        if !(self.avoidance_margin >= 0.0 && self.avoidance_margin.is_finite()) {
            return invalid("avoidance_margin", "must be non-negative");
        }
        let e = &self.estimator;
        if e.window == 1 {
            return invalid("estimator.window", "must be 0 (full batch) or at least 2");
        }
        if !e
            .odometry_sigma
            .to_vec6()
            .iter()
            .chain(e.initial_sigma.to_vec6().iter())
            .all(|s| *s > 0.0 && s.is_finite())
        {
            return invalid("estimator", "noise sigmas must be positive");
        }
        let v = &self.vehicle;
        for (key, x) in [
            ("max_speed", v.max_speed),
            ("velocity_time_constant", v.velocity_time_constant),
            ("gain", v.gain),
            ("climb_rate", v.climb_rate),
            ("arrival_radius", v.arrival_radius),
            ("final_arrival_radius", v.final_arrival_radius),
        ] {
            if !(x > 0.0 && x.is_finite()) {
                return invalid(format!("vehicle.{key}"), format!("must be positive, got {x}"));
            }
        }
        if !(self.planner.margin >= 0.0 && self.planner.margin.is_finite()) {
            return invalid("planner.margin", "must be non-negative");
        }
        for (k, t) in self.ablation.trajectories.iter().enumerate() {
            let path = format!("ablation.trajectories[{k}]");
            t.trajectory.spec(&format!("{path}.trajectory"))?;
            if !(t.odometry_scale >= 0.0 && t.odometry_scale.is_finite()) {
                return invalid(format!("{path}.odometry_scale"), "must be non-negative");
            }
        }
        let plan = self.plan()?;
        let planner =
            Planner::new(&self.obstacle_polygons(), self.planner.margin).map_err(|e| ConfigError::Invalid {
                path: "obstacles".into(),
                message: e.to_string(),
            })?;
        for (k, task) in plan.tasks().iter().enumerate() {
            let points = match &task.action {
                Action::Goto { setpoint } => vec![*setpoint],
                Action::Trajectory(spec) => generate_trajectory(spec, None).map(|t| t.setpoints).unwrap_or_default(),
                _ => continue,
            };
            if let Some(p) = points.iter().find(|p| planner.is_blocked(**p)) {
                return invalid(
                    format!("mission[{k}]"),
                    format!("setpoint {p:?} is within planner.margin of an obstacle"),
                );
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
arena: {min: [-2, -2], max: [2, 2]}
uavs:
  - {id: 0, start: [0, 0]}
mission:
  - {action: TAKEOFF, height: 0.8}
  - {action: LAND}
"#;

    #[test]
    fn minimal_file_gets_defaults() {
        let s = parse_scenario(MINIMAL).unwrap();
        assert_eq!(s.tick_rate, 20.0);
        assert_eq!(s.camera, CameraModel::default());
        assert_eq!(s.vehicle, VehicleParams::default());
        assert_eq!(s.uavs[0].radius, 0.1);
        assert_eq!(s.plan().unwrap().tasks().len(), 2);
    }

    #[test]
    fn landmark_inside_obstacle_names_both() {
        let text = format!(
            "{MINIMAL}obstacles:\n  - {{name: crate, polygon: [[0.5, 0.5], [1, 0.5], [1, 1], [0.5, 1]]}}\nlandmarks:\n  - {{name: north, tag_id: 0, position: [0.7, 0.7, 0.8], yaw_deg: 0}}\n"
        );
        let err = parse_scenario(&text).unwrap_err().to_string();
        assert!(err.contains("landmarks[0]") && err.contains("north"), "{err}");
        assert!(err.contains("obstacles[0]") && err.contains("crate"), "{err}");
    }

    #[test]
    fn unknown_key_reports_path_and_location() {
        let text = MINIMAL.replace("{id: 0, start: [0, 0]}", "{id: 0, start: [0, 0], colour: red}");
        match parse_scenario(&text).unwrap_err() {
            ConfigError::Parse { path, line, .. } => {
                assert_eq!(path, "uavs[0].colour");
                assert_eq!(line, 4);
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn validation_errors_name_key_path() {
        let cases = [
            (MINIMAL.replace("height: 0.8", "height: -1"), "mission[0].height"),
            (format!("{MINIMAL}tick_rate: 0\n"), "tick_rate"),
            (format!("{MINIMAL}camera: {{max_range: 0.1}}\n"), "camera"),
            (MINIMAL.replace("start: [0, 0]", "start: [5, 0]"), "uavs[0].start"),
        ];
        for (text, path) in cases {
            let err = parse_scenario(&text).unwrap_err().to_string();
            assert!(err.starts_with(path), "{err} should start with {path}");
        }
    }

    #[test]
    fn clockwise_obstacles_are_reoriented() {
        let text = format!("{MINIMAL}obstacles:\n  - {{polygon: [[0.5, 0.5], [0.5, 1], [1, 1], [1, 0.5]]}}\n");
        let s = parse_scenario(&text).unwrap();
        assert!(signed_area(&s.obstacles[0].polygon) > 0.0);
    }

    #[test]
    fn trajectory_task_parses() {
        let text = MINIMAL.replace(
            "  - {action: LAND}",
            "  - {action: TRAJECTORY, trajectory: {shape: FIGURE8, lap_length: 16.773, laps: 3}}\n  - {action: LAND}",
        );
        let s = parse_scenario(&text).unwrap();
        let tasks = s.tasks().unwrap();
        let Action::Trajectory(spec) = &tasks[1].action else {
            panic!("expected a trajectory");
        };
        assert!((spec.shape.lap_length() - 16.773).abs() < 1e-9);
        assert_eq!(spec.laps, 3);
    }
}
