//! Mission plans and the task manager that drives each UAV through them.

mod manager;
mod trajectory;

use std::collections::BTreeSet;

use thiserror::Error;

use crate::geometry::Vec2;
use crate::planner::{path_length, Planner, PlannerError};
use crate::vehicle::VehicleParams;

pub use manager::{TaskManager, TaskRecord, UavCommand};
pub use trajectory::{
    generate_trajectory, Bounds, Shape, ShapeKind, Trajectory, TrajectorySpec, CIRCLE_POINTS_PER_LAP,
    FIGURE8_POINTS_PER_LAP,
};

#[derive(Debug, Error)]
pub enum MissionError {
    #[error("invalid trajectory: {0}")]
    InvalidTrajectory(String),
    #[error("invalid plan: {0}")]
    InvalidPlan(String),
    #[error("plan violation: uav {uav} task {task}: {reason}")]
    PlanViolation { uav: usize, task: usize, reason: String },
    #[error("uav {uav} task {task}: {source}")]
    Planner {
        uav: usize,
        task: usize,
        #[source]
        source: PlannerError,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    All,
    Uav(usize),
}

impl Target {
    pub fn includes(self, id: usize) -> bool {
        match self {
            Target::All => true,
            Target::Uav(u) => u == id,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Sync {
    /// Starts only once every targeted UAV has finished its previous task.
    Barrier,
    #[default]
    Independent,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Action {
    Takeoff { height: f64 },
    Goto { setpoint: Vec2 },
    Trajectory(TrajectorySpec),
    Hover { duration: f64 },
    Land,
}

impl Action {
    pub fn name(&self) -> &'static str {
        match self {
            Action::Takeoff { .. } => "TAKEOFF",
            Action::Goto { .. } => "GOTO",
            Action::Trajectory(_) => "TRAJECTORY",
            Action::Hover { .. } => "HOVER",
            Action::Land => "LAND",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MissionTask {
    pub target: Target,
    pub action: Action,
    pub sync: Sync,
}

impl MissionTask {
    pub fn new(target: Target, action: Action) -> Self {
        Self {
            target,
            action,
            sync: Sync::default(),
        }
    }

    pub fn barrier(mut self) -> Self {
        self.sync = Sync::Barrier;
        self
    }
}

#[derive(Debug, Clone)]
pub struct MissionPlan {
    tasks: Vec<MissionTask>,
    /// UAV ids with their start positions.
    starts: Vec<(usize, Vec2)>,
    arena: Option<Bounds>,
}

impl MissionPlan {
    pub fn new(
        tasks: Vec<MissionTask>,
        starts: Vec<(usize, Vec2)>,
        arena: Option<Bounds>,
    ) -> Result<Self, MissionError> {
        let plan = Self { tasks, starts, arena };
        plan.validate()?;
        Ok(plan)
    }

    pub fn tasks(&self) -> &[MissionTask] {
        &self.tasks
    }

    pub fn starts(&self) -> &[(usize, Vec2)] {
        &self.starts
    }

    pub fn arena(&self) -> Option<&Bounds> {
        self.arena.as_ref()
    }

    /// Indices of the tasks addressed to `id`, in plan order.
    pub fn schedule(&self, id: usize) -> Vec<usize> {
        (0..self.tasks.len())
            .filter(|&k| self.tasks[k].target.includes(id))
            .collect()
    }

    fn validate(&self) -> Result<(), MissionError> {
        let invalid = |m: String| Err(MissionError::InvalidPlan(m));
        let mut ids = BTreeSet::new();
        for &(id, _) in &self.starts {
            if !ids.insert(id) {
                return invalid(format!("duplicate uav id {id}"));
            }
        }
        for (k, task) in self.tasks.iter().enumerate() {
            if let Target::Uav(id) = task.target {
                if !ids.contains(&id) {
                    return invalid(format!("task {k} targets unknown uav {id}"));
                }
            }
            match &task.action {
                Action::Takeoff { height } if !(*height > 0.0 && height.is_finite()) => {
                    return invalid(format!("task {k}: takeoff height must be positive, got {height}"));
                }
                Action::Hover { duration } if !(*duration >= 0.0 && duration.is_finite()) => {
                    return invalid(format!("task {k}: hover duration must be non-negative, got {duration}"));
                }
                Action::Goto { setpoint } => {
                    if !setpoint.is_finite() {
                        return invalid(format!("task {k}: setpoint must be finite"));
                    }
                    if let Some(b) = &self.arena {
                        if !b.contains(*setpoint) {
                            return invalid(format!("task {k}: setpoint {setpoint:?} outside the arena"));
                        }
                    }
                }
                Action::Trajectory(spec) => {
                    generate_trajectory(spec, self.arena.as_ref())
                        .map_err(|e| MissionError::InvalidPlan(format!("task {k}: {e}")))?;
                }
                _ => {}
            }
        }
        for &(id, _) in &self.starts {
            let schedule = self.schedule(id);
            let (Some(&first), Some(&last)) = (schedule.first(), schedule.last()) else {
                return invalid(format!("uav {id} has no tasks"));
            };
            if !matches!(self.tasks[first].action, Action::Takeoff { .. }) {
                return invalid(format!("uav {id}: first task must be TAKEOFF"));
            }
            if !matches!(self.tasks[last].action, Action::Land) {
                return invalid(format!("uav {id}: last task must be LAND"));
            }
        }
        Ok(())
    }

    /// Analytic mission duration: every task takes as long as its slowest
    /// target, flying planned paths under the ideal proportional
    /// controller, plus the velocity lag once per leg.
    pub fn time_bound(&self, vehicle: &VehicleParams, planner: &Planner) -> f64 {
        let mut pos: Vec<Vec2> = self.starts.iter().map(|s| s.1).collect();
        let mut alt = vec![0.0; pos.len()];
        let leg = |a: Vec2, b: Vec2| {
            let d = planner.plan(a, b).map(|p| path_length(&p)).unwrap_or(a.distance(b));
            approach_time(d, vehicle.final_arrival_radius, vehicle) + vehicle.velocity_time_constant
        };
        let mut total = 0.0;
        for task in &self.tasks {
            let mut longest: f64 = 0.0;
            for (u, &(id, _)) in self.starts.iter().enumerate() {
                if !task.target.includes(id) {
                    continue;
                }
                let d = match &task.action {
                    Action::Takeoff { height } => {
                        let d = (height - alt[u]).abs() / vehicle.climb_rate;
                        alt[u] = *height;
                        d
                    }
                    Action::Land => {
                        let d = alt[u] / vehicle.climb_rate;
                        alt[u] = 0.0;
                        d
                    }
                    Action::Hover { duration } => *duration,
                    Action::Goto { setpoint } => {
                        let d = leg(pos[u], *setpoint);
                        pos[u] = *setpoint;
                        d
                    }
                    // Intermediate setpoints are flown through at cruise, so
                    // the whole lap is one approach plus a lag per corner.
                    Action::Trajectory(spec) => match generate_trajectory(spec, None) {
                        Ok(traj) => {
                            let mut length = 0.0;
                            for &s in &traj.setpoints {
                                length += planner
                                    .plan(pos[u], s)
                                    .map(|p| path_length(&p))
                                    .unwrap_or(pos[u].distance(s));
                                pos[u] = s;
                            }
                            approach_time(length, vehicle.final_arrival_radius, vehicle)
                                + traj.setpoints.len() as f64 * vehicle.velocity_time_constant
                        }
                        Err(_) => 0.0,
                    },
                };
                longest = longest.max(d);
            }
            total += longest;
        }
        total
    }
}

/// Time for `v = min(v_max, gain·e)` to shrink a distance `d` to `radius`.
pub fn approach_time(d: f64, radius: f64, vehicle: &VehicleParams) -> f64 {
    if d <= radius {
        return 0.0;
    }
    let knee = vehicle.max_speed / vehicle.gain;
    if d > knee {
        (d - knee) / vehicle.max_speed + (knee / radius).max(1.0).ln() / vehicle.gain
    } else {
        (d / radius).ln() / vehicle.gain
    }
}
