//! Kinematic UAV with lagged velocity tracking.

use serde::{Deserialize, Serialize};

use crate::geometry::{Pose3, Vec2};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FlightMode {
    Idle,
    Takeoff,
    Flying,
    Landing,
    Landed,
}

impl FlightMode {
    pub fn as_str(self) -> &'static str {
        match self {
            FlightMode::Idle => "IDLE",
            FlightMode::Takeoff => "TAKEOFF",
            FlightMode::Flying => "FLYING",
            FlightMode::Landing => "LANDING",
            FlightMode::Landed => "LANDED",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            FlightMode::Idle,
            FlightMode::Takeoff,
            FlightMode::Flying,
            FlightMode::Landing,
            FlightMode::Landed,
        ]
        .into_iter()
        .find(|m| m.as_str() == s)
    }

    pub fn is_airborne(self) -> bool {
        matches!(self, FlightMode::Takeoff | FlightMode::Flying | FlightMode::Landing)
    }

    /// Edges of the mode graph (self-loops are always allowed).
    pub fn can_transition(self, to: FlightMode) -> bool {
        use FlightMode::*;
        self == to
            || matches!(
                (self, to),
                (Idle, Takeoff) | (Takeoff, Flying) | (Flying, Landing) | (Landing, Landed) | (Landed, Takeoff)
            )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VehicleParams {
    pub max_speed: f64,
    /// Velocity tracking time constant (s).
    pub velocity_time_constant: f64,
    /// Proportional gain toward the active waypoint (1/s).
    pub gain: f64,
    pub climb_rate: f64,
    pub arrival_radius: f64,
    pub final_arrival_radius: f64,
    /// Below this speed the heading is held.
    pub heading_speed_threshold: f64,
}

impl Default for VehicleParams {
    fn default() -> Self {
        Self {
            max_speed: 0.3,
            velocity_time_constant: 0.15,
            gain: 1.0,
            climb_rate: 0.5,
            arrival_radius: 0.1,
            final_arrival_radius: 0.05,
            heading_speed_threshold: 0.05,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UavState {
    pub id: usize,
    pub position: Vec2,
    pub yaw: f64,
    pub velocity: Vec2,
    pub altitude: f64,
    /// Altitude the vehicle climbs to and holds while airborne.
    pub target_altitude: f64,
    pub mode: FlightMode,
}

impl UavState {
    pub fn on_ground(id: usize, position: Vec2, yaw: f64) -> Self {
        Self {
            id,
            position,
            yaw,
            velocity: Vec2::ZERO,
            altitude: 0.0,
            target_altitude: 0.0,
            mode: FlightMode::Idle,
        }
    }

    pub fn pose(&self) -> Pose3 {
        Pose3::from_xyz_yaw(self.position.x, self.position.y, self.altitude, self.yaw)
    }
}

/// Velocity aimed straight at `waypoint`, proportional to distance and
/// capped at `max_speed`.
pub fn preferred_velocity(position: Vec2, waypoint: Vec2, max_speed: f64, gain: f64) -> Vec2 {
    ((waypoint - position) * gain).clamp_norm(max_speed)
}

/// Advances one tick.
///
/// Velocity follows the command through a first-order lag, discretized
/// exactly for a command held over the tick.
pub fn step(state: &UavState, commanded: Vec2, dt: f64, params: &VehicleParams) -> UavState {
    let mut s = *state;
    let cmd = if s.mode.is_airborne() {
        commanded.clamp_norm(params.max_speed)
    } else {
        Vec2::ZERO
    };
    let decay = (-dt / params.velocity_time_constant).exp();
    s.velocity = (cmd + (s.velocity - cmd) * decay).clamp_norm(params.max_speed);
    if !s.mode.is_airborne() {
        s.velocity = Vec2::ZERO;
    }
    s.position += s.velocity * dt;
    if s.velocity.norm() > params.heading_speed_threshold {
        s.yaw = s.velocity.angle();
    }
    let climb = params.climb_rate * dt;
    match s.mode {
        FlightMode::Takeoff => {
            s.altitude = (s.altitude + climb).min(s.target_altitude);
        }
        FlightMode::Flying => s.altitude = s.target_altitude,
        FlightMode::Landing => s.altitude = (s.altitude - climb).max(0.0),
        FlightMode::Idle | FlightMode::Landed => s.altitude = 0.0,
    }
    s
}

/// Index of the waypoint to chase after checking arrival at the current one.
pub fn waypoint_progress(position: Vec2, waypoints: &[Vec2], active: usize, params: &VehicleParams) -> usize {
    assert!(!waypoints.is_empty(), "waypoint list must not be empty");
    let last = waypoints.len() - 1;
    let mut i = active.min(last);
    while i < last && position.distance(waypoints[i]) <= params.arrival_radius {
        i += 1;
    }
    i
}

pub fn reached_final(position: Vec2, waypoints: &[Vec2], active: usize, params: &VehicleParams) -> bool {
    active + 1 >= waypoints.len()
        && waypoints
            .last()
            .is_some_and(|w| position.distance(*w) <= params.final_arrival_radius)
}
