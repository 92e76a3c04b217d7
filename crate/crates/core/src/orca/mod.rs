//! Reciprocal velocity obstacles in the horizontal plane.
//!
//! Each agent builds one half-plane per neighbor and picks the velocity
//! closest to its preference that satisfies all of them. Static polygons are
//! represented by rows of motionless virtual agents that never yield.

mod lp;

pub use lp::{solve_velocity, LpSolution};

use serde::{Deserialize, Serialize};

use crate::geometry::polygon::{edges, validate_ccw};
use crate::geometry::{GeometryError, Vec2};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgentState {
    pub id: usize,
    pub position: Vec2,
    pub velocity: Vec2,
    pub radius: f64,
    pub max_speed: f64,
    pub preferred_velocity: Vec2,
    pub is_virtual: bool,
}

impl AgentState {
    pub fn new(id: usize, position: Vec2, radius: f64, max_speed: f64) -> Self {
        Self {
            id,
            position,
            velocity: Vec2::ZERO,
            radius,
            max_speed,
            preferred_velocity: Vec2::ZERO,
            is_virtual: false,
        }
    }

    pub fn virtual_at(id: usize, position: Vec2, radius: f64) -> Self {
        Self {
            id,
            position,
            velocity: Vec2::ZERO,
            radius,
            max_speed: 0.0,
            preferred_velocity: Vec2::ZERO,
            is_virtual: true,
        }
    }
}

/// Velocities `v` with `(v - point)·normal ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfPlane {
    pub point: Vec2,
    pub normal: Vec2,
}

impl HalfPlane {
    pub fn new(point: Vec2, normal: Vec2) -> Self {
        Self { point, normal }
    }

    /// Non-negative inside the half-plane.
    pub fn signed_slack(&self, v: Vec2) -> f64 {
        (v - self.point).dot(self.normal)
    }

    pub fn contains(&self, v: Vec2) -> bool {
        self.signed_slack(v) >= 0.0
    }
}

/// Truncated cone of relative velocities that collide within the horizon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VoGeometry {
    pub center: Vec2,
    pub radius: f64,
    /// Unit direction of the cone axis (from the apex at the origin).
    pub apex_direction: Vec2,
    /// Unit leg directions; `None` when the agents already overlap.
    pub legs: Option<(Vec2, Vec2)>,
}

impl VoGeometry {
    pub fn new(a: &AgentState, b: &AgentState, tau: f64) -> Self {
        let rel = b.position - a.position;
        let r = a.radius + b.radius;
        let dist_sq = rel.norm_squared();
        let legs = (dist_sq > r * r).then(|| {
            let leg = (dist_sq - r * r).sqrt();
            let left = Vec2::new(rel.x * leg - rel.y * r, rel.x * r + rel.y * leg) / dist_sq;
            let right = Vec2::new(rel.x * leg + rel.y * r, -rel.x * r + rel.y * leg) / dist_sq;
            (left, right)
        });
        Self {
            center: rel / tau,
            radius: r / tau,
            apex_direction: rel.normalize_or_zero(),
            legs,
        }
    }

    /// Membership test for a relative velocity `v_a - v_b`.
    pub fn contains(&self, v_rel: Vec2) -> bool {
        if v_rel.distance(self.center) < self.radius {
            return true;
        }
        let Some((left, right)) = self.legs else {
            return true;
        };
        // Inside the cone and past the chord through the tangent points.
        let inside_cone = left.det(v_rel) <= 0.0 && right.det(v_rel) >= 0.0;
        let c = self.center.norm();
        let chord = (c * c - self.radius * self.radius) / c;
        inside_cone && v_rel.dot(self.apex_direction) >= chord
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrcaConstraint {
    pub plane: HalfPlane,
    /// The agents already overlap; the plane is derived from the single-step
    /// cone instead of the horizon cone.
    pub collision_regime: bool,
}

/// Velocity constraint that agent `a` must respect because of `b`.
pub fn orca_halfplane(a: &AgentState, b: &AgentState, tau: f64, dt: f64) -> OrcaConstraint {
    let rel_pos = b.position - a.position;
    let rel_vel = a.velocity - b.velocity;
    let dist_sq = rel_pos.norm_squared();
    let r = a.radius + b.radius;
    let r_sq = r * r;

    let (direction, u, collision_regime);
    if dist_sq > r_sq {
        let inv_tau = 1.0 / tau;
        let w = rel_vel - rel_pos * inv_tau;
        let w_len_sq = w.norm_squared();
        let dot1 = w.dot(rel_pos);
        if dot1 < 0.0 && dot1 * dot1 > r_sq * w_len_sq {
            // Nearest boundary point is on the cutoff circle.
            let w_len = w_len_sq.sqrt();
            let unit_w = w / w_len;
            direction = Vec2::new(unit_w.y, -unit_w.x);
            u = unit_w * (r * inv_tau - w_len);
        } else {
            let leg = (dist_sq - r_sq).sqrt();
            direction = if rel_pos.det(w) > 0.0 {
                Vec2::new(rel_pos.x * leg - rel_pos.y * r, rel_pos.x * r + rel_pos.y * leg) / dist_sq
            } else {
                -Vec2::new(rel_pos.x * leg + rel_pos.y * r, -rel_pos.x * r + rel_pos.y * leg) / dist_sq
            };
            u = direction * rel_vel.dot(direction) - rel_vel;
        }
        collision_regime = false;
    } else {
        let inv_dt = 1.0 / dt;
        let w = rel_vel - rel_pos * inv_dt;
        let w_len = w.norm();
        let unit_w = if w_len > 0.0 {
            w / w_len
        } else {
            -rel_pos.normalize_or_zero()
        };
        let unit_w = if unit_w == Vec2::ZERO {
            Vec2::new(1.0, 0.0)
        } else {
            unit_w
        };
        direction = Vec2::new(unit_w.y, -unit_w.x);
        u = unit_w * (r * inv_dt - w_len);
        collision_regime = true;
    }

    let share = if b.is_virtual { 1.0 } else { 0.5 };
    OrcaConstraint {
        plane: HalfPlane::new(a.velocity + u * share, Vec2::new(-direction.y, direction.x)),
        collision_regime,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OrcaParams {
    /// Look-ahead horizon τ (s).
    pub time_horizon: f64,
    /// Controller period (s), used in the overlap regime.
    pub time_step: f64,
    /// Virtual agent spacing along obstacle edges (m).
    pub obstacle_spacing: f64,
}

impl Default for OrcaParams {
    fn default() -> Self {
        Self {
            time_horizon: 2.0,
            time_step: 0.05,
            obstacle_spacing: 0.15,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrcaOutput {
    pub velocity: Vec2,
    pub feasible: bool,
    pub collision_regime: bool,
}

/// Solves one agent's LP against the given neighbors.
pub fn new_velocity(agent: &AgentState, neighbors: &[AgentState], params: &OrcaParams, seed: u64) -> OrcaOutput {
    let range = agent.max_speed * params.time_horizon * 2.0;
    let mut collision_regime = false;
    let constraints: Vec<HalfPlane> = neighbors
        .iter()
        .filter(|b| b.id != agent.id || b.is_virtual != agent.is_virtual)
        .filter(|b| b.position.distance(agent.position) <= range + agent.radius + b.radius)
        .map(|b| {
            let c = orca_halfplane(agent, b, params.time_horizon, params.time_step);
            collision_regime |= c.collision_regime;
            c.plane
        })
        .collect();
    let sol = solve_velocity(&constraints, agent.preferred_velocity, agent.max_speed, seed);
    OrcaOutput {
        velocity: sol.velocity,
        feasible: sol.feasible,
        collision_regime,
    }
}

/// New velocities for every non-virtual agent in `agents`, avoiding each
/// other and the `obstacles` virtual agents. Output is index-aligned with
/// `agents`; virtual entries get zero.
pub fn compute_velocities(
    agents: &[AgentState],
    obstacles: &[AgentState],
    params: &OrcaParams,
    seed: u64,
) -> Vec<OrcaOutput> {
    agents
        .iter()
        .enumerate()
        .map(|(i, a)| {
            if a.is_virtual {
                return OrcaOutput {
                    velocity: Vec2::ZERO,
                    feasible: true,
                    collision_regime: false,
                };
            }
            let mut neighbors: Vec<AgentState> = agents
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, b)| *b)
                .collect();
            neighbors.extend_from_slice(obstacles);
            new_velocity(
                a,
                &neighbors,
                params,
                seed ^ (i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15),
            )
        })
        .collect()
}

/// Virtual agents at every vertex and along every edge with gaps no larger
/// than `spacing`; each has radius `spacing / 2` so neighbors overlap.
pub fn static_obstacle_agents(
    polygon: &[Vec2],
    spacing: f64,
    first_id: usize,
) -> Result<Vec<AgentState>, GeometryError> {
    validate_ccw(polygon)?;
    if !(spacing > 0.0) {
        return Err(GeometryError::DegeneratePolygon(format!(
            "spacing {spacing} must be positive"
        )));
    }
    let radius = spacing / 2.0;
    let mut out = Vec::new();
    for (a, b) in edges(polygon) {
        let len = a.distance(b);
        let segments = ((len / spacing) - 1e-9).ceil().max(1.0) as usize;
        for k in 0..segments {
            let t = k as f64 / segments as f64;
            out.push(AgentState::virtual_at(first_id + out.len(), a + (b - a) * t, radius));
        }
    }
    Ok(out)
}
