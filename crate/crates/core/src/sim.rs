//! Tick-driven closed-loop simulation of a scenario.
//!
//! Each tick, in order: capture camera frames that are due, fuse every
//! correction whose processing has finished, log, let the task manager
//! issue commands from the estimated positions, filter the preferred
//! velocities through ORCA, step the vehicles and feed noisy odometry to
//! each UAV's estimator.

use std::collections::VecDeque;

use crate::geometry::{Pose3, Vec2};
use crate::latency::schedule_corrections;
use crate::metrics::{LogRecord, TrajectoryLog};
use crate::mission::TaskManager;
use crate::orca::{compute_velocities, static_obstacle_agents, AgentState};
use crate::planner::Planner;
use crate::rng::{stream_rng, sub_seed, Stream};
use crate::scenario::{ConfigError, Scenario};
use crate::sensors::OdometryModel;
use crate::slam::{EstimatorStats, Observation, SlidingWindowEstimator};
use crate::vehicle::{preferred_velocity, step, UavState};

/// Ids of obstacle virtual agents start here, clear of any UAV id.
const VIRTUAL_ID_BASE: usize = 1 << 32;

#[derive(Debug, Clone)]
pub struct SimOutcome {
    pub log: TrajectoryLog,
    /// Every UAV finished its plan and landed.
    pub completed: bool,
    pub failure: Option<String>,
    /// Simulated time of the last logged tick (s).
    pub duration: f64,
    pub ticks: usize,
    /// Smallest true horizontal distance between airborne UAVs minus
    /// their combined radii (m); infinite with fewer than two airborne.
    pub min_clearance: f64,
    pub stats: Vec<EstimatorStats>,
}

struct Pending {
    apply_tick: usize,
    capture_tick: usize,
    observations: Vec<Vec<Observation>>,
}

/// Runs `scenario` with its own seed.
pub fn simulate(scenario: &Scenario) -> Result<SimOutcome, ConfigError> {
    let dt = 1.0 / scenario.tick_rate;
    let seed = scenario.seed;
    let plan = scenario.plan()?;
    let obstacles = scenario.obstacle_polygons();
    let planner = Planner::new(&obstacles, scenario.planner.margin).map_err(|e| ConfigError::Invalid {
        path: "obstacles".into(),
        message: e.to_string(),
    })?;
    let mut virtual_agents = Vec::new();
    for (i, poly) in obstacles.iter().enumerate() {
        let agents = static_obstacle_agents(
            poly,
            scenario.orca.obstacle_spacing,
            VIRTUAL_ID_BASE + virtual_agents.len(),
        )
        .map_err(|e| ConfigError::Invalid {
            path: format!("obstacles[{i}].polygon"),
            message: e.to_string(),
        })?;
        virtual_agents.extend(agents);
    }
    let landmarks = scenario.landmarks();

    let mut truth: Vec<UavState> = scenario
        .uavs
        .iter()
        .map(|u| UavState::on_ground(u.id, u.start, u.yaw_deg.to_radians()))
        .collect();
    let mut estimators: Vec<SlidingWindowEstimator> = truth
        .iter()
        .map(|s| SlidingWindowEstimator::new(s.pose(), scenario.estimator))
        .collect();
    let mut odometry: Vec<OdometryModel> = scenario
        .uavs
        .iter()
        .map(|u| OdometryModel::new(scenario.odometry, stream_rng(seed, Stream::Odometry, u.id as u64)))
        .collect();
    let mut camera_rngs: Vec<_> = scenario
        .uavs
        .iter()
        .map(|u| stream_rng(seed, Stream::Camera, u.id as u64))
        .collect();

    // Captures snapped to the tick grid; the pipeline delay is kept.
    let mut captures: VecDeque<(usize, usize)> = VecDeque::new();
    for c in schedule_corrections(&scenario.latency, scenario.max_duration) {
        let capture_tick = (c.capture_time / dt + 1e-9).floor() as usize;
        let delay_ticks = ((c.apply_time - c.capture_time) / dt - 1e-9).ceil().max(0.0) as usize;
        if captures.back().is_some_and(|&(t, _)| t >= capture_tick) {
            continue;
        }
        captures.push_back((capture_tick, capture_tick + delay_ticks));
    }
    let mut pending: VecDeque<Pending> = VecDeque::new();
    let mut manager = TaskManager::new(plan, scenario.vehicle);
    let mut log = TrajectoryLog::default();
    let mut min_clearance = f64::INFINITY;
    let mut failure = None;
    let mut completed = false;
    let max_ticks = (scenario.max_duration / dt).ceil() as usize;
    let mut tick = 0usize;

    loop {
        let t = tick as f64 * dt;

        if captures.front().is_some_and(|&(c, _)| c == tick) {
            let (capture_tick, apply_tick) = captures.pop_front().expect("checked");
            let observations = truth
                .iter()
                .zip(&mut camera_rngs)
                .map(|(s, rng)| {
                    if landmarks.is_empty() || !s.mode.is_airborne() {
                        return Vec::new();
                    }
                    let det = scenario.camera.detect(&s.pose(), &landmarks, &obstacles, t, rng);
                    scenario.camera.to_observations(&det, &landmarks)
                })
                .collect();
            pending.push_back(Pending {
                apply_tick,
                capture_tick,
                observations,
            });
        }
        while pending.front().is_some_and(|p| p.apply_tick <= tick) {
            let batch = pending.pop_front().expect("checked");
            for (est, obs) in estimators.iter_mut().zip(&batch.observations) {
                if let Err(e) = est.add_observations(batch.capture_tick, obs) {
                    failure.get_or_insert(format!("estimator failed at t={t:.2}: {e}"));
                }
            }
        }

        for (s, est) in truth.iter().zip(&estimators) {
            let e = est.estimate().translation;
            log.push(LogRecord {
                t,
                uav: s.id,
                truth: [s.position.x, s.position.y, s.altitude],
                estimate: [e.x, e.y, e.z],
                mode: s.mode,
                corrections: est.stats().corrections,
            });
        }

        if failure.is_some() {
            break;
        }
        if manager.is_complete() {
            completed = true;
            break;
        }
        if tick >= max_ticks {
            failure = Some(format!("mission unfinished after {:.1} s", scenario.max_duration));
            break;
        }

        let views: Vec<UavState> = truth
            .iter()
            .zip(&estimators)
            .map(|(s, est)| {
                let e = est.estimate().translation;
                UavState {
                    position: Vec2::new(e.x, e.y),
                    ..*s
                }
            })
            .collect();
        let commands = match manager.tick(t, &views, &planner) {
            Ok(c) => c,
            Err(e) => {
                failure = Some(format!("t={t:.2}: {e}"));
                break;
            }
        };
        for (s, c) in truth.iter_mut().zip(&commands) {
            if s.mode != c.mode {
                if !s.mode.can_transition(c.mode) {
                    failure = Some(format!(
                        "uav {}: illegal transition {} -> {}",
                        s.id,
                        s.mode.as_str(),
                        c.mode.as_str()
                    ));
                }
                s.mode = c.mode;
            }
            s.target_altitude = c.target_altitude;
        }
        if failure.is_some() {
            break;
        }

        let mut airborne = Vec::new();
        let mut agents = Vec::new();
        for (u, (cfg, view)) in scenario.uavs.iter().zip(&views).enumerate() {
            if !truth[u].mode.is_airborne() {
                continue;
            }
            let max_speed = scenario.max_speed(cfg);
            let mut a = AgentState::new(cfg.id, view.position, cfg.radius + scenario.avoidance_margin, max_speed);
            a.velocity = truth[u].velocity;
            a.preferred_velocity = commands[u]
                .waypoint
                .map(|w| preferred_velocity(view.position, w, max_speed, scenario.vehicle.gain))
                .unwrap_or(Vec2::ZERO);
            agents.push(a);
            airborne.push(u);
        }
        let velocities = compute_velocities(
            &agents,
            &virtual_agents,
            &scenario.orca,
            sub_seed(seed, Stream::Orca, tick as u64),
        );
        let mut commanded = vec![Vec2::ZERO; truth.len()];
        for (k, &u) in airborne.iter().enumerate() {
            commanded[u] = velocities[k].velocity;
        }

        for (u, s) in truth.iter_mut().enumerate() {
            let before: Pose3 = s.pose();
            let mut params = scenario.vehicle;
            params.max_speed = scenario.max_speed(&scenario.uavs[u]);
            let flying = s.mode.is_airborne();
            *s = step(s, commanded[u], dt, &params);
            let delta = before.between(&s.pose());
            let measured = if flying { odometry[u].step(&delta) } else { delta };
            estimators[u].push_odometry(measured);
        }
        for (i, a) in airborne.iter().enumerate() {
            for b in &airborne[i + 1..] {
                let d = truth[*a].position.distance(truth[*b].position);
                let r = scenario.uavs[*a].radius + scenario.uavs[*b].radius;
                min_clearance = min_clearance.min(d - r);
            }
        }
        tick += 1;
    }

    Ok(SimOutcome {
        log,
        completed,
        failure,
        duration: tick as f64 * dt,
        ticks: tick + 1,
        min_clearance,
        stats: estimators.iter().map(|e| *e.stats()).collect(),
    })
}
