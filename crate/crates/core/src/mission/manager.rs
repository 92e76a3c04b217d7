use super::{generate_trajectory, Action, MissionError, MissionPlan, Sync};
use crate::geometry::Vec2;
use crate::planner::{Planner, PlannerError};
use crate::vehicle::{reached_final, waypoint_progress, FlightMode, UavState, VehicleParams};

/// What the task manager asks of one UAV this tick.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UavCommand {
    pub mode: FlightMode,
    pub target_altitude: f64,
    /// Horizontal point to steer toward; `None` holds still.
    pub waypoint: Option<Vec2>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaskRecord {
    pub uav: usize,
    pub task: usize,
    pub started: f64,
    pub completed: Option<f64>,
}

#[derive(Debug, Clone)]
enum Run {
    Takeoff,
    Goto {
        route: Vec<Vec2>,
        active: usize,
    },
    Trajectory {
        setpoints: Vec<Vec2>,
        next: usize,
        route: Vec<Vec2>,
        active: usize,
    },
    Hover {
        until: f64,
    },
    Land,
}

#[derive(Debug, Clone)]
struct Slot {
    id: usize,
    schedule: Vec<usize>,
    cursor: usize,
    run: Option<(usize, Run)>,
    mode: FlightMode,
    target_altitude: f64,
    hold: Option<Vec2>,
}

impl Slot {
    fn ready_for(&self, task: usize) -> bool {
        self.run.is_none() && self.schedule.get(self.cursor) == Some(&task)
    }

    fn done(&self) -> bool {
        self.run.is_none() && self.cursor >= self.schedule.len()
    }
}

/// Single writer of mission state; call [`TaskManager::tick`] once per
/// simulation tick.
#[derive(Debug, Clone)]
pub struct TaskManager {
    plan: MissionPlan,
    vehicle: VehicleParams,
    slots: Vec<Slot>,
    records: Vec<TaskRecord>,
}

impl TaskManager {
    pub fn new(plan: MissionPlan, vehicle: VehicleParams) -> Self {
        let slots = plan
            .starts()
            .iter()
            .map(|&(id, start)| Slot {
                id,
                schedule: plan.schedule(id),
                cursor: 0,
                run: None,
                mode: FlightMode::Idle,
                target_altitude: 0.0,
                hold: Some(start),
            })
            .collect();
        Self {
            plan,
            vehicle,
            slots,
            records: Vec::new(),
        }
    }

    pub fn plan(&self) -> &MissionPlan {
        &self.plan
    }

    pub fn records(&self) -> &[TaskRecord] {
        &self.records
    }

    pub fn is_complete(&self) -> bool {
        self.slots.iter().all(|s| s.done() && s.mode == FlightMode::Landed)
    }

    /// `states` are in plan start order; positions may be estimates.
    pub fn tick(&mut self, t: f64, states: &[UavState], planner: &Planner) -> Result<Vec<UavCommand>, MissionError> {
        assert_eq!(states.len(), self.slots.len(), "one state per planned UAV");
        for u in 0..self.slots.len() {
            self.advance(u, t, &states[u], planner)?;
        }

        // Decide every start from the same snapshot so barriers release
        // all their targets on one tick. A vehicle must have adopted the
        // last commanded mode first, so one tick never spans two edges of
        // the mode graph.
        let ready = |u: usize, k: usize| self.slots[u].ready_for(k) && states[u].mode == self.slots[u].mode;
        let starts: Vec<usize> = (0..self.slots.len())
            .filter(|&u| {
                let slot = &self.slots[u];
                let Some(&k) = slot.schedule.get(slot.cursor) else {
                    return false;
                };
                if !ready(u, k) {
                    return false;
                }
                match self.plan.tasks()[k].sync {
                    Sync::Independent => true,
                    Sync::Barrier => (0..self.slots.len())
                        .filter(|&v| self.plan.tasks()[k].target.includes(self.slots[v].id))
                        .all(|v| ready(v, k)),
                }
            })
            .collect();
        for u in starts {
            self.start(u, t, &states[u], planner)?;
        }

        let vehicle = self.vehicle;
        Ok(self
            .slots
            .iter()
            .zip(states)
            .map(|(s, state)| UavCommand {
                mode: s.mode,
                target_altitude: s.target_altitude,
                waypoint: s
                    .run
                    .as_ref()
                    .and_then(|(_, r)| steer(r, state.position, &vehicle))
                    .or(s.hold),
            })
            .collect())
    }

    fn start(&mut self, u: usize, t: f64, state: &UavState, planner: &Planner) -> Result<(), MissionError> {
        let slot = &mut self.slots[u];
        let k = slot.schedule[slot.cursor];
        let action = &self.plan.tasks()[k].action;
        let id = slot.id;
        let violation = |reason: String| MissionError::PlanViolation {
            uav: id,
            task: k,
            reason,
        };
        let pos = state.position;
        let run = match action {
            Action::Takeoff { height } => {
                if slot.mode.is_airborne() {
                    return Err(violation(format!("TAKEOFF while {}", slot.mode.as_str())));
                }
                slot.mode = FlightMode::Takeoff;
                slot.target_altitude = *height;
                slot.hold = Some(pos);
                Run::Takeoff
            }
            _ if slot.mode != FlightMode::Flying => {
                return Err(violation(format!("{} while {}", action.name(), slot.mode.as_str())));
            }
            Action::Goto { setpoint } => Run::Goto {
                route: route(planner, pos, *setpoint).map_err(|source| MissionError::Planner {
                    uav: id,
                    task: k,
                    source,
                })?,
                active: 0,
            },
            Action::Trajectory(spec) => {
                let setpoints = generate_trajectory(spec, None)?.setpoints;
                let route = route(planner, pos, setpoints[0]).map_err(|source| MissionError::Planner {
                    uav: id,
                    task: k,
                    source,
                })?;
                Run::Trajectory {
                    setpoints,
                    next: 0,
                    route,
                    active: 0,
                }
            }
            Action::Hover { duration } => {
                slot.hold = Some(pos);
                Run::Hover { until: t + duration }
            }
            Action::Land => {
                slot.mode = FlightMode::Landing;
                Run::Land
            }
        };
        slot.run = Some((k, run));
        self.records.push(TaskRecord {
            uav: slot.id,
            task: k,
            started: t,
            completed: None,
        });
        Ok(())
    }

    fn advance(&mut self, u: usize, t: f64, state: &UavState, planner: &Planner) -> Result<(), MissionError> {
        let vehicle = self.vehicle;
        let slot = &mut self.slots[u];
        let Some((k, run)) = slot.run.as_mut() else {
            return Ok(());
        };
        let k = *k;
        let pos = state.position;
        let finished = match run {
            Run::Takeoff => {
                if state.altitude >= slot.target_altitude - 1e-9 {
                    slot.mode = FlightMode::Flying;
                    true
                } else {
                    false
                }
            }
            Run::Goto { route, active } => {
                *active = waypoint_progress(pos, route, *active, &vehicle);
                if reached_final(pos, route, *active, &vehicle) {
                    slot.hold = route.last().copied();
                    true
                } else {
                    false
                }
            }
            Run::Trajectory {
                setpoints,
                next,
                route,
                active,
            } => {
                *active = waypoint_progress(pos, route, *active, &vehicle);
                let last = *next + 1 == setpoints.len();
                let on_final_leg = *active + 1 == route.len();
                let radius = if last {
                    vehicle.final_arrival_radius
                } else {
                    vehicle.arrival_radius
                };
                if on_final_leg && pos.distance(setpoints[*next]) <= radius {
                    if last {
                        slot.hold = Some(setpoints[*next]);
                        true
                    } else {
                        *next += 1;
                        *route =
                            self::route(planner, pos, setpoints[*next]).map_err(|source| MissionError::Planner {
                                uav: slot.id,
                                task: k,
                                source,
                            })?;
                        *active = 0;
                        false
                    }
                } else {
                    false
                }
            }
            Run::Hover { until } => t >= *until - 1e-9,
            Run::Land => {
                if state.altitude <= 1e-12 {
                    slot.mode = FlightMode::Landed;
                    true
                } else {
                    false
                }
            }
        };
        if finished {
            slot.run = None;
            slot.cursor += 1;
            let id = slot.id;
            if let Some(r) = self
                .records
                .iter_mut()
                .rev()
                .find(|r| r.uav == id && r.task == k && r.completed.is_none())
            {
                r.completed = Some(t);
            }
        }
        Ok(())
    }
}

/// Point to steer toward. Pass-through waypoints are pushed out to at least
/// `max_speed / gain` along the same bearing so the proportional controller
/// keeps cruise speed until the last point of a task.
fn steer(run: &Run, pos: Vec2, vehicle: &VehicleParams) -> Option<Vec2> {
    let (w, pass) = match run {
        Run::Goto { route, active } => (route[*active], *active + 1 < route.len()),
        Run::Trajectory {
            setpoints,
            next,
            route,
            active,
        } => (route[*active], *active + 1 < route.len() || *next + 1 < setpoints.len()),
        Run::Takeoff | Run::Hover { .. } | Run::Land => return None,
    };
    let knee = vehicle.max_speed / vehicle.gain;
    let e = w - pos;
    let d = e.norm();
    if pass && d > 0.0 && d < knee {
        Some(pos + e * (knee / d))
    } else {
        Some(w)
    }
}

/// Planned waypoints from `from` to `to`, excluding `from` itself. A start
/// pushed inside an inflated obstacle falls back to flying straight at the
/// goal.
fn route(planner: &Planner, from: Vec2, to: Vec2) -> Result<Vec<Vec2>, PlannerError> {
    match planner.plan(from, to) {
        Ok(path) if path.len() > 1 => Ok(path[1..].to_vec()),
        Ok(_) => Ok(vec![to]),
        Err(PlannerError::StartBlocked(_)) => Ok(vec![to]),
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mission::{MissionTask, Target};
    use crate::vehicle::step;

    fn fly(plan: MissionPlan, max_time: f64) -> (TaskManager, Vec<UavState>, Vec<(f64, usize, FlightMode)>) {
        let params = VehicleParams::default();
        let planner = Planner::new(&[], 0.2).unwrap();
        let mut states: Vec<UavState> = plan
            .starts()
            .iter()
            .map(|&(id, p)| UavState::on_ground(id, p, 0.0))
            .collect();
        let mut mgr = TaskManager::new(plan, params);
        let mut transitions = Vec::new();
        let dt = 0.05;
        let mut tick = 0u64;
        while !mgr.is_complete() && (tick as f64) * dt < max_time {
            let t = tick as f64 * dt;
            let cmds = mgr.tick(t, &states, &planner).unwrap();
            for (s, c) in states.iter_mut().zip(&cmds) {
                if s.mode != c.mode {
                    assert!(s.mode.can_transition(c.mode), "{:?} -> {:?}", s.mode, c.mode);
                    transitions.push((t, s.id, c.mode));
                }
                s.mode = c.mode;
                s.target_altitude = c.target_altitude;
                let v = c
                    .waypoint
                    .map(|w| crate::vehicle::preferred_velocity(s.position, w, params.max_speed, params.gain))
                    .unwrap_or(Vec2::ZERO);
                *s = step(s, v, dt, &params);
            }
            tick += 1;
        }
        (mgr, states, transitions)
    }

    #[test]
    fn takeoff_goto_land() {
        let plan = MissionPlan::new(
            vec![
                MissionTask::new(Target::All, Action::Takeoff { height: 0.8 }),
                MissionTask::new(
                    Target::All,
                    Action::Goto {
                        setpoint: Vec2::new(1.0, 1.0),
                    },
                ),
                MissionTask::new(Target::All, Action::Land),
            ],
            vec![(0, Vec2::ZERO)],
            None,
        )
        .unwrap();
        let (mgr, states, _) = fly(plan, 60.0);
        assert!(mgr.is_complete());
        assert_eq!(states[0].mode, FlightMode::Landed);
        assert!(states[0].position.distance(Vec2::new(1.0, 1.0)) <= 0.05);
    }

    #[test]
    fn barrier_takeoff_then_all_land_same_tick() {
        let starts: Vec<_> = (0..4).map(|i| (i, Vec2::new(i as f64 * 0.5, 0.0))).collect();
        let mut tasks = vec![MissionTask::new(Target::All, Action::Takeoff { height: 0.8 }).barrier()];
        // Staggered heights would break the barrier if it were ignored.
        for i in 0..4 {
            tasks.push(MissionTask::new(
                Target::Uav(i),
                Action::Goto {
                    setpoint: Vec2::new(i as f64 * 0.5, 0.3 * (i + 1) as f64),
                },
            ));
        }
        tasks.push(MissionTask::new(Target::All, Action::Land).barrier());
        let plan = MissionPlan::new(tasks, starts, None).unwrap();
        let (mgr, _, transitions) = fly(plan, 120.0);
        assert!(mgr.is_complete());
        let last_flying = transitions
            .iter()
            .filter(|x| x.2 == FlightMode::Flying)
            .map(|x| x.0)
            .fold(f64::MIN, f64::max);
        let first_goto = mgr
            .records()
            .iter()
            .filter(|r| r.task >= 1 && r.task <= 4)
            .map(|r| r.started)
            .fold(f64::MAX, f64::min);
        assert!(first_goto >= last_flying);
        let landing: Vec<f64> = transitions
            .iter()
            .filter(|x| x.2 == FlightMode::Landing)
            .map(|x| x.0)
            .collect();
        assert_eq!(landing.len(), 4);
        assert!(landing.iter().all(|&t| t == landing[0]));
    }

    #[test]
    fn flight_task_after_landing_is_violation() {
        let plan = MissionPlan::new(
            vec![
                MissionTask::new(Target::All, Action::Takeoff { height: 0.5 }),
                MissionTask::new(Target::All, Action::Land),
                MissionTask::new(Target::All, Action::Hover { duration: 1.0 }),
                MissionTask::new(Target::All, Action::Land),
            ],
            vec![(0, Vec2::ZERO)],
            None,
        )
        .unwrap();
        let planner = Planner::new(&[], 0.2).unwrap();
        let params = VehicleParams::default();
        let mut mgr = TaskManager::new(plan, params);
        let mut s = UavState::on_ground(0, Vec2::ZERO, 0.0);
        let mut err = None;
        for tick in 0..2000 {
            match mgr.tick(tick as f64 * 0.05, std::slice::from_ref(&s), &planner) {
                Ok(c) => {
                    s.mode = c[0].mode;
                    s.target_altitude = c[0].target_altitude;
                    s = step(&s, Vec2::ZERO, 0.05, &params);
                }
                Err(e) => {
                    err = Some(e);
                    break;
                }
            }
        }
        assert!(matches!(err, Some(MissionError::PlanViolation { task: 2, .. })));
    }

    #[test]
    fn validation_rules() {
        let starts = vec![(0, Vec2::ZERO)];
        let land = MissionTask::new(Target::All, Action::Land);
        let up = MissionTask::new(Target::All, Action::Takeoff { height: 0.8 });
        assert!(MissionPlan::new(vec![land.clone()], starts.clone(), None).is_err());
        assert!(MissionPlan::new(vec![up.clone()], starts.clone(), None).is_err());
        let unknown = MissionTask::new(Target::Uav(7), Action::Land);
        assert!(MissionPlan::new(vec![up.clone(), unknown, land.clone()], starts.clone(), None).is_err());
        let bad_height = MissionTask::new(Target::All, Action::Takeoff { height: 0.0 });
        assert!(MissionPlan::new(vec![bad_height, land.clone()], starts.clone(), None).is_err());
        assert!(MissionPlan::new(vec![up, land], starts, None).is_ok());
    }
}
