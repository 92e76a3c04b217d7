#![allow(dead_code)]

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::path::PathBuf;

use nalgebra::{Matrix3, Matrix4, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use swarmloc::geometry::polygon::{contains_strict, edges, segment_crosses_interior, segments_intersect};
use swarmloc::geometry::{se3_exp, Pose3, Twist6, Vec2, Vec3, Vec6};
use swarmloc::orca::{compute_velocities, AgentState, HalfPlane, OrcaParams};
use swarmloc::planner::inflate_polygon;
use swarmloc::slam::{Factor, FactorGraph};
use swarmloc::vehicle::preferred_velocity;

pub fn scenario_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenarios")
        .join(name)
}

// ---- ORCA ----

pub struct SwapOutcome {
    /// Smallest `‖p_i − p_j‖ − (r_i + r_j)` seen at any tick.
    pub min_clearance: f64,
    /// Largest distance to goal at the end of the run.
    pub worst_goal_error: f64,
    pub max_speed_seen: f64,
}

/// Largest seeded perturbation added to preferred velocities (m/s).
pub const NUDGE: f64 = 1e-4;
/// Clockwise turn of the preferred velocity while more than
/// `BIAS_RANGE` from the goal (rad). Symmetric crowds otherwise settle
/// into an ORCA equilibrium and jam at the centre.
pub const RIGHT_HAND_BIAS: f64 = 0.1;
pub const BIAS_RANGE: f64 = 0.5;

/// Holonomic agents that adopt the ORCA velocity every tick.
pub fn run_orca(
    starts: &[Vec2],
    goals: &[Vec2],
    radius: f64,
    max_speed: f64,
    params: &OrcaParams,
    seed: u64,
    duration: f64,
) -> SwapOutcome {
    let dt = params.time_step;
    let mut agents: Vec<AgentState> = starts
        .iter()
        .enumerate()
        .map(|(i, &p)| AgentState::new(i, p, radius, max_speed))
        .collect();
    let mut min_clearance = f64::INFINITY;
    let mut max_speed_seen: f64 = 0.0;
    let ticks = (duration / dt).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for tick in 0..ticks {
        for (a, g) in agents.iter_mut().zip(goals) {
            let nudge = Vec2::from_angle(rng.gen_range(0.0..std::f64::consts::TAU)) * rng.gen_range(0.0..NUDGE);
            let mut pref = preferred_velocity(a.position, *g, max_speed, 1.0);
            if a.position.distance(*g) > BIAS_RANGE {
                let (s, c) = (-RIGHT_HAND_BIAS).sin_cos();
                pref = Vec2::new(pref.x * c - pref.y * s, pref.x * s + pref.y * c);
            }
            a.preferred_velocity = (pref + nudge).clamp_norm(max_speed);
        }
        let out = compute_velocities(&agents, &[], params, seed.wrapping_add(tick as u64));
        for (a, o) in agents.iter_mut().zip(&out) {
            a.velocity = o.velocity;
            a.position += o.velocity * dt;
            max_speed_seen = max_speed_seen.max(o.velocity.norm());
        }
        for i in 0..agents.len() {
            for j in i + 1..agents.len() {
                let d = agents[i].position.distance(agents[j].position);
                min_clearance = min_clearance.min(d - agents[i].radius - agents[j].radius);
            }
        }
    }
    let worst_goal_error = agents
        .iter()
        .zip(goals)
        .map(|(a, g)| a.position.distance(*g))
        .fold(0.0, f64::max);
    SwapOutcome {
        min_clearance,
        worst_goal_error,
        max_speed_seen,
    }
}

/// Agents evenly spaced on a circle, each heading for the antipode. The
/// start angles are jittered by up to `jitter` radians.
pub fn antipodal(n: usize, circle: f64, jitter: f64, rng: &mut ChaCha8Rng) -> (Vec<Vec2>, Vec<Vec2>) {
    let mut starts = Vec::new();
    let mut goals = Vec::new();
    for k in 0..n {
        let a = std::f64::consts::TAU * k as f64 / n as f64 + rng.gen_range(-jitter..=jitter);
        let p = Vec2::from_angle(a) * circle;
        starts.push(p);
        goals.push(-p);
    }
    (starts, goals)
}

/// Half-planes that all contain a common interior point of the speed disc.
pub fn random_feasible_constraints(rng: &mut ChaCha8Rng, max_speed: f64) -> Vec<HalfPlane> {
    let n = rng.gen_range(3..=10);
    let inner = Vec2::from_angle(rng.gen_range(0.0..std::f64::consts::TAU)) * rng.gen_range(0.0..0.8 * max_speed);
    (0..n)
        .map(|_| {
            let normal = Vec2::from_angle(rng.gen_range(0.0..std::f64::consts::TAU));
            let slack = rng.gen_range(0.0..0.3 * max_speed);
            HalfPlane::new(inner - normal * slack, normal)
        })
        .collect()
}

/// Smallest `‖v − v_des‖` over feasible points of a square grid with
/// spacing `h` clipped to the speed disc.
pub fn lp_grid_best(constraints: &[HalfPlane], v_des: Vec2, max_speed: f64, h: f64) -> Option<f64> {
    let n = (max_speed / h).ceil() as i64;
    let mut best: Option<f64> = None;
    for i in -n..=n {
        let x = i as f64 * h;
        for j in -n..=n {
            let v = Vec2::new(x, j as f64 * h);
            if v.norm_squared() > max_speed * max_speed {
                continue;
            }
            if constraints.iter().all(|c| c.signed_slack(v) >= 0.0) {
                let d = v.distance(v_des);
                if best.is_none_or(|b| d < b) {
                    best = Some(d);
                }
            }
        }
    }
    best
}

// ---- planner ----

/// Star-shaped CCW polygon around `center`.
pub fn random_polygon(rng: &mut ChaCha8Rng, center: Vec2, radius: f64) -> Vec<Vec2> {
    let n = rng.gen_range(3..=6);
    let sector = std::f64::consts::TAU / n as f64;
    let phase = rng.gen_range(0.0..sector);
    (0..n)
        .map(|k| {
            let a = phase + sector * (k as f64 + rng.gen_range(-0.25..0.25));
            center + Vec2::from_angle(a) * (radius * rng.gen_range(0.6..1.0))
        })
        .collect()
}

pub struct Field {
    pub obstacles: Vec<Vec<Vec2>>,
    pub margin: f64,
    pub start: Vec2,
    pub goal: Vec2,
}

pub const FIELD_LO: f64 = 0.0;
pub const FIELD_HI: f64 = 3.0;
pub const GRID: f64 = 0.02;

fn overlaps(a: &[Vec2], b: &[Vec2]) -> bool {
    edges(a).any(|(p, q)| edges(b).any(|(r, s)| segments_intersect(p, q, r, s)))
        || contains_strict(a, b[0])
        || contains_strict(b, a[0])
}

fn grid_point(rng: &mut ChaCha8Rng) -> Vec2 {
    let n = ((FIELD_HI - FIELD_LO) / GRID).round() as i64;
    let x = FIELD_LO + rng.gen_range(2..=n - 2) as f64 * GRID;
    let y = FIELD_LO + rng.gen_range(2..=n - 2) as f64 * GRID;
    Vec2::new(x, y)
}

/// Two to five disjoint inflated obstacles in `[0, 3]²`, with start and
/// goal on grid points outside them and at least 1.5 m apart.
pub fn random_field(rng: &mut ChaCha8Rng) -> Field {
    loop {
        let margin = rng.gen_range(0.05..0.2);
        let count = rng.gen_range(2..=5);
        let mut obstacles: Vec<Vec<Vec2>> = Vec::new();
        let mut inflated: Vec<Vec<Vec2>> = Vec::new();
        for _ in 0..count * 4 {
            if obstacles.len() == count {
                break;
            }
            let c = Vec2::new(rng.gen_range(0.5..2.5), rng.gen_range(0.5..2.5));
            let radius = rng.gen_range(0.2..0.45);
            let poly = random_polygon(rng, c, radius);
            let Ok(inf) = inflate_polygon(&poly, margin) else {
                continue;
            };
            let inside = inf
                .iter()
                .all(|p| p.x > FIELD_LO && p.x < FIELD_HI && p.y > FIELD_LO && p.y < FIELD_HI);
            if inside && !inflated.iter().any(|o| overlaps(o, &inf)) {
                obstacles.push(poly);
                inflated.push(inf);
            }
        }
        let (start, goal) = (grid_point(rng), grid_point(rng));
        let blocked = |p: Vec2| inflated.iter().any(|o| contains_strict(o, p));
        if obstacles.len() >= 2 && start.distance(goal) > 1.5 && !blocked(start) && !blocked(goal) {
            return Field {
                obstacles,
                margin,
                start,
                goal,
            };
        }
    }
}

#[derive(PartialEq)]
struct Node(f64, usize);

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then(other.1.cmp(&self.1))
    }
}

/// Moves to every lattice offset with `max(|dx|, |dy|) ≤ reach` and
/// coprime components; reach 1 is the 8-connected stencil.
pub fn stencil(reach: i64) -> Vec<(i64, i64)> {
    fn gcd(a: i64, b: i64) -> i64 {
        if b == 0 {
            a.abs()
        } else {
            gcd(b, a % b)
        }
    }
    let mut out = Vec::new();
    for dx in -reach..=reach {
        for dy in -reach..=reach {
            if (dx, dy) != (0, 0) && gcd(dx, dy) == 1 {
                out.push((dx, dy));
            }
        }
    }
    out
}

/// Shortest lattice path on a grid with spacing `h` over `[lo, hi]²`
/// using the `stencil(reach)` moves. Moves must stay clear of every
/// inflated polygon interior. `start` and `goal` must be grid points.
pub fn grid_path_length(
    inflated: &[Vec<Vec2>],
    start: Vec2,
    goal: Vec2,
    lo: f64,
    hi: f64,
    h: f64,
    reach: i64,
) -> Option<f64> {
    let moves = stencil(reach);
    let boxes: Vec<(Vec2, Vec2)> = inflated
        .iter()
        .map(|poly| {
            let lo = poly.iter().fold(Vec2::new(f64::INFINITY, f64::INFINITY), |m, p| {
                Vec2::new(m.x.min(p.x), m.y.min(p.y))
            });
            let hi = poly
                .iter()
                .fold(Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY), |m, p| {
                    Vec2::new(m.x.max(p.x), m.y.max(p.y))
                });
            (lo, hi)
        })
        .collect();
    let crosses = |p: Vec2, q: Vec2| {
        inflated.iter().zip(&boxes).any(|(poly, (lo, hi))| {
            let apart = p.x.max(q.x) < lo.x || p.x.min(q.x) > hi.x || p.y.max(q.y) < lo.y || p.y.min(q.y) > hi.y;
            !apart && segment_crosses_interior(poly, p, q)
        })
    };
    let n = ((hi - lo) / h).round() as usize + 1;
    let at = |i: usize, j: usize| Vec2::new(lo + i as f64 * h, lo + j as f64 * h);
    let index = |p: Vec2| {
        let i = ((p.x - lo) / h).round() as usize;
        let j = ((p.y - lo) / h).round() as usize;
        i * n + j
    };
    let free: Vec<bool> = (0..n * n)
        .map(|k| {
            let p = at(k / n, k % n);
            !inflated.iter().any(|poly| contains_strict(poly, p))
        })
        .collect();
    let (s, g) = (index(start), index(goal));
    let mut dist = vec![f64::INFINITY; n * n];
    let mut heap = BinaryHeap::new();
    dist[s] = 0.0;
    heap.push(Node(0.0, s));
    while let Some(Node(d, k)) = heap.pop() {
        if k == g {
            return Some(d);
        }
        if d > dist[k] {
            continue;
        }
        let (i, j) = ((k / n) as i64, (k % n) as i64);
        let p = at(i as usize, j as usize);
        for &(di, dj) in &moves {
            let (ni, nj) = (i + di, j + dj);
            if ni < 0 || nj < 0 || ni >= n as i64 || nj >= n as i64 {
                continue;
            }
            let m = ni as usize * n + nj as usize;
            if !free[m] {
                continue;
            }
            let q = at(ni as usize, nj as usize);
            if crosses(p, q) {
                continue;
            }
            let nd = d + p.distance(q);
            if nd < dist[m] {
                dist[m] = nd;
                heap.push(Node(nd, m));
            }
        }
    }
    None
}

// ---- SE(3) ----

pub fn random_twist(rng: &mut ChaCha8Rng, rot: f64, trans: f64) -> Twist6 {
    let mut v = || rng.gen_range(-1.0..1.0);
    let omega = Vec3::new(v(), v(), v());
    let rho = Vec3::new(v(), v(), v());
    Twist6::new(omega * rot, rho * trans)
}

pub fn random_pose(rng: &mut ChaCha8Rng, rot: f64, trans: f64) -> Pose3 {
    se3_exp(&random_twist(rng, rot, trans))
}

pub fn matrix(p: &Pose3) -> Matrix4<f64> {
    let r = p.rotation.matrix();
    let mut m = Matrix4::identity();
    m.fixed_view_mut::<3, 3>(0, 0).copy_from(&r);
    m.fixed_view_mut::<3, 1>(0, 3).copy_from(&p.translation);
    m
}

/// SE(3) logarithm of a homogeneous matrix, from the closed-form series.
pub fn matrix_log(m: &Matrix4<f64>) -> Vec6 {
    let r: Matrix3<f64> = m.fixed_view::<3, 3>(0, 0).into();
    let t: Vector3<f64> = m.fixed_view::<3, 1>(0, 3).into();
    let cos = ((r.trace() - 1.0) / 2.0).clamp(-1.0, 1.0);
    let theta = cos.acos();
    let skew = (r - r.transpose()) / 2.0;
    let axis_sin = Vector3::new(skew[(2, 1)], skew[(0, 2)], skew[(1, 0)]);
    let (omega, coeff) = if theta < 1e-5 {
        (
            axis_sin * (1.0 + theta * theta / 6.0),
            1.0 / 12.0 + theta * theta / 720.0,
        )
    } else {
        let s = theta.sin();
        (
            axis_sin * (theta / s),
            1.0 / (theta * theta) - (1.0 + cos) / (2.0 * theta * s),
        )
    };
    let w = Matrix3::new(0.0, -omega.z, omega.y, omega.z, 0.0, -omega.x, -omega.y, omega.x, 0.0);
    let v_inv = Matrix3::identity() - w * 0.5 + w * w * coeff;
    let rho = v_inv * t;
    Vec6::new(omega.x, omega.y, omega.z, rho.x, rho.y, rho.z)
}

/// Unwhitened residual of `factor`, composed from homogeneous matrices.
pub fn random_sigma(rng: &mut ChaCha8Rng) -> Vec6 {
    Vec6::from_fn(|_, _| rng.gen_range(0.05..2.0))
}

pub fn random_factor(rng: &mut ChaCha8Rng, n: usize) -> Factor {
    let sigma = random_sigma(rng);
    match rng.gen_range(0..3) {
        0 => Factor::Prior {
            pose: rng.gen_range(0..n),
            measurement: random_pose(rng, 1.0, 2.0),
            sigma,
        },
        1 => {
            let from = rng.gen_range(0..n - 1);
            Factor::Odometry {
                from,
                to: rng.gen_range(from + 1..n),
                measurement: random_pose(rng, 1.0, 2.0),
                sigma,
            }
        }
        _ => Factor::Landmark {
            pose: rng.gen_range(0..n),
            tag_id: rng.gen_range(0..8),
            landmark: random_pose(rng, 1.0, 3.0),
            measurement: random_pose(rng, 1.0, 2.0),
            sigma,
        },
    }
}

/// Ten-pose chain with exact odometry, a prior on pose 0 and three exact
/// landmark sightings.
pub fn exact_chain(rng: &mut ChaCha8Rng) -> (Vec<Pose3>, FactorGraph) {
    let mut truth = vec![random_pose(rng, 0.5, 1.0)];
    for _ in 1..10 {
        let step = random_pose(rng, 0.2, 0.5);
        truth.push(truth.last().unwrap().compose(&step));
    }
    let sigma = Vec6::repeat(0.1);
    let mut g = FactorGraph::new(truth.clone());
    g.add(Factor::Prior {
        pose: 0,
        measurement: truth[0],
        sigma,
    })
    .unwrap();
    for k in 0..9 {
        g.add(Factor::Odometry {
            from: k,
            to: k + 1,
            measurement: truth[k].between(&truth[k + 1]),
            sigma,
        })
        .unwrap();
    }
    for (tag, &k) in [2usize, 5, 8].iter().enumerate() {
        let landmark = random_pose(rng, 1.0, 3.0);
        g.add(Factor::Landmark {
            pose: k,
            tag_id: tag as u32,
            landmark,
            measurement: truth[k].between(&landmark),
            sigma,
        })
        .unwrap();
    }
    (truth, g)
}

/// Chain with noisy odometry and landmark sightings, initialized by dead
/// reckoning from a perturbed start.
pub fn fuzzed_graph(rng: &mut ChaCha8Rng) -> FactorGraph {
    let n = rng.gen_range(3..25);
    let noise = Normal::new(0.0, 1.0).unwrap();
    let jitter = |rng: &mut ChaCha8Rng, rot: f64, trans: f64| {
        let w = Vec3::from_fn(|_, _| noise.sample(rng) * rot);
        let p = Vec3::from_fn(|_, _| noise.sample(rng) * trans);
        se3_exp(&Twist6::new(w, p))
    };
    let mut truth = vec![random_pose(rng, 0.5, 1.0)];
    for _ in 1..n {
        let step = random_pose(rng, 0.3, 0.5);
        truth.push(truth.last().unwrap().compose(&step));
    }
    let sigma = Vec6::new(0.02, 0.02, 0.02, 0.05, 0.05, 0.05);
    let mut init = vec![truth[0].compose(&jitter(rng, 0.1, 0.2))];
    let mut factors = vec![Factor::Prior {
        pose: 0,
        measurement: truth[0],
        sigma,
    }];
    for k in 0..n - 1 {
        let z = truth[k].between(&truth[k + 1]).compose(&jitter(rng, 0.02, 0.05));
        init.push(init[k].compose(&z));
        factors.push(Factor::Odometry {
            from: k,
            to: k + 1,
            measurement: z,
            sigma,
        });
    }
    for _ in 0..rng.gen_range(0..6) {
        let k = rng.gen_range(0..n);
        let landmark = random_pose(rng, 1.0, 3.0);
        factors.push(Factor::Landmark {
            pose: k,
            tag_id: rng.gen_range(0..4),
            landmark,
            measurement: truth[k].between(&landmark).compose(&jitter(rng, 0.02, 0.05)),
            sigma,
        });
    }
    let mut g = FactorGraph::new(init);
    for f in factors {
        g.add(f).unwrap();
    }
    g
}

pub fn matrix_residual(factor: &Factor, poses: &[Pose3]) -> Vec6 {
    let inv = |m: Matrix4<f64>| m.try_inverse().expect("rigid transforms are invertible");
    let err = match factor {
        Factor::Prior { pose, measurement, .. } => inv(matrix(measurement)) * matrix(&poses[*pose]),
        Factor::Odometry {
            from, to, measurement, ..
        } => inv(matrix(measurement)) * inv(matrix(&poses[*from])) * matrix(&poses[*to]),
        Factor::Landmark {
            pose,
            landmark,
            measurement,
            ..
        } => inv(matrix(measurement)) * inv(matrix(&poses[*pose])) * matrix(landmark),
    };
    matrix_log(&err)
}

pub fn pose_error(a: &Pose3, b: &Pose3) -> (f64, f64) {
    let d = a.between(b);
    ((a.translation - b.translation).norm(), d.rotation.angle())
}
