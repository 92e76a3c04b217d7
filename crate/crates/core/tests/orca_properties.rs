mod common;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use swarmloc::geometry::Vec2;
use swarmloc::orca::{compute_velocities, new_velocity, orca_halfplane, solve_velocity, AgentState, OrcaParams};

use common::{antipodal, lp_grid_best, random_feasible_constraints, run_orca};

const RADIUS: f64 = 0.15;
const SPEED: f64 = 0.3;

fn head_on_params() -> OrcaParams {
    OrcaParams {
        time_horizon: 5.0,
        ..OrcaParams::default()
    }
}

#[test]
fn head_on_pair_keeps_separation() {
    let starts = [Vec2::new(0.0, 0.0), Vec2::new(4.0, 0.0)];
    let goals = [starts[1], starts[0]];
    let out = run_orca(&starts, &goals, RADIUS, SPEED, &head_on_params(), 0, 30.0);
    assert!(out.min_clearance >= -1e-3, "clearance {}", out.min_clearance);
    assert!(out.worst_goal_error < 0.1, "goal error {}", out.worst_goal_error);
    assert!(out.max_speed_seen <= SPEED + 1e-9);
}

#[test]
fn head_on_pair_is_reciprocal_and_optimal() {
    let mut a = AgentState::new(0, Vec2::new(0.0, 0.0), RADIUS, SPEED);
    let mut b = AgentState::new(1, Vec2::new(4.0, 0.0), RADIUS, SPEED);
    a.velocity = Vec2::new(0.3, 0.0);
    b.velocity = Vec2::new(-0.3, 0.0);
    a.preferred_velocity = a.velocity;
    b.preferred_velocity = b.velocity;
    let out = compute_velocities(&[a, b], &[], &head_on_params(), 3);
    let (va, vb) = (out[0].velocity, out[1].velocity);
    assert!((va.y + vb.y).abs() < 1e-12 && (va.x + vb.x).abs() < 1e-12);

    // Closing at 0.6 m/s over a 3.7 m gap collides after 6.17 s, beyond the
    // 5 s horizon, so the preferred velocity must survive.
    assert!(va.distance(a.preferred_velocity) < 1e-12);
    let c = orca_halfplane(&a, &b, 5.0, 0.05);
    let best = lp_grid_best(&[c.plane], a.preferred_velocity, SPEED, 0.001).unwrap();
    assert!(va.distance(a.preferred_velocity) <= best + 2e-3);

    // Once inside the horizon the pair must decelerate symmetrically.
    a.position = Vec2::new(1.0, 0.0);
    b.position = Vec2::new(3.0, 0.0);
    let out = compute_velocities(&[a, b], &[], &head_on_params(), 3);
    assert!(out[0].velocity.x < 0.3 - 1e-3);
    assert!((out[0].velocity + out[1].velocity).norm() < 1e-12);
    let c = orca_halfplane(&a, &b, 5.0, 0.05);
    let best = lp_grid_best(&[c.plane], a.preferred_velocity, SPEED, 0.001).unwrap();
    assert!(out[0].velocity.distance(a.preferred_velocity) <= best + 2e-3);
}

#[test]
fn antipodal_swap_of_eight_over_twenty_seeds() {
    let params = OrcaParams::default();
    for seed in 0..20 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (starts, goals) = antipodal(8, 2.0, 0.02, &mut rng);
        let out = run_orca(&starts, &goals, RADIUS, SPEED, &params, seed, 60.0);
        assert!(
            out.min_clearance >= -1e-3,
            "seed {seed}: clearance {}",
            out.min_clearance
        );
        assert!(
            out.worst_goal_error < 0.1,
            "seed {seed}: goal error {}",
            out.worst_goal_error
        );
    }
}

#[test]
fn lp_matches_grid_oracle_on_500_sets() {
    let mut rng = ChaCha8Rng::seed_from_u64(500);
    for case in 0..500 {
        let constraints = random_feasible_constraints(&mut rng, SPEED);
        let v_des = Vec2::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5));
        let sol = solve_velocity(&constraints, v_des, SPEED, case);
        assert!(sol.feasible, "case {case}");
        for c in &constraints {
            assert!(c.signed_slack(sol.velocity) >= -1e-9, "case {case}");
        }
        assert!(sol.velocity.norm() <= SPEED + 1e-9);
        let best = lp_grid_best(&constraints, v_des, SPEED, 0.001).expect("feasible set has grid points");
        let d = sol.velocity.distance(v_des);
        assert!(best >= d - 2e-3, "case {case}: grid {best} beats solver {d}");
    }
}

#[test]
fn symmetric_pair_velocities_mirror() {
    // Pair symmetric about the origin, offset from head-on.
    let mut a = AgentState::new(0, Vec2::new(-1.0, 0.1), RADIUS, SPEED);
    let mut b = AgentState::new(1, Vec2::new(1.0, -0.1), RADIUS, SPEED);
    a.velocity = Vec2::new(0.25, 0.0);
    b.velocity = -a.velocity;
    a.preferred_velocity = Vec2::new(0.3, 0.0);
    b.preferred_velocity = -a.preferred_velocity;
    let out = compute_velocities(&[a, b], &[], &OrcaParams::default(), 11);
    let (va, vb) = (out[0].velocity, out[1].velocity);
    assert!((va + vb).norm() < 1e-6, "{va:?} vs {vb:?}");
}

#[test]
fn same_seed_is_bit_identical() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (starts, _) = antipodal(8, 1.0, 0.1, &mut rng);
    let agents: Vec<AgentState> = starts
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            let mut a = AgentState::new(i, p, RADIUS, SPEED);
            a.preferred_velocity = -p.normalize_or_zero() * SPEED;
            a.velocity = a.preferred_velocity;
            a
        })
        .collect();
    let first = compute_velocities(&agents, &[], &OrcaParams::default(), 42);
    let second = compute_velocities(&agents, &[], &OrcaParams::default(), 42);
    for (x, y) in first.iter().zip(&second) {
        assert_eq!(x.velocity.x.to_bits(), y.velocity.x.to_bits());
        assert_eq!(x.velocity.y.to_bits(), y.velocity.y.to_bits());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn solution_respects_speed_and_feasible_constraints(seed in any::<u64>(), vx in -1.0..1.0f64, vy in -1.0..1.0f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let constraints = random_feasible_constraints(&mut rng, SPEED);
        let sol = solve_velocity(&constraints, Vec2::new(vx, vy), SPEED, seed);
        prop_assert!(sol.feasible);
        prop_assert!(sol.velocity.norm() <= SPEED + 1e-9);
        for c in &constraints {
            prop_assert!(c.signed_slack(sol.velocity) >= -1e-9);
        }
    }

    #[test]
    fn constraint_order_seed_does_not_move_optimum(seed in any::<u64>(), other in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let constraints = random_feasible_constraints(&mut rng, SPEED);
        let v_des = Vec2::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5));
        let a = solve_velocity(&constraints, v_des, SPEED, seed);
        let b = solve_velocity(&constraints, v_des, SPEED, other);
        prop_assert!(a.velocity.distance(b.velocity) < 1e-9);
    }

    #[test]
    fn remote_neighbor_leaves_preference(angle in 0.0..std::f64::consts::TAU, vx in -0.2..0.2f64, vy in -0.2..0.2f64) {
        let mut a = AgentState::new(0, Vec2::ZERO, RADIUS, SPEED);
        a.preferred_velocity = Vec2::new(vx, vy);
        a.velocity = a.preferred_velocity;
        let b = AgentState::new(1, Vec2::from_angle(angle) * 100.0, RADIUS, SPEED);
        let out = new_velocity(&a, &[b], &OrcaParams::default(), 0);
        prop_assert!(out.velocity.distance(a.preferred_velocity) < 1e-12);
    }
}
