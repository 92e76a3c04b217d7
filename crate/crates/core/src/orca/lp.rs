//! Incremental 2D linear programming over ORCA half-planes.
//!
//! Internally each half-plane is a directed line whose feasible side is on
//! the left, which keeps the intersection arithmetic to a handful of 2D
//! determinants.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::HalfPlane;
use crate::geometry::Vec2;

const LP_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy)]
struct Line {
    point: Vec2,
    direction: Vec2,
}

impl From<&HalfPlane> for Line {
    fn from(h: &HalfPlane) -> Self {
        Line {
            point: h.point,
            direction: Vec2::new(h.normal.y, -h.normal.x),
        }
    }
}

impl Line {
    /// Positive when `v` is on the infeasible side.
    fn violation(&self, v: Vec2) -> f64 {
        self.direction.det(self.point - v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LpSolution {
    pub velocity: Vec2,
    /// False when the half-planes and speed disc have no common point; the
    /// velocity then minimizes the largest violation instead.
    pub feasible: bool,
}

/// Closest velocity to `v_des` inside every half-plane and the disc
/// `‖v‖ ≤ max_speed`.
///
/// Constraints are processed in an order shuffled by `seed`, which only
/// affects running time: the optimum of a strictly convex objective over a
/// convex set is unique.
pub fn solve_velocity(constraints: &[HalfPlane], v_des: Vec2, max_speed: f64, seed: u64) -> LpSolution {
    let mut lines: Vec<Line> = constraints.iter().map(Line::from).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    lines.shuffle(&mut rng);

    let mut result = Vec2::ZERO;
    let fail = lp2(&lines, max_speed, v_des, false, &mut result);
    if fail < lines.len() {
        lp3(&lines, fail, max_speed, &mut result);
        return LpSolution {
            velocity: result,
            feasible: false,
        };
    }
    LpSolution {
        velocity: result,
        feasible: true,
    }
}

/// Optimizes along line `line_no` subject to the lines before it.
fn lp1(lines: &[Line], line_no: usize, radius: f64, opt: Vec2, direction_opt: bool, result: &mut Vec2) -> bool {
    let line = lines[line_no];
    let dot = line.point.dot(line.direction);
    let discriminant = dot * dot + radius * radius - line.point.norm_squared();
    if discriminant < 0.0 {
        return false;
    }
    let sqrt_disc = discriminant.sqrt();
    let mut t_left = -dot - sqrt_disc;
    let mut t_right = -dot + sqrt_disc;

    for other in &lines[..line_no] {
        let denominator = line.direction.det(other.direction);
        let numerator = other.direction.det(line.point - other.point);
        if denominator.abs() <= LP_EPS {
            if numerator < 0.0 {
                return false;
            }
            continue;
        }
        let t = numerator / denominator;
        if denominator >= 0.0 {
            t_right = t_right.min(t);
        } else {
            t_left = t_left.max(t);
        }
        if t_left > t_right {
            return false;
        }
    }

    *result = if direction_opt {
        if opt.dot(line.direction) > 0.0 {
            line.point + line.direction * t_right
        } else {
            line.point + line.direction * t_left
        }
    } else {
        let t = line.direction.dot(opt - line.point).clamp(t_left, t_right);
        line.point + line.direction * t
    };
    true
}

/// Returns the index of the first line that could not be satisfied, or
/// `lines.len()` on success.
fn lp2(lines: &[Line], radius: f64, opt: Vec2, direction_opt: bool, result: &mut Vec2) -> usize {
    *result = if direction_opt {
        opt * radius
    } else if opt.norm_squared() > radius * radius {
        opt.normalize_or_zero() * radius
    } else {
        opt
    };
    for i in 0..lines.len() {
        if lines[i].violation(*result) > 0.0 {
            let previous = *result;
            if !lp1(lines, i, radius, opt, direction_opt, result) {
                *result = previous;
                return i;
            }
        }
    }
    lines.len()
}

/// Minimizes the maximum violation starting at `begin`, when [`lp2`] fails.
fn lp3(lines: &[Line], begin: usize, radius: f64, result: &mut Vec2) {
    let mut distance = 0.0;
    for i in begin..lines.len() {
        if lines[i].violation(*result) <= distance {
            continue;
        }
        let mut projected = Vec::with_capacity(i);
        for j in 0..i {
            let determinant = lines[i].direction.det(lines[j].direction);
            let point = if determinant.abs() <= LP_EPS {
                if lines[i].direction.dot(lines[j].direction) > 0.0 {
                    continue;
                }
                (lines[i].point + lines[j].point) * 0.5
            } else {
                lines[i].point
                    + lines[i].direction * (lines[j].direction.det(lines[i].point - lines[j].point) / determinant)
            };
            projected.push(Line {
                point,
                direction: (lines[j].direction - lines[i].direction).normalize_or_zero(),
            });
        }
        let previous = *result;
        let opt = Vec2::new(-lines[i].direction.y, lines[i].direction.x);
        if lp2(&projected, radius, opt, true, result) < projected.len() {
            // Only floating-point error can make this fail; keep the last
            // good answer.
            *result = previous;
        }
        distance = lines[i].violation(*result);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hp(px: f64, py: f64, nx: f64, ny: f64) -> HalfPlane {
        HalfPlane::new(Vec2::new(px, py), Vec2::new(nx, ny))
    }

    #[test]
    fn unconstrained_interior_and_disc_projection() {
        let s = solve_velocity(&[], Vec2::new(0.2, 0.1), 0.3, 0);
        assert!(s.feasible);
        assert_eq!(s.velocity, Vec2::new(0.2, 0.1));
        let s = solve_velocity(&[], Vec2::new(1.0, 0.0), 0.3, 0);
        assert!((s.velocity - Vec2::new(0.3, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn single_halfplane_projection() {
        // v.x <= 0.1
        let c = [hp(0.1, 0.0, -1.0, 0.0)];
        let s = solve_velocity(&c, Vec2::new(0.25, 0.05), 0.3, 1);
        assert!(s.feasible);
        assert!((s.velocity - Vec2::new(0.1, 0.05)).norm() < 1e-12);
    }

    #[test]
    fn corner_of_two_halfplanes() {
        let c = [hp(0.1, 0.0, -1.0, 0.0), hp(0.0, 0.05, 0.0, -1.0)];
        let s = solve_velocity(&c, Vec2::new(0.3, 0.3), 1.0, 7);
        assert!((s.velocity - Vec2::new(0.1, 0.05)).norm() < 1e-12);
    }

    #[test]
    fn infeasible_pair_splits_violation() {
        // v.x >= 0.2 and v.x <= -0.2 cannot both hold; the minimax answer
        // sits at v.x = 0 with violation 0.2 on each.
        let c = [hp(0.2, 0.0, 1.0, 0.0), hp(-0.2, 0.0, -1.0, 0.0)];
        let s = solve_velocity(&c, Vec2::new(0.0, 0.1), 0.3, 3);
        assert!(!s.feasible);
        assert!(s.velocity.x.abs() < 1e-9);
        for h in &c {
            assert!((h.signed_slack(s.velocity) + 0.2).abs() < 1e-9);
        }
    }

    #[test]
    fn order_does_not_change_result() {
        let c = [
            hp(0.05, 0.0, -1.0, 0.2),
            hp(0.0, 0.08, 0.1, -1.0),
            hp(-0.1, -0.1, 0.7, 0.7),
        ];
        let c: Vec<HalfPlane> = c
            .iter()
            .map(|h| HalfPlane::new(h.point, h.normal.normalize_or_zero()))
            .collect();
        let first = solve_velocity(&c, Vec2::new(0.3, 0.2), 0.3, 0).velocity;
        for seed in 1..20 {
            let v = solve_velocity(&c, Vec2::new(0.3, 0.2), 0.3, seed).velocity;
            assert!((v - first).norm() < 1e-12);
        }
    }
}
