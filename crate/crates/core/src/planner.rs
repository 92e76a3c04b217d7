//! Shortest collision-free waypoint paths around polygonal obstacles.
//!
//! Obstacles are inflated by a clearance margin and the path is searched on
//! the visibility graph of the inflated vertices plus start and goal.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use thiserror::Error;

use crate::geometry::polygon::{contains_strict, segment_crosses_interior, validate_ccw};
use crate::geometry::{GeometryError, Vec2};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlannerError {
    #[error("start {0:?} is inside an inflated obstacle")]
    StartBlocked(Vec2),
    #[error("goal {0:?} is inside an inflated obstacle")]
    GoalBlocked(Vec2),
    #[error("goal {goal:?} is unreachable from {start:?}")]
    Unreachable { start: Vec2, goal: Vec2 },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Outward offset of a CCW polygon by `margin`.
///
/// Corners use miter joins. Where the miter would move a convex vertex more
/// than `2 * margin`, the corner is beveled with two vertices instead, so
/// every point of the original boundary keeps at least `margin` clearance.
pub fn inflate_polygon(polygon: &[Vec2], margin: f64) -> Result<Vec<Vec2>, GeometryError> {
    validate_ccw(polygon)?;
    if !(margin >= 0.0) {
        return Err(GeometryError::DegeneratePolygon(format!(
            "margin {margin} must be non-negative"
        )));
    }
    if margin == 0.0 {
        return Ok(polygon.to_vec());
    }
    let n = polygon.len();
    let mut out = Vec::with_capacity(n + 4);
    for i in 0..n {
        let prev = polygon[(i + n - 1) % n];
        let v = polygon[i];
        let next = polygon[(i + 1) % n];
        let d_in = (v - prev).normalize_or_zero();
        let d_out = (next - v).normalize_or_zero();
        // Right-hand normals point outward for CCW order.
        let n1 = Vec2::new(d_in.y, -d_in.x);
        let n2 = Vec2::new(d_out.y, -d_out.x);
        let cos = n1.dot(n2);
        let miter_len = margin * (2.0 / (1.0 + cos).max(1e-12)).sqrt();
        let convex = d_in.det(d_out) > 0.0;
        if miter_len <= 2.0 * margin * (1.0 + 1e-9) {
            out.push(v + (n1 + n2) * (margin / (1.0 + cos)));
        } else if convex {
            let bisector = (n1 + n2).normalize_or_zero();
            let alpha = n1.dot(bisector).clamp(-1.0, 1.0).acos();
            let s = margin * (alpha / 2.0).tan();
            out.push(v + n1 * margin + d_in * s);
            out.push(v + n2 * margin - d_out * s);
        } else {
            out.push(v + (n1 + n2).normalize_or_zero() * (2.0 * margin));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct VisibilityGraph {
    pub nodes: Vec<Vec2>,
    /// Adjacency lists of `(neighbor, length)`, sorted by neighbor index.
    pub adjacency: Vec<Vec<(usize, f64)>>,
}

impl VisibilityGraph {
    /// Node 0 is `start`, node 1 is `goal`, then inflated vertices in order.
    pub fn build(start: Vec2, goal: Vec2, inflated: &[Vec<Vec2>]) -> Self {
        let mut nodes = vec![start, goal];
        for poly in inflated {
            for &v in poly {
                if !inflated.iter().any(|p| contains_strict(p, v)) {
                    nodes.push(v);
                }
            }
        }
        let n = nodes.len();
        let mut adjacency = vec![Vec::new(); n];
        for i in 0..n {
            for j in (i + 1)..n {
                let (a, b) = (nodes[i], nodes[j]);
                if inflated.iter().all(|p| !segment_crosses_interior(p, a, b)) {
                    let len = a.distance(b);
                    adjacency[i].push((j, len));
                    adjacency[j].push((i, len));
                }
            }
        }
        for list in &mut adjacency {
            list.sort_by_key(|&(j, _)| j);
        }
        Self { nodes, adjacency }
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(i, l)| l.iter().filter(move |&&(j, _)| j > i).map(move |&(j, d)| (i, j, d)))
    }

    /// Distances from every node to `target` (infinite when disconnected).
    pub fn distances_to(&self, target: usize) -> Vec<f64> {
        #[derive(PartialEq)]
        struct Entry(f64, usize);
        impl Eq for Entry {}
        impl Ord for Entry {
            fn cmp(&self, other: &Self) -> Ordering {
                other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
            }
        }
        impl PartialOrd for Entry {
            fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
                Some(self.cmp(other))
            }
        }

        let mut dist = vec![f64::INFINITY; self.nodes.len()];
        let mut heap = BinaryHeap::new();
        dist[target] = 0.0;
        heap.push(Entry(0.0, target));
        while let Some(Entry(d, u)) = heap.pop() {
            if d > dist[u] {
                continue;
            }
            for &(v, w) in &self.adjacency[u] {
                let nd = d + w;
                if nd < dist[v] {
                    dist[v] = nd;
                    heap.push(Entry(nd, v));
                }
            }
        }
        dist
    }

    /// Shortest node sequence from `from` to `to`; among equal-length paths
    /// the lexicographically smallest index sequence wins.
    pub fn shortest_path(&self, from: usize, to: usize) -> Option<Vec<usize>> {
        let dist = self.distances_to(to);
        if !dist[from].is_finite() {
            return None;
        }
        let mut path = vec![from];
        let mut cur = from;
        while cur != to {
            let tol = 1e-9 * (1.0 + dist[cur]);
            let next = self.adjacency[cur]
                .iter()
                .find(|&&(j, w)| (w + dist[j] - dist[cur]).abs() <= tol && dist[j] < dist[cur])
                .map(|&(j, _)| j)?;
            path.push(next);
            cur = next;
        }
        Some(path)
    }
}

pub fn path_length(path: &[Vec2]) -> f64 {
    path.windows(2).map(|w| w[0].distance(w[1])).sum()
}

/// Obstacle set inflated once and reused across queries.
#[derive(Debug, Clone)]
pub struct Planner {
    inflated: Vec<Vec<Vec2>>,
}

impl Planner {
    pub fn new(obstacles: &[Vec<Vec2>], margin: f64) -> Result<Self, GeometryError> {
        let inflated = obstacles
            .iter()
            .map(|p| inflate_polygon(p, margin))
            .collect::<Result<_, _>>()?;
        Ok(Self { inflated })
    }

    pub fn inflated(&self) -> &[Vec<Vec2>] {
        &self.inflated
    }

    pub fn is_blocked(&self, p: Vec2) -> bool {
        self.inflated.iter().any(|poly| contains_strict(poly, p))
    }

    pub fn plan(&self, start: Vec2, goal: Vec2) -> Result<Vec<Vec2>, PlannerError> {
        if self.is_blocked(start) {
            return Err(PlannerError::StartBlocked(start));
        }
        if self.is_blocked(goal) {
            return Err(PlannerError::GoalBlocked(goal));
        }
        if self.inflated.iter().all(|p| !segment_crosses_interior(p, start, goal)) {
            return Ok(vec![start, goal]);
        }
        let graph = VisibilityGraph::build(start, goal, &self.inflated);
        let ids = graph
            .shortest_path(0, 1)
            .ok_or(PlannerError::Unreachable { start, goal })?;
        Ok(ids.into_iter().map(|i| graph.nodes[i]).collect())
    }
}

pub fn plan_path(start: Vec2, goal: Vec2, obstacles: &[Vec<Vec2>], margin: f64) -> Result<Vec<Vec2>, PlannerError> {
    Planner::new(obstacles, margin)?.plan(start, goal)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::polygon::point_segment_distance;

    fn centered_square(half: f64) -> Vec<Vec2> {
        vec![
            Vec2::new(-half, -half),
            Vec2::new(half, -half),
            Vec2::new(half, half),
            Vec2::new(-half, half),
        ]
    }

    #[test]
    fn zero_margin_is_identity() {
        let sq = centered_square(0.5);
        assert_eq!(inflate_polygon(&sq, 0.0).unwrap(), sq);
    }

    #[test]
    fn square_grows_by_margin() {
        let out = inflate_polygon(&centered_square(0.5), 0.1).unwrap();
        for (got, want) in out.iter().zip(centered_square(0.6)) {
            assert!((*got - want).norm() < 1e-12);
        }
    }

    #[test]
    fn triangle_edges_shift_by_margin() {
        // Acute corner at the origin exercises the bevel.
        let tri = vec![Vec2::new(0.0, 0.0), Vec2::new(2.0, 0.3), Vec2::new(1.5, 1.0)];
        let m = 0.15;
        let out = inflate_polygon(&tri, m).unwrap();
        assert_eq!(out.len(), 4);
        for (a, b) in crate::geometry::polygon::edges(&tri) {
            let d = (b - a).normalize_or_zero();
            let normal = Vec2::new(d.y, -d.x);
            // Some inflated edge lies on the offset line.
            let found = crate::geometry::polygon::edges(&out)
                .any(|(p, q)| ((p - a).dot(normal) - m).abs() < 1e-12 && ((q - a).dot(normal) - m).abs() < 1e-12);
            assert!(found);
        }
        for &v in &out {
            let clearance = crate::geometry::polygon::edges(&tri)
                .map(|(a, b)| point_segment_distance(v, a, b))
                .fold(f64::INFINITY, f64::min);
            assert!(clearance >= m - 1e-12);
            let disp = tri.iter().map(|&p| p.distance(v)).fold(f64::INFINITY, f64::min);
            assert!(disp <= 2.0 * m + 1e-12);
        }
    }

    #[test]
    fn no_obstacles_gives_direct_path() {
        let p = plan_path(Vec2::new(0.0, 0.0), Vec2::new(1.0, 1.0), &[], 0.15).unwrap();
        assert_eq!(p, vec![Vec2::new(0.0, 0.0), Vec2::new(1.0, 1.0)]);
    }

    #[test]
    fn square_detour_matches_two_corner_geodesic() {
        let start = Vec2::new(-2.0, 0.0);
        let goal = Vec2::new(2.0, 0.0);
        let m = 0.15;
        let p = plan_path(start, goal, &[centered_square(0.5)], m).unwrap();
        assert_eq!(p.len(), 4);
        let h = 0.5 + m;
        let expected = 2.0 * ((2.0 - h).powi(2) + h * h).sqrt() + 2.0 * h;
        assert!((path_length(&p) - expected).abs() < 1e-6);
        // Lexicographic tie-break picks the lower corners (smaller indices).
        assert!(p[1].y < 0.0 && p[2].y < 0.0);
    }

    #[test]
    fn enclosed_goal_is_unreachable() {
        // Ring of four bars around the origin.
        let bar = |x0: f64, y0: f64, x1: f64, y1: f64| {
            vec![
                Vec2::new(x0, y0),
                Vec2::new(x1, y0),
                Vec2::new(x1, y1),
                Vec2::new(x0, y1),
            ]
        };
        let ring = vec![
            bar(-1.0, -1.0, 1.0, -0.8),
            bar(0.8, -1.0, 1.0, 1.0),
            bar(-1.0, 0.8, 1.0, 1.0),
            bar(-1.0, -1.0, -0.8, 1.0),
        ];
        let err = plan_path(Vec2::new(3.0, 0.0), Vec2::ZERO, &ring, 0.05).unwrap_err();
        assert!(matches!(err, PlannerError::Unreachable { .. }));
    }

    #[test]
    fn blocked_endpoints_are_reported() {
        let obs = [centered_square(0.5)];
        let planner = Planner::new(&obs, 0.15).unwrap();
        assert!(matches!(
            planner.plan(Vec2::ZERO, Vec2::new(2.0, 0.0)),
            Err(PlannerError::StartBlocked(_))
        ));
        assert!(matches!(
            planner.plan(Vec2::new(2.0, 0.0), Vec2::new(0.6, 0.0)),
            Err(PlannerError::GoalBlocked(_))
        ));
    }
}
