//! Planar polygon predicates.
//!
//! Polygons are vertex lists without a repeated closing vertex. Interior
//! tests are strict: points on the boundary (within [`EPS`]) are outside.

use super::{GeometryError, Vec2};

pub const EPS: f64 = 1e-9;

/// Shoelace signed area; positive for counter-clockwise vertex order.
pub fn signed_area(poly: &[Vec2]) -> f64 {
    let n = poly.len();
    (0..n).map(|i| poly[i].det(poly[(i + 1) % n])).sum::<f64>() * 0.5
}

pub fn edges(poly: &[Vec2]) -> impl Iterator<Item = (Vec2, Vec2)> + '_ {
    let n = poly.len();
    (0..n).map(move |i| (poly[i], poly[(i + 1) % n]))
}

fn orientation(a: Vec2, b: Vec2, c: Vec2) -> f64 {
    (b - a).det(c - a)
}

fn on_segment(a: Vec2, b: Vec2, p: Vec2) -> bool {
    p.x >= a.x.min(b.x) - EPS && p.x <= a.x.max(b.x) + EPS && p.y >= a.y.min(b.y) - EPS && p.y <= a.y.max(b.y) + EPS
}

/// Closed-segment intersection test (touching counts).
pub fn segments_intersect(a: Vec2, b: Vec2, c: Vec2, d: Vec2) -> bool {
    let scale = 1.0 + (b - a).norm() * (d - c).norm();
    let tol = EPS * scale;
    let d1 = orientation(c, d, a);
    let d2 = orientation(c, d, b);
    let d3 = orientation(a, b, c);
    let d4 = orientation(a, b, d);
    if ((d1 > tol && d2 < -tol) || (d1 < -tol && d2 > tol)) && ((d3 > tol && d4 < -tol) || (d3 < -tol && d4 > tol)) {
        return true;
    }
    (d1.abs() <= tol && on_segment(c, d, a))
        || (d2.abs() <= tol && on_segment(c, d, b))
        || (d3.abs() <= tol && on_segment(a, b, c))
        || (d4.abs() <= tol && on_segment(a, b, d))
}

/// Distance from `p` to the closed segment `a`–`b`.
pub fn point_segment_distance(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    let ab = b - a;
    let len_sq = ab.norm_squared();
    if len_sq == 0.0 {
        return p.distance(a);
    }
    let t = ((p - a).dot(ab) / len_sq).clamp(0.0, 1.0);
    p.distance(a + ab * t)
}

/// True if `p` lies strictly inside the polygon (boundary excluded).
pub fn contains_strict(poly: &[Vec2], p: Vec2) -> bool {
    if edges(poly).any(|(a, b)| point_segment_distance(p, a, b) <= EPS) {
        return false;
    }
    let mut inside = false;
    for (a, b) in edges(poly) {
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
            if p.x < x {
                inside = !inside;
            }
        }
    }
    inside
}

/// True if the open segment `a`–`b` passes through the polygon interior.
///
/// The segment is split at every boundary contact and each piece is probed
/// at its midpoint, so grazing a vertex or running along an edge is allowed.
pub fn segment_crosses_interior(poly: &[Vec2], a: Vec2, b: Vec2) -> bool {
    let dir = b - a;
    let len_sq = dir.norm_squared();
    if len_sq == 0.0 {
        return contains_strict(poly, a);
    }
    let mut cuts = vec![0.0, 1.0];
    for (c, d) in edges(poly) {
        let e = d - c;
        let denom = dir.det(e);
        if denom.abs() > EPS * dir.norm() * e.norm() {
            let t = (c - a).det(e) / denom;
            let s = (c - a).det(dir) / denom;
            if (-EPS..=1.0 + EPS).contains(&s) && t > 0.0 && t < 1.0 {
                cuts.push(t);
            }
        }
        // Vertices lying on the segment (covers collinear overlaps).
        for v in [c, d] {
            let t = (v - a).dot(dir) / len_sq;
            if t > 0.0 && t < 1.0 && point_segment_distance(v, a, b) <= EPS {
                cuts.push(t);
            }
        }
    }
    cuts.sort_by(|x, y| x.total_cmp(y));
    cuts.windows(2)
        .filter(|w| w[1] - w[0] > 1e-12)
        .any(|w| contains_strict(poly, a + dir * (0.5 * (w[0] + w[1]))))
}

fn is_simple(poly: &[Vec2]) -> bool {
    let n = poly.len();
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        if a.distance(b) <= EPS {
            return false;
        }
        for j in (i + 1)..n {
            // Adjacent edges share a vertex and are exempt.
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            let (c, d) = (poly[j], poly[(j + 1) % n]);
            if segments_intersect(a, b, c, d) {
                return false;
            }
        }
    }
    true
}

/// Checks that `poly` has at least three vertices, positive area, no
/// self-intersections and counter-clockwise order.
pub fn validate_ccw(poly: &[Vec2]) -> Result<(), GeometryError> {
    if poly.len() < 3 {
        return Err(GeometryError::DegeneratePolygon(format!(
            "{} vertices (need at least 3)",
            poly.len()
        )));
    }
    if poly.iter().any(|p| !p.is_finite()) {
        return Err(GeometryError::DegeneratePolygon("non-finite vertex".into()));
    }
    if !is_simple(poly) {
        return Err(GeometryError::SelfIntersecting);
    }
    let area = signed_area(poly);
    if area.abs() <= EPS {
        return Err(GeometryError::DegeneratePolygon("zero area".into()));
    }
    if area < 0.0 {
        return Err(GeometryError::ClockwisePolygon);
    }
    Ok(())
}
