//! Closed 2D rings stored as vertex lists without repeating the first vertex.

use super::{cmp_point2, orient2, Point2};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Location {
    Inside,
    Boundary,
    Outside,
}

/// Shoelace area, positive for counterclockwise rings.
pub fn signed_area(ring: &[Point2]) -> f64 {
    let n = ring.len();
    let mut s = 0.0;
    for i in 0..n {
        let a = ring[i];
        let b = ring[(i + 1) % n];
        s += a.x * b.y - b.x * a.y;
    }
    0.5 * s
}

pub fn segment_distance(p: &Point2, a: &Point2, b: &Point2) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = ((p - a).dot(&ab) / len2).clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}

pub fn boundary_distance(p: &Point2, ring: &[Point2]) -> f64 {
    let n = ring.len();
    (0..n).map(|i| segment_distance(p, &ring[i], &ring[(i + 1) % n])).fold(f64::INFINITY, f64::min)
}

/// Point location against a ring; `tol` widens the boundary.
pub fn locate(p: &Point2, ring: &[Point2], tol: f64) -> Location {
    if boundary_distance(p, ring) <= tol {
        return Location::Boundary;
    }
    let n = ring.len();
    let mut inside = false;
    for i in 0..n {
        let a = ring[i];
        let b = ring[(i + 1) % n];
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
            if x > p.x {
                inside = !inside;
            }
        }
    }
    if inside {
        Location::Inside
    } else {
        Location::Outside
    }
}

/// Drops consecutive duplicates and vertices joining collinear edges.
pub fn remove_collinear(ring: &[Point2], tol: f64) -> Vec<Point2> {
    let mut pts: Vec<Point2> = Vec::with_capacity(ring.len());
    for p in ring {
        if pts.last().map_or(true, |q: &Point2| (p - q).norm() > tol) {
            pts.push(*p);
        }
    }
    while pts.len() > 1 && (pts[0] - pts[pts.len() - 1]).norm() <= tol {
        pts.pop();
    }
    let mut changed = true;
    while changed && pts.len() >= 3 {
        changed = false;
        let n = pts.len();
        for i in 0..n {
            let a = pts[(i + n - 1) % n];
            let b = pts[i];
            let c = pts[(i + 1) % n];
            let len = (c - a).norm().max(1e-300);
            if (orient2(&a, &b, &c) / len).abs() <= tol && (b - a).dot(&(c - b)) > 0.0 {
                pts.remove(i);
                changed = true;
                break;
            }
        }
    }
    pts
}

/// `true` if closed segments `ab` and `cd` share a point.
pub fn segments_touch(a: &Point2, b: &Point2, c: &Point2, d: &Point2, tol: f64) -> bool {
    let d1 = orient2(c, d, a);
    let d2 = orient2(c, d, b);
    let d3 = orient2(a, b, c);
    let d4 = orient2(a, b, d);
    if ((d1 > tol && d2 < -tol) || (d1 < -tol && d2 > tol)) && ((d3 > tol && d4 < -tol) || (d3 < -tol && d4 > tol)) {
        return true;
    }
    segment_distance(a, c, d) <= tol
        || segment_distance(b, c, d) <= tol
        || segment_distance(c, a, b) <= tol
        || segment_distance(d, a, b) <= tol
}

/// Simple ring: non-adjacent edges are disjoint and adjacent edges meet only at their shared vertex.
pub fn is_simple(ring: &[Point2], tol: f64) -> bool {
    let n = ring.len();
    if n < 3 {
        return false;
    }
    for i in 0..n {
        let (a, b) = (ring[i], ring[(i + 1) % n]);
        if (b - a).norm() <= tol {
            return false;
        }
        for j in (i + 1)..n {
            let (c, d) = (ring[j], ring[(j + 1) % n]);
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if adjacent {
                let folds = if j == i + 1 {
                    segment_distance(&d, &a, &b) <= tol || segment_distance(&a, &c, &d) <= tol
                } else {
                    segment_distance(&b, &c, &d) <= tol || segment_distance(&c, &a, &b) <= tol
                };
                if folds {
                    return false;
                }
                continue;
            }
            if segments_touch(&a, &b, &c, &d, tol) {
                return false;
            }
        }
    }
    true
}

/// Strict convex hull (no collinear vertices), counterclockwise.
pub fn convex_hull(points: &[Point2], tol: f64) -> Vec<Point2> {
    let mut pts: Vec<Point2> = points.to_vec();
    pts.sort_by(|a, b| cmp_point2(a, b, 0.0));
    pts.dedup_by(|a, b| (*a - *b).norm() <= tol);
    if pts.len() < 3 {
        return pts;
    }
    let mut lower: Vec<Point2> = Vec::new();
    for p in &pts {
        while lower.len() >= 2 && orient2(&lower[lower.len() - 2], &lower[lower.len() - 1], p) <= tol * (p - lower[lower.len() - 2]).norm() {
            lower.pop();
        }
        lower.push(*p);
    }
    let mut upper: Vec<Point2> = Vec::new();
    for p in pts.iter().rev() {
        while upper.len() >= 2 && orient2(&upper[upper.len() - 2], &upper[upper.len() - 1], p) <= tol * (p - upper[upper.len() - 2]).norm() {
            upper.pop();
        }
        upper.push(*p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Rotates the ring so it starts at its lexicographically smallest vertex.
pub fn rotate_to_min(ring: &mut [Point2], tol: f64) {
    if ring.is_empty() {
        return;
    }
    let mut best = 0;
    for i in 1..ring.len() {
        if cmp_point2(&ring[i], &ring[best], tol) == std::cmp::Ordering::Less {
            best = i;
        }
    }
    ring.rotate_left(best);
}

pub fn vertex_centroid(ring: &[Point2]) -> Point2 {
    let n = ring.len().max(1) as f64;
    let s = ring.iter().fold(nalgebra::Vector2::zeros(), |acc, p| acc + p.coords);
    Point2::from(s / n)
}
