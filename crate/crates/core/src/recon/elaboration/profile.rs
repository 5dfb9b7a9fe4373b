//! Planar profiles recovered from projected side-face markers.

use crate::error::{Error, Result};
use crate::geometry::arrangement::split_convex;
use crate::geometry::ring;
use crate::geometry::{Line2, Point2};

/// Orients `line` so that every point satisfies `normal · p <= offset`.
pub fn orient_line(line: &Line2, points: &[Point2], tol: f64) -> Result<Line2> {
    let above = points.iter().any(|p| line.signed_distance(p) > tol);
    let below = points.iter().any(|p| line.signed_distance(p) < -tol);
    match (above, below) {
        (true, true) => Err(Error::SplitSides),
        (true, false) => Ok(Line2 { normal: -line.normal, offset: -line.offset }),
        _ => Ok(*line),
    }
}

/// Bounded intersection of half-planes `normal · p <= offset` as a
/// counterclockwise ring; `None` if empty, flat or unbounded.
pub fn halfplane_polygon(lines: &[Line2], tol: f64) -> Option<Vec<Point2>> {
    let reach = 1.0 + lines.iter().map(|l| l.offset.abs()).fold(0.0, f64::max);
    let big = 1e4 * reach;
    let mut cell = vec![Point2::new(-big, -big), Point2::new(big, -big), Point2::new(big, big), Point2::new(-big, big)];
    for l in lines {
        let (neg, _) = split_convex(&cell, l, tol);
        cell = neg?;
    }
    if cell.iter().any(|p| p.x.abs() >= big * 0.999 || p.y.abs() >= big * 0.999) {
        return None;
    }
    let r = ring::remove_collinear(&cell, tol);
    (r.len() >= 3 && ring::signed_area(&r) > tol * tol).then_some(r)
}

/// Closed ring through consecutive intersections of lines listed clockwise.
/// Returns the counterclockwise ring and, per ring edge, the index of its line.
pub fn ordered_profile(lines_cw: &[Line2], tol: f64) -> Result<(Vec<Point2>, Vec<usize>)> {
    let k = lines_cw.len();
    if k < 3 {
        return Err(Error::OrderCycleBroken);
    }
    // w[o] starts clockwise edge o, which lies on line o.
    let mut w = Vec::with_capacity(k);
    for o in 0..k {
        let prev = &lines_cw[(o + k - 1) % k];
        w.push(prev.intersection(&lines_cw[o]).ok_or(Error::OrderCycleBroken)?);
    }
    if !ring::is_simple(&w, tol) {
        return Err(Error::OrderCycleBroken);
    }
    if ring::signed_area(&w) > 0.0 {
        // Listed counterclockwise after all; keep it.
        return Ok((w, (0..k).collect()));
    }
    let ccw: Vec<Point2> = (0..k).map(|i| w[(k - i) % k]).collect();
    Ok((ccw, (0..k).map(|i| k - 1 - i).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_from_halfplanes() {
        let lines = [Line2::vertical(1.0), Line2::horizontal(1.0), Line2 { normal: -Line2::vertical(0.0).normal, offset: 0.0 }, Line2 { normal: -Line2::horizontal(0.0).normal, offset: 0.0 }];
        let r = halfplane_polygon(&lines, 1e-9).unwrap();
        assert_eq!(r.len(), 4);
        assert!((ring::signed_area(&r) - 1.0).abs() < 1e-9);
        assert!(halfplane_polygon(&lines[..3], 1e-9).is_none());
    }

    #[test]
    fn l_shape_from_clockwise_lines() {
        // Clockwise from the left edge: x=0, y=2, x=1, y=1, x=2, y=0.
        let lines = [
            Line2::vertical(0.0),
            Line2::horizontal(2.0),
            Line2::vertical(1.0),
            Line2::horizontal(1.0),
            Line2::vertical(2.0),
            Line2::horizontal(0.0),
        ];
        let (r, map) = ordered_profile(&lines, 1e-9).unwrap();
        assert!((ring::signed_area(&r) - 3.0).abs() < 1e-12);
        for (i, &li) in map.iter().enumerate() {
            let (a, b) = (r[i], r[(i + 1) % r.len()]);
            assert!(lines[li].signed_distance(&a).abs() < 1e-12 && lines[li].signed_distance(&b).abs() < 1e-12);
        }
    }

    #[test]
    fn parallel_neighbours_break_the_cycle() {
        let lines = [Line2::vertical(0.0), Line2::vertical(1.0), Line2::horizontal(0.0), Line2::horizontal(1.0)];
        assert_eq!(ordered_profile(&lines, 1e-9), Err(Error::OrderCycleBroken));
    }
}
