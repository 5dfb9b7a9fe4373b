//! Ear-clipping triangulation of polygons with holes.

use super::polygon::Polygon2;
use super::ring;
use super::{orient2, Point2};
use crate::error::{Error, Result};

/// Triangles (counterclockwise) covering the polygon.
pub fn triangulate(poly: &Polygon2) -> Result<Vec<[Point2; 3]>> {
    let ring = bridge_holes(poly)?;
    ear_clip(&ring)
}

/// Joins every hole to the outer ring with a zero-width slit, returning one ring.
fn bridge_holes(poly: &Polygon2) -> Result<Vec<Point2>> {
    let mut outer = poly.outer.clone();
    if ring::signed_area(&outer) < 0.0 {
        outer.reverse();
    }
    let mut holes: Vec<Vec<Point2>> = poly
        .holes
        .iter()
        .map(|h| {
            let mut h = h.clone();
            if ring::signed_area(&h) > 0.0 {
                h.reverse();
            }
            h
        })
        .collect();
    // Process holes from right to left so bridges do not cross later holes.
    holes.sort_by(|a, b| {
        let ma = a.iter().map(|p| p.x).fold(f64::MIN, f64::max);
        let mb = b.iter().map(|p| p.x).fold(f64::MIN, f64::max);
        mb.partial_cmp(&ma).unwrap()
    });
    for h in holes {
        let hi = (0..h.len()).max_by(|&i, &j| h[i].x.partial_cmp(&h[j].x).unwrap()).unwrap();
        let hp = h[hi];
        let n = outer.len();
        let mut best: Option<(f64, usize)> = None;
        for oi in 0..n {
            let op = outer[oi];
            if !visible(&hp, &op, &outer, &h) {
                continue;
            }
            let d = (op - hp).norm_squared();
            if best.map_or(true, |(bd, _)| d < bd) {
                best = Some((d, oi));
            }
        }
        let (_, oi) = best.ok_or_else(|| Error::Degenerate("hole cannot be bridged".into()))?;
        let mut merged = Vec::with_capacity(n + h.len() + 2);
        merged.extend_from_slice(&outer[..=oi]);
        for k in 0..=h.len() {
            merged.push(h[(hi + k) % h.len()]);
        }
        merged.push(outer[oi]);
        merged.extend_from_slice(&outer[oi + 1..]);
        outer = merged;
    }
    Ok(outer)
}

fn proper_cross(a: &Point2, b: &Point2, c: &Point2, d: &Point2) -> bool {
    let o1 = orient2(a, b, c);
    let o2 = orient2(a, b, d);
    let o3 = orient2(c, d, a);
    let o4 = orient2(c, d, b);
    o1 * o2 < 0.0 && o3 * o4 < 0.0
}

fn visible(a: &Point2, b: &Point2, outer: &[Point2], hole: &[Point2]) -> bool {
    for r in [outer, hole] {
        let n = r.len();
        for i in 0..n {
            let (p, q) = (r[i], r[(i + 1) % n]);
            if p == *a || p == *b || q == *a || q == *b {
                continue;
            }
            if proper_cross(a, b, &p, &q) {
                return false;
            }
            // Collinear vertex in the way.
            if ring::segment_distance(&p, a, b) < 1e-12 {
                return false;
            }
        }
    }
    true
}

fn ear_clip(ring: &[Point2]) -> Result<Vec<[Point2; 3]>> {
    let extent = ring.iter().fold(0.0f64, |m, p| m.max(p.x.abs()).max(p.y.abs())).max(1.0);
    // Distances below this count as zero; a vertex that close to an ear's
    // edge blocks the ear.
    let eps = extent * 1e-9;
    let mut idx: Vec<usize> = (0..ring.len()).collect();
    let mut tris = Vec::new();
    let mut guard = 0;
    while idx.len() > 3 {
        let n = idx.len();
        let mut clipped = false;
        for i in 0..n {
            let (ia, ib, ic) = (idx[(i + n - 1) % n], idx[i], idx[(i + 1) % n]);
            let (a, b, c) = (ring[ia], ring[ib], ring[ic]);
            if orient2(&a, &b, &c) <= eps * (c - a).norm() {
                continue;
            }
            let blocked = idx.iter().any(|&k| {
                let p = ring[k];
                k != ia && k != ib && k != ic && p != a && p != b && p != c && in_triangle(&p, &a, &b, &c, eps)
            });
            if blocked {
                continue;
            }
            tris.push([a, b, c]);
            idx.remove(i);
            clipped = true;
            break;
        }
        if !clipped {
            // Drop a degenerate (collinear) vertex if present, otherwise give up.
            let n = idx.len();
            let pos = (0..n).find(|&i| {
                let (a, b, c) = (ring[idx[(i + n - 1) % n]], ring[idx[i]], ring[idx[(i + 1) % n]]);
                orient2(&a, &b, &c).abs() <= eps * (c - a).norm()
            });
            match pos {
                Some(i) => {
                    idx.remove(i);
                }
                None => return Err(Error::Degenerate("ear clipping failed".into())),
            }
        }
        guard += 1;
        if guard > ring.len() * ring.len() + 10 {
            return Err(Error::Degenerate("ear clipping did not terminate".into()));
        }
    }
    if idx.len() == 3 {
        let (a, b, c) = (ring[idx[0]], ring[idx[1]], ring[idx[2]]);
        if orient2(&a, &b, &c) > 0.0 {
            tris.push([a, b, c]);
        }
    }
    Ok(tris)
}

/// Closed triangle test, widened by `eps` across each edge.
fn in_triangle(p: &Point2, a: &Point2, b: &Point2, c: &Point2, eps: f64) -> bool {
    orient2(a, b, p) >= -eps * (b - a).norm() && orient2(b, c, p) >= -eps * (c - b).norm() && orient2(c, a, p) >= -eps * (a - c).norm()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn area(t: &[[Point2; 3]]) -> f64 {
        t.iter().map(|[a, b, c]| orient2(a, b, c) * 0.5).sum()
    }

    #[test]
    fn square_with_hole() {
        let p = Polygon2::new(Polygon2::rect(0., 0., 4., 4.).outer, vec![Polygon2::rect(1., 1., 2., 3.).outer]);
        let t = triangulate(&p).unwrap();
        assert!((area(&t) - 14.0).abs() < 1e-12);
        assert!(t.iter().all(|[a, b, c]| orient2(a, b, c) > 0.0));
    }

    #[test]
    fn l_shape() {
        let l = Polygon2::simple(vec![
            Point2::new(0., 0.),
            Point2::new(2., 0.),
            Point2::new(2., 1.),
            Point2::new(1., 1.),
            Point2::new(1., 2.),
            Point2::new(0., 2.),
        ]);
        let t = triangulate(&l).unwrap();
        assert_eq!(t.len(), 4);
        assert!((area(&t) - 3.0).abs() < 1e-12);
    }
}
