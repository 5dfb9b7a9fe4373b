use super::polygon::Polygon2;
use super::ring;
use super::{Point2, Vector2};
use crate::error::{Error, Result};
use crate::tolerance;
use nalgebra::Matrix3;

/// Line `normal · x = offset` with unit normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Line2 {
    pub normal: Vector2,
    pub offset: f64,
}

impl Line2 {
    pub fn new(normal: Vector2, offset: f64) -> Result<Self> {
        let len = normal.norm();
        if !(len > 1e-300) {
            return Err(Error::Degenerate("line normal has zero length".into()));
        }
        Ok(Self { normal: normal / len, offset: offset / len })
    }

    pub fn through(a: &Point2, b: &Point2) -> Result<Self> {
        let d = b - a;
        let n = Vector2::new(d.y, -d.x);
        Self::new(n, n.dot(&a.coords))
    }

    pub fn vertical(x: f64) -> Self {
        Self { normal: Vector2::x(), offset: x }
    }

    pub fn horizontal(y: f64) -> Self {
        Self { normal: Vector2::y(), offset: y }
    }

    pub fn signed_distance(&self, p: &Point2) -> f64 {
        self.normal.dot(&p.coords) - self.offset
    }

    pub fn same_set(&self, o: &Line2, tol: f64) -> bool {
        ((self.normal - o.normal).norm() <= tol * 10.0 && (self.offset - o.offset).abs() <= tol)
            || ((self.normal + o.normal).norm() <= tol * 10.0 && (self.offset + o.offset).abs() <= tol)
    }

    pub fn intersection(&self, o: &Line2) -> Option<Point2> {
        let det = self.normal.x * o.normal.y - self.normal.y * o.normal.x;
        if det.abs() < 1e-12 {
            return None;
        }
        let x = (self.offset * o.normal.y - o.offset * self.normal.y) / det;
        let y = (self.normal.x * o.offset - o.normal.x * self.offset) / det;
        Some(Point2::new(x, y))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BBox2 {
    pub min: Point2,
    pub max: Point2,
}

impl BBox2 {
    pub fn new(min: Point2, max: Point2) -> Self {
        Self { min, max }
    }

    pub fn of_points<'a>(pts: impl IntoIterator<Item = &'a Point2>) -> Option<Self> {
        let mut it = pts.into_iter();
        let f = *it.next()?;
        let mut b = Self { min: f, max: f };
        for p in it {
            b.include(p);
        }
        Some(b)
    }

    pub fn include(&mut self, p: &Point2) {
        self.min = Point2::new(self.min.x.min(p.x), self.min.y.min(p.y));
        self.max = Point2::new(self.max.x.max(p.x), self.max.y.max(p.y));
    }

    /// Scales about the centre; a zero extent is widened to `min_half`.
    pub fn scaled(&self, factor: f64, min_half: f64) -> Self {
        let c = Point2::from((self.min.coords + self.max.coords) * 0.5);
        let h = (self.max - self.min) * 0.5 * factor;
        let h = Vector2::new(h.x.max(min_half), h.y.max(min_half));
        Self { min: c - h, max: c + h }
    }

    pub fn polygon(&self) -> Polygon2 {
        Polygon2::rect(self.min.x, self.min.y, self.max.x, self.max.y)
    }

    pub fn area(&self) -> f64 {
        (self.max.x - self.min.x) * (self.max.y - self.min.y)
    }
}

/// Convex cells of a line arrangement clipped to a box.
#[derive(Debug, Clone)]
pub struct Arrangement2 {
    pub lines: Vec<Line2>,
    pub bbox: BBox2,
    pub regions: Vec<Polygon2>,
    pub adjacency: Vec<Vec<usize>>,
}

impl Arrangement2 {
    /// Region whose interior contains `p`.
    pub fn locate(&self, p: &Point2) -> Option<usize> {
        let tol = tolerance::geo();
        self.regions.iter().position(|r| r.locate(p, tol) == ring::Location::Inside)
    }

    /// Whether a region touches the clipping box boundary.
    pub fn touches_bbox(&self, i: usize) -> bool {
        let tol = tolerance::geo() * 10.0;
        let b = &self.bbox;
        self.regions[i].outer.iter().any(|p| {
            (p.x - b.min.x).abs() <= tol || (p.x - b.max.x).abs() <= tol || (p.y - b.min.y).abs() <= tol || (p.y - b.max.y).abs() <= tol
        })
    }
}

pub fn build_arrangement(lines: &[Line2], bbox: BBox2) -> Arrangement2 {
    let tol = tolerance::geo();
    let mut uniq: Vec<Line2> = Vec::new();
    for l in lines {
        if !uniq.iter().any(|u| u.same_set(l, tol)) {
            uniq.push(*l);
        }
    }
    let mut cells: Vec<Vec<Point2>> = vec![bbox.polygon().outer];
    for l in &uniq {
        let mut next = Vec::with_capacity(cells.len() * 2);
        for c in cells {
            let (neg, pos) = split_convex(&c, l, tol);
            for part in [neg, pos].into_iter().flatten() {
                next.push(part);
            }
        }
        cells = next;
    }
    let regions: Vec<Polygon2> = cells.into_iter().map(|c| Polygon2::simple(ring::remove_collinear(&c, tol))).collect();
    let adjacency = adjacency(&regions, tol);
    Arrangement2 { lines: uniq, bbox, regions, adjacency }
}

/// Splits a convex ring by a line; each side is `None` when it has no area.
pub fn split_convex(c: &[Point2], l: &Line2, tol: f64) -> (Option<Vec<Point2>>, Option<Vec<Point2>>) {
    let s: Vec<f64> = c.iter().map(|p| l.signed_distance(p)).collect();
    let has_pos = s.iter().any(|&x| x > tol);
    let has_neg = s.iter().any(|&x| x < -tol);
    if !has_pos {
        return (Some(c.to_vec()), None);
    }
    if !has_neg {
        return (None, Some(c.to_vec()));
    }
    let n = c.len();
    let (mut neg, mut pos) = (Vec::new(), Vec::new());
    for i in 0..n {
        let j = (i + 1) % n;
        let (a, b) = (c[i], c[j]);
        let (sa, sb) = (s[i], s[j]);
        if sa <= tol {
            neg.push(a);
        }
        if sa >= -tol {
            pos.push(a);
        }
        if (sa < -tol && sb > tol) || (sa > tol && sb < -tol) {
            let t = sa / (sa - sb);
            let q = a + (b - a) * t;
            neg.push(q);
            pos.push(q);
        }
    }
    let keep = |r: Vec<Point2>| {
        let r = ring::remove_collinear(&r, tol);
        (r.len() >= 3 && ring::signed_area(&r) > tol * tol).then_some(r)
    };
    (keep(neg), keep(pos))
}

fn adjacency(regions: &[Polygon2], tol: f64) -> Vec<Vec<usize>> {
    let n = regions.len();
    let boxes: Vec<(Point2, Point2)> = regions.iter().map(|r| r.bbox()).collect();
    let mut adj = vec![Vec::new(); n];
    for i in 0..n {
        for j in i + 1..n {
            let (a, b) = (&boxes[i], &boxes[j]);
            if a.0.x > b.1.x + tol || b.0.x > a.1.x + tol || a.0.y > b.1.y + tol || b.0.y > a.1.y + tol {
                continue;
            }
            if share_segment(&regions[i].outer, &regions[j].outer, tol) {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
    }
    adj
}

fn share_segment(a: &[Point2], b: &[Point2], tol: f64) -> bool {
    let (na, nb) = (a.len(), b.len());
    for i in 0..na {
        let (p, q) = (a[i], a[(i + 1) % na]);
        let d = q - p;
        let len = d.norm();
        if len <= tol {
            continue;
        }
        let u = d / len;
        for j in 0..nb {
            let (r, s) = (b[j], b[(j + 1) % nb]);
            let off = |x: &Point2| (x - p).perp(&u).abs();
            if off(&r) > tol || off(&s) > tol {
                continue;
            }
            let (t0, t1) = ((r - p).dot(&u), (s - p).dot(&u));
            let (lo, hi) = (t0.min(t1).max(0.0), t0.max(t1).min(len));
            if hi - lo > tol {
                return true;
            }
        }
    }
    false
}

/// Radius of the largest disk inside a convex polygon.
pub fn inscribed_radius(region: &Polygon2) -> Result<f64> {
    let tol = tolerance::geo();
    let r = ring::remove_collinear(&region.outer, tol);
    if r.len() < 3 || region.area().abs() <= tol * tol {
        return Err(Error::DegenerateRegion);
    }
    let sign = if ring::signed_area(&r) > 0.0 { 1.0 } else { -1.0 };
    let n = r.len();
    // Outward constraints a·x + radius <= c.
    let cons: Vec<(Vector2, f64)> = (0..n)
        .filter_map(|i| {
            let d = (r[(i + 1) % n] - r[i]) * sign;
            let len = d.norm();
            (len > tol).then(|| {
                let a = Vector2::new(d.y, -d.x) / len;
                (a, a.dot(&r[i].coords))
            })
        })
        .collect();
    let mut best = 0.0f64;
    let m = cons.len();
    for i in 0..m {
        for j in i + 1..m {
            for k in j + 1..m {
                let mat = Matrix3::new(
                    cons[i].0.x, cons[i].0.y, 1.0, cons[j].0.x, cons[j].0.y, 1.0, cons[k].0.x, cons[k].0.y, 1.0,
                );
                let Some(sol) = mat.lu().solve(&nalgebra::Vector3::new(cons[i].1, cons[j].1, cons[k].1)) else {
                    continue;
                };
                let (x, rad) = (Vector2::new(sol.x, sol.y), sol.z);
                if !rad.is_finite() || rad <= best {
                    continue;
                }
                if cons.iter().all(|(a, c)| a.dot(&x) + rad <= c + 1e-9 * (1.0 + c.abs())) {
                    best = rad;
                }
            }
        }
    }
    if best <= 0.0 {
        return Err(Error::DegenerateRegion);
    }
    Ok(best)
}
