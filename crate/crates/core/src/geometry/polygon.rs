use super::ring::{self, Location};
use super::{orient2, Point2};

/// Planar polygon: counterclockwise outer ring and clockwise holes.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon2 {
    pub outer: Vec<Point2>,
    pub holes: Vec<Vec<Point2>>,
}

impl Polygon2 {
    /// Builds a polygon, reorienting rings to the CCW outer / CW hole convention.
    pub fn new(mut outer: Vec<Point2>, mut holes: Vec<Vec<Point2>>) -> Self {
        if ring::signed_area(&outer) < 0.0 {
            outer.reverse();
        }
        for h in &mut holes {
            if ring::signed_area(h) > 0.0 {
                h.reverse();
            }
        }
        Self { outer, holes }
    }

    pub fn simple(outer: Vec<Point2>) -> Self {
        Self::new(outer, Vec::new())
    }

    pub fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Self::simple(vec![Point2::new(x0, y0), Point2::new(x1, y0), Point2::new(x1, y1), Point2::new(x0, y1)])
    }

    pub fn rings(&self) -> impl Iterator<Item = &Vec<Point2>> {
        std::iter::once(&self.outer).chain(self.holes.iter())
    }

    pub fn area(&self) -> f64 {
        ring::signed_area(&self.outer) + self.holes.iter().map(|h| ring::signed_area(h)).sum::<f64>()
    }

    pub fn vertex_count(&self) -> usize {
        self.rings().map(|r| r.len()).sum()
    }

    pub fn locate(&self, p: &Point2, tol: f64) -> Location {
        match ring::locate(p, &self.outer, tol) {
            Location::Outside => Location::Outside,
            Location::Boundary => Location::Boundary,
            Location::Inside => {
                for h in &self.holes {
                    match ring::locate(p, h, tol) {
                        Location::Inside => return Location::Outside,
                        Location::Boundary => return Location::Boundary,
                        Location::Outside => {}
                    }
                }
                Location::Inside
            }
        }
    }

    pub fn boundary_distance(&self, p: &Point2) -> f64 {
        self.rings().map(|r| ring::boundary_distance(p, r)).fold(f64::INFINITY, f64::min)
    }

    pub fn bbox(&self) -> (Point2, Point2) {
        let mut lo = Point2::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in &self.outer {
            lo.x = lo.x.min(p.x);
            lo.y = lo.y.min(p.y);
            hi.x = hi.x.max(p.x);
            hi.y = hi.y.max(p.y);
        }
        (lo, hi)
    }

    pub fn diameter(&self) -> f64 {
        let (lo, hi) = self.bbox();
        (hi - lo).norm()
    }

    pub fn is_convex(&self, tol: f64) -> bool {
        if !self.holes.is_empty() {
            return false;
        }
        let n = self.outer.len();
        (0..n).all(|i| orient2(&self.outer[i], &self.outer[(i + 1) % n], &self.outer[(i + 2) % n]) >= -tol)
    }

    /// Invariant violations: non-simple rings, wrong orientation, 180° vertices, rings touching.
    pub fn violations(&self, tol: f64) -> Vec<String> {
        let mut out = Vec::new();
        for (k, r) in self.rings().enumerate() {
            if !ring::is_simple(r, tol) {
                out.push(format!("ring {k} is not simple"));
            }
            if ring::remove_collinear(r, tol).len() != r.len() {
                out.push(format!("ring {k} has a 180 degree vertex"));
            }
        }
        if ring::signed_area(&self.outer) <= 0.0 {
            out.push("outer ring is not counterclockwise".into());
        }
        for (k, h) in self.holes.iter().enumerate() {
            if ring::signed_area(h) >= 0.0 {
                out.push(format!("hole {k} is not clockwise"));
            }
            if h.iter().any(|p| ring::locate(p, &self.outer, tol) != Location::Inside) {
                out.push(format!("hole {k} is not strictly inside the outer ring"));
            }
            for (m, g) in self.holes.iter().enumerate().skip(k + 1) {
                let touching = (0..h.len()).any(|i| {
                    (0..g.len()).any(|j| {
                        ring::segments_touch(&h[i], &h[(i + 1) % h.len()], &g[j], &g[(j + 1) % g.len()], tol)
                    })
                });
                if touching || ring::locate(&h[0], g, tol) != Location::Outside || ring::locate(&g[0], h, tol) != Location::Outside {
                    out.push(format!("holes {k} and {m} intersect"));
                }
            }
        }
        out
    }

    /// A point strictly inside, at least `margin` from the boundary when possible.
    ///
    /// Tries the vertex centroid first, then the midpoint of the widest
    /// interior span on horizontal scanlines between vertex heights.
    pub fn interior_point(&self, margin: f64) -> Option<Point2> {
        let c = ring::vertex_centroid(&self.outer);
        if self.locate(&c, 0.0) == Location::Inside && self.boundary_distance(&c) >= margin {
            return Some(c);
        }
        let mut ys: Vec<f64> = self.rings().flatten().map(|p| p.y).collect();
        ys.sort_by(|a, b| a.partial_cmp(b).unwrap());
        ys.dedup();
        let mut best: Option<(f64, Point2)> = None;
        for w in ys.windows(2) {
            for frac in [0.5, 0.25, 0.75] {
                let y = w[0] + (w[1] - w[0]) * frac;
                let mut xs: Vec<f64> = Vec::new();
                for r in self.rings() {
                    let n = r.len();
                    for i in 0..n {
                        let (a, b) = (r[i], r[(i + 1) % n]);
                        if (a.y > y) != (b.y > y) {
                            xs.push(a.x + (y - a.y) / (b.y - a.y) * (b.x - a.x));
                        }
                    }
                }
                xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
                for pair in xs.chunks(2) {
                    if pair.len() == 2 {
                        let p = Point2::new(0.5 * (pair[0] + pair[1]), y);
                        let clearance = self.boundary_distance(&p);
                        if best.as_ref().map_or(true, |(d, _)| clearance > *d) {
                            best = Some((clearance, p));
                        }
                    }
                }
            }
        }
        best.filter(|(d, p)| *d > 0.0 && self.locate(p, 0.0) == Location::Inside).map(|(_, p)| p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hole_orientation_normalized() {
        let hole = Polygon2::rect(0.25, 0.25, 0.75, 0.75).outer;
        let p = Polygon2::new(Polygon2::rect(0.0, 0.0, 1.0, 1.0).outer, vec![hole]);
        assert!((p.area() - 0.75).abs() < 1e-12);
        assert!(p.violations(1e-9).is_empty());
        assert_eq!(p.locate(&Point2::new(0.5, 0.5), 1e-9), Location::Outside);
    }

    #[test]
    fn interior_point_avoids_hole() {
        let hole = Polygon2::rect(0.25, 0.25, 0.75, 0.75).outer;
        let p = Polygon2::new(Polygon2::rect(0.0, 0.0, 1.0, 1.0).outer, vec![hole]);
        let q = p.interior_point(1e-3).unwrap();
        assert_eq!(p.locate(&q, 1e-9), Location::Inside);
    }

    #[test]
    fn l_shape_interior_point() {
        let l = Polygon2::simple(vec![
            Point2::new(0.0, 0.0),
            Point2::new(2.0, 0.0),
            Point2::new(2.0, 0.2),
            Point2::new(0.2, 0.2),
            Point2::new(0.2, 2.0),
            Point2::new(0.0, 2.0),
        ]);
        let q = l.interior_point(1e-3).unwrap();
        assert_eq!(l.locate(&q, 1e-9), Location::Inside);
        assert!(!l.is_convex(1e-9));
    }
}
