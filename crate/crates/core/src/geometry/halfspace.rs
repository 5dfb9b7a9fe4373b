use super::plane::Plane3;
use super::polyhedron::{Face3, Polyhedron};
use super::ring;
use super::weld::VertexWeld;
use super::{Point2, Point3};
use crate::error::{Error, Result};
use crate::tolerance;
use nalgebra::Matrix3;

/// Which closed side of the boundary plane is kept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    /// `n·x <= d`
    Below,
    /// `n·x >= d`
    Above,
}

impl Side {
    pub fn sign(self) -> i8 {
        match self {
            Side::Below => 1,
            Side::Above => -1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfSpace3 {
    pub plane: Plane3,
    pub side: Side,
}

impl HalfSpace3 {
    pub fn new(plane: Plane3, side: Side) -> Self {
        Self { plane, side }
    }

    /// Half-space `n·x <= d` of an outward-oriented plane.
    pub fn below(plane: Plane3) -> Self {
        Self { plane, side: Side::Below }
    }

    /// Boundary plane oriented so its normal points out of the kept region.
    pub fn outward(&self) -> Plane3 {
        match self.side {
            Side::Below => self.plane,
            Side::Above => self.plane.flipped(),
        }
    }

    pub fn contains(&self, p: &Point3, tol: f64) -> bool {
        self.outward().signed_distance(p) <= tol
    }
}

/// Result of [`side_containing`]; `degenerate` means no point left the plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SideFit {
    pub halfspace: HalfSpace3,
    pub degenerate: bool,
}

/// Closed half-space bounded by `plane` that contains every point.
pub fn side_containing(plane: &Plane3, points: &[Point3]) -> Result<SideFit> {
    let tol = tolerance::geo();
    let above = points.iter().any(|p| plane.signed_distance(p) > tol);
    let below = points.iter().any(|p| plane.signed_distance(p) < -tol);
    let (side, degenerate) = match (above, below) {
        (true, true) => return Err(Error::SplitSides),
        (true, false) => (Side::Above, false),
        (false, true) => (Side::Below, false),
        (false, false) => (Side::Below, true),
    };
    Ok(SideFit { halfspace: HalfSpace3::new(*plane, side), degenerate })
}

/// Intersection of closed half-spaces as a convex boundary representation.
pub fn intersect_halfspaces(hs: &[HalfSpace3]) -> Result<Polyhedron> {
    intersect_with_sources(hs).map(|(p, _)| p)
}

/// Like [`intersect_halfspaces`], also reporting for every output face the
/// index of the half-space it lies on.
pub fn intersect_with_sources(hs: &[HalfSpace3]) -> Result<(Polyhedron, Vec<usize>)> {
    if hs.is_empty() {
        return Err(Error::Unbounded);
    }
    let tol = tolerance::geo();
    let planes: Vec<Plane3> = hs.iter().map(|h| h.outward()).collect();
    match clip_all(&planes, tol)? {
        Some(r) => Ok(r),
        None => {
            // Distinguish an empty set from a flat one by relaxing every plane.
            let scale = 1.0 + planes.iter().map(|p| p.offset.abs()).fold(0.0, f64::max);
            let relaxed: Vec<Plane3> =
                planes.iter().map(|p| Plane3 { normal: p.normal, offset: p.offset + 1e-6 * scale }).collect();
            match clip_all(&relaxed, tol) {
                Ok(Some(_)) => Err(Error::Degenerate("intersection has no interior".into())),
                Err(Error::Unbounded) => Err(Error::Degenerate("intersection has no interior".into())),
                _ => Err(Error::Empty),
            }
        }
    }
}

const VIRTUAL: usize = usize::MAX - 8;

fn clip_all(planes: &[Plane3], tol: f64) -> Result<Option<(Polyhedron, Vec<usize>)>> {
    let mut keep: Vec<usize> = Vec::new();
    for (i, p) in planes.iter().enumerate() {
        if !keep.iter().any(|&k| planes[k].approx_eq(p, tol)) {
            keep.push(i);
        }
    }
    let reach = 1.0 + planes.iter().map(|p| p.offset.abs()).fold(0.0, f64::max);
    let half = 1e6 * reach;
    let mut raw_faces: Vec<(usize, Vec<Point3>)> = Vec::new();
    let mut unbounded = false;
    for &i in &keep {
        let pi = planes[i];
        let f = pi.frame();
        let mut poly: Vec<(Point2, usize)> = vec![
            (Point2::new(-half, -half), VIRTUAL),
            (Point2::new(half, -half), VIRTUAL + 1),
            (Point2::new(half, half), VIRTUAL + 2),
            (Point2::new(-half, half), VIRTUAL + 3),
        ];
        for &j in &keep {
            if j == i || poly.is_empty() {
                continue;
            }
            let pj = planes[j];
            let a = pj.normal.dot(&f.u);
            let b = pj.normal.dot(&f.v);
            let c = pj.offset - pj.normal.dot(&f.origin.coords);
            if (a * a + b * b).sqrt() <= tolerance::AXIS.sin() * 1e-3 {
                if c < -tol {
                    poly.clear();
                }
                continue;
            }
            poly = clip(&poly, a, b, c, j, tol);
        }
        if poly.len() < 3 {
            continue;
        }
        let pts: Vec<Point2> = poly.iter().map(|v| v.0).collect();
        if ring::signed_area(&pts) <= tol * tol {
            continue;
        }
        let n = poly.len();
        let mut ring3 = Vec::with_capacity(n);
        for k in 0..n {
            let ea = poly[(k + n - 1) % n].1;
            let eb = poly[k].1;
            if ea >= VIRTUAL || eb >= VIRTUAL {
                unbounded = true;
                break;
            }
            let approx = f.to_world(&poly[k].0);
            ring3.push(refine(&pi, &planes[ea], &planes[eb]).unwrap_or(approx));
        }
        if unbounded {
            break;
        }
        raw_faces.push((i, ring3));
    }
    if unbounded {
        return Err(Error::Unbounded);
    }
    if raw_faces.len() < 4 {
        return Ok(None);
    }
    let mut weld = VertexWeld::new(tol * 10.0);
    let mut faces = Vec::new();
    let mut sources = Vec::new();
    for (i, r) in raw_faces {
        let mut ids: Vec<usize> = r.iter().map(|p| weld.insert(*p)).collect();
        ids.dedup();
        while ids.len() > 1 && ids.first() == ids.last() {
            ids.pop();
        }
        if ids.len() < 3 {
            continue;
        }
        let plane = planes[i];
        let f = plane.frame();
        let pts2: Vec<Point2> = ids.iter().map(|&k| f.to_local(&weld.points[k])).collect();
        let kept = ring::remove_collinear(&pts2, tol);
        if kept.len() < 3 || ring::signed_area(&kept) <= tol * tol {
            continue;
        }
        // Keep the welded 3D positions of surviving vertices.
        let outer: Vec<Point3> = ids
            .iter()
            .map(|&k| weld.points[k])
            .filter(|p| kept.iter().any(|q| (f.to_local(p) - q).norm() <= tol))
            .collect();
        faces.push(Face3::new(plane, outer, Vec::new()));
        sources.push(i);
    }
    if faces.len() < 4 {
        return Ok(None);
    }
    Ok(Some((Polyhedron::new(faces), sources)))
}

fn clip(poly: &[(Point2, usize)], a: f64, b: f64, c: f64, line: usize, tol: f64) -> Vec<(Point2, usize)> {
    let norm = (a * a + b * b).sqrt();
    let s = |p: &Point2| (a * p.x + b * p.y - c) / norm;
    let n = poly.len();
    let mut out: Vec<(Point2, usize)> = Vec::with_capacity(n + 1);
    for k in 0..n {
        let (p, lab) = poly[k];
        let q = poly[(k + 1) % n].0;
        let (sp, sq) = (s(&p), s(&q));
        let (inp, inq) = (sp <= tol, sq <= tol);
        if inp {
            out.push((p, lab));
            if !inq {
                let t = sp / (sp - sq);
                out.push((p + (q - p) * t, line));
            }
        } else if inq {
            let t = sp / (sp - sq);
            out.push((p + (q - p) * t, lab));
        }
    }
    // Drop the earlier of two coincident vertices; its outgoing edge is empty.
    let mut cleaned: Vec<(Point2, usize)> = Vec::with_capacity(out.len());
    for v in out {
        if let Some(last) = cleaned.last() {
            if (last.0 - v.0).norm() <= tol {
                cleaned.pop();
            }
        }
        cleaned.push(v);
    }
    while cleaned.len() > 1 && (cleaned[0].0 - cleaned[cleaned.len() - 1].0).norm() <= tol {
        cleaned.pop();
    }
    cleaned
}

fn refine(a: &Plane3, b: &Plane3, c: &Plane3) -> Option<Point3> {
    let m = Matrix3::from_rows(&[a.normal.transpose(), b.normal.transpose(), c.normal.transpose()]);
    if m.determinant().abs() < 1e-9 {
        return None;
    }
    let rhs = nalgebra::Vector3::new(a.offset, b.offset, c.offset);
    m.lu().solve(&rhs).map(Point3::from)
}

#[cfg(test)]
mod tests {
    use super::*;
    use super::super::Vector3;

    fn hs(n: [f64; 3], d: f64) -> HalfSpace3 {
        HalfSpace3::below(Plane3::new(Vector3::new(n[0], n[1], n[2]), d).unwrap())
    }

    fn unit_cube() -> Vec<HalfSpace3> {
        vec![
            hs([1., 0., 0.], 1.),
            hs([-1., 0., 0.], 0.),
            hs([0., 1., 0.], 1.),
            hs([0., -1., 0.], 0.),
            hs([0., 0., 1.], 1.),
            hs([0., 0., -1.], 0.),
        ]
    }

    #[test]
    fn side_above_and_split() {
        let z = Plane3::new(Vector3::z(), 0.0).unwrap();
        let fit = side_containing(&z, &[Point3::new(0., 0., 1.), Point3::new(1., 1., 2.)]).unwrap();
        assert_eq!(fit.halfspace.side, Side::Above);
        assert!(!fit.degenerate);
        let flat = side_containing(&z, &[Point3::origin()]).unwrap();
        assert_eq!(flat.halfspace.side, Side::Below);
        assert!(flat.degenerate);
        let err = side_containing(&z, &[Point3::new(0., 0., 1.), Point3::new(0., 0., -1.)]);
        assert!(matches!(err, Err(Error::SplitSides)));
    }

    #[test]
    fn cube_counts() {
        let p = intersect_halfspaces(&unit_cube()).unwrap();
        let t = p.topology();
        assert_eq!(p.faces.len(), 6);
        assert_eq!(t.used_vertex_count(), 8);
        assert_eq!(t.edge_count(), 12);
        assert!((p.volume() - 1.0).abs() < 1e-9);
        assert!(p.is_convex());
    }

    #[test]
    fn simplex() {
        let p = intersect_halfspaces(&[
            hs([-1., 0., 0.], 0.),
            hs([0., -1., 0.], 0.),
            hs([0., 0., -1.], 0.),
            hs([1., 1., 1.], 1.),
        ])
        .unwrap();
        let mut v = p.vertices();
        v.sort_by(|a, b| super::super::cmp_point3(a, b, 1e-9));
        let want = [[0., 0., 0.], [0., 0., 1.], [0., 1., 0.], [1., 0., 0.]];
        assert_eq!(v.len(), 4);
        for (a, b) in v.iter().zip(want) {
            assert!((a - Point3::new(b[0], b[1], b[2])).norm() < 1e-12);
        }
    }

    #[test]
    fn open_top_is_unbounded() {
        let mut h = unit_cube();
        h.remove(4);
        assert!(matches!(intersect_halfspaces(&h), Err(Error::Unbounded)));
    }

    #[test]
    fn empty_and_flat() {
        let mut h = unit_cube();
        h.push(hs([1., 0., 0.], -1.0));
        assert!(matches!(intersect_halfspaces(&h), Err(Error::Empty)));
        let mut flat = unit_cube();
        flat[0] = hs([1., 0., 0.], 0.0);
        assert!(matches!(intersect_halfspaces(&flat), Err(Error::Degenerate(_))));
    }

    #[test]
    fn redundant_plane_dropped() {
        let mut h = unit_cube();
        h.push(hs([1., 1., 1.], 10.0));
        h.push(hs([1., 0., 0.], 1.0));
        let (p, src) = intersect_with_sources(&h).unwrap();
        assert_eq!(p.faces.len(), 6);
        assert!(!src.contains(&6));
    }
}
