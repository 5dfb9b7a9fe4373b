use super::plane::{axis_of, Frame3, Plane3};
use super::polygon::Polygon2;
use super::ring::Location;
use super::weld::VertexWeld;
use super::{Point3, Vector3};
use crate::error::{Error, Result};
use crate::tolerance;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};

/// Where a face came from in an elaboration construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FaceOwner {
    Base,
    Elaboration(i64),
}

/// Provenance stamp carried through construction; ignored by equality checks.
///
/// For elaboration faces `face` is 0 for the cap (or floor) and `k >= 1`
/// for the side wall over profile edge `k - 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FaceTag {
    pub polyhedron_id: i64,
    pub owner: FaceOwner,
    pub face: u32,
}

/// Planar face with optional holes. Rings are stored in world coordinates;
/// the outer ring is counterclockwise seen from the side the normal points to.
#[derive(Debug, Clone, PartialEq)]
pub struct Face3 {
    pub plane: Plane3,
    pub outer: Vec<Point3>,
    pub holes: Vec<Vec<Point3>>,
    pub tag: Option<FaceTag>,
}

impl Face3 {
    pub fn new(plane: Plane3, outer: Vec<Point3>, holes: Vec<Vec<Point3>>) -> Self {
        Self { plane, outer, holes, tag: None }
    }

    /// Face from a ring whose orientation defines the outward normal.
    pub fn from_ring(outer: Vec<Point3>) -> Result<Self> {
        let n = newell(&outer);
        let c = centroid3(&outer);
        let plane = Plane3::from_point_normal(&c, &n)?;
        Ok(Self::new(plane, outer, Vec::new()))
    }

    pub fn from_polygon(plane: Plane3, frame: &Frame3, poly: &Polygon2) -> Self {
        let outer = poly.outer.iter().map(|q| frame.to_world(q)).collect();
        let holes = poly.holes.iter().map(|h| h.iter().map(|q| frame.to_world(q)).collect()).collect();
        Self::new(plane, outer, holes)
    }

    pub fn with_tag(mut self, tag: FaceTag) -> Self {
        self.tag = Some(tag);
        self
    }

    pub fn frame(&self) -> Frame3 {
        self.plane.frame()
    }

    pub fn rings(&self) -> impl Iterator<Item = &Vec<Point3>> {
        std::iter::once(&self.outer).chain(self.holes.iter())
    }

    pub fn polygon(&self) -> Polygon2 {
        self.polygon_in(&self.frame())
    }

    pub fn polygon_in(&self, f: &Frame3) -> Polygon2 {
        Polygon2 {
            outer: self.outer.iter().map(|p| f.to_local(p)).collect(),
            holes: self.holes.iter().map(|h| h.iter().map(|p| f.to_local(p)).collect()).collect(),
        }
    }

    pub fn area(&self) -> f64 {
        self.polygon().area()
    }

    /// Location of `p` relative to the face; off-plane points are outside.
    pub fn locate(&self, p: &Point3, tol: f64) -> Location {
        if self.plane.signed_distance(p).abs() > tol {
            return Location::Outside;
        }
        let f = self.frame();
        self.polygon_in(&f).locate(&f.to_local(p), tol)
    }

    pub fn translated(&self, d: &Vector3) -> Self {
        let mv = |r: &Vec<Point3>| r.iter().map(|p| p + d).collect::<Vec<_>>();
        Self {
            plane: Plane3 { normal: self.plane.normal, offset: self.plane.offset + self.plane.normal.dot(d) },
            outer: mv(&self.outer),
            holes: self.holes.iter().map(mv).collect(),
            tag: self.tag,
        }
    }
}

/// Newell normal (unnormalized, length = twice the area).
pub fn newell(ring: &[Point3]) -> Vector3 {
    let n = ring.len();
    let mut v = Vector3::zeros();
    for i in 0..n {
        let a = ring[i];
        let b = ring[(i + 1) % n];
        v.x += (a.y - b.y) * (a.z + b.z);
        v.y += (a.z - b.z) * (a.x + b.x);
        v.z += (a.x - b.x) * (a.y + b.y);
    }
    v
}

pub fn centroid3(pts: &[Point3]) -> Point3 {
    let s = pts.iter().fold(Vector3::zeros(), |acc, p| acc + p.coords);
    Point3::from(s / pts.len().max(1) as f64)
}

/// Closed boundary representation. Edges and vertices are derived on demand.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Polyhedron {
    pub faces: Vec<Face3>,
}

impl Polyhedron {
    pub fn new(faces: Vec<Face3>) -> Self {
        Self { faces }
    }

    pub fn topology(&self) -> Topology {
        Topology::build(self, tolerance::geo())
    }

    /// Checks the edge-sharing and vertex-cycle invariants and returns the genus.
    pub fn validate(&self) -> Result<usize> {
        let topo = self.topology();
        topo.check()?;
        topo.genus()
    }

    pub fn vertices(&self) -> Vec<Point3> {
        let mut w = VertexWeld::new(tolerance::geo());
        for f in &self.faces {
            for r in f.rings() {
                for p in r {
                    w.insert(*p);
                }
            }
        }
        w.points
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.topology().euler_characteristic()
    }

    pub fn genus(&self) -> Result<usize> {
        self.topology().genus()
    }

    pub fn bbox(&self) -> Option<(Point3, Point3)> {
        let mut it = self.faces.iter().flat_map(|f| f.rings().flatten());
        let first = *it.next()?;
        let (mut lo, mut hi) = (first, first);
        for p in it {
            for i in 0..3 {
                lo[i] = lo[i].min(p[i]);
                hi[i] = hi[i].max(p[i]);
            }
        }
        Some((lo, hi))
    }

    /// Signed volume; positive for outward-oriented faces.
    pub fn volume(&self) -> f64 {
        self.faces.iter().map(|f| f.plane.offset * f.area()).sum::<f64>() / 3.0
    }

    /// Every face plane has the whole solid on its inner side.
    pub fn is_convex(&self) -> bool {
        let tol = tolerance::geo() * 10.0;
        let verts = self.vertices();
        !self.faces.is_empty()
            && self.faces.iter().all(|f| f.holes.is_empty() && verts.iter().all(|v| f.plane.signed_distance(v) <= tol))
    }

    pub fn is_orthogonal(&self) -> bool {
        self.faces.iter().all(|f| axis_of(&f.plane.normal).is_some())
    }

    /// Ray-parity containment test; boundary points report `false`.
    pub fn contains_point(&self, p: &Point3) -> bool {
        let tol = tolerance::geo();
        if self.faces.iter().any(|f| f.locate(p, tol) != Location::Outside) {
            return false;
        }
        let dirs = [
            Vector3::new(0.5377, 0.3917, 0.7461),
            Vector3::new(-0.3131, 0.8147, 0.4880),
            Vector3::new(0.7071, -0.1234, -0.6964),
            Vector3::new(0.1111, 0.2222, -0.9687),
        ];
        'dir: for d in dirs {
            let d = d.normalize();
            let mut count = 0;
            for f in &self.faces {
                let denom = f.plane.normal.dot(&d);
                if denom.abs() < 1e-12 {
                    continue;
                }
                let t = -f.plane.signed_distance(p) / denom;
                if t <= tol {
                    continue;
                }
                let hit = p + d * t;
                match f.locate(&hit, tol) {
                    Location::Inside => count += 1,
                    Location::Boundary => continue 'dir,
                    Location::Outside => {}
                }
            }
            return count % 2 == 1;
        }
        false
    }

    /// A point strictly inside the solid.
    pub fn interior_point(&self) -> Option<Point3> {
        let diam = self.bbox().map(|(lo, hi)| (hi - lo).norm())?;
        for f in &self.faces {
            let frame = f.frame();
            let poly = f.polygon_in(&frame);
            let margin = 1e-3 * poly.diameter();
            let Some(q) = poly.interior_point(margin) else { continue };
            let on_face = frame.to_world(&q);
            for scale in [1e-3, 1e-4, 1e-6] {
                let p = on_face - f.plane.normal * (diam * scale).min(margin * 0.5);
                if self.contains_point(&p) {
                    return Some(p);
                }
            }
        }
        None
    }

    pub fn translated(&self, d: &Vector3) -> Self {
        Self { faces: self.faces.iter().map(|f| f.translated(d)).collect() }
    }

    pub fn strip_tags(&self) -> Self {
        let mut p = self.clone();
        for f in &mut p.faces {
            f.tag = None;
        }
        p
    }
}

/// Finite set of polyhedra.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Scene {
    pub polyhedra: Vec<Polyhedron>,
}

impl Scene {
    pub fn new(polyhedra: Vec<Polyhedron>) -> Self {
        Self { polyhedra }
    }

    pub fn single(p: Polyhedron) -> Self {
        Self { polyhedra: vec![p] }
    }

    pub fn is_orthogonal(&self) -> bool {
        self.polyhedra.iter().all(|p| p.is_orthogonal())
    }

    pub fn validate(&self) -> Result<()> {
        for (i, p) in self.polyhedra.iter().enumerate() {
            p.validate().map_err(|e| e.in_group(i as i64))?;
        }
        Ok(())
    }

    pub fn face_count(&self) -> usize {
        self.polyhedra.iter().map(|p| p.faces.len()).sum()
    }

    pub fn bbox(&self) -> Option<(Point3, Point3)> {
        let mut acc: Option<(Point3, Point3)> = None;
        for p in &self.polyhedra {
            if let Some((lo, hi)) = p.bbox() {
                acc = Some(match acc {
                    None => (lo, hi),
                    Some((a, b)) => (
                        Point3::new(a.x.min(lo.x), a.y.min(lo.y), a.z.min(lo.z)),
                        Point3::new(b.x.max(hi.x), b.y.max(hi.y), b.z.max(hi.z)),
                    ),
                });
            }
        }
        acc
    }
}

/// Welded, conforming view of a polyhedron: every ring edge is split at
/// vertices lying on it so that neighbouring faces share identical edges.
#[derive(Debug, Clone)]
pub struct Topology {
    pub vertices: Vec<Point3>,
    /// `loops[face][ring]` as vertex indices.
    pub loops: Vec<Vec<Vec<usize>>>,
    /// Directed edge -> list of faces using it.
    pub directed: BTreeMap<(usize, usize), Vec<usize>>,
}

impl Topology {
    pub fn build(p: &Polyhedron, tol: f64) -> Self {
        let mut weld = VertexWeld::new(tol);
        let raw: Vec<Vec<Vec<usize>>> =
            p.faces.iter().map(|f| f.rings().map(|r| r.iter().map(|q| weld.insert(*q)).collect()).collect()).collect();
        let verts = weld.points;
        let loops: Vec<Vec<Vec<usize>>> = raw
            .iter()
            .map(|rings| rings.iter().map(|r| conform_ring(r, &verts, tol)).collect())
            .collect();
        let mut directed: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
        for (fi, rings) in loops.iter().enumerate() {
            for r in rings {
                let n = r.len();
                for i in 0..n {
                    directed.entry((r[i], r[(i + 1) % n])).or_default().push(fi);
                }
            }
        }
        Self { vertices: verts, loops, directed }
    }

    pub fn edge_count(&self) -> usize {
        let mut und: Vec<(usize, usize)> = self.directed.keys().map(|&(a, b)| (a.min(b), a.max(b))).collect();
        und.sort_unstable();
        und.dedup();
        und.len()
    }

    pub fn used_vertex_count(&self) -> usize {
        let mut seen = vec![false; self.vertices.len()];
        for rings in &self.loops {
            for r in rings {
                for &v in r {
                    seen[v] = true;
                }
            }
        }
        seen.iter().filter(|s| **s).count()
    }

    /// V - E + sum over faces of (1 - holes).
    pub fn euler_characteristic(&self) -> i64 {
        let faces: i64 = self.loops.iter().map(|r| 1 - (r.len() as i64 - 1)).sum();
        self.used_vertex_count() as i64 - self.edge_count() as i64 + faces
    }

    pub fn genus(&self) -> Result<usize> {
        let chi = self.euler_characteristic();
        if chi > 2 || (2 - chi) % 2 != 0 {
            return Err(Error::InvalidTopology(format!("Euler characteristic {chi} is not 2 - 2g")));
        }
        Ok(((2 - chi) / 2) as usize)
    }

    /// Edge pairing, vertex-cycle and connectivity invariants.
    pub fn check(&self) -> Result<()> {
        if self.loops.is_empty() {
            return Err(Error::InvalidTopology("no faces".into()));
        }
        for rings in &self.loops {
            for r in rings {
                if r.len() < 3 {
                    return Err(Error::InvalidTopology("ring with fewer than three vertices".into()));
                }
            }
        }
        for (&(a, b), fs) in &self.directed {
            if a == b {
                return Err(Error::InvalidTopology("zero-length edge".into()));
            }
            if fs.len() != 1 {
                return Err(Error::InvalidTopology(format!("edge {a}->{b} traversed {} times in one direction", fs.len())));
            }
            match self.directed.get(&(b, a)) {
                Some(back) if back.len() == 1 => {}
                _ => return Err(Error::InvalidTopology(format!("edge {a}->{b} has no opposite partner"))),
            }
        }
        // Corners around each vertex must form one cycle.
        let mut corners: HashMap<usize, HashMap<usize, usize>> = HashMap::new();
        for rings in &self.loops {
            for r in rings {
                let n = r.len();
                for i in 0..n {
                    let prev = r[(i + n - 1) % n];
                    let v = r[i];
                    let next = r[(i + 1) % n];
                    // corner (prev -> v -> next); the neighbour across v->next arrives via next->v.
                    if corners.entry(v).or_default().insert(prev, next).is_some() {
                        return Err(Error::InvalidTopology("repeated corner".into()));
                    }
                }
            }
        }
        for (v, map) in &corners {
            let start = *map.keys().next().unwrap();
            let mut cur = start;
            let mut steps = 0;
            loop {
                let next = map[&cur];
                // next corner around v starts at `next` as its incoming neighbour.
                cur = next;
                steps += 1;
                if cur == start || steps > map.len() {
                    break;
                }
                if !map.contains_key(&cur) {
                    return Err(Error::InvalidTopology(format!("vertex {v} has an open fan")));
                }
            }
            if steps != map.len() {
                return Err(Error::InvalidTopology(format!("faces around vertex {v} do not form a single cycle")));
            }
        }
        // Edge-connectivity of faces.
        let nf = self.loops.len();
        let mut parent: Vec<usize> = (0..nf).collect();
        fn find(p: &mut Vec<usize>, x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            let mut c = x;
            while p[c] != r {
                let n = p[c];
                p[c] = r;
                c = n;
            }
            r
        }
        for (&(a, b), fs) in &self.directed {
            if let Some(back) = self.directed.get(&(b, a)) {
                let (x, y) = (find(&mut parent, fs[0]), find(&mut parent, back[0]));
                parent[x] = y;
            }
        }
        let root = find(&mut parent, 0);
        if (0..nf).any(|i| find(&mut parent, i) != root) {
            return Err(Error::InvalidTopology("faces are not edge-connected".into()));
        }
        Ok(())
    }
}

/// Inserts every vertex lying strictly inside a ring edge, in order along the edge.
fn conform_ring(ring: &[usize], verts: &[Point3], tol: f64) -> Vec<usize> {
    let n = ring.len();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let (a, b) = (ring[i], ring[(i + 1) % n]);
        if out.last() != Some(&a) {
            out.push(a);
        }
        let pa = verts[a];
        let ab = verts[b] - pa;
        let len2 = ab.norm_squared();
        if len2 == 0.0 {
            continue;
        }
        let mut inner: Vec<(f64, usize)> = Vec::new();
        for (k, q) in verts.iter().enumerate() {
            if k == a || k == b {
                continue;
            }
            let t = (q - pa).dot(&ab) / len2;
            if t <= 0.0 || t >= 1.0 {
                continue;
            }
            if (q - (pa + ab * t)).norm() <= tol {
                inner.push((t, k));
            }
        }
        inner.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
        for (_, k) in inner {
            if out.last() != Some(&k) {
                out.push(k);
            }
        }
    }
    while out.len() > 1 && out.first() == out.last() {
        out.pop();
    }
    out
}

/// Largest distance of a ring vertex from the face plane.
pub fn face_planarity_error(f: &Face3) -> f64 {
    f.rings().flatten().map(|p| f.plane.signed_distance(p).abs()).fold(0.0, f64::max)
}
