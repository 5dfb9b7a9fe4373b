use super::plane::Plane3;
use super::polyhedron::{centroid3, newell, Face3, Polyhedron, Scene, Topology};
use super::ring::{self, Location};
use super::{cmp_point3, Point2, Point3};
use crate::error::{Error, Result};
use crate::tolerance;
use std::cmp::Ordering;
use std::collections::BTreeMap;

/// Canonical form: coplanar neighbours merged, collinear vertices removed,
/// rings rotated to their smallest vertex and faces sorted. Tags are dropped.
pub fn canonicalize(p: &Polyhedron) -> Result<Polyhedron> {
    let tol = tolerance::geo();
    let topo = Topology::build(p, tol);
    topo.check()?;
    let mut groups: Vec<(Plane3, Vec<usize>)> = Vec::new();
    for (fi, f) in p.faces.iter().enumerate() {
        match groups.iter_mut().find(|(pl, _)| pl.approx_eq(&f.plane, tol * 10.0)) {
            Some(g) => g.1.push(fi),
            None => groups.push((f.plane, vec![fi])),
        }
    }
    let mut faces = Vec::new();
    for (plane, members) in groups {
        faces.extend(merge_group(&topo, &plane, &members, tol)?);
    }
    sort_faces(&mut faces, tol);
    Ok(Polyhedron::new(faces))
}

fn merge_group(topo: &Topology, plane: &Plane3, members: &[usize], tol: f64) -> Result<Vec<Face3>> {
    let mut count: BTreeMap<(usize, usize), i32> = BTreeMap::new();
    for &fi in members {
        for r in &topo.loops[fi] {
            let n = r.len();
            for i in 0..n {
                *count.entry((r[i], r[(i + 1) % n])).or_default() += 1;
            }
        }
    }
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for (&(a, b), &c) in &count {
        let back = count.get(&(b, a)).copied().unwrap_or(0);
        for _ in 0..(c - back).max(0) {
            edges.push((a, b));
        }
    }
    let frame = plane.frame();
    let loc = |v: usize| frame.to_local(&topo.vertices[v]);
    let mut out_edges: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &(a, b) in &edges {
        out_edges.entry(a).or_default().push(b);
    }
    let mut rings: Vec<Vec<usize>> = Vec::new();
    while let Some((&start, _)) = out_edges.iter().find(|(_, v)| !v.is_empty()) {
        let first = out_edges.get_mut(&start).unwrap().pop().unwrap();
        let mut ring = vec![start];
        let mut prev = start;
        let mut cur = first;
        let mut guard = 0;
        while cur != start {
            guard += 1;
            if guard > edges.len() + 1 {
                return Err(Error::InvalidTopology("boundary tracing did not close".into()));
            }
            ring.push(cur);
            let outs = out_edges.get_mut(&cur).filter(|v| !v.is_empty()).ok_or_else(|| {
                Error::InvalidTopology("open boundary while merging coplanar faces".into())
            })?;
            let back = loc(prev) - loc(cur);
            let mut best = 0;
            let mut best_ang = f64::INFINITY;
            for (k, &nxt) in outs.iter().enumerate() {
                let d = loc(nxt) - loc(cur);
                let ang = cw_angle(&back, &d);
                if ang < best_ang {
                    best_ang = ang;
                    best = k;
                }
            }
            let nxt = outs.swap_remove(best);
            prev = cur;
            cur = nxt;
        }
        rings.push(ring);
    }
    let mut outers: Vec<(Vec<Point3>, Vec<Point2>, f64)> = Vec::new();
    let mut holes: Vec<(Vec<Point3>, Vec<Point2>)> = Vec::new();
    for r in rings {
        let pts3: Vec<Point3> = r.iter().map(|&v| topo.vertices[v]).collect();
        let (pts3, pts2) = drop_collinear(&pts3, &frame, tol);
        if pts3.len() < 3 {
            continue;
        }
        let a = ring::signed_area(&pts2);
        if a > 0.0 {
            outers.push((pts3, pts2, a));
        } else if a < 0.0 {
            holes.push((pts3, pts2));
        }
    }
    let mut faces: Vec<Face3> = outers.iter().map(|(o, _, _)| Face3::new(*plane, o.clone(), Vec::new())).collect();
    for (h3, h2) in holes {
        let probe = hole_probe(&h2, tol);
        let owner = outers
            .iter()
            .enumerate()
            .filter(|(_, (_, o2, _))| ring::locate(&probe, o2, tol) == Location::Inside)
            .min_by(|a, b| a.1 .2.partial_cmp(&b.1 .2).unwrap())
            .map(|(i, _)| i)
            .ok_or_else(|| Error::InvalidTopology("inner ring outside every outer ring".into()))?;
        faces[owner].holes.push(h3);
    }
    for f in &mut faces {
        rotate_min3(&mut f.outer, tol);
        for h in &mut f.holes {
            rotate_min3(h, tol);
        }
        f.holes.sort_by(|a, b| cmp_point3(&a[0], &b[0], tol));
        let n = newell(&f.outer).normalize();
        let c = centroid3(&f.outer);
        f.plane = Plane3 { normal: n, offset: n.dot(&c.coords) };
    }
    Ok(faces)
}

/// Clockwise angle in `[0, 2π)` from `from` to `to`; zero maps to 2π.
fn cw_angle(from: &nalgebra::Vector2<f64>, to: &nalgebra::Vector2<f64>) -> f64 {
    let a = from.y.atan2(from.x);
    let b = to.y.atan2(to.x);
    let mut d = a - b;
    while d <= 1e-15 {
        d += std::f64::consts::TAU;
    }
    while d > std::f64::consts::TAU {
        d -= std::f64::consts::TAU;
    }
    d
}

fn drop_collinear(r: &[Point3], frame: &super::Frame3, tol: f64) -> (Vec<Point3>, Vec<Point2>) {
    let mut pts3: Vec<Point3> = r.to_vec();
    loop {
        let n = pts3.len();
        if n < 3 {
            break;
        }
        let mut removed = false;
        for i in 0..n {
            let a = pts3[(i + n - 1) % n];
            let b = pts3[i];
            let c = pts3[(i + 1) % n];
            let ac = c - a;
            let dist = if ac.norm() <= tol { (b - a).norm() } else { (b - a).cross(&ac).norm() / ac.norm() };
            let forward = (b - a).dot(&(c - b)) >= 0.0;
            if (b - a).norm() <= tol || (dist <= tol && forward) {
                pts3.remove(i);
                removed = true;
                break;
            }
        }
        if !removed {
            break;
        }
    }
    let pts2 = pts3.iter().map(|p| frame.to_local(p)).collect();
    (pts3, pts2)
}

/// A point just inside the region bounded by a clockwise hole ring
/// (on the face side of its first long edge).
fn hole_probe(h: &[Point2], tol: f64) -> Point2 {
    let n = h.len();
    let (mut best, mut len) = (0, 0.0);
    for i in 0..n {
        let l = (h[(i + 1) % n] - h[i]).norm();
        if l > len {
            len = l;
            best = i;
        }
    }
    let a = h[best];
    let b = h[(best + 1) % n];
    let d = (b - a) / len;
    let left = nalgebra::Vector2::new(-d.y, d.x);
    let eps = (len * 1e-4).max(tol * 100.0);
    Point2::from((a.coords + b.coords) * 0.5) + left * eps
}

fn rotate_min3(r: &mut [Point3], tol: f64) {
    if r.is_empty() {
        return;
    }
    let mut best = 0;
    for i in 1..r.len() {
        if cmp_point3(&r[i], &r[best], tol) == Ordering::Less {
            best = i;
        }
    }
    r.rotate_left(best);
}

fn sort_faces(faces: &mut [Face3], tol: f64) {
    faces.sort_by(|a, b| {
        cmp_point3(&a.outer[0], &b.outer[0], tol)
            .then_with(|| cmp_point3(&Point3::from(a.plane.normal), &Point3::from(b.plane.normal), 1e-9))
            .then_with(|| a.outer.len().cmp(&b.outer.len()))
    });
}

fn ring_distance(a: &[Point3], b: &[Point3]) -> Option<f64> {
    if a.len() != b.len() {
        return None;
    }
    let n = a.len();
    (0..n)
        .map(|s| (0..n).map(|i| (a[i] - b[(i + s) % n]).norm()).fold(0.0, f64::max))
        .min_by(|x, y| x.partial_cmp(y).unwrap())
}

fn face_distance(a: &Face3, b: &Face3) -> Option<f64> {
    if a.holes.len() != b.holes.len() || a.plane.normal.dot(&b.plane.normal) < 0.5 {
        return None;
    }
    let mut d = ring_distance(&a.outer, &b.outer)?;
    let mut used = vec![false; b.holes.len()];
    for ha in &a.holes {
        let (k, dh) = b
            .holes
            .iter()
            .enumerate()
            .filter(|(k, _)| !used[*k])
            .filter_map(|(k, hb)| ring_distance(ha, hb).map(|x| (k, x)))
            .min_by(|x, y| x.1.partial_cmp(&y.1).unwrap())?;
        used[k] = true;
        d = d.max(dh);
    }
    Some(d)
}

/// Greedy minimum-cost matching; `None` when some item has no partner.
fn match_cost<T>(a: &[T], b: &[T], dist: impl Fn(&T, &T) -> Option<f64>) -> Option<f64> {
    if a.len() != b.len() {
        return None;
    }
    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            if let Some(d) = dist(x, y) {
                pairs.push((d, i, j));
            }
        }
    }
    pairs.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    let (mut ua, mut ub) = (vec![false; a.len()], vec![false; b.len()]);
    let mut worst: f64 = 0.0;
    let mut matched = 0;
    for (d, i, j) in pairs {
        if !ua[i] && !ub[j] {
            ua[i] = true;
            ub[j] = true;
            worst = worst.max(d);
            matched += 1;
        }
    }
    (matched == a.len()).then_some(worst)
}

/// Largest vertex displacement between two polyhedra with identical canonical
/// combinatorics, or `None` if they differ combinatorially.
pub fn polyhedra_distance(a: &Polyhedron, b: &Polyhedron) -> Option<f64> {
    let ca = canonicalize(a).ok()?;
    let cb = canonicalize(b).ok()?;
    match_cost(&ca.faces, &cb.faces, face_distance)
}

/// Scene analogue of [`polyhedra_distance`] with polyhedra matched as a multiset.
pub fn scene_distance(a: &Scene, b: &Scene) -> Option<f64> {
    let ca: Vec<Polyhedron> = a.polyhedra.iter().map(canonicalize).collect::<Result<_>>().ok()?;
    let cb: Vec<Polyhedron> = b.polyhedra.iter().map(canonicalize).collect::<Result<_>>().ok()?;
    match_cost(&ca, &cb, |x, y| match_cost(&x.faces, &y.faces, face_distance))
}

pub fn scenes_equal(a: &Scene, b: &Scene, tol: f64) -> bool {
    scene_distance(a, b).is_some_and(|d| d <= tol)
}
