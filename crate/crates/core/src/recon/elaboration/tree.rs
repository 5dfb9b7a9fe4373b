//! Forward construction of elaborated solids.

use crate::error::{Error, Result};
use crate::geometry::ring::{self, Location};
use crate::geometry::{Face3, FaceOwner, FaceTag, Plane3, Point2, Point3, Polygon2, Polyhedron, Scene, Vector3};
use crate::markup::{FaceRef, RefOwner};
use crate::tolerance;
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElabKind {
    Extrusion,
    Intrusion,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Depth {
    Finite(f64),
    /// Intrusion that exits through the opposite side of the solid.
    Through,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Elaboration {
    pub id: i64,
    pub kind: ElabKind,
    pub base: FaceRef,
    /// Counterclockwise profile in the frame of the base face plane.
    pub profile: Polygon2,
    pub depth: Depth,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaseSolid {
    pub polyhedron_id: i64,
    pub solid: Polyhedron,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ElaborationTree {
    pub roots: Vec<BaseSolid>,
    pub nodes: Vec<Elaboration>,
}

impl ElaborationTree {
    /// Base face of every elaboration, for placement metadata.
    pub fn base_refs(&self) -> BTreeMap<i64, FaceRef> {
        self.nodes.iter().map(|n| (n.id, n.base)).collect()
    }
}

/// Tags every face with its index under `polyhedron_id`.
pub fn tag_base(p: &Polyhedron, polyhedron_id: i64) -> Polyhedron {
    let mut out = p.clone();
    for (i, f) in out.faces.iter_mut().enumerate().filter(|(_, f)| f.tag.is_none()) {
        f.tag = Some(FaceTag { polyhedron_id, owner: FaceOwner::Base, face: i as u32 });
    }
    out
}

/// Face of the scene carrying the tag named by `r`.
pub fn find_face<'a>(s: &'a Scene, r: &FaceRef) -> Option<&'a Face3> {
    s.polyhedra.iter().flat_map(|p| &p.faces).find(|f| matches(&f.tag, r))
}

fn matches(tag: &Option<FaceTag>, r: &FaceRef) -> bool {
    let Some(t) = tag else { return false };
    match r.owner {
        RefOwner::Polyhedron(pid) => t.owner == FaceOwner::Base && t.polyhedron_id == pid && t.face as i64 == r.face,
        RefOwner::Elaboration(eid) => t.owner == FaceOwner::Elaboration(eid) && t.face as i64 == r.face,
    }
}

/// Builds the scene by applying every elaboration once its base face exists.
pub fn apply_elaborations(tree: &ElaborationTree) -> Result<Scene> {
    let mut solids: Vec<Polyhedron> = tree.roots.iter().map(|r| tag_base(&r.solid, r.polyhedron_id)).collect();
    let ids: Vec<i64> = tree.roots.iter().map(|r| r.polyhedron_id).collect();
    let mut pending: Vec<&Elaboration> = tree.nodes.iter().collect();
    while !pending.is_empty() {
        let before = pending.len();
        let mut rest = Vec::new();
        for e in pending {
            let loc = solids
                .iter()
                .enumerate()
                .find_map(|(si, s)| s.faces.iter().position(|f| matches(&f.tag, &e.base)).map(|fi| (si, fi)));
            match loc {
                Some((si, fi)) => {
                    let pid = ids[si];
                    apply_one(&mut solids[si], fi, e, pid)?;
                }
                None => rest.push(e),
            }
        }
        if rest.len() == before {
            return Err(Error::UnknownBaseFace(format!("{:?}", rest[0].base)));
        }
        pending = rest;
    }
    Ok(Scene::new(solids))
}

fn plane_through(p: &Point3, n: &Vector3) -> Plane3 {
    Plane3 { normal: *n, offset: n.dot(&p.coords) }
}

/// Strictly inside the face polygon, disjoint from its holes and boundary.
pub fn profile_inside(q: &[Point2], face: &Polygon2, tol: f64) -> bool {
    let margin = tol * 10.0;
    if q.iter().any(|p| face.locate(p, margin) != Location::Inside) {
        return false;
    }
    for r in face.rings() {
        if r.iter().any(|p| ring::locate(p, q, margin) != Location::Outside) {
            return false;
        }
        let (n, m) = (r.len(), q.len());
        for i in 0..n {
            for j in 0..m {
                if ring::segments_touch(&r[i], &r[(i + 1) % n], &q[j], &q[(j + 1) % m], margin) {
                    return false;
                }
            }
        }
    }
    true
}

/// First positive hit distance of a ray against the faces of a solid.
pub fn ray_hit(p: &Polyhedron, origin: &Point3, dir: &Vector3, tol: f64) -> Option<(f64, usize)> {
    let mut best: Option<(f64, usize)> = None;
    for (i, f) in p.faces.iter().enumerate() {
        let den = f.plane.normal.dot(dir);
        if den.abs() < 1e-12 {
            continue;
        }
        let t = -f.plane.signed_distance(origin) / den;
        if t <= tol {
            continue;
        }
        let hit = origin + dir * t;
        if f.locate(&hit, tol) != Location::Outside && best.map_or(true, |(bt, _)| t < bt) {
            best = Some((t, i));
        }
    }
    best
}

/// Probe points of a profile: its vertices pulled slightly toward an interior point.
fn probes(q: &[Point2], poly: &Polygon2) -> Vec<Point2> {
    let inner = poly.interior_point(1e-3 * poly.diameter()).unwrap_or_else(|| ring::vertex_centroid(q));
    let mut pts: Vec<Point2> = q.iter().map(|v| v + (inner - v) * 1e-3).collect();
    pts.push(inner);
    pts
}

fn apply_one(solid: &mut Polyhedron, fi: usize, e: &Elaboration, pid: i64) -> Result<()> {
    let tol = tolerance::geo();
    let face = solid.faces[fi].clone();
    let frame = face.plane.frame();
    let fpoly = face.polygon_in(&frame);
    let mut q = e.profile.outer.clone();
    if ring::signed_area(&q) < 0.0 {
        q.reverse();
    }
    if q.len() < 3 || !e.profile.holes.is_empty() || !ring::is_simple(&q, tol) || !profile_inside(&q, &fpoly, tol) {
        return Err(Error::ProfileNotInterior);
    }
    let n = face.plane.normal;
    let q3: Vec<Point3> = q.iter().map(|p| face.plane.project(&frame.to_world(p))).collect();
    let k = q3.len();
    let tag = |face: u32| FaceTag { polyhedron_id: pid, owner: FaceOwner::Elaboration(e.id), face };
    let hole: Vec<Point3> = q3.iter().rev().copied().collect();
    let mut new_faces: Vec<Face3> = Vec::new();
    match (e.kind, e.depth) {
        (ElabKind::Extrusion, Depth::Finite(h)) => {
            if !(h > tol) {
                return Err(Error::DepthExceedsSolid);
            }
            for i in 0..k {
                let (a, b) = (q3[i], q3[(i + 1) % k]);
                let out = (b - a).cross(&n).normalize();
                let ring3 = vec![a, b, b + n * h, a + n * h];
                new_faces.push(Face3::new(plane_through(&a, &out), ring3, vec![]).with_tag(tag(i as u32 + 1)));
            }
            let cap: Vec<Point3> = q3.iter().map(|p| p + n * h).collect();
            new_faces.push(Face3::new(plane_through(&cap[0], &n), cap, vec![]).with_tag(tag(0)));
        }
        (ElabKind::Intrusion, Depth::Finite(t)) => {
            if !(t > tol) {
                return Err(Error::DepthExceedsSolid);
            }
            let qpoly = Polygon2::simple(q.clone());
            for pr in probes(&q, &qpoly) {
                let start = face.plane.project(&frame.to_world(&pr));
                match ray_hit(solid, &(start - n * tol * 10.0), &(-n), tol) {
                    Some((dist, _)) if dist > t + tol * 10.0 => {}
                    _ => return Err(Error::DepthExceedsSolid),
                }
            }
            for i in 0..k {
                let (a, b) = (q3[i], q3[(i + 1) % k]);
                let out = n.cross(&(b - a)).normalize();
                let ring3 = vec![a, b, b - n * t, a - n * t];
                new_faces.push(Face3::new(plane_through(&a, &out), ring3, vec![]).with_tag(tag(i as u32 + 1)));
            }
            let floor: Vec<Point3> = q3.iter().map(|p| p - n * t).collect();
            new_faces.push(Face3::new(plane_through(&floor[0], &n), floor, vec![]).with_tag(tag(0)));
        }
        (ElabKind::Intrusion, Depth::Through) => {
            let qpoly = Polygon2::simple(q.clone());
            let mut exit: Option<usize> = None;
            for pr in probes(&q, &qpoly) {
                let start = face.plane.project(&frame.to_world(&pr));
                let (_, ei) = ray_hit(solid, &(start - n * tol * 10.0), &(-n), tol).ok_or(Error::DepthExceedsSolid)?;
                if exit.is_some_and(|x| x != ei) || ei == fi {
                    return Err(Error::Degenerate("through-cut does not exit through a single face".into()));
                }
                exit = Some(ei);
            }
            let ei = exit.ok_or(Error::DepthExceedsSolid)?;
            let ef = solid.faces[ei].clone();
            let m = ef.plane.normal;
            let den = m.dot(&n);
            let proj: Vec<Point3> = q3.iter().map(|a| a - n * ((m.dot(&a.coords) - ef.plane.offset) / den)).collect();
            let eframe = ef.plane.frame();
            let epoly = ef.polygon_in(&eframe);
            let exit2: Vec<Point2> = proj.iter().map(|p| eframe.to_local(p)).collect();
            let mut exit_ccw = exit2.clone();
            if ring::signed_area(&exit_ccw) < 0.0 {
                exit_ccw.reverse();
            }
            if !profile_inside(&exit_ccw, &epoly, tol) {
                return Err(Error::ProfileNotInterior);
            }
            for i in 0..k {
                let (a, b) = (q3[i], q3[(i + 1) % k]);
                let out = n.cross(&(b - a)).normalize();
                let ring3 = vec![a, b, proj[(i + 1) % k], proj[i]];
                new_faces.push(Face3::new(plane_through(&a, &out), ring3, vec![]).with_tag(tag(i as u32 + 1)));
            }
            solid.faces[ei].holes.push(proj);
        }
        (ElabKind::Extrusion, Depth::Through) => {
            return Err(Error::Unsupported("extrusions need a finite height".into()));
        }
    }
    solid.faces[fi].holes.push(hole);
    solid.faces.extend(new_faces);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::shapes::cuboid;

    fn cube_tree(kind: ElabKind, depth: Depth) -> ElaborationTree {
        let cube = cuboid(Point3::origin(), Point3::new(1.0, 1.0, 1.0));
        let top = cube.faces.iter().position(|f| f.plane.normal.z > 0.5).unwrap() as i64;
        let frame = cube.faces[top as usize].plane.frame();
        let sq: Vec<Point2> = [(0.4, 0.4), (0.6, 0.4), (0.6, 0.6), (0.4, 0.6)]
            .iter()
            .map(|&(x, y)| frame.to_local(&Point3::new(x, y, 1.0)))
            .collect();
        ElaborationTree {
            roots: vec![BaseSolid { polyhedron_id: 0, solid: cube }],
            nodes: vec![Elaboration {
                id: 1,
                kind,
                base: FaceRef { owner: RefOwner::Polyhedron(0), face: top },
                profile: Polygon2::simple(sq),
                depth,
            }],
        }
    }

    #[test]
    fn square_intrusion_has_eleven_faces() {
        let s = apply_elaborations(&cube_tree(ElabKind::Intrusion, Depth::Finite(0.2))).unwrap();
        let p = &s.polyhedra[0];
        // Six box faces, four walls and one floor.
        assert_eq!(p.faces.len(), 6 + 4 + 1);
        assert_eq!(p.validate().unwrap(), 0);
        assert!((p.volume() - (1.0 - 0.04 * 0.2)).abs() < 1e-12);
    }

    #[test]
    fn through_cut_has_genus_one() {
        let s = apply_elaborations(&cube_tree(ElabKind::Intrusion, Depth::Through)).unwrap();
        let p = &s.polyhedra[0];
        assert_eq!(p.euler_characteristic(), 0);
        assert_eq!(p.validate().unwrap(), 1);
    }

    #[test]
    fn zero_and_excess_depth_rejected() {
        assert_eq!(apply_elaborations(&cube_tree(ElabKind::Extrusion, Depth::Finite(0.0))), Err(Error::DepthExceedsSolid));
        assert_eq!(apply_elaborations(&cube_tree(ElabKind::Intrusion, Depth::Finite(1.0))), Err(Error::DepthExceedsSolid));
    }

    #[test]
    fn profile_touching_boundary_rejected() {
        let mut t = cube_tree(ElabKind::Extrusion, Depth::Finite(0.5));
        let frame = t.roots[0].solid.faces[t.nodes[0].base.face as usize].plane.frame();
        t.nodes[0].profile = Polygon2::simple(
            [(0.0, 0.4), (0.6, 0.4), (0.6, 0.6), (0.0, 0.6)].iter().map(|&(x, y)| frame.to_local(&Point3::new(x, y, 1.0))).collect(),
        );
        assert_eq!(apply_elaborations(&t), Err(Error::ProfileNotInterior));
    }

    #[test]
    fn extrusion_volume() {
        let s = apply_elaborations(&cube_tree(ElabKind::Extrusion, Depth::Finite(0.5))).unwrap();
        let p = &s.polyhedra[0];
        assert_eq!(p.validate().unwrap(), 0);
        assert!((p.volume() - (1.0 + 0.04 * 0.5)).abs() < 1e-12);
    }
}
