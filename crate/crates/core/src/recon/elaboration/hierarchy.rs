//! Elaborated solids from per-face markers carrying hierarchy metadata.

use super::profile::{halfplane_polygon, orient_line, ordered_profile};
use super::tree::{apply_elaborations, find_face, BaseSolid, Depth, ElabKind, Elaboration, ElaborationTree};
use crate::error::{Error, Result};
use crate::geometry::halfspace::intersect_with_sources;
use crate::geometry::{Face3, FaceOwner, FaceTag, HalfSpace3, Line2, Plane3, Point2, Polygon2, Scene};
use crate::markup::{group_by, FaceRef, GroupKey, MarkerData, MarkerId, MarkupDescription};
use crate::placement::plane_line;
use crate::recon::convex::marker_halfspaces;
use crate::tolerance;
use std::collections::BTreeMap;

/// How the side markers of one elaboration determine its profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileMode {
    /// Intersection of the side half-planes; the profile must be convex.
    Convex,
    /// Consecutive side lines in the clockwise `order_index` sequence.
    Ordered,
}

/// Convex profiles: each elaboration is recovered as the hull of its side markers.
pub fn reconstruct_hierarchy(d: &MarkupDescription) -> Result<Scene> {
    apply_elaborations(&reconstruct_tree(d, ProfileMode::Convex)?)
}

/// Arbitrary simple profiles, from side markers ordered clockwise.
pub fn reconstruct_hierarchy_nonconvex(d: &MarkupDescription) -> Result<Scene> {
    apply_elaborations(&reconstruct_tree(d, ProfileMode::Ordered)?)
}

/// Recovers the elaboration tree; applying it yields the scene.
pub fn reconstruct_tree(d: &MarkupDescription, mode: ProfileMode) -> Result<ElaborationTree> {
    let mut base_ids = Vec::new();
    let mut groups: BTreeMap<i64, Vec<MarkerId>> = BTreeMap::new();
    for (id, m) in d.iter() {
        match m.meta.elaboration_id {
            Some(e) => groups.entry(e).or_default().push(id),
            None => base_ids.push(id),
        }
    }
    let base = d.subset(&base_ids);
    let mut tree = ElaborationTree::default();
    for (pid, ids) in group_by(&base, GroupKey::Polyhedron)? {
        let solid = base_solid(&base.subset(&ids), pid).map_err(|e| e.in_group(pid))?;
        tree.roots.push(solid);
    }
    let mut pending: Vec<(i64, FaceRef, Vec<MarkerId>)> = Vec::new();
    for (eid, ids) in groups {
        let mut base_ref = None;
        for &id in &ids {
            let r = d.markers[&id].meta.base_face_ref.ok_or(Error::MissingKey(id))?;
            base_ref.get_or_insert(r);
        }
        pending.push((eid, base_ref.expect("nonempty group"), ids));
    }
    while !pending.is_empty() {
        let scene = apply_elaborations(&tree)?;
        let mut rest = Vec::new();
        let mut added = Vec::new();
        for (eid, r, ids) in pending {
            match find_face(&scene, &r) {
                Some(face) => added.push(elaboration(d, face, eid, r, &ids, mode)?),
                None => rest.push((eid, r, ids)),
            }
        }
        if added.is_empty() {
            return Err(Error::UnknownBaseFace(format!("{:?}", rest[0].1)));
        }
        tree.nodes.extend(added);
        pending = rest;
    }
    Ok(tree)
}

/// Convex base solid whose faces are tagged with the face ids of their markers.
pub(super) fn base_solid(d: &MarkupDescription, pid: i64) -> Result<BaseSolid> {
    let hs = marker_halfspaces(d)?;
    let spaces: Vec<HalfSpace3> = hs.iter().map(|(_, h)| *h).collect();
    let (mut solid, sources) = intersect_with_sources(&spaces)?;
    for (f, &src) in solid.faces.iter_mut().zip(&sources) {
        if let Some(fid) = d.markers[&hs[src].0].meta.face_id {
            f.tag = Some(FaceTag { polyhedron_id: pid, owner: FaceOwner::Base, face: fid as u32 });
        }
    }
    Ok(BaseSolid { polyhedron_id: pid, solid })
}

fn marker_plane(d: &MarkupDescription, id: MarkerId) -> Result<Plane3> {
    match d.markers[&id].data {
        MarkerData::PointOnly { .. } => Err(Error::Unsupported(format!("marker {id} carries no plane"))),
        data => data.plane().ok_or_else(|| Error::Degenerate(format!("marker {id} has a zero normal"))),
    }
}

/// One side plane of an elaboration traced into the base face frame.
struct Side {
    line: Line2,
    face_id: Option<i64>,
    order: Option<i64>,
    points: Vec<Point2>,
}

fn elaboration(d: &MarkupDescription, face: &Face3, eid: i64, base: FaceRef, ids: &[MarkerId], mode: ProfileMode) -> Result<Elaboration> {
    let tol = tolerance::geo();
    let n = face.plane.normal;
    let frame = face.plane.frame();
    let mut offsets = Vec::new();
    let mut sides: Vec<Side> = Vec::new();
    for &id in ids {
        let m = &d.markers[&id];
        let plane = marker_plane(d, id)?;
        if tolerance::parallel(&plane.normal, &n) {
            offsets.push(face.plane.signed_distance(&m.position()));
        } else if tolerance::perpendicular(&plane.normal, &n) {
            let line = plane_line(&frame, &plane).ok_or(Error::NonPerpendicularMarker(id))?;
            let p = frame.to_local(&m.position());
            let key = match mode {
                ProfileMode::Convex => sides.iter().position(|s| s.line.same_set(&line, tol * 10.0)),
                ProfileMode::Ordered => {
                    let o = m.meta.order_index.ok_or(Error::MissingKey(id))?;
                    match sides.iter().position(|s| s.order == Some(o)) {
                        Some(i) if !sides[i].line.same_set(&line, tol * 10.0) => return Err(Error::NonPlanarFaceGroup(eid)),
                        k => k,
                    }
                }
            };
            match key {
                Some(i) => sides[i].points.push(p),
                None => sides.push(Side { line, face_id: m.meta.face_id, order: m.meta.order_index, points: vec![p] }),
            }
        } else {
            return Err(Error::NonPerpendicularMarker(id));
        }
    }
    let (kind, depth) = depth_of(&offsets, tol)?;
    let (mut ring, edge_side) = match mode {
        ProfileMode::Convex => convex_profile(&sides, tol)?,
        ProfileMode::Ordered => {
            sides.sort_by_key(|s| s.order);
            let lines: Vec<Line2> = sides.iter().map(|s| s.line).collect();
            ordered_profile(&lines, tol)?
        }
    };
    // Side faces are numbered from the first profile edge; restore that start.
    if let Some(first) = edge_side.iter().position(|&s| sides[s].face_id == Some(1)) {
        ring.rotate_left(first);
    }
    Ok(Elaboration { id: eid, kind, base, profile: Polygon2::simple(ring), depth })
}

/// Mean signed offset of the parallel markers; none at all means a through-cut.
pub(super) fn depth_of(offsets: &[f64], tol: f64) -> Result<(ElabKind, Depth)> {
    if offsets.is_empty() {
        return Ok((ElabKind::Intrusion, Depth::Through));
    }
    let mean = offsets.iter().sum::<f64>() / offsets.len() as f64;
    if offsets.iter().any(|o| (o - mean).abs() > tol) {
        return Err(Error::InconsistentDepth);
    }
    if mean > tol {
        Ok((ElabKind::Extrusion, Depth::Finite(mean)))
    } else if mean < -tol {
        Ok((ElabKind::Intrusion, Depth::Finite(-mean)))
    } else {
        Err(Error::DepthExceedsSolid)
    }
}

/// Intersection of the side half-planes, each oriented to hold every side
/// marker; its edge count must match the number of distinct side lines.
fn convex_profile(sides: &[Side], tol: f64) -> Result<(Vec<Point2>, Vec<usize>)> {
    let all: Vec<Point2> = sides.iter().flat_map(|s| s.points.iter().copied()).collect();
    let lines = sides.iter().map(|s| orient_line(&s.line, &all, tol)).collect::<Result<Vec<_>>>()?;
    let mismatch = |edges| Error::ProfileEdgeMismatch { edges, planes: lines.len() };
    let ring = halfplane_polygon(&lines, tol).ok_or_else(|| mismatch(0))?;
    if ring.len() != lines.len() {
        return Err(mismatch(ring.len()));
    }
    let k = ring.len();
    let edge_side = (0..k)
        .map(|i| {
            let (a, b) = (ring[i], ring[(i + 1) % k]);
            let err = |l: &Line2| l.signed_distance(&a).abs().max(l.signed_distance(&b).abs());
            (0..lines.len()).min_by(|&x, &y| err(&lines[x]).total_cmp(&err(&lines[y]))).expect("nonempty")
        })
        .collect();
    Ok((ring, edge_side))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::shapes::cuboid;
    use crate::geometry::{scenes_equal, Point3};
    use crate::markup::RefOwner;
    use crate::placement::{place_per_face, DataKind, MetaPlan, PlacementPolicy};

    fn top_profile(face_z: f64, pts: &[(f64, f64)]) -> Polygon2 {
        let plane = Plane3::new(crate::geometry::Vector3::z(), face_z).unwrap();
        let frame = plane.frame();
        Polygon2::simple(pts.iter().map(|&(x, y)| frame.to_local(&Point3::new(x, y, face_z))).collect())
    }

    fn cube_with(nodes: Vec<Elaboration>) -> ElaborationTree {
        let cube = cuboid(Point3::origin(), Point3::new(1.0, 1.0, 1.0));
        ElaborationTree { roots: vec![BaseSolid { polyhedron_id: 0, solid: cube }], nodes }
    }

    fn top_ref(t: &ElaborationTree) -> FaceRef {
        let top = t.roots[0].solid.faces.iter().position(|f| f.plane.normal.z > 0.5).unwrap();
        FaceRef { owner: RefOwner::Polyhedron(0), face: top as i64 }
    }

    const SQUARE: [(f64, f64); 4] = [(0.4, 0.4), (0.6, 0.4), (0.6, 0.6), (0.4, 0.6)];
    const ELL: [(f64, f64); 6] = [(0.2, 0.2), (0.8, 0.2), (0.8, 0.4), (0.4, 0.4), (0.4, 0.8), (0.2, 0.8)];

    fn single(kind: ElabKind, depth: Depth, pts: &[(f64, f64)]) -> ElaborationTree {
        let mut t = cube_with(vec![]);
        let base = top_ref(&t);
        t.nodes.push(Elaboration { id: 1, kind, base, profile: top_profile(1.0, pts), depth });
        t
    }

    fn markup(t: &ElaborationTree, order: bool, kind: DataKind, seed: u64) -> (Scene, MarkupDescription) {
        let s = apply_elaborations(t).unwrap();
        let mut policy = PlacementPolicy::random(seed, 2).with_meta(MetaPlan { order, ..MetaPlan::default() });
        policy.base_refs = t.base_refs();
        let d = place_per_face(&s, &policy, kind).unwrap();
        (s, d)
    }

    #[test]
    fn square_intrusion_round_trips() {
        let t = single(ElabKind::Intrusion, Depth::Finite(0.3), &SQUARE);
        for kind in [DataKind::PointNormal, DataKind::PointPlane] {
            let (s, d) = markup(&t, false, kind, 7);
            let r = reconstruct_hierarchy(&d).unwrap();
            assert!(scenes_equal(&s, &r, 1e-6));
        }
    }

    #[test]
    fn through_cut_round_trips_with_genus_one() {
        let t = single(ElabKind::Intrusion, Depth::Through, &SQUARE);
        let (s, d) = markup(&t, false, DataKind::PointPlane, 3);
        let r = reconstruct_hierarchy(&d).unwrap();
        assert!(scenes_equal(&s, &r, 1e-6));
        assert_eq!(r.polyhedra[0].euler_characteristic(), 0);
        assert_eq!(r.polyhedra[0].validate().unwrap(), 1);
    }

    #[test]
    fn two_level_extrusion_round_trips() {
        let mut t = single(ElabKind::Extrusion, Depth::Finite(0.5), &[(0.2, 0.2), (0.8, 0.2), (0.8, 0.8), (0.2, 0.8)]);
        t.nodes.push(Elaboration {
            id: 2,
            kind: ElabKind::Extrusion,
            base: FaceRef { owner: RefOwner::Elaboration(1), face: 0 },
            profile: top_profile(1.5, &SQUARE),
            depth: Depth::Finite(0.25),
        });
        let (s, d) = markup(&t, false, DataKind::PointNormal, 11);
        let r = reconstruct_hierarchy(&d).unwrap();
        assert!(scenes_equal(&s, &r, 1e-6));
    }

    #[test]
    fn l_profile_needs_ordering() {
        let t = single(ElabKind::Intrusion, Depth::Through, &ELL);
        let (s, d) = markup(&t, true, DataKind::PointPlane, 5);
        let r = reconstruct_hierarchy_nonconvex(&d).unwrap();
        assert!(scenes_equal(&s, &r, 1e-6));
        assert!(matches!(reconstruct_hierarchy(&d), Err(Error::ProfileEdgeMismatch { .. } | Error::SplitSides)));
    }

    #[test]
    fn ordering_agrees_on_convex_profiles() {
        let t = single(ElabKind::Extrusion, Depth::Finite(0.4), &SQUARE);
        let (_, d) = markup(&t, true, DataKind::PointNormal, 2);
        let a = reconstruct_hierarchy(&d).unwrap();
        let b = reconstruct_hierarchy_nonconvex(&d).unwrap();
        assert!(scenes_equal(&a, &b, 1e-9));
    }

    #[test]
    fn depth_and_ordering_guards() {
        assert!(depth_of(&[0.2, 0.3], 1e-9).is_err());
        assert_eq!(depth_of(&[], 1e-9).unwrap(), (ElabKind::Intrusion, Depth::Through));
        let t = single(ElabKind::Intrusion, Depth::Finite(0.3), &SQUARE);
        let (_, mut d) = markup(&t, true, DataKind::PointNormal, 9);
        // Give two opposite walls consecutive orders.
        let walls: Vec<MarkerId> = d.iter().filter(|(_, m)| m.meta.order_index.is_some()).map(|(id, _)| id).collect();
        for id in walls {
            let m = d.markers.get_mut(&id).unwrap();
            let o = m.meta.order_index.unwrap();
            m.meta.order_index = Some([0, 2, 1, 3][o as usize]);
        }
        assert_eq!(reconstruct_hierarchy_nonconvex(&d), Err(Error::OrderCycleBroken));
    }

    #[test]
    fn tilted_marker_rejected() {
        let t = single(ElabKind::Intrusion, Depth::Finite(0.3), &SQUARE);
        let (_, mut d) = markup(&t, false, DataKind::PointNormal, 4);
        let id = d.iter().find(|(_, m)| m.meta.elaboration_id.is_some()).unwrap().0;
        let m = d.markers.get_mut(&id).unwrap();
        m.data = MarkerData::PointNormal { position: m.position(), normal: crate::geometry::Vector3::new(1.0, 0.0, 1.0).normalize() };
        assert_eq!(reconstruct_hierarchy(&d), Err(Error::NonPerpendicularMarker(id)));
    }
}
