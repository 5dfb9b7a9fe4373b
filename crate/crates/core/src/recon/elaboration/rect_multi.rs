//! Disjoint axis-aligned rectangular elaborations on convex bases, recovered
//! without per-elaboration ids.

use super::hierarchy::{base_solid, depth_of};
use super::tree::{apply_elaborations, find_face, Depth, ElabKind, Elaboration, ElaborationTree};
use crate::error::{Error, Result};
use crate::geometry::ring;
use crate::geometry::{Face3, Frame3, Point2, Polygon2, Scene};
use crate::markup::{group_by, FaceRef, GroupKey, MarkerData, MarkerId, MarkupDescription};
use crate::recon::rect2d::{reconstruct_rects, EdgeClass, Marker2N, Rect};
use crate::tolerance;
use std::collections::BTreeMap;

/// Markers without a base face reference describe the convex bases; the
/// rest are grouped by the base face they elaborate.
pub fn reconstruct_rect_elab_multi(d: &MarkupDescription) -> Result<Scene> {
    apply_elaborations(&reconstruct_rect_tree(d)?)
}

pub fn reconstruct_rect_tree(d: &MarkupDescription) -> Result<ElaborationTree> {
    let mut base_ids = Vec::new();
    let mut groups: BTreeMap<FaceRef, Vec<MarkerId>> = BTreeMap::new();
    for (id, m) in d.iter() {
        match m.meta.base_face_ref {
            Some(r) => groups.entry(r).or_default().push(id),
            None => base_ids.push(id),
        }
    }
    let base = d.subset(&base_ids);
    let mut tree = ElaborationTree::default();
    for (pid, ids) in group_by(&base, GroupKey::Polyhedron)? {
        tree.roots.push(base_solid(&base.subset(&ids), pid).map_err(|e| e.in_group(pid))?);
    }
    let scene = apply_elaborations(&tree)?;
    let mut next_id = 0;
    for (r, ids) in groups {
        let face = find_face(&scene, &r).ok_or_else(|| Error::UnknownBaseFace(format!("{r:?}")))?;
        for (kind, rect_profile, depth) in face_rects(d, face, &ids)? {
            tree.nodes.push(Elaboration { id: next_id, kind, base: r, profile: rect_profile, depth });
            next_id += 1;
        }
    }
    Ok(tree)
}

/// Rectangles elaborating one face, with their kind, profile in the face frame and depth.
pub(super) fn face_rects(d: &MarkupDescription, face: &Face3, ids: &[MarkerId]) -> Result<Vec<(ElabKind, Polygon2, Depth)>> {
    let tol = tolerance::geo();
    let n = face.plane.normal;
    let mut walls: Vec<(MarkerId, crate::geometry::Point3, crate::geometry::Vector3)> = Vec::new();
    let mut caps = Vec::new();
    for &id in ids {
        let m = &d.markers[&id];
        let MarkerData::PointNormal { position, normal } = m.data else {
            return Err(Error::Unsupported(format!("marker {id} needs a normal")));
        };
        if tolerance::parallel(&normal, &n) {
            caps.push((id, position));
        } else if tolerance::perpendicular(&normal, &n) {
            // Rectangle-outward: intrusion walls face into the hole.
            let flip = if face.plane.signed_distance(&position) < 0.0 { -1.0 } else { 1.0 };
            walls.push((id, position, normal * flip));
        } else {
            return Err(Error::NonPerpendicularMarker(id));
        }
    }
    let Some(&(_, _, axis)) = walls.first() else {
        return if caps.is_empty() { Ok(vec![]) } else { Err(Error::NoConsistentSeed { remaining: caps.len() }) };
    };
    let frame = Frame3::with_u_axis(&face.plane, &axis)?;
    let s = tolerance::AXIS.sin();
    let markers = walls
        .iter()
        .map(|&(id, p, nrm)| {
            let v = frame.dir_to_local(&nrm);
            let class = if v.y.abs() <= s {
                if v.x > 0.0 { EdgeClass::Right } else { EdgeClass::Left }
            } else if v.x.abs() <= s {
                if v.y > 0.0 { EdgeClass::Top } else { EdgeClass::Bottom }
            } else {
                return Err(Error::NonAxisNormal(id));
            };
            Ok(Marker2N::new(id, frame.to_local(&p), class))
        })
        .collect::<Result<Vec<_>>>()?;
    let rects = reconstruct_rects(&markers)?;
    let face_frame = face.plane.frame();
    let mut used = 0;
    let mut out = Vec::new();
    for r in &rects.rects {
        let offsets: Vec<f64> = caps
            .iter()
            .filter(|(_, p)| strictly_inside(r, &frame.to_local(p), tol))
            .map(|(_, p)| face.plane.signed_distance(p))
            .collect();
        used += offsets.len();
        let (kind, depth) = depth_of(&offsets, tol)?;
        let mut q: Vec<Point2> = r.polygon().outer.iter().map(|c| face_frame.to_local(&frame.to_world(c))).collect();
        if ring::signed_area(&q) < 0.0 {
            q.reverse();
        }
        out.push((kind, Polygon2::simple(q), depth));
    }
    if used != caps.len() {
        return Err(Error::InconsistentDepth);
    }
    Ok(out)
}

/// Inside the open cylinder over `r`.
fn strictly_inside(r: &Rect, p: &Point2, tol: f64) -> bool {
    p.x > r.min.x + tol && p.x < r.max.x - tol && p.y > r.min.y + tol && p.y < r.max.y - tol
}
