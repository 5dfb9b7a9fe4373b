//! Boxes with disjoint rectangular intrusions made into a single face,
//! recovered from markers that carry no ids.

use super::hierarchy::depth_of;
use super::rect_multi::face_rects;
use super::tree::{apply_elaborations, BaseSolid, ElabKind, Elaboration, ElaborationTree};
use crate::error::{Error, Result};
use crate::geometry::ring::Location;
use crate::geometry::shapes::cuboid;
use crate::geometry::plane::axis_of;
use crate::geometry::{polyhedra_distance, Face3, Point2, Point3, Polygon2, Polyhedron};
use crate::markup::{FaceRef, MarkerId, MarkupDescription, RefOwner};
use crate::recon::rect2d::Rect;
use crate::tolerance;

/// Axis of a marker's plane and the sign of its normal along that axis.
fn marker_axis(d: &MarkupDescription, id: MarkerId) -> Result<(usize, f64)> {
    let n = d.markers[&id].data.plane().ok_or(Error::NonAxisNormal(id))?.normal;
    let a = axis_of(&n).ok_or(Error::NonAxisNormal(id))?;
    Ok((a, n[a].signum()))
}

struct BoxMarkup {
    lo: Point3,
    hi: Point3,
    /// Markers off the six box planes, with their axis and normal sign.
    interior: Vec<(MarkerId, usize, f64)>,
}

/// Extremal axis planes bound the box; every other marker is interior.
fn box_markup(d: &MarkupDescription) -> Result<BoxMarkup> {
    let tol = tolerance::geo();
    let mut lo = Point3::new(f64::INFINITY, f64::INFINITY, f64::INFINITY);
    let mut hi = -lo;
    let mut axes = Vec::with_capacity(d.len());
    for (id, m) in d.iter() {
        let (a, s) = marker_axis(d, id)?;
        let x = m.position()[a];
        lo[a] = lo[a].min(x);
        hi[a] = hi[a].max(x);
        axes.push((id, a, s, x));
    }
    if (0..3).any(|a| !(hi[a] - lo[a] > tol)) {
        return Err(Error::Unbounded);
    }
    let interior = axes.into_iter().filter(|&(_, a, _, x)| x > lo[a] + tol && x < hi[a] - tol).map(|(id, a, s, _)| (id, a, s)).collect();
    Ok(BoxMarkup { lo, hi, interior })
}

/// The box with its faces tagged, and the index of the face with outward normal `side · e_axis`.
fn box_base(b: &BoxMarkup, axis: usize, side: f64) -> (ElaborationTree, usize) {
    let solid = cuboid(b.lo, b.hi);
    let fi = solid.faces.iter().position(|f| f.plane.normal[axis] * side > 0.5).expect("cuboid has every axis face");
    (ElaborationTree { roots: vec![BaseSolid { polyhedron_id: 0, solid }], nodes: vec![] }, fi)
}

fn single(tree: &ElaborationTree) -> Result<Polyhedron> {
    Ok(apply_elaborations(tree)?.polyhedra.remove(0))
}

/// Point-normal markers: the intruded face is opposite the one empty normal
/// class among interior markers; two empty classes on one axis mean every
/// intrusion cuts through along it.
pub fn reconstruct_box_intrusions_pn(d: &MarkupDescription) -> Result<Polyhedron> {
    let b = box_markup(d)?;
    let (axis, side) = if b.interior.is_empty() {
        (2, 1.0)
    } else {
        let present = |a: usize, s: f64| b.interior.iter().any(|&(_, ma, ms)| ma == a && ms == s);
        let empty: Vec<(usize, f64)> = (0..3).flat_map(|a| [(a, 1.0), (a, -1.0)]).filter(|&(a, s)| !present(a, s)).collect();
        match empty.as_slice() {
            [(a, s)] => (*a, -*s),
            [(a, _), (a2, _)] if a == a2 => (*a, 1.0),
            _ => return Err(Error::NoEmptyClass),
        }
    };
    let (mut tree, fi) = box_base(&b, axis, side);
    let face = tree.roots[0].solid.faces[fi].clone();
    let ids: Vec<MarkerId> = b.interior.iter().map(|&(id, _, _)| id).collect();
    let base = FaceRef { owner: RefOwner::Polyhedron(0), face: fi as i64 };
    for (i, (kind, profile, depth)) in face_rects(d, &face, &ids)?.into_iter().enumerate() {
        tree.nodes.push(Elaboration { id: i as i64, kind, base, profile, depth });
    }
    single(&tree)
}

/// Faces passing the closest-marker test: some perpendicular interior marker
/// is nearer the face than every parallel one, or no parallel marker exists.
fn candidate_faces(d: &MarkupDescription, b: &BoxMarkup) -> Vec<(usize, f64)> {
    let tol = tolerance::geo();
    let mut out = Vec::new();
    for a in 0..3 {
        for side in [1.0, -1.0] {
            let plane_at = if side > 0.0 { b.hi[a] } else { b.lo[a] };
            let dist = |id: MarkerId| (d.markers[&id].position()[a] - plane_at).abs();
            let parallel = b.interior.iter().filter(|m| m.1 == a).map(|m| dist(m.0)).fold(f64::INFINITY, f64::min);
            let nearest_perp = b.interior.iter().filter(|m| m.1 != a).map(|m| dist(m.0)).fold(f64::INFINITY, f64::min);
            if parallel.is_infinite() || nearest_perp < parallel - tol {
                out.push((a, side));
            }
        }
    }
    out
}

/// Wall marker of one face rectangle, in the face's in-plane axes.
#[derive(Clone, Copy)]
struct Wall {
    p: Point2,
    /// `true` for a wall on a line of constant first coordinate.
    vertical: bool,
}

const MAX_COVERS: usize = 256;

/// Point-plane markers: each face passing the closest-marker test is tried
/// with every rectangle set that exactly explains the wall markers; exactly
/// one distinct solid must reproduce the whole markup.
pub fn reconstruct_box_intrusions_pp(d: &MarkupDescription) -> Result<Polyhedron> {
    let b = box_markup(d)?;
    if b.interior.is_empty() {
        return single(&box_base(&b, 2, 1.0).0);
    }
    let mut found: Vec<Polyhedron> = Vec::new();
    for (axis, side) in candidate_faces(d, &b) {
        for solid in face_solutions(d, &b, axis, side) {
            if explains(d, &solid) && !found.iter().any(|f| polyhedra_distance(f, &solid).is_some_and(|x| x < 1e-6)) {
                found.push(solid);
            }
        }
    }
    match found.len() {
        1 => Ok(found.remove(0)),
        _ => Err(Error::FaceIdentificationFailed),
    }
}

fn face_solutions(d: &MarkupDescription, b: &BoxMarkup, axis: usize, side: f64) -> Vec<Polyhedron> {
    let tol = tolerance::geo();
    let (iu, iv) = ((axis + 1) % 3, (axis + 2) % 3);
    let to2 = |p: &Point3| Point2::new(p[iu], p[iv]);
    let (mut walls, mut floors) = (Vec::new(), Vec::new());
    for &(id, a, _) in &b.interior {
        let p = d.markers[&id].position();
        if a == axis {
            floors.push(p);
        } else {
            walls.push(Wall { p: to2(&p), vertical: a == iu });
        }
    }
    let xs = distinct(walls.iter().filter(|w| w.vertical).map(|w| w.p.x), tol);
    let ys = distinct(walls.iter().filter(|w| !w.vertical).map(|w| w.p.y), tol);
    let candidates = candidate_rects(&walls, &xs, &ys, tol);
    let mut covers = Vec::new();
    cover(&walls, &candidates, &mut vec![false; walls.len()], &mut Vec::new(), &mut covers, tol);
    let (tree0, fi) = box_base(b, axis, side);
    let face: Face3 = tree0.roots[0].solid.faces[fi].clone();
    let frame = face.plane.frame();
    let base = FaceRef { owner: RefOwner::Polyhedron(0), face: fi as i64 };
    let mut out = Vec::new();
    'cover: for chosen in covers {
        let mut tree = tree0.clone();
        for (i, &ci) in chosen.iter().enumerate() {
            let r = &candidates[ci].0;
            let offsets: Vec<f64> = floors
                .iter()
                .filter(|p| {
                    let q = to2(p);
                    q.x > r.min.x + tol && q.x < r.max.x - tol && q.y > r.min.y + tol && q.y < r.max.y - tol
                })
                .map(|p| face.plane.signed_distance(p))
                .collect();
            let Ok((kind @ ElabKind::Intrusion, depth)) = depth_of(&offsets, tol) else { continue 'cover };
            let mut q: Vec<Point2> = r
                .polygon()
                .outer
                .iter()
                .map(|c| {
                    let mut p = Point3::origin();
                    p[axis] = face.plane.offset * face.plane.normal[axis];
                    p[iu] = c.x;
                    p[iv] = c.y;
                    frame.to_local(&p)
                })
                .collect();
            if crate::geometry::ring::signed_area(&q) < 0.0 {
                q.reverse();
            }
            tree.nodes.push(Elaboration { id: i as i64, kind, base, profile: Polygon2::simple(q), depth });
        }
        if let Ok(s) = single(&tree) {
            out.push(s);
        }
    }
    out
}

fn distinct(vals: impl Iterator<Item = f64>, tol: f64) -> Vec<f64> {
    let mut v: Vec<f64> = vals.collect();
    v.sort_by(f64::total_cmp);
    v.dedup_by(|a, b| (*a - *b).abs() <= tol * 10.0);
    v
}

/// Rectangles from wall lines with a marker inside every edge and no wall
/// marker in their interior, each with the wall markers it accounts for.
fn candidate_rects(walls: &[Wall], xs: &[f64], ys: &[f64], tol: f64) -> Vec<(Rect, Vec<usize>)> {
    let on = |w: &Wall, vertical: bool, at: f64, lo: f64, hi: f64| {
        w.vertical == vertical && {
            let (c, t) = if vertical { (w.p.x, w.p.y) } else { (w.p.y, w.p.x) };
            (c - at).abs() <= tol * 10.0 && t > lo + tol && t < hi - tol
        }
    };
    let mut out = Vec::new();
    for (i, &x0) in xs.iter().enumerate() {
        for &x1 in &xs[i + 1..] {
            for (j, &y0) in ys.iter().enumerate() {
                'rect: for &y1 in &ys[j + 1..] {
                    let edges = [(true, x0, y0, y1), (true, x1, y0, y1), (false, y0, x0, x1), (false, y1, x0, x1)];
                    let mut covered = Vec::new();
                    for (vertical, at, lo, hi) in edges {
                        let before = covered.len();
                        covered.extend(walls.iter().enumerate().filter(|(_, w)| on(w, vertical, at, lo, hi)).map(|(k, _)| k));
                        if covered.len() == before {
                            continue 'rect;
                        }
                    }
                    let inside = |p: &Point2| p.x > x0 + tol && p.x < x1 - tol && p.y > y0 + tol && p.y < y1 - tol;
                    if walls.iter().any(|w| inside(&w.p)) {
                        continue;
                    }
                    out.push((Rect::new(x0, y0, x1, y1), covered));
                }
            }
        }
    }
    out
}

/// Every set of pairwise disjoint candidates covering each wall marker once.
fn cover(walls: &[Wall], cands: &[(Rect, Vec<usize>)], used: &mut Vec<bool>, chosen: &mut Vec<usize>, out: &mut Vec<Vec<usize>>, tol: f64) {
    if out.len() >= MAX_COVERS {
        return;
    }
    let Some(first) = used.iter().position(|u| !u) else {
        out.push(chosen.clone());
        return;
    };
    for (ci, (r, cov)) in cands.iter().enumerate() {
        if !cov.contains(&first) || cov.iter().any(|&k| used[k]) {
            continue;
        }
        let apart = |s: &Rect| r.max.x < s.min.x - tol || s.max.x < r.min.x - tol || r.max.y < s.min.y - tol || s.max.y < r.min.y - tol;
        if chosen.iter().any(|&c| !apart(&cands[c].0)) {
            continue;
        }
        for &k in cov {
            used[k] = true;
        }
        chosen.push(ci);
        cover(walls, cands, used, chosen, out, tol);
        chosen.pop();
        for &k in cov {
            used[k] = false;
        }
    }
}

/// Every marker lies on a face with its plane and every face holds a marker.
fn explains(d: &MarkupDescription, s: &Polyhedron) -> bool {
    let tol = tolerance::geo() * 10.0;
    let mut hit = vec![false; s.faces.len()];
    for (_, m) in d.iter() {
        let Some(plane) = m.data.plane() else { return false };
        let Some(fi) = s.faces.iter().position(|f| f.plane.same_set(&plane, tol) && f.locate(&m.position(), tol) == Location::Inside) else {
            return false;
        };
        hit[fi] = true;
    }
    hit.into_iter().all(|h| h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{scenes_equal, Scene};
    use crate::placement::{place_per_face, DataKind, PlacementPolicy};
    use crate::recon::elaboration::Depth;

    type Cut = (f64, f64, f64, f64, Option<f64>);

    /// Box `[0,2]×[0,1]×[0,1]` with rectangles `(u0, v0, u1, v1, depth)` cut into faces.
    fn boxed_faces(cuts: &[(usize, f64, Cut)]) -> Polyhedron {
        let b = BoxMarkup { lo: Point3::origin(), hi: Point3::new(2.0, 1.0, 1.0), interior: vec![] };
        let mut tree = box_base(&b, 0, 1.0).0;
        for (i, &(axis, side, (u0, v0, u1, v1, depth))) in cuts.iter().enumerate() {
            let fi = box_base(&b, axis, side).1;
            let face = tree.roots[0].solid.faces[fi].clone();
            let frame = face.plane.frame();
            let (iu, iv) = ((axis + 1) % 3, (axis + 2) % 3);
            let mut q: Vec<Point2> = Rect::new(u0, v0, u1, v1)
                .polygon()
                .outer
                .iter()
                .map(|c| {
                    let mut p = Point3::origin();
                    p[axis] = if side > 0.0 { b.hi[axis] } else { 0.0 };
                    p[iu] = c.x;
                    p[iv] = c.y;
                    frame.to_local(&p)
                })
                .collect();
            if crate::geometry::ring::signed_area(&q) < 0.0 {
                q.reverse();
            }
            let depth = depth.map_or(Depth::Through, Depth::Finite);
            let base = FaceRef { owner: RefOwner::Polyhedron(0), face: fi as i64 };
            tree.nodes.push(Elaboration { id: i as i64, kind: ElabKind::Intrusion, base, profile: Polygon2::simple(q), depth });
        }
        single(&tree).unwrap()
    }

    fn boxed(axis: usize, side: f64, rects: &[Cut]) -> Polyhedron {
        boxed_faces(&rects.iter().map(|&r| (axis, side, r)).collect::<Vec<_>>())
    }

    fn markup(p: &Polyhedron, kind: DataKind, seed: u64) -> MarkupDescription {
        let policy = PlacementPolicy::random(seed, 2).with_meta(crate::placement::MetaPlan::none());
        place_per_face(&Scene::single(p.strip_tags()), &policy, kind).unwrap()
    }

    fn same(a: &Polyhedron, b: &Polyhedron) -> bool {
        scenes_equal(&Scene::single(a.clone()), &Scene::single(b.clone()), 1e-6)
    }

    #[test]
    fn centered_intrusion_both_engines() {
        let p = boxed(2, 1.0, &[(0.8, 0.4, 1.2, 0.6, Some(0.3))]);
        let pn = reconstruct_box_intrusions_pn(&markup(&p, DataKind::PointNormal, 1)).unwrap();
        let pp = reconstruct_box_intrusions_pp(&markup(&p, DataKind::PointPlane, 1)).unwrap();
        assert!(same(&p, &pn) && same(&pn, &pp));
    }

    #[test]
    fn plain_box_is_returned() {
        let p = boxed(2, 1.0, &[]);
        assert!(same(&p, &reconstruct_box_intrusions_pn(&markup(&p, DataKind::PointNormal, 2)).unwrap()));
        assert!(same(&p, &reconstruct_box_intrusions_pp(&markup(&p, DataKind::PointPlane, 2)).unwrap()));
    }

    #[test]
    fn mixed_depths_on_a_side_face() {
        let rects = [(0.1, 0.1, 0.4, 0.5, Some(0.7)), (0.6, 0.2, 0.8, 0.9, None), (0.1, 0.7, 0.3, 0.9, Some(1.5))];
        let p = boxed(0, -1.0, &rects);
        for seed in 0..4 {
            let pn = reconstruct_box_intrusions_pn(&markup(&p, DataKind::PointNormal, seed)).unwrap();
            let pp = reconstruct_box_intrusions_pp(&markup(&p, DataKind::PointPlane, seed)).unwrap();
            assert!(same(&p, &pn) && same(&p, &pp), "seed {seed}");
        }
    }

    #[test]
    fn through_cuts_only() {
        let p = boxed(2, -1.0, &[(0.2, 0.2, 0.6, 0.8, None), (1.0, 0.3, 1.5, 0.6, None)]);
        assert_eq!(p.validate().unwrap(), 2);
        assert!(same(&p, &reconstruct_box_intrusions_pn(&markup(&p, DataKind::PointNormal, 3)).unwrap()));
        assert!(same(&p, &reconstruct_box_intrusions_pp(&markup(&p, DataKind::PointPlane, 3)).unwrap()));
    }

    #[test]
    fn two_intruded_faces_rejected() {
        let p = boxed_faces(&[(2, 1.0, (0.2, 0.2, 0.6, 0.8, Some(0.3))), (0, 1.0, (0.2, 0.2, 0.6, 0.8, Some(0.3)))]);
        assert_eq!(p.validate().unwrap(), 0);
        assert_eq!(reconstruct_box_intrusions_pn(&markup(&p, DataKind::PointNormal, 4)), Err(Error::NoEmptyClass));
        assert_eq!(reconstruct_box_intrusions_pp(&markup(&p, DataKind::PointPlane, 4)), Err(Error::FaceIdentificationFailed));
    }
}
