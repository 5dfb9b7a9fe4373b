//! Strategies that turn a scene into a markup description.

use crate::error::{Error, Result};
use crate::geometry::arrangement::BBox2;
use crate::geometry::ring::{self, Location};
use crate::geometry::{build_arrangement, inscribed_radius, Face3, FaceOwner, FaceTag, Line2, Plane3, Point2, Point3, Polygon2, Scene};
use crate::markup::{FaceRef, Marker, MarkerData, MarkerMeta, MarkupDescription};
use crate::tolerance;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlacementMode {
    /// Vertex centroid when it is interior, otherwise a deterministic interior point.
    Centroid,
    RandomInterior { seed: u64 },
}

/// Metadata fields a placement emits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MetaPlan {
    pub face_id: bool,
    pub polyhedron_id: bool,
    pub elaboration: bool,
    pub order: bool,
}

impl Default for MetaPlan {
    fn default() -> Self {
        Self { face_id: true, polyhedron_id: true, elaboration: true, order: false }
    }
}

impl MetaPlan {
    pub fn none() -> Self {
        Self { face_id: false, polyhedron_id: false, elaboration: false, order: false }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlacementPolicy {
    pub mode: PlacementMode,
    pub markers_per_face: usize,
    pub meta: MetaPlan,
    /// Base face of each elaboration id, for elaboration-built scenes.
    pub base_refs: BTreeMap<i64, FaceRef>,
}

impl Default for PlacementPolicy {
    fn default() -> Self {
        Self { mode: PlacementMode::Centroid, markers_per_face: 1, meta: MetaPlan::default(), base_refs: BTreeMap::new() }
    }
}

impl PlacementPolicy {
    pub fn random(seed: u64, per_face: usize) -> Self {
        Self { mode: PlacementMode::RandomInterior { seed }, markers_per_face: per_face, ..Default::default() }
    }

    pub fn with_meta(mut self, meta: MetaPlan) -> Self {
        self.meta = meta;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataKind {
    PointPlane,
    PointNormal,
}

/// Relative clearance kept between random markers and the face boundary.
const MARGIN: f64 = 1e-3;

/// Interior sample points of a planar polygon.
pub fn sample_polygon(poly: &Polygon2, mode: PlacementMode, count: usize, rng: &mut ChaCha8Rng) -> Option<Vec<Point2>> {
    let margin = MARGIN * poly.diameter();
    let mut out = Vec::with_capacity(count);
    if mode == PlacementMode::Centroid {
        out.push(poly.interior_point(margin)?);
    }
    let (lo, hi) = poly.bbox();
    let mut tries = 0usize;
    while out.len() < count {
        tries += 1;
        if tries > 200_000 {
            return None;
        }
        let p = Point2::new(rng.gen_range(lo.x..=hi.x), rng.gen_range(lo.y..=hi.y));
        if poly.locate(&p, 0.0) == Location::Inside && poly.boundary_distance(&p) >= margin {
            out.push(p);
        }
    }
    Some(out)
}

fn face_meta(face: &Face3, pid: usize, global_face: usize, policy: &PlacementPolicy, sides: &BTreeMap<i64, i64>) -> MarkerMeta {
    let mut m = MarkerMeta::default();
    let (poly_id, face_id, owner) = match face.tag {
        Some(t) => (t.polyhedron_id, t.face as i64, t.owner),
        None => (pid as i64, global_face as i64, FaceOwner::Base),
    };
    if policy.meta.face_id {
        m.face_id = Some(face_id);
    }
    if policy.meta.polyhedron_id {
        m.polyhedron_id = Some(poly_id);
    }
    if let FaceOwner::Elaboration(eid) = owner {
        if policy.meta.elaboration {
            m.elaboration_id = Some(eid);
            m.base_face_ref = policy.base_refs.get(&eid).copied();
        }
        if policy.meta.order && face_id >= 1 {
            // Sides are tagged counterclockwise; emit a clockwise order.
            let k = sides.get(&eid).copied().unwrap_or(0);
            if k > 0 {
                m.order_index = Some((k - (face_id - 1)) % k);
            }
        }
    }
    m
}

/// At least `markers_per_face` markers on every face.
pub fn place_per_face(s: &Scene, policy: &PlacementPolicy, kind: DataKind) -> Result<MarkupDescription> {
    let seed = match policy.mode {
        PlacementMode::RandomInterior { seed } => seed,
        PlacementMode::Centroid => 0,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let per = policy.markers_per_face.max(1);
    let mut sides: BTreeMap<i64, i64> = BTreeMap::new();
    for f in s.polyhedra.iter().flat_map(|p| &p.faces) {
        if let Some(FaceTag { owner: FaceOwner::Elaboration(eid), face, .. }) = f.tag {
            let e = sides.entry(eid).or_default();
            *e = (*e).max(face as i64);
        }
    }
    let mut d = MarkupDescription::new();
    let mut global = 0usize;
    for (pid, p) in s.polyhedra.iter().enumerate() {
        for f in &p.faces {
            let frame = f.frame();
            let poly = f.polygon_in(&frame);
            if poly.area() <= tolerance::geo().powi(2) {
                return Err(Error::EmptyFace(global));
            }
            let pts = sample_polygon(&poly, policy.mode, per, &mut rng).ok_or(Error::EmptyFace(global))?;
            let meta = face_meta(f, pid, global, policy, &sides);
            for q in pts {
                let position = f.plane.project(&frame.to_world(&q));
                let data = match kind {
                    DataKind::PointPlane => MarkerData::PointPlane { position, plane: f.plane.unoriented() },
                    DataKind::PointNormal => MarkerData::PointNormal { position, normal: f.plane.normal },
                };
                d.insert(Marker { data, meta });
            }
            global += 1;
        }
    }
    Ok(d)
}

/// Point-plane markers on a square grid of pitch `spacing / √2`: one marker
/// inside every grid cell that meets a face, so each face point is within
/// `spacing` (the cell diameter) of a marker in its own cell.
pub fn place_dense(s: &Scene, spacing: f64) -> MarkupDescription {
    let mut d = MarkupDescription::new();
    if !(spacing > 0.0) {
        return d;
    }
    let h = spacing / std::f64::consts::SQRT_2;
    for p in &s.polyhedra {
        for f in &p.faces {
            let frame = f.frame();
            let poly = f.polygon_in(&frame);
            let plane = f.plane.unoriented();
            let nudge = 1e-6 * poly.diameter().max(1e-3);
            let (lo, hi) = poly.bbox();
            let nx = ((hi.x - lo.x) / h).ceil().max(1.0) as usize;
            let ny = ((hi.y - lo.y) / h).ceil().max(1.0) as usize;
            let x0 = 0.5 * (lo.x + hi.x) - 0.5 * nx as f64 * h;
            let y0 = 0.5 * (lo.y + hi.y) - 0.5 * ny as f64 * h;
            for i in 0..nx {
                for j in 0..ny {
                    let cell = (Point2::new(x0 + i as f64 * h, y0 + j as f64 * h), Point2::new(x0 + (i + 1) as f64 * h, y0 + (j + 1) as f64 * h));
                    if let Some(q) = cell_sample(&poly, cell, nudge) {
                        let position = f.plane.project(&frame.to_world(&q));
                        d.insert(Marker::new(MarkerData::PointPlane { position, plane }));
                    }
                }
            }
        }
    }
    d
}

/// A face point inside the closed cell, or `None` if the cell misses the face interior.
fn cell_sample(poly: &Polygon2, cell: (Point2, Point2), nudge: f64) -> Option<Point2> {
    let (lo, hi) = cell;
    let in_cell = |q: &Point2| q.x >= lo.x && q.x <= hi.x && q.y >= lo.y && q.y <= hi.y;
    let ok = |q: &Point2| in_cell(q) && poly.locate(q, 0.0) == Location::Inside && poly.boundary_distance(q) > nudge * 0.25;
    let centre = Point2::from((lo.coords + hi.coords) * 0.5);
    if ok(&centre) {
        return Some(centre);
    }
    for r in poly.rings() {
        let n = r.len();
        for k in 0..n {
            let (a, b) = (r[k], r[(k + 1) % n]);
            let e = b - a;
            let left = nalgebra::Vector2::new(-e.y, e.x) / e.norm();
            if let Some((t0, t1)) = clip_segment(&a, &b, lo, hi) {
                for t in [0.5 * (t0 + t1), t0 + 0.25 * (t1 - t0), t0 + 0.75 * (t1 - t0)] {
                    let q = a + e * t + left * nudge;
                    if ok(&q) {
                        return Some(q);
                    }
                }
            }
            if in_cell(&a) {
                let c = r[(k + n - 1) % n];
                let ep = a - c;
                let lp = nalgebra::Vector2::new(-ep.y, ep.x) / ep.norm();
                let bis = left + lp;
                if bis.norm() > 1e-9 {
                    let q = a + bis.normalize() * nudge * 4.0;
                    if ok(&q) {
                        return Some(q);
                    }
                }
            }
        }
    }
    None
}

/// Parameter range of segment `ab` inside the axis-aligned box.
fn clip_segment(a: &Point2, b: &Point2, lo: Point2, hi: Point2) -> Option<(f64, f64)> {
    let d = b - a;
    let (mut t0, mut t1) = (0.0f64, 1.0f64);
    for (p, q) in [(-d.x, a.x - lo.x), (d.x, hi.x - a.x), (-d.y, a.y - lo.y), (d.y, hi.y - a.y)] {
        if p == 0.0 {
            if q < 0.0 {
                return None;
            }
        } else {
            let r = q / p;
            if p < 0.0 {
                t0 = t0.max(r);
            } else {
                t1 = t1.min(r);
            }
        }
    }
    (t1 > t0).then_some((t0, t1))
}

/// Minimum inscribed radius over the bounded cells that the scene's planes
/// cut into each face plane.
pub fn compute_epsilon_min(s: &Scene) -> Result<f64> {
    let tol = tolerance::geo();
    let mut planes: Vec<Plane3> = Vec::new();
    for p in &s.polyhedra {
        for f in &p.faces {
            if !planes.iter().any(|q| q.same_set(&f.plane, tol)) {
                planes.push(f.plane.unoriented());
            }
        }
    }
    if planes.is_empty() {
        return Err(Error::DegenerateScene("scene has no faces".into()));
    }
    let (blo, bhi) = s.bbox().ok_or_else(|| Error::DegenerateScene("empty scene".into()))?;
    let corners: Vec<Point3> = (0..8)
        .map(|k| Point3::new(if k & 1 == 0 { blo.x } else { bhi.x }, if k & 2 == 0 { blo.y } else { bhi.y }, if k & 4 == 0 { blo.z } else { bhi.z }))
        .collect();
    let mut best = f64::INFINITY;
    for (i, pl) in planes.iter().enumerate() {
        let frame = pl.frame();
        let lines: Vec<Line2> = planes
            .iter()
            .enumerate()
            .filter(|(j, q)| *j != i && !q.is_parallel(pl))
            .filter_map(|(_, q)| plane_line(&frame, q))
            .collect();
        let local: Vec<Point2> = corners.iter().map(|c| frame.to_local(c)).collect();
        let mut bb = BBox2::of_points(&local).unwrap().scaled(1.5, 1.0);
        for a in 0..lines.len() {
            for b in a + 1..lines.len() {
                if let Some(x) = lines[a].intersection(&lines[b]) {
                    if x.coords.norm() < 1e12 {
                        bb.include(&x);
                    }
                }
            }
        }
        let bb = bb.scaled(1.1, 1.0);
        let arr = build_arrangement(&lines, bb);
        for (ri, region) in arr.regions.iter().enumerate() {
            if arr.touches_bbox(ri) {
                continue;
            }
            let r = inscribed_radius(region).map_err(|_| Error::DegenerateScene(format!("collapsed cell on plane {i}")))?;
            best = best.min(r);
        }
    }
    if !best.is_finite() || best <= 0.0 {
        return Err(Error::DegenerateScene("no bounded cell".into()));
    }
    Ok(best)
}

/// Trace of plane `q` inside the plane of `frame`.
pub fn plane_line(frame: &crate::geometry::Frame3, q: &Plane3) -> Option<Line2> {
    let a = q.normal.dot(&frame.u);
    let b = q.normal.dot(&frame.v);
    let c = q.offset - q.normal.dot(&frame.origin.coords);
    Line2::new(nalgebra::Vector2::new(a, b), c).ok()
}

/// One point marker per vertex, or per (vertex, face) pair with face ids.
/// With ordering, `order_index` runs clockwise seen from outside, starting
/// at the smallest vertex of the outer ring; each hole continues the
/// numbering after one skipped index, so a gap marks a new ring.
pub fn place_vertices(s: &Scene, with_face_ids: bool, with_order: bool) -> MarkupDescription {
    let tol = tolerance::geo();
    let mut d = MarkupDescription::new();
    let mut global = 0i64;
    for (pid, p) in s.polyhedra.iter().enumerate() {
        let topo = p.topology();
        if !with_face_ids {
            for (vi, v) in topo.vertices.iter().enumerate() {
                if topo.loops.iter().flatten().any(|r| r.contains(&vi)) {
                    let mut m = Marker::new(MarkerData::PointOnly { position: *v });
                    m.meta.polyhedron_id = Some(pid as i64);
                    d.insert(m);
                }
            }
            continue;
        }
        for rings in &topo.loops {
            let mut idx = 0i64;
            for r in rings {
                let mut cw: Vec<usize> = r.iter().rev().copied().collect();
                let start = (0..cw.len())
                    .min_by(|&a, &b| crate::geometry::cmp_point3(&topo.vertices[cw[a]], &topo.vertices[cw[b]], tol))
                    .unwrap_or(0);
                cw.rotate_left(start);
                for v in cw {
                    let mut m = Marker::new(MarkerData::PointOnly { position: topo.vertices[v] });
                    m.meta.face_id = Some(global);
                    m.meta.polyhedron_id = Some(pid as i64);
                    if with_order {
                        m.meta.order_index = Some(idx);
                    }
                    idx += 1;
                    d.insert(m);
                }
                idx += 1;
            }
            global += 1;
        }
    }
    d
}

/// Vertex markers of planar polygons (z = 0). Ordering is clockwise, with
/// the same ring gaps as [`place_vertices`].
pub fn place_vertices_2d(polys: &[Polygon2], with_face_ids: bool, with_order: bool) -> MarkupDescription {
    let mut d = MarkupDescription::new();
    for (pi, poly) in polys.iter().enumerate() {
        let mut idx = 0i64;
        for r in poly.rings() {
            let mut cw: Vec<Point2> = r.iter().rev().copied().collect();
            ring::rotate_to_min(&mut cw, tolerance::geo());
            for q in cw {
                let mut m = Marker::new(MarkerData::PointOnly { position: Point3::new(q.x, q.y, 0.0) });
                if with_face_ids {
                    m.meta.face_id = Some(pi as i64);
                }
                if with_order {
                    m.meta.order_index = Some(idx);
                }
                idx += 1;
                d.insert(m);
            }
            idx += 1;
        }
    }
    d
}

/// Point-normal markers (z = 0) on every edge of planar polygons. Normals
/// point out of the polygon; `face_id` is a global edge index and
/// `polyhedron_id` the polygon index.
pub fn place_polygon_sides(polys: &[Polygon2], policy: &PlacementPolicy) -> MarkupDescription {
    let seed = match policy.mode {
        PlacementMode::RandomInterior { seed } => seed,
        PlacementMode::Centroid => 0,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut d = MarkupDescription::new();
    let mut edge = 0i64;
    for (pi, poly) in polys.iter().enumerate() {
        for r in poly.rings() {
            let n = r.len();
            for k in 0..n {
                let (a, b) = (r[k], r[(k + 1) % n]);
                let e = b - a;
                let out = nalgebra::Vector3::new(e.y, -e.x, 0.0).normalize();
                for s in 0..policy.markers_per_face.max(1) {
                    let t = match policy.mode {
                        PlacementMode::Centroid if s == 0 => 0.5,
                        _ => rng.gen_range(MARGIN..=1.0 - MARGIN),
                    };
                    let q = a + e * t;
                    let mut m = Marker::new(MarkerData::PointNormal { position: Point3::new(q.x, q.y, 0.0), normal: out });
                    if policy.meta.face_id {
                        m.meta.face_id = Some(edge);
                    }
                    if policy.meta.polyhedron_id {
                        m.meta.polyhedron_id = Some(pi as i64);
                    }
                    d.insert(m);
                }
                edge += 1;
            }
        }
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::shapes::cuboid;
    use crate::markup::{group_by, validate, GroupKey};

    fn unit_cube() -> Scene {
        Scene::single(cuboid(Point3::origin(), Point3::new(1.0, 1.0, 1.0)))
    }

    #[test]
    fn centroid_markers_at_face_centres() {
        let d = place_per_face(&unit_cube(), &PlacementPolicy::default(), DataKind::PointPlane).unwrap();
        assert_eq!(d.len(), 6);
        let top = d.markers.values().find(|m| m.position().z > 0.99).unwrap();
        assert!((top.position() - Point3::new(0.5, 0.5, 1.0)).norm() < 1e-12);
        let pl = top.data.plane().unwrap();
        assert!(pl.same_set(&Plane3::new(nalgebra::Vector3::z(), 1.0).unwrap(), 1e-12));
    }

    #[test]
    fn random_markers_are_valid_and_outward() {
        let d = place_per_face(&unit_cube(), &PlacementPolicy::random(42, 2), DataKind::PointNormal).unwrap();
        assert_eq!(d.len(), 12);
        assert!(validate(&d).is_empty());
        let c = Point3::new(0.5, 0.5, 0.5);
        for m in d.markers.values() {
            assert!(m.data.normal().unwrap().dot(&(m.position() - c)) > 0.0);
        }
    }

    #[test]
    fn two_cubes_group_by_polyhedron() {
        let s = Scene::new(vec![
            cuboid(Point3::origin(), Point3::new(1.0, 1.0, 1.0)),
            cuboid(Point3::new(3.0, 0.0, 0.0), Point3::new(4.0, 1.0, 1.0)),
        ]);
        let d = place_per_face(&s, &PlacementPolicy::default(), DataKind::PointPlane).unwrap();
        let g = group_by(&d, GroupKey::Polyhedron).unwrap();
        assert_eq!(g.len(), 2);
        assert!(g.iter().all(|(_, ids)| ids.len() == 6));
    }

    fn square_face_scene() -> Scene {
        Scene::single(cuboid(Point3::origin(), Point3::new(1.0, 1.0, 1.0)))
    }

    fn top_markers(d: &MarkupDescription) -> Vec<Point3> {
        d.markers.values().map(|m| m.position()).filter(|p| (p.z - 1.0).abs() < 1e-12).collect()
    }

    #[test]
    fn dense_unit_spacing_uses_four_markers_per_face() {
        let d = place_dense(&square_face_scene(), 1.0);
        let top = top_markers(&d);
        assert!(top.len() <= 4);
        for i in 0..=20 {
            for j in 0..=20 {
                let q = Point3::new(i as f64 / 20.0, j as f64 / 20.0, 1.0);
                assert!(top.iter().map(|m| (m - q).norm()).fold(f64::INFINITY, f64::min) <= 1.0);
            }
        }
    }

    #[test]
    fn dense_coverage_monte_carlo() {
        let d = place_dense(&square_face_scene(), 0.1);
        let top = top_markers(&d);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut worst: f64 = 0.0;
        for _ in 0..10_000 {
            let q = Point3::new(rng.gen::<f64>(), rng.gen::<f64>(), 1.0);
            worst = worst.max(top.iter().map(|m| (m - q).norm()).fold(f64::INFINITY, f64::min));
        }
        assert!(worst <= 0.1, "worst {worst}");
        assert!(place_dense(&Scene::default(), 0.1).is_empty());
    }

    #[test]
    fn dense_covers_nonconvex_face() {
        let l = Polygon2::simple(vec![
            Point2::new(0., 0.),
            Point2::new(2., 0.),
            Point2::new(2., 0.3),
            Point2::new(0.3, 0.3),
            Point2::new(0.3, 2.),
            Point2::new(0., 2.),
        ]);
        let s = Scene::single(crate::geometry::shapes::prism_z(&l, 0.0, 1.0));
        let spacing = 0.25;
        let d = place_dense(&s, spacing);
        let top = top_markers(&d);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut n = 0;
        while n < 5000 {
            let q2 = Point2::new(rng.gen_range(0.0..2.0), rng.gen_range(0.0..2.0));
            if l.locate(&q2, 0.0) != Location::Inside {
                continue;
            }
            n += 1;
            let q = Point3::new(q2.x, q2.y, 1.0);
            assert!(top.iter().map(|m| (m - q).norm()).fold(f64::INFINITY, f64::min) <= spacing);
        }
    }

    /// Independent oracle: every cell of a face plane cut by axis planes at
    /// the given coordinates; radius of a w×h rectangle is min(w, h)/2.
    fn grid_cells_min_radius(xs: &[f64], ys: &[f64]) -> f64 {
        let mut best = f64::INFINITY;
        for w in xs.windows(2) {
            for v in ys.windows(2) {
                best = best.min(0.5 * (w[1] - w[0]).min(v[1] - v[0]));
            }
        }
        best
    }

    #[test]
    fn epsilon_min_of_cube() {
        let e = compute_epsilon_min(&unit_cube()).unwrap();
        assert!((e - grid_cells_min_radius(&[0.0, 1.0], &[0.0, 1.0])).abs() < 1e-12);
    }

    #[test]
    fn epsilon_min_two_far_cubes() {
        let s = Scene::new(vec![
            cuboid(Point3::origin(), Point3::new(1.0, 1.0, 1.0)),
            cuboid(Point3::new(0.0, 0.0, 10.0), Point3::new(1.0, 1.0, 11.0)),
        ]);
        let e = compute_epsilon_min(&s).unwrap();
        assert!((e - grid_cells_min_radius(&[0.0, 1.0], &[0.0, 1.0])).abs() < 1e-12);
    }

    #[test]
    fn epsilon_min_thin_cell() {
        let s = Scene::new(vec![
            cuboid(Point3::origin(), Point3::new(1.0, 1.0, 1.0)),
            cuboid(Point3::new(0.1, 3.0, 0.0), Point3::new(0.5, 4.0, 1.0)),
        ]);
        let e = compute_epsilon_min(&s).unwrap();
        let oracle = grid_cells_min_radius(&[0.0, 0.1, 0.5, 1.0], &[0.0, 1.0]);
        assert!(e <= 0.05 + 1e-12 && (e - oracle).abs() < 1e-12, "{e}");
    }

    #[test]
    fn vertex_records() {
        let d = place_vertices(&unit_cube(), true, false);
        assert_eq!(d.len(), 24);
        let mut pos = d.positions();
        pos.sort_by(|a, b| crate::geometry::cmp_point3(a, b, 1e-9));
        pos.dedup_by(|a, b| (*a - *b).norm() < 1e-9);
        assert_eq!(pos.len(), 8);
        assert_eq!(place_vertices(&unit_cube(), false, false).len(), 8);
    }

    #[test]
    fn square_vertices_clockwise() {
        let d = place_vertices_2d(&[Polygon2::rect(0., 0., 1., 1.)], true, true);
        let ring: Vec<Point2> = d.markers.values().map(|m| Point2::new(m.position().x, m.position().y)).collect();
        let idx: Vec<i64> = d.markers.values().map(|m| m.meta.order_index.unwrap()).collect();
        assert_eq!(idx, vec![0, 1, 2, 3]);
        assert!(ring::signed_area(&ring) < 0.0);
    }
}
