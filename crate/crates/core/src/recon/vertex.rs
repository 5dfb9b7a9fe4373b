//! Polygons and polyhedra from their vertices, with or without face metadata.

use crate::error::{Error, Result};
use crate::geometry::ring::{self, Location};
use crate::geometry::{cmp_point2, Face3, Plane3, Point2, Point3, Polygon2, Polyhedron, Scene, Vector3};
use crate::markup::MarkupDescription;
use crate::tolerance;
use std::collections::{BTreeMap, VecDeque};

/// One (vertex, face) incidence. Records without a face id describe bare vertices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VertexRecord {
    pub position: Point3,
    pub polyhedron_id: Option<i64>,
    pub face_id: Option<i64>,
    /// Clockwise position on the face boundary seen from outside; a skipped
    /// value starts the next ring of the same face.
    pub order_index: Option<i64>,
}

pub fn records_from_markup(d: &MarkupDescription) -> Vec<VertexRecord> {
    d.iter()
        .map(|(_, m)| VertexRecord {
            position: m.position(),
            polyhedron_id: m.meta.polyhedron_id,
            face_id: m.meta.face_id,
            order_index: if m.meta.face_id.is_some() { m.meta.order_index } else { None },
        })
        .collect()
}

/// Pairs consecutive entries of every line; `key` picks the line and `along` sorts it.
fn pair_lines<K: Ord>(n: usize, key: impl Fn(usize) -> K, along: impl Fn(usize) -> f64, odd: Error) -> Result<Vec<usize>> {
    let mut lines: BTreeMap<K, Vec<usize>> = BTreeMap::new();
    for i in 0..n {
        lines.entry(key(i)).or_default().push(i);
    }
    let mut partner = vec![usize::MAX; n];
    for mut l in lines.into_values() {
        if l.len() % 2 == 1 {
            return Err(odd);
        }
        l.sort_by(|&a, &b| along(a).total_cmp(&along(b)));
        for p in l.chunks(2) {
            partner[p[0]] = p[1];
            partner[p[1]] = p[0];
        }
    }
    Ok(partner)
}

/// Orthogonal polygons from their vertex set: the first vertex of every row
/// and column joins the second, the third the fourth, and so on.
pub fn connect_dots_2d(vertices: &[Point2]) -> Result<Vec<Polygon2>> {
    let n = vertices.len();
    let k = |i: usize| (tolerance::snap_key(vertices[i].x), tolerance::snap_key(vertices[i].y));
    let mut seen: Vec<(i64, i64)> = (0..n).map(k).collect();
    seen.sort_unstable();
    if seen.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::NonManifold);
    }
    let horiz = pair_lines(n, |i| k(i).1, |i| vertices[i].x, Error::OddRowCount)?;
    let vert = pair_lines(n, |i| k(i).0, |i| vertices[i].y, Error::OddColumnCount)?;
    // Segments may only meet at shared endpoints.
    for i in (0..n).filter(|&i| horiz[i] > i) {
        let (a, b) = (vertices[i], vertices[horiz[i]]);
        for j in (0..n).filter(|&j| vert[j] > j) {
            let (c, d) = (vertices[j], vertices[vert[j]]);
            let (x0, x1) = (a.x.min(b.x), a.x.max(b.x));
            let (y0, y1) = (c.y.min(d.y), c.y.max(d.y));
            if c.x > x0 && c.x < x1 && a.y > y0 && a.y < y1 {
                return Err(Error::NonManifold);
            }
        }
    }
    let mut visited = vec![false; n];
    let mut rings: Vec<Vec<Point2>> = Vec::new();
    for s in 0..n {
        if visited[s] {
            continue;
        }
        let mut r = Vec::new();
        let (mut v, mut horizontal) = (s, true);
        loop {
            visited[v] = true;
            r.push(vertices[v]);
            v = if horizontal { horiz[v] } else { vert[v] };
            horizontal = !horizontal;
            if v == s {
                break;
            }
            if visited[v] {
                return Err(Error::NonManifold);
            }
        }
        rings.push(r);
    }
    Ok(nest_rings(rings))
}

/// Assigns rings by containment parity: even depth bounds a polygon, odd
/// depth a hole of its innermost container.
fn nest_rings(rings: Vec<Vec<Point2>>) -> Vec<Polygon2> {
    let m = rings.len();
    let inside = |i: usize, j: usize| i != j && ring::locate(&rings[i][0], &rings[j], 0.0) == Location::Inside;
    let depth: Vec<usize> = (0..m).map(|i| (0..m).filter(|&j| inside(i, j)).count()).collect();
    let mut polys: BTreeMap<usize, (Vec<Point2>, Vec<Vec<Point2>>)> = BTreeMap::new();
    for i in (0..m).filter(|&i| depth[i] % 2 == 0) {
        polys.insert(i, (rings[i].clone(), Vec::new()));
    }
    for i in (0..m).filter(|&i| depth[i] % 2 == 1) {
        let parent = (0..m).filter(|&j| inside(i, j) && depth[j] + 1 == depth[i]).next().expect("odd depth has a container");
        polys.get_mut(&parent).expect("parent has even depth").1.push(rings[i].clone());
    }
    let tol = tolerance::geo();
    let mut out: Vec<Polygon2> = polys
        .into_values()
        .map(|(o, hs)| {
            let mut p = Polygon2::new(o, hs);
            for r in std::iter::once(&mut p.outer).chain(p.holes.iter_mut()) {
                ring::rotate_to_min(r, tol);
            }
            p.holes.sort_by(|a, b| cmp_point2(&a[0], &b[0], tol));
            p
        })
        .collect();
    out.sort_by(|a, b| cmp_point2(&a.outer[0], &b.outer[0], tol));
    out
}

fn unit(a: usize, sign: f64) -> Vector3 {
    let mut v = Vector3::zeros();
    v[a] = sign;
    v
}

/// Orthogonal polyhedron from its vertex set. Lines parallel to an axis are
/// paired as in the planar case; every axis plane through a vertex is then
/// traced in two dimensions, and faces take the side the solid lies behind.
pub fn connect_dots_3d(vertices: &[Point3]) -> Result<Polyhedron> {
    let n = vertices.len();
    let keys: Vec<[i64; 3]> = vertices.iter().map(|p| [0, 1, 2].map(|a| tolerance::snap_key(p[a]))).collect();
    let mut sorted = keys.clone();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::FaceAssemblyFailed("repeated vertex".into()));
    }
    for a in 0..3 {
        let (b, c) = ((a + 1) % 3, (a + 2) % 3);
        pair_lines(n, |i| (keys[i][b], keys[i][c]), |i| vertices[i][a], Error::OddLineCount)?;
    }
    // Face regions of every axis plane, as (axis, coordinate, polygon in the next two axes).
    let mut regions: Vec<(usize, f64, Polygon2)> = Vec::new();
    for a in 0..3 {
        let (b, c) = ((a + 1) % 3, (a + 2) % 3);
        let mut planes: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
        for i in 0..n {
            planes.entry(keys[i][a]).or_default().push(i);
        }
        for ids in planes.into_values() {
            let coord = ids.iter().map(|&i| vertices[i][a]).sum::<f64>() / ids.len() as f64;
            let trace: Vec<Point2> = ids.iter().map(|&i| Point2::new(vertices[i][b], vertices[i][c])).collect();
            let polys = connect_dots_2d(&trace).map_err(|e| Error::FaceAssemblyFailed(format!("plane x{a} = {coord}: {e}")))?;
            regions.extend(polys.into_iter().map(|p| (a, coord, p)));
        }
    }
    let tol = tolerance::geo();
    let mut faces = Vec::with_capacity(regions.len());
    for (ri, (a, coord, poly)) in regions.iter().enumerate() {
        let q = probe_point(poly, regions.iter().filter(|r| r.0 == *a).map(|r| &r.2), tol)
            .ok_or_else(|| Error::FaceAssemblyFailed(format!("face {ri} has no clear interior point")))?;
        // Parity of the faces crossed on the way out along +axis.
        let above = regions.iter().filter(|r| r.0 == *a && r.1 > coord + tol && r.2.locate(&q, 0.0) == Location::Inside).count();
        let sign = if above % 2 == 1 { -1.0 } else { 1.0 };
        let (b, c) = ((a + 1) % 3, (a + 2) % 3);
        let lift = |r: &Vec<Point2>| {
            let mut pts: Vec<Point3> = r
                .iter()
                .map(|p| {
                    let mut x = Point3::origin();
                    x[*a] = *coord;
                    x[b] = p.x;
                    x[c] = p.y;
                    x
                })
                .collect();
            if sign < 0.0 {
                pts.reverse();
            }
            pts
        };
        let plane = Plane3 { normal: unit(*a, sign), offset: sign * coord };
        faces.push(Face3::new(plane, lift(&poly.outer), poly.holes.iter().map(lift).collect()));
    }
    let p = Polyhedron::new(faces);
    p.validate().map_err(|e| Error::FaceAssemblyFailed(e.to_string()))?;
    Ok(p)
}

/// A point inside `poly` that lies on no boundary of the other regions.
fn probe_point<'a>(poly: &Polygon2, others: impl Iterator<Item = &'a Polygon2> + Clone, tol: f64) -> Option<Point2> {
    let base = poly.interior_point(1e-3 * poly.diameter())?;
    let step = 1e-4 * poly.diameter();
    (0..64).map(|k| base + nalgebra::Vector2::new(0.618_034, 0.381_966) * (k as f64 * step)).find(|q| {
        poly.locate(q, tol) == Location::Inside && others.clone().all(|o| o.locate(q, tol) != Location::Boundary)
    })
}

fn flip(f: &mut Face3) {
    f.plane = f.plane.flipped();
    f.outer.reverse();
    for h in &mut f.holes {
        h.reverse();
    }
}

/// Orients faces consistently across shared edges, then outward per
/// connected component, and validates the result.
fn assemble(faces: Vec<Face3>) -> Result<Polyhedron> {
    let p = Polyhedron::new(assemble_components(faces)?.into_iter().flatten().collect());
    p.validate().map_err(|e| Error::AssemblyFailed(e.to_string()))?;
    Ok(p)
}

/// Face sets of the edge-connected components, each oriented outward.
pub(crate) fn assemble_components(faces: Vec<Face3>) -> Result<Vec<Vec<Face3>>> {
    let mut p = Polyhedron::new(faces);
    let topo = p.topology();
    let mut uses: BTreeMap<(usize, usize), Vec<(usize, bool)>> = BTreeMap::new();
    for (&(u, v), fs) in &topo.directed {
        for &f in fs {
            uses.entry((u.min(v), u.max(v))).or_default().push((f, u < v));
        }
    }
    let nf = p.faces.len();
    let mut adj: Vec<Vec<(usize, bool)>> = vec![Vec::new(); nf];
    for (e, us) in &uses {
        let [(f, df), (g, dg)] = us[..] else {
            return Err(Error::AssemblyFailed(format!("edge {e:?} bounds {} faces", us.len())));
        };
        // Same direction on both sides means exactly one of them must turn.
        adj[f].push((g, df == dg));
        adj[g].push((f, df == dg));
    }
    let mut turn: Vec<Option<bool>> = vec![None; nf];
    let mut comps = Vec::new();
    for s in 0..nf {
        if turn[s].is_some() {
            continue;
        }
        turn[s] = Some(false);
        let mut comp = vec![s];
        let mut queue = VecDeque::from([s]);
        while let Some(f) = queue.pop_front() {
            for &(g, differ) in &adj[f] {
                let want = turn[f].unwrap() ^ differ;
                match turn[g] {
                    None => {
                        turn[g] = Some(want);
                        comp.push(g);
                        queue.push_back(g);
                    }
                    Some(t) if t != want => return Err(Error::AssemblyFailed("faces admit no consistent orientation".into())),
                    _ => {}
                }
            }
        }
        for &f in &comp {
            if turn[f] == Some(true) {
                flip(&mut p.faces[f]);
            }
        }
        let volume: f64 = comp.iter().map(|&f| p.faces[f].plane.offset * p.faces[f].area()).sum();
        if volume < 0.0 {
            for &f in &comp {
                flip(&mut p.faces[f]);
            }
        }
        comps.push(comp);
    }
    Ok(comps.into_iter().map(|c| c.into_iter().map(|f| p.faces[f].clone()).collect()).collect())
}

type FaceGroups = BTreeMap<i64, BTreeMap<i64, Vec<VertexRecord>>>;

fn face_groups(records: &[VertexRecord]) -> Result<FaceGroups> {
    let mut g: FaceGroups = BTreeMap::new();
    for (i, r) in records.iter().enumerate() {
        let f = r.face_id.ok_or(Error::MissingKey(i as u64))?;
        g.entry(r.polyhedron_id.unwrap_or(0)).or_default().entry(f).or_default().push(*r);
    }
    Ok(g)
}

/// Plane through the points, oriented arbitrarily; fails unless all lie on it.
fn fit_plane(pts: &[Point3], face_id: i64) -> Result<Plane3> {
    let tol = tolerance::geo() * 10.0;
    let p0 = pts[0];
    let p1 = *pts.iter().max_by(|a, b| (*a - p0).norm().total_cmp(&(*b - p0).norm())).ok_or(Error::NonPlanarFaceGroup(face_id))?;
    let area = |q: &Point3| (p1 - p0).cross(&(q - p0)).norm();
    let p2 = *pts.iter().max_by(|a, b| area(a).total_cmp(&area(b))).expect("nonempty");
    let plane = Plane3::from_points(&p0, &p1, &p2).map_err(|_| Error::NonPlanarFaceGroup(face_id))?;
    let scale = 1.0 + (p1 - p0).norm();
    if pts.iter().any(|p| plane.signed_distance(p).abs() > tol * scale) {
        return Err(Error::NonPlanarFaceGroup(face_id));
    }
    Ok(plane)
}

/// Convex faces: each face is the planar hull of its marked vertices.
pub fn faces_from_hulls(records: &[VertexRecord]) -> Result<Scene> {
    let tol = tolerance::geo();
    let mut scene = Scene::default();
    for (pid, faces) in face_groups(records)? {
        let mut out = Vec::new();
        for (fid, rs) in faces {
            let pts: Vec<Point3> = rs.iter().map(|r| r.position).collect();
            let plane = fit_plane(&pts, fid).map_err(|e| e.in_group(pid))?;
            let frame = plane.frame();
            let hull = ring::convex_hull(&pts.iter().map(|p| frame.to_local(p)).collect::<Vec<_>>(), tol);
            if hull.len() < 3 {
                return Err(Error::NonPlanarFaceGroup(fid).in_group(pid));
            }
            out.push(Face3::new(plane, hull.iter().map(|q| plane.project(&frame.to_world(q))).collect(), vec![]));
        }
        scene.polyhedra.push(assemble(out).map_err(|e| e.in_group(pid))?);
    }
    Ok(scene)
}

/// Faces traced through their vertices in the recorded clockwise order.
pub fn faces_from_ordered(records: &[VertexRecord]) -> Result<Scene> {
    let tol = tolerance::geo();
    let mut scene = Scene::default();
    for (pid, faces) in face_groups(records)? {
        let mut out = Vec::new();
        for (fid, mut rs) in faces {
            for (i, r) in rs.iter().enumerate() {
                if r.order_index.is_none() {
                    return Err(Error::MissingKey(i as u64).in_group(pid));
                }
            }
            rs.sort_by_key(|r| r.order_index);
            let mut rings: Vec<Vec<Point3>> = vec![vec![rs[0].position]];
            for w in rs.windows(2) {
                if w[1].order_index.unwrap() > w[0].order_index.unwrap() + 1 {
                    rings.push(Vec::new());
                }
                rings.last_mut().expect("nonempty").push(w[1].position);
            }
            let pts: Vec<Point3> = rs.iter().map(|r| r.position).collect();
            fit_plane(&pts, fid).map_err(|e| e.in_group(pid))?;
            // Clockwise from outside: reversed, the outer ring is counterclockwise.
            for r in &mut rings {
                r.reverse();
            }
            let outer = rings.remove(0);
            let face = Face3::from_ring(outer).map_err(|_| Error::SelfIntersectingBoundary(fid).in_group(pid))?;
            let face = Face3::new(face.plane, face.outer, rings);
            let frame = face.frame();
            if face.rings().any(|r| r.len() < 3 || !ring::is_simple(&r.iter().map(|p| frame.to_local(p)).collect::<Vec<_>>(), tol)) {
                return Err(Error::SelfIntersectingBoundary(fid).in_group(pid));
            }
            out.push(face);
        }
        scene.polyhedra.push(assemble(out).map_err(|e| e.in_group(pid))?);
    }
    Ok(scene)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::shapes::{cuboid, prism_z};
    use crate::geometry::{intersect_halfspaces, scenes_equal, HalfSpace3};
    use crate::placement::place_vertices;

    fn pts(v: &[(f64, f64)]) -> Vec<Point2> {
        v.iter().map(|&(x, y)| Point2::new(x, y)).collect()
    }

    /// Undirected segments of a polygon set, as sorted endpoint pairs.
    fn segments(polys: &[Polygon2]) -> Vec<[(i64, i64); 2]> {
        let k = |p: &Point2| (tolerance::snap_key(p.x), tolerance::snap_key(p.y));
        let mut s: Vec<[(i64, i64); 2]> = polys
            .iter()
            .flat_map(|p| p.rings())
            .flat_map(|r| (0..r.len()).map(move |i| (r[i], r[(i + 1) % r.len()])))
            .map(|(a, b)| {
                let mut e = [k(&a), k(&b)];
                e.sort();
                e
            })
            .collect();
        s.sort();
        s
    }

    const ELL: [(f64, f64); 6] = [(0.0, 0.0), (2.0, 0.0), (2.0, 1.0), (1.0, 1.0), (1.0, 2.0), (0.0, 2.0)];

    #[test]
    fn square_and_ell() {
        let sq = connect_dots_2d(&pts(&[(1.0, 1.0), (0.0, 0.0), (0.0, 1.0), (1.0, 0.0)])).unwrap();
        assert_eq!(sq, vec![Polygon2::rect(0.0, 0.0, 1.0, 1.0)]);
        let ell = connect_dots_2d(&pts(&ELL)).unwrap();
        // Hand-drawn edges of the L.
        let want = segments(&[Polygon2::simple(pts(&ELL))]);
        assert_eq!(segments(&ell), want);
        assert_eq!(ell.len(), 1);
        assert!((ell[0].area() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn frame_with_hole_nests() {
        let mut v = pts(&[(0.0, 0.0), (3.0, 0.0), (3.0, 3.0), (0.0, 3.0)]);
        v.extend(pts(&[(1.0, 1.0), (2.0, 1.0), (2.0, 2.0), (1.0, 2.0)]));
        let p = connect_dots_2d(&v).unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!(p[0].holes.len(), 1);
        assert!((p[0].area() - 8.0).abs() < 1e-12);
    }

    #[test]
    fn odd_rows_and_crossings() {
        assert_eq!(connect_dots_2d(&pts(&[(0.0, 0.0), (1.0, 0.0), (2.0, 0.0)])), Err(Error::OddRowCount));
        assert_eq!(connect_dots_2d(&pts(&[(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (2.0, 1.0)])), Err(Error::OddColumnCount));
        // A plus-shaped pairing crosses itself.
        let plus = pts(&[(0.0, 1.0), (3.0, 1.0), (1.0, 0.0), (1.0, 3.0), (0.0, 2.0), (3.0, 2.0), (2.0, 0.0), (2.0, 3.0)]);
        assert!(connect_dots_2d(&plus).is_err());
    }

    fn ell_prism() -> Polyhedron {
        prism_z(&Polygon2::simple(pts(&ELL)), 0.0, 1.0)
    }

    fn vertices_of(p: &Polyhedron) -> Vec<Point3> {
        records_from_markup(&place_vertices(&Scene::single(p.clone()), false, false)).iter().map(|r| r.position).collect()
    }

    #[test]
    fn cube_and_ell_prism_in_space() {
        for p in [cuboid(Point3::origin(), Point3::new(1.0, 2.0, 3.0)), ell_prism()] {
            let v = vertices_of(&p);
            let r = connect_dots_3d(&v).unwrap();
            assert!(scenes_equal(&Scene::single(p), &Scene::single(r), 1e-9));
        }
        assert_eq!(vertices_of(&ell_prism()).len(), 12);
    }

    #[test]
    fn brick_across_brick_rejected() {
        // A 3x1x1 bar along x with a 1x3x1 bar along y laid across its top.
        let union = crate::geometry::shapes::voxel_solid(&[0.0, 1.0, 2.0, 3.0], &[0.0, 1.0, 2.0, 3.0], &[0.0, 1.0, 2.0], |i, j, k| {
            (k == 0 && j == 1) || (k == 1 && i == 1)
        })
        .unwrap();
        assert!((union.volume() - 6.0).abs() < 1e-12);
        let err = connect_dots_3d(&vertices_of(&union)).unwrap_err();
        assert!(matches!(err, Error::OddLineCount | Error::FaceAssemblyFailed(_)), "{err:?}");
    }

    fn octahedron() -> Polyhedron {
        let mut hs = Vec::new();
        for sx in [-1.0, 1.0] {
            for sy in [-1.0, 1.0] {
                for sz in [-1.0, 1.0] {
                    hs.push(HalfSpace3::below(Plane3::new(Vector3::new(sx, sy, sz), 1.0).unwrap()));
                }
            }
        }
        intersect_halfspaces(&hs).unwrap()
    }

    #[test]
    fn hulls_and_orders_agree_on_convex_faces() {
        for p in [cuboid(Point3::origin(), Point3::new(1.0, 1.0, 1.0)), octahedron()] {
            let s = Scene::single(p);
            let recs = records_from_markup(&place_vertices(&s, true, true));
            let h = faces_from_hulls(&recs).unwrap();
            let o = faces_from_ordered(&recs).unwrap();
            assert!(scenes_equal(&s, &h, 1e-9) && scenes_equal(&h, &o, 1e-9));
        }
        assert_eq!(records_from_markup(&place_vertices(&Scene::single(cuboid(Point3::origin(), Point3::new(1.0, 1.0, 1.0))), true, false)).len(), 24);
    }

    #[test]
    fn ordered_handles_nonconvex_and_holes() {
        let s = Scene::single(ell_prism());
        let recs = records_from_markup(&place_vertices(&s, true, true));
        assert!(scenes_equal(&s, &faces_from_ordered(&recs).unwrap(), 1e-9));
        assert!(!faces_from_hulls(&recs).is_ok_and(|h| scenes_equal(&s, &h, 1e-9)));
        let frame = crate::geometry::shapes::voxel_solid(&[0.0, 1.0, 2.0, 3.0], &[0.0, 1.0, 2.0, 3.0], &[0.0, 1.0], |i, j, _| !(i == 1 && j == 1)).unwrap();
        let s = Scene::single(frame);
        let r = faces_from_ordered(&records_from_markup(&place_vertices(&s, true, true))).unwrap();
        assert!(scenes_equal(&s, &r, 1e-9));
        assert_eq!(r.polyhedra[0].genus().unwrap(), 1);
    }

    #[test]
    fn bad_groups_rejected() {
        let rec = |x: f64, y: f64, z: f64, o: i64| VertexRecord { position: Point3::new(x, y, z), polyhedron_id: None, face_id: Some(0), order_index: Some(o) };
        let bent = [rec(0.0, 0.0, 0.0, 0), rec(1.0, 0.0, 0.0, 1), rec(1.0, 1.0, 0.0, 2), rec(0.0, 1.0, 0.5, 3)];
        assert_eq!(faces_from_hulls(&bent).unwrap_err().root(), &Error::NonPlanarFaceGroup(0));
        let bowtie = [rec(0.0, 0.0, 0.0, 0), rec(1.0, 1.0, 0.0, 1), rec(1.0, 0.0, 0.0, 2), rec(0.0, 1.0, 0.0, 3)];
        assert_eq!(faces_from_ordered(&bowtie).unwrap_err().root(), &Error::SelfIntersectingBoundary(0));
    }
}
