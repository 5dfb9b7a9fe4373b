//! Seeded random scenes for round-trip testing.
//!
//! Every generator is deterministic in its seed and retries internally
//! until the sample is well conditioned.

use crate::geometry::halfspace::intersect_halfspaces;
use crate::geometry::ring;
use crate::geometry::shapes::{cuboid, voxel_solid};
use crate::geometry::{canonicalize, HalfSpace3, Plane3, Point2, Point3, Polygon2, Polyhedron, Scene, Vector3};
use crate::markup::{FaceRef, RefOwner};
use crate::recon::elaboration::{apply_elaborations, BaseSolid, Depth, ElabKind, Elaboration, ElaborationTree};
use crate::tolerance;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn unit_vector(rng: &mut ChaCha8Rng) -> Vector3 {
    loop {
        let v = Vector3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let n = v.norm();
        if n > 0.1 && n <= 1.0 {
            return v / n;
        }
    }
}

/// Shortest edge over the longest, as a conditioning measure.
fn edge_ratio(p: &Polyhedron) -> f64 {
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for f in &p.faces {
        for r in f.rings() {
            for k in 0..r.len() {
                let l = (r[(k + 1) % r.len()] - r[k]).norm();
                lo = lo.min(l);
                hi = hi.max(l);
            }
        }
    }
    lo / hi
}

/// Convex polytope with exactly `faces` faces, circumscribed about the
/// sphere of `radius` at `center`: every plane touches the sphere, so none
/// is redundant.
pub fn random_convex(rng: &mut ChaCha8Rng, faces: usize, center: Point3, radius: f64) -> Polyhedron {
    assert!(faces >= 4, "a polytope needs at least four faces");
    loop {
        let hs: Vec<HalfSpace3> = (0..faces)
            .map(|_| {
                let n = unit_vector(rng);
                HalfSpace3::below(Plane3 { normal: n, offset: n.dot(&center.coords) + radius })
            })
            .collect();
        let Ok(p) = intersect_halfspaces(&hs) else { continue };
        let Ok(p) = canonicalize(&p) else { continue };
        // Far-away vertices come from nearly parallel planes.
        let far = p.vertices().iter().any(|v| (v - center).norm() > 6.0 * radius);
        if p.faces.len() == faces && !far && edge_ratio(&p) > 0.02 {
            return p;
        }
    }
}

/// `parts` convex solids with 4 to 12 faces each; they may intersect.
pub fn convex_scene(rng: &mut ChaCha8Rng, parts: usize) -> Scene {
    let polys = (0..parts)
        .map(|_| {
            let c = Point3::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let faces = rng.gen_range(4..=12);
            let r = rng.gen_range(0.5..1.5);
            random_convex(rng, faces, c, r)
        })
        .collect();
    Scene::new(polys)
}

/// Up to `max` closure-disjoint integer rectangles with corners in `[0, grid]`.
pub fn random_rect_set(rng: &mut ChaCha8Rng, max: usize, grid: i64) -> Vec<Polygon2> {
    let target = rng.gen_range(1..=max);
    let mut rects: Vec<[i64; 4]> = Vec::new();
    for _ in 0..target * 50 {
        if rects.len() == target {
            break;
        }
        let x0 = rng.gen_range(0..grid);
        let y0 = rng.gen_range(0..grid);
        let x1 = rng.gen_range(x0 + 1..=grid.min(x0 + grid / 2 + 1));
        let y1 = rng.gen_range(y0 + 1..=grid.min(y0 + grid / 2 + 1));
        // Closed rectangles must not meet.
        if rects.iter().all(|r| x1 < r[0] || r[2] < x0 || y1 < r[1] || r[3] < y0) {
            rects.push([x0, y0, x1, y1]);
        }
    }
    rects.iter().map(|r| Polygon2::rect(r[0] as f64, r[1] as f64, r[2] as f64, r[3] as f64)).collect()
}

fn components(cells: &BTreeSet<(usize, usize, usize)>) -> Vec<BTreeSet<(usize, usize, usize)>> {
    let mut left = cells.clone();
    let mut out = Vec::new();
    while let Some(&start) = left.iter().next() {
        let mut comp = BTreeSet::new();
        let mut stack = vec![start];
        left.remove(&start);
        while let Some((i, j, k)) = stack.pop() {
            comp.insert((i, j, k));
            let (i, j, k) = (i as i64, j as i64, k as i64);
            for (di, dj, dk) in [(1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1)] {
                let (a, b, c) = (i + di, j + dj, k + dk);
                if a < 0 || b < 0 || c < 0 {
                    continue;
                }
                let n = (a as usize, b as usize, c as usize);
                if left.remove(&n) {
                    stack.push(n);
                }
            }
        }
        out.push(comp);
    }
    out
}

/// Orthogonal scene from random unit cells on an `n³` grid; each kept
/// connected component becomes one polyhedron. Components that touch a
/// larger one or have non-manifold edges are dropped.
pub fn random_orthogonal_scene(rng: &mut ChaCha8Rng, n: usize) -> Scene {
    let g: Vec<f64> = (0..=n).map(|i| i as f64).collect();
    loop {
        let fill = rng.gen_range(0.25..0.6);
        let cells: BTreeSet<_> = (0..n)
            .flat_map(|i| (0..n).flat_map(move |j| (0..n).map(move |k| (i, j, k))))
            .filter(|_| rng.gen_bool(fill))
            .collect();
        if cells.is_empty() {
            continue;
        }
        let mut comps = components(&cells);
        comps.sort_by_key(|c| std::cmp::Reverse(c.len()));
        // Components must stay apart: cells of different kept components
        // may not share even a corner. Largest first; the rest are dropped.
        let near = |a: &(usize, usize, usize), b: &(usize, usize, usize)| a.0.abs_diff(b.0) <= 1 && a.1.abs_diff(b.1) <= 1 && a.2.abs_diff(b.2) <= 1;
        let mut kept: Vec<&BTreeSet<(usize, usize, usize)>> = Vec::new();
        let mut polys = Vec::new();
        for c in &comps {
            if kept.iter().any(|k| k.iter().any(|a| c.iter().any(|b| near(a, b)))) {
                continue;
            }
            let Ok(p) = voxel_solid(&g, &g, &g, |i, j, k| c.contains(&(i, j, k))) else { continue };
            if p.validate().is_ok() {
                kept.push(c);
                polys.push(p);
            }
        }
        if !polys.is_empty() {
            return Scene::new(polys);
        }
    }
}

/// Rectilinear polygon (possibly with holes) bounding a random polyomino
/// on an `n × n` grid, with at most `max_vertices` vertices.
pub fn random_rectilinear_polygon(rng: &mut ChaCha8Rng, n: usize, max_vertices: usize) -> Polygon2 {
    let g: Vec<f64> = (0..=n).map(|i| i as f64).collect();
    loop {
        let mut cells: BTreeSet<(usize, usize, usize)> = BTreeSet::new();
        cells.insert((rng.gen_range(0..n), rng.gen_range(0..n), 0));
        let target = rng.gen_range(1..=n * n * 2 / 3);
        while cells.len() < target {
            let &(i, j, _) = cells.iter().nth(rng.gen_range(0..cells.len())).expect("non-empty");
            let (di, dj) = *[(1i64, 0i64), (-1, 0), (0, 1), (0, -1)].choose(rng).expect("non-empty");
            let (a, b) = (i as i64 + di, j as i64 + dj);
            if a >= 0 && b >= 0 && (a as usize) < n && (b as usize) < n {
                cells.insert((a as usize, b as usize, 0));
            }
        }
        let Ok(p) = voxel_solid(&g, &g, &[0.0, 1.0], |i, j, k| cells.contains(&(i, j, k))) else { continue };
        let Some(bottom) = p.faces.iter().find(|f| f.plane.normal.z < -0.5) else { continue };
        let flat = |r: &Vec<Point3>| -> Vec<Point2> {
            let mut q: Vec<Point2> = r.iter().map(|v| Point2::new(v.x, v.y)).collect();
            q.reverse();
            q
        };
        let poly = Polygon2::new(flat(&bottom.outer), bottom.holes.iter().map(flat).collect());
        if poly.vertex_count() <= max_vertices {
            return poly;
        }
    }
}

/// Face of `p` whose outward normal is closest to `dir`.
fn face_towards(p: &Polyhedron, dir: &Vector3) -> usize {
    (0..p.faces.len()).max_by(|&a, &b| p.faces[a].plane.normal.dot(dir).total_cmp(&p.faces[b].plane.normal.dot(dir))).expect("solid has faces")
}

/// Random convex polygon inside the disc of `radius` around `center`.
fn convex_profile(rng: &mut ChaCha8Rng, center: Point2, radius: f64) -> Vec<Point2> {
    let k = rng.gen_range(3..=7);
    let mut angles: Vec<f64> = (0..k).map(|i| (i as f64 + rng.gen_range(0.1..0.9)) * std::f64::consts::TAU / k as f64).collect();
    angles.sort_by(f64::total_cmp);
    let r = radius * rng.gen_range(0.6..1.0);
    angles.iter().map(|a| center + nalgebra::Vector2::new(a.cos(), a.sin()) * r).collect()
}

/// L shape spanning the square of half-size `h` around `center`, rotated
/// by a quarter turn `quarter` times.
fn l_profile(rng: &mut ChaCha8Rng, center: Point2, h: f64) -> Vec<Point2> {
    let (a, b) = (rng.gen_range(-0.6..0.4), rng.gen_range(-0.6..0.4));
    let local = [(-1.0, -1.0), (1.0, -1.0), (1.0, a), (b, a), (b, 1.0), (-1.0, 1.0)];
    let quarter = rng.gen_range(0..4);
    local
        .iter()
        .map(|&(x, y)| {
            let (mut x, mut y): (f64, f64) = (x, y);
            for _ in 0..quarter {
                (x, y) = (-y, x);
            }
            center + nalgebra::Vector2::new(x, y) * h
        })
        .collect()
}

/// Clearance from `c` to the boundary of a convex ring.
fn clearance(ring: &[Point2], c: &Point2) -> f64 {
    ring::boundary_distance(c, ring)
}

/// Profile shapes for [`random_elaboration_tree`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileShape {
    Convex,
    Ell,
}

/// Elaboration tree with 1 to 3 levels over 1 or 2 convex bases. Level one
/// elaborates base faces; deeper levels elaborate the cap of an extrusion.
/// Extrusions grow inside the outer normal prism of their face, so they
/// never collide; intrusions are sized to stay inside the solid.
pub fn random_elaboration_tree(rng: &mut ChaCha8Rng, shape: ProfileShape) -> ElaborationTree {
    loop {
        let bases = rng.gen_range(1..=2);
        let roots: Vec<BaseSolid> = (0..bases)
            .map(|i| {
                let c = Point3::new(6.0 * i as f64, 0.0, 0.0);
                let faces = rng.gen_range(4..=10);
                BaseSolid { polyhedron_id: i as i64, solid: random_convex(rng, faces, c, 1.0) }
            })
            .collect();
        let levels = rng.gen_range(1..=3);
        let mut nodes: Vec<Elaboration> = Vec::new();
        let mut next_id = 0i64;
        for root in &roots {
            let solid = &root.solid;
            let fi = face_towards(solid, &unit_vector(rng));
            let face = &solid.faces[fi];
            let frame = face.frame();
            let poly = face.polygon_in(&frame);
            let c = ring::vertex_centroid(&poly.outer);
            let room = clearance(&poly.outer, &c);
            let mut base = FaceRef { owner: RefOwner::Polyhedron(root.polyhedron_id), face: fi as i64 };
            let mut size = room * 0.6;
            let mut height_room = f64::INFINITY;
            for level in 0..levels {
                let last = level + 1 == levels;
                let profile = match (shape, last) {
                    (ProfileShape::Ell, true) => l_profile(rng, c, size / std::f64::consts::SQRT_2),
                    _ => convex_profile(rng, c, size),
                };
                let intrude = last && rng.gen_bool(0.5);
                let depth = if intrude {
                    let d = rng.gen_range(0.1..0.3) * size;
                    if d >= height_room * 0.9 {
                        break;
                    }
                    d
                } else {
                    rng.gen_range(0.3..0.8) * size
                };
                next_id += 1;
                nodes.push(Elaboration {
                    id: next_id,
                    kind: if intrude { ElabKind::Intrusion } else { ElabKind::Extrusion },
                    base,
                    profile: Polygon2::simple(profile),
                    depth: Depth::Finite(depth),
                });
                base = FaceRef { owner: RefOwner::Elaboration(next_id), face: 0 };
                height_room = depth;
                size *= 0.5;
            }
        }
        let tree = ElaborationTree { roots, nodes };
        if tree.nodes.is_empty() || !intrusions_fit(&tree) {
            continue;
        }
        if let Ok(s) = apply_elaborations(&tree) {
            if s.validate().is_ok() {
                return tree;
            }
        }
    }
}

/// Intrusions into a base solid keep their floor inside it.
fn intrusions_fit(t: &ElaborationTree) -> bool {
    t.nodes.iter().filter(|e| e.kind == ElabKind::Intrusion).all(|e| {
        let RefOwner::Polyhedron(pid) = e.base.owner else { return true };
        let Some(root) = t.roots.iter().find(|r| r.polyhedron_id == pid) else { return false };
        let face = &root.solid.faces[e.base.face as usize];
        let frame = face.frame();
        let Depth::Finite(d) = e.depth else { return true };
        let margin = tolerance::geo() * 1e3;
        e.profile.outer.iter().all(|q| {
            let p = frame.to_world(q) - face.plane.normal * d;
            root.solid.faces.iter().all(|f| f.plane.signed_distance(&p) < -margin)
        })
    })
}

/// Box `[0, 3] × [0, 2] × [0, 1]` with `tunnels` disjoint square through
/// cuts in its top face.
pub fn tunnelled_box(tunnels: usize) -> ElaborationTree {
    let solid = cuboid(Point3::origin(), Point3::new(3.0, 2.0, 1.0));
    let top = face_towards(&solid, &Vector3::z());
    let frame = solid.faces[top].frame();
    let nodes = (0..tunnels)
        .map(|i| {
            let x0 = 0.25 + i as f64 * 2.75 / tunnels as f64;
            let w = 2.75 / tunnels as f64 - 0.25;
            let mut q: Vec<Point2> = [(x0, 0.5), (x0 + w, 0.5), (x0 + w, 1.5), (x0, 1.5)]
                .iter()
                .map(|&(x, y)| frame.to_local(&Point3::new(x, y, 1.0)))
                .collect();
            if ring::signed_area(&q) < 0.0 {
                q.reverse();
            }
            Elaboration {
                id: i as i64 + 1,
                kind: ElabKind::Intrusion,
                base: FaceRef { owner: RefOwner::Polyhedron(0), face: top as i64 },
                profile: Polygon2::simple(q),
                depth: Depth::Through,
            }
        })
        .collect();
    ElaborationTree { roots: vec![BaseSolid { polyhedron_id: 0, solid }], nodes }
}

/// Random box with up to `max` disjoint axis-aligned rectangular
/// intrusions (finite depth) in one face.
pub fn random_box_intrusions(rng: &mut ChaCha8Rng, max: usize) -> ElaborationTree {
    let size = Vector3::new(rng.gen_range(2.0..4.0), rng.gen_range(2.0..4.0), rng.gen_range(1.0..3.0));
    let solid = cuboid(Point3::origin(), Point3::from(size));
    let axis = rng.gen_range(0..3);
    let mut dir = Vector3::zeros();
    dir[axis] = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    let fi = face_towards(&solid, &dir);
    let face = &solid.faces[fi];
    let frame = face.frame();
    let (iu, iv) = ((axis + 1) % 3, (axis + 2) % 3);
    let plane_at = if dir[axis] > 0.0 { size[axis] } else { 0.0 };
    // Integer lattice of pitch `size / 8` on the face keeps rectangles apart.
    let (su, sv) = (size[iu] / 8.0, size[iv] / 8.0);
    let count = rng.gen_range(0..=max);
    let mut taken: Vec<[i64; 4]> = Vec::new();
    for _ in 0..count * 40 {
        if taken.len() == count {
            break;
        }
        let u0 = rng.gen_range(1..7);
        let v0 = rng.gen_range(1..7);
        let u1 = rng.gen_range(u0 + 1..=7.min(u0 + 3));
        let v1 = rng.gen_range(v0 + 1..=7.min(v0 + 3));
        if taken.iter().all(|r| u1 < r[0] || r[2] < u0 || v1 < r[1] || r[3] < v0) {
            taken.push([u0, v0, u1, v1]);
        }
    }
    let nodes = taken
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut q: Vec<Point2> = [(r[0], r[1]), (r[2], r[1]), (r[2], r[3]), (r[0], r[3])]
                .iter()
                .map(|&(u, v)| {
                    let mut p = Point3::origin();
                    p[axis] = plane_at;
                    p[iu] = u as f64 * su;
                    p[iv] = v as f64 * sv;
                    frame.to_local(&p)
                })
                .collect();
            if ring::signed_area(&q) < 0.0 {
                q.reverse();
            }
            let depth = size[axis] * rng.gen_range(1..=7) as f64 / 8.0;
            Elaboration {
                id: i as i64 + 1,
                kind: ElabKind::Intrusion,
                base: FaceRef { owner: RefOwner::Polyhedron(0), face: fi as i64 },
                profile: Polygon2::simple(q),
                depth: Depth::Finite(depth),
            }
        })
        .collect();
    ElaborationTree { roots: vec![BaseSolid { polyhedron_id: 0, solid }], nodes }
}

pub fn unit_cube() -> Scene {
    Scene::single(cuboid(Point3::origin(), Point3::new(1.0, 1.0, 1.0)))
}

/// Prism over an L-shaped footprint of 3 unit squares.
pub fn l_prism() -> Scene {
    let l = Polygon2::simple(
        [(0.0, 0.0), (2.0, 0.0), (2.0, 1.0), (1.0, 1.0), (1.0, 2.0), (0.0, 2.0)].iter().map(|&(x, y)| Point2::new(x, y)).collect(),
    );
    let p = crate::geometry::shapes::prism_z(&l, 0.0, 1.0);
    Scene::single(canonicalize(&p).unwrap_or(p))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn convex_generator_hits_the_face_count() {
        let mut r = rng(1);
        for faces in [4, 9, 30] {
            let p = random_convex(&mut r, faces, Point3::origin(), 1.0);
            assert_eq!(p.faces.len(), faces);
            assert!(p.is_convex());
            assert_eq!(p.validate().unwrap(), 0);
        }
    }

    #[test]
    fn rect_sets_are_closure_disjoint() {
        let mut r = rng(2);
        for _ in 0..50 {
            let rs = random_rect_set(&mut r, 12, 16);
            for (i, a) in rs.iter().enumerate() {
                for b in &rs[i + 1..] {
                    let ((a0, a1), (b0, b1)) = (a.bbox(), b.bbox());
                    assert!(a1.x < b0.x || b1.x < a0.x || a1.y < b0.y || b1.y < a0.y);
                }
            }
        }
    }

    #[test]
    fn generated_trees_build() {
        let mut r = rng(3);
        for shape in [ProfileShape::Convex, ProfileShape::Ell] {
            for _ in 0..5 {
                let t = random_elaboration_tree(&mut r, shape);
                apply_elaborations(&t).unwrap().validate().unwrap();
            }
        }
        let s = apply_elaborations(&tunnelled_box(2)).unwrap();
        assert_eq!(s.polyhedra[0].genus().unwrap(), 2);
    }

    #[test]
    fn orthogonal_scenes_and_polygons_are_valid() {
        let mut r = rng(4);
        for _ in 0..5 {
            let s = random_orthogonal_scene(&mut r, 3);
            assert!(s.is_orthogonal());
            let p = random_rectilinear_polygon(&mut r, 6, 100);
            assert!(p.area() >= 1.0 - 1e-12);
        }
    }
}
