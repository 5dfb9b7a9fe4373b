//! Test-side geometry checks written without the library's comparison code.
#![allow(dead_code)]

use polyrecon::geometry::{Point3, Polyhedron, Scene, Vector3};

/// Enclosed volume as a sum of signed cones from the origin over every face ring.
pub fn volume(p: &Polyhedron) -> f64 {
    let mut v = 0.0;
    for f in &p.faces {
        for ring in std::iter::once(&f.outer).chain(f.holes.iter()) {
            let mut area = Vector3::zeros();
            for i in 0..ring.len() {
                area += ring[i].coords.cross(&ring[(i + 1) % ring.len()].coords);
            }
            v += area.dot(&ring[0].coords) / 6.0;
        }
    }
    v
}

pub fn corners(p: &Polyhedron) -> Vec<Point3> {
    let mut out: Vec<Point3> = Vec::new();
    for f in &p.faces {
        for ring in std::iter::once(&f.outer).chain(f.holes.iter()) {
            for q in ring {
                if !out.iter().any(|o| (o - q).norm() <= 1e-9) {
                    out.push(*q);
                }
            }
        }
    }
    out
}

/// Same corner set, face count and volume.
pub fn same_solid(a: &Polyhedron, b: &Polyhedron, tol: f64) -> bool {
    let (ca, cb) = (corners(a), corners(b));
    ca.len() == cb.len()
        && a.faces.len() == b.faces.len()
        && ca.iter().all(|p| cb.iter().any(|q| (p - q).norm() <= tol))
        && (volume(a) - volume(b)).abs() <= tol * volume(a).abs().max(1.0)
}

/// Parts match one to one under `same_solid`.
pub fn same_scene(a: &Scene, b: &Scene, tol: f64) -> bool {
    if a.polyhedra.len() != b.polyhedra.len() {
        return false;
    }
    let mut used = vec![false; b.polyhedra.len()];
    a.polyhedra.iter().all(|p| {
        let hit = (0..b.polyhedra.len()).find(|&j| !used[j] && same_solid(p, &b.polyhedra[j], tol));
        hit.map(|j| used[j] = true).is_some()
    })
}

/// Axis-aligned extent `[x0, y0, x1, y1]` of every part, sorted.
pub fn footprint_boxes(s: &Scene) -> Vec<[f64; 4]> {
    let mut out: Vec<[f64; 4]> = s
        .polyhedra
        .iter()
        .map(|p| {
            let c = corners(p);
            let f = |g: fn(&Point3) -> f64, pick: fn(f64, f64) -> f64, init: f64| c.iter().map(g).fold(init, pick);
            [f(|q| q.x, f64::min, f64::INFINITY), f(|q| q.y, f64::min, f64::INFINITY), f(|q| q.x, f64::max, f64::NEG_INFINITY), f(|q| q.y, f64::max, f64::NEG_INFINITY)]
        })
        .collect();
    out.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    out
}
