//! Reconstruction from dense point-plane markup through plane arrangements.

use super::vertex::assemble_components;
use crate::error::{Error, Result};
use crate::geometry::ring::Location;
use crate::geometry::{build_arrangement, canonicalize, BBox2, Face3, Line2, Plane3, Point2, Point3, Polyhedron, Scene};
use crate::markup::{MarkerData, MarkupDescription};
use crate::geometry::triangulate::triangulate;
use crate::geometry::{orient2, Polygon2};
use crate::placement::{compute_epsilon_min, plane_line};
use crate::tolerance;
use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;

/// Keeps every bounded arrangement cell of every marker plane that holds
/// one of its markers, then closes the kept cells into solids.
pub fn reconstruct_dense(d: &MarkupDescription) -> Result<Scene> {
    let tol = tolerance::geo();
    let mut planes: Vec<(Plane3, Vec<Point3>)> = Vec::new();
    let mut all = Vec::with_capacity(d.len());
    for (id, m) in d.iter() {
        let MarkerData::PointPlane { position, plane } = m.data else {
            return Err(Error::Unsupported(format!("marker {id} needs a bare plane")));
        };
        all.push(position);
        match planes.iter_mut().find(|(q, _)| q.same_set(&plane, tol * 10.0)) {
            Some((_, pts)) => pts.push(position),
            None => planes.push((plane.unoriented(), vec![position])),
        }
    }
    let Some((lo, hi)) = bbox3(&all) else { return Ok(Scene::default()) };
    let corners: Vec<Point3> = (0..8)
        .map(|k| Point3::new(if k & 1 == 0 { lo.x } else { hi.x }, if k & 2 == 0 { lo.y } else { hi.y }, if k & 4 == 0 { lo.z } else { hi.z }))
        .collect();
    let mut cells: Vec<Face3> = Vec::new();
    for (i, (pl, pts)) in planes.iter().enumerate() {
        let frame = pl.frame();
        let lines: Vec<Line2> = planes
            .iter()
            .enumerate()
            .filter(|(j, (q, _))| *j != i && !q.is_parallel(pl))
            .filter_map(|(_, (q, _))| plane_line(&frame, q))
            .collect();
        let local: Vec<Point2> = corners.iter().map(|c| frame.to_local(c)).collect();
        let bb = BBox2::of_points(&local).expect("eight corners").scaled(2.0, 1.0);
        let arr = build_arrangement(&lines, bb);
        let marks: Vec<Point2> = pts.iter().map(|p| frame.to_local(p)).collect();
        for (ri, region) in arr.regions.iter().enumerate() {
            if arr.touches_bbox(ri) || !marks.iter().any(|q| region.locate(q, tol) == Location::Inside) {
                continue;
            }
            cells.push(Face3::from_polygon(*pl, &frame, region));
        }
    }
    let mut scene = Scene::default();
    for comp in assemble_components(cells)? {
        let p = canonicalize(&Polyhedron::new(comp)).map_err(|e| Error::AssemblyFailed(e.to_string()))?;
        p.validate().map_err(|e| Error::AssemblyFailed(e.to_string()))?;
        scene.polyhedra.push(p);
    }
    scene.polyhedra.sort_by(|a, b| {
        let (ka, kb) = (a.bbox().map(|b| b.0), b.bbox().map(|b| b.0));
        ka.partial_cmp(&kb).unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(scene)
}

fn bbox3(pts: &[Point3]) -> Option<(Point3, Point3)> {
    let first = *pts.first()?;
    Some(pts.iter().fold((first, first), |(lo, hi), p| (lo.inf(p), hi.sup(p))))
}

/// Samples per face that must each lie within the scene's safe spacing of a marker.
pub const DENSITY_SAMPLES: usize = 10_000;

/// `true` when sampled points of every face lie within `compute_epsilon_min(s)` of a marker.
pub fn verify_density(d: &MarkupDescription, s: &Scene) -> bool {
    if s.face_count() == 0 {
        return true;
    }
    let Ok(eps) = compute_epsilon_min(s) else { return false };
    let grid = MarkerGrid::new(d, eps);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for f in s.polyhedra.iter().flat_map(|p| &p.faces) {
        let frame = f.frame();
        let poly = f.polygon_in(&frame);
        let Ok(samples) = uniform_samples(&poly, DENSITY_SAMPLES, &mut rng) else {
            return false;
        };
        if samples.iter().any(|q| !grid.any_within(&frame.to_world(q), eps)) {
            return false;
        }
    }
    true
}

/// Area-uniform points of a polygon, boundary included.
fn uniform_samples(poly: &Polygon2, count: usize, rng: &mut ChaCha8Rng) -> Result<Vec<Point2>> {
    let tris = triangulate(poly)?;
    let areas: Vec<f64> = tris.iter().map(|[a, b, c]| orient2(a, b, c).abs() * 0.5).collect();
    let pick = WeightedIndex::new(&areas).map_err(|_| Error::DegenerateRegion)?;
    Ok((0..count)
        .map(|_| {
            let [a, b, c] = tris[pick.sample(rng)];
            let (mut u, mut v): (f64, f64) = (rng.gen(), rng.gen());
            if u + v > 1.0 {
                (u, v) = (1.0 - u, 1.0 - v);
            }
            a + (b - a) * u + (c - a) * v
        })
        .collect())
}

/// Marker positions bucketed on a cubic grid of pitch `cell`.
struct MarkerGrid {
    cell: f64,
    buckets: HashMap<[i64; 3], Vec<Point3>>,
}

impl MarkerGrid {
    fn new(d: &MarkupDescription, cell: f64) -> Self {
        let mut buckets: HashMap<[i64; 3], Vec<Point3>> = HashMap::new();
        for p in d.positions() {
            buckets.entry(Self::key(&p, cell)).or_default().push(p);
        }
        Self { cell, buckets }
    }

    fn key(p: &Point3, cell: f64) -> [i64; 3] {
        [0, 1, 2].map(|a| (p[a] / cell).floor() as i64)
    }

    fn any_within(&self, p: &Point3, r: f64) -> bool {
        let k = Self::key(p, self.cell);
        let reach = (r / self.cell).ceil() as i64;
        for dx in -reach..=reach {
            for dy in -reach..=reach {
                for dz in -reach..=reach {
                    if let Some(b) = self.buckets.get(&[k[0] + dx, k[1] + dy, k[2] + dz]) {
                        if b.iter().any(|m| (m - p).norm() <= r) {
                            return true;
                        }
                    }
                }
            }
        }
        false
    }
}
