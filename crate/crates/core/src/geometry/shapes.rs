//! Builders for common solids.

use super::canonical::canonicalize;
use super::plane::{Frame3, Plane3};
use super::polygon::Polygon2;
use super::polyhedron::{Face3, Polyhedron};
use super::{Point2, Point3, Vector3};
use crate::error::Result;

/// Axis-aligned box between two corners.
pub fn cuboid(lo: Point3, hi: Point3) -> Polyhedron {
    let frame = Frame3 { origin: Point3::new(0.0, 0.0, lo.z), u: Vector3::x(), v: Vector3::y(), normal: Vector3::z() };
    prism(&Polygon2::rect(lo.x, lo.y, hi.x, hi.y), &frame, 0.0, hi.z - lo.z)
}

/// Extrudes `base` (in `frame` coordinates) between heights `h0 < h1` along the frame normal.
pub fn prism(base: &Polygon2, frame: &Frame3, h0: f64, h1: f64) -> Polyhedron {
    let lift = |q: &Point2, h: f64| frame.to_world(q) + frame.normal * h;
    let mut faces = Vec::new();
    let n = frame.normal;
    let bottom = Plane3 { normal: -n, offset: -(n.dot(&frame.origin.coords) + h0) };
    let top = Plane3 { normal: n, offset: n.dot(&frame.origin.coords) + h1 };
    let rev = |r: &Vec<Point2>, h: f64| r.iter().rev().map(|q| lift(q, h)).collect::<Vec<_>>();
    let fwd = |r: &Vec<Point2>, h: f64| r.iter().map(|q| lift(q, h)).collect::<Vec<_>>();
    faces.push(Face3::new(bottom, rev(&base.outer, h0), base.holes.iter().map(|h| rev(h, h0)).collect()));
    faces.push(Face3::new(top, fwd(&base.outer, h1), base.holes.iter().map(|h| fwd(h, h1)).collect()));
    for r in base.rings() {
        let k = r.len();
        for i in 0..k {
            let (a, b) = (r[i], r[(i + 1) % k]);
            let quad = vec![lift(&a, h0), lift(&b, h0), lift(&b, h1), lift(&a, h1)];
            let e = frame.dir_to_world(&(b - a));
            let normal = e.cross(&n).normalize();
            let plane = Plane3 { normal, offset: normal.dot(&quad[0].coords) };
            faces.push(Face3::new(plane, quad, Vec::new()));
        }
    }
    Polyhedron::new(faces)
}

/// Extrusion of a polygon in the xy-plane between `z0` and `z1`.
pub fn prism_z(base: &Polygon2, z0: f64, z1: f64) -> Polyhedron {
    let frame = Frame3 { origin: Point3::origin(), u: Vector3::x(), v: Vector3::y(), normal: Vector3::z() };
    prism(base, &frame, z0, z1)
}

/// Boundary of the union of filled cells of an irregular grid.
/// `filled(i, j, k)` is queried for cell `[xs[i], xs[i+1]] × ...`.
pub fn voxel_solid(xs: &[f64], ys: &[f64], zs: &[f64], filled: impl Fn(usize, usize, usize) -> bool) -> Result<Polyhedron> {
    let (nx, ny, nz) = (xs.len() - 1, ys.len() - 1, zs.len() - 1);
    let on = |i: i64, j: i64, k: i64| {
        i >= 0 && j >= 0 && k >= 0 && (i as usize) < nx && (j as usize) < ny && (k as usize) < nz && filled(i as usize, j as usize, k as usize)
    };
    let mut faces = Vec::new();
    for i in 0..nx {
        for j in 0..ny {
            for k in 0..nz {
                if !filled(i, j, k) {
                    continue;
                }
                let lo = Point3::new(xs[i], ys[j], zs[k]);
                let hi = Point3::new(xs[i + 1], ys[j + 1], zs[k + 1]);
                let cell = cuboid(lo, hi);
                let (ii, jj, kk) = (i as i64, j as i64, k as i64);
                for f in cell.faces {
                    let nrm = f.plane.normal;
                    let d = (nrm.x.round() as i64, nrm.y.round() as i64, nrm.z.round() as i64);
                    if !on(ii + d.0, jj + d.1, kk + d.2) {
                        faces.push(f);
                    }
                }
            }
        }
    }
    canonicalize(&Polyhedron::new(faces))
}
