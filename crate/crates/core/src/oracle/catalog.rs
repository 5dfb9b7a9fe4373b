//! Built-in markups with more than one consistent interpretation.

use super::{enumerate_consistent, planar, CandidateSpace, ModelClass, Witness};
use crate::geometry::ring::Location;
use crate::geometry::{Plane3, Point3, Vector3};
use crate::markup::{Marker, MarkerData, MarkupDescription};
use crate::tolerance;

#[derive(Debug, Clone, PartialEq)]
pub struct CounterexampleInstance {
    pub name: &'static str,
    pub class: ModelClass,
    pub markup: MarkupDescription,
    /// Every consistent interpretation, at least two, pairwise distinct.
    pub witnesses: Vec<Witness>,
}

impl CounterexampleInstance {
    /// The markup with `polyhedron_id` set from the parts of `witnesses[i]`.
    pub fn with_part_ids(&self, i: usize) -> MarkupDescription {
        label_parts(&self.markup, &self.witnesses[i])
    }
}

/// Copy of `d` whose markers carry the index of the part of `w` they lie on.
/// Markers on a boundary shared by two polygons go where an edge needs them.
pub fn label_parts(d: &MarkupDescription, w: &Witness) -> MarkupDescription {
    let tol = tolerance::geo() * 10.0;
    match w {
        Witness::Solid(s) => {
            let mut out = d.clone();
            for m in out.markers.values_mut() {
                let p = m.position();
                let part = s.polyhedra.iter().position(|poly| poly.faces.iter().any(|f| f.locate(&p, tol) == Location::Inside));
                m.meta.polyhedron_id = part.map(|i| i as i64);
            }
            out
        }
        Witness::Planar(ps) => planar::label_polygons(d, ps).ok().flatten().unwrap_or_else(|| d.clone()),
    }
}

fn plane_marker(p: Point3, axis: usize) -> Marker {
    let mut n = Vector3::zeros();
    n[axis] = 1.0;
    let plane = Plane3::from_point_normal(&p, &n).expect("axis normal is unit length");
    Marker::new(MarkerData::PointPlane { position: p, plane })
}

/// Two dominoes that also read as one S-shaped solid, on a 3 × 3 grid of
/// unit cells, lifted to `z ∈ [0, 1]`. `dx` shifts the whole gadget.
fn domino_gadget(dx: f64) -> Vec<Marker> {
    let side = [
        // (axis of the normal, position in the plane z = 0.5)
        (1, 1.5, 0.0),
        (1, 2.5, 1.0),
        (1, 0.5, 2.0),
        (1, 0.5, 3.0),
        (0, 0.0, 2.5),
        (0, 1.0, 0.5),
        (0, 2.0, 2.5),
        (0, 3.0, 0.5),
    ];
    let mut out: Vec<Marker> = side.iter().map(|&(axis, x, y)| plane_marker(Point3::new(x + dx, y, 0.5), axis)).collect();
    for (x, y) in [(0.5, 2.5), (1.5, 0.5)] {
        for z in [0.0, 1.0] {
            out.push(plane_marker(Point3::new(x + dx, y, z), 2));
        }
    }
    out
}

fn simple_ambiguity() -> MarkupDescription {
    MarkupDescription::from_markers(domino_gadget(0.0))
}

/// Two gadgets side by side: among the readings are two with the same
/// number of solids and the same genus but different geometry.
fn topo_pair() -> MarkupDescription {
    MarkupDescription::from_markers(domino_gadget(0.0).into_iter().chain(domino_gadget(4.0)))
}

/// Two overlapping unit-section bars, `[0, 2]` and `[1, 3]` along x, that
/// also read as the nested pair `[0, 3]` and `[1, 2]` (among others).
fn intersecting_pair() -> MarkupDescription {
    let mut ms: Vec<Marker> = (0..4).map(|x| plane_marker(Point3::new(x as f64, 0.5, 0.5), 0)).collect();
    for x in [0.5, 1.5, 2.5] {
        for (axis, side) in [(1, 0.0), (1, 1.0), (2, 0.0), (2, 1.0)] {
            let mut p = Point3::new(x, 0.5, 0.5);
            p[axis] = side;
            ms.push(plane_marker(p, axis));
        }
    }
    MarkupDescription::from_markers(ms)
}

fn line_marker(x: f64, y: f64, nx: f64, ny: f64) -> Marker {
    let p = Point3::new(x, y, 0.0);
    let plane = Plane3::from_point_normal(&p, &Vector3::new(nx, ny, 0.0).normalize()).expect("nonzero normal");
    Marker::new(MarkerData::PointPlane { position: p, plane })
}

/// Line markers `(x, y, normal)`. A triangle against the left edge touches
/// a quadrilateral along one of its slanted sides; the quadrilateral can
/// lean on either slanted side, so it slides between two readings.
const SLIDE: &[(f64, f64, f64, f64)] = &[
    (0.0, 0.5, 1.0, 0.0),
    (0.2, 0.2, 1.0, -1.0),
    (0.3, 0.3, 1.0, -1.0),
    (0.2, 0.8, 1.0, 1.0),
    (0.3, 0.7, 1.0, 1.0),
    (1.5, 0.0, 0.0, 1.0),
    (2.0, 0.5, 1.0, 0.0),
    (1.5, 1.0, 0.0, 1.0),
];

fn polygon_slide() -> MarkupDescription {
    MarkupDescription::from_markers(SLIDE.iter().map(|&(x, y, nx, ny)| line_marker(x, y, nx, ny)))
}

pub fn catalog() -> Vec<CounterexampleInstance> {
    let build = |name, class, markup: MarkupDescription| {
        let space = CandidateSpace::new(&markup, class);
        let witnesses = enumerate_consistent(&markup, &space).expect("catalog instances fit the default budget");
        CounterexampleInstance { name, class, markup, witnesses }
    };
    vec![
        build("simpleAmbi-3d", ModelClass::Orthogonal3d, simple_ambiguity()),
        build("topo-equivalent-pair", ModelClass::Orthogonal3d, topo_pair()),
        build("intersecting-convex-pair", ModelClass::ConvexSet3d, intersecting_pair()),
        build("convex-polygon-slide", ModelClass::ConvexPolygonSet2d, polygon_slide()),
    ]
}

pub fn catalog_instance(name: &str) -> Option<CounterexampleInstance> {
    catalog().into_iter().find(|c| c.name == name)
}
