//! Exhaustive enumeration of every scene consistent with a markup, over a
//! finite candidate space, plus a catalog of markups that admit several
//! interpretations.
//!
//! A scene is consistent with a markup when every marker lies in the
//! relative interior of a face (an edge, in the plane) whose plane agrees
//! with the marker, every face holds at least one marker, and any
//! `polyhedron_id` / `face_id` metadata agrees with the scene's partition.

mod catalog;
mod convex3d;
mod convexset;
mod ortho;
mod planar;

pub use catalog::{catalog, catalog_instance, CounterexampleInstance};

use crate::error::{Error, Result};
use crate::geometry::plane::axis_of;
use crate::geometry::shapes::prism_z;
use crate::geometry::{canonicalize, scenes_equal, Polygon2, Scene};
use crate::markup::{MarkerId, MarkupDescription};
use crate::tolerance;
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelClass {
    /// A single convex polyhedron bounded by marker planes.
    Convex3d,
    /// Closure-disjoint axis-aligned rectangles in the plane `z = 0`.
    RectSet2d,
    /// Closure-disjoint convex polygons in the plane `z = 0`.
    ConvexPolygonSet2d,
    /// Orthogonal polyhedra whose faces lie on marker planes.
    Orthogonal3d,
    /// Sets of convex polyhedra bounded by marker planes; parts may intersect.
    ConvexSet3d,
}

impl ModelClass {
    pub const ALL: [ModelClass; 5] =
        [ModelClass::Convex3d, ModelClass::RectSet2d, ModelClass::ConvexPolygonSet2d, ModelClass::Orthogonal3d, ModelClass::ConvexSet3d];

    pub fn name(self) -> &'static str {
        match self {
            ModelClass::Convex3d => "convex-3d",
            ModelClass::RectSet2d => "rect-set-2d",
            ModelClass::ConvexPolygonSet2d => "convex-polygon-set-2d",
            ModelClass::Orthogonal3d => "orthogonal-polyhedron",
            ModelClass::ConvexSet3d => "convex-set-3d",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        ModelClass::ALL
            .into_iter()
            .find(|c| c.name() == s)
    }

    pub fn is_planar(self) -> bool {
        matches!(self, ModelClass::RectSet2d | ModelClass::ConvexPolygonSet2d)
    }
}

pub const DEFAULT_BUDGET: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateSpace {
    pub class: ModelClass,
    /// Sorted distinct offsets of the axis-normal marker planes, per axis.
    pub grid: [Vec<f64>; 3],
    /// Upper bound on the number of candidate sets examined.
    pub budget: u64,
}

impl CandidateSpace {
    pub fn new(d: &MarkupDescription, class: ModelClass) -> Self {
        Self { class, grid: axis_grid(d), budget: DEFAULT_BUDGET }
    }

    pub fn with_budget(mut self, budget: u64) -> Self {
        self.budget = budget;
        self
    }

    /// Number of grid cells spanned by the marker planes.
    pub fn cell_count(&self) -> usize {
        self.grid.iter().map(|g| g.len().saturating_sub(1)).product()
    }
}

fn axis_grid(d: &MarkupDescription) -> [Vec<f64>; 3] {
    let tol = tolerance::geo() * 10.0;
    let mut g: [Vec<f64>; 3] = Default::default();
    for (_, m) in d.iter() {
        let Some(pl) = m.data.plane() else { continue };
        if let Some(a) = axis_of(&pl.normal) {
            g[a].push(m.position()[a]);
        }
    }
    for axis in &mut g {
        axis.sort_by(f64::total_cmp);
        axis.dedup_by(|a, b| (*a - *b).abs() <= tol);
    }
    g
}

fn axis_index(g: &[f64], x: f64, tol: f64) -> Option<usize> {
    g.iter().position(|v| (v - x).abs() <= tol)
}

/// One consistent interpretation.
#[derive(Debug, Clone, PartialEq)]
pub enum Witness {
    Solid(Scene),
    /// Polygons in the plane `z = 0`, sorted by their lowest vertex.
    Planar(Vec<Polygon2>),
}

impl Witness {
    /// Number of polyhedra or polygons.
    pub fn part_count(&self) -> usize {
        match self {
            Witness::Solid(s) => s.polyhedra.len(),
            Witness::Planar(p) => p.len(),
        }
    }

    /// Solid form; planar parts become unit-height prisms over `z ∈ [0, 1]`.
    pub fn to_scene(&self) -> Scene {
        match self {
            Witness::Solid(s) => s.clone(),
            Witness::Planar(ps) => {
                Scene::new(ps.iter().map(|p| canonicalize(&prism_z(p, 0.0, 1.0)).unwrap_or_else(|_| prism_z(p, 0.0, 1.0))).collect())
            }
        }
    }

    pub fn same_as(&self, other: &Witness, tol: f64) -> bool {
        match (self, other) {
            (Witness::Solid(a), Witness::Solid(b)) => scenes_equal(a, b, tol),
            (Witness::Planar(a), Witness::Planar(b)) => a.len() == b.len() && a.iter().zip(b).all(|(p, q)| planar_equal(p, q, tol)),
            _ => false,
        }
    }
}

fn planar_equal(a: &Polygon2, b: &Polygon2, tol: f64) -> bool {
    let (ra, rb) = (&a.outer, &b.outer);
    if ra.len() != rb.len() || !a.holes.is_empty() || !b.holes.is_empty() {
        return false;
    }
    (0..rb.len()).any(|s| ra.iter().enumerate().all(|(i, p)| (p - rb[(i + s) % rb.len()]).norm() <= tol))
}

/// Result of an ambiguity query.
#[derive(Debug, Clone, PartialEq)]
pub struct Ambiguity {
    pub ambiguous: bool,
    /// Every consistent interpretation; exactly one when `!ambiguous`, none
    /// when the markup has no consistent interpretation in the space.
    pub witnesses: Vec<Witness>,
}

pub(crate) struct Budget {
    pub(crate) limit: u64,
    used: u64,
}

impl Budget {
    fn new(limit: u64) -> Self {
        Self { limit, used: 0 }
    }

    fn tick(&mut self) -> Result<()> {
        self.used += 1;
        if self.used > self.limit {
            return Err(Error::SearchBudgetExceeded(self.limit));
        }
        Ok(())
    }

    fn remaining(&self) -> u64 {
        self.limit.saturating_sub(self.used)
    }
}

/// Part (polyhedron or polygon) and face (or edge) carrying a marker.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Owner {
    part: usize,
    face: usize,
}

/// Markers sharing a `polyhedron_id` share a part and markers with distinct
/// ids do not; likewise `face_id` against faces.
fn meta_consistent(d: &MarkupDescription, owners: &BTreeMap<MarkerId, Owner>) -> bool {
    let rows: Vec<_> = d.iter().filter_map(|(id, m)| owners.get(&id).map(|o| (m.meta, *o))).collect();
    for (i, (ma, oa)) in rows.iter().enumerate() {
        for (mb, ob) in &rows[i + 1..] {
            if let (Some(a), Some(b)) = (ma.polyhedron_id, mb.polyhedron_id) {
                if (a == b) != (oa.part == ob.part) {
                    return false;
                }
            }
            if let (Some(a), Some(b)) = (ma.face_id, mb.face_id) {
                let same = oa.part == ob.part && oa.face == ob.face;
                let same_id = a == b && ma.polyhedron_id == mb.polyhedron_id;
                if same_id != same {
                    return false;
                }
            }
        }
    }
    true
}

/// Every consistent scene of the candidate space, deduplicated.
pub fn enumerate_consistent(d: &MarkupDescription, space: &CandidateSpace) -> Result<Vec<Witness>> {
    let mut budget = Budget::new(space.budget);
    let found = match space.class {
        ModelClass::Orthogonal3d => ortho::enumerate(d, space, &mut budget)?,
        ModelClass::RectSet2d => planar::enumerate_rects(d, &mut budget)?,
        ModelClass::ConvexPolygonSet2d => planar::enumerate_polygons(d, &mut budget)?,
        ModelClass::Convex3d => convex3d::enumerate(d, &mut budget)?,
        ModelClass::ConvexSet3d => convexset::enumerate(d, &mut budget)?,
    };
    let tol = tolerance::geo() * 1e3;
    let mut out: Vec<Witness> = Vec::with_capacity(found.len());
    for w in found {
        if !out.iter().any(|o| o.same_as(&w, tol)) {
            out.push(w);
        }
    }
    Ok(out)
}

pub fn is_ambiguous(d: &MarkupDescription, space: &CandidateSpace) -> Result<Ambiguity> {
    let witnesses = enumerate_consistent(d, space)?;
    Ok(Ambiguity { ambiguous: witnesses.len() >= 2, witnesses })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::shapes::cuboid;
    use crate::geometry::Point3;
    use crate::placement::{place_per_face, place_polygon_sides, DataKind, PlacementPolicy};
    use crate::recon::convex::reconstruct_convex;

    fn unit_cube_markup(kind: DataKind) -> MarkupDescription {
        let s = Scene::single(cuboid(Point3::origin(), Point3::new(1.0, 1.0, 1.0)));
        place_per_face(&s, &PlacementPolicy::default(), kind).unwrap()
    }

    #[test]
    fn cube_is_unique_in_every_solid_class() {
        for kind in [DataKind::PointPlane, DataKind::PointNormal] {
            let d = unit_cube_markup(kind);
            for class in [ModelClass::Convex3d, ModelClass::Orthogonal3d] {
                let a = is_ambiguous(&d, &CandidateSpace::new(&d, class)).unwrap();
                assert!(!a.ambiguous, "{class:?}");
                assert_eq!(a.witnesses.len(), 1);
                let Witness::Solid(s) = &a.witnesses[0] else { panic!() };
                assert!((s.polyhedra[0].volume() - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn rect_markups_have_one_reading() {
        let one = place_polygon_sides(&[Polygon2::rect(0.0, 0.0, 1.0, 1.0)], &PlacementPolicy::default());
        assert_eq!(enumerate_consistent(&one, &CandidateSpace::new(&one, ModelClass::RectSet2d)).unwrap().len(), 1);
        let rects = [Polygon2::rect(0.0, 0.0, 2.0, 1.0), Polygon2::rect(3.0, 0.5, 4.0, 3.0)];
        let two = place_polygon_sides(&rects, &PlacementPolicy::random(3, 2));
        let w = enumerate_consistent(&two, &CandidateSpace::new(&two, ModelClass::RectSet2d)).unwrap();
        assert_eq!(w.len(), 1);
        assert_eq!(w[0].part_count(), 2);
        let p = enumerate_consistent(&two, &CandidateSpace::new(&two, ModelClass::ConvexPolygonSet2d)).unwrap();
        assert_eq!(p.len(), 1);
        assert!(p[0].same_as(&w[0], 1e-9));
    }

    #[test]
    fn budget_is_enforced() {
        let d = catalog_instance("topo-equivalent-pair").unwrap().markup;
        let space = CandidateSpace::new(&d, ModelClass::Orthogonal3d).with_budget(2);
        assert_eq!(enumerate_consistent(&d, &space).unwrap_err().kind(), "SearchBudgetExceeded");
    }

    #[test]
    fn domino_gadget_has_two_readings() {
        let c = catalog_instance("simpleAmbi-3d").unwrap();
        assert_eq!(c.witnesses.len(), 2);
        let mut parts: Vec<usize> = c.witnesses.iter().map(|w| w.part_count()).collect();
        parts.sort();
        assert_eq!(parts, vec![1, 2]);
        let err = reconstruct_convex(&c.markup).unwrap_err();
        assert!(matches!(err.kind(), "SplitSides" | "RedundantPlane"), "{err}");
        for i in 0..2 {
            let labelled = c.with_part_ids(i);
            let w = enumerate_consistent(&labelled, &CandidateSpace::new(&labelled, c.class)).unwrap();
            assert_eq!(w.len(), 1);
            assert!(w[0].same_as(&c.witnesses[i], 1e-9));
        }
    }

    #[test]
    fn paired_gadgets_hold_equal_topologies() {
        let c = catalog_instance("topo-equivalent-pair").unwrap();
        assert_eq!(c.witnesses.len(), 4);
        let signature = |w: &Witness| {
            let s = w.to_scene();
            let mut g: Vec<usize> = s.polyhedra.iter().map(|p| p.genus().unwrap()).collect();
            g.sort();
            g
        };
        let equal = c.witnesses.iter().enumerate().any(|(i, a)| c.witnesses[i + 1..].iter().any(|b| signature(a) == signature(b)));
        assert!(equal);
    }
}
