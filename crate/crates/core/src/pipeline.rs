//! Placement strategies and reconstruction engines by name, and the
//! place-then-reconstruct round trip.

use crate::error::{Error, Result};
use crate::geometry::shapes::prism_z;
use crate::geometry::{canonicalize, scenes_equal, Point2, Polygon2, Polyhedron, Scene};
use crate::io::{serialize_scene, SceneFile};
use crate::markup::{MarkerData, MarkupDescription};
use crate::placement::{compute_epsilon_min, place_dense, place_per_face, place_polygon_sides, place_vertices, place_vertices_2d, DataKind, MetaPlan, PlacementPolicy};
use crate::recon::convex::{reconstruct_convex_multi_with, reconstruct_convex_with, ConvexOptions};
use crate::recon::dense::reconstruct_dense;
use crate::recon::elaboration::{reconstruct_box_intrusions_pn, reconstruct_box_intrusions_pp, reconstruct_hierarchy, reconstruct_hierarchy_nonconvex, reconstruct_rect_elab_multi};
use crate::recon::rect2d::{classify, reconstruct_rects};
use crate::recon::vertex::{connect_dots_2d, connect_dots_3d, faces_from_hulls, faces_from_ordered, records_from_markup};
use crate::tolerance;

/// Vertex tolerance for declaring a round trip faithful.
pub const ROUNDTRIP_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Engine {
    Convex,
    ConvexMulti,
    Rect2d,
    Elab,
    ElabNonconvex,
    ElabRect,
    BoxPn,
    BoxPp,
    Dense,
    Vertex2d,
    Vertex3d,
    VertexHull,
    VertexOrdered,
}

impl Engine {
    pub const ALL: [Engine; 13] = [
        Engine::Convex,
        Engine::ConvexMulti,
        Engine::Rect2d,
        Engine::Elab,
        Engine::ElabNonconvex,
        Engine::ElabRect,
        Engine::BoxPn,
        Engine::BoxPp,
        Engine::Dense,
        Engine::Vertex2d,
        Engine::Vertex3d,
        Engine::VertexHull,
        Engine::VertexOrdered,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Engine::Convex => "convex",
            Engine::ConvexMulti => "convex-multi",
            Engine::Rect2d => "rect2d",
            Engine::Elab => "elab",
            Engine::ElabNonconvex => "elab-nonconvex",
            Engine::ElabRect => "elab-rect",
            Engine::BoxPn => "box-pn",
            Engine::BoxPp => "box-pp",
            Engine::Dense => "dense",
            Engine::Vertex2d => "vertex-2d",
            Engine::Vertex3d => "vertex-3d",
            Engine::VertexHull => "vertex-hull",
            Engine::VertexOrdered => "vertex-ordered",
        }
    }

    pub fn parse(s: &str) -> Option<Engine> {
        Engine::ALL.into_iter().find(|e| e.name() == s)
    }

    /// Planar engines answer with polygons, returned as unit prisms.
    pub fn is_planar(self) -> bool {
        matches!(self, Engine::Rect2d | Engine::Vertex2d)
    }

    /// Engine chosen by the metadata present:
    ///
    /// 1. polyhedron and elaboration ids: `elab` (`elab-nonconvex` when
    ///    ordering is present too);
    /// 2. polyhedron ids: `convex-multi`;
    /// 3. only axis-aligned point-normal markers, no metadata: `box-pn`;
    /// 4. only point markers: `vertex-ordered`, `vertex-hull` or
    ///    `vertex-3d` by the face metadata present;
    /// 5. otherwise `convex`.
    pub fn auto(d: &MarkupDescription) -> Engine {
        let all = |f: &dyn Fn(&crate::markup::Marker) -> bool| d.iter().all(|(_, m)| f(m));
        let any = |f: &dyn Fn(&crate::markup::Marker) -> bool| d.iter().any(|(_, m)| f(m));
        let points = !d.is_empty() && all(&|m| matches!(m.data, MarkerData::PointOnly { .. }));
        if points {
            return if all(&|m| m.meta.face_id.is_some() && m.meta.order_index.is_some()) {
                Engine::VertexOrdered
            } else if all(&|m| m.meta.face_id.is_some()) {
                Engine::VertexHull
            } else {
                Engine::Vertex3d
            };
        }
        let ids = !d.is_empty() && all(&|m| m.meta.polyhedron_id.is_some());
        if ids && any(&|m| m.meta.elaboration_id.is_some()) {
            return if any(&|m| m.meta.order_index.is_some()) { Engine::ElabNonconvex } else { Engine::Elab };
        }
        if ids {
            return Engine::ConvexMulti;
        }
        let bare = all(&|m| m.meta == Default::default());
        let axis_normals = all(&|m| matches!(m.data, MarkerData::PointNormal { normal, .. } if crate::geometry::plane::axis_of(&normal).is_some()));
        if !d.is_empty() && bare && axis_normals {
            return Engine::BoxPn;
        }
        Engine::Convex
    }
}

/// Engine output and any non-fatal findings.
#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    pub scene: Scene,
    pub warnings: Vec<String>,
}

fn positions_2d(d: &MarkupDescription) -> Vec<Point2> {
    d.iter().map(|(_, m)| Point2::new(m.position().x, m.position().y)).collect()
}

/// Runs `engine`. With `strict`, a marker plane that supports no face of a
/// convex result is an error rather than a warning.
pub fn reconstruct(engine: Engine, d: &MarkupDescription, strict: bool) -> Result<Reconstruction> {
    let single = |p: Polyhedron| Reconstruction { scene: Scene::single(p), warnings: Vec::new() };
    let plain = |s: Scene| Reconstruction { scene: s, warnings: Vec::new() };
    let opts = ConvexOptions { strict };
    Ok(match engine {
        Engine::Convex => {
            let o = reconstruct_convex_with(d, opts)?;
            Reconstruction { scene: Scene::single(o.value), warnings: o.warnings.iter().map(|w| w.to_string()).collect() }
        }
        Engine::ConvexMulti => {
            let o = reconstruct_convex_multi_with(d, opts)?;
            Reconstruction { scene: o.value, warnings: o.warnings.iter().map(|w| w.to_string()).collect() }
        }
        Engine::Rect2d => {
            let rs = reconstruct_rects(&classify(d)?)?;
            plain(planar_scene(&rs.rects.iter().map(|r| r.polygon()).collect::<Vec<_>>()))
        }
        Engine::Elab => plain(reconstruct_hierarchy(d)?),
        Engine::ElabNonconvex => plain(reconstruct_hierarchy_nonconvex(d)?),
        Engine::ElabRect => plain(reconstruct_rect_elab_multi(d)?),
        Engine::BoxPn => single(reconstruct_box_intrusions_pn(d)?),
        Engine::BoxPp => single(reconstruct_box_intrusions_pp(d)?),
        Engine::Dense => plain(reconstruct_dense(d)?),
        Engine::Vertex2d => plain(planar_scene(&connect_dots_2d(&positions_2d(d))?)),
        Engine::Vertex3d => single(connect_dots_3d(&d.positions())?),
        Engine::VertexHull => plain(faces_from_hulls(&records_from_markup(d))?),
        Engine::VertexOrdered => plain(faces_from_ordered(&records_from_markup(d))?),
    })
}

/// Unit prisms `z ∈ [0, 1]` over planar polygons.
pub fn planar_scene(polys: &[Polygon2]) -> Scene {
    Scene::new(polys.iter().map(|p| {
        let prism = prism_z(p, 0.0, 1.0);
        canonicalize(&prism).unwrap_or(prism)
    }).collect())
}

/// Footprints of a scene of vertical prisms: the bottom face of each
/// polyhedron, seen from above.
pub fn footprints(s: &Scene) -> Result<Vec<Polygon2>> {
    s.polyhedra
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let lowest = p.bbox().map(|(lo, _)| lo.z).ok_or(Error::EmptyFace(i))?;
            let bottom = p
                .faces
                .iter()
                .filter(|f| f.plane.normal.z < -1.0 + tolerance::AXIS && f.outer.iter().all(|v| (v.z - lowest).abs() <= tolerance::geo()))
                .collect::<Vec<_>>();
            let [face] = bottom[..] else {
                return Err(Error::Unsupported(format!("polyhedron {i} is not a vertical prism")));
            };
            let flat = |r: &Vec<crate::geometry::Point3>| -> Vec<Point2> { r.iter().rev().map(|v| Point2::new(v.x, v.y)).collect() };
            Ok(Polygon2::new(flat(&face.outer), face.holes.iter().map(flat).collect()))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    /// Markers inside every face.
    PerFace,
    /// Point-plane markers on a grid over every face.
    Dense,
    /// One point marker per vertex (per vertex and face with ids).
    Vertex,
    /// Point-normal markers on the edges of prism footprints.
    Sides,
    /// Vertex markers of prism footprints.
    Vertex2d,
}

impl Strategy {
    pub const ALL: [Strategy; 5] = [Strategy::PerFace, Strategy::Dense, Strategy::Vertex, Strategy::Sides, Strategy::Vertex2d];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::PerFace => "per-face",
            Strategy::Dense => "dense",
            Strategy::Vertex => "vertex",
            Strategy::Sides => "sides",
            Strategy::Vertex2d => "vertex-2d",
        }
    }

    pub fn parse(s: &str) -> Option<Strategy> {
        Strategy::ALL.into_iter().find(|e| e.name() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataArg {
    Point,
    PointPlane,
    PointNormal,
}

/// Metadata groups requested on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MetaFlags {
    /// `face_id` and `polyhedron_id`.
    pub ids: bool,
    /// `elaboration_id` and `base_face_ref`.
    pub elab: bool,
    pub order: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlaceOptions {
    pub strategy: Strategy,
    pub data: DataArg,
    pub meta: MetaFlags,
    /// Random interior positions instead of centroids.
    pub seed: Option<u64>,
    pub per_face: usize,
    /// Dense grid spacing; defaults to `0.9 × compute_epsilon_min`.
    pub spacing: Option<f64>,
}

impl Default for PlaceOptions {
    fn default() -> Self {
        Self { strategy: Strategy::PerFace, data: DataArg::PointPlane, meta: MetaFlags::default(), seed: None, per_face: 1, spacing: None }
    }
}

pub fn place(file: &SceneFile, o: &PlaceOptions) -> Result<MarkupDescription> {
    let mut policy = match o.seed {
        Some(seed) => PlacementPolicy::random(seed, o.per_face.max(1)),
        None => PlacementPolicy { markers_per_face: o.per_face.max(1), ..PlacementPolicy::default() },
    };
    policy.meta = MetaPlan { face_id: o.meta.ids, polyhedron_id: o.meta.ids, elaboration: o.meta.elab, order: o.meta.order };
    policy.base_refs = file.base_refs.clone();
    let s = &file.scene;
    match o.strategy {
        Strategy::PerFace => {
            let kind = if o.data == DataArg::PointNormal { DataKind::PointNormal } else { DataKind::PointPlane };
            let mut d = place_per_face(s, &policy, kind)?;
            if o.data == DataArg::Point {
                for m in d.markers.values_mut() {
                    m.data = MarkerData::PointOnly { position: m.position() };
                }
            }
            Ok(d)
        }
        Strategy::Dense => {
            let spacing = match o.spacing {
                Some(x) if x.is_finite() && x > 0.0 => x,
                Some(x) => return Err(Error::Degenerate(format!("spacing {x} is not positive"))),
                None => 0.9 * compute_epsilon_min(s)?,
            };
            Ok(place_dense(s, spacing))
        }
        Strategy::Vertex => Ok(place_vertices(s, o.meta.ids, o.meta.order)),
        Strategy::Sides => Ok(place_polygon_sides(&footprints(s)?, &policy)),
        Strategy::Vertex2d => Ok(place_vertices_2d(&footprints(s)?, o.meta.ids, o.meta.order)),
    }
}

/// Outcome of one place-then-reconstruct run.
#[derive(Debug, Clone, PartialEq)]
pub enum RoundTrip {
    Pass,
    /// The engine returned a different scene; `diff` compares canonical text.
    Mismatch { diff: Vec<String> },
    /// Placement failed.
    PlacementFailed(Error),
    /// The engine refused the markup.
    EngineFailed(Error),
}

impl RoundTrip {
    pub fn passed(&self) -> bool {
        matches!(self, RoundTrip::Pass)
    }
}

/// Scene the engine should give back: footprint prisms for planar
/// engines, the untagged input otherwise.
fn expected(s: &Scene, engine: Engine) -> Result<Scene> {
    if engine.is_planar() {
        Ok(planar_scene(&footprints(s)?))
    } else {
        Ok(Scene::new(s.polyhedra.iter().map(|p| p.strip_tags()).collect()))
    }
}

pub fn roundtrip(file: &SceneFile, o: &PlaceOptions, engine: Engine, strict: bool) -> RoundTrip {
    let d = match place(file, o) {
        Ok(d) => d,
        Err(e) => return RoundTrip::PlacementFailed(e),
    };
    let want = match expected(&file.scene, engine) {
        Ok(s) => s,
        Err(e) => return RoundTrip::PlacementFailed(e),
    };
    match reconstruct(engine, &d, strict) {
        Err(e) => RoundTrip::EngineFailed(e),
        Ok(r) if scenes_equal(&want, &r.scene, ROUNDTRIP_TOL) => RoundTrip::Pass,
        Ok(r) => RoundTrip::Mismatch { diff: canonical_diff(&want, &r.scene) },
    }
}

/// Canonical text of a scene: canonical polyhedra without tags, in a
/// fixed order.
pub fn canonical_text(s: &Scene) -> String {
    let mut polys: Vec<(String, Polyhedron)> = s
        .polyhedra
        .iter()
        .map(|p| {
            let c = canonicalize(&p.strip_tags()).unwrap_or_else(|_| p.strip_tags());
            (serialize_scene(&Scene::single(c.clone())), c)
        })
        .collect();
    polys.sort_by(|a, b| a.0.cmp(&b.0));
    serialize_scene(&Scene::new(polys.into_iter().map(|(_, p)| p).collect()))
}

/// Line diff (`-` expected only, `+` actual only) of the canonical texts.
pub fn canonical_diff(expected: &Scene, actual: &Scene) -> Vec<String> {
    let (ta, tb) = (canonical_text(expected), canonical_text(actual));
    let a: Vec<&str> = ta.lines().collect();
    let b: Vec<&str> = tb.lines().collect();
    line_diff(&a, &b)
}

fn line_diff(a: &[&str], b: &[&str]) -> Vec<String> {
    // Longest common subsequence table, from the back.
    let (n, m) = (a.len(), b.len());
    let mut t = vec![vec![0u32; m + 1]; n + 1];
    for i in (0..n).rev() {
        for j in (0..m).rev() {
            t[i][j] = if a[i] == b[j] { t[i + 1][j + 1] + 1 } else { t[i + 1][j].max(t[i][j + 1]) };
        }
    }
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < n || j < m {
        if i < n && j < m && a[i] == b[j] {
            i += 1;
            j += 1;
        } else if j == m || (i < n && t[i + 1][j] >= t[i][j + 1]) {
            out.push(format!("-{}", a[i]));
            i += 1;
        } else {
            out.push(format!("+{}", b[j]));
            j += 1;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{l_prism, unit_cube};

    fn file(s: Scene) -> SceneFile {
        SceneFile { scene: s, base_refs: Default::default() }
    }

    #[test]
    fn cube_per_face_convex_passes() {
        assert!(roundtrip(&file(unit_cube()), &PlaceOptions::default(), Engine::Convex, true).passed());
    }

    #[test]
    fn l_prism_per_face_convex_fails_with_a_diff() {
        let r = roundtrip(&file(l_prism()), &PlaceOptions::default(), Engine::Convex, false);
        match r {
            RoundTrip::Mismatch { diff } => assert!(!diff.is_empty()),
            RoundTrip::EngineFailed(_) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn planar_engines_round_trip_prisms() {
        let polys = vec![Polygon2::rect(0.0, 0.0, 2.0, 1.0), Polygon2::rect(3.0, 0.0, 4.0, 4.0)];
        let f = file(planar_scene(&polys));
        let sides = PlaceOptions { strategy: Strategy::Sides, data: DataArg::PointNormal, ..Default::default() };
        assert!(roundtrip(&f, &sides, Engine::Rect2d, true).passed());
        let dots = PlaceOptions { strategy: Strategy::Vertex2d, ..Default::default() };
        assert!(roundtrip(&f, &dots, Engine::Vertex2d, true).passed());
    }

    #[test]
    fn auto_follows_the_documented_precedence() {
        let f = file(unit_cube());
        let with = |meta, data| place(&f, &PlaceOptions { meta, data, ..Default::default() }).unwrap();
        let ids = MetaFlags { ids: true, ..Default::default() };
        assert_eq!(Engine::auto(&with(ids, DataArg::PointPlane)), Engine::ConvexMulti);
        assert_eq!(Engine::auto(&with(MetaFlags::default(), DataArg::PointNormal)), Engine::BoxPn);
        assert_eq!(Engine::auto(&with(MetaFlags::default(), DataArg::PointPlane)), Engine::Convex);
        let mut elab = with(ids, DataArg::PointPlane);
        elab.markers.values_mut().next().unwrap().meta.elaboration_id = Some(1);
        assert_eq!(Engine::auto(&elab), Engine::Elab);
        let verts = place(&f, &PlaceOptions { strategy: Strategy::Vertex, ..Default::default() }).unwrap();
        assert_eq!(Engine::auto(&verts), Engine::Vertex3d);
    }

    #[test]
    fn line_diff_marks_changes() {
        assert_eq!(line_diff(&["a", "b", "c"], &["a", "x", "c"]), vec!["-b".to_string(), "+x".to_string()]);
        assert!(line_diff(&["a"], &["a"]).is_empty());
    }
}
