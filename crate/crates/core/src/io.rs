//! Scene and markup files, and OBJ mesh export.
//!
//! Both file kinds are JSON objects with `"version": "1"`. Numbers are
//! written as shortest round-trip decimals, so `parse(serialize(x)) == x`
//! holds bit for bit.

use crate::error::{Error, Result};
use crate::geometry::polyhedron::FaceTag;
use crate::geometry::triangulate::triangulate;
use crate::geometry::weld::VertexWeld;
use crate::geometry::{Face3, Plane3, Point2, Point3, Polygon2, Polyhedron, Scene, Vector3};
use crate::markup::{FaceRef, Marker, MarkerData, MarkerId, MarkerMeta, MarkupDescription, RefOwner};
use crate::tolerance;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

pub const FORMAT_VERSION: &str = "1";

/// Failure to read or decode a file.
#[derive(Debug, thiserror::Error)]
pub enum FileError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed document: {0}")]
    Syntax(#[from] serde_json::Error),
    #[error("unsupported format version {0:?}")]
    Version(String),
    #[error("invalid content: {0}")]
    Content(String),
}

type Coord = [f64; 3];

fn coord(p: &Point3) -> Coord {
    [p.x, p.y, p.z]
}

fn point(c: &Coord) -> Point3 {
    Point3::new(c[0], c[1], c[2])
}

#[derive(Serialize, Deserialize)]
struct PlaneDto {
    normal: Coord,
    offset: f64,
}

impl PlaneDto {
    fn of(p: &Plane3) -> Self {
        Self { normal: [p.normal.x, p.normal.y, p.normal.z], offset: p.offset }
    }

    fn plane(&self) -> std::result::Result<Plane3, FileError> {
        let n = Vector3::new(self.normal[0], self.normal[1], self.normal[2]);
        Plane3::new(n, self.offset).map_err(|e| FileError::Content(e.to_string()))
    }
}

#[derive(Serialize, Deserialize)]
struct FaceDto {
    /// Derived from the outer ring when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    plane: Option<PlaneDto>,
    outer: Vec<Coord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    holes: Vec<Vec<Coord>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tag: Option<FaceTag>,
}

#[derive(Serialize, Deserialize)]
struct PolyhedronDto {
    faces: Vec<FaceDto>,
}

#[derive(Serialize, Deserialize)]
struct SceneDto {
    version: String,
    polyhedra: Vec<PolyhedronDto>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    elaborations: Vec<ElaborationRefDto>,
}

#[derive(Serialize, Deserialize)]
struct ElaborationRefDto {
    id: i64,
    base: FaceRefDto,
}

#[derive(Serialize, Deserialize, Clone, Copy)]
#[serde(rename_all = "snake_case")]
enum RefOwnerKind {
    Polyhedron,
    Elaboration,
}

#[derive(Serialize, Deserialize)]
struct FaceRefDto {
    owner: RefOwnerKind,
    owner_id: i64,
    face: i64,
}

#[derive(Serialize, Deserialize, Default)]
struct MetaDto {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    face_id: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    polyhedron_id: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    elaboration_id: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    base_face_ref: Option<FaceRefDto>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    order_index: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    in_plane_orientation: Option<f64>,
}

#[derive(Serialize, Deserialize)]
struct MarkerDto {
    id: MarkerId,
    kind: String,
    position: Coord,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    plane: Option<PlaneDto>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    normal: Option<Coord>,
    #[serde(default)]
    meta: MetaDto,
}

#[derive(Serialize, Deserialize)]
struct MarkupDto {
    version: String,
    markers: Vec<MarkerDto>,
}

fn face_ref_dto(r: &FaceRef) -> FaceRefDto {
    let (owner, owner_id) = match r.owner {
        RefOwner::Polyhedron(i) => (RefOwnerKind::Polyhedron, i),
        RefOwner::Elaboration(i) => (RefOwnerKind::Elaboration, i),
    };
    FaceRefDto { owner, owner_id, face: r.face }
}

fn face_ref(r: &FaceRefDto) -> FaceRef {
    let owner = match r.owner {
        RefOwnerKind::Polyhedron => RefOwner::Polyhedron(r.owner_id),
        RefOwnerKind::Elaboration => RefOwner::Elaboration(r.owner_id),
    };
    FaceRef { owner, face: r.face }
}

fn check_version(v: &str) -> std::result::Result<(), FileError> {
    if v == FORMAT_VERSION {
        Ok(())
    } else {
        Err(FileError::Version(v.to_string()))
    }
}

fn finite(cs: impl IntoIterator<Item = f64>) -> std::result::Result<(), FileError> {
    if cs.into_iter().all(f64::is_finite) {
        Ok(())
    } else {
        Err(FileError::Content("non-finite coordinate".into()))
    }
}

/// A scene plus, for elaborated scenes, the base face of every
/// elaboration (placement needs it for metadata).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SceneFile {
    pub scene: Scene,
    pub base_refs: BTreeMap<i64, FaceRef>,
}

pub fn serialize_scene(s: &Scene) -> String {
    serialize_scene_file(&SceneFile { scene: s.clone(), base_refs: BTreeMap::new() })
}

pub fn parse_scene(text: &str) -> std::result::Result<Scene, FileError> {
    parse_scene_file(text).map(|f| f.scene)
}

pub fn serialize_scene_file(file: &SceneFile) -> String {
    let s = &file.scene;
    let dto = SceneDto {
        elaborations: file.base_refs.iter().map(|(&id, r)| ElaborationRefDto { id, base: face_ref_dto(r) }).collect(),
        version: FORMAT_VERSION.into(),
        polyhedra: s
            .polyhedra
            .iter()
            .map(|p| PolyhedronDto {
                faces: p
                    .faces
                    .iter()
                    .map(|f| FaceDto {
                        plane: Some(PlaneDto::of(&f.plane)),
                        outer: f.outer.iter().map(coord).collect(),
                        holes: f.holes.iter().map(|h| h.iter().map(coord).collect()).collect(),
                        tag: f.tag,
                    })
                    .collect(),
            })
            .collect(),
    };
    let mut out = serde_json::to_string_pretty(&dto).expect("scene coordinates are finite");
    out.push('\n');
    out
}

pub fn parse_scene_file(text: &str) -> std::result::Result<SceneFile, FileError> {
    let dto: SceneDto = serde_json::from_str(text)?;
    check_version(&dto.version)?;
    let mut polyhedra = Vec::with_capacity(dto.polyhedra.len());
    for p in dto.polyhedra {
        let mut faces = Vec::with_capacity(p.faces.len());
        for f in p.faces {
            if f.outer.len() < 3 {
                return Err(FileError::Content("face ring has fewer than three vertices".into()));
            }
            finite(f.outer.iter().chain(f.holes.iter().flatten()).flatten().copied())?;
            let outer: Vec<Point3> = f.outer.iter().map(point).collect();
            let holes = f.holes.iter().map(|h| h.iter().map(point).collect()).collect();
            let plane = match f.plane {
                Some(pl) => pl.plane()?,
                None => Face3::from_ring(outer.clone()).map_err(|e| FileError::Content(e.to_string()))?.plane,
            };
            faces.push(Face3 { plane, outer, holes, tag: f.tag });
        }
        polyhedra.push(Polyhedron::new(faces));
    }
    let mut base_refs = BTreeMap::new();
    for e in &dto.elaborations {
        if base_refs.insert(e.id, face_ref(&e.base)).is_some() {
            return Err(FileError::Content(format!("duplicate elaboration id {}", e.id)));
        }
    }
    Ok(SceneFile { scene: Scene::new(polyhedra), base_refs })
}

pub fn serialize_markup(d: &MarkupDescription) -> String {
    let markers = d
        .iter()
        .map(|(id, m)| {
            let (plane, normal) = match m.data {
                MarkerData::PointOnly { .. } => (None, None),
                MarkerData::PointPlane { plane, .. } => (Some(PlaneDto::of(&plane)), None),
                MarkerData::PointNormal { normal, .. } => (None, Some([normal.x, normal.y, normal.z])),
            };
            let meta = MetaDto {
                face_id: m.meta.face_id,
                polyhedron_id: m.meta.polyhedron_id,
                elaboration_id: m.meta.elaboration_id,
                base_face_ref: m.meta.base_face_ref.as_ref().map(face_ref_dto),
                order_index: m.meta.order_index,
                in_plane_orientation: m.meta.in_plane_orientation,
            };
            MarkerDto { id, kind: m.data.kind().into(), position: coord(&m.position()), plane, normal, meta }
        })
        .collect();
    let mut out = serde_json::to_string_pretty(&MarkupDto { version: FORMAT_VERSION.into(), markers }).expect("marker coordinates are finite");
    out.push('\n');
    out
}

pub fn parse_markup(text: &str) -> std::result::Result<MarkupDescription, FileError> {
    let dto: MarkupDto = serde_json::from_str(text)?;
    check_version(&dto.version)?;
    let mut d = MarkupDescription::new();
    for m in dto.markers {
        finite(m.position.iter().copied())?;
        let position = point(&m.position);
        let data = match (m.kind.as_str(), m.plane, m.normal) {
            ("point", None, None) => MarkerData::PointOnly { position },
            ("point_plane", Some(pl), None) => MarkerData::PointPlane { position, plane: pl.plane()? },
            ("point_normal", None, Some(n)) => {
                finite(n.iter().copied())?;
                MarkerData::PointNormal { position, normal: Vector3::new(n[0], n[1], n[2]) }
            }
            (k, _, _) => return Err(FileError::Content(format!("marker {}: fields do not match kind {k:?}", m.id))),
        };
        let meta = MarkerMeta {
            face_id: m.meta.face_id,
            polyhedron_id: m.meta.polyhedron_id,
            elaboration_id: m.meta.elaboration_id,
            base_face_ref: m.meta.base_face_ref.as_ref().map(face_ref),
            order_index: m.meta.order_index,
            in_plane_orientation: m.meta.in_plane_orientation,
        };
        if d.markers.insert(m.id, Marker { data, meta }).is_some() {
            return Err(FileError::Content(format!("duplicate marker id {}", m.id)));
        }
    }
    Ok(d)
}

pub fn read_text(path: &Path) -> std::result::Result<String, FileError> {
    std::fs::read_to_string(path).map_err(|source| FileError::Io { path: path.display().to_string(), source })
}

pub fn read_scene(path: &Path) -> std::result::Result<SceneFile, FileError> {
    parse_scene_file(&read_text(path)?)
}

pub fn read_markup(path: &Path) -> std::result::Result<MarkupDescription, FileError> {
    parse_markup(&read_text(path)?)
}

/// Writes through a sibling temporary file and a rename, so a failed write
/// never leaves a truncated `path` behind.
pub fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().ok_or_else(|| std::io::Error::new(std::io::ErrorKind::InvalidInput, "path has no file name"))?;
    let tmp = dir.join(format!(".{}.{}.tmp", name.to_string_lossy(), std::process::id()));
    let result = (|| {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
        std::fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = std::fs::remove_file(&tmp);
    }
    result
}

/// Indexed triangle mesh.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TriMesh {
    pub vertices: Vec<Point3>,
    /// Counterclockwise seen from outside.
    pub triangles: Vec<[usize; 3]>,
}

impl TriMesh {
    /// Every undirected edge is shared by exactly two triangles, with
    /// opposite directions.
    pub fn is_watertight(&self) -> bool {
        // (uses, uses in increasing direction) per undirected edge.
        let mut uses: HashMap<(usize, usize), (u32, u32)> = HashMap::new();
        for t in &self.triangles {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                if a == b {
                    return false;
                }
                let e = uses.entry((a.min(b), a.max(b))).or_default();
                e.0 += 1;
                e.1 += u32::from(a < b);
            }
        }
        uses.values().all(|&(n, up)| n == 2 && up == 1)
    }

    pub fn edge_count(&self) -> usize {
        let mut edges: Vec<(usize, usize)> = self
            .triangles
            .iter()
            .flat_map(|t| (0..3).map(move |k| (t[k].min(t[(k + 1) % 3]), t[k].max(t[(k + 1) % 3]))))
            .collect();
        edges.sort_unstable();
        edges.dedup();
        edges.len()
    }

    /// `V - E + F` of the triangulated surface.
    pub fn euler_characteristic(&self) -> i64 {
        self.vertices.len() as i64 - self.edge_count() as i64 + self.triangles.len() as i64
    }
}

/// Triangulates every face. Vertices of neighbouring faces that fall inside
/// an edge of this face are inserted into that edge, so the mesh closes up.
/// Each polyhedron gets its own vertices, so solids that touch stay
/// separate closed surfaces.
pub fn triangulate_scene(s: &Scene) -> Result<TriMesh> {
    let tol = tolerance::geo() * 10.0;
    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    for poly in &s.polyhedra {
        let mut weld = VertexWeld::new(tol);
        let base = vertices.len();
        let corners = poly.vertices();
        for (fi, f) in poly.faces.iter().enumerate() {
            let frame = f.frame();
            let mut lookup: Vec<(Point2, Point3)> = Vec::new();
            let mut project = |r: &Vec<Point3>| -> Vec<Point2> {
                r.iter()
                    .map(|p| {
                        let q = frame.to_local(p);
                        lookup.push((q, *p));
                        q
                    })
                    .collect()
            };
            let outer = project(&f.outer);
            let holes = f.holes.iter().map(&mut project).collect();
            let tris = triangulate(&Polygon2 { outer, holes }).map_err(|e| Error::Degenerate(format!("face {fi}: {e}")))?;
            if tris.is_empty() {
                return Err(Error::EmptyFace(fi));
            }
            let world = |q: &Point2| lookup.iter().find(|(k, _)| k == q).map(|(_, p)| *p).expect("triangle corners are ring vertices");
            let mut stack: Vec<[Point3; 3]> = tris.iter().map(|t| [world(&t[0]), world(&t[1]), world(&t[2])]).collect();
            while let Some(t) = stack.pop() {
                // Split at the first corner of the solid lying inside an edge.
                let split = (0..3).find_map(|k| {
                    let (a, b) = (t[k], t[(k + 1) % 3]);
                    corners
                        .iter()
                        .filter(|c| (*c - a).norm() > tol && (*c - b).norm() > tol && segment_distance_3d(c, &a, &b) <= tol)
                        .min_by(|c, d| (*c - a).norm_squared().total_cmp(&(*d - a).norm_squared()))
                        .map(|c| (k, *c))
                });
                match split {
                    Some((k, c)) => {
                        let (a, b, o) = (t[k], t[(k + 1) % 3], t[(k + 2) % 3]);
                        stack.push([a, c, o]);
                        stack.push([c, b, o]);
                    }
                    None => {
                        triangles.push([base + weld.insert(t[0]), base + weld.insert(t[1]), base + weld.insert(t[2])]);
                    }
                }
            }
        }
        vertices.extend(weld.points);
    }
    Ok(TriMesh { vertices, triangles })
}

/// Wavefront OBJ text: all `v` lines, then all `f` lines (1-based).
pub fn mesh_to_obj(m: &TriMesh) -> String {
    let mut out = String::new();
    for v in &m.vertices {
        let _ = writeln!(out, "v {} {} {}", v.x, v.y, v.z);
    }
    for t in &m.triangles {
        let _ = writeln!(out, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1);
    }
    out
}

/// Triangulated OBJ of `s`. Fails on a degenerate face or a mesh that does
/// not close up.
pub fn export_obj(s: &Scene) -> Result<String> {
    let mesh = triangulate_scene(s)?;
    if !mesh.is_watertight() {
        return Err(Error::InvalidTopology("exported mesh is not watertight".into()));
    }
    Ok(mesh_to_obj(&mesh))
}

fn segment_distance_3d(p: &Point3, a: &Point3, b: &Point3) -> f64 {
    let ab = b - a;
    let t = ((p - a).dot(&ab) / ab.norm_squared()).clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}
