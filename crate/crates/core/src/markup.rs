//! Markers and markup descriptions.

use crate::error::{Error, Result};
use crate::geometry::{Plane3, Point3, Vector3};
use crate::tolerance;
use std::collections::{BTreeMap, HashMap};
use std::fmt;

pub type MarkerId = u64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MarkerData {
    PointOnly { position: Point3 },
    PointPlane { position: Point3, plane: Plane3 },
    /// `normal` points out of the solid.
    PointNormal { position: Point3, normal: Vector3 },
}

impl MarkerData {
    pub fn position(&self) -> Point3 {
        match *self {
            MarkerData::PointOnly { position }
            | MarkerData::PointPlane { position, .. }
            | MarkerData::PointNormal { position, .. } => position,
        }
    }

    /// Plane through the marker, oriented by the normal when one is known.
    pub fn plane(&self) -> Option<Plane3> {
        match *self {
            MarkerData::PointOnly { .. } => None,
            MarkerData::PointPlane { plane, .. } => Some(plane),
            MarkerData::PointNormal { position, normal } => Plane3::from_point_normal(&position, &normal).ok(),
        }
    }

    pub fn normal(&self) -> Option<Vector3> {
        match *self {
            MarkerData::PointNormal { normal, .. } => Some(normal),
            _ => None,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            MarkerData::PointOnly { .. } => "point",
            MarkerData::PointPlane { .. } => "point_plane",
            MarkerData::PointNormal { .. } => "point_normal",
        }
    }

    pub fn with_position(&self, p: Point3) -> Self {
        match *self {
            MarkerData::PointOnly { .. } => MarkerData::PointOnly { position: p },
            MarkerData::PointPlane { plane, .. } => MarkerData::PointPlane { position: p, plane },
            MarkerData::PointNormal { normal, .. } => MarkerData::PointNormal { position: p, normal },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RefOwner {
    Polyhedron(i64),
    Elaboration(i64),
}

/// Face of a base polyhedron or of an earlier elaboration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FaceRef {
    pub owner: RefOwner,
    pub face: i64,
}

/// Optional metadata. `in_plane_orientation` is carried but never consumed.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MarkerMeta {
    pub face_id: Option<i64>,
    pub polyhedron_id: Option<i64>,
    pub elaboration_id: Option<i64>,
    pub base_face_ref: Option<FaceRef>,
    pub order_index: Option<i64>,
    pub in_plane_orientation: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Marker {
    pub data: MarkerData,
    pub meta: MarkerMeta,
}

impl Marker {
    pub fn new(data: MarkerData) -> Self {
        Self { data, meta: MarkerMeta::default() }
    }

    pub fn position(&self) -> Point3 {
        self.data.position()
    }
}

/// Markers keyed by identifier.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MarkupDescription {
    pub markers: BTreeMap<MarkerId, Marker>,
}

impl MarkupDescription {
    pub fn new() -> Self {
        Self::default()
    }

    /// Assigns ids `0..n` in order.
    pub fn from_markers(markers: impl IntoIterator<Item = Marker>) -> Self {
        Self { markers: markers.into_iter().enumerate().map(|(i, m)| (i as MarkerId, m)).collect() }
    }

    pub fn insert(&mut self, m: Marker) -> MarkerId {
        let id = self.markers.keys().next_back().map_or(0, |k| k + 1);
        self.markers.insert(id, m);
        id
    }

    pub fn len(&self) -> usize {
        self.markers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.markers.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (MarkerId, &Marker)> {
        self.markers.iter().map(|(k, v)| (*k, v))
    }

    pub fn positions(&self) -> Vec<Point3> {
        self.markers.values().map(|m| m.position()).collect()
    }

    pub fn subset(&self, ids: &[MarkerId]) -> Self {
        Self { markers: ids.iter().filter_map(|i| self.markers.get(i).map(|m| (*i, *m))).collect() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Diagnostic {
    NonFinite(MarkerId),
    OffPlane(MarkerId),
    NonUnitNormal(MarkerId),
    DuplicateOrder { face_id: i64, order_index: i64 },
    BaseRefWithoutElaboration(MarkerId),
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::NonFinite(id) => write!(f, "marker {id} has a non-finite coordinate"),
            Diagnostic::OffPlane(id) => write!(f, "marker {id} is not on its plane"),
            Diagnostic::NonUnitNormal(id) => write!(f, "marker {id} has a non-unit normal"),
            Diagnostic::DuplicateOrder { face_id, order_index } => {
                write!(f, "order index {order_index} repeated in face {face_id}")
            }
            Diagnostic::BaseRefWithoutElaboration(id) => {
                write!(f, "marker {id} references a base face but has no elaboration id")
            }
        }
    }
}

/// All invariant violations; empty iff the description is valid.
pub fn validate(d: &MarkupDescription) -> Vec<Diagnostic> {
    let tol = tolerance::geo();
    let mut out = Vec::new();
    let mut orders: HashMap<(i64, i64), usize> = HashMap::new();
    let mut side_orders: HashMap<(i64, i64), i64> = HashMap::new();
    let mut reported: std::collections::HashSet<(i64, i64)> = std::collections::HashSet::new();
    for (id, m) in d.iter() {
        let p = m.position();
        if !p.coords.iter().all(|c| c.is_finite()) {
            out.push(Diagnostic::NonFinite(id));
            continue;
        }
        match m.data {
            MarkerData::PointPlane { plane, position } => {
                if (plane.normal.norm() - 1.0).abs() > tolerance::UNIT * 1e3 {
                    out.push(Diagnostic::NonUnitNormal(id));
                }
                if plane.signed_distance(&position).abs() > tol {
                    out.push(Diagnostic::OffPlane(id));
                }
            }
            MarkerData::PointNormal { normal, .. } => {
                if !normal.iter().all(|c| c.is_finite()) || (normal.norm() - 1.0).abs() > tolerance::UNIT * 1e3 {
                    out.push(Diagnostic::NonUnitNormal(id));
                }
            }
            MarkerData::PointOnly { .. } => {}
        }
        if m.meta.base_face_ref.is_some() && m.meta.elaboration_id.is_none() {
            out.push(Diagnostic::BaseRefWithoutElaboration(id));
        }
        match (m.meta.elaboration_id, m.meta.face_id, m.meta.order_index) {
            // Vertex ordering: one index per vertex within a face.
            (None, Some(f), Some(o)) => {
                let c = orders.entry((f, o)).or_default();
                *c += 1;
                if *c == 2 {
                    out.push(Diagnostic::DuplicateOrder { face_id: f, order_index: o });
                }
            }
            // Side-face ordering: one index per face within an elaboration.
            (Some(e), Some(f), Some(o)) => {
                let prev = side_orders.entry((e, o)).or_insert(f);
                if *prev != f && reported.insert((e, o)) {
                    out.push(Diagnostic::DuplicateOrder { face_id: f, order_index: o });
                }
            }
            _ => {}
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizeOptions {
    pub snap_axis: bool,
    pub merge_coplanar: bool,
    /// Angular threshold in degrees.
    pub snap_degrees: f64,
}

impl Default for NormalizeOptions {
    fn default() -> Self {
        Self { snap_axis: false, merge_coplanar: false, snap_degrees: 3.0 }
    }
}

/// Snaps near-axis planes and normals and averages near-coplanar planes
/// sharing a face id. Merging runs before snapping.
pub fn normalize(d: &MarkupDescription, opts: &NormalizeOptions) -> MarkupDescription {
    let mut out = d.clone();
    let thr = opts.snap_degrees.to_radians();
    if opts.merge_coplanar {
        merge_planes(&mut out, thr);
    }
    if opts.snap_axis {
        for m in out.markers.values_mut() {
            m.data = match m.data {
                MarkerData::PointPlane { position, plane } => {
                    let n = snap_normal(&plane.normal, thr);
                    let off = plane.normal.dot(&position.coords) - plane.offset;
                    let on = position - plane.normal * off;
                    let plane = Plane3 { normal: n, offset: n.dot(&on.coords) };
                    MarkerData::PointPlane { position: plane.project(&position), plane }
                }
                MarkerData::PointNormal { position, normal } => {
                    MarkerData::PointNormal { position, normal: snap_normal(&normal, thr) }
                }
                other => other,
            };
        }
    }
    out
}

fn snap_normal(n: &Vector3, thr: f64) -> Vector3 {
    for i in 0..3 {
        let mut axis = Vector3::zeros();
        axis[i] = n[i].signum();
        if n[i] != 0.0 && n.angle(&axis) <= thr {
            return axis;
        }
    }
    *n
}

fn merge_planes(d: &mut MarkupDescription, thr: f64) {
    let mut groups: BTreeMap<i64, Vec<MarkerId>> = BTreeMap::new();
    for (id, m) in d.iter() {
        if let (Some(f), MarkerData::PointPlane { .. } | MarkerData::PointNormal { .. }) = (m.meta.face_id, m.data) {
            groups.entry(f).or_default().push(id);
        }
    }
    for ids in groups.values() {
        let planes: Vec<(MarkerId, Plane3)> = ids.iter().filter_map(|i| d.markers[i].data.plane().map(|p| (*i, p))).collect();
        let Some(&(_, reference)) = planes.first() else { continue };
        let aligned: Vec<Plane3> = planes
            .iter()
            .map(|(_, p)| if p.normal.dot(&reference.normal) < 0.0 { p.flipped() } else { *p })
            .collect();
        if aligned.iter().any(|p| p.normal.angle(&reference.normal) > thr) {
            continue;
        }
        // Unweighted mean over distinct planes.
        let mut distinct: Vec<Plane3> = Vec::new();
        for p in &aligned {
            if !distinct.iter().any(|q| q.approx_eq(p, tolerance::geo())) {
                distinct.push(*p);
            }
        }
        if distinct.len() < 2 {
            continue;
        }
        let k = distinct.len() as f64;
        let n = distinct.iter().fold(Vector3::zeros(), |a, p| a + p.normal) / k;
        let off = distinct.iter().map(|p| p.offset).sum::<f64>() / k;
        let Ok(avg) = Plane3::new(n, off) else { continue };
        for (id, _) in &planes {
            let m = d.markers.get_mut(id).unwrap();
            m.data = match m.data {
                MarkerData::PointPlane { position, plane } => {
                    let p = if plane.normal.dot(&avg.normal) < 0.0 { avg.flipped() } else { avg };
                    MarkerData::PointPlane { position: p.project(&position), plane: p }
                }
                MarkerData::PointNormal { position, normal } => {
                    let nn = if normal.dot(&avg.normal) < 0.0 { -avg.normal } else { avg.normal };
                    MarkerData::PointNormal { position: avg.project(&position), normal: nn }
                }
                other => other,
            };
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupKey {
    Face,
    Polyhedron,
    Elaboration,
}

impl GroupKey {
    pub fn of(self, m: &MarkerMeta) -> Option<i64> {
        match self {
            GroupKey::Face => m.face_id,
            GroupKey::Polyhedron => m.polyhedron_id,
            GroupKey::Elaboration => m.elaboration_id,
        }
    }
}

/// Partition by a metadata key, ordered by key value.
pub fn group_by(d: &MarkupDescription, key: GroupKey) -> Result<Vec<(i64, Vec<MarkerId>)>> {
    let mut g: BTreeMap<i64, Vec<MarkerId>> = BTreeMap::new();
    for (id, m) in d.iter() {
        let k = key.of(&m.meta).ok_or(Error::MissingKey(id))?;
        g.entry(k).or_default().push(id);
    }
    Ok(g.into_iter().collect())
}
