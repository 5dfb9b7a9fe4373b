//! Convex polyhedra from one plane-carrying marker per face.

use super::{Outcome, Warning};
use crate::error::{Error, Result};
use crate::geometry::halfspace::intersect_with_sources;
use crate::geometry::{side_containing, HalfSpace3, Polyhedron, Scene};
use crate::markup::{group_by, GroupKey, MarkerData, MarkerId, MarkupDescription};
use crate::tolerance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ConvexOptions {
    /// Turn redundant-plane warnings into errors.
    pub strict: bool,
}

/// Half-space of each marker: the normal fixes it directly, a bare plane
/// takes the side holding every other marker.
pub fn marker_halfspaces(d: &MarkupDescription) -> Result<Vec<(MarkerId, HalfSpace3)>> {
    let positions: Vec<(MarkerId, crate::geometry::Point3)> = d.iter().map(|(id, m)| (id, m.position())).collect();
    let mut out = Vec::with_capacity(d.len());
    for (id, m) in d.iter() {
        let hs = match m.data {
            MarkerData::PointNormal { .. } => HalfSpace3::below(m.data.plane().ok_or_else(|| Error::Degenerate(format!("marker {id} has a zero normal")))?),
            MarkerData::PointPlane { plane, .. } => {
                let others: Vec<_> = positions.iter().filter(|(o, _)| *o != id).map(|(_, p)| *p).collect();
                if others.is_empty() {
                    return Err(Error::Degenerate(format!("marker {id} has no other marker to orient its plane")));
                }
                let fit = side_containing(&plane, &others)?;
                if fit.degenerate {
                    return Err(Error::Degenerate(format!("every marker lies on the plane of marker {id}")));
                }
                fit.halfspace
            }
            MarkerData::PointOnly { .. } => {
                return Err(Error::Unsupported(format!("marker {id} carries no plane")));
            }
        };
        out.push((id, hs));
    }
    Ok(out)
}

pub fn reconstruct_convex(d: &MarkupDescription) -> Result<Polyhedron> {
    reconstruct_convex_with(d, ConvexOptions::default()).map(|o| o.value)
}

pub fn reconstruct_convex_with(d: &MarkupDescription, opts: ConvexOptions) -> Result<Outcome<Polyhedron>> {
    if d.is_empty() {
        return Err(Error::Empty);
    }
    let hs = marker_halfspaces(d)?;
    let spaces: Vec<HalfSpace3> = hs.iter().map(|(_, h)| *h).collect();
    let (poly, _sources) = intersect_with_sources(&spaces)?;
    let tol = tolerance::geo() * 10.0;
    let mut warnings = Vec::new();
    for (id, h) in &hs {
        let outward = h.outward();
        if !poly.faces.iter().any(|f| f.plane.approx_eq(&outward, tol)) {
            if opts.strict {
                return Err(Error::RedundantPlane(*id));
            }
            warnings.push(Warning::RedundantPlane(*id));
        }
    }
    Ok(Outcome { value: poly, warnings })
}

/// One convex polyhedron per polyhedron id, ordered by id.
pub fn reconstruct_convex_multi(d: &MarkupDescription) -> Result<Scene> {
    reconstruct_convex_multi_with(d, ConvexOptions::default()).map(|o| o.value)
}

pub fn reconstruct_convex_multi_with(d: &MarkupDescription, opts: ConvexOptions) -> Result<Outcome<Scene>> {
    let groups = group_by(d, GroupKey::Polyhedron)?;
    let mut scene = Scene::default();
    let mut warnings = Vec::new();
    for (pid, ids) in groups {
        let sub = d.subset(&ids);
        let o = reconstruct_convex_with(&sub, opts).map_err(|e| e.in_group(pid))?;
        scene.polyhedra.push(o.value);
        warnings.extend(o.warnings);
    }
    Ok(Outcome { value: scene, warnings })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::shapes::cuboid;
    use crate::geometry::{scenes_equal, Plane3, Point3, Vector3};
    use crate::markup::Marker;
    use crate::placement::{place_per_face, DataKind, PlacementPolicy};

    fn cube() -> Polyhedron {
        cuboid(Point3::origin(), Point3::new(1.0, 1.0, 1.0))
    }

    #[test]
    fn cube_from_centroids() {
        let d = place_per_face(&Scene::single(cube()), &PlacementPolicy::default(), DataKind::PointPlane).unwrap();
        let p = reconstruct_convex(&d).unwrap();
        assert!(scenes_equal(&Scene::single(p), &Scene::single(cube()), 1e-9));
    }

    #[test]
    fn simplex_from_face_centroids() {
        let v = [Point3::origin(), Point3::new(1., 0., 0.), Point3::new(0., 1., 0.), Point3::new(0., 0., 1.)];
        let faces = [[0, 2, 1], [0, 1, 3], [0, 3, 2], [1, 2, 3]];
        let mut d = MarkupDescription::new();
        for f in faces {
            let c = Point3::from((v[f[0]].coords + v[f[1]].coords + v[f[2]].coords) / 3.0);
            let plane = Plane3::from_points(&v[f[0]], &v[f[1]], &v[f[2]]).unwrap().unoriented();
            d.insert(Marker::new(MarkerData::PointPlane { position: c, plane }));
        }
        let p = reconstruct_convex(&d).unwrap();
        let mut got = p.vertices();
        got.sort_by(|a, b| crate::geometry::cmp_point3(a, b, 1e-9));
        let mut want = v.to_vec();
        want.sort_by(|a, b| crate::geometry::cmp_point3(a, b, 1e-9));
        assert!(got.iter().zip(&want).all(|(a, b)| (a - b).norm() < 1e-12));
    }

    #[test]
    fn extra_markers_do_not_change_result() {
        let s = Scene::single(cube());
        let one = place_per_face(&s, &PlacementPolicy::default(), DataKind::PointPlane).unwrap();
        let many = place_per_face(&s, &PlacementPolicy::random(9, 3), DataKind::PointPlane).unwrap();
        let a = reconstruct_convex(&one).unwrap();
        let b = reconstruct_convex(&many).unwrap();
        assert!(scenes_equal(&Scene::single(a), &Scene::single(b), 1e-9));
    }

    #[test]
    fn redundant_plane_warns_or_fails() {
        let s = Scene::single(cube());
        let mut d = place_per_face(&s, &PlacementPolicy::default(), DataKind::PointNormal).unwrap();
        let n = Vector3::new(1.0, 1.0, 1.0).normalize();
        let id = d.insert(Marker::new(MarkerData::PointNormal { position: Point3::new(2.0, 2.0, 2.0), normal: n }));
        let o = reconstruct_convex_with(&d, ConvexOptions::default()).unwrap();
        assert_eq!(o.warnings, vec![Warning::RedundantPlane(id)]);
        assert_eq!(reconstruct_convex_with(&d, ConvexOptions { strict: true }).unwrap_err(), Error::RedundantPlane(id));
    }

    #[test]
    fn open_markup_is_unbounded() {
        let s = Scene::single(cube());
        let d = place_per_face(&s, &PlacementPolicy::default(), DataKind::PointNormal).unwrap();
        let top: Vec<_> = d.iter().filter(|(_, m)| m.position().z < 0.99).map(|(i, _)| i).collect();
        assert_eq!(reconstruct_convex(&d.subset(&top)).unwrap_err(), Error::Unbounded);
    }

    #[test]
    fn multi_requires_ids() {
        let s = Scene::new(vec![cube(), cuboid(Point3::new(3., 0., 0.), Point3::new(4., 1., 1.))]);
        let d = place_per_face(&s, &PlacementPolicy::default(), DataKind::PointPlane).unwrap();
        let got = reconstruct_convex_multi(&d).unwrap();
        assert!(scenes_equal(&got, &s, 1e-9));
        let stripped = place_per_face(&s, &PlacementPolicy::default().with_meta(crate::placement::MetaPlan::none()), DataKind::PointPlane).unwrap();
        assert!(matches!(reconstruct_convex_multi(&stripped), Err(Error::MissingKey(_))));
    }
}
