//! Single convex polyhedra: every orientation of the marker planes.

use super::{meta_consistent, Budget, Owner, Witness};
use crate::error::{Error, Result};
use crate::geometry::halfspace::intersect_with_sources;
use crate::geometry::ring::Location;
use crate::geometry::{canonicalize, HalfSpace3, Plane3, Scene};
use crate::markup::{MarkerData, MarkupDescription};
use crate::tolerance;
use std::collections::BTreeMap;

pub(super) fn enumerate(d: &MarkupDescription, budget: &mut Budget) -> Result<Vec<Witness>> {
    if d.is_empty() {
        return Ok(vec![Witness::Solid(Scene::default())]);
    }
    let tol = tolerance::geo() * 10.0;
    // Distinct planes; `true` when a normal fixes the orientation.
    let mut planes: Vec<(Plane3, bool)> = Vec::new();
    for (id, m) in d.iter() {
        let (pl, fixed) = match m.data {
            MarkerData::PointNormal { .. } => (m.data.plane().ok_or_else(|| Error::Degenerate(format!("marker {id} has a zero normal")))?, true),
            MarkerData::PointPlane { plane, .. } => (plane.unoriented(), false),
            MarkerData::PointOnly { .. } => return Err(Error::Unsupported(format!("marker {id} carries no plane"))),
        };
        match planes.iter_mut().find(|(q, _)| q.same_set(&pl, tol)) {
            Some(slot) if fixed && !slot.1 => *slot = (pl, true),
            Some(slot) if fixed && !slot.0.approx_eq(&pl, tol) => return Ok(Vec::new()),
            Some(_) => {}
            None => planes.push((pl, fixed)),
        }
    }
    let free: Vec<usize> = (0..planes.len()).filter(|&i| !planes[i].1).collect();
    if free.len() >= 63 || (1u64 << free.len()) > budget.remaining() {
        return Err(Error::SearchBudgetExceeded(budget.limit));
    }
    let mut out = Vec::new();
    for bits in 0u64..(1u64 << free.len()) {
        budget.tick()?;
        let oriented: Vec<Plane3> = planes
            .iter()
            .enumerate()
            .map(|(i, (pl, _))| match free.iter().position(|&f| f == i) {
                Some(k) if (bits >> k) & 1 == 1 => pl.flipped(),
                _ => *pl,
            })
            .collect();
        let hs: Vec<HalfSpace3> = oriented.iter().map(|p| HalfSpace3::below(*p)).collect();
        let Ok((poly, _)) = intersect_with_sources(&hs) else { continue };
        let Ok(poly) = canonicalize(&poly) else { continue };
        if !oriented.iter().all(|pl| poly.faces.iter().any(|f| f.plane.approx_eq(pl, tol))) {
            continue;
        }
        let mut owners = BTreeMap::new();
        let mut ok = true;
        for (id, m) in d.iter() {
            let p = m.position();
            let hit = poly.faces.iter().position(|f| {
                f.locate(&p, tol) == Location::Inside && m.data.normal().is_none_or(|n| f.plane.normal.dot(&n) >= tolerance::AXIS.cos())
            });
            match hit {
                Some(face) => {
                    owners.insert(id, Owner { part: 0, face });
                }
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if ok && meta_consistent(d, &owners) {
            out.push(Witness::Solid(Scene::single(poly)));
        }
    }
    Ok(out)
}
