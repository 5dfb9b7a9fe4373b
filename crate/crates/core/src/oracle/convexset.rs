//! Finite sets of convex polyhedra, which may intersect.
//!
//! Candidate parts are the bounded intersections of oriented marker planes
//! in which every chosen plane is a face and every face holds a marker. A
//! reading is a set of distinct candidates together with an assignment of
//! each marker to one face that contains it, covering every face.

use super::{meta_consistent, Budget, Owner, Witness};
use crate::error::{Error, Result};
use crate::geometry::halfspace::intersect_with_sources;
use crate::geometry::ring::Location;
use crate::geometry::{canonicalize, polyhedra_distance, HalfSpace3, Plane3, Polyhedron, Scene};
use crate::markup::{MarkerData, MarkerId, MarkupDescription};
use crate::tolerance;
use std::collections::BTreeMap;

/// Candidate part and, per marker, the faces that could carry it.
struct Candidate {
    solid: Polyhedron,
    faces_of: Vec<Vec<usize>>,
}

/// Past this many candidates the subset search is not attempted.
const MAX_CANDIDATES: usize = 24;

fn planes_of(d: &MarkupDescription) -> Result<Vec<Plane3>> {
    let tol = tolerance::geo() * 10.0;
    let mut planes: Vec<Plane3> = Vec::new();
    for (id, m) in d.iter() {
        let pl = match m.data {
            MarkerData::PointOnly { .. } => return Err(Error::Unsupported(format!("marker {id} carries no plane"))),
            _ => m.data.plane().ok_or_else(|| Error::Degenerate(format!("marker {id} has a zero normal")))?.unoriented(),
        };
        if !planes.iter().any(|q| q.same_set(&pl, tol)) {
            planes.push(pl);
        }
    }
    Ok(planes)
}

fn candidates(d: &MarkupDescription, budget: &mut Budget) -> Result<Vec<Candidate>> {
    let tol = tolerance::geo() * 10.0;
    let planes = planes_of(d)?;
    let total = 3u64.checked_pow(planes.len() as u32).filter(|&n| n <= budget.remaining());
    let Some(total) = total else { return Err(Error::SearchBudgetExceeded(budget.limit)) };
    let markers: Vec<_> = d.iter().map(|(_, m)| *m).collect();
    let mut out: Vec<Candidate> = Vec::new();
    for code in 0..total {
        budget.tick()?;
        // Base-3 digit per plane: absent, as stored, or flipped.
        let mut c = code;
        let mut chosen = Vec::new();
        for pl in &planes {
            match c % 3 {
                1 => chosen.push(*pl),
                2 => chosen.push(pl.flipped()),
                _ => {}
            }
            c /= 3;
        }
        if chosen.len() < 4 {
            continue;
        }
        let hs: Vec<HalfSpace3> = chosen.iter().map(|p| HalfSpace3::below(*p)).collect();
        let Ok((poly, _)) = intersect_with_sources(&hs) else { continue };
        let Ok(solid) = canonicalize(&poly) else { continue };
        if solid.faces.len() != chosen.len() {
            continue;
        }
        let faces_of: Vec<Vec<usize>> = markers
            .iter()
            .map(|m| {
                let p = m.position();
                (0..solid.faces.len())
                    .filter(|&f| {
                        let face = &solid.faces[f];
                        face.locate(&p, tol) == Location::Inside && m.data.normal().is_none_or(|n| face.plane.normal.dot(&n) >= tolerance::AXIS.cos())
                    })
                    .collect()
            })
            .collect();
        let carried = (0..solid.faces.len()).all(|f| faces_of.iter().any(|fs| fs.contains(&f)));
        if carried && !out.iter().any(|o| polyhedra_distance(&o.solid, &solid).is_some_and(|x| x <= tol)) {
            out.push(Candidate { solid, faces_of });
        }
    }
    Ok(out)
}

/// Assigns markers `k..` to faces of the chosen parts; `load` counts the
/// markers already on each (part, face).
fn assign(
    k: usize,
    ids: &[MarkerId],
    chosen: &[&Candidate],
    owners: &mut BTreeMap<MarkerId, Owner>,
    load: &mut BTreeMap<(usize, usize), usize>,
    d: &MarkupDescription,
    budget: &mut Budget,
) -> Result<bool> {
    if k == ids.len() {
        budget.tick()?;
        let covered = chosen.iter().enumerate().all(|(p, c)| (0..c.solid.faces.len()).all(|f| load.get(&(p, f)).is_some_and(|&n| n > 0)));
        return Ok(covered && meta_consistent(d, owners));
    }
    // A face still empty needs at least as many markers left as empty faces.
    let empty = chosen.iter().enumerate().map(|(p, c)| (0..c.solid.faces.len()).filter(|&f| load.get(&(p, f)).is_none_or(|&n| n == 0)).count()).sum::<usize>();
    if empty > ids.len() - k {
        return Ok(false);
    }
    for (p, c) in chosen.iter().enumerate() {
        for &f in &c.faces_of[k] {
            owners.insert(ids[k], Owner { part: p, face: f });
            *load.entry((p, f)).or_default() += 1;
            let ok = assign(k + 1, ids, chosen, owners, load, d, budget)?;
            *load.get_mut(&(p, f)).expect("just incremented") -= 1;
            owners.remove(&ids[k]);
            if ok {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

pub(super) fn enumerate(d: &MarkupDescription, budget: &mut Budget) -> Result<Vec<Witness>> {
    if d.is_empty() {
        return Ok(vec![Witness::Solid(Scene::default())]);
    }
    let cands = candidates(d, budget)?;
    if cands.len() > MAX_CANDIDATES || (1u64 << cands.len()) > budget.remaining() {
        return Err(Error::SearchBudgetExceeded(budget.limit));
    }
    let ids: Vec<MarkerId> = d.iter().map(|(id, _)| id).collect();
    let mut out = Vec::new();
    for bits in 1u64..(1u64 << cands.len()) {
        budget.tick()?;
        let chosen: Vec<&Candidate> = (0..cands.len()).filter(|&i| (bits >> i) & 1 == 1).map(|i| &cands[i]).collect();
        if (0..ids.len()).any(|k| chosen.iter().all(|c| c.faces_of[k].is_empty())) {
            continue;
        }
        let mut owners = BTreeMap::new();
        let mut load = BTreeMap::new();
        if assign(0, &ids, &chosen, &mut owners, &mut load, d, budget)? {
            out.push(Witness::Solid(Scene::new(chosen.iter().map(|c| c.solid.clone()).collect())));
        }
    }
    Ok(out)
}
