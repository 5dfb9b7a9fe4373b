//! Planar classes: rectangle sets and convex polygon sets.
//!
//! Candidate parts are generated from the marker lines, filtered to those
//! whose every edge carries a matching marker and whose closure holds no
//! other marker. Rectangles are combined by an exact cover of the markers
//! with closure-disjoint parts. Convex polygons only need interior-disjoint
//! parts, so two of them may share a stretch of boundary and the markers on it.

use super::{meta_consistent, Budget, Owner, Witness};
use crate::error::{Error, Result};
use crate::geometry::{cmp_point2, orient2, Point2, Polygon2, Vector2};
use crate::markup::{MarkerData, MarkerId, MarkupDescription};
use crate::tolerance;
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy)]
struct Mark {
    id: MarkerId,
    p: Point2,
    n: Vector2,
    /// False for a line marker, which matches either side of its edge.
    oriented: bool,
}

impl Mark {
    fn aligned(&self, outward: &Vector2, cos: f64) -> bool {
        let c = outward.dot(&self.n);
        c >= cos || (!self.oriented && -c >= cos)
    }
}

fn marks(d: &MarkupDescription, lines_allowed: bool) -> Result<Vec<Mark>> {
    let s = tolerance::AXIS.sin();
    d.iter()
        .map(|(id, m)| {
            let (position, normal, oriented) = match m.data {
                MarkerData::PointNormal { position, normal } => (position, normal, true),
                MarkerData::PointPlane { position, plane } if lines_allowed => (position, plane.normal, false),
                _ if lines_allowed => return Err(Error::Unsupported(format!("marker {id} carries no line"))),
                _ => return Err(Error::Unsupported(format!("marker {id} is not point-normal"))),
            };
            if normal.z.abs() > s {
                return Err(Error::Unsupported(format!("marker {id} has a normal outside the plane")));
            }
            let n = Vector2::new(normal.x, normal.y).normalize();
            Ok(Mark { id, p: Point2::new(position.x, position.y), n, oriented })
        })
        .collect()
}

/// A convex part with counter-clockwise vertices and the markers on each edge.
#[derive(Debug, Clone)]
struct Part {
    ring: Vec<Point2>,
    edge_of: Vec<(usize, usize)>,
}

/// Assigns markers in the closure of `ring` to edges. `None` when a marker
/// is interior, sits on a vertex or disagrees with its edge, or an edge
/// carries no marker.
fn fit(ring: &[Point2], ms: &[Mark], tol: f64) -> Option<Part> {
    let k = ring.len();
    let cos = tolerance::AXIS.cos();
    let mut edge_of = Vec::new();
    let mut used = vec![false; k];
    for (mi, m) in ms.iter().enumerate() {
        let mut inside = true;
        let mut on: Option<usize> = None;
        for e in 0..k {
            let (a, b) = (ring[e], ring[(e + 1) % k]);
            let len = (b - a).norm();
            let side = orient2(&a, &b, &m.p) / len;
            if side < -tol {
                inside = false;
                break;
            }
            if side <= tol {
                on = Some(e);
            }
        }
        if !inside {
            continue;
        }
        let e = on?;
        let (a, b) = (ring[e], ring[(e + 1) % k]);
        let t = (m.p - a).dot(&(b - a)) / (b - a).norm_squared();
        let len = (b - a).norm();
        let outward = Vector2::new(b.y - a.y, a.x - b.x) / len;
        if t * len <= tol || (1.0 - t) * len <= tol || !m.aligned(&outward, cos) {
            return None;
        }
        used[e] = true;
        edge_of.push((mi, e));
    }
    used.iter().all(|&u| u).then(|| Part { ring: ring.to_vec(), edge_of })
}

/// Some edge normal separates the closures by more than `tol` or, when
/// `touching` is allowed, the interiors by at least `-tol`.
fn separated(a: &[Point2], b: &[Point2], touching: bool, tol: f64) -> bool {
    let gap = if touching { -tol } else { tol };
    let axes = |r: &[Point2]| -> Vec<Vector2> {
        (0..r.len())
            .map(|i| {
                let e = r[(i + 1) % r.len()] - r[i];
                Vector2::new(e.y, -e.x).normalize()
            })
            .collect()
    };
    axes(a).into_iter().chain(axes(b)).any(|n| {
        let span = |r: &[Point2]| r.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(n.dot(&p.coords)), hi.max(n.dot(&p.coords))));
        let ((a0, a1), (b0, b1)) = (span(a), span(b));
        a1 + gap < b0 || b1 + gap < a0
    })
}

/// How chosen parts may relate to one another.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Packing {
    /// Closures disjoint; every marker on exactly one part.
    Exact,
    /// Interiors disjoint; a marker may lie on the shared boundary of two parts.
    Shared,
}

fn cover(d: &MarkupDescription, ms: &[Mark], parts: &[Part], packing: Packing, tol: f64, budget: &mut Budget) -> Result<Vec<Witness>> {
    let mut by_mark: Vec<Vec<usize>> = vec![Vec::new(); ms.len()];
    for (pi, p) in parts.iter().enumerate() {
        for &(mi, _) in &p.edge_of {
            by_mark[mi].push(pi);
        }
    }
    let mut search = Search { d, ms, parts, by_mark, packing, tol, chosen: Vec::new(), covered: vec![0; ms.len()], out: Vec::new() };
    search.run(budget)?;
    Ok(search.out)
}

struct Search<'a> {
    d: &'a MarkupDescription,
    ms: &'a [Mark],
    parts: &'a [Part],
    by_mark: Vec<Vec<usize>>,
    packing: Packing,
    tol: f64,
    chosen: Vec<usize>,
    /// Number of chosen parts holding each marker.
    covered: Vec<usize>,
    out: Vec<Witness>,
}

impl Search<'_> {
    fn run(&mut self, budget: &mut Budget) -> Result<()> {
        budget.tick()?;
        let Some(next) = self.covered.iter().position(|&c| c == 0) else {
            let parts: Vec<&Part> = self.chosen.iter().map(|&pi| &self.parts[pi]).collect();
            if owners_for(self.d, self.ms, &parts, labelled(self.d), budget)?.is_some() {
                let mut polys: Vec<Polygon2> = parts.iter().map(|p| Polygon2::simple(p.ring.clone())).collect();
                polys.sort_by(|a, b| cmp_point2(&lowest(&a.outer), &lowest(&b.outer), self.tol));
                self.out.push(Witness::Planar(polys));
            }
            return Ok(());
        };
        for k in 0..self.by_mark[next].len() {
            let pi = self.by_mark[next][k];
            let part = &self.parts[pi];
            if self.packing == Packing::Exact && part.edge_of.iter().any(|&(mi, _)| self.covered[mi] > 0) {
                continue;
            }
            let touching = self.packing == Packing::Shared;
            if !self.chosen.iter().all(|&c| separated(&self.parts[c].ring, &part.ring, touching, self.tol)) {
                continue;
            }
            for &(mi, _) in &part.edge_of {
                self.covered[mi] += 1;
            }
            self.chosen.push(pi);
            self.run(budget)?;
            self.chosen.pop();
            for &(mi, _) in &self.parts[pi].edge_of {
                self.covered[mi] -= 1;
            }
        }
        Ok(())
    }
}

fn labelled(d: &MarkupDescription) -> bool {
    d.iter().any(|(_, m)| m.meta.polyhedron_id.is_some() || m.meta.face_id.is_some())
}

/// One owning (part, edge) per marker, consistent with the metadata of `d`.
/// With `exclusive`, every edge must also own a marker of its own.
fn owners_for(d: &MarkupDescription, ms: &[Mark], parts: &[&Part], exclusive: bool, budget: &mut Budget) -> Result<Option<BTreeMap<MarkerId, Owner>>> {
    let mut options: Vec<Vec<Owner>> = vec![Vec::new(); ms.len()];
    for (slot, p) in parts.iter().enumerate() {
        for &(mi, e) in &p.edge_of {
            options[mi].push(Owner { part: slot, face: e });
        }
    }
    let edges: Vec<(usize, usize)> = parts.iter().enumerate().flat_map(|(slot, p)| (0..p.ring.len()).map(move |e| (slot, e))).collect();
    let mut owners = BTreeMap::new();
    let mut load: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let found = assign(0, d, ms, &options, &edges, exclusive, &mut owners, &mut load, budget)?;
    Ok(found.then_some(owners))
}

#[allow(clippy::too_many_arguments)]
fn assign(
    k: usize,
    d: &MarkupDescription,
    ms: &[Mark],
    options: &[Vec<Owner>],
    edges: &[(usize, usize)],
    exclusive: bool,
    owners: &mut BTreeMap<MarkerId, Owner>,
    load: &mut BTreeMap<(usize, usize), usize>,
    budget: &mut Budget,
) -> Result<bool> {
    if k == ms.len() {
        budget.tick()?;
        let covered = !exclusive || edges.iter().all(|e| load.get(e).is_some_and(|&n| n > 0));
        return Ok(covered && meta_consistent(d, owners));
    }
    for &o in &options[k] {
        owners.insert(ms[k].id, o);
        *load.entry((o.part, o.face)).or_default() += 1;
        let ok = assign(k + 1, d, ms, options, edges, exclusive, owners, load, budget)?;
        *load.get_mut(&(o.part, o.face)).expect("just incremented") -= 1;
        if ok {
            return Ok(true);
        }
        owners.remove(&ms[k].id);
        // Without metadata or exclusivity any owner will do.
        if !exclusive && !labelled(d) {
            break;
        }
    }
    Ok(false)
}

/// The markers of `d` with `polyhedron_id` naming a part of `polys` on whose
/// boundary they lie, chosen so that every edge owns one. `None` when
/// no such labelling exists.
pub(super) fn label_polygons(d: &MarkupDescription, polys: &[Polygon2]) -> Result<Option<MarkupDescription>> {
    let ms = marks(d, true)?;
    let tol = planar_tol();
    let mut parts = Vec::with_capacity(polys.len());
    for poly in polys {
        let mut ring = poly.outer.clone();
        if crate::geometry::ring::signed_area(&ring) < 0.0 {
            ring.reverse();
        }
        let cos = tolerance::AXIS.cos();
        let k = ring.len();
        let mut edge_of = Vec::new();
        for (mi, m) in ms.iter().enumerate() {
            for e in 0..k {
                let (a, b) = (ring[e], ring[(e + 1) % k]);
                let len = (b - a).norm();
                let t = (m.p - a).dot(&(b - a)) / (len * len);
                let outward = Vector2::new(b.y - a.y, a.x - b.x) / len;
                if (orient2(&a, &b, &m.p) / len).abs() <= tol && t * len > tol && (1.0 - t) * len > tol && m.aligned(&outward, cos) {
                    edge_of.push((mi, e));
                }
            }
        }
        parts.push(Part { ring, edge_of });
    }
    let refs: Vec<&Part> = parts.iter().collect();
    let mut budget = Budget::new(super::DEFAULT_BUDGET);
    let Some(owners) = owners_for(&MarkupDescription::default(), &ms, &refs, true, &mut budget)? else { return Ok(None) };
    let mut out = d.clone();
    for (id, m) in out.markers.iter_mut() {
        let o = owners.get(id);
        m.meta.polyhedron_id = o.map(|o| o.part as i64);
    }
    Ok(Some(out))
}

fn lowest(r: &[Point2]) -> Point2 {
    r.iter().copied().min_by(|a, b| a.y.total_cmp(&b.y).then(a.x.total_cmp(&b.x))).unwrap_or_else(Point2::origin)
}

fn planar_tol() -> f64 {
    tolerance::geo() * 10.0
}

/// Closure-disjoint axis-aligned rectangle sets.
pub(super) fn enumerate_rects(d: &MarkupDescription, budget: &mut Budget) -> Result<Vec<Witness>> {
    let ms = marks(d, false)?;
    if ms.is_empty() {
        return Ok(vec![Witness::Planar(Vec::new())]);
    }
    let tol = planar_tol();
    let s = tolerance::AXIS.sin();
    let mut sides: [Vec<f64>; 4] = Default::default(); // left, right, bottom, top
    for m in &ms {
        let slot = if m.n.y.abs() <= s {
            if m.n.x < 0.0 { 0 } else { 1 }
        } else if m.n.x.abs() <= s {
            if m.n.y < 0.0 { 2 } else { 3 }
        } else {
            return Err(Error::NonAxisNormal(m.id));
        };
        sides[slot].push(if slot < 2 { m.p.x } else { m.p.y });
    }
    for v in &mut sides {
        v.sort_by(f64::total_cmp);
        v.dedup_by(|a, b| (*a - *b).abs() <= tol);
    }
    let mut parts = Vec::new();
    for &x0 in &sides[0] {
        for &x1 in sides[1].iter().filter(|&&x| x > x0 + tol) {
            for &y0 in &sides[2] {
                for &y1 in sides[3].iter().filter(|&&y| y > y0 + tol) {
                    budget.tick()?;
                    let ring = vec![Point2::new(x0, y0), Point2::new(x1, y0), Point2::new(x1, y1), Point2::new(x0, y1)];
                    if let Some(p) = fit(&ring, &ms, tol) {
                        parts.push(p);
                    }
                }
            }
        }
    }
    cover(d, &ms, &parts, Packing::Exact, tol, budget)
}

/// Oriented marker line `n · x = c`, outward normal `n`.
#[derive(Debug, Clone, Copy)]
struct Line {
    n: Vector2,
    c: f64,
}

fn clip(ring: &[Point2], l: &Line) -> Vec<Point2> {
    let f = |p: &Point2| l.n.dot(&p.coords) - l.c;
    let mut out = Vec::with_capacity(ring.len() + 1);
    for i in 0..ring.len() {
        let (p, q) = (ring[i], ring[(i + 1) % ring.len()]);
        let (fp, fq) = (f(&p), f(&q));
        if fp <= 0.0 {
            out.push(p);
        }
        if (fp < 0.0 && fq > 0.0) || (fp > 0.0 && fq < 0.0) {
            out.push(p + (q - p) * (fp / (fp - fq)));
        }
    }
    out
}

fn tidy(ring: Vec<Point2>, tol: f64) -> Vec<Point2> {
    let mut r: Vec<Point2> = Vec::with_capacity(ring.len());
    for p in ring {
        if r.last().is_none_or(|q| (p - q).norm() > tol) {
            r.push(p);
        }
    }
    while r.len() > 1 && (r[0] - r[r.len() - 1]).norm() <= tol {
        r.pop();
    }
    crate::geometry::ring::remove_collinear(&r, tol)
}

/// Whether line `l` carries an edge of positive length of `ring`.
fn supports(ring: &[Point2], l: &Line, tol: f64) -> bool {
    let on: Vec<&Point2> = ring.iter().filter(|p| (l.n.dot(&p.coords) - l.c).abs() <= tol).collect();
    on.len() >= 2 && on.iter().any(|a| on.iter().any(|b| (*a - *b).norm() > tol))
}

/// Interior-disjoint convex polygon sets whose edges lie on marker lines.
pub(super) fn enumerate_polygons(d: &MarkupDescription, budget: &mut Budget) -> Result<Vec<Witness>> {
    let ms = marks(d, true)?;
    if ms.is_empty() {
        return Ok(vec![Witness::Planar(Vec::new())]);
    }
    let tol = planar_tol();
    let cos = tolerance::AXIS.cos();
    let mut lines: Vec<Line> = Vec::new();
    for m in &ms {
        let sides: &[f64] = if m.oriented { &[1.0] } else { &[1.0, -1.0] };
        for &sign in sides {
            let n = m.n * sign;
            let l = Line { n, c: n.dot(&m.p.coords) };
            if !lines.iter().any(|o| o.n.dot(&l.n) >= cos && (o.c - l.c).abs() <= tol) {
                lines.push(l);
            }
        }
    }
    let (mut lo, mut hi) = (ms[0].p, ms[0].p);
    for m in &ms {
        lo = lo.inf(&m.p);
        hi = hi.sup(&m.p);
    }
    let reach = (hi - lo).norm().max(1.0) * 1e3;
    let c = nalgebra::center(&lo, &hi);
    let frame = vec![
        Point2::new(c.x - reach, c.y - reach),
        Point2::new(c.x + reach, c.y - reach),
        Point2::new(c.x + reach, c.y + reach),
        Point2::new(c.x - reach, c.y + reach),
    ];
    let mut parts = Vec::new();
    let mut chosen = Vec::new();
    grow(&lines, &ms, &frame, (c, reach * 0.5), 0, &mut chosen, tol, budget, &mut parts)?;
    cover(d, &ms, &parts, Packing::Shared, tol, budget)
}

#[allow(clippy::too_many_arguments)]
fn grow(
    lines: &[Line],
    ms: &[Mark],
    ring: &[Point2],
    bound: (Point2, f64),
    start: usize,
    chosen: &mut Vec<usize>,
    tol: f64,
    budget: &mut Budget,
    parts: &mut Vec<Part>,
) -> Result<()> {
    for i in start..lines.len() {
        budget.tick()?;
        let next = tidy(clip(ring, &lines[i]), tol);
        if next.len() < 3 || crate::geometry::ring::signed_area(&next) <= tol * tol {
            continue;
        }
        chosen.push(i);
        // A line that no longer carries an edge never will again.
        if chosen.iter().all(|&j| supports(&next, &lines[j], tol)) {
            let bounded = next.iter().all(|p| (p.x - bound.0.x).abs() < bound.1 && (p.y - bound.0.y).abs() < bound.1);
            if bounded && chosen.len() == next.len() {
                if let Some(p) = fit(&next, ms, tol) {
                    parts.push(p);
                }
            }
            grow(lines, ms, &next, bound, i + 1, chosen, tol, budget, parts)?;
        }
        chosen.pop();
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::super::{catalog_instance, enumerate_consistent, CandidateSpace, ModelClass};
    use crate::recon::convex::reconstruct_convex;

    #[test]
    fn sliding_quadrilateral_has_two_readings_until_labelled() {
        let c = catalog_instance("convex-polygon-slide").unwrap();
        assert!(c.witnesses.len() >= 2, "{} readings", c.witnesses.len());
        assert!(reconstruct_convex(&c.markup).is_err());
        for i in 0..c.witnesses.len() {
            let labelled = c.with_part_ids(i);
            assert!(labelled.iter().all(|(_, m)| m.meta.polyhedron_id.is_some()));
            let ws = enumerate_consistent(&labelled, &CandidateSpace::new(&labelled, ModelClass::ConvexPolygonSet2d)).unwrap();
            assert_eq!(ws.len(), 1, "reading {i}: {ws:?}");
            assert!(ws[0].same_as(&c.witnesses[i], 1e-6));
        }
    }

    #[test]
    fn oriented_markers_forbid_the_slide() {
        let c = catalog_instance("convex-polygon-slide").unwrap();
        let mut d = c.markup.clone();
        for m in d.markers.values_mut() {
            let (p, n) = (m.position(), m.data.plane().unwrap().normal);
            m.data = crate::markup::MarkerData::PointNormal { position: p, normal: n };
        }
        let ws = enumerate_consistent(&d, &CandidateSpace::new(&d, ModelClass::ConvexPolygonSet2d)).unwrap();
        assert!(ws.len() < c.witnesses.len());
    }
}
