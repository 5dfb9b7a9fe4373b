//! Axis-aligned rectangle sets from point-normal markers on their edges.
//!
//! Coordinates are compared exactly after snapping to the tolerance grid.

use crate::error::{Error, Result};
use crate::geometry::{Point2, Polygon2};
use crate::markup::{MarkerData, MarkerId, MarkupDescription};
use crate::tolerance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EdgeClass {
    Left,
    Right,
    Top,
    Bottom,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Marker2N {
    pub id: MarkerId,
    pub position: Point2,
    pub class: EdgeClass,
    kx: i64,
    ky: i64,
}

impl Marker2N {
    pub fn new(id: MarkerId, position: Point2, class: EdgeClass) -> Self {
        Self { id, position, class, kx: tolerance::snap_key(position.x), ky: tolerance::snap_key(position.y) }
    }
}

/// Classifies point-normal markers by the direction of their normal.
pub fn classify(d: &MarkupDescription) -> Result<Vec<Marker2N>> {
    let n = d.len();
    d.iter()
        .map(|(id, m)| {
            let MarkerData::PointNormal { position, normal } = m.data else {
                return Err(Error::NoConsistentSeed { remaining: n });
            };
            let s = tolerance::AXIS.sin();
            let class = if normal.y.abs() <= s && normal.z.abs() <= s {
                if normal.x > 0.0 { EdgeClass::Right } else { EdgeClass::Left }
            } else if normal.x.abs() <= s && normal.z.abs() <= s {
                if normal.y > 0.0 { EdgeClass::Top } else { EdgeClass::Bottom }
            } else {
                return Err(Error::NoConsistentSeed { remaining: n });
            };
            Ok(Marker2N::new(id, Point2::new(position.x, position.y), class))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub min: Point2,
    pub max: Point2,
}

impl Rect {
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Self { min: Point2::new(x0.min(x1), y0.min(y1)), max: Point2::new(x0.max(x1), y0.max(y1)) }
    }

    pub fn area(&self) -> f64 {
        (self.max.x - self.min.x) * (self.max.y - self.min.y)
    }

    pub fn polygon(&self) -> Polygon2 {
        Polygon2::rect(self.min.x, self.min.y, self.max.x, self.max.y)
    }

    fn keys(&self) -> [i64; 4] {
        [
            tolerance::snap_key(self.min.x),
            tolerance::snap_key(self.min.y),
            tolerance::snap_key(self.max.x),
            tolerance::snap_key(self.max.y),
        ]
    }
}

/// Rectangles sorted lexicographically by their snapped corners.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RectSet {
    pub rects: Vec<Rect>,
}

impl RectSet {
    pub fn new(mut rects: Vec<Rect>) -> Self {
        rects.sort_by_key(|r| r.keys());
        Self { rects }
    }

    /// Exact equality on the tolerance grid.
    pub fn same_as(&self, other: &RectSet) -> bool {
        self.rects.len() == other.rects.len() && self.rects.iter().zip(&other.rects).all(|(a, b)| a.keys() == b.keys())
    }
}

/// Smallest axis-aligned rectangle containing all markers; the flag is set
/// when it has zero area.
pub fn bounding_rect(markers: &[Marker2N]) -> Option<(Rect, bool)> {
    let f = markers.first()?;
    let mut r = Rect { min: f.position, max: f.position };
    for m in markers {
        r.min = Point2::new(r.min.x.min(m.position.x), r.min.y.min(m.position.y));
        r.max = Point2::new(r.max.x.max(m.position.x), r.max.y.max(m.position.y));
    }
    let flat = tolerance::snap_key(r.max.x) == tolerance::snap_key(r.min.x) || tolerance::snap_key(r.max.y) == tolerance::snap_key(r.min.y);
    Some((r, flat))
}

/// Snapped rectangle `[x0, x1] × [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct KRect {
    x0: i64,
    y0: i64,
    x1: i64,
    y1: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Relation {
    Outside,
    /// On an edge, in its relative interior, with the matching normal.
    Aligned,
    /// Strictly inside, on a corner, or on an edge with another normal.
    Interior,
}

fn relation(r: &KRect, m: &Marker2N) -> Relation {
    let (x, y) = (m.kx, m.ky);
    if x < r.x0 || x > r.x1 || y < r.y0 || y > r.y1 {
        return Relation::Outside;
    }
    let on_v = x == r.x0 || x == r.x1;
    let on_h = y == r.y0 || y == r.y1;
    if !on_v && !on_h {
        return Relation::Interior;
    }
    if on_v && on_h {
        return Relation::Interior;
    }
    let aligned = match m.class {
        EdgeClass::Left => x == r.x0,
        EdgeClass::Right => x == r.x1,
        EdgeClass::Top => y == r.y1,
        EdgeClass::Bottom => y == r.y0,
    };
    if aligned {
        Relation::Aligned
    } else {
        Relation::Interior
    }
}

fn strictly_inside(r: &KRect, m: &Marker2N) -> bool {
    m.kx > r.x0 && m.kx < r.x1 && m.ky > r.y0 && m.ky < r.y1
}

/// Candidate scan state for one seed search.
#[derive(Debug, Clone)]
pub struct SeedSearchState {
    pub left: Marker2N,
    pub top_candidates: Vec<Marker2N>,
    pub bottom_candidates: Vec<Marker2N>,
}

impl SeedSearchState {
    pub fn new(markers: &[Marker2N]) -> Option<Self> {
        let left = *markers
            .iter()
            .filter(|m| m.class == EdgeClass::Left)
            .min_by(|a, b| a.kx.cmp(&b.kx).then(b.ky.cmp(&a.ky)))?;
        let by_x_then_top = |a: &Marker2N, b: &Marker2N| a.kx.cmp(&b.kx).then(b.ky.cmp(&a.ky));
        let mut top_candidates: Vec<Marker2N> =
            markers.iter().filter(|m| m.class == EdgeClass::Top && m.kx > left.kx && m.ky > left.ky).copied().collect();
        top_candidates.sort_by(by_x_then_top);
        let s: Vec<Marker2N> =
            markers.iter().filter(|m| m.class == EdgeClass::Bottom && m.kx > left.kx && m.ky < left.ky).copied().collect();
        let mut bottom_candidates: Vec<Marker2N> =
            s.iter().filter(|b| !s.iter().any(|o| o.ky > b.ky && o.kx <= b.kx)).copied().collect();
        bottom_candidates.sort_by(by_x_then_top);
        Some(Self { left, top_candidates, bottom_candidates })
    }
}

/// The unique rectangle through the top-most of the left-most left markers
/// with an aligned marker on each edge and no marker in its interior.
pub fn find_seed_rectangle(markers: &[Marker2N]) -> Result<Rect> {
    seed(markers).map(|(r, _)| r)
}

fn seed(markers: &[Marker2N]) -> Result<(Rect, KRect)> {
    let fail = Error::NoConsistentSeed { remaining: markers.len() };
    let st = SeedSearchState::new(markers).ok_or(fail.clone())?;
    let ml = st.left;
    let mut vx: Vec<i64> = markers.iter().filter(|m| matches!(m.class, EdgeClass::Left | EdgeClass::Right)).map(|m| m.kx).collect();
    vx.sort_unstable();
    vx.dedup();
    let mut hy: Vec<i64> = markers.iter().filter(|m| matches!(m.class, EdgeClass::Top | EdgeClass::Bottom)).map(|m| m.ky).collect();
    hy.sort_unstable();
    hy.dedup();
    let next_x = |x: i64| vx.iter().copied().find(|&v| v > x);
    let prev_y = |y: i64| hy.iter().rev().copied().find(|&v| v < y);
    for t in &st.top_candidates {
        // Smallest grid rectangle with ml on its left edge and t on its top edge.
        let (Some(x1), Some(y0)) = (next_x(t.kx), prev_y(ml.ky)) else { continue };
        let r0 = KRect { x0: ml.kx, y0, x1, y1: t.ky };
        if markers.iter().any(|m| strictly_inside(&r0, m)) {
            continue;
        }
        for b in &st.bottom_candidates {
            let inner = t.kx.max(b.kx);
            let Some(x1) = next_x(inner) else { continue };
            let r1 = KRect { x0: ml.kx, y0: b.ky, x1, y1: t.ky };
            if markers.iter().any(|m| strictly_inside(&r1, m)) {
                continue;
            }
            let right = markers
                .iter()
                .filter(|m| m.class == EdgeClass::Right && m.ky > b.ky && m.ky < t.ky && m.kx > ml.kx)
                .min_by(|a, c| a.kx.cmp(&c.kx).then(c.ky.cmp(&a.ky)));
            let Some(r) = right else { continue };
            if r.kx <= inner {
                continue;
            }
            let p = KRect { x0: ml.kx, y0: b.ky, x1: r.kx, y1: t.ky };
            if markers.iter().any(|m| relation(&p, m) == Relation::Interior) {
                continue;
            }
            let rect = Rect::new(ml.position.x, b.position.y, r.position.x, t.position.y);
            return Ok((rect, p));
        }
    }
    Err(fail)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RectOptions {
    /// Accept rectangles whose boundaries touch.
    pub allow_touching: bool,
}

pub fn reconstruct_rects(markers: &[Marker2N]) -> Result<RectSet> {
    reconstruct_rects_with(markers, RectOptions::default())
}

/// Repeatedly finds the seed rectangle and removes the markers aligned with it.
pub fn reconstruct_rects_with(markers: &[Marker2N], opts: RectOptions) -> Result<RectSet> {
    let mut active: Vec<Marker2N> = markers.to_vec();
    active.sort_by_key(|m| (m.kx, m.ky, m.class));
    let mut found: Vec<(Rect, KRect)> = Vec::new();
    while !active.is_empty() {
        let (rect, k) = seed(&active)?;
        let before = active.len();
        active.retain(|m| relation(&k, m) != Relation::Aligned);
        debug_assert!(active.len() < before);
        found.push((rect, k));
    }
    for i in 0..found.len() {
        for j in i + 1..found.len() {
            let (a, b) = (found[i].1, found[j].1);
            let overlap = if opts.allow_touching {
                a.x0 < b.x1 && b.x0 < a.x1 && a.y0 < b.y1 && b.y0 < a.y1
            } else {
                a.x0 <= b.x1 && b.x0 <= a.x1 && a.y0 <= b.y1 && b.y0 <= a.y1
            };
            if overlap {
                return Err(Error::IntersectingRectangles);
            }
        }
    }
    Ok(RectSet::new(found.into_iter().map(|(r, _)| r).collect()))
}

/// Every marker lies aligned in the relative interior of some edge, and every
/// edge carries at least one such marker.
pub fn check_full_consistency(rects: &RectSet, markers: &[Marker2N]) -> bool {
    let ks: Vec<KRect> = rects
        .rects
        .iter()
        .map(|r| {
            let [x0, y0, x1, y1] = r.keys();
            KRect { x0, y0, x1, y1 }
        })
        .collect();
    let consistent = markers.iter().all(|m| ks.iter().any(|k| relation(k, m) == Relation::Aligned));
    let full = ks.iter().all(|k| {
        [EdgeClass::Left, EdgeClass::Right, EdgeClass::Top, EdgeClass::Bottom]
            .iter()
            .all(|c| markers.iter().any(|m| m.class == *c && relation(k, m) == Relation::Aligned))
    });
    consistent && full
}
