//! Orthogonal solids on the grid spanned by the marker planes.
//!
//! Every face of a consistent orthogonal scene lies on a marker plane, so a
//! scene is a set of grid cells. Markers only relate the two cells on either
//! side of a unit square, which makes every marker constraint an equality or
//! an inequality between two cell bits; those are solved by a parity
//! union-find and only the free classes are enumerated.

use super::{axis_index, meta_consistent, Budget, CandidateSpace, Owner, Witness};
use crate::error::{Error, Result};
use crate::geometry::plane::axis_of;
use crate::geometry::shapes::voxel_solid;
use crate::geometry::Scene;
use crate::markup::{MarkerData, MarkerId, MarkupDescription};
use crate::tolerance;
use std::collections::BTreeMap;

struct Grid {
    n: [usize; 3],
}

impl Grid {
    fn cell(&self, c: [i64; 3]) -> Option<usize> {
        for a in 0..3 {
            if c[a] < 0 || c[a] as usize >= self.n[a] {
                return None;
            }
        }
        Some((c[0] as usize * self.n[1] + c[1] as usize) * self.n[2] + c[2] as usize)
    }

    fn len(&self) -> usize {
        self.n[0] * self.n[1] * self.n[2]
    }

    fn coords(&self, i: usize) -> [i64; 3] {
        let k = i % self.n[2];
        let j = (i / self.n[2]) % self.n[1];
        [(i / (self.n[1] * self.n[2])) as i64, j as i64, k as i64]
    }
}

/// Parity union-find; node `len` is the constant `false`.
struct Parity {
    parent: Vec<usize>,
    flip: Vec<bool>,
}

impl Parity {
    fn new(n: usize) -> Self {
        Self { parent: (0..=n).collect(), flip: vec![false; n + 1] }
    }

    fn find(&mut self, x: usize) -> (usize, bool) {
        let mut path = Vec::new();
        let mut r = x;
        while self.parent[r] != r {
            path.push(r);
            r = self.parent[r];
        }
        // Compress from the root downwards so each node's flip is relative to `r`.
        let mut acc = false;
        for &node in path.iter().rev() {
            acc ^= self.flip[node];
            self.flip[node] = acc;
            self.parent[node] = r;
        }
        (r, if x == r { false } else { self.flip[x] })
    }

    /// Records `value(a) ^ value(b) == differ`; `false` on contradiction.
    fn relate(&mut self, a: usize, b: usize, differ: bool) -> bool {
        let (ra, pa) = self.find(a);
        let (rb, pb) = self.find(b);
        if ra == rb {
            return pa ^ pb == differ;
        }
        self.parent[ra] = rb;
        self.flip[ra] = pa ^ pb ^ differ;
        true
    }
}

struct Probe {
    id: MarkerId,
    axis: usize,
    /// Unit squares around the marker, as (cell below, cell above) along `axis`.
    squares: Vec<(Option<usize>, Option<usize>)>,
}

/// Cell indices whose closed interval along one axis holds `x`.
fn slots(g: &[f64], x: f64, tol: f64) -> Vec<i64> {
    for (i, w) in g.windows(2).enumerate() {
        if (x - w[0]).abs() <= tol {
            return vec![i as i64 - 1, i as i64];
        }
        if x > w[0] && x < w[1] {
            return vec![i as i64];
        }
    }
    match g.last() {
        Some(l) if (x - l).abs() <= tol => vec![g.len() as i64 - 2, g.len() as i64 - 1],
        _ => vec![-1],
    }
}

pub(super) fn enumerate(d: &MarkupDescription, space: &CandidateSpace, budget: &mut Budget) -> Result<Vec<Witness>> {
    if d.is_empty() {
        return Ok(vec![Witness::Solid(Scene::default())]);
    }
    let tol = tolerance::geo() * 10.0;
    let grid = Grid { n: [0, 1, 2].map(|a| space.grid[a].len().saturating_sub(1)) };
    let mut probes = Vec::new();
    let mut sides: Vec<Option<bool>> = Vec::new();
    for (id, m) in d.iter() {
        let (normal, signed) = match m.data {
            MarkerData::PointNormal { normal, .. } => (normal, true),
            MarkerData::PointPlane { plane, .. } => (plane.normal, false),
            MarkerData::PointOnly { .. } => return Err(Error::Unsupported(format!("marker {id} carries no plane"))),
        };
        let axis = axis_of(&normal).ok_or(Error::NonAxisNormal(id))?;
        let p = m.position();
        let c = axis_index(&space.grid[axis], p[axis], tol).ok_or(Error::NonAxisNormal(id))? as i64;
        let (b1, b2) = ((axis + 1) % 3, (axis + 2) % 3);
        let mut squares = Vec::new();
        for j in slots(&space.grid[b1], p[b1], tol) {
            for k in slots(&space.grid[b2], p[b2], tol) {
                let mut lo = [0i64; 3];
                lo[axis] = c - 1;
                lo[b1] = j;
                lo[b2] = k;
                let mut hi = lo;
                hi[axis] = c;
                squares.push((grid.cell(lo), grid.cell(hi)));
            }
        }
        probes.push(Probe { id, axis, squares });
        sides.push(signed.then_some(normal[axis] > 0.0));
    }

    let n = grid.len();
    let off = n;
    let mut uf = Parity::new(n);
    let node = |c: Option<usize>| c.unwrap_or(off);
    for (pr, side) in probes.iter().zip(&sides) {
        let (lo0, hi0) = pr.squares[0];
        let mut ok = uf.relate(node(lo0), node(hi0), true);
        for &(lo, hi) in &pr.squares[1..] {
            ok &= uf.relate(node(lo), node(lo0), false) && uf.relate(node(hi), node(hi0), false);
        }
        if let &Some(up) = side {
            // Outward normal along +axis: the lower cell is solid.
            ok &= uf.relate(node(lo0), off, up);
        }
        if !ok {
            return Ok(Vec::new());
        }
    }

    let (off_root, off_flip) = uf.find(off);
    let mut roots: Vec<usize> = Vec::new();
    let mut class = vec![(0usize, false); n];
    for (i, slot) in class.iter_mut().enumerate() {
        let (r, f) = uf.find(i);
        if r != off_root && !roots.contains(&r) {
            roots.push(r);
        }
        *slot = (r, f);
    }
    if roots.len() >= 63 || (1u64 << roots.len()) > budget.remaining() {
        return Err(Error::SearchBudgetExceeded(budget.limit));
    }

    let mut out = Vec::new();
    let mut filled = vec![false; n];
    for bits in 0u64..(1u64 << roots.len()) {
        budget.tick()?;
        for (i, &(r, f)) in class.iter().enumerate() {
            filled[i] = if r == off_root {
                f ^ off_flip
            } else {
                let k = roots.iter().position(|&x| x == r).unwrap_or(0);
                ((bits >> k) & 1 == 1) ^ f
            };
        }
        if let Some(w) = interpret(d, space, &grid, &filled, &probes)? {
            out.push(w);
        }
    }
    Ok(out)
}

fn manifold(grid: &Grid, filled: &[bool]) -> bool {
    let on = |c: [i64; 3]| grid.cell(c).is_some_and(|i| filled[i]);
    let n = grid.n.map(|x| x as i64);
    for x in 0..=n[0] {
        for y in 0..=n[1] {
            for z in 0..=n[2] {
                let block: Vec<bool> = (0..8).map(|b| on([x - 1 + (b & 1), y - 1 + ((b >> 1) & 1), z - 1 + ((b >> 2) & 1)])).collect();
                for value in [true, false] {
                    let members: Vec<usize> = (0..8).filter(|&b| block[b] == value).collect();
                    if members.is_empty() {
                        continue;
                    }
                    let mut seen = vec![members[0]];
                    let mut stack = vec![members[0]];
                    while let Some(b) = stack.pop() {
                        for bit in [1, 2, 4] {
                            let nb = b ^ bit;
                            if block[nb] == value && !seen.contains(&nb) {
                                seen.push(nb);
                                stack.push(nb);
                            }
                        }
                    }
                    if seen.len() != members.len() {
                        return false;
                    }
                }
                // Edge-diagonal pairs in each of the three half-blocks.
                for axis in 0..3 {
                    for half in 0..2i64 {
                        let (u, v) = ((axis + 1) % 3, (axis + 2) % 3);
                        let quad: Vec<bool> = (0..4)
                            .map(|q| {
                                let mut b = 0usize;
                                b |= (half as usize) << axis;
                                b |= (q & 1) << u;
                                b |= ((q >> 1) & 1) << v;
                                block[b]
                            })
                            .collect();
                        if quad[0] == quad[3] && quad[1] == quad[2] && quad[0] != quad[1] {
                            return false;
                        }
                    }
                }
            }
        }
    }
    true
}

fn interpret(d: &MarkupDescription, space: &CandidateSpace, grid: &Grid, filled: &[bool], probes: &[Probe]) -> Result<Option<Witness>> {
    if !manifold(grid, filled) {
        return Ok(None);
    }
    let on = |c: [i64; 3]| grid.cell(c).is_some_and(|i| filled[i]);
    // Boundary squares keyed by (axis, plane index, transverse j, k) -> solid below.
    let mut squares: BTreeMap<(usize, i64, i64, i64), bool> = BTreeMap::new();
    for axis in 0..3 {
        let (b1, b2) = ((axis + 1) % 3, (axis + 2) % 3);
        for c in 0..=grid.n[axis] as i64 {
            for j in 0..grid.n[b1] as i64 {
                for k in 0..grid.n[b2] as i64 {
                    let mut lo = [0i64; 3];
                    lo[axis] = c - 1;
                    lo[b1] = j;
                    lo[b2] = k;
                    let mut hi = lo;
                    hi[axis] = c;
                    if on(lo) != on(hi) {
                        squares.insert((axis, c, j, k), on(lo));
                    }
                }
            }
        }
    }
    let keys: Vec<_> = squares.keys().copied().collect();
    let index: BTreeMap<_, usize> = keys.iter().enumerate().map(|(i, k)| (*k, i)).collect();
    let mut face: Vec<usize> = (0..keys.len()).collect();
    fn root(f: &mut [usize], mut x: usize) -> usize {
        while f[x] != x {
            f[x] = f[f[x]];
            x = f[x];
        }
        x
    }
    for (i, &(axis, c, j, k)) in keys.iter().enumerate() {
        for (dj, dk) in [(1, 0), (0, 1)] {
            let nb = (axis, c, j + dj, k + dk);
            if let Some(&t) = index.get(&nb) {
                if squares[&nb] == squares[&keys[i]] {
                    let (a, b) = (root(&mut face, i), root(&mut face, t));
                    face[a] = b;
                }
            }
        }
    }

    // Solid components and their cell membership.
    let mut comp = vec![usize::MAX; filled.len()];
    let mut comps: Vec<Vec<usize>> = Vec::new();
    for s in 0..filled.len() {
        if !filled[s] || comp[s] != usize::MAX {
            continue;
        }
        let id = comps.len();
        let mut members = vec![s];
        comp[s] = id;
        let mut stack = vec![s];
        while let Some(c) = stack.pop() {
            let p = grid.coords(c);
            for a in 0..3 {
                for dlt in [-1, 1] {
                    let mut q = p;
                    q[a] += dlt;
                    if let Some(t) = grid.cell(q) {
                        if filled[t] && comp[t] == usize::MAX {
                            comp[t] = id;
                            members.push(t);
                            stack.push(t);
                        }
                    }
                }
            }
        }
        members.sort_unstable();
        comps.push(members);
    }

    let mut marked = vec![false; keys.len()];
    let mut owners: BTreeMap<MarkerId, Owner> = BTreeMap::new();
    for pr in probes {
        let (lo, hi) = pr.squares[0];
        let cell = match (lo, hi) {
            (Some(l), _) if filled[l] => l,
            (_, Some(h)) if filled[h] => h,
            _ => return Ok(None),
        };
        let c = grid.coords(cell);
        let (b1, b2) = ((pr.axis + 1) % 3, (pr.axis + 2) % 3);
        let plane = if lo == Some(cell) { c[pr.axis] + 1 } else { c[pr.axis] };
        let Some(&sq) = index.get(&(pr.axis, plane, c[b1], c[b2])) else { return Ok(None) };
        let f = root(&mut face, sq);
        marked[f] = true;
        owners.insert(pr.id, Owner { part: comp[cell], face: f });
    }
    for i in 0..keys.len() {
        if !marked[root(&mut face, i)] {
            return Ok(None);
        }
    }
    if !meta_consistent(d, &owners) {
        return Ok(None);
    }

    let mut polys = Vec::with_capacity(comps.len());
    for members in &comps {
        let solid = voxel_solid(&space.grid[0], &space.grid[1], &space.grid[2], |i, j, k| {
            grid.cell([i as i64, j as i64, k as i64]).is_some_and(|c| members.binary_search(&c).is_ok())
        });
        match solid {
            Ok(p) => polys.push(p),
            Err(_) => return Ok(None),
        }
    }
    Ok(Some(Witness::Solid(Scene::new(polys))))
}
