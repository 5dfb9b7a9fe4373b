use super::Point3;
use std::collections::HashMap;

/// Merges points closer than `tol` into shared indices.
#[derive(Debug, Clone)]
pub struct VertexWeld {
    tol: f64,
    cell: f64,
    pub points: Vec<Point3>,
    grid: HashMap<(i64, i64, i64), Vec<usize>>,
}

impl VertexWeld {
    pub fn new(tol: f64) -> Self {
        let cell = (tol * 4.0).max(1e-12);
        Self { tol, cell, points: Vec::new(), grid: HashMap::new() }
    }

    fn key(&self, p: &Point3) -> (i64, i64, i64) {
        ((p.x / self.cell).floor() as i64, (p.y / self.cell).floor() as i64, (p.z / self.cell).floor() as i64)
    }

    pub fn find(&self, p: &Point3) -> Option<usize> {
        let (kx, ky, kz) = self.key(p);
        let mut best: Option<(f64, usize)> = None;
        for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    if let Some(ids) = self.grid.get(&(kx + dx, ky + dy, kz + dz)) {
                        for &i in ids {
                            let d = (self.points[i] - p).norm();
                            if d <= self.tol && best.map_or(true, |(bd, _)| d < bd) {
                                best = Some((d, i));
                            }
                        }
                    }
                }
            }
        }
        best.map(|(_, i)| i)
    }

    pub fn insert(&mut self, p: Point3) -> usize {
        if let Some(i) = self.find(&p) {
            return i;
        }
        let i = self.points.len();
        let k = self.key(&p);
        self.points.push(p);
        self.grid.entry(k).or_default().push(i);
        i
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn welds_within_tolerance() {
        let mut w = VertexWeld::new(1e-9);
        let a = w.insert(Point3::new(1.0, 2.0, 3.0));
        let b = w.insert(Point3::new(1.0 + 1e-12, 2.0, 3.0 - 1e-12));
        let c = w.insert(Point3::new(1.0 + 1e-6, 2.0, 3.0));
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}
