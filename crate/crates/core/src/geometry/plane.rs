use super::{Point2, Point3, Vector3};
use crate::error::{Error, Result};
use crate::tolerance;

/// Oriented plane `normal · x = offset` with unit normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Plane3 {
    pub normal: Vector3,
    pub offset: f64,
}

impl Plane3 {
    /// Builds a plane, normalizing `normal` and scaling `offset` with it.
    pub fn new(normal: Vector3, offset: f64) -> Result<Self> {
        let len = normal.norm();
        if !(len.is_finite() && len > 1e-300) || !offset.is_finite() {
            return Err(Error::Degenerate("plane normal has zero length".into()));
        }
        if (len - 1.0).abs() <= tolerance::UNIT {
            return Ok(Self { normal, offset });
        }
        Ok(Self { normal: normal / len, offset: offset / len })
    }

    pub fn from_point_normal(point: &Point3, normal: &Vector3) -> Result<Self> {
        let n = normal.try_normalize(1e-300).ok_or_else(|| Error::Degenerate("zero normal".into()))?;
        Ok(Self { normal: n, offset: n.dot(&point.coords) })
    }

    /// Plane through three points, oriented by the right-hand rule.
    pub fn from_points(a: &Point3, b: &Point3, c: &Point3) -> Result<Self> {
        Self::from_point_normal(a, &(b - a).cross(&(c - a)))
    }

    pub fn signed_distance(&self, p: &Point3) -> f64 {
        self.normal.dot(&p.coords) - self.offset
    }

    pub fn project(&self, p: &Point3) -> Point3 {
        p - self.normal * self.signed_distance(p)
    }

    pub fn flipped(&self) -> Self {
        Self { normal: -self.normal, offset: -self.offset }
    }

    /// Orientation-free representative: first non-negligible normal component positive.
    pub fn unoriented(&self) -> Self {
        for i in 0..3 {
            if self.normal[i].abs() > 1e-12 {
                return if self.normal[i] < 0.0 { self.flipped() } else { *self };
            }
        }
        *self
    }

    pub fn approx_eq(&self, other: &Plane3, tol: f64) -> bool {
        (self.normal - other.normal).norm() <= tol.max(tolerance::UNIT) * 10.0
            && (self.offset - other.offset).abs() <= tol
    }

    /// Same point set regardless of orientation.
    pub fn same_set(&self, other: &Plane3, tol: f64) -> bool {
        self.approx_eq(other, tol) || self.approx_eq(&other.flipped(), tol)
    }

    pub fn is_parallel(&self, other: &Plane3) -> bool {
        tolerance::parallel(&self.normal, &other.normal)
    }

    pub fn is_perpendicular(&self, other: &Plane3) -> bool {
        tolerance::perpendicular(&self.normal, &other.normal)
    }

    /// Index of the coordinate axis this plane is perpendicular to, if any.
    pub fn axis(&self) -> Option<usize> {
        axis_of(&self.normal)
    }

    /// Deterministic orthonormal in-plane frame with `u × v = normal`.
    pub fn frame(&self) -> Frame3 {
        let n = self.normal;
        let mut helper = 0;
        for i in 1..3 {
            if n[i].abs() < n[helper].abs() - 1e-12 {
                helper = i;
            }
        }
        let mut e = Vector3::zeros();
        e[helper] = 1.0;
        let u = (e - n * n.dot(&e)).normalize();
        let u = snap_unit(u);
        let v = snap_unit(n.cross(&u));
        Frame3 { origin: Point3::from(n * self.offset), u, v, normal: n }
    }
}

/// Coordinate axis a unit vector points along (within the axis tolerance).
pub fn axis_of(v: &Vector3) -> Option<usize> {
    (0..3).find(|&i| {
        let mut e = Vector3::zeros();
        e[i] = 1.0;
        tolerance::parallel(v, &e)
    })
}

fn snap_unit(mut v: Vector3) -> Vector3 {
    for i in 0..3 {
        if v[i].abs() < 1e-15 {
            v[i] = 0.0;
        }
    }
    v
}

/// In-plane coordinate system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame3 {
    pub origin: Point3,
    pub u: nalgebra::Vector3<f64>,
    pub v: nalgebra::Vector3<f64>,
    pub normal: nalgebra::Vector3<f64>,
}

impl Frame3 {
    /// Frame with an explicit in-plane `u` axis; `u` is orthogonalized against the normal.
    pub fn with_u_axis(plane: &Plane3, u_hint: &Vector3) -> Result<Self> {
        let n = plane.normal;
        let u = (u_hint - n * n.dot(u_hint))
            .try_normalize(1e-12)
            .ok_or_else(|| Error::Degenerate("frame axis parallel to normal".into()))?;
        let u = snap_unit(u);
        Ok(Frame3 { origin: Point3::from(n * plane.offset), u, v: snap_unit(n.cross(&u)), normal: n })
    }

    pub fn to_local(&self, p: &Point3) -> Point2 {
        let d = p - self.origin;
        Point2::new(d.dot(&self.u), d.dot(&self.v))
    }

    pub fn to_world(&self, q: &Point2) -> Point3 {
        self.origin + self.u * q.x + self.v * q.y
    }

    pub fn dir_to_local(&self, d: &Vector3) -> nalgebra::Vector2<f64> {
        nalgebra::Vector2::new(d.dot(&self.u), d.dot(&self.v))
    }

    pub fn dir_to_world(&self, d: &nalgebra::Vector2<f64>) -> Vector3 {
        self.u * d.x + self.v * d.y
    }
}
