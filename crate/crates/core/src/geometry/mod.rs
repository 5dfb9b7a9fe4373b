//! Geometric primitives: planes, half-spaces, polygons with holes,
//! polyhedra of arbitrary genus, canonical forms and 2D line arrangements.

pub mod arrangement;
pub mod canonical;
pub mod halfspace;
pub mod plane;
pub mod polygon;
pub mod polyhedron;
pub mod ring;
pub mod shapes;
pub mod triangulate;
pub mod weld;

pub type Point2 = nalgebra::Point2<f64>;
pub type Point3 = nalgebra::Point3<f64>;
pub type Vector2 = nalgebra::Vector2<f64>;
pub type Vector3 = nalgebra::Vector3<f64>;

pub use arrangement::{build_arrangement, inscribed_radius, Arrangement2, BBox2, Line2};
pub use canonical::{canonicalize, polyhedra_distance, scene_distance, scenes_equal};
pub use halfspace::{intersect_halfspaces, side_containing, HalfSpace3, Side, SideFit};
pub use plane::{Frame3, Plane3};
pub use polygon::Polygon2;
pub use polyhedron::{Face3, FaceOwner, FaceTag, Polyhedron, Scene, Topology};

/// Lexicographic comparison with per-coordinate tolerance.
pub fn cmp_point3(a: &Point3, b: &Point3, tol: f64) -> std::cmp::Ordering {
    for i in 0..3 {
        let d = a[i] - b[i];
        if d.abs() > tol {
            return if d < 0.0 { std::cmp::Ordering::Less } else { std::cmp::Ordering::Greater };
        }
    }
    std::cmp::Ordering::Equal
}

pub fn cmp_point2(a: &Point2, b: &Point2, tol: f64) -> std::cmp::Ordering {
    for i in 0..2 {
        let d = a[i] - b[i];
        if d.abs() > tol {
            return if d < 0.0 { std::cmp::Ordering::Less } else { std::cmp::Ordering::Greater };
        }
    }
    std::cmp::Ordering::Equal
}

/// Cross product z-component of `b - a` and `c - a`.
pub fn orient2(a: &Point2, b: &Point2, c: &Point2) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

pub fn is_finite3(p: &Point3) -> bool {
    p.coords.iter().all(|c| c.is_finite())
}
