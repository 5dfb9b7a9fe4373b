//! Numeric tolerances shared by every module.
//!
//! `geo()` is read once per process. The `RECON_TOLERANCE` environment
//! variable overrides the default of `1e-9`.

use std::sync::OnceLock;

/// Coplanarity and point-on-plane tolerance.
pub const DEFAULT_GEO: f64 = 1e-9;
/// Unit-length tolerance for normals.
pub const UNIT: f64 = 1e-12;
/// Axis snapping tolerance, in radians.
pub const AXIS: f64 = 1e-6;

static GEO: OnceLock<f64> = OnceLock::new();

/// Active geometric tolerance.
pub fn geo() -> f64 {
    *GEO.get_or_init(|| {
        std::env::var("RECON_TOLERANCE")
            .ok()
            .and_then(|s| s.trim().parse::<f64>().ok())
            .filter(|t| t.is_finite() && *t > 0.0)
            .unwrap_or(DEFAULT_GEO)
    })
}

/// Snap a coordinate to the integer grid of pitch `geo()`.
pub fn snap_key(x: f64) -> i64 {
    (x / geo()).round() as i64
}

/// `true` when the angle between unit vectors `a` and `b` is at most `AXIS`,
/// ignoring orientation.
pub fn parallel(a: &nalgebra::Vector3<f64>, b: &nalgebra::Vector3<f64>) -> bool {
    a.cross(b).norm() <= AXIS.sin()
}

/// `true` when unit vectors `a` and `b` are perpendicular within `AXIS`.
pub fn perpendicular(a: &nalgebra::Vector3<f64>, b: &nalgebra::Vector3<f64>) -> bool {
    a.dot(b).abs() <= AXIS.sin()
}
