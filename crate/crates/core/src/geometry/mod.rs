//! Angular coordinates on the listener sphere.
//!
//! Azimuth 0 points straight ahead and grows counter-clockwise seen from
//! above, so +90 is the listener's left. Elevation is positive upwards. The
//! cartesian frame is x front, y left, z up.

mod delaunay;
mod grid;
pub mod lebedev;
mod triangulation;

pub use grid::{azimuth_gap, Column, DirectionGrid, Ring, PLANE_TOL_DEG};
pub(crate) use triangulation::find_duplicates;
pub use triangulation::{
    build_triangulation, find_enclosing_triangle, EnclosingTriangle, Frame, FrameMesh, Triangulation,
    CONTAINMENT_SLACK, DUPLICATE_TOL_DEG,
};

use crate::error::{Error, Result};

/// Elevations at or beyond this magnitude are treated as the pole.
pub(crate) const POLE_EPS_DEG: f64 = 1e-9;

/// A direction on the unit sphere in degrees.
///
/// Always normalized: `0 <= azimuth < 360` and `-90 <= elevation <= 90`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Direction {
    azimuth_deg: f64,
    elevation_deg: f64,
}

impl Direction {
    /// Builds a direction from raw angles, folding them into range.
    pub fn new(azimuth_deg: f64, elevation_deg: f64) -> Result<Self> {
        normalize_direction(azimuth_deg, elevation_deg)
    }

    pub fn azimuth(&self) -> f64 {
        self.azimuth_deg
    }

    pub fn elevation(&self) -> f64 {
        self.elevation_deg
    }

    pub fn is_pole(&self) -> bool {
        self.elevation_deg.abs() >= 90.0 - POLE_EPS_DEG
    }

    #[allow(clippy::wrong_self_convention)]
    pub fn to_cartesian(&self) -> UnitVector {
        to_cartesian(*self)
    }

    /// Inverse of [`to_cartesian`]. The input need not be unit length.
    pub fn from_cartesian(x: f64, y: f64, z: f64) -> Result<Self> {
        let norm = (x * x + y * y + z * z).sqrt();
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::InvalidArgument(format!(
                "cannot take the direction of vector ({x}, {y}, {z})"
            )));
        }
        let el = (z / norm).clamp(-1.0, 1.0).asin().to_degrees();
        let az = y.atan2(x).to_degrees();
        normalize_direction(az, el)
    }

    /// Same point with the pole azimuth collapsed to 0.
    pub(crate) fn canonical(&self) -> Direction {
        if self.is_pole() {
            Direction {
                azimuth_deg: 0.0,
                elevation_deg: 90f64.copysign(self.elevation_deg),
            }
        } else {
            *self
        }
    }
}

impl std::fmt::Display for Direction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(az {:.3}, el {:.3})", self.azimuth_deg, self.elevation_deg)
    }
}

/// A point on the unit sphere in the x-front, y-left, z-up frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl UnitVector {
    pub fn dot(&self, other: &UnitVector) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(&self, other: &UnitVector) -> [f64; 3] {
        [
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        ]
    }

    /// Euclidean chord length between two unit vectors.
    pub fn chord(&self, other: &UnitVector) -> f64 {
        let (dx, dy, dz) = (self.x - other.x, self.y - other.y, self.z - other.z);
        (dx * dx + dy * dy + dz * dz).sqrt()
    }
}

/// Folds arbitrary angles onto the sphere.
///
/// Elevations past a pole continue down the far side, so elevation 100 at
/// azimuth 0 becomes elevation 80 at azimuth 180.
pub fn normalize_direction(azimuth_deg: f64, elevation_deg: f64) -> Result<Direction> {
    if !azimuth_deg.is_finite() || !elevation_deg.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "direction angles must be finite, got azimuth {azimuth_deg}, elevation {elevation_deg}"
        )));
    }
    let mut az = azimuth_deg;
    let mut el = elevation_deg;
    if !(-90.0..=90.0).contains(&el) {
        el = (el + 90.0).rem_euclid(360.0) - 90.0;
        if el > 90.0 {
            el = 180.0 - el;
            az += 180.0;
        }
    }
    if !(0.0..360.0).contains(&az) {
        az = az.rem_euclid(360.0);
        // rem_euclid rounds tiny negatives up to exactly 360
        if az >= 360.0 {
            az = 0.0;
        }
    }
    Ok(Direction {
        azimuth_deg: az,
        elevation_deg: el,
    })
}

pub fn to_cartesian(d: Direction) -> UnitVector {
    let (az, el) = (d.azimuth_deg.to_radians(), d.elevation_deg.to_radians());
    let (sin_el, cos_el) = el.sin_cos();
    let (sin_az, cos_az) = az.sin_cos();
    UnitVector {
        x: cos_el * cos_az,
        y: cos_el * sin_az,
        z: sin_el,
    }
}

/// Great-circle angle between two directions, in degrees within `[0, 180]`.
///
/// Evaluated as `atan2(|a x b|, a . b)`, which equals the clamped arccos of
/// the dot product but stays accurate for nearly coincident directions.
pub fn angular_distance(a: Direction, b: Direction) -> f64 {
    angle_between(&to_cartesian(a), &to_cartesian(b))
}

pub(crate) fn angle_between(a: &UnitVector, b: &UnitVector) -> f64 {
    let c = a.cross(b);
    let sin = (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt();
    sin.atan2(a.dot(b)).to_degrees()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dir(az: f64, el: f64) -> Direction {
        Direction::new(az, el).unwrap()
    }

    #[test]
    fn negative_azimuth_is_clockwise() {
        assert_eq!(dir(-90.0, 0.0), dir(270.0, 0.0));
        assert_eq!(dir(-90.0, 0.0).azimuth(), 270.0);
    }

    #[test]
    fn full_turn_wraps_to_zero() {
        let d = dir(360.0, 0.0);
        assert_eq!((d.azimuth(), d.elevation()), (0.0, 0.0));
    }

    #[test]
    fn elevation_folds_over_pole() {
        let d = dir(0.0, 100.0);
        assert!((d.azimuth() - 180.0).abs() < 1e-12);
        assert!((d.elevation() - 80.0).abs() < 1e-12);
        // raw cartesian image of (0, 100) computed without normalization
        let (el, az) = (100f64.to_radians(), 0f64.to_radians());
        let raw = [el.cos() * az.cos(), el.cos() * az.sin(), el.sin()];
        let c = d.to_cartesian();
        assert!((c.x - raw[0]).abs() < 1e-12);
        assert!((c.y - raw[1]).abs() < 1e-12);
        assert!((c.z - raw[2]).abs() < 1e-12);
    }

    #[test]
    fn non_finite_is_rejected() {
        assert!(matches!(
            Direction::new(f64::NAN, 0.0),
            Err(Error::InvalidArgument(_))
        ));
        assert!(Direction::new(0.0, f64::INFINITY).is_err());
    }

    #[test]
    fn cartesian_convention_anchors() {
        let front = dir(0.0, 0.0).to_cartesian();
        assert!((front.x - 1.0).abs() < 1e-15 && front.y.abs() < 1e-15 && front.z.abs() < 1e-15);
        let left = dir(90.0, 0.0).to_cartesian();
        assert!(left.x.abs() < 1e-15 && (left.y - 1.0).abs() < 1e-15 && left.z.abs() < 1e-15);
        for az in [0.0, 37.0, 180.0, 299.5] {
            let up = dir(az, 90.0).to_cartesian();
            assert!(up.x.abs() < 1e-15 && up.y.abs() < 1e-15 && (up.z - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn distance_examples() {
        assert!((angular_distance(dir(0.0, 0.0), dir(90.0, 0.0)) - 90.0).abs() < 1e-12);
        assert!(angular_distance(dir(0.0, 90.0), dir(180.0, 90.0)) < 1e-12);
        assert!((angular_distance(dir(0.0, 0.0), dir(180.0, 0.0)) - 180.0).abs() < 1e-12);
    }

    #[test]
    fn from_cartesian_round_trip() {
        let d = dir(123.0, -41.0);
        let c = d.to_cartesian();
        let back = Direction::from_cartesian(c.x, c.y, c.z).unwrap();
        assert!(angular_distance(d, back) < 1e-10);
        assert!(Direction::from_cartesian(0.0, 0.0, 0.0).is_err());
    }

    fn raw_cartesian(az: f64, el: f64) -> [f64; 3] {
        let (az, el) = (az.to_radians(), el.to_radians());
        [el.cos() * az.cos(), el.cos() * az.sin(), el.sin()]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(2000))]

        #[test]
        fn normalize_is_idempotent_and_preserves_point(az in -720.0f64..720.0, el in -270.0f64..270.0) {
            let d = normalize_direction(az, el).unwrap();
            prop_assert!((0.0..360.0).contains(&d.azimuth()));
            prop_assert!((-90.0..=90.0).contains(&d.elevation()));
            prop_assert_eq!(normalize_direction(d.azimuth(), d.elevation()).unwrap(), d);
            let raw = raw_cartesian(az, el);
            let c = d.to_cartesian();
            prop_assert!((c.x - raw[0]).abs() < 1e-12);
            prop_assert!((c.y - raw[1]).abs() < 1e-12);
            prop_assert!((c.z - raw[2]).abs() < 1e-12);
            prop_assert!(((c.x * c.x + c.y * c.y + c.z * c.z) - 1.0).abs() < 1e-12);
        }

        #[test]
        fn distance_matches_dot_product(a_az in 0.0f64..360.0, a_el in -90.0f64..90.0,
                                        b_az in 0.0f64..360.0, b_el in -90.0f64..90.0) {
            let (a, b) = (dir(a_az, a_el), dir(b_az, b_el));
            let (ra, rb) = (raw_cartesian(a_az, a_el), raw_cartesian(b_az, b_el));
            let dot = (ra[0] * rb[0] + ra[1] * rb[1] + ra[2] * rb[2]).clamp(-1.0, 1.0);
            let oracle = dot.acos().to_degrees();
            // arccos is ill-conditioned near 0 and 180; skip those
            prop_assume!(oracle > 1e-2 && oracle < 180.0 - 1e-2);
            let d = angular_distance(a, b);
            prop_assert!((d - oracle).abs() < 1e-9, "{} vs {}", d, oracle);
        }
    }
}
