//! Angles, unit vectors, and the sign convention shared by all models.
//!
//! Angles are stored normalized to `[0, 2π)`; angular distances are reported
//! in `[0, π]`. The azimuth projection maps a 3D direction onto the circle of
//! phases in the fixed lab frame, which is exactly the step that breaks
//! circle-hidden-variable models for non-coplanar settings.

use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

use crate::{Error, Result};

/// An angle in radians, normalized to `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(from = "f64", into = "f64")]
pub struct Angle(f64);

impl Angle {
    pub const ZERO: Angle = Angle(0.0);

    /// Normalizes an arbitrary finite angle into `[0, 2π)`.
    pub fn new(radians: f64) -> Angle {
        let mut r = radians % TAU;
        if r < 0.0 {
            r += TAU;
        }
        // Rounding in `r += TAU` can land exactly on 2π for tiny negatives.
        if r >= TAU {
            r = 0.0;
        }
        Angle(r)
    }

    pub fn radians(self) -> f64 {
        self.0
    }
}

impl From<f64> for Angle {
    fn from(radians: f64) -> Angle {
        Angle::new(radians)
    }
}

impl From<Angle> for f64 {
    fn from(a: Angle) -> f64 {
        a.radians()
    }
}

/// Dichotomic outcome convention used by every model: +1 for non-negative
/// arguments, −1 for negative ones. Ties at exactly zero map to +1 so that
/// runs are reproducible; the hidden variables are continuous, so the tie set
/// has measure zero.
pub fn sgn(x: f64) -> Result<i8> {
    if !x.is_finite() {
        return Err(Error::InvalidArgument(format!("sgn of non-finite {x}")));
    }
    Ok(sign_of(x))
}

/// Infallible sign for internal hot paths where the argument is known finite.
#[inline]
pub(crate) fn sign_of(x: f64) -> i8 {
    if x >= 0.0 {
        1
    } else {
        -1
    }
}

/// Distance between two angles on the circle, in `[0, π]`.
pub fn angular_distance(a: Angle, b: Angle) -> f64 {
    let d = (a.radians() - b.radians()).abs() % TAU;
    d.min(TAU - d)
}

/// A unit vector on the sphere: polariser settings and the sphere hidden
/// variable live here.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct Direction3 {
    x: f64,
    y: f64,
    z: f64,
}

impl Direction3 {
    pub const X: Direction3 = Direction3 { x: 1.0, y: 0.0, z: 0.0 };
    pub const Y: Direction3 = Direction3 { x: 0.0, y: 1.0, z: 0.0 };
    pub const Z: Direction3 = Direction3 { x: 0.0, y: 0.0, z: 1.0 };

    /// Builds a direction from components that must already be unit length
    /// (within 1e-9 in the squared norm).
    pub fn new(x: f64, y: f64, z: f64) -> Result<Direction3> {
        let n2 = x * x + y * y + z * z;
        if !n2.is_finite() || (n2 - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!(
                "({x}, {y}, {z}) is not a unit vector (|v|^2 = {n2})"
            )));
        }
        let n = n2.sqrt();
        Ok(Direction3 { x: x / n, y: y / n, z: z / n })
    }

    /// Normalizes an arbitrary non-degenerate vector onto the sphere.
    pub fn normalized(x: f64, y: f64, z: f64) -> Result<Direction3> {
        let n = (x * x + y * y + z * z).sqrt();
        if !n.is_finite() || n < 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "cannot normalize degenerate vector ({x}, {y}, {z})"
            )));
        }
        Ok(Direction3 { x: x / n, y: y / n, z: z / n })
    }

    /// Unit vector in the x-y plane at the given azimuth. This is the
    /// coplanar embedding used by sweeps.
    pub fn in_plane(azimuth: Angle) -> Direction3 {
        Direction3 {
            x: azimuth.radians().cos(),
            y: azimuth.radians().sin(),
            z: 0.0,
        }
    }

    pub fn x(&self) -> f64 {
        self.x
    }
    pub fn y(&self) -> f64 {
        self.y
    }
    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn dot(&self, other: &Direction3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    /// Rotates this direction about `axis` by `angle` (Rodrigues formula).
    pub fn rotated_about(&self, axis: &Direction3, angle: Angle) -> Direction3 {
        let (s, c) = angle.radians().sin_cos();
        let k = axis;
        let kv = (
            k.y * self.z - k.z * self.y,
            k.z * self.x - k.x * self.z,
            k.x * self.y - k.y * self.x,
        );
        let kd = k.dot(self) * (1.0 - c);
        Direction3 {
            x: self.x * c + kv.0 * s + k.x * kd,
            y: self.y * c + kv.1 * s + k.y * kd,
            z: self.z * c + kv.2 * s + k.z * kd,
        }
    }
}

impl TryFrom<[f64; 3]> for Direction3 {
    type Error = Error;
    fn try_from(v: [f64; 3]) -> Result<Direction3> {
        Direction3::normalized(v[0], v[1], v[2])
    }
}

impl From<Direction3> for [f64; 3] {
    fn from(d: Direction3) -> [f64; 3] {
        [d.x, d.y, d.z]
    }
}

/// Angle between two unit vectors, in `[0, π]`.
pub fn relative_angle(u: &Direction3, v: &Direction3) -> f64 {
    u.dot(v).clamp(-1.0, 1.0).acos()
}

/// Azimuth of the (x, y) projection, measured from the +x axis of the fixed
/// lab frame. A polar vector (x = y = 0) has no azimuth; it maps to 0 by
/// convention, which is the degeneracy the non-coplanar scenario exhibits.
pub fn azimuth(v: &Direction3) -> Angle {
    if v.x == 0.0 && v.y == 0.0 {
        return Angle::ZERO;
    }
    Angle::new(v.y.atan2(v.x))
}

/// Half of π, used by several closed forms.
pub const FRAC_PI_2: f64 = PI / 2.0;
