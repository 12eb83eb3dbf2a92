//! Scene geometry primitives shared by the scenario generator.

use std::f64::consts::PI;
use std::ops::Sub;

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// A point (or displacement) in 3D scene coordinates, meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Point3 { x, y, z }
    }

    pub fn norm(self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn distance(self, other: Point3) -> f64 {
        (self - other).norm()
    }
}

impl Sub for Point3 {
    type Output = Point3;

    fn sub(self, rhs: Point3) -> Point3 {
        Point3::new(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl From<[f64; 3]> for Point3 {
    fn from(v: [f64; 3]) -> Self {
        Point3::new(v[0], v[1], v[2])
    }
}

/// Wraps an angle to the half-open interval [-pi, pi).
pub fn wrap_angle(theta: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let wrapped = theta - two_pi * ((theta + PI) / two_pi).floor();
    // floating point can land exactly on +pi
    if wrapped >= PI {
        wrapped - two_pi
    } else {
        wrapped
    }
}

/// Azimuth/elevation (radians) of the unit direction of a displacement vector.
///
/// Azimuth is measured in the x-y plane from the +x axis, elevation from the
/// horizontal plane towards +z. The displacement must have positive length.
pub fn direction_angles(d: Point3) -> (f64, f64) {
    let r = d.norm();
    debug_assert!(r > 0.0, "direction of a zero-length vector");
    let az = d.y.atan2(d.x);
    let el = (d.z / r).clamp(-1.0, 1.0).asin();
    (wrap_angle(az), el)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_angle_range() {
        assert_eq!(wrap_angle(PI), -PI);
        assert_eq!(wrap_angle(-PI), -PI);
        assert!((wrap_angle(3.0 * PI) - (-PI)).abs() < 1e-12);
        assert!((wrap_angle(2.5 * PI) - 0.5 * PI).abs() < 1e-12);
        for i in -20..20 {
            let theta = 0.37 * i as f64;
            let w = wrap_angle(theta);
            assert!((-PI..PI).contains(&w), "wrap({theta}) = {w}");
            // same angle modulo 2*pi
            assert!(((theta - w) / (2.0 * PI)).fract().abs() < 1e-9);
        }
    }

    #[test]
    fn direction_angles_axes() {
        let (az, el) = direction_angles(Point3::new(1.0, 0.0, 0.0));
        assert_eq!((az, el), (0.0, 0.0));
        let (az, el) = direction_angles(Point3::new(0.0, 2.0, 0.0));
        assert!((az - PI / 2.0).abs() < 1e-15 && el == 0.0);
        let (_, el) = direction_angles(Point3::new(0.0, 0.0, 5.0));
        assert!((el - PI / 2.0).abs() < 1e-15);
    }
}
