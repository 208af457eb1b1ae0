//! Ground-plane conventions shared by every module.
//!
//! World frame is right-handed with +y up and characters standing on y = 0.
//! A heading of θ degrees is a yaw about +y whose forward vector is
//! `(sin θ, 0, cos θ)`: 0° faces +z, 90° faces +x.

use nalgebra::Vector3;

pub type Vec3 = Vector3<f64>;

/// Unit forward vector for a heading in degrees.
pub fn forward(heading_deg: f64) -> Vec3 {
    let r = heading_deg.to_radians();
    Vec3::new(r.sin(), 0.0, r.cos())
}

/// Heading in [0, 360) of a ground-plane direction. Zero vectors map to 0.
pub fn heading_of(direction: &Vec3) -> f64 {
    if direction.x == 0.0 && direction.z == 0.0 {
        return 0.0;
    }
    normalize_degrees(direction.x.atan2(direction.z).to_degrees())
}

pub fn normalize_degrees(deg: f64) -> f64 {
    let d = deg.rem_euclid(360.0);
    // rem_euclid of a tiny negative number can round up to 360
    if d >= 360.0 {
        0.0
    } else {
        d
    }
}

/// Rotate a point about +y by `heading_deg`, matching [`forward`].
pub fn rotate_yaw(p: &Vec3, heading_deg: f64) -> Vec3 {
    let (s, c) = heading_deg.to_radians().sin_cos();
    Vec3::new(p.x * c + p.z * s, p.y, -p.x * s + p.z * c)
}

/// Unsigned angle between two vectors, degrees in [0, 180].
pub fn angle_between_deg(a: &Vec3, b: &Vec3) -> f64 {
    let na = a.norm();
    let nb = b.norm();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    (a.dot(b) / (na * nb)).clamp(-1.0, 1.0).acos().to_degrees()
}

pub fn centroid<'a>(points: impl IntoIterator<Item = &'a Vec3>) -> Vec3 {
    let mut sum = Vec3::zeros();
    let mut n = 0usize;
    for p in points {
        sum += p;
        n += 1;
    }
    if n == 0 {
        sum
    } else {
        sum / n as f64
    }
}
