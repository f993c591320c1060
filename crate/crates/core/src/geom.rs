//! Small vector and box types. `y` is vertical; gravity acts along `-y`.

use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 { x: 0.0, y: 0.0, z: 0.0 };
    pub const UP: Vec3 = Vec3 { x: 0.0, y: 1.0, z: 0.0 };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn length(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn length_squared(self) -> f64 {
        self.dot(self)
    }

    /// Unit vector, or `None` for (near-)zero input.
    pub fn normalized(self) -> Option<Vec3> {
        let len = self.length();
        if len > 1e-12 && len.is_finite() {
            Some(self / len)
        } else {
            None
        }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Projection onto the floor plane.
    pub fn flat(self) -> Vec3 {
        Vec3::new(self.x, 0.0, self.z)
    }

    pub fn distance(self, o: Vec3) -> f64 {
        (self - o).length()
    }

    /// Horizontal (xz) distance.
    pub fn flat_distance(self, o: Vec3) -> f64 {
        (self - o).flat().length()
    }

    /// Unit forward vector in the floor plane for a heading in degrees.
    /// Heading 0 faces +x, heading 90 faces +z.
    pub fn from_heading(deg: f64) -> Vec3 {
        let r = deg.to_radians();
        Vec3::new(r.cos(), 0.0, r.sin())
    }

    /// Heading in degrees of the horizontal part of `self`, in `[0, 360)`.
    pub fn heading(self) -> f64 {
        normalize_degrees(self.z.atan2(self.x).to_degrees())
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Vec3 {
    fn add_assign(&mut self, o: Vec3) {
        *self = *self + o;
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl SubAssign for Vec3 {
    fn sub_assign(&mut self, o: Vec3) {
        *self = *self - o;
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Div<f64> for Vec3 {
    type Output = Vec3;
    fn div(self, s: f64) -> Vec3 {
        Vec3::new(self.x / s, self.y / s, self.z / s)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

/// Wraps an angle into `[0, 360)`.
pub fn normalize_degrees(deg: f64) -> f64 {
    let d = deg.rem_euclid(360.0);
    if d >= 360.0 {
        0.0
    } else {
        d
    }
}

/// Signed smallest rotation from `from` to `to`, in `(-180, 180]`.
pub fn angle_between(from: f64, to: f64) -> f64 {
    let mut d = (to - from).rem_euclid(360.0);
    if d > 180.0 {
        d -= 360.0;
    }
    d
}

/// Axis-aligned box given by center and half extents.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aabb {
    pub center: Vec3,
    pub half_extents: Vec3,
}

impl Aabb {
    pub fn new(center: Vec3, half_extents: Vec3) -> Self {
        Self { center, half_extents }
    }

    pub fn min(&self) -> Vec3 {
        self.center - self.half_extents
    }

    pub fn max(&self) -> Vec3 {
        self.center + self.half_extents
    }

    pub fn volume(&self) -> f64 {
        8.0 * self.half_extents.x * self.half_extents.y * self.half_extents.z
    }

    pub fn top(&self) -> f64 {
        self.center.y + self.half_extents.y
    }

    pub fn bottom(&self) -> f64 {
        self.center.y - self.half_extents.y
    }

    /// Interpenetration depth of the two boxes along the least-overlapping
    /// axis; zero or negative when they are apart.
    pub fn penetration(&self, o: &Aabb) -> f64 {
        let d = self.center - o.center;
        let px = self.half_extents.x + o.half_extents.x - d.x.abs();
        let py = self.half_extents.y + o.half_extents.y - d.y.abs();
        let pz = self.half_extents.z + o.half_extents.z - d.z.abs();
        px.min(py).min(pz)
    }

    /// Whether the floor footprints overlap with positive area.
    pub fn footprint_overlaps(&self, min_x: f64, min_z: f64, max_x: f64, max_z: f64) -> bool {
        let lo = self.min();
        let hi = self.max();
        lo.x < max_x && hi.x > min_x && lo.z < max_z && hi.z > min_z
    }

    pub fn footprint_contains(&self, p: Vec3) -> bool {
        let lo = self.min();
        let hi = self.max();
        p.x >= lo.x && p.x <= hi.x && p.z >= lo.z && p.z <= hi.z
    }

    /// Area of the box projected onto the plane orthogonal to unit `dir`,
    /// using the given vertical extent instead of the full height.
    pub fn projected_area(half_extents: Vec3, height: f64, dir: Vec3) -> f64 {
        let wx = 2.0 * half_extents.x;
        let wz = 2.0 * half_extents.z;
        dir.x.abs() * height * wz + dir.y.abs() * wx * wz + dir.z.abs() * wx * height
    }
}
