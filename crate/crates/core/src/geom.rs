//! Points, homogeneous coordinates and small vector helpers.

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

/// Anything that can be linearly combined with real coefficients.
///
/// Knot insertion, de Casteljau and Bernstein evaluation are written against
/// this trait so the same code serves 3D points and 4D homogeneous points.
pub trait Lin: Copy + Default + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn lerp(self, other: Self, t: f64) -> Self {
        self * (1.0 - t) + other * t
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const ORIGIN: Point3 = Point3 { x: 0.0, y: 0.0, z: 0.0 };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn dot(self, o: Self) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Self) -> Self {
        Self::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn distance(self, o: Self) -> f64 {
        (self - o).norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Unit vector in the same direction, or `None` for a (near) zero vector.
    pub fn normalized(self) -> Option<Self> {
        let n = self.norm();
        (n > f64::MIN_POSITIVE && n.is_finite()).then(|| self * (1.0 / n))
    }

    pub fn min(self, o: Self) -> Self {
        Self::new(self.x.min(o.x), self.y.min(o.y), self.z.min(o.z))
    }

    pub fn max(self, o: Self) -> Self {
        Self::new(self.x.max(o.x), self.y.max(o.y), self.z.max(o.z))
    }
}

impl Add for Point3 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Point3 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Point3 {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        Self::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Neg for Point3 {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y, -self.z)
    }
}

impl Lin for Point3 {}

/// A control point with a rational weight, stored in Cartesian form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedPoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub w: f64,
}

impl Default for WeightedPoint {
    fn default() -> Self {
        Self {
            x: 0.0,
            y: 0.0,
            z: 0.0,
            w: 1.0,
        }
    }
}

impl WeightedPoint {
    pub const fn new(x: f64, y: f64, z: f64, w: f64) -> Self {
        Self { x, y, z, w }
    }

    pub fn from_point(p: Point3, w: f64) -> Self {
        Self::new(p.x, p.y, p.z, w)
    }

    pub fn point(self) -> Point3 {
        Point3::new(self.x, self.y, self.z)
    }

    pub fn to_homogeneous(self) -> Homogeneous {
        Homogeneous([self.x * self.w, self.y * self.w, self.z * self.w, self.w])
    }

    pub fn is_valid(self) -> bool {
        self.point().is_finite() && self.w.is_finite() && self.w > 0.0
    }
}

/// Homogeneous coordinates `(wx, wy, wz, w)`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Homogeneous(pub [f64; 4]);

impl Homogeneous {
    pub fn weight(self) -> f64 {
        self.0[3]
    }

    /// Projects back to Cartesian space.
    pub fn project(self) -> Point3 {
        let w = self.0[3];
        Point3::new(self.0[0] / w, self.0[1] / w, self.0[2] / w)
    }

    pub fn to_weighted(self) -> WeightedPoint {
        WeightedPoint::from_point(self.project(), self.0[3])
    }

    /// The spatial part `(wx, wy, wz)` without dividing by the weight.
    pub fn spatial(self) -> Point3 {
        Point3::new(self.0[0], self.0[1], self.0[2])
    }
}

impl Add for Homogeneous {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        let a = self.0;
        let b = o.0;
        Homogeneous([a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]])
    }
}

impl Sub for Homogeneous {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        let a = self.0;
        let b = o.0;
        Homogeneous([a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3]])
    }
}

impl Mul<f64> for Homogeneous {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        let a = self.0;
        Homogeneous([a[0] * s, a[1] * s, a[2] * s, a[3] * s])
    }
}

impl Lin for Homogeneous {}

/// Axis-aligned bounding box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: Point3,
    pub max: Point3,
}

impl Aabb {
    pub fn from_points<I: IntoIterator<Item = Point3>>(points: I) -> Option<Self> {
        let mut it = points.into_iter();
        let first = it.next()?;
        Some(it.fold(Aabb { min: first, max: first }, |b, p| Aabb {
            min: b.min.min(p),
            max: b.max.max(p),
        }))
    }

    pub fn diagonal(&self) -> f64 {
        self.min.distance(self.max)
    }

    pub fn center(&self) -> Point3 {
        (self.min + self.max) * 0.5
    }

    pub fn union(&self, o: &Aabb) -> Aabb {
        Aabb {
            min: self.min.min(o.min),
            max: self.max.max(o.max),
        }
    }
}

/// Binomial coefficient as a float; zero outside `0 <= k <= n`.
pub fn binomial(n: i64, k: i64) -> f64 {
    if k < 0 || n < 0 || k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut r = 1.0;
    for i in 0..k {
        r = r * (n - i) as f64 / (i + 1) as f64;
    }
    r.round()
}
