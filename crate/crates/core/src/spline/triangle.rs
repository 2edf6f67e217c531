//! Rational Bézier triangles and the exact diagonal split of a Bézier
//! rectangle into two triangles.
//!
//! For a rectangle of degree `(m, n)` the lower-left triangle has degree
//! `m + n` and control points
//!
//! ```text
//! V[a,b] = sum_{i,j} C(a,i) C(b,j) C(m+n-a-b, m-i-(b-j)) / C(m+n, n) * P[i,j]
//! ```
//!
//! with binomials vanishing outside their range. The upper-right triangle is
//! the same map applied to the index-reversed grid `P[m-i][n-j]`, using the
//! barycentric pair `s' = 1 - u`, `t' = 1 - v`. Rational patches are converted
//! in homogeneous coordinates.

use serde::{Deserialize, Serialize};

use super::surface::{BezierRectangle, ParamRect};
use crate::error::{Error, Result};
use crate::geom::{binomial, Aabb, Homogeneous, Point3, WeightedPoint};
use crate::topology::PatchKey;

/// Number of control points of a degree-`d` triangle.
pub const fn tri_count(d: usize) -> usize {
    (d + 1) * (d + 2) / 2
}

/// Position of `V[a,b]` in lexicographic `(a, b)` order with `a + b <= d`.
pub const fn tri_index(d: usize, a: usize, b: usize) -> usize {
    a * (d + 1) - a * a.saturating_sub(1) / 2 + b
}

/// All `(a, b)` with `a + b <= d`, in storage order.
pub fn tri_indices(d: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..=d).flat_map(move |a| (0..=d - a).map(move |b| (a, b)))
}

/// `B^d_{a,b}(s,t) = d!/(a! b! c!) s^a t^b (1-s-t)^c` for all `(a, b)` in
/// storage order.
pub fn bernstein_tri_all(d: usize, s: f64, t: f64) -> Vec<f64> {
    let w = 1.0 - s - t;
    tri_indices(d)
        .map(|(a, b)| {
            let c = d - a - b;
            let coef = binomial(d as i64, a as i64) * binomial((d - a) as i64, b as i64);
            coef * s.powi(a as i32) * t.powi(b as i32) * w.powi(c as i32)
        })
        .collect()
}

/// Which half of the split rectangle a triangle covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Half {
    LowerLeft,
    UpperRight,
}

/// Split diagonal of the parent rectangle, in local coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Diagonal {
    /// From `(0, 1)` to `(1, 0)`.
    #[default]
    Anti,
    /// From `(0, 0)` to `(1, 1)`, obtained by mirroring the grid in `u`.
    Main,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub rect: PatchKey,
    pub param_rect: ParamRect,
    pub half: Half,
    pub diagonal: Diagonal,
}

impl Provenance {
    /// Local rectangle coordinates of the triangle point `(s, t)`.
    pub fn to_local(&self, s: f64, t: f64) -> (f64, f64) {
        match (self.diagonal, self.half) {
            (Diagonal::Anti, Half::LowerLeft) => (s, t),
            (Diagonal::Anti, Half::UpperRight) => (1.0 - s, 1.0 - t),
            (Diagonal::Main, Half::LowerLeft) => (1.0 - s, t),
            (Diagonal::Main, Half::UpperRight) => (s, 1.0 - t),
        }
    }

    /// Inverse of [`Self::to_local`].
    pub fn from_local(&self, x: f64, y: f64) -> (f64, f64) {
        // every variant is an involution
        self.to_local(x, y)
    }

    /// Parent-surface parameter of the triangle point `(s, t)`.
    pub fn to_surface_param(&self, s: f64, t: f64) -> (f64, f64) {
        let (x, y) = self.to_local(s, t);
        self.param_rect.at(x, y)
    }

    /// Triangle coordinates of a parent-surface parameter.
    pub fn from_surface_param(&self, u: f64, v: f64) -> (f64, f64) {
        let (x, y) = self.param_rect.local(u, v);
        self.from_local(x, y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TrimStatus {
    Exact,
    BoundaryFitted {
        /// Sum of squared distances to the boundary samples after fitting.
        residual: f64,
        /// Same quantity for the unfitted split.
        initial_residual: f64,
        /// Largest control-point move; bounds the pointwise distance to
        /// the exact split.
        max_displacement: f64,
        rank_deficient: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BezierTriangle {
    degree: usize,
    control_points: Vec<WeightedPoint>,
    pub provenance: Provenance,
    pub trim_status: TrimStatus,
}

/// Result of [`triangle_center_normal`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CenterNormal {
    pub normal: Point3,
    pub degenerate: bool,
}

impl BezierTriangle {
    pub fn new(degree: usize, control_points: Vec<WeightedPoint>, provenance: Provenance) -> Result<Self> {
        if control_points.len() != tri_count(degree) {
            return Err(Error::Geometry(format!(
                "degree-{degree} triangle needs {} control points, got {}",
                tri_count(degree),
                control_points.len()
            )));
        }
        if let Some(p) = control_points.iter().find(|p| !p.is_valid()) {
            return Err(Error::Geometry(format!("invalid control point {p:?}")));
        }
        Ok(Self {
            degree,
            control_points,
            provenance,
            trim_status: TrimStatus::Exact,
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn control_points(&self) -> &[WeightedPoint] {
        &self.control_points
    }

    pub fn control(&self, a: usize, b: usize) -> WeightedPoint {
        self.control_points[tri_index(self.degree, a, b)]
    }

    pub(crate) fn with_control_points(&self, cps: Vec<WeightedPoint>, status: TrimStatus) -> Self {
        debug_assert_eq!(cps.len(), self.control_points.len());
        Self {
            control_points: cps,
            trim_status: status,
            ..self.clone()
        }
    }

    pub fn bbox(&self) -> Aabb {
        Aabb::from_points(self.control_points.iter().map(|p| p.point())).expect("non-empty")
    }

    fn homogeneous(&self) -> Vec<Homogeneous> {
        self.control_points.iter().map(|p| p.to_homogeneous()).collect()
    }

    fn check_domain(s: f64, t: f64) -> Result<()> {
        let eps = 1e-12;
        if !(s >= -eps && t >= -eps && s + t <= 1.0 + eps) || !s.is_finite() || !t.is_finite() {
            return Err(Error::Barycentric { s, t });
        }
        Ok(())
    }

    /// Rational evaluation at barycentric `(s, t)`; `s, t >= 0`, `s + t <= 1`.
    pub fn eval(&self, s: f64, t: f64) -> Result<Point3> {
        Self::check_domain(s, t)?;
        Ok(self.eval_unchecked(s, t))
    }

    /// Evaluation of the polynomial extension; no domain check.
    pub fn eval_unchecked(&self, s: f64, t: f64) -> Point3 {
        self.eval_homogeneous(s, t).project()
    }

    fn eval_homogeneous(&self, s: f64, t: f64) -> Homogeneous {
        let b = bernstein_tri_all(self.degree, s, t);
        self.control_points
            .iter()
            .zip(b)
            .fold(Homogeneous::default(), |acc, (p, w)| acc + p.to_homogeneous() * w)
    }

    /// Partial derivatives `(dT/ds, dT/dt)` of the rational patch.
    pub fn partials(&self, s: f64, t: f64) -> (Point3, Point3) {
        let d = self.degree;
        if d == 0 {
            return (Point3::ORIGIN, Point3::ORIGIN);
        }
        let h = self.homogeneous();
        let basis = bernstein_tri_all(d - 1, s, t);
        let mut hs = Homogeneous::default();
        let mut ht = Homogeneous::default();
        for ((a, b), w) in tri_indices(d - 1).zip(basis) {
            let base = h[tri_index(d, a, b)];
            hs = hs + (h[tri_index(d, a + 1, b)] - base) * (w * d as f64);
            ht = ht + (h[tri_index(d, a, b + 1)] - base) * (w * d as f64);
        }
        let hv = self.eval_homogeneous(s, t);
        let c = hv.project();
        let w = hv.weight();
        (
            (hs.spatial() - c * hs.weight()) * (1.0 / w),
            (ht.spatial() - c * ht.weight()) * (1.0 / w),
        )
    }

    pub fn map_points(&self, f: impl Fn(Point3) -> Point3) -> BezierTriangle {
        Self {
            control_points: self
                .control_points
                .iter()
                .map(|p| WeightedPoint::from_point(f(p.point()), p.w))
                .collect(),
            ..self.clone()
        }
    }
}

pub fn eval_bezier_triangle(tri: &BezierTriangle, s: f64, t: f64) -> Result<Point3> {
    tri.eval(s, t)
}

/// Unit normal at the barycentric centre `(1/3, 1/3)`.
///
/// Degenerate when `|T_s x T_t|` falls below `1e-12` times the squared
/// bounding-box diagonal; the normal is then the zero vector.
pub fn triangle_center_normal(tri: &BezierTriangle) -> CenterNormal {
    let (ds, dt) = tri.partials(1.0 / 3.0, 1.0 / 3.0);
    let cross = ds.cross(dt);
    let diag = tri.bbox().diagonal();
    let mag = cross.norm();
    if !(mag.is_finite()) || mag < 1e-12 * diag * diag || mag == 0.0 {
        return CenterNormal {
            normal: Point3::ORIGIN,
            degenerate: true,
        };
    }
    CenterNormal {
        normal: cross * (1.0 / mag),
        degenerate: false,
    }
}

/// Conversion matrix from a degree-`(m, n)` grid to the lower-left triangle
/// of degree `m + n`. Row `tri_index(m+n, a, b)`, column `i * (n + 1) + j`.
pub fn split_coefficients(m: usize, n: usize) -> Vec<Vec<f64>> {
    let d = m + n;
    let (mi, ni) = (m as i64, n as i64);
    let denom = binomial(d as i64, ni);
    tri_indices(d)
        .map(|(a, b)| {
            let (a, b) = (a as i64, b as i64);
            let mut row = vec![0.0; (m + 1) * (n + 1)];
            for i in 0..=a.min(mi) {
                for j in 0..=b.min(ni) {
                    let h = b - j;
                    let c = binomial(a, i) * binomial(b, j) * binomial(mi + ni - a - b, mi - i - h);
                    if c != 0.0 {
                        row[(i * (ni + 1) + j) as usize] = c / denom;
                    }
                }
            }
            row
        })
        .collect()
}

fn split_lower_left(rect: &BezierRectangle, coeffs: &[Vec<f64>]) -> Vec<WeightedPoint> {
    let hom: Vec<Homogeneous> = rect.homogeneous().into_iter().flatten().collect();
    coeffs
        .iter()
        .map(|row| {
            row.iter()
                .zip(&hom)
                .filter(|(c, _)| **c != 0.0)
                .fold(Homogeneous::default(), |acc, (&c, &p)| acc + p * c)
                .to_weighted()
        })
        .collect()
}

/// Splits `rect` along the chosen diagonal into (lower-left, upper-right)
/// triangles of degree `m + n`.
pub fn rect_to_triangles_along(rect: &BezierRectangle, diagonal: Diagonal) -> (BezierTriangle, BezierTriangle) {
    let (m, n) = rect.degrees();
    let coeffs = split_coefficients(m, n);
    let base = match diagonal {
        Diagonal::Anti => rect.clone(),
        Diagonal::Main => rect.flipped_u(),
    };
    let lower = split_lower_left(&base, &coeffs);
    let upper = split_lower_left(&base.reversed(), &coeffs);
    let prov = |half| Provenance {
        rect: rect.key,
        param_rect: rect.param_rect,
        half,
        diagonal,
    };
    (
        BezierTriangle::new(m + n, lower, prov(Half::LowerLeft)).expect("count matches"),
        BezierTriangle::new(m + n, upper, prov(Half::UpperRight)).expect("count matches"),
    )
}

/// Splits along the anti-diagonal from `(0, 1)` to `(1, 0)`.
pub fn rect_to_triangles(rect: &BezierRectangle) -> (BezierTriangle, BezierTriangle) {
    rect_to_triangles_along(rect, Diagonal::Anti)
}

/// The fixed 15-point sample set (degree-4 barycentric lattice).
pub fn lattice_samples_15() -> Vec<(f64, f64)> {
    tri_indices(4).map(|(a, b)| (a as f64 / 4.0, b as f64 / 4.0)).collect()
}

/// Centroids of the 10 upright sub-triangles of a 4x subdivision; all
/// strictly interior.
pub fn centroid_samples_10() -> Vec<(f64, f64)> {
    tri_indices(3)
        .map(|(a, b)| ((a as f64 + 1.0 / 3.0) / 4.0, (b as f64 + 1.0 / 3.0) / 4.0))
        .collect()
}
