//! Bézier curves in Bernstein form.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{binomial, Lin, Point3};

/// `B_{i,n}(t) = C(n, i) t^i (1 - t)^(n - i)` for all `i`.
pub fn bernstein_all(n: usize, t: f64) -> Vec<f64> {
    let s = 1.0 - t;
    (0..=n)
        .map(|i| binomial(n as i64, i as i64) * t.powi(i as i32) * s.powi((n - i) as i32))
        .collect()
}

pub(crate) fn bernstein_eval<T: Lin>(ctrl: &[T], t: f64) -> T {
    let b = bernstein_all(ctrl.len() - 1, t);
    ctrl.iter().zip(b).fold(T::default(), |acc, (&p, w)| acc + p * w)
}

/// First derivative of a Bernstein polynomial.
pub(crate) fn bernstein_derivative<T: Lin>(ctrl: &[T], t: f64) -> T {
    let n = ctrl.len() - 1;
    if n == 0 {
        return T::default();
    }
    let diffs: Vec<T> = ctrl.windows(2).map(|w| (w[1] - w[0]) * n as f64).collect();
    bernstein_eval(&diffs, t)
}

/// Splits at `t` with de Casteljau; returns `(left, right)` control polygons.
pub(crate) fn de_casteljau_split<T: Lin>(ctrl: &[T], t: f64) -> (Vec<T>, Vec<T>) {
    let n = ctrl.len();
    let mut work = ctrl.to_vec();
    let mut left = Vec::with_capacity(n);
    let mut right = Vec::with_capacity(n);
    left.push(work[0]);
    right.push(work[n - 1]);
    for r in 1..n {
        for i in 0..n - r {
            work[i] = work[i].lerp(work[i + 1], t);
        }
        left.push(work[0]);
        right.push(work[n - 1 - r]);
    }
    right.reverse();
    (left, right)
}

/// Raises the degree of a Bernstein polygon by one.
pub(crate) fn elevate_once<T: Lin>(ctrl: &[T]) -> Vec<T> {
    let n = ctrl.len() - 1;
    let mut out = Vec::with_capacity(n + 2);
    out.push(ctrl[0]);
    for i in 1..=n {
        let a = i as f64 / (n + 1) as f64;
        out.push(ctrl[i - 1] * a + ctrl[i] * (1.0 - a));
    }
    out.push(ctrl[n]);
    out
}

pub(crate) fn elevate_to<T: Lin>(ctrl: &[T], target: usize) -> Result<Vec<T>> {
    let degree = ctrl.len() - 1;
    if target < degree {
        return Err(Error::DegreeLowering {
            from: degree,
            to: target,
        });
    }
    let mut out = ctrl.to_vec();
    while out.len() - 1 < target {
        out = elevate_once(&out);
    }
    Ok(out)
}

/// A polynomial Bézier curve on `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BezierCurve {
    control_points: Vec<Point3>,
}

impl BezierCurve {
    pub fn new(control_points: Vec<Point3>) -> Result<Self> {
        if control_points.is_empty() {
            return Err(Error::Geometry("Bezier curve needs at least one control point".into()));
        }
        if let Some(p) = control_points.iter().find(|p| !p.is_finite()) {
            return Err(Error::Geometry(format!("non-finite control point {p:?}")));
        }
        Ok(Self { control_points })
    }

    pub fn degree(&self) -> usize {
        self.control_points.len() - 1
    }

    pub fn control_points(&self) -> &[Point3] {
        &self.control_points
    }

    pub fn eval(&self, t: f64) -> Result<Point3> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::Domain {
                value: t,
                min: 0.0,
                max: 1.0,
            });
        }
        Ok(bernstein_eval(&self.control_points, t))
    }

    pub fn derivative(&self, t: f64) -> Point3 {
        bernstein_derivative(&self.control_points, t)
    }

    /// Unit tangent at `t`, or the zero vector where the derivative vanishes.
    pub fn unit_tangent(&self, t: f64) -> Point3 {
        self.derivative(t).normalized().unwrap_or_default()
    }

    pub fn split(&self, t: f64) -> Result<(BezierCurve, BezierCurve)> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::Domain {
                value: t,
                min: 0.0,
                max: 1.0,
            });
        }
        let (l, r) = de_casteljau_split(&self.control_points, t);
        Ok((Self { control_points: l }, Self { control_points: r }))
    }

    /// Sub-curve over `[a, b]` of the local parameter.
    pub fn segment(&self, a: f64, b: f64) -> Result<BezierCurve> {
        if !(0.0 <= a && a < b && b <= 1.0) {
            return Err(Error::Geometry(format!("invalid sub-interval [{a}, {b}]")));
        }
        let (_, right) = de_casteljau_split(&self.control_points, a);
        let t = (b - a) / (1.0 - a);
        let (left, _) = de_casteljau_split(&right, t.min(1.0));
        Ok(Self { control_points: left })
    }

    pub fn reversed(&self) -> BezierCurve {
        let mut cp = self.control_points.clone();
        cp.reverse();
        Self { control_points: cp }
    }

    pub fn elevate(&self, target: usize) -> Result<BezierCurve> {
        Ok(Self {
            control_points: elevate_to(&self.control_points, target)?,
        })
    }
}

/// Bernstein-form evaluation; `t` must lie in `[0, 1]`.
pub fn eval_bezier_curve(bez: &BezierCurve, t: f64) -> Result<Point3> {
    bez.eval(t)
}

/// Degree elevation to `target`, shape preserving.
pub fn elevate_degree(bez: &BezierCurve, target: usize) -> Result<BezierCurve> {
    bez.elevate(target)
}
