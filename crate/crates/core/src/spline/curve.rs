//! Non-rational B-spline curves: evaluation, knot insertion and Bézier
//! decomposition.

use serde::{Deserialize, Serialize};

use super::bezier::BezierCurve;
use super::knots::{bezier_spans, insert_raw, refine_to_bezier, KnotVector};
use crate::error::{Error, Result};
use crate::geom::{Aabb, Point3};

/// Whether a curve lives in model space or in a surface parameter domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum CurveDim {
    /// Parameter-space curve; `z` is always zero.
    #[serde(rename = "2d")]
    Two,
    #[default]
    #[serde(rename = "3d")]
    Three,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BSplineCurve {
    degree: usize,
    control_points: Vec<Point3>,
    knots: KnotVector,
    dim: CurveDim,
}

/// A Bézier piece together with the source parameter interval it covers.
#[derive(Debug, Clone, PartialEq)]
pub struct BezierSegment {
    pub bezier: BezierCurve,
    pub interval: (f64, f64),
}

impl BezierSegment {
    /// Evaluates the segment at a parameter of the source curve.
    pub fn eval_source(&self, t: f64) -> Result<Point3> {
        let (a, b) = self.interval;
        self.bezier.eval(((t - a) / (b - a)).clamp(0.0, 1.0))
    }
}

impl BSplineCurve {
    pub fn new(degree: usize, control_points: Vec<Point3>, knots: KnotVector, dim: CurveDim) -> Result<Self> {
        knots.validate_for(control_points.len(), degree)?;
        if let Some(p) = control_points.iter().find(|p| !p.is_finite()) {
            return Err(Error::Geometry(format!("non-finite control point {p:?}")));
        }
        let mut control_points = control_points;
        if dim == CurveDim::Two {
            if let Some(p) = control_points.iter().find(|p| p.z != 0.0) {
                return Err(Error::Geometry(format!("2D curve has non-zero z coordinate at {p:?}")));
            }
            control_points.iter_mut().for_each(|p| p.z = 0.0);
        }
        Ok(Self {
            degree,
            control_points,
            knots,
            dim,
        })
    }

    /// A single Bézier segment on `[0, 1]` as a clamped B-spline.
    pub fn from_bezier(bez: &BezierCurve, dim: CurveDim) -> Result<Self> {
        Self::new(
            bez.degree(),
            bez.control_points().to_vec(),
            KnotVector::bezier(bez.degree(), 0.0, 1.0),
            dim,
        )
    }

    /// Straight segment of degree one on `[0, 1]`.
    pub fn line(a: Point3, b: Point3, dim: CurveDim) -> Result<Self> {
        Self::new(1, vec![a, b], KnotVector::bezier(1, 0.0, 1.0), dim)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn control_points(&self) -> &[Point3] {
        &self.control_points
    }

    pub fn knots(&self) -> &KnotVector {
        &self.knots
    }

    pub fn dim(&self) -> CurveDim {
        self.dim
    }

    /// Valid parameter range `[u_p, u_{n+1}]`.
    pub fn domain(&self) -> (f64, f64) {
        self.knots.domain(self.control_points.len(), self.degree)
    }

    pub fn bbox(&self) -> Aabb {
        Aabb::from_points(self.control_points.iter().copied()).expect("non-empty")
    }

    pub fn eval(&self, t: f64) -> Result<Point3> {
        let n = self.control_points.len();
        let t = self.knots.check_param(n, self.degree, t)?;
        let span = self.knots.span(n, self.degree, t);
        let basis = self.knots.basis_funs(span, self.degree, t);
        Ok(basis.iter().enumerate().fold(Point3::ORIGIN, |acc, (r, &b)| {
            acc + self.control_points[span - self.degree + r] * b
        }))
    }

    /// Inserts `u` once, keeping the shape.
    pub fn insert_knot(&self, u: f64) -> Result<BSplineCurve> {
        let (lo, hi) = self.domain();
        let tol = self.knots.tolerance();
        if !(u > lo + tol && u < hi - tol) {
            return Err(Error::Domain {
                value: u,
                min: lo,
                max: hi,
            });
        }
        let knots = self.knots.snapped();
        let u = knots
            .as_slice()
            .iter()
            .copied()
            .find(|k| (k - u).abs() <= tol)
            .unwrap_or(u);
        let mult = knots.as_slice().iter().filter(|&&k| k == u).count();
        if mult + 1 > self.degree {
            return Err(Error::Multiplicity {
                knot: u,
                multiplicity: mult + 1,
                degree: self.degree,
            });
        }
        let (k, c) = insert_raw(knots.as_slice(), &self.control_points, self.degree, u);
        Ok(Self {
            degree: self.degree,
            control_points: c,
            knots: KnotVector::new(k)?,
            dim: self.dim,
        })
    }

    /// Splits the curve into Bézier segments, one per non-empty knot span.
    pub fn decompose(&self) -> Vec<BezierSegment> {
        self.decompose_with(&[])
    }

    fn decompose_with(&self, extra: &[f64]) -> Vec<BezierSegment> {
        let p = self.degree;
        let (k, c) = refine_to_bezier(&self.knots, &self.control_points, p, extra);
        bezier_spans(&k, c.len(), p)
            .into_iter()
            .map(|(span, a, b)| BezierSegment {
                bezier: BezierCurve::new(c[span - p..=span].to_vec()).expect("finite"),
                interval: (a, b),
            })
            .collect()
    }

    /// Bézier segments covering exactly `[t0, t1]`.
    pub fn decompose_range(&self, t0: f64, t1: f64) -> Result<Vec<BezierSegment>> {
        let t0 = self.knots.check_param(self.control_points.len(), self.degree, t0)?;
        let t1 = self.knots.check_param(self.control_points.len(), self.degree, t1)?;
        if t1 <= t0 {
            return Err(Error::Geometry(format!("empty parameter interval [{t0}, {t1}]")));
        }
        let tol = self.knots.tolerance();
        let mut out = Vec::new();
        for seg in self.decompose_with(&[t0, t1]) {
            let (a, b) = seg.interval;
            if b <= t0 + tol || a >= t1 - tol {
                continue;
            }
            if a >= t0 - tol && b <= t1 + tol {
                out.push(seg);
                continue;
            }
            // Only reachable when t0/t1 sit within tolerance of a knot but
            // were not inserted; trim the piece explicitly.
            let lo = ((t0.max(a) - a) / (b - a)).clamp(0.0, 1.0);
            let hi = ((t1.min(b) - a) / (b - a)).clamp(0.0, 1.0);
            if hi > lo {
                out.push(BezierSegment {
                    bezier: seg.bezier.segment(lo, hi)?,
                    interval: (t0.max(a), t1.min(b)),
                });
            }
        }
        Ok(out)
    }

    /// The sub-curve over `[t0, t1]` as a clamped B-spline with the same
    /// parametrisation.
    pub fn restrict(&self, t0: f64, t1: f64) -> Result<BSplineCurve> {
        let segs = self.decompose_range(t0, t1)?;
        let p = self.degree;
        let mut knots = vec![segs[0].interval.0; p + 1];
        let mut ctrl = segs[0].bezier.control_points().to_vec();
        for s in &segs[1..] {
            knots.extend(std::iter::repeat_n(s.interval.0, p));
            ctrl.extend_from_slice(&s.bezier.control_points()[1..]);
        }
        knots.extend(std::iter::repeat_n(segs[segs.len() - 1].interval.1, p + 1));
        Self::new(p, ctrl, KnotVector::new(knots)?, self.dim)
    }

    /// Same point set traversed in the opposite direction, on the mirrored
    /// parameter range.
    pub fn reversed(&self) -> BSplineCurve {
        let (a, b) = (self.knots.first(), self.knots.last());
        let mut knots: Vec<f64> = self.knots.as_slice().iter().map(|k| a + b - k).collect();
        knots.reverse();
        let mut ctrl = self.control_points.clone();
        ctrl.reverse();
        Self {
            degree: self.degree,
            control_points: ctrl,
            knots: KnotVector::new(knots).expect("mirrored knots stay sorted"),
            dim: self.dim,
        }
    }

    /// Uniform samples over the valid range, ends included.
    pub fn sample(&self, count: usize) -> Vec<Point3> {
        let (a, b) = self.domain();
        let count = count.max(2);
        (0..count)
            .map(|i| {
                let t = a + (b - a) * i as f64 / (count - 1) as f64;
                self.eval(t).expect("in domain")
            })
            .collect()
    }

    pub fn map_points(&self, f: impl Fn(Point3) -> Point3) -> BSplineCurve {
        Self {
            control_points: self.control_points.iter().map(|&p| f(p)).collect(),
            ..self.clone()
        }
    }

    /// The same curve tagged with another dimension; 2D requires `z = 0`.
    pub fn with_dim(&self, dim: CurveDim) -> Result<BSplineCurve> {
        Self::new(self.degree, self.control_points.clone(), self.knots.clone(), dim)
    }
}

/// Evaluates `curve` at `t` (Cox–de Boor basis).
pub fn eval_curve(curve: &BSplineCurve, t: f64) -> Result<Point3> {
    curve.eval(t)
}

pub fn insert_knot(curve: &BSplineCurve, u: f64) -> Result<BSplineCurve> {
    curve.insert_knot(u)
}

pub fn decompose_curve(curve: &BSplineCurve) -> Vec<BezierSegment> {
    curve.decompose()
}
