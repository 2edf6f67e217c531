//! Rational tensor-product B-spline surfaces and Bézier rectangles.

use serde::{Deserialize, Serialize};

use super::bezier::{bernstein_all, bernstein_derivative, bernstein_eval, de_casteljau_split, elevate_to};
use super::knots::{bezier_spans, refine_to_bezier, KnotVector};
use crate::error::{Error, Result};
use crate::geom::{Aabb, Homogeneous, Point3, WeightedPoint};
use crate::topology::PatchKey;

/// Axis-aligned rectangle `[u0, u1] x [v0, v1]` in a surface parameter domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamRect {
    pub u0: f64,
    pub u1: f64,
    pub v0: f64,
    pub v1: f64,
}

impl ParamRect {
    pub fn new(u0: f64, u1: f64, v0: f64, v1: f64) -> Self {
        Self { u0, u1, v0, v1 }
    }

    pub fn unit() -> Self {
        Self::new(0.0, 1.0, 0.0, 1.0)
    }

    pub fn width(&self) -> f64 {
        self.u1 - self.u0
    }

    pub fn height(&self) -> f64 {
        self.v1 - self.v0
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn diagonal(&self) -> f64 {
        self.width().hypot(self.height())
    }

    /// Domain point at local coordinates `(s, t)` in `[0, 1]^2`.
    pub fn at(&self, s: f64, t: f64) -> (f64, f64) {
        (self.u0 + s * self.width(), self.v0 + t * self.height())
    }

    /// Inverse of [`Self::at`].
    pub fn local(&self, u: f64, v: f64) -> (f64, f64) {
        ((u - self.u0) / self.width(), (v - self.v0) / self.height())
    }

    pub fn contains(&self, u: f64, v: f64) -> bool {
        u >= self.u0 && u <= self.u1 && v >= self.v0 && v <= self.v1
    }

    /// Quadrant `(dx, dy)` of this rectangle.
    pub fn quadrant(&self, dx: u32, dy: u32) -> ParamRect {
        let um = 0.5 * (self.u0 + self.u1);
        let vm = 0.5 * (self.v0 + self.v1);
        let (u0, u1) = if dx == 0 { (self.u0, um) } else { (um, self.u1) };
        let (v0, v1) = if dy == 0 { (self.v0, vm) } else { (vm, self.v1) };
        ParamRect::new(u0, u1, v0, v1)
    }
}

fn validate_grid(grid: &[Vec<WeightedPoint>]) -> Result<(usize, usize)> {
    let rows = grid.len();
    let cols = grid.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 {
        return Err(Error::Geometry("empty control grid".into()));
    }
    if let Some(i) = grid.iter().position(|r| r.len() != cols) {
        return Err(Error::Geometry(format!(
            "control grid is not rectangular: row {i} has {} entries, expected {cols}",
            grid[i].len()
        )));
    }
    for (i, row) in grid.iter().enumerate() {
        for (j, p) in row.iter().enumerate() {
            if !p.is_valid() {
                return Err(Error::Geometry(format!(
                    "control point [{i}][{j}] = {p:?} is not finite or has non-positive weight"
                )));
            }
        }
    }
    Ok((rows, cols))
}

fn to_homogeneous(grid: &[Vec<WeightedPoint>]) -> Vec<Vec<Homogeneous>> {
    grid.iter()
        .map(|r| r.iter().map(|p| p.to_homogeneous()).collect())
        .collect()
}

fn from_homogeneous(grid: &[Vec<Homogeneous>]) -> Vec<Vec<WeightedPoint>> {
    grid.iter()
        .map(|r| r.iter().map(|h| h.to_weighted()).collect())
        .collect()
}

fn column<T: Copy>(grid: &[Vec<T>], j: usize) -> Vec<T> {
    grid.iter().map(|r| r[j]).collect()
}

fn transpose<T: Copy>(grid: &[Vec<T>]) -> Vec<Vec<T>> {
    (0..grid[0].len()).map(|j| column(grid, j)).collect()
}

/// Rational B-spline surface; `control[i][j]` pairs `u`-index `i` with
/// `v`-index `j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BSplineSurface {
    degree_u: usize,
    degree_v: usize,
    control: Vec<Vec<WeightedPoint>>,
    knots_u: KnotVector,
    knots_v: KnotVector,
}

impl BSplineSurface {
    pub fn new(
        degree_u: usize,
        degree_v: usize,
        control: Vec<Vec<WeightedPoint>>,
        knots_u: KnotVector,
        knots_v: KnotVector,
    ) -> Result<Self> {
        let (rows, cols) = validate_grid(&control)?;
        knots_u
            .validate_for(rows, degree_u)
            .map_err(|e| Error::Geometry(format!("u direction: {e}")))?;
        knots_v
            .validate_for(cols, degree_v)
            .map_err(|e| Error::Geometry(format!("v direction: {e}")))?;
        Ok(Self {
            degree_u,
            degree_v,
            control,
            knots_u,
            knots_v,
        })
    }

    /// Degree (1, 1) patch through four corners, `c[i][j]` at `(u_i, v_j)`.
    pub fn bilinear(corners: [[Point3; 2]; 2], rect: ParamRect) -> Result<Self> {
        let control = corners
            .iter()
            .map(|r| r.iter().map(|&p| WeightedPoint::from_point(p, 1.0)).collect())
            .collect();
        Self::new(
            1,
            1,
            control,
            KnotVector::bezier(1, rect.u0, rect.u1),
            KnotVector::bezier(1, rect.v0, rect.v1),
        )
    }

    pub fn degrees(&self) -> (usize, usize) {
        (self.degree_u, self.degree_v)
    }

    pub fn control(&self) -> &[Vec<WeightedPoint>] {
        &self.control
    }

    pub fn knots_u(&self) -> &KnotVector {
        &self.knots_u
    }

    pub fn knots_v(&self) -> &KnotVector {
        &self.knots_v
    }

    pub fn domain(&self) -> ParamRect {
        let (u0, u1) = self.knots_u.domain(self.control.len(), self.degree_u);
        let (v0, v1) = self.knots_v.domain(self.control[0].len(), self.degree_v);
        ParamRect::new(u0, u1, v0, v1)
    }

    pub fn bbox(&self) -> Aabb {
        Aabb::from_points(self.control.iter().flatten().map(|p| p.point())).expect("non-empty")
    }

    pub fn is_rational(&self) -> bool {
        self.control.iter().flatten().any(|p| p.w != 1.0)
    }

    pub fn eval_homogeneous(&self, u: f64, v: f64) -> Result<Homogeneous> {
        let rows = self.control.len();
        let cols = self.control[0].len();
        let u = self.knots_u.check_param(rows, self.degree_u, u)?;
        let v = self.knots_v.check_param(cols, self.degree_v, v)?;
        let su = self.knots_u.span(rows, self.degree_u, u);
        let sv = self.knots_v.span(cols, self.degree_v, v);
        let bu = self.knots_u.basis_funs(su, self.degree_u, u);
        let bv = self.knots_v.basis_funs(sv, self.degree_v, v);
        let mut acc = Homogeneous::default();
        for (a, nu) in bu.iter().enumerate() {
            let row = &self.control[su - self.degree_u + a];
            for (b, nv) in bv.iter().enumerate() {
                acc = acc + row[sv - self.degree_v + b].to_homogeneous() * (nu * nv);
            }
        }
        Ok(acc)
    }

    /// Rational evaluation: weighted numerator over the weight denominator.
    pub fn eval(&self, u: f64, v: f64) -> Result<Point3> {
        Ok(self.eval_homogeneous(u, v)?.project())
    }

    /// Knot insertion in `u` then `v` until every span is a Bézier
    /// rectangle. Cells are returned row-major over `v`, then `u`.
    pub fn decompose(&self) -> BezierGrid {
        let hom = to_homogeneous(&self.control);
        let (p, q) = (self.degree_u, self.degree_v);

        // refine along u: every column (fixed j) is a curve over i
        let mut ku = Vec::new();
        let mut cols_refined = Vec::with_capacity(hom[0].len());
        for j in 0..hom[0].len() {
            let (k, c) = refine_to_bezier(&self.knots_u, &column(&hom, j), p, &[]);
            ku = k;
            cols_refined.push(c);
        }
        let grid_u = transpose(&cols_refined);

        let mut kv = Vec::new();
        let mut rows_refined = Vec::with_capacity(grid_u.len());
        for row in &grid_u {
            let (k, c) = refine_to_bezier(&self.knots_v, row, q, &[]);
            kv = k;
            rows_refined.push(c);
        }

        let spans_u = bezier_spans(&ku, rows_refined.len(), p);
        let spans_v = bezier_spans(&kv, rows_refined[0].len(), q);
        let (nu, nv) = (spans_u.len(), spans_v.len());
        let depth = grid_depth(nu.max(nv));
        let mut cells = Vec::with_capacity(nu * nv);
        for (y, &(sv, v0, v1)) in spans_v.iter().enumerate() {
            for (x, &(su, u0, u1)) in spans_u.iter().enumerate() {
                let ctrl: Vec<Vec<Homogeneous>> = rows_refined[su - p..=su]
                    .iter()
                    .map(|r| r[sv - q..=sv].to_vec())
                    .collect();
                cells.push(BezierRectangle {
                    degree_u: p,
                    degree_v: q,
                    control: from_homogeneous(&ctrl),
                    param_rect: ParamRect::new(u0, u1, v0, v1),
                    key: PatchKey::new(x as u32, y as u32, depth),
                });
            }
        }
        BezierGrid {
            cols: nu,
            rows: nv,
            depth,
            cells,
        }
    }

    pub fn map_points(&self, f: impl Fn(Point3) -> Point3) -> BSplineSurface {
        Self {
            control: self
                .control
                .iter()
                .map(|r| r.iter().map(|p| WeightedPoint::from_point(f(p.point()), p.w)).collect())
                .collect(),
            ..self.clone()
        }
    }
}

/// Smallest `d` with `2^d >= n`.
pub fn grid_depth(n: usize) -> u32 {
    let mut d = 0;
    while (1usize << d) < n {
        d += 1;
    }
    d
}

/// The knot-span grid produced by [`BSplineSurface::decompose`].
#[derive(Debug, Clone, PartialEq)]
pub struct BezierGrid {
    /// Number of spans in `u`.
    pub cols: usize,
    /// Number of spans in `v`.
    pub rows: usize,
    /// Quadtree depth at which the grid coordinates are embedded.
    pub depth: u32,
    pub cells: Vec<BezierRectangle>,
}

impl BezierGrid {
    pub fn cell(&self, x: usize, y: usize) -> &BezierRectangle {
        &self.cells[y * self.cols + x]
    }
}

/// A rational tensor-product Bézier patch over a sub-rectangle of its parent
/// surface domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BezierRectangle {
    degree_u: usize,
    degree_v: usize,
    control: Vec<Vec<WeightedPoint>>,
    pub param_rect: ParamRect,
    pub key: PatchKey,
}

impl BezierRectangle {
    pub fn new(control: Vec<Vec<WeightedPoint>>, param_rect: ParamRect, key: PatchKey) -> Result<Self> {
        let (rows, cols) = validate_grid(&control)?;
        if !(param_rect.u0 < param_rect.u1 && param_rect.v0 < param_rect.v1) {
            return Err(Error::Geometry(format!(
                "degenerate parameter rectangle {param_rect:?}"
            )));
        }
        Ok(Self {
            degree_u: rows - 1,
            degree_v: cols - 1,
            control,
            param_rect,
            key,
        })
    }

    pub fn degrees(&self) -> (usize, usize) {
        (self.degree_u, self.degree_v)
    }

    pub fn control(&self) -> &[Vec<WeightedPoint>] {
        &self.control
    }

    pub fn homogeneous(&self) -> Vec<Vec<Homogeneous>> {
        to_homogeneous(&self.control)
    }

    pub fn bbox(&self) -> Aabb {
        Aabb::from_points(self.control.iter().flatten().map(|p| p.point())).expect("non-empty")
    }

    /// Evaluation at local coordinates `(s, t)` in `[0, 1]^2`.
    pub fn eval_local(&self, s: f64, t: f64) -> Result<Point3> {
        for x in [s, t] {
            if !(0.0..=1.0).contains(&x) {
                return Err(Error::Domain {
                    value: x,
                    min: 0.0,
                    max: 1.0,
                });
            }
        }
        Ok(self.eval_local_homogeneous(s, t).project())
    }

    pub(crate) fn eval_local_homogeneous(&self, s: f64, t: f64) -> Homogeneous {
        let bu = bernstein_all(self.degree_u, s);
        let bv = bernstein_all(self.degree_v, t);
        let mut acc = Homogeneous::default();
        for (i, row) in self.control.iter().enumerate() {
            for (j, p) in row.iter().enumerate() {
                acc = acc + p.to_homogeneous() * (bu[i] * bv[j]);
            }
        }
        acc
    }

    /// Partial derivatives `(dS/ds, dS/dt)` of the rational patch at local
    /// coordinates.
    pub fn local_partials(&self, s: f64, t: f64) -> (Point3, Point3) {
        let hom = self.homogeneous();
        let h = self.eval_local_homogeneous(s, t);
        let rows_at_t: Vec<Homogeneous> = hom.iter().map(|r| bernstein_eval(r, t)).collect();
        let hs = bernstein_derivative(&rows_at_t, s);
        let cols_at_s: Vec<Homogeneous> = (0..=self.degree_v)
            .map(|j| bernstein_eval(&column(&hom, j), s))
            .collect();
        let ht = bernstein_derivative(&cols_at_s, t);
        let c = h.project();
        let w = h.weight();
        (
            (hs.spatial() - c * hs.weight()) * (1.0 / w),
            (ht.spatial() - c * ht.weight()) * (1.0 / w),
        )
    }

    /// Evaluation at a parent-domain parameter.
    pub fn eval_param(&self, u: f64, v: f64) -> Result<Point3> {
        let (s, t) = self.param_rect.local(u, v);
        let eps = 1e-12;
        if !(-eps..=1.0 + eps).contains(&s) || !(-eps..=1.0 + eps).contains(&t) {
            return Err(Error::Domain {
                value: if (0.0..=1.0).contains(&s) { v } else { u },
                min: 0.0,
                max: 1.0,
            });
        }
        self.eval_local(s.clamp(0.0, 1.0), t.clamp(0.0, 1.0))
    }

    /// Degree elevation in both directions, shape preserving.
    pub fn elevate(&self, target_u: usize, target_v: usize) -> Result<BezierRectangle> {
        let hom = self.homogeneous();
        let cols: Vec<Vec<Homogeneous>> = (0..=self.degree_v)
            .map(|j| elevate_to(&column(&hom, j), target_u))
            .collect::<Result<_>>()?;
        let grid_u = transpose(&cols);
        let grid: Vec<Vec<Homogeneous>> = grid_u.iter().map(|r| elevate_to(r, target_v)).collect::<Result<_>>()?;
        Ok(BezierRectangle {
            degree_u: target_u,
            degree_v: target_v,
            control: from_homogeneous(&grid),
            param_rect: self.param_rect,
            key: self.key,
        })
    }

    /// Splits at local `s` (in `u`); returns the lower and upper halves.
    pub fn split_u(&self, s: f64) -> (BezierRectangle, BezierRectangle) {
        let hom = self.homogeneous();
        let (mut lo, mut hi) = (Vec::new(), Vec::new());
        for j in 0..=self.degree_v {
            let (l, r) = de_casteljau_split(&column(&hom, j), s);
            lo.push(l);
            hi.push(r);
        }
        let (u_mid, _) = self.param_rect.at(s, 0.0);
        let pr = self.param_rect;
        (
            BezierRectangle {
                control: from_homogeneous(&transpose(&lo)),
                param_rect: ParamRect::new(pr.u0, u_mid, pr.v0, pr.v1),
                ..self.clone()
            },
            BezierRectangle {
                control: from_homogeneous(&transpose(&hi)),
                param_rect: ParamRect::new(u_mid, pr.u1, pr.v0, pr.v1),
                ..self.clone()
            },
        )
    }

    /// Splits at local `t` (in `v`); returns the lower and upper halves.
    pub fn split_v(&self, t: f64) -> (BezierRectangle, BezierRectangle) {
        let hom = self.homogeneous();
        let (mut lo, mut hi) = (Vec::new(), Vec::new());
        for row in &hom {
            let (l, r) = de_casteljau_split(row, t);
            lo.push(l);
            hi.push(r);
        }
        let (_, v_mid) = self.param_rect.at(0.0, t);
        let pr = self.param_rect;
        (
            BezierRectangle {
                control: from_homogeneous(&lo),
                param_rect: ParamRect::new(pr.u0, pr.u1, pr.v0, v_mid),
                ..self.clone()
            },
            BezierRectangle {
                control: from_homogeneous(&hi),
                param_rect: ParamRect::new(pr.u0, pr.u1, v_mid, pr.v1),
                ..self.clone()
            },
        )
    }

    /// Mirror of the control grid in `u`: `P'_{i,j} = P_{m-i,j}`.
    pub fn flipped_u(&self) -> BezierRectangle {
        let mut control = self.control.clone();
        control.reverse();
        BezierRectangle {
            control,
            ..self.clone()
        }
    }

    /// Index-reversed grid `P'_{i,j} = P_{m-i,n-j}`.
    pub fn reversed(&self) -> BezierRectangle {
        let control = self
            .control
            .iter()
            .rev()
            .map(|r| r.iter().rev().copied().collect())
            .collect();
        BezierRectangle {
            control,
            ..self.clone()
        }
    }

    pub fn map_points(&self, f: impl Fn(Point3) -> Point3) -> BezierRectangle {
        BezierRectangle {
            control: self
                .control
                .iter()
                .map(|r| r.iter().map(|p| WeightedPoint::from_point(f(p.point()), p.w)).collect())
                .collect(),
            ..self.clone()
        }
    }
}

pub fn eval_surface(surface: &BSplineSurface, u: f64, v: f64) -> Result<Point3> {
    surface.eval(u, v)
}

pub fn decompose_surface(surface: &BSplineSurface) -> BezierGrid {
    surface.decompose()
}

pub fn elevate_surface_degree(rect: &BezierRectangle, target_u: usize, target_v: usize) -> Result<BezierRectangle> {
    rect.elevate(target_u, target_v)
}
