//! Trim loops and point/rectangle classification in parameter space.

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Point3;
use crate::spline::{BSplineCurve, BSplineSurface, BezierRectangle, CurveDim, Diagonal, ParamRect};

/// Loops must close within this fraction of the domain diagonal.
pub const CLOSURE_TOL_REL: f64 = 1e-8;
/// Loops whose polyline area is below this fraction of the domain area are
/// ignored.
pub const DEGENERATE_AREA_REL: f64 = 1e-12;

pub type Uv = (f64, f64);

/// One p-curve use within a loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrimCurve {
    pub curve: BSplineCurve,
    pub reversed: bool,
}

impl TrimCurve {
    pub fn new(curve: BSplineCurve, reversed: bool) -> Self {
        Self { curve, reversed }
    }

    /// Point at fraction `f` of the parameter range, in loop direction.
    pub fn point_at(&self, f: f64) -> Uv {
        let (a, b) = self.curve.domain();
        let f = if self.reversed { 1.0 - f } else { f };
        let p = self.curve.eval(a + f * (b - a)).expect("inside domain");
        (p.x, p.y)
    }

    pub fn start(&self) -> Uv {
        self.point_at(0.0)
    }

    pub fn end(&self) -> Uv {
        self.point_at(1.0)
    }
}

/// A closed chain of p-curves. Outer loops run counter-clockwise, inner
/// loops clockwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrimLoop {
    pub curves: Vec<TrimCurve>,
}

impl TrimLoop {
    pub fn new(curves: Vec<TrimCurve>) -> Result<Self> {
        if curves.is_empty() {
            return Err(Error::Empty("trim loop has no curves"));
        }
        if let Some(i) = curves.iter().position(|c| c.curve.dim() != CurveDim::Two) {
            return Err(Error::Geometry(format!("trim curve {i} is not a 2D p-curve")));
        }
        Ok(Self { curves })
    }

    /// Closed polygon through `corners` made of linear p-curves.
    pub fn polygon(corners: &[Uv]) -> Result<Self> {
        if corners.len() < 3 {
            return Err(Error::Geometry(format!(
                "polygon loop needs 3 corners, got {}",
                corners.len()
            )));
        }
        let n = corners.len();
        let curves = (0..n)
            .map(|i| {
                let (a, b) = (corners[i], corners[(i + 1) % n]);
                BSplineCurve::line(Point3::new(a.0, a.1, 0.0), Point3::new(b.0, b.1, 0.0), CurveDim::Two)
                    .map(|c| TrimCurve::new(c, false))
            })
            .collect::<Result<_>>()?;
        Self::new(curves)
    }

    /// Counter-clockwise boundary of `rect`.
    pub fn rectangle(rect: ParamRect) -> Self {
        Self::polygon(&[
            (rect.u0, rect.v0),
            (rect.u1, rect.v0),
            (rect.u1, rect.v1),
            (rect.u0, rect.v1),
        ])
        .expect("four corners")
    }

    /// Largest gap between consecutive curve ends.
    pub fn closure_gap(&self) -> f64 {
        let n = self.curves.len();
        (0..n)
            .map(|i| {
                let a = self.curves[i].end();
                let b = self.curves[(i + 1) % n].start();
                (a.0 - b.0).hypot(a.1 - b.1)
            })
            .fold(0.0, f64::max)
    }

    /// Closed polyline with `k` segments per curve; the closing point is not
    /// repeated.
    pub fn polyline(&self, k: usize) -> Vec<Uv> {
        let k = k.max(1);
        let mut pts = Vec::with_capacity(k * self.curves.len());
        for c in &self.curves {
            pts.extend((0..k).map(|i| c.point_at(i as f64 / k as f64)));
        }
        pts
    }

    pub fn reversed(&self) -> TrimLoop {
        TrimLoop {
            curves: self
                .curves
                .iter()
                .rev()
                .map(|c| TrimCurve::new(c.curve.clone(), !c.reversed))
                .collect(),
        }
    }
}

/// Shoelace area; positive for counter-clockwise polygons.
pub fn signed_area(poly: &[Uv]) -> f64 {
    let n = poly.len();
    0.5 * (0..n)
        .map(|i| {
            let (a, b) = (poly[i], poly[(i + 1) % n]);
            a.0 * b.1 - b.0 * a.1
        })
        .sum::<f64>()
}

/// A surface restricted by trim loops; `loops[0]` is the outer loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrimmedSurface {
    pub surface: BSplineSurface,
    pub loops: Vec<TrimLoop>,
}

impl TrimmedSurface {
    /// Checks closure, domain containment and (by sampling) that loops do
    /// not cross each other.
    pub fn new(surface: BSplineSurface, loops: Vec<TrimLoop>) -> Result<Self> {
        if loops.is_empty() {
            return Err(Error::Geometry("trimmed surface needs an outer loop".into()));
        }
        let dom = surface.domain();
        let tol = CLOSURE_TOL_REL * dom.diagonal();
        for (li, lp) in loops.iter().enumerate() {
            let gap = lp.closure_gap();
            if gap > tol {
                return Err(Error::Geometry(format!(
                    "trim loop {li} is open: gap {gap:.3e} exceeds {tol:.3e}"
                )));
            }
            let slack = 1e-6 * dom.diagonal();
            for (u, v) in lp.polyline(16) {
                let inside = u >= dom.u0 - slack && u <= dom.u1 + slack && v >= dom.v0 - slack && v <= dom.v1 + slack;
                if !inside {
                    return Err(Error::Geometry(format!(
                        "trim loop {li} leaves the surface domain at ({u}, {v})"
                    )));
                }
            }
        }
        let polys: Vec<Vec<Uv>> = loops.iter().map(|l| l.polyline(32)).collect();
        for a in 0..polys.len() {
            for b in a + 1..polys.len() {
                if polylines_cross(&polys[a], &polys[b]) {
                    return Err(Error::Geometry(format!("trim loops {a} and {b} cross")));
                }
            }
        }
        Ok(Self { surface, loops })
    }

    /// The whole surface, bounded by its domain rectangle.
    pub fn untrimmed(surface: BSplineSurface) -> Self {
        let outer = TrimLoop::rectangle(surface.domain());
        Self {
            surface,
            loops: vec![outer],
        }
    }

    pub fn outer(&self) -> &TrimLoop {
        &self.loops[0]
    }

    pub fn inner(&self) -> &[TrimLoop] {
        &self.loops[1..]
    }
}

fn orient(a: Uv, b: Uv, c: Uv) -> f64 {
    (b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0)
}

fn segments_cross(a: Uv, b: Uv, c: Uv, d: Uv) -> bool {
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

fn polylines_cross(p: &[Uv], q: &[Uv]) -> bool {
    let (np, nq) = (p.len(), q.len());
    (0..np).any(|i| {
        let (a, b) = (p[i], p[(i + 1) % np]);
        (0..nq).any(|j| segments_cross(a, b, q[j], q[(j + 1) % nq]))
    })
}

fn point_segment_distance(p: Uv, a: Uv, b: Uv) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    let t = if len2 > 0.0 {
        (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (p.0 - a.0 - t * dx).hypot(p.1 - a.1 - t * dy)
}

/// Parameter interval of segment `a -> b` inside the closed rectangle
/// (Liang-Barsky), if any.
fn clip_segment(a: Uv, b: Uv, r: &ParamRect) -> Option<(f64, f64)> {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let mut t0: f64 = 0.0;
    let mut t1: f64 = 1.0;
    for (p, q) in [(-dx, a.0 - r.u0), (dx, r.u1 - a.0), (-dy, a.1 - r.v0), (dy, r.v1 - a.1)] {
        if p == 0.0 {
            if q < 0.0 {
                return None;
            }
        } else {
            let t = q / p;
            if p < 0.0 {
                t0 = t0.max(t);
            } else {
                t1 = t1.min(t);
            }
            if t0 > t1 {
                return None;
            }
        }
    }
    Some((t0, t1))
}

/// Quadtree leaf classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PatchClass {
    Inside,
    Outside,
    Boundary,
}

/// Result of [`classify_point`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PointClass {
    pub inside: bool,
    /// Within the snap tolerance of a p-curve; `inside` is then unreliable.
    pub on_boundary: bool,
}

#[derive(Debug, Clone)]
struct Segment {
    a: Uv,
    b: Uv,
    lo: Uv,
    hi: Uv,
    loop_index: usize,
    index: usize,
}

/// Polyline approximation of a trimmed domain, oriented and ready for
/// winding queries.
#[derive(Debug, Clone)]
pub struct TrimDomain {
    pub domain: ParamRect,
    /// Absolute snap tolerance in parameter units.
    pub tol: f64,
    loops: Vec<Vec<Uv>>,
    fine: Vec<Vec<Uv>>,
    segments: Vec<Segment>,
    pub warnings: Vec<String>,
}

impl TrimDomain {
    /// `k` polyline samples per curve; `snap_rel` is relative to the domain
    /// diagonal.
    pub fn new(ts: &TrimmedSurface, k: usize, snap_rel: f64) -> Result<Self> {
        let domain = ts.surface.domain();
        let mut warnings = Vec::new();
        let mut loops = Vec::new();
        let mut fine = Vec::new();
        let min_area = DEGENERATE_AREA_REL * domain.area();
        for (li, lp) in ts.loops.iter().enumerate() {
            let mut poly = lp.polyline(k);
            let mut dense = lp.polyline(k * 16);
            let area = signed_area(&poly);
            if area.abs() < min_area {
                let msg = format!("trim loop {li} is degenerate (area {area:.3e}); ignored");
                warn!("{msg}");
                warnings.push(msg);
                if li == 0 {
                    return Err(Error::Geometry("outer trim loop is degenerate".into()));
                }
                continue;
            }
            let want_ccw = li == 0;
            if (area > 0.0) != want_ccw {
                let msg = format!(
                    "trim loop {li} has {} orientation; reversed",
                    if area > 0.0 { "counter-clockwise" } else { "clockwise" }
                );
                warn!("{msg}");
                warnings.push(msg);
                poly.reverse();
                dense.reverse();
            }
            loops.push(poly);
            fine.push(dense);
        }
        let mut segments = Vec::new();
        for (li, poly) in loops.iter().enumerate() {
            let n = poly.len();
            for i in 0..n {
                let (a, b) = (poly[i], poly[(i + 1) % n]);
                segments.push(Segment {
                    a,
                    b,
                    lo: (a.0.min(b.0), a.1.min(b.1)),
                    hi: (a.0.max(b.0), a.1.max(b.1)),
                    loop_index: li,
                    index: i,
                });
            }
        }
        Ok(Self {
            domain,
            tol: snap_rel * domain.diagonal(),
            loops,
            fine,
            segments,
            warnings,
        })
    }

    /// Oriented polylines, outer first.
    pub fn loops(&self) -> &[Vec<Uv>] {
        &self.loops
    }

    /// Nonzero winding number of `(u, v)` against all loops.
    pub fn winding(&self, u: f64, v: f64) -> i32 {
        let p = (u, v);
        let mut wn = 0;
        for s in &self.segments {
            let (a, b) = (s.a, s.b);
            if a.1 <= v {
                if b.1 > v && orient(a, b, p) > 0.0 {
                    wn += 1;
                }
            } else if b.1 <= v && orient(a, b, p) < 0.0 {
                wn -= 1;
            }
        }
        wn
    }

    pub fn distance_to_boundary(&self, u: f64, v: f64) -> f64 {
        self.segments
            .iter()
            .map(|s| point_segment_distance((u, v), s.a, s.b))
            .fold(f64::INFINITY, f64::min)
    }

    fn near(&self, u: f64, v: f64) -> bool {
        let t = self.tol;
        self.segments.iter().any(|s| {
            u >= s.lo.0 - t
                && u <= s.hi.0 + t
                && v >= s.lo.1 - t
                && v <= s.hi.1 + t
                && point_segment_distance((u, v), s.a, s.b) <= t
        })
    }

    fn touches(s: &Segment, r: &ParamRect) -> bool {
        s.hi.0 >= r.u0 && s.lo.0 <= r.u1 && s.hi.1 >= r.v0 && s.lo.1 <= r.v1
    }

    fn shrunk(&self, r: &ParamRect) -> ParamRect {
        let du = self.tol.min(0.25 * r.width());
        let dv = self.tol.min(0.25 * r.height());
        ParamRect::new(r.u0 + du, r.u1 - du, r.v0 + dv, r.v1 - dv)
    }

    /// Whether any polyline segment enters `r` shrunk by the snap tolerance.
    pub fn crosses(&self, r: &ParamRect) -> bool {
        let inner = self.shrunk(r);
        self.segments
            .iter()
            .any(|s| Self::touches(s, &inner) && clip_segment(s.a, s.b, &inner).is_some())
    }

    /// The split diagonal whose two corners the boundary enters and leaves
    /// through, if the boundary crosses `r` exactly once.
    pub fn diagonal_incidence(&self, r: &ParamRect) -> Option<Diagonal> {
        let inner = self.shrunk(r);
        let hits: Vec<&Segment> = self
            .segments
            .iter()
            .filter(|s| Self::touches(s, &inner) && clip_segment(s.a, s.b, &inner).is_some())
            .collect();
        let first = hits.first()?;
        let li = first.loop_index;
        if hits.iter().any(|s| s.loop_index != li) {
            return None;
        }
        let n = self.loops[li].len();
        let mut idx: Vec<usize> = hits.iter().map(|s| s.index).collect();
        idx.sort_unstable();
        if idx.len() == n {
            return None;
        }
        // rotate the cyclic run so it starts after the single gap
        let gaps: Vec<usize> = (0..idx.len())
            .filter(|&k| (idx[(k + 1) % idx.len()] + n - idx[k]) % n != 1)
            .collect();
        if gaps.len() != 1 {
            return None;
        }
        let start = idx[(gaps[0] + 1) % idx.len()];
        let end = idx[gaps[0]];
        let poly = &self.loops[li];
        let seg = |i: usize| (poly[i], poly[(i + 1) % n]);
        let (a0, b0) = seg(start);
        let (a1, b1) = seg(end);
        let (t_in, _) = clip_segment(a0, b0, r)?;
        let (_, t_out) = clip_segment(a1, b1, r)?;
        let p_in = (a0.0 + t_in * (b0.0 - a0.0), a0.1 + t_in * (b0.1 - a0.1));
        let p_out = (a1.0 + t_out * (b1.0 - a1.0), a1.1 + t_out * (b1.1 - a1.1));
        let corner = |p: Uv| -> Option<(u32, u32)> {
            for (cx, cy) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
                let c = r.at(cx as f64, cy as f64);
                if (p.0 - c.0).hypot(p.1 - c.1) <= self.tol {
                    return Some((cx, cy));
                }
            }
            None
        };
        let (ci, co) = (corner(p_in)?, corner(p_out)?);
        if ci.0 == co.0 || ci.1 == co.1 {
            return None;
        }
        Some(if ci.0 == ci.1 { Diagonal::Main } else { Diagonal::Anti })
    }

    /// Dense polyline pieces of the boundary crossing `r`, in loop order.
    /// Pieces running within the snap tolerance of the rectangle border are
    /// left out.
    pub fn clipped_pieces(&self, r: &ParamRect) -> Vec<(Uv, Uv)> {
        let r = &self.shrunk(r);
        let mut out = Vec::new();
        for poly in &self.fine {
            let n = poly.len();
            for i in 0..n {
                let (a, b) = (poly[i], poly[(i + 1) % n]);
                if let Some((t0, t1)) = clip_segment(a, b, r) {
                    if t1 > t0 {
                        let at = |t: f64| (a.0 + t * (b.0 - a.0), a.1 + t * (b.1 - a.1));
                        out.push((at(t0), at(t1)));
                    }
                }
            }
        }
        out
    }
}

/// Nonzero-winding classification; points within the snap tolerance of a
/// p-curve are flagged `on_boundary`.
pub fn classify_point(domain: &TrimDomain, u: f64, v: f64) -> PointClass {
    PointClass {
        inside: domain.winding(u, v) != 0,
        on_boundary: domain.near(u, v),
    }
}

/// Inside / Outside when no p-curve enters the rectangle and the nine
/// sample points agree; Boundary otherwise.
pub fn classify_param_rect(domain: &TrimDomain, r: &ParamRect) -> PatchClass {
    if domain.crosses(r) {
        return PatchClass::Boundary;
    }
    let mut inside = 0;
    let mut outside = 0;
    for t in [0.0, 0.5, 1.0] {
        for s in [0.0, 0.5, 1.0] {
            let (u, v) = r.at(s, t);
            let c = classify_point(domain, u, v);
            if c.on_boundary {
                continue;
            }
            if c.inside {
                inside += 1;
            } else {
                outside += 1;
            }
        }
    }
    match (inside, outside) {
        (0, 0) => {
            let (u, v) = r.at(0.5, 0.5);
            if domain.winding(u, v) != 0 {
                PatchClass::Inside
            } else {
                PatchClass::Outside
            }
        }
        (_, 0) => PatchClass::Inside,
        (0, _) => PatchClass::Outside,
        _ => PatchClass::Boundary,
    }
}

pub fn classify_rectangle(domain: &TrimDomain, node: &BezierRectangle) -> PatchClass {
    classify_param_rect(domain, &node.param_rect)
}
