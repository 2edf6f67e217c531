//! Deterministic synthetic models: cube, plate with holes, extruded polygon
//! and a wavy bicubic sheet.
//!
//! Circles are piecewise cubic: eight 45 degree arcs with handle length
//! `4/3 tan(pi/16) r`. The radial deviation stays below `4.3e-6 r`, which is
//! within `1e-4` for any radius up to 20.

use std::collections::HashMap;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{Point3, WeightedPoint};
use crate::io::{
    from_json, BrepJson, CurveJson, EdgeJson, FaceJson, LoopJson, ShellJson, SurfaceJson, VertexJson, SCHEMA_VERSION,
};
use crate::spline::{BSplineCurve, BSplineSurface, CurveDim, KnotVector};
use crate::topology::BRepModel;
use crate::trim::{TrimCurve, TrimLoop, TrimmedSurface};

/// Number of cubic arcs per full circle.
pub const CIRCLE_ARCS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FixtureKind {
    Cube,
    PlateWithHoles,
    ExtrudedPolygon,
    WavyBicubic,
}

impl FixtureKind {
    pub const ALL: [FixtureKind; 4] = [
        FixtureKind::Cube,
        FixtureKind::PlateWithHoles,
        FixtureKind::ExtrudedPolygon,
        FixtureKind::WavyBicubic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FixtureKind::Cube => "cube",
            FixtureKind::PlateWithHoles => "plate-with-holes",
            FixtureKind::ExtrudedPolygon => "extruded-polygon",
            FixtureKind::WavyBicubic => "wavy-bicubic",
        }
    }
}

impl std::str::FromStr for FixtureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FixtureKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown fixture kind {s:?}")))
    }
}

/// Generator parameters; each kind reads the fields it needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FixtureParams {
    /// Edge length of the cube, plate width, polygon radius or sheet width.
    pub size: f64,
    /// Extrusion height or plate thickness.
    pub height: f64,
    /// Polygon side count.
    pub sides: usize,
    pub holes: usize,
    pub hole_radius: f64,
    /// Knot spans per direction of the bicubic sheet.
    pub spans: usize,
    pub amplitude: f64,
    pub seed: u64,
}

impl Default for FixtureParams {
    fn default() -> Self {
        Self {
            size: 1.0,
            height: 0.25,
            sides: 6,
            holes: 2,
            hole_radius: 0.12,
            spans: 3,
            amplitude: 0.1,
            seed: 0,
        }
    }
}

pub fn generate(kind: FixtureKind, p: &FixtureParams) -> Result<BrepJson> {
    match kind {
        FixtureKind::Cube => cube_json(p.size),
        FixtureKind::PlateWithHoles => plate_json(p),
        FixtureKind::ExtrudedPolygon => extruded_polygon_json(p),
        FixtureKind::WavyBicubic => wavy_bicubic_json(p),
    }
}

pub fn generate_model(kind: FixtureKind, p: &FixtureParams) -> Result<BRepModel> {
    from_json(&generate(kind, p)?)
}

pub fn cube(size: f64) -> BRepModel {
    from_json(&cube_json(size).expect("valid size")).expect("cube fixture")
}

type Uses = Vec<(u32, bool)>;

struct Builder {
    doc: Option<BrepJson>,
    lines: HashMap<(u32, u32), u32>,
}

impl Builder {
    fn new() -> Self {
        Self {
            doc: Some(BrepJson {
                version: SCHEMA_VERSION.to_string(),
                units: "mm".to_string(),
                surfaces: vec![],
                curves3d: vec![],
                pcurves: vec![],
                vertices: vec![],
                edges: vec![],
                loops: vec![],
                faces: vec![],
                shells: vec![],
            }),
            lines: HashMap::new(),
        }
    }

    fn doc(&mut self) -> &mut BrepJson {
        self.doc.as_mut().expect("builder is live")
    }

    fn vertex(&mut self, p: Point3) -> u32 {
        let doc = self.doc();
        let id = doc.vertices.len() as u32;
        doc.vertices.push(VertexJson {
            id,
            point: p.to_array(),
        });
        id
    }

    fn point(&mut self, v: u32) -> Point3 {
        Point3::from_array(self.doc().vertices[v as usize].point)
    }

    fn curve_edge(&mut self, curve: &BSplineCurve, start: u32, end: u32) -> u32 {
        let doc = self.doc();
        let cid = doc.curves3d.len() as u32;
        doc.curves3d.push(CurveJson {
            id: cid,
            degree: curve.degree(),
            knots: curve.knots().as_slice().to_vec(),
            control_points: curve.control_points().iter().map(|p| p.to_array()).collect(),
        });
        let id = doc.edges.len() as u32;
        doc.edges.push(EdgeJson {
            id,
            curve: cid,
            start,
            end,
            t0: None,
            t1: None,
        });
        id
    }

    /// Straight edge between two vertices, shared with any earlier use.
    fn line(&mut self, a: u32, b: u32) -> (u32, bool) {
        if let Some(&e) = self.lines.get(&(a, b)) {
            return (e, false);
        }
        if let Some(&e) = self.lines.get(&(b, a)) {
            return (e, true);
        }
        let (pa, pb) = (self.point(a), self.point(b));
        let curve = BSplineCurve::line(pa, pb, CurveDim::Three).expect("finite line");
        let e = self.curve_edge(&curve, a, b);
        self.lines.insert((a, b), e);
        (e, false)
    }

    fn cycle(&mut self, vs: &[u32]) -> Uses {
        (0..vs.len())
            .map(|i| self.line(vs[i], vs[(i + 1) % vs.len()]))
            .collect()
    }

    fn surface(&mut self, s: SurfaceJson) -> u32 {
        let doc = self.doc();
        let id = doc.surfaces.len() as u32;
        let s = match s {
            SurfaceJson::Plane {
                origin,
                u_axis,
                v_axis,
                u_range,
                v_range,
                ..
            } => SurfaceJson::Plane {
                id,
                origin,
                u_axis,
                v_axis,
                u_range,
                v_range,
            },
            SurfaceJson::Bspline {
                degree_u,
                degree_v,
                knots_u,
                knots_v,
                control_points,
                ..
            } => SurfaceJson::Bspline {
                id,
                degree_u,
                degree_v,
                knots_u,
                knots_v,
                control_points,
            },
        };
        doc.surfaces.push(s);
        id
    }

    /// Plane through `origin` spanned by `u` and `v`, sized to hold `pts`.
    fn plane(&mut self, origin: Point3, u: Point3, v: Point3, pts: &[Point3]) -> u32 {
        let (uu, vv) = (u.dot(u), v.dot(v));
        let mut ur = [f64::INFINITY, f64::NEG_INFINITY];
        let mut vr = ur;
        for p in pts {
            let d = *p - origin;
            let (a, b) = (d.dot(u) / uu, d.dot(v) / vv);
            ur = [ur[0].min(a), ur[1].max(a)];
            vr = [vr[0].min(b), vr[1].max(b)];
        }
        self.surface(SurfaceJson::Plane {
            id: 0,
            origin: origin.to_array(),
            u_axis: u.to_array(),
            v_axis: v.to_array(),
            u_range: ur,
            v_range: vr,
        })
    }

    fn add_loop(&mut self, edges: Uses) -> u32 {
        let doc = self.doc();
        let id = doc.loops.len() as u32;
        doc.loops.push(LoopJson {
            id,
            edges,
            pcurves: None,
            outer: None,
        });
        id
    }

    fn face(&mut self, surface: u32, outer: Uses, inner: Vec<Uses>, same_sense: bool) -> u32 {
        let outer_loop = self.add_loop(outer);
        let inner_loops = inner.into_iter().map(|l| self.add_loop(l)).collect();
        let doc = self.doc();
        let id = doc.faces.len() as u32;
        doc.faces.push(FaceJson {
            id,
            surface,
            outer_loop,
            inner_loops,
            same_sense,
        });
        id
    }

    fn finish(mut self) -> BrepJson {
        let mut doc = self.doc.take().expect("builder is live");
        doc.shells.push(ShellJson {
            id: 0,
            faces: doc.faces.iter().map(|f| f.id).collect(),
        });
        doc
    }
}

/// Cubic B-spline through the full circle, clockwise seen from `+z` when
/// `clockwise`, starting and ending at angle 0.
pub fn circle_curve(center: Point3, radius: f64, clockwise: bool, dim: CurveDim) -> BSplineCurve {
    let sign = if clockwise { -1.0 } else { 1.0 };
    let step = 2.0 * PI / CIRCLE_ARCS as f64;
    let h = 4.0 / 3.0 * (step / 4.0).tan() * radius;
    let at = |a: f64| center + Point3::new(a.cos(), a.sin(), 0.0) * radius;
    let tangent = |a: f64| Point3::new(-a.sin(), a.cos(), 0.0) * sign;
    let mut pts = vec![at(0.0)];
    for k in 0..CIRCLE_ARCS {
        let (a0, a1) = (sign * step * k as f64, sign * step * (k + 1) as f64);
        pts.push(at(a0) + tangent(a0) * h);
        pts.push(at(a1) - tangent(a1) * h);
        pts.push(if k + 1 == CIRCLE_ARCS { pts[0] } else { at(a1) });
    }
    let interior: Vec<f64> = (1..CIRCLE_ARCS).flat_map(|k| [k as f64; 3]).collect();
    let knots = KnotVector::clamped(3, 0.0, CIRCLE_ARCS as f64, &interior).expect("sorted knots");
    BSplineCurve::new(3, pts, knots, dim).expect("valid circle")
}

/// Closed prism over a counter-clockwise polygon in the `z = 0` plane, with
/// optional circular through-holes `(center, radius)`.
fn prism(poly: &[(f64, f64)], height: f64, holes: &[((f64, f64), f64)]) -> Result<BrepJson> {
    if poly.len() < 3 || height.is_nan() || height <= 0.0 {
        return Err(Error::Config("prism needs 3 sides and a positive height".into()));
    }
    let mut b = Builder::new();
    let n = poly.len();
    let bottom: Vec<u32> = poly.iter().map(|&(x, y)| b.vertex(Point3::new(x, y, 0.0))).collect();
    let top: Vec<u32> = poly.iter().map(|&(x, y)| b.vertex(Point3::new(x, y, height))).collect();
    let base_pts: Vec<Point3> = poly.iter().map(|&(x, y)| Point3::new(x, y, 0.0)).collect();
    let top_pts: Vec<Point3> = base_pts.iter().map(|p| *p + Point3::new(0.0, 0.0, height)).collect();
    let (ex, ey, ez) = (
        Point3::new(1.0, 0.0, 0.0),
        Point3::new(0.0, 1.0, 0.0),
        Point3::new(0.0, 0.0, height),
    );

    let mut top_holes = Vec::new();
    let mut bottom_holes = Vec::new();
    let mut walls = Vec::new();
    for &((cx, cy), r) in holes {
        let seam_b = b.vertex(Point3::new(cx + r, cy, 0.0));
        let seam_t = b.vertex(Point3::new(cx + r, cy, height));
        let lower = circle_curve(Point3::new(cx, cy, 0.0), r, true, CurveDim::Three);
        let upper = circle_curve(Point3::new(cx, cy, height), r, true, CurveDim::Three);
        let cb = b.curve_edge(&lower, seam_b, seam_b);
        let ct = b.curve_edge(&upper, seam_t, seam_t);
        let (seam, _) = b.line(seam_b, seam_t);
        top_holes.push(vec![(ct, false)]);
        bottom_holes.push(vec![(cb, true)]);
        let control = lower
            .control_points()
            .iter()
            .zip(upper.control_points())
            .map(|(p, q)| vec![wp(*p), wp(*q)])
            .collect();
        let surf = BSplineSurface::new(3, 1, control, lower.knots().clone(), KnotVector::bezier(1, 0.0, 1.0))?;
        walls.push((surf, vec![(cb, false), (seam, false), (ct, true), (seam, true)]));
    }

    let outer = b.cycle(&top);
    let s = b.plane(top_pts[0], ex, ey, &top_pts);
    b.face(s, outer, top_holes, true);
    let rev: Vec<u32> = bottom.iter().rev().copied().collect();
    let outer = b.cycle(&rev);
    let s = b.plane(base_pts[0], ey, ex, &base_pts);
    b.face(s, outer, bottom_holes, true);
    for i in 0..n {
        let j = (i + 1) % n;
        let side = b.cycle(&[bottom[i], bottom[j], top[j], top[i]]);
        let s = b.plane(
            base_pts[i],
            base_pts[j] - base_pts[i],
            ez,
            &[base_pts[i], base_pts[j], top_pts[j], top_pts[i]],
        );
        b.face(s, side, vec![], true);
    }
    for (surf, uses) in walls {
        let s = b.surface(surface_json(&surf));
        b.face(s, uses, vec![], true);
    }
    Ok(b.finish())
}

fn wp(p: Point3) -> WeightedPoint {
    WeightedPoint::from_point(p, 1.0)
}

fn surface_json(s: &BSplineSurface) -> SurfaceJson {
    let (degree_u, degree_v) = s.degrees();
    SurfaceJson::Bspline {
        id: 0,
        degree_u,
        degree_v,
        knots_u: s.knots_u().as_slice().to_vec(),
        knots_v: s.knots_v().as_slice().to_vec(),
        control_points: s
            .control()
            .iter()
            .map(|r| r.iter().map(|p| [p.x, p.y, p.z, p.w]).collect())
            .collect(),
    }
}

pub fn cube_json(size: f64) -> Result<BrepJson> {
    if !(size > 0.0 && size.is_finite()) {
        return Err(Error::Config(format!("cube size must be positive, got {size}")));
    }
    prism(&[(0.0, 0.0), (size, 0.0), (size, size), (0.0, size)], size, &[])
}

/// Rectangular plate `size x size/2 x height` with `holes` seeded circular
/// through-holes.
pub fn plate_json(p: &FixtureParams) -> Result<BrepJson> {
    let (w, d, r) = (p.size, p.size / 2.0, p.hole_radius);
    if !(w > 0.0 && r > 0.0) {
        return Err(Error::Config("plate size and hole radius must be positive".into()));
    }
    let margin = 0.25 * r;
    if 2.0 * (r + margin) >= d {
        return Err(Error::Config(format!("hole radius {r} does not fit a plate {w} x {d}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let mut centers: Vec<((f64, f64), f64)> = Vec::with_capacity(p.holes);
    let mut tries = 0;
    while centers.len() < p.holes {
        tries += 1;
        if tries > 10_000 {
            return Err(Error::Config(format!("cannot place {} holes of radius {r}", p.holes)));
        }
        let c = (
            rng.random_range(r + margin..w - r - margin),
            rng.random_range(r + margin..d - r - margin),
        );
        let clear = centers
            .iter()
            .all(|&((x, y), _)| ((x - c.0).powi(2) + (y - c.1).powi(2)).sqrt() > 2.0 * r + margin);
        if clear {
            centers.push((c, r));
        }
    }
    prism(&[(0.0, 0.0), (w, 0.0), (w, d), (0.0, d)], p.height, &centers)
}

/// Prism over a seeded star-shaped polygon with `sides` vertices.
pub fn extruded_polygon_json(p: &FixtureParams) -> Result<BrepJson> {
    if p.sides < 3 {
        return Err(Error::Config(format!("polygon needs 3 sides, got {}", p.sides)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let step = 2.0 * PI / p.sides as f64;
    let poly: Vec<(f64, f64)> = (0..p.sides)
        .map(|k| {
            let a = step * (k as f64 + rng.random_range(-0.3..0.3));
            let rad = p.size * rng.random_range(0.6..1.0);
            (rad * a.cos(), rad * a.sin())
        })
        .collect();
    prism(&poly, p.height, &[])
}

/// Seeded bicubic B-spline surface over `[0,1]^2` with `spans` uniform knot
/// spans per direction.
pub fn wavy_surface(size: f64, spans: usize, amplitude: f64, seed: u64) -> Result<BSplineSurface> {
    if spans == 0 {
        return Err(Error::Config("wavy sheet needs at least one span".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = spans + 3;
    let interior: Vec<f64> = (1..spans).map(|k| k as f64 / spans as f64).collect();
    let knots = KnotVector::clamped(3, 0.0, 1.0, &interior)?;
    let control = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let (x, y) = (i as f64 / (n - 1) as f64, j as f64 / (n - 1) as f64);
                    let z = amplitude * ((2.0 * PI * x).sin() * (PI * y).cos())
                        + 0.25 * amplitude * rng.random_range(-1.0..1.0);
                    wp(Point3::new(size * x, size * y, size * z))
                })
                .collect()
        })
        .collect();
    BSplineSurface::new(3, 3, control, knots.clone(), knots)
}

/// Single untrimmed bicubic face bounded by its four iso-curves.
pub fn wavy_bicubic_json(p: &FixtureParams) -> Result<BrepJson> {
    let surf = wavy_surface(p.size, p.spans, p.amplitude, p.seed)?;
    let mut b = Builder::new();
    let ctrl = surf.control();
    let n = ctrl.len();
    let corner = |i: usize, j: usize| ctrl[i][j].point();
    let v = [
        b.vertex(corner(0, 0)),
        b.vertex(corner(n - 1, 0)),
        b.vertex(corner(n - 1, n - 1)),
        b.vertex(corner(0, n - 1)),
    ];
    let iso = |pts: Vec<Point3>| BSplineCurve::new(3, pts, surf.knots_u().clone(), CurveDim::Three).expect("iso-curve");
    let south = iso((0..n).map(|i| ctrl[i][0].point()).collect());
    let east = iso((0..n).map(|j| ctrl[n - 1][j].point()).collect());
    let north = iso((0..n).map(|i| ctrl[i][n - 1].point()).collect());
    let west = iso((0..n).map(|j| ctrl[0][j].point()).collect());
    let es = b.curve_edge(&south, v[0], v[1]);
    let ee = b.curve_edge(&east, v[1], v[2]);
    let en = b.curve_edge(&north, v[3], v[2]);
    let ew = b.curve_edge(&west, v[0], v[3]);
    let s = b.surface(surface_json(&surf));
    b.face(s, vec![(es, false), (ee, false), (en, true), (ew, true)], vec![], true);
    Ok(b.finish())
}

/// Unit-square bicubic sheet trimmed to the quarter disc `u^2 + v^2 <= 1`.
/// The arc is two cubic 45 degree pieces.
pub fn quarter_disc(seed: u64) -> TrimmedSurface {
    let surface = wavy_surface(1.0, 1, 0.2, seed).expect("one-span sheet");
    let h = 4.0 / 3.0 * (PI / 16.0).tan();
    let at = |a: f64| Point3::new(a.cos(), a.sin(), 0.0);
    let tan = |a: f64| Point3::new(-a.sin(), a.cos(), 0.0);
    let (a0, a1, a2) = (0.0, PI / 4.0, PI / 2.0);
    let arc = vec![
        at(a0),
        at(a0) + tan(a0) * h,
        at(a1) - tan(a1) * h,
        at(a1),
        at(a1) + tan(a1) * h,
        at(a2) - tan(a2) * h,
        Point3::new(0.0, 1.0, 0.0),
    ];
    let knots = KnotVector::clamped(3, 0.0, 2.0, &[1.0, 1.0, 1.0]).expect("sorted knots");
    let line = |a: Point3, b: Point3| TrimCurve::new(BSplineCurve::line(a, b, CurveDim::Two).expect("line"), false);
    let o = Point3::new(0.0, 0.0, 0.0);
    let outer = TrimLoop::new(vec![
        line(o, Point3::new(1.0, 0.0, 0.0)),
        TrimCurve::new(BSplineCurve::new(3, arc, knots, CurveDim::Two).expect("arc"), false),
        line(Point3::new(0.0, 1.0, 0.0), o),
    ])
    .expect("closed loop");
    TrimmedSurface::new(surface, vec![outer]).expect("quarter disc")
}

/// Seeded model for randomized tests: prisms and plates of varying size.
pub fn random_model(seed: u64) -> BRepModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_f1c7);
    let params = FixtureParams {
        sides: rng.random_range(3..=10),
        holes: rng.random_range(0..=3),
        hole_radius: 0.06,
        height: rng.random_range(0.1..0.5),
        seed,
        ..FixtureParams::default()
    };
    let kind = if rng.random_bool(0.5) {
        FixtureKind::ExtrudedPolygon
    } else {
        FixtureKind::PlateWithHoles
    };
    generate_model(kind, &params).expect("random fixture")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::{face_adjacency, validate_model};

    #[test]
    fn every_kind_validates() {
        for kind in FixtureKind::ALL {
            let m = generate_model(kind, &FixtureParams::default()).unwrap();
            let report = validate_model(&m);
            assert!(report.is_valid(), "{}: {report}", kind.name());
            assert!(report.violations.is_empty(), "{}: {report}", kind.name());
        }
    }

    #[test]
    fn circle_deviation_is_small() {
        let r = 20.0;
        let c = circle_curve(Point3::new(1.0, 2.0, 0.0), r, true, CurveDim::Two);
        let worst = c
            .sample(4001)
            .iter()
            .map(|p| ((p.x - 1.0).hypot(p.y - 2.0) - r).abs())
            .fold(0.0, f64::max);
        assert!(worst <= 1e-4, "{worst}");
        assert!(worst > 0.0);
    }

    #[test]
    fn plate_face_counts() {
        let p = FixtureParams {
            holes: 3,
            hole_radius: 0.08,
            ..FixtureParams::default()
        };
        let m = generate_model(FixtureKind::PlateWithHoles, &p).unwrap();
        assert_eq!(m.faces.len(), 6 + 3);
        let adj = face_adjacency(&m);
        let top = &m.faces[0];
        assert_eq!(top.inner_loops.len(), 3);
        assert_eq!(adj[&top.id].len(), 4 + 3);
    }

    #[test]
    fn generation_is_deterministic() {
        for kind in FixtureKind::ALL {
            let p = FixtureParams {
                seed: 9,
                ..FixtureParams::default()
            };
            assert_eq!(generate(kind, &p).unwrap(), generate(kind, &p).unwrap());
        }
    }

    #[test]
    fn kind_names_parse() {
        for kind in FixtureKind::ALL {
            assert_eq!(kind.name().parse::<FixtureKind>().unwrap(), kind);
        }
        assert!("sphere".parse::<FixtureKind>().is_err());
    }
}
