//! JSON interchange schema for B-rep models.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{Point3, WeightedPoint};
use crate::spline::{BSplineCurve, BSplineSurface, CurveDim, KnotVector, ParamRect};
use crate::topology::{
    BRepModel, EdgeId, EdgeRec, FaceId, FaceRec, LoopEdge, LoopId, LoopRec, ShellId, ShellRec, VertexId, VertexRec,
};
use crate::trim::{TrimCurve, TrimLoop, TrimmedSurface};

pub const SCHEMA_VERSION: &str = "1.0";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BrepJson {
    pub version: String,
    #[serde(default)]
    pub units: String,
    pub surfaces: Vec<SurfaceJson>,
    #[serde(default)]
    pub curves3d: Vec<CurveJson>,
    #[serde(default)]
    pub pcurves: Vec<PCurveJson>,
    pub vertices: Vec<VertexJson>,
    pub edges: Vec<EdgeJson>,
    pub loops: Vec<LoopJson>,
    pub faces: Vec<FaceJson>,
    #[serde(default)]
    pub shells: Vec<ShellJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum SurfaceJson {
    Bspline {
        id: u32,
        degree_u: usize,
        degree_v: usize,
        knots_u: Vec<f64>,
        knots_v: Vec<f64>,
        /// `control_points[i][j] = [x, y, z, w]`, `i` along `u`.
        control_points: Vec<Vec<[f64; 4]>>,
    },
    /// `origin + u * u_axis + v * v_axis` over `u_range x v_range`.
    Plane {
        id: u32,
        origin: [f64; 3],
        u_axis: [f64; 3],
        v_axis: [f64; 3],
        u_range: [f64; 2],
        v_range: [f64; 2],
    },
}

impl SurfaceJson {
    pub fn id(&self) -> u32 {
        match self {
            SurfaceJson::Bspline { id, .. } | SurfaceJson::Plane { id, .. } => *id,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveJson {
    pub id: u32,
    pub degree: usize,
    pub knots: Vec<f64>,
    pub control_points: Vec<[f64; 3]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PCurveJson {
    pub id: u32,
    pub degree: usize,
    pub knots: Vec<f64>,
    pub control_points: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VertexJson {
    pub id: u32,
    pub point: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeJson {
    pub id: u32,
    pub curve: u32,
    pub start: u32,
    pub end: u32,
    /// Defaults to the start of the curve domain.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t1: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoopJson {
    pub id: u32,
    /// `[edge id, reversed]` in loop order.
    pub edges: Vec<(u32, bool)>,
    /// `[p-curve id, reversed]` tracing the loop in the face domain. May be
    /// omitted for planes (derived from the edges) and for outer loops
    /// covering the whole domain.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pcurves: Option<Vec<(u32, bool)>>,
    /// Defaults to whether a face names this loop as its outer loop.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outer: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FaceJson {
    pub id: u32,
    pub surface: u32,
    pub outer_loop: u32,
    #[serde(default)]
    pub inner_loops: Vec<u32>,
    #[serde(default = "yes")]
    pub same_sense: bool,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShellJson {
    pub id: u32,
    pub faces: Vec<u32>,
}

fn perr(location: impl Into<String>, message: impl Into<String>) -> Error {
    Error::parse(location, message)
}

fn located<T>(r: Result<T>, location: impl Into<String>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Parse { .. } => e,
        other => perr(location, other.to_string()),
    })
}

fn p3(a: [f64; 3]) -> Point3 {
    Point3::from_array(a)
}

fn unique_ids<'a>(ids: impl Iterator<Item = &'a u32>, table: &str) -> Result<HashMap<u32, usize>> {
    let mut map = HashMap::new();
    for (i, &id) in ids.enumerate() {
        if map.insert(id, i).is_some() {
            return Err(perr(format!("{table}[{i}].id"), format!("duplicate id {id}")));
        }
    }
    Ok(map)
}

fn resolve(map: &HashMap<u32, usize>, id: u32, location: String) -> Result<usize> {
    map.get(&id)
        .copied()
        .ok_or_else(|| perr(location, format!("unresolved id {id}")))
}

enum SurfaceKind {
    Plane { origin: Point3, u: Point3, v: Point3 },
    General,
}

fn build_surface(s: &SurfaceJson, loc: &str) -> Result<(BSplineSurface, SurfaceKind)> {
    match s {
        SurfaceJson::Bspline {
            degree_u,
            degree_v,
            knots_u,
            knots_v,
            control_points,
            ..
        } => {
            let control = control_points
                .iter()
                .map(|r| r.iter().map(|&[x, y, z, w]| WeightedPoint { x, y, z, w }).collect())
                .collect();
            let ku = located(KnotVector::new(knots_u.clone()), format!("{loc}.knots_u"))?;
            let kv = located(KnotVector::new(knots_v.clone()), format!("{loc}.knots_v"))?;
            let surf = located(BSplineSurface::new(*degree_u, *degree_v, control, ku, kv), loc)?;
            Ok((surf, SurfaceKind::General))
        }
        SurfaceJson::Plane {
            origin,
            u_axis,
            v_axis,
            u_range,
            v_range,
            ..
        } => {
            let (o, u, v) = (p3(*origin), p3(*u_axis), p3(*v_axis));
            let scale = u.norm() * v.norm();
            if scale == 0.0 || u.dot(v).abs() > 1e-9 * scale {
                return Err(perr(loc, "plane axes must be non-zero and orthogonal"));
            }
            if !(u_range[0] < u_range[1] && v_range[0] < v_range[1]) {
                return Err(perr(loc, "plane ranges must be increasing"));
            }
            let at = |a: f64, b: f64| o + u * a + v * b;
            let corners = [
                [at(u_range[0], v_range[0]), at(u_range[0], v_range[1])],
                [at(u_range[1], v_range[0]), at(u_range[1], v_range[1])],
            ];
            let rect = ParamRect::new(u_range[0], u_range[1], v_range[0], v_range[1]);
            let surf = located(BSplineSurface::bilinear(corners, rect), loc)?;
            Ok((surf, SurfaceKind::Plane { origin: o, u, v }))
        }
    }
}

fn project_edge(edge: &EdgeRec, reversed: bool, origin: Point3, u: Point3, v: Point3, loc: &str) -> Result<TrimCurve> {
    let c = located(edge.curve.restrict(edge.t0, edge.t1), loc)?;
    let (uu, vv) = (u.dot(u), v.dot(v));
    let normal = u.cross(v) * (1.0 / (uu * vv).sqrt());
    let scale = c.bbox().diagonal().max(u.norm()).max(v.norm());
    for p in c.control_points() {
        let off = (*p - origin).dot(normal).abs();
        if off > 1e-6 * scale {
            return Err(perr(loc, format!("edge {} leaves the plane by {off:.3e}", edge.id)));
        }
    }
    let pc = located(
        c.map_points(|p| {
            let d = p - origin;
            Point3::new(d.dot(u) / uu, d.dot(v) / vv, 0.0)
        })
        .with_dim(CurveDim::Two),
        loc,
    )?;
    Ok(TrimCurve::new(pc, reversed))
}

/// Resolves every reference and builds the in-memory model.
pub fn from_json(doc: &BrepJson) -> Result<BRepModel> {
    let surf_ids = unique_ids(
        doc.surfaces.iter().map(|s| match s {
            SurfaceJson::Bspline { id, .. } | SurfaceJson::Plane { id, .. } => id,
        }),
        "surfaces",
    )?;
    let curve_ids = unique_ids(doc.curves3d.iter().map(|c| &c.id), "curves3d")?;
    let pcurve_ids = unique_ids(doc.pcurves.iter().map(|c| &c.id), "pcurves")?;
    let vertex_ids = unique_ids(doc.vertices.iter().map(|c| &c.id), "vertices")?;
    let edge_ids = unique_ids(doc.edges.iter().map(|c| &c.id), "edges")?;
    let loop_ids = unique_ids(doc.loops.iter().map(|c| &c.id), "loops")?;
    unique_ids(doc.faces.iter().map(|c| &c.id), "faces")?;
    unique_ids(doc.shells.iter().map(|c| &c.id), "shells")?;

    let curves: Vec<BSplineCurve> = doc
        .curves3d
        .iter()
        .enumerate()
        .map(|(i, c)| located(c.to_curve(), format!("curves3d[{i}]")))
        .collect::<Result<_>>()?;
    let pcurves: Vec<BSplineCurve> = doc
        .pcurves
        .iter()
        .enumerate()
        .map(|(i, c)| located(c.to_curve(), format!("pcurves[{i}]")))
        .collect::<Result<_>>()?;

    let vertices: Vec<VertexRec> = doc
        .vertices
        .iter()
        .map(|v| VertexRec {
            id: VertexId(v.id),
            point: p3(v.point),
        })
        .collect();

    let edges: Vec<EdgeRec> = doc
        .edges
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let loc = format!("edges[{i}]");
            let ci = resolve(&curve_ids, e.curve, format!("{loc}.curve"))?;
            resolve(&vertex_ids, e.start, format!("{loc}.start"))?;
            resolve(&vertex_ids, e.end, format!("{loc}.end"))?;
            let curve = curves[ci].clone();
            let (a, b) = curve.domain();
            Ok(EdgeRec {
                id: EdgeId(e.id),
                curve,
                start: VertexId(e.start),
                end: VertexId(e.end),
                t0: e.t0.unwrap_or(a),
                t1: e.t1.unwrap_or(b),
            })
        })
        .collect::<Result<_>>()?;

    let outer_set: HashSet<u32> = doc.faces.iter().map(|f| f.outer_loop).collect();
    let loops: Vec<LoopRec> = doc
        .loops
        .iter()
        .enumerate()
        .map(|(i, l)| {
            let edges = l
                .edges
                .iter()
                .enumerate()
                .map(|(k, &(e, reversed))| {
                    resolve(&edge_ids, e, format!("loops[{i}].edges[{k}]"))?;
                    Ok(LoopEdge {
                        edge: EdgeId(e),
                        reversed,
                    })
                })
                .collect::<Result<_>>()?;
            Ok(LoopRec {
                id: LoopId(l.id),
                edges,
                is_outer: l.outer.unwrap_or_else(|| outer_set.contains(&l.id)),
            })
        })
        .collect::<Result<_>>()?;

    let mut faces = Vec::with_capacity(doc.faces.len());
    for (i, f) in doc.faces.iter().enumerate() {
        let loc = format!("faces[{i}]");
        let si = resolve(&surf_ids, f.surface, format!("{loc}.surface"))?;
        let (surface, kind) = build_surface(&doc.surfaces[si], &format!("surfaces[{si}]"))?;
        let mut trim_loops = Vec::new();
        let loop_list = std::iter::once((f.outer_loop, "outer_loop".to_string())).chain(
            f.inner_loops
                .iter()
                .enumerate()
                .map(|(k, &l)| (l, format!("inner_loops[{k}]"))),
        );
        for (pos, (lid, field)) in loop_list.enumerate() {
            let li = resolve(&loop_ids, lid, format!("{loc}.{field}"))?;
            let lj = &doc.loops[li];
            let lloc = format!("loops[{li}]");
            let tl = match (&lj.pcurves, &kind) {
                (Some(list), _) => {
                    let curves = list
                        .iter()
                        .enumerate()
                        .map(|(k, &(pc, rev))| {
                            let pi = resolve(&pcurve_ids, pc, format!("{lloc}.pcurves[{k}]"))?;
                            Ok(TrimCurve::new(pcurves[pi].clone(), rev))
                        })
                        .collect::<Result<_>>()?;
                    located(TrimLoop::new(curves), format!("{lloc}.pcurves"))?
                }
                (None, SurfaceKind::Plane { origin, u, v }) => {
                    let curves = lj
                        .edges
                        .iter()
                        .enumerate()
                        .map(|(k, &(e, rev))| {
                            let edge = &edges[edge_ids[&e]];
                            project_edge(edge, rev, *origin, *u, *v, &format!("{lloc}.edges[{k}]"))
                        })
                        .collect::<Result<_>>()?;
                    located(TrimLoop::new(curves), lloc.clone())?
                }
                (None, SurfaceKind::General) if pos == 0 => TrimLoop::rectangle(surface.domain()),
                (None, SurfaceKind::General) => {
                    return Err(perr(
                        format!("{lloc}.pcurves"),
                        "inner loop on a non-planar face needs p-curves",
                    ))
                }
            };
            trim_loops.push(tl);
        }
        let geometry = located(TrimmedSurface::new(surface, trim_loops), loc.clone())?;
        faces.push(FaceRec {
            id: FaceId(f.id),
            geometry,
            outer_loop: LoopId(f.outer_loop),
            inner_loops: f.inner_loops.iter().map(|&l| LoopId(l)).collect(),
            same_sense: f.same_sense,
        });
    }

    let face_ids: HashSet<u32> = doc.faces.iter().map(|f| f.id).collect();
    let shells = doc
        .shells
        .iter()
        .enumerate()
        .map(|(i, s)| {
            for (k, f) in s.faces.iter().enumerate() {
                if !face_ids.contains(f) {
                    return Err(perr(format!("shells[{i}].faces[{k}]"), format!("unresolved id {f}")));
                }
            }
            Ok(ShellRec {
                id: ShellId(s.id),
                faces: s.faces.iter().map(|&f| FaceId(f)).collect(),
            })
        })
        .collect::<Result<_>>()?;

    Ok(BRepModel {
        version: doc.version.clone(),
        units: doc.units.clone(),
        vertices,
        edges,
        loops,
        faces,
        shells,
    })
}

impl SurfaceJson {
    /// The surface on its own; planes become bilinear patches.
    pub fn to_surface(&self) -> Result<BSplineSurface> {
        build_surface(self, &format!("surface {}", self.id())).map(|(s, _)| s)
    }
}

impl CurveJson {
    pub fn to_curve(&self) -> Result<BSplineCurve> {
        let loc = format!("curve {}", self.id);
        let k = located(KnotVector::new(self.knots.clone()), format!("{loc}.knots"))?;
        let pts = self.control_points.iter().map(|&a| p3(a)).collect();
        located(BSplineCurve::new(self.degree, pts, k, CurveDim::Three), loc)
    }
}

impl PCurveJson {
    pub fn to_curve(&self) -> Result<BSplineCurve> {
        let loc = format!("pcurve {}", self.id);
        let k = located(KnotVector::new(self.knots.clone()), format!("{loc}.knots"))?;
        let pts = self
            .control_points
            .iter()
            .map(|&[x, y]| Point3::new(x, y, 0.0))
            .collect();
        located(BSplineCurve::new(self.degree, pts, k, CurveDim::Two), loc)
    }
}

fn curve_json(id: u32, c: &BSplineCurve) -> CurveJson {
    CurveJson {
        id,
        degree: c.degree(),
        knots: c.knots().as_slice().to_vec(),
        control_points: c.control_points().iter().map(|p| p.to_array()).collect(),
    }
}

/// Inverse of [`from_json`]. Surfaces are written as B-splines and every
/// trim loop carries explicit p-curves.
pub fn to_json(model: &BRepModel) -> BrepJson {
    let curves3d = model
        .edges
        .iter()
        .enumerate()
        .map(|(i, e)| curve_json(i as u32, &e.curve))
        .collect();
    let edges = model
        .edges
        .iter()
        .enumerate()
        .map(|(i, e)| EdgeJson {
            id: e.id.0,
            curve: i as u32,
            start: e.start.0,
            end: e.end.0,
            t0: Some(e.t0),
            t1: Some(e.t1),
        })
        .collect();
    let mut pcurves = Vec::new();
    let mut loop_pcurves: HashMap<LoopId, Vec<(u32, bool)>> = HashMap::new();
    let mut surfaces = Vec::new();
    let mut faces = Vec::new();
    for (fi, f) in model.faces.iter().enumerate() {
        let s = &f.geometry.surface;
        let (du, dv) = s.degrees();
        surfaces.push(SurfaceJson::Bspline {
            id: fi as u32,
            degree_u: du,
            degree_v: dv,
            knots_u: s.knots_u().as_slice().to_vec(),
            knots_v: s.knots_v().as_slice().to_vec(),
            control_points: s
                .control()
                .iter()
                .map(|r| r.iter().map(|p| [p.x, p.y, p.z, p.w]).collect())
                .collect(),
        });
        for (lid, tl) in f.loops().zip(&f.geometry.loops) {
            let uses = tl
                .curves
                .iter()
                .map(|tc| {
                    let id = pcurves.len() as u32;
                    pcurves.push(PCurveJson {
                        id,
                        degree: tc.curve.degree(),
                        knots: tc.curve.knots().as_slice().to_vec(),
                        control_points: tc.curve.control_points().iter().map(|p| [p.x, p.y]).collect(),
                    });
                    (id, tc.reversed)
                })
                .collect();
            loop_pcurves.insert(lid, uses);
        }
        faces.push(FaceJson {
            id: f.id.0,
            surface: fi as u32,
            outer_loop: f.outer_loop.0,
            inner_loops: f.inner_loops.iter().map(|l| l.0).collect(),
            same_sense: f.same_sense,
        });
    }
    let loops = model
        .loops
        .iter()
        .map(|l| LoopJson {
            id: l.id.0,
            edges: l.edges.iter().map(|e| (e.edge.0, e.reversed)).collect(),
            pcurves: loop_pcurves.remove(&l.id),
            outer: Some(l.is_outer),
        })
        .collect();
    BrepJson {
        version: model.version.clone(),
        units: model.units.clone(),
        surfaces,
        curves3d,
        pcurves,
        vertices: model
            .vertices
            .iter()
            .map(|v| VertexJson {
                id: v.id.0,
                point: v.point.to_array(),
            })
            .collect(),
        edges,
        loops,
        faces,
        shells: model
            .shells
            .iter()
            .map(|s| ShellJson {
                id: s.id.0,
                faces: s.faces.iter().map(|f| f.0).collect(),
            })
            .collect(),
    }
}

fn serde_location(e: &serde_json::Error) -> String {
    format!("line {} column {}", e.line(), e.column())
}

pub fn parse_brep_json(bytes: &[u8]) -> Result<BrepJson> {
    serde_json::from_slice(bytes).map_err(|e| perr(serde_location(&e), e.to_string()))
}

/// Parses and resolves a JSON document.
pub fn load_model(bytes: &[u8]) -> Result<BRepModel> {
    from_json(&parse_brep_json(bytes)?)
}

pub fn save_model(model: &BRepModel) -> Result<Vec<u8>> {
    serde_json::to_vec_pretty(&to_json(model)).map_err(|e| Error::Format(e.to_string()))
}
