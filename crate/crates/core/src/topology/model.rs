//! B-rep records: vertices, edges, loops, faces and shells.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::geom::{Aabb, Point3};
use crate::spline::BSplineCurve;
use crate::trim::TrimmedSurface;

macro_rules! id_type {
    ($($name:ident),*) => {$(
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub u32);

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}", self.0)
            }
        }
    )*};
}

id_type!(VertexId, EdgeId, LoopId, FaceId, ShellId);

#[derive(Debug, Clone, PartialEq)]
pub struct VertexRec {
    pub id: VertexId,
    pub point: Point3,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeRec {
    pub id: EdgeId,
    pub curve: BSplineCurve,
    pub start: VertexId,
    pub end: VertexId,
    pub t0: f64,
    pub t1: f64,
}

impl EdgeRec {
    pub fn is_closed(&self) -> bool {
        self.start == self.end
    }
}

/// One use of an edge inside a loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LoopEdge {
    pub edge: EdgeId,
    pub reversed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoopRec {
    pub id: LoopId,
    pub edges: Vec<LoopEdge>,
    pub is_outer: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FaceRec {
    pub id: FaceId,
    pub geometry: TrimmedSurface,
    pub outer_loop: LoopId,
    pub inner_loops: Vec<LoopId>,
    pub same_sense: bool,
}

impl FaceRec {
    pub fn loops(&self) -> impl Iterator<Item = LoopId> + '_ {
        std::iter::once(self.outer_loop).chain(self.inner_loops.iter().copied())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShellRec {
    pub id: ShellId,
    pub faces: Vec<FaceId>,
}

/// Tables of topological records with geometry attached.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BRepModel {
    pub version: String,
    pub units: String,
    pub vertices: Vec<VertexRec>,
    pub edges: Vec<EdgeRec>,
    pub loops: Vec<LoopRec>,
    pub faces: Vec<FaceRec>,
    pub shells: Vec<ShellRec>,
}

/// Id → table position lookups.
#[derive(Debug, Clone, Default)]
pub struct ModelIndex {
    pub vertices: HashMap<VertexId, usize>,
    pub edges: HashMap<EdgeId, usize>,
    pub loops: HashMap<LoopId, usize>,
    pub faces: HashMap<FaceId, usize>,
}

impl BRepModel {
    pub fn index(&self) -> ModelIndex {
        ModelIndex {
            vertices: self.vertices.iter().enumerate().map(|(i, v)| (v.id, i)).collect(),
            edges: self.edges.iter().enumerate().map(|(i, e)| (e.id, i)).collect(),
            loops: self.loops.iter().enumerate().map(|(i, l)| (l.id, i)).collect(),
            faces: self.faces.iter().enumerate().map(|(i, f)| (f.id, i)).collect(),
        }
    }

    /// Bounding box of vertices and all control points.
    pub fn bbox(&self) -> Option<Aabb> {
        let verts = self.vertices.iter().map(|v| v.point);
        let curves = self.edges.iter().flat_map(|e| e.curve.control_points().iter().copied());
        let surfaces = self.faces.iter().flat_map(|f| {
            f.geometry
                .surface
                .control()
                .iter()
                .flatten()
                .map(|p| p.point())
                .collect::<Vec<_>>()
        });
        Aabb::from_points(verts.chain(curves).chain(surfaces))
    }

    /// Applies an affine point map to every piece of model-space geometry.
    pub fn map_points(&self, f: impl Fn(Point3) -> Point3 + Copy) -> BRepModel {
        let mut out = self.clone();
        for v in &mut out.vertices {
            v.point = f(v.point);
        }
        for e in &mut out.edges {
            e.curve = e.curve.map_points(f);
        }
        for face in &mut out.faces {
            face.geometry.surface = face.geometry.surface.map_points(f);
        }
        out
    }

    /// Translates and uniformly scales the model into the unit cube centred
    /// at the origin.
    pub fn normalized(&self) -> BRepModel {
        let Some(bb) = self.bbox() else {
            return self.clone();
        };
        let ext = bb.max - bb.min;
        let size = ext.x.max(ext.y).max(ext.z);
        let scale = if size > 0.0 { 1.0 / size } else { 1.0 };
        let c = bb.center();
        self.map_points(move |p| (p - c) * scale)
    }
}
