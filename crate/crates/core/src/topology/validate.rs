//! Structural checks over a [`BRepModel`].

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::Serialize;

use super::model::{BRepModel, EdgeId, FaceId, LoopId, VertexId};
use crate::spline::CurveDim;

/// Endpoint coincidence tolerance, relative to the model diagonal.
pub const ENDPOINT_TOL_REL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Hard,
    Soft,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    DuplicateId,
    UnresolvedReference,
    NonFinite,
    EmptyLoop,
    OpenLoop,
    EndpointMismatch,
    BadParameterRange,
    WrongCurveDim,
    LoopRole,
    SharedLoop,
    TrimMismatch,
    NonManifoldEdge,
    ShellMembership,
    Unused,
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ViolationKind::DuplicateId => "duplicate id",
            ViolationKind::UnresolvedReference => "unresolved reference",
            ViolationKind::NonFinite => "non-finite coordinate",
            ViolationKind::EmptyLoop => "empty loop",
            ViolationKind::OpenLoop => "loop not closed",
            ViolationKind::EndpointMismatch => "edge endpoint mismatch",
            ViolationKind::BadParameterRange => "bad parameter range",
            ViolationKind::WrongCurveDim => "wrong curve dimension",
            ViolationKind::LoopRole => "loop role mismatch",
            ViolationKind::SharedLoop => "loop used by several faces",
            ViolationKind::TrimMismatch => "trim loop count mismatch",
            ViolationKind::NonManifoldEdge => "non-manifold edge use",
            ViolationKind::ShellMembership => "shell membership",
            ViolationKind::Unused => "unused element",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub severity: Severity,
    pub kind: ViolationKind,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.hard().next().is_none()
    }

    pub fn hard(&self) -> impl Iterator<Item = &Violation> {
        self.violations.iter().filter(|v| v.severity == Severity::Hard)
    }

    pub fn has(&self, kind: ViolationKind) -> bool {
        self.violations.iter().any(|v| v.kind == kind)
    }

    fn push(&mut self, severity: Severity, kind: ViolationKind, message: String) {
        self.violations.push(Violation {
            severity,
            kind,
            message,
        });
    }

    fn hard_err(&mut self, kind: ViolationKind, message: String) {
        self.push(Severity::Hard, kind, message);
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return writeln!(f, "valid: 0 violations");
        }
        for v in &self.violations {
            let sev = match v.severity {
                Severity::Hard => "error",
                Severity::Soft => "warning",
            };
            writeln!(f, "{sev}: {}: {}", v.kind, v.message)?;
        }
        Ok(())
    }
}

fn duplicates<T: Copy + Eq + std::hash::Hash + fmt::Display>(
    ids: impl Iterator<Item = T>,
    table: &str,
    report: &mut ValidationReport,
) {
    let mut seen = HashSet::new();
    for id in ids {
        if !seen.insert(id) {
            report.hard_err(ViolationKind::DuplicateId, format!("{table} id {id} appears twice"));
        }
    }
}

/// Distinct faces using each edge, following face loops.
pub(crate) fn edge_face_uses(model: &BRepModel) -> BTreeMap<EdgeId, BTreeSet<FaceId>> {
    let index = model.index();
    let mut uses: BTreeMap<EdgeId, BTreeSet<FaceId>> = BTreeMap::new();
    for face in &model.faces {
        for lid in face.loops() {
            let Some(&li) = index.loops.get(&lid) else {
                continue;
            };
            for le in &model.loops[li].edges {
                uses.entry(le.edge).or_default().insert(face.id);
            }
        }
    }
    uses
}

/// Checks every record invariant. The model is acceptable iff the report has
/// no hard violations.
pub fn validate_model(model: &BRepModel) -> ValidationReport {
    let mut report = ValidationReport::default();
    let index = model.index();
    duplicates(model.vertices.iter().map(|v| v.id), "vertex", &mut report);
    duplicates(model.edges.iter().map(|v| v.id), "edge", &mut report);
    duplicates(model.loops.iter().map(|v| v.id), "loop", &mut report);
    duplicates(model.faces.iter().map(|v| v.id), "face", &mut report);
    duplicates(model.shells.iter().map(|v| v.id), "shell", &mut report);

    let diag = model.bbox().map_or(1.0, |b| b.diagonal()).max(f64::MIN_POSITIVE);
    let tol = ENDPOINT_TOL_REL * diag.max(1e-300);

    for v in &model.vertices {
        if !v.point.is_finite() {
            report.hard_err(ViolationKind::NonFinite, format!("vertex {} at {:?}", v.id, v.point));
        }
    }

    let vertex = |id: VertexId| index.vertices.get(&id).map(|&i| &model.vertices[i]);
    for e in &model.edges {
        if e.curve.dim() != CurveDim::Three {
            report.hard_err(
                ViolationKind::WrongCurveDim,
                format!("edge {} carries a parameter-space curve", e.id),
            );
        }
        let (lo, hi) = e.curve.domain();
        let slack = e.curve.knots().tolerance();
        let range_ok = e.t0 < e.t1 && e.t0 >= lo - slack && e.t1 <= hi + slack;
        if !range_ok {
            report.hard_err(
                ViolationKind::BadParameterRange,
                format!("edge {}: [{}, {}] not inside [{lo}, {hi}]", e.id, e.t0, e.t1),
            );
        }
        for (role, vid, t) in [("start", e.start, e.t0), ("end", e.end, e.t1)] {
            match vertex(vid) {
                None => report.hard_err(
                    ViolationKind::UnresolvedReference,
                    format!("edge {} {role} vertex {vid}", e.id),
                ),
                Some(v) if range_ok => {
                    let p = e.curve.eval(t).expect("checked range");
                    let d = p.distance(v.point);
                    if d > tol {
                        report.hard_err(
                            ViolationKind::EndpointMismatch,
                            format!(
                                "edge {} {role} point is {d:.3e} from vertex {vid} (tolerance {tol:.3e})",
                                e.id
                            ),
                        );
                    }
                }
                Some(_) => {}
            }
        }
    }

    for lp in &model.loops {
        if lp.edges.is_empty() {
            report.hard_err(ViolationKind::EmptyLoop, format!("loop {}", lp.id));
            continue;
        }
        let mut ends = Vec::with_capacity(lp.edges.len());
        let mut resolved = true;
        for le in &lp.edges {
            match index.edges.get(&le.edge) {
                None => {
                    resolved = false;
                    report.hard_err(
                        ViolationKind::UnresolvedReference,
                        format!("loop {} references missing edge {}", lp.id, le.edge),
                    );
                }
                Some(&ei) => {
                    let e = &model.edges[ei];
                    ends.push(if le.reversed {
                        (e.end, e.start)
                    } else {
                        (e.start, e.end)
                    });
                }
            }
        }
        if resolved {
            let n = ends.len();
            for k in 0..n {
                let head = ends[k].1;
                let tail = ends[(k + 1) % n].0;
                if head != tail {
                    report.hard_err(
                        ViolationKind::OpenLoop,
                        format!(
                            "loop {}: edge {} ends at vertex {head} but edge {} starts at vertex {tail}",
                            lp.id,
                            lp.edges[k].edge,
                            lp.edges[(k + 1) % n].edge
                        ),
                    );
                }
            }
        }
    }

    let mut loop_owner: HashMap<LoopId, crate::topology::FaceId> = HashMap::new();
    for face in &model.faces {
        for (pos, lid) in face.loops().enumerate() {
            match index.loops.get(&lid) {
                None => report.hard_err(
                    ViolationKind::UnresolvedReference,
                    format!("face {} references missing loop {lid}", face.id),
                ),
                Some(&li) => {
                    let outer = pos == 0;
                    if model.loops[li].is_outer != outer {
                        report.hard_err(
                            ViolationKind::LoopRole,
                            format!(
                                "face {}: loop {lid} is used as {} but flagged {}",
                                face.id,
                                if outer { "outer" } else { "inner" },
                                if outer { "inner" } else { "outer" }
                            ),
                        );
                    }
                }
            }
            if let Some(prev) = loop_owner.insert(lid, face.id) {
                if prev != face.id {
                    report.hard_err(
                        ViolationKind::SharedLoop,
                        format!("loop {lid} used by faces {prev} and {}", face.id),
                    );
                }
            }
        }
        let expected = 1 + face.inner_loops.len();
        if face.geometry.loops.len() != expected {
            report.hard_err(
                ViolationKind::TrimMismatch,
                format!(
                    "face {} has {expected} topological loops but {} trim loops",
                    face.id,
                    face.geometry.loops.len()
                ),
            );
        }
    }

    for (edge, faces) in edge_face_uses(model) {
        if faces.len() > 2 {
            let list: Vec<String> = faces.iter().map(ToString::to_string).collect();
            report.hard_err(
                ViolationKind::NonManifoldEdge,
                format!("edge {edge} used by {} faces: {}", faces.len(), list.join(", ")),
            );
        }
    }

    let mut membership: HashMap<FaceId, usize> = HashMap::new();
    for shell in &model.shells {
        for fid in &shell.faces {
            if !index.faces.contains_key(fid) {
                report.hard_err(
                    ViolationKind::UnresolvedReference,
                    format!("shell {} references missing face {fid}", shell.id),
                );
            }
            *membership.entry(*fid).or_default() += 1;
        }
    }
    for face in &model.faces {
        match membership.get(&face.id).copied().unwrap_or(0) {
            0 => report.push(
                Severity::Soft,
                ViolationKind::ShellMembership,
                format!("face {} belongs to no shell", face.id),
            ),
            1 => {}
            k => report.hard_err(
                ViolationKind::ShellMembership,
                format!("face {} belongs to {k} shells", face.id),
            ),
        }
    }

    let used_edges: HashSet<EdgeId> = model
        .loops
        .iter()
        .flat_map(|l| l.edges.iter().map(|e| e.edge))
        .collect();
    for e in &model.edges {
        if !used_edges.contains(&e.id) {
            report.push(
                Severity::Soft,
                ViolationKind::Unused,
                format!("edge {} is in no loop", e.id),
            );
        }
    }
    let used_vertices: HashSet<VertexId> = model.edges.iter().flat_map(|e| [e.start, e.end]).collect();
    for v in &model.vertices {
        if !used_vertices.contains(&v.id) {
            report.push(
                Severity::Soft,
                ViolationKind::Unused,
                format!("vertex {} is on no edge", v.id),
            );
        }
    }
    report
}
