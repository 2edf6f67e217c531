//! B-rep topology: records, validation, adjacency, loop unfolding and
//! z-order patch ordering.

mod graph;
mod model;
mod validate;
mod zorder;

pub use graph::{choose_break, face_adjacency, unfold_loop};
pub use model::{
    BRepModel, EdgeId, EdgeRec, FaceId, FaceRec, LoopEdge, LoopId, LoopRec, ModelIndex, ShellId, ShellRec, VertexId,
    VertexRec,
};
pub use validate::{validate_model, Severity, ValidationReport, Violation, ViolationKind, ENDPOINT_TOL_REL};
pub use zorder::{order_patches, sort_patch_keys, zorder_decode, zorder_key, PatchKey, PatchLeaf, MAX_DEPTH};
