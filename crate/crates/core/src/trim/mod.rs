//! Trimmed surfaces: classification against p-curve loops, quadtree
//! subdivision, boundary fitting and tessellation into Bézier triangles.

mod domain;
mod fit;
mod quadtree;
mod tessellate;

pub use domain::{
    classify_param_rect, classify_point, classify_rectangle, signed_area, PatchClass, PointClass, TrimCurve,
    TrimDomain, TrimLoop, TrimmedSurface, Uv, CLOSURE_TOL_REL, DEGENERATE_AREA_REL,
};
pub use fit::{control_net_distance, fit_boundary_triangle, FitConfig, FitSample, RANK_RCOND};
pub use quadtree::{build_quadtree, build_quadtree_cells, subdivide, working_cells, QuadLeaf};
pub use tessellate::{
    deviation_report, tessellate_detailed, tessellate_trimmed, DeviationReport, Tessellation, ROUNDING_REL,
};
