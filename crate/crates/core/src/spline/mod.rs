//! Exact B-spline evaluation and shape-preserving decomposition into Bézier
//! curves, rectangles and triangles.

mod bezier;
mod curve;
mod knots;
mod surface;
mod triangle;

pub use bezier::{bernstein_all, elevate_degree, eval_bezier_curve, BezierCurve};
pub use curve::{decompose_curve, eval_curve, insert_knot, BSplineCurve, BezierSegment, CurveDim};
pub use knots::{basis, KnotVector, KNOT_EQ_REL};
pub use surface::{
    decompose_surface, elevate_surface_degree, eval_surface, grid_depth, BSplineSurface, BezierGrid, BezierRectangle,
    ParamRect,
};
pub use triangle::{
    bernstein_tri_all, centroid_samples_10, eval_bezier_triangle, lattice_samples_15, rect_to_triangles,
    rect_to_triangles_along, split_coefficients, tri_count, tri_index, tri_indices, triangle_center_normal,
    BezierTriangle, CenterNormal, Diagonal, Half, Provenance, TrimStatus,
};
