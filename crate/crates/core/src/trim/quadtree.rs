//! Quadtree subdivision of Bézier rectangles against a trim domain.

use rayon::prelude::*;

use super::domain::{classify_param_rect, classify_point, PatchClass, TrimDomain, TrimmedSurface};
use super::fit::FitConfig;
use crate::error::{Error, Result};
use crate::spline::{BezierRectangle, Diagonal};
use crate::topology::MAX_DEPTH;

/// Four children by midpoint splits, in the order `(0,0), (1,0), (0,1),
/// (1,1)` of `(dx, dy)`.
pub fn subdivide(node: &BezierRectangle) -> Result<[BezierRectangle; 4]> {
    if node.key.depth >= MAX_DEPTH {
        return Err(Error::DepthLimit {
            depth: node.key.depth,
            max_depth: MAX_DEPTH,
        });
    }
    let (left, right) = node.split_u(0.5);
    let (l0, l1) = left.split_v(0.5);
    let (r0, r1) = right.split_v(0.5);
    let mut kids = [l0, r0, l1, r1];
    for (k, (dx, dy)) in kids.iter_mut().zip([(0, 0), (1, 0), (0, 1), (1, 1)]) {
        k.key = node.key.child(dx, dy);
    }
    Ok(kids)
}

/// A classified quadtree leaf.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadLeaf {
    pub rect: BezierRectangle,
    pub class: PatchClass,
    /// Split diagonal for the leaf.
    pub diagonal: Diagonal,
    /// The boundary enters and leaves through the corners of `diagonal`.
    pub incident: bool,
}

/// At the depth limit: split along the diagonal that separates the corners
/// whose classes differ.
fn fallback_diagonal(domain: &TrimDomain, rect: &BezierRectangle) -> Diagonal {
    let r = rect.param_rect;
    let inside = |s: f64, t: f64| {
        let (u, v) = r.at(s, t);
        classify_point(domain, u, v).inside
    };
    if inside(0.0, 0.0) != inside(1.0, 1.0) {
        Diagonal::Anti
    } else if inside(1.0, 0.0) != inside(0.0, 1.0) {
        Diagonal::Main
    } else {
        Diagonal::Anti
    }
}

fn visit(domain: &TrimDomain, rect: BezierRectangle, levels_left: u32, out: &mut Vec<QuadLeaf>) -> Result<()> {
    let class = classify_param_rect(domain, &rect.param_rect);
    if class != PatchClass::Boundary {
        out.push(QuadLeaf {
            rect,
            class,
            diagonal: Diagonal::Anti,
            incident: false,
        });
        return Ok(());
    }
    if let Some(diagonal) = domain.diagonal_incidence(&rect.param_rect) {
        out.push(QuadLeaf {
            rect,
            class,
            diagonal,
            incident: true,
        });
        return Ok(());
    }
    if levels_left == 0 {
        let diagonal = fallback_diagonal(domain, &rect);
        out.push(QuadLeaf {
            rect,
            class,
            diagonal,
            incident: false,
        });
        return Ok(());
    }
    for child in subdivide(&rect)? {
        visit(domain, child, levels_left - 1, out)?;
    }
    Ok(())
}

/// Classifies already-decomposed cells, subdividing Boundary cells up to
/// `max_depth` levels. Leaves come out in cell order, children depth-first.
pub fn build_quadtree_cells(domain: &TrimDomain, cells: Vec<BezierRectangle>, max_depth: u32) -> Result<Vec<QuadLeaf>> {
    let per_cell: Vec<Result<Vec<QuadLeaf>>> = cells
        .into_par_iter()
        .map(|cell| {
            let mut leaves = Vec::new();
            visit(domain, cell, max_depth, &mut leaves)?;
            Ok(leaves)
        })
        .collect();
    let mut out = Vec::new();
    for leaves in per_cell {
        out.extend(leaves?);
    }
    Ok(out)
}

/// Decomposes the surface, elevates cells to the working degree and
/// classifies them. Every leaf, including Outside ones, is returned.
pub fn build_quadtree(ts: &TrimmedSurface, cfg: &FitConfig) -> Result<Vec<QuadLeaf>> {
    cfg.validate()?;
    let domain = TrimDomain::new(ts, cfg.samples_per_curve, cfg.corner_snap_tol)?;
    let cells = working_cells(ts, cfg)?;
    build_quadtree_cells(&domain, cells, cfg.max_depth)
}

/// Knot-span cells elevated to `working_degree` in both directions.
pub fn working_cells(ts: &TrimmedSurface, cfg: &FitConfig) -> Result<Vec<BezierRectangle>> {
    let (p, q) = ts.surface.degrees();
    let w = cfg.working_degree;
    let found = p.max(q);
    if found > w {
        return Err(Error::DegreeTooHigh { found, max: w });
    }
    ts.surface.decompose().cells.iter().map(|c| c.elevate(w, w)).collect()
}
