//! Trimmed surface to ordered Bézier triangles, with deviation metrics.

use rayon::prelude::*;
use serde::Serialize;

use super::domain::{classify_point, PatchClass, TrimDomain, TrimmedSurface};
use super::fit::{fit_boundary_triangle, FitConfig, FitSample};
use super::quadtree::{build_quadtree_cells, working_cells, QuadLeaf};
use crate::error::Result;
use crate::spline::{
    centroid_samples_10, lattice_samples_15, rect_to_triangles_along, BezierTriangle, Diagonal, ParamRect, TrimStatus,
};
use crate::topology::{order_patches, PatchLeaf};

/// Output of [`tessellate_detailed`].
#[derive(Debug, Clone)]
pub struct Tessellation {
    /// Triangles in z-order.
    pub triangles: Vec<BezierTriangle>,
    pub leaves: Vec<QuadLeaf>,
    pub warnings: Vec<String>,
}

fn kept(domain: &TrimDomain, tri: &BezierTriangle) -> bool {
    centroid_samples_10().into_iter().all(|(s, t)| {
        let (u, v) = tri.provenance.to_surface_param(s, t);
        let c = classify_point(domain, u, v);
        c.inside || c.on_boundary
    })
}

/// `n` points at equal arc length along the boundary inside `r`, each paired
/// with its projection onto the hypotenuse of `tri`.
fn boundary_samples(
    ts: &TrimmedSurface,
    domain: &TrimDomain,
    tri: &BezierTriangle,
    r: &ParamRect,
    n: usize,
) -> Result<Vec<FitSample>> {
    let pieces = domain.clipped_pieces(r);
    let lengths: Vec<f64> = pieces.iter().map(|(a, b)| (b.0 - a.0).hypot(b.1 - a.1)).collect();
    let total: f64 = lengths.iter().sum();
    if total <= 0.0 {
        return Ok(Vec::new());
    }
    let dom = ts.surface.domain();
    let mut out = Vec::with_capacity(n);
    let mut piece = 0;
    let mut before = 0.0;
    for k in 0..n {
        let target = (k as f64 + 0.5) * total / n as f64;
        while piece + 1 < pieces.len() && before + lengths[piece] < target {
            before += lengths[piece];
            piece += 1;
        }
        let (a, b) = pieces[piece];
        let f = if lengths[piece] > 0.0 {
            ((target - before) / lengths[piece]).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let u = (a.0 + f * (b.0 - a.0)).clamp(dom.u0, dom.u1);
        let v = (a.1 + f * (b.1 - a.1)).clamp(dom.v0, dom.v1);
        let point = ts.surface.eval(u, v)?;
        let (s, t) = tri.provenance.from_surface_param(u, v);
        let c = 1.0 - s - t;
        let s = (s + 0.5 * c).clamp(0.0, 1.0);
        let (pu, pv) = tri.provenance.to_surface_param(s, 1.0 - s);
        out.push(FitSample { u: pu, v: pv, point });
    }
    Ok(out)
}

fn leaf_triangles(
    ts: &TrimmedSurface,
    domain: &TrimDomain,
    leaf: &QuadLeaf,
    cfg: &FitConfig,
) -> Result<Vec<BezierTriangle>> {
    match leaf.class {
        PatchClass::Outside => Ok(Vec::new()),
        PatchClass::Inside => {
            let (a, b) = rect_to_triangles_along(&leaf.rect, Diagonal::Anti);
            Ok(vec![a, b])
        }
        PatchClass::Boundary => {
            let (a, b) = rect_to_triangles_along(&leaf.rect, leaf.diagonal);
            let mut keep: Vec<BezierTriangle> = [a, b].into_iter().filter(|t| kept(domain, t)).collect();
            if keep.len() == 1 {
                let samples = boundary_samples(ts, domain, &keep[0], &leaf.rect.param_rect, cfg.n_boundary_samples)?;
                if !samples.is_empty() {
                    keep[0] = fit_boundary_triangle(&keep[0], &samples, cfg)?;
                }
            }
            Ok(keep)
        }
    }
}

/// Decompose, subdivide, split, fit and order; keeps the quadtree for
/// inspection.
pub fn tessellate_detailed(ts: &TrimmedSurface, cfg: &FitConfig) -> Result<Tessellation> {
    cfg.validate()?;
    let domain = TrimDomain::new(ts, cfg.samples_per_curve, cfg.corner_snap_tol)?;
    let cells = working_cells(ts, cfg)?;
    let leaves = build_quadtree_cells(&domain, cells, cfg.max_depth)?;
    let groups: Vec<Result<PatchLeaf>> = leaves
        .par_iter()
        .map(|leaf| {
            Ok(PatchLeaf {
                key: leaf.rect.key,
                triangles: leaf_triangles(ts, &domain, leaf, cfg)?,
            })
        })
        .collect();
    let groups: Vec<PatchLeaf> = groups.into_iter().collect::<Result<_>>()?;
    let triangles = order_patches(groups)?;
    Ok(Tessellation {
        triangles,
        leaves,
        warnings: domain.warnings.clone(),
    })
}

/// Ordered Bézier triangles covering the trimmed surface.
pub fn tessellate_trimmed(ts: &TrimmedSurface, cfg: &FitConfig) -> Result<Vec<BezierTriangle>> {
    Ok(tessellate_detailed(ts, cfg)?.triangles)
}

/// Distances between triangles and the surface they came from.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct DeviationReport {
    pub triangles: usize,
    pub fitted: usize,
    /// Over the 15-point lattice and the 10 centroids of exact triangles.
    pub max_exact_deviation: f64,
    pub mean_exact_deviation: f64,
    /// Over the same samples of fitted triangles.
    pub max_fitted_deviation: f64,
    /// Largest certified bound on fitted triangles (control-point moves).
    pub max_fitted_bound: f64,
    pub max_fit_residual: f64,
    pub rank_deficient_fits: usize,
    /// Upper bound on the distance between any triangle point and the
    /// surface: the sampled maxima and the fitted bound, plus a rounding
    /// allowance of `ROUNDING_REL` times the surface box diagonal.
    pub max_deviation: f64,
}

/// Relative rounding allowance added to [`DeviationReport::max_deviation`].
pub const ROUNDING_REL: f64 = 1e-12;

/// Samples every triangle at the lattice and centroid sets and compares
/// with the surface at the corresponding parameter.
pub fn deviation_report(ts: &TrimmedSurface, triangles: &[BezierTriangle]) -> Result<DeviationReport> {
    let mut rep = DeviationReport {
        triangles: triangles.len(),
        ..Default::default()
    };
    let samples: Vec<(f64, f64)> = lattice_samples_15().into_iter().chain(centroid_samples_10()).collect();
    let dom = ts.surface.domain();
    let mut sum = 0.0;
    let mut count = 0usize;
    for tri in triangles {
        let mut worst: f64 = 0.0;
        for &(s, t) in &samples {
            let (u, v) = tri.provenance.to_surface_param(s, t);
            let exact = ts.surface.eval(u.clamp(dom.u0, dom.u1), v.clamp(dom.v0, dom.v1))?;
            let d = tri.eval_unchecked(s, t).distance(exact);
            worst = worst.max(d);
            if tri.trim_status == TrimStatus::Exact {
                sum += d;
                count += 1;
            }
        }
        match tri.trim_status {
            TrimStatus::Exact => rep.max_exact_deviation = rep.max_exact_deviation.max(worst),
            TrimStatus::BoundaryFitted {
                residual,
                max_displacement,
                rank_deficient,
                ..
            } => {
                rep.fitted += 1;
                rep.max_fitted_deviation = rep.max_fitted_deviation.max(worst);
                rep.max_fitted_bound = rep.max_fitted_bound.max(max_displacement);
                rep.max_fit_residual = rep.max_fit_residual.max(residual);
                rep.rank_deficient_fits += usize::from(rank_deficient);
            }
        }
    }
    rep.mean_exact_deviation = if count > 0 { sum / count as f64 } else { 0.0 };
    let floor = ROUNDING_REL * ts.surface.bbox().diagonal();
    rep.max_deviation = rep
        .max_exact_deviation
        .max(rep.max_fitted_deviation)
        .max(rep.max_fitted_bound)
        + floor;
    Ok(rep)
}
