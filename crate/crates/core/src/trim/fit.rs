//! Regularized least-squares refinement of boundary triangles.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{Point3, WeightedPoint};
use crate::spline::{bernstein_tri_all, tri_count, BezierTriangle, TrimStatus};

/// Tessellation and fitting parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    /// Weight of the pull towards the unfitted control net.
    pub lambda: f64,
    /// Boundary samples per fitted triangle.
    pub n_boundary_samples: usize,
    /// Subdivision levels below a knot-span cell.
    pub max_depth: u32,
    /// Corner snap tolerance relative to the domain diagonal.
    pub corner_snap_tol: f64,
    /// Polyline samples per p-curve for classification.
    pub samples_per_curve: usize,
    /// Surfaces are elevated to this degree in both directions.
    pub working_degree: usize,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            lambda: 0.1,
            n_boundary_samples: 32,
            max_depth: 6,
            corner_snap_tol: 1e-3,
            samples_per_curve: 64,
            working_degree: 3,
        }
    }
}

impl FitConfig {
    /// Control points of the triangles produced at the working degree.
    pub fn free_control_points(&self) -> usize {
        tri_count(2 * self.working_degree)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::Config(format!(
                "lambda must be finite and >= 0, got {}",
                self.lambda
            )));
        }
        if self.n_boundary_samples == 0 {
            return Err(Error::Config("n_boundary_samples must be positive".into()));
        }
        let m = self.free_control_points();
        if self.lambda == 0.0 && 3 * self.n_boundary_samples < m {
            return Err(Error::Config(format!(
                "lambda = 0 needs at least {} boundary samples for {m} control points, got {}",
                m.div_ceil(3),
                self.n_boundary_samples
            )));
        }
        if self.max_depth > crate::topology::MAX_DEPTH {
            return Err(Error::Config(format!(
                "max_depth {} exceeds {}",
                self.max_depth,
                crate::topology::MAX_DEPTH
            )));
        }
        if !(self.corner_snap_tol > 0.0 && self.corner_snap_tol < 0.5) {
            return Err(Error::Config(format!(
                "corner_snap_tol must lie in (0, 0.5), got {}",
                self.corner_snap_tol
            )));
        }
        if self.samples_per_curve < 2 {
            return Err(Error::Config("samples_per_curve must be at least 2".into()));
        }
        if self.working_degree == 0 {
            return Err(Error::Config("working_degree must be positive".into()));
        }
        Ok(())
    }
}

/// Singular values below `RANK_RCOND` times the largest are treated as zero.
pub const RANK_RCOND: f64 = 1e-10;

/// A target surface point and the surface parameter where the triangle
/// should reach it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitSample {
    pub u: f64,
    pub v: f64,
    pub point: Point3,
}

/// Rational basis row with the weights frozen: `B_i w_i / sum_j B_j w_j`.
fn basis_row(tri: &BezierTriangle, s: f64, t: f64) -> Vec<f64> {
    let b = bernstein_tri_all(tri.degree(), s, t);
    let cps = tri.control_points();
    let d: f64 = b.iter().zip(cps).map(|(b, p)| b * p.w).sum();
    b.iter().zip(cps).map(|(b, p)| b * p.w / d).collect()
}

fn residual(a: &DMatrix<f64>, x: &DMatrix<f64>, p: &DMatrix<f64>) -> f64 {
    (p - a * x).norm_squared()
}

/// Minimizes `sum_k |P_k - T(s_k, t_k)|^2 + lambda sum |V - V_orig|^2` over
/// the Cartesian control points, keeping the weights of `init`.
///
/// Rank-deficient systems are solved in the minimum-norm sense relative to
/// `init` and flagged.
pub fn fit_boundary_triangle(init: &BezierTriangle, samples: &[FitSample], cfg: &FitConfig) -> Result<BezierTriangle> {
    if samples.is_empty() {
        return Err(Error::Empty("no boundary samples"));
    }
    if !(cfg.lambda >= 0.0 && cfg.lambda.is_finite()) {
        return Err(Error::Config(format!(
            "lambda must be finite and >= 0, got {}",
            cfg.lambda
        )));
    }
    let m = init.control_points().len();
    let n = samples.len();
    let mut a = DMatrix::zeros(n, m);
    let mut p = DMatrix::zeros(n, 3);
    for (k, smp) in samples.iter().enumerate() {
        let (s, t) = init.provenance.from_surface_param(smp.u, smp.v);
        for (j, val) in basis_row(init, s, t).into_iter().enumerate() {
            a[(k, j)] = val;
        }
        for (c, val) in smp.point.to_array().into_iter().enumerate() {
            p[(k, c)] = val;
        }
    }
    let mut x0 = DMatrix::zeros(m, 3);
    for (j, cp) in init.control_points().iter().enumerate() {
        for (c, val) in cp.point().to_array().into_iter().enumerate() {
            x0[(j, c)] = val;
        }
    }
    let r = &p - &a * &x0;
    let svd = a.clone().svd(true, true);
    let u = svd.u.as_ref().expect("requested");
    let vt = svd.v_t.as_ref().expect("requested");
    let sigma = &svd.singular_values;
    let smax = sigma.iter().copied().fold(0.0, f64::max);
    let cutoff = smax * RANK_RCOND.max(f64::EPSILON * n.max(m) as f64);
    let rank = sigma.iter().filter(|&&s| s > cutoff).count();
    let filtered: Vec<f64> = sigma
        .iter()
        .map(|&s| if s > cutoff { s / (s * s + cfg.lambda) } else { 0.0 })
        .collect();
    let mut utr = u.transpose() * &r;
    for (i, f) in filtered.iter().enumerate() {
        utr.row_mut(i).scale_mut(*f);
    }
    let delta = vt.transpose() * utr;
    let x = &x0 + &delta;

    let max_displacement = (0..m).map(|j| delta.row(j).norm()).fold(0.0, f64::max);
    let cps: Vec<WeightedPoint> = init
        .control_points()
        .iter()
        .enumerate()
        .map(|(j, cp)| WeightedPoint::from_point(Point3::new(x[(j, 0)], x[(j, 1)], x[(j, 2)]), cp.w))
        .collect();
    let status = TrimStatus::BoundaryFitted {
        residual: residual(&a, &x, &p),
        initial_residual: r.norm_squared(),
        max_displacement,
        rank_deficient: rank < m,
    };
    Ok(init.with_control_points(cps, status))
}

/// Frobenius distance between two control nets of equal size.
pub fn control_net_distance(a: &BezierTriangle, b: &BezierTriangle) -> f64 {
    a.control_points()
        .iter()
        .zip(b.control_points())
        .map(|(p, q)| {
            let d = p.point().distance(q.point());
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spline::{tri_indices, Diagonal, Half, ParamRect, Provenance};
    use crate::topology::PatchKey;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn prov() -> Provenance {
        Provenance {
            rect: PatchKey::new(0, 0, 0),
            param_rect: ParamRect::unit(),
            half: Half::LowerLeft,
            diagonal: Diagonal::Anti,
        }
    }

    fn random_triangle(rng: &mut ChaCha8Rng, d: usize, weights: &[f64]) -> BezierTriangle {
        let cps = tri_indices(d)
            .zip(weights)
            .map(|((a, b), &w)| {
                let p = Point3::new(
                    a as f64 / d as f64 + rng.random_range(-0.1..0.1),
                    b as f64 / d as f64 + rng.random_range(-0.1..0.1),
                    rng.random_range(-0.5..0.5),
                );
                WeightedPoint::from_point(p, w)
            })
            .collect();
        BezierTriangle::new(d, cps, prov()).unwrap()
    }

    fn scattered(rng: &mut ChaCha8Rng, truth: &BezierTriangle, n: usize) -> Vec<FitSample> {
        (0..n)
            .map(|_| {
                let s: f64 = rng.random_range(0.0..1.0);
                let t: f64 = rng.random_range(0.0..1.0 - s);
                FitSample {
                    u: s,
                    v: t,
                    point: truth.eval(s, t).unwrap(),
                }
            })
            .collect()
    }

    #[test]
    fn large_lambda_keeps_init() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let w = vec![1.0; 10];
        let truth = random_triangle(&mut rng, 3, &w);
        let init = random_triangle(&mut rng, 3, &w);
        let samples = scattered(&mut rng, &truth, 20);
        let cfg = FitConfig {
            lambda: 1e9,
            ..FitConfig::default()
        };
        let fit = fit_boundary_triangle(&init, &samples, &cfg).unwrap();
        assert!(control_net_distance(&fit, &init) < 1e-6);
    }

    #[test]
    fn residual_never_increases() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let w: Vec<f64> = (0..28).map(|_| rng.random_range(0.5..2.0)).collect();
        let truth = random_triangle(&mut rng, 6, &w);
        let init = random_triangle(&mut rng, 6, &w);
        let samples: Vec<FitSample> = (0..32)
            .map(|k| {
                let s = (k as f64 + 0.5) / 32.0;
                FitSample {
                    u: s,
                    v: 1.0 - s,
                    point: truth.eval(s, 1.0 - s).unwrap(),
                }
            })
            .collect();
        let fit = fit_boundary_triangle(&init, &samples, &FitConfig::default()).unwrap();
        match fit.trim_status {
            TrimStatus::BoundaryFitted {
                residual,
                initial_residual,
                rank_deficient,
                ..
            } => {
                assert!(residual < initial_residual);
                assert!(rank_deficient);
            }
            TrimStatus::Exact => panic!("status not updated"),
        }
    }

    #[test]
    fn config_validation() {
        assert!(FitConfig::default().validate().is_ok());
        let bad = FitConfig {
            lambda: 0.0,
            n_boundary_samples: 9,
            ..FitConfig::default()
        };
        assert!(bad.validate().is_err());
        let ok = FitConfig {
            lambda: 0.0,
            n_boundary_samples: 10,
            ..FitConfig::default()
        };
        assert!(ok.validate().is_ok());
        let neg = FitConfig {
            lambda: -1.0,
            ..FitConfig::default()
        };
        assert!(neg.validate().is_err());
    }
}
