//! Independent reference implementations used as test oracles. Nothing here
//! calls into the evaluation code under test.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use breptok::geom::{Point3, WeightedPoint};
use breptok::spline::{BSplineCurve, BezierTriangle, CurveDim, KnotVector};
use breptok::topology::{BRepModel, FaceId};
use rand::Rng;

pub fn choose(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Recursive Cox-de Boor basis; the last non-empty span is closed on the
/// right.
pub fn basis(knots: &[f64], i: usize, p: usize, t: f64) -> f64 {
    if p == 0 {
        let last = knots[knots.len() - 1];
        let closes = t == last && knots[i + 1] == last && knots[i] < last;
        return if (knots[i] <= t && t < knots[i + 1]) || closes {
            1.0
        } else {
            0.0
        };
    }
    let mut v = 0.0;
    let d1 = knots[i + p] - knots[i];
    if d1 > 0.0 {
        v += (t - knots[i]) / d1 * basis(knots, i, p - 1, t);
    }
    let d2 = knots[i + p + 1] - knots[i + 1];
    if d2 > 0.0 {
        v += (knots[i + p + 1] - t) / d2 * basis(knots, i + 1, p - 1, t);
    }
    v
}

pub fn bspline_point(knots: &[f64], p: usize, cps: &[Point3], t: f64) -> Point3 {
    cps.iter().enumerate().fold(Point3::new(0.0, 0.0, 0.0), |acc, (i, c)| {
        acc + *c * basis(knots, i, p, t)
    })
}

pub fn bernstein(n: usize, i: usize, t: f64) -> f64 {
    choose(n, i) * t.powi(i as i32) * (1.0 - t).powi((n - i) as i32)
}

pub fn bezier_point(cps: &[Point3], t: f64) -> Point3 {
    let n = cps.len() - 1;
    cps.iter()
        .enumerate()
        .fold(Point3::new(0.0, 0.0, 0.0), |acc, (i, c)| acc + *c * bernstein(n, i, t))
}

/// Rational tensor-product Bézier patch at local `(s, t)`.
pub fn rect_point(grid: &[Vec<WeightedPoint>], s: f64, t: f64) -> Point3 {
    let (m, n) = (grid.len() - 1, grid[0].len() - 1);
    let mut num = Point3::new(0.0, 0.0, 0.0);
    let mut den = 0.0;
    for (i, row) in grid.iter().enumerate() {
        for (j, p) in row.iter().enumerate() {
            let b = bernstein(m, i, s) * bernstein(n, j, t) * p.w;
            num = num + p.point() * b;
            den += b;
        }
    }
    num * (1.0 / den)
}

/// Rational Bézier triangle at barycentric `(s, t)` with multinomial
/// weights `d! / (a! b! c!)` on `s^a t^b (1-s-t)^c`.
pub fn triangle_point(tri: &BezierTriangle, s: f64, t: f64) -> Point3 {
    let d = tri.degree();
    let c = 1.0 - s - t;
    let mut num = Point3::new(0.0, 0.0, 0.0);
    let mut den = 0.0;
    for a in 0..=d {
        for b in 0..=d - a {
            let k = choose(d, a) * choose(d - a, b);
            let basis = k * s.powi(a as i32) * t.powi(b as i32) * c.powi((d - a - b) as i32);
            let p = tri.control(a, b);
            num = num + p.point() * (basis * p.w);
            den += basis * p.w;
        }
    }
    num * (1.0 / den)
}

pub fn random_point(rng: &mut impl Rng, scale: f64) -> Point3 {
    Point3::new(
        rng.random_range(-scale..scale),
        rng.random_range(-scale..scale),
        rng.random_range(-scale..scale),
    )
}

/// Clamped B-spline of `degree` with up to 8 random interior knots, some
/// repeated.
pub fn random_curve(rng: &mut impl Rng, degree: usize) -> BSplineCurve {
    let k = rng.random_range(0..=8);
    let mut interior: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..0.95)).collect();
    if degree > 1 && k > 1 && rng.random_bool(0.3) {
        interior[1] = interior[0];
    }
    interior.sort_by(f64::total_cmp);
    let a = rng.random_range(-2.0..0.0);
    let b = a + rng.random_range(0.5..3.0);
    let interior: Vec<f64> = interior.iter().map(|x| a + x * (b - a)).collect();
    let knots = KnotVector::clamped(degree, a, b, &interior).unwrap();
    let n = knots.len() - degree - 1;
    let pts = (0..n).map(|_| random_point(rng, 5.0)).collect();
    BSplineCurve::new(degree, pts, knots, CurveDim::Three).unwrap()
}

pub fn random_grid(rng: &mut impl Rng, m: usize, n: usize, rational: bool) -> Vec<Vec<WeightedPoint>> {
    (0..=m)
        .map(|_| {
            (0..=n)
                .map(|_| {
                    let w = if rational { rng.random_range(0.5..2.0) } else { 1.0 };
                    WeightedPoint::from_point(random_point(rng, 1.0), w)
                })
                .collect()
        })
        .collect()
}

pub fn control_diagonal(points: impl IntoIterator<Item = Point3>) -> f64 {
    let mut lo = Point3::new(f64::INFINITY, f64::INFINITY, f64::INFINITY);
    let mut hi = Point3::new(f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in points {
        lo = lo.min(p);
        hi = hi.max(p);
    }
    (hi - lo).norm()
}

/// Uniform point of the unit triangle.
pub fn random_barycentric(rng: &mut impl Rng) -> (f64, f64) {
    let (mut s, mut t): (f64, f64) = (rng.random(), rng.random());
    if s + t > 1.0 {
        s = 1.0 - s;
        t = 1.0 - t;
    }
    (s, t)
}

/// Depth-first quadrant traversal: children visited in key-digit order
/// `(x, y) = (0,0), (0,1), (1,0), (1,1)`.
pub fn quadrant_dfs(x: u32, y: u32, depth: u32, target: u32, out: &mut Vec<(u32, u32)>) {
    if depth == target {
        out.push((x, y));
        return;
    }
    for (dx, dy) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
        quadrant_dfs(2 * x + dx, 2 * y + dy, depth + 1, target, out);
    }
}

/// Pairwise scan: faces are neighbours iff their loops share an edge id.
pub fn brute_adjacency(model: &BRepModel) -> BTreeMap<FaceId, BTreeSet<FaceId>> {
    let face_edges: Vec<(FaceId, Vec<u32>)> = model
        .faces
        .iter()
        .map(|f| {
            let mut edges = Vec::new();
            for lid in std::iter::once(f.outer_loop).chain(f.inner_loops.iter().copied()) {
                let lp = model.loops.iter().find(|l| l.id == lid).unwrap();
                edges.extend(lp.edges.iter().map(|e| e.edge.0));
            }
            (f.id, edges)
        })
        .collect();
    let mut out: BTreeMap<FaceId, BTreeSet<FaceId>> = face_edges.iter().map(|(f, _)| (*f, BTreeSet::new())).collect();
    for (i, (fa, ea)) in face_edges.iter().enumerate() {
        for (fb, eb) in &face_edges[i + 1..] {
            if ea.iter().any(|e| eb.contains(e)) {
                out.get_mut(fa).unwrap().insert(*fb);
                out.get_mut(fb).unwrap().insert(*fa);
            }
        }
    }
    out
}
