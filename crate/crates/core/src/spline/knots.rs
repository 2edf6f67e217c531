//! Knot vectors, Cox–de Boor basis functions and Boehm knot insertion.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Lin;

/// Relative tolerance under which two knots are considered equal.
pub const KNOT_EQ_REL: f64 = 1e-10;

/// A non-decreasing sequence of parameter values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct KnotVector(Vec<f64>);

impl TryFrom<Vec<f64>> for KnotVector {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        KnotVector::new(v)
    }
}

impl From<KnotVector> for Vec<f64> {
    fn from(k: KnotVector) -> Self {
        k.0
    }
}

impl KnotVector {
    pub fn new(knots: Vec<f64>) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::Knots(format!("need at least 2 knots, got {}", knots.len())));
        }
        if let Some(bad) = knots.iter().find(|k| !k.is_finite()) {
            return Err(Error::Knots(format!("non-finite knot {bad}")));
        }
        if let Some(i) = knots.windows(2).position(|w| w[1] < w[0]) {
            return Err(Error::Knots(format!(
                "knots decrease at index {}: {} > {}",
                i + 1,
                knots[i],
                knots[i + 1]
            )));
        }
        if knots[knots.len() - 1] <= knots[0] {
            return Err(Error::Knots("knot vector has zero range".into()));
        }
        Ok(Self(knots))
    }

    /// Clamped knot vector `[a; p+1] ++ interior ++ [b; p+1]`.
    pub fn clamped(degree: usize, a: f64, b: f64, interior: &[f64]) -> Result<Self> {
        let mut k = vec![a; degree + 1];
        k.extend_from_slice(interior);
        k.extend(std::iter::repeat_n(b, degree + 1));
        Self::new(k)
    }

    /// Knot vector of a single Bézier segment on `[a, b]`.
    pub fn bezier(degree: usize, a: f64, b: f64) -> Self {
        Self::clamped(degree, a, b, &[]).expect("a < b")
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn first(&self) -> f64 {
        self.0[0]
    }

    pub fn last(&self) -> f64 {
        self.0[self.0.len() - 1]
    }

    pub fn range(&self) -> f64 {
        self.last() - self.first()
    }

    /// Absolute equality tolerance for this vector.
    pub fn tolerance(&self) -> f64 {
        KNOT_EQ_REL * self.range()
    }

    /// Number of knots equal to `u` within [`Self::tolerance`].
    pub fn multiplicity(&self, u: f64) -> usize {
        let tol = self.tolerance();
        self.0.iter().filter(|k| (*k - u).abs() <= tol).count()
    }

    /// Checks the length relation and interior multiplicities for a curve
    /// direction with `n_ctrl` control points.
    pub fn validate_for(&self, n_ctrl: usize, degree: usize) -> Result<()> {
        if n_ctrl < degree + 1 {
            return Err(Error::Knots(format!(
                "degree {degree} needs at least {} control points, got {n_ctrl}",
                degree + 1
            )));
        }
        if self.len() != n_ctrl + degree + 1 {
            return Err(Error::Knots(format!(
                "expected {} knots for {n_ctrl} control points of degree {degree}, got {}",
                n_ctrl + degree + 1,
                self.len()
            )));
        }
        let (lo, hi) = (self.0[degree], self.0[n_ctrl]);
        if hi <= lo {
            return Err(Error::Knots("empty valid parameter range".into()));
        }
        for (value, mult) in self.breakpoints() {
            if value > lo && value < hi && mult > degree {
                return Err(Error::Multiplicity {
                    knot: value,
                    multiplicity: mult,
                    degree,
                });
            }
        }
        Ok(())
    }

    /// Distinct knot values with their multiplicities, merging values within
    /// tolerance.
    pub fn breakpoints(&self) -> Vec<(f64, usize)> {
        let tol = self.tolerance();
        let mut out: Vec<(f64, usize)> = Vec::new();
        for &k in &self.0 {
            match out.last_mut() {
                Some((v, m)) if (k - *v).abs() <= tol => *m += 1,
                _ => out.push((k, 1)),
            }
        }
        out
    }

    /// Copy with every knot within tolerance of its cluster's first value
    /// replaced by that value.
    pub fn snapped(&self) -> Self {
        let tol = self.tolerance();
        let mut out = Vec::with_capacity(self.len());
        let mut anchor = self.0[0];
        for &k in &self.0 {
            if (k - anchor).abs() > tol {
                anchor = k;
            }
            out.push(anchor);
        }
        Self(out)
    }

    /// Valid parameter range `[u_p, u_{n+1}]` for `n_ctrl` control points.
    pub fn domain(&self, n_ctrl: usize, degree: usize) -> (f64, f64) {
        (self.0[degree], self.0[n_ctrl])
    }

    /// Clamps `t` into the valid range when it lies within tolerance, or fails.
    pub fn check_param(&self, n_ctrl: usize, degree: usize, t: f64) -> Result<f64> {
        let (lo, hi) = self.domain(n_ctrl, degree);
        let tol = self.tolerance();
        if !t.is_finite() || t < lo - tol || t > hi + tol {
            return Err(Error::Domain {
                value: t,
                min: lo,
                max: hi,
            });
        }
        Ok(t.clamp(lo, hi))
    }

    /// Span index `k` in `[p, n_ctrl-1]` with `u_k <= t < u_{k+1}`; at the
    /// right end of the domain the last non-empty span is returned.
    pub fn span(&self, n_ctrl: usize, degree: usize, t: f64) -> usize {
        let k = &self.0;
        let n = n_ctrl - 1;
        if t >= k[n + 1] {
            let mut s = n;
            while s > degree && k[s] >= k[s + 1] {
                s -= 1;
            }
            return s;
        }
        if t <= k[degree] {
            let mut s = degree;
            while s < n && k[s + 1] <= t {
                s += 1;
            }
            return s;
        }
        let (mut lo, mut hi) = (degree, n + 1);
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if t < k[mid] {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        lo
    }

    /// The `degree + 1` non-zero basis values `N_{span-p..=span, p}(t)`.
    pub fn basis_funs(&self, span: usize, degree: usize, t: f64) -> Vec<f64> {
        let k = &self.0;
        let mut n = vec![0.0; degree + 1];
        let mut left = vec![0.0; degree + 1];
        let mut right = vec![0.0; degree + 1];
        n[0] = 1.0;
        for j in 1..=degree {
            left[j] = t - k[span + 1 - j];
            right[j] = k[span + j] - t;
            let mut saved = 0.0;
            for r in 0..j {
                let denom = right[r + 1] + left[j - r];
                let temp = if denom == 0.0 { 0.0 } else { n[r] / denom };
                n[r] = saved + right[r + 1] * temp;
                saved = left[j - r] * temp;
            }
            n[j] = saved;
        }
        n
    }
}

/// Cox–de Boor recursion for `N_{i,p}(t)`, with `0/0 = 0`.
///
/// The last non-empty span is treated as closed on the right so that the
/// basis still sums to one at the final knot.
pub fn basis(knots: &KnotVector, degree: usize, i: usize, t: f64) -> Result<f64> {
    let (lo, hi) = (knots.first(), knots.last());
    if !t.is_finite() || t < lo || t > hi {
        return Err(Error::Domain {
            value: t,
            min: lo,
            max: hi,
        });
    }
    if i + degree + 1 >= knots.len() {
        return Err(Error::Knots(format!(
            "basis index {i} of degree {degree} needs {} knots, have {}",
            i + degree + 2,
            knots.len()
        )));
    }
    Ok(cox_de_boor(knots.as_slice(), degree, i, t))
}

fn cox_de_boor(u: &[f64], p: usize, i: usize, t: f64) -> f64 {
    if p == 0 {
        let last = u[u.len() - 1];
        let inside = u[i] <= t && t < u[i + 1];
        let closing = t == last && u[i + 1] == last && u[i] < u[i + 1];
        return if inside || closing { 1.0 } else { 0.0 };
    }
    let ratio = |num: f64, den: f64| if den == 0.0 { 0.0 } else { num / den };
    let a = ratio(t - u[i], u[i + p] - u[i]);
    let b = ratio(u[i + p + 1] - t, u[i + p + 1] - u[i + 1]);
    let left = if a == 0.0 { 0.0 } else { a * cox_de_boor(u, p - 1, i, t) };
    let right = if b == 0.0 {
        0.0
    } else {
        b * cox_de_boor(u, p - 1, i + 1, t)
    };
    left + right
}

/// Boehm's algorithm: inserts `u` once. `u` must already be snapped to an
/// existing knot value if it is meant to coincide with one.
///
/// Each new control point is `alpha * P_i + (1 - alpha) * P_{i-1}` with
/// `alpha = (u - u_i) / (u_{i+p} - u_i)`.
pub(crate) fn insert_raw<T: Lin>(knots: &[f64], ctrl: &[T], p: usize, u: f64) -> (Vec<f64>, Vec<T>) {
    let m = knots.len() - 1;
    // largest k <= m-1 with knots[k] <= u
    let mut k = knots.partition_point(|&x| x <= u) - 1;
    k = k.min(m - 1);
    let s = knots.iter().filter(|&&x| x == u).count();
    debug_assert!(k >= p, "insertion below the valid range");
    let first = k + 1 - p;
    let last = k - s.min(k);
    let mut new_ctrl = Vec::with_capacity(ctrl.len() + 1);
    new_ctrl.extend_from_slice(&ctrl[..first]);
    for i in first..=last {
        let denom = knots[i + p] - knots[i];
        let alpha = if denom == 0.0 { 0.0 } else { (u - knots[i]) / denom };
        new_ctrl.push(ctrl[i] * alpha + ctrl[i - 1] * (1.0 - alpha));
    }
    new_ctrl.extend_from_slice(&ctrl[last..]);
    let mut new_knots = Vec::with_capacity(knots.len() + 1);
    new_knots.extend_from_slice(&knots[..=k]);
    new_knots.push(u);
    new_knots.extend_from_slice(&knots[k + 1..]);
    (new_knots, new_ctrl)
}

/// Raises every breakpoint inside the valid range (ends included) to
/// multiplicity at least `p`, which turns each non-empty span into a Bézier
/// segment. Extra values in `extra` are inserted as breakpoints too.
pub(crate) fn refine_to_bezier<T: Lin>(knots: &KnotVector, ctrl: &[T], p: usize, extra: &[f64]) -> (Vec<f64>, Vec<T>) {
    let snapped = knots.snapped();
    let tol = knots.tolerance();
    let (lo, hi) = snapped.domain(ctrl.len(), p);
    let mut values: Vec<f64> = snapped
        .breakpoints()
        .into_iter()
        .map(|(v, _)| v)
        .filter(|&v| v >= lo && v <= hi)
        .collect();
    for &e in extra {
        if e > lo + tol && e < hi - tol && values.iter().all(|v| (v - e).abs() > tol) {
            values.push(e);
        }
    }
    values.sort_by(f64::total_cmp);

    let mut kv: Vec<f64> = snapped.0;
    let mut cp: Vec<T> = ctrl.to_vec();
    for v in values {
        let v = kv.iter().copied().find(|k| (k - v).abs() <= tol).unwrap_or(v);
        while kv.iter().filter(|&&x| x == v).count() < p {
            let (k2, c2) = insert_raw(&kv, &cp, p, v);
            kv = k2;
            cp = c2;
        }
    }
    (kv, cp)
}

/// Spans of a fully refined knot vector: `(span index, start, end)`.
pub(crate) fn bezier_spans(knots: &[f64], n_ctrl: usize, p: usize) -> Vec<(usize, f64, f64)> {
    (p..n_ctrl)
        .filter(|&k| knots[k] < knots[k + 1])
        .map(|k| (k, knots[k], knots[k + 1]))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degree_zero_indicator() {
        let k = KnotVector::new(vec![0.0, 1.0]).unwrap();
        assert_eq!(basis(&k, 0, 0, 0.5).unwrap(), 1.0);
        assert_eq!(basis(&k, 0, 0, 1.0).unwrap(), 1.0);
    }

    #[test]
    fn linear_hat() {
        let k = KnotVector::new(vec![0.0, 0.0, 1.0, 1.0]).unwrap();
        assert_eq!(basis(&k, 1, 0, 0.25).unwrap(), 0.75);
        assert_eq!(basis(&k, 1, 1, 0.25).unwrap(), 0.25);
    }

    #[test]
    fn outside_range_is_a_domain_error() {
        let k = KnotVector::new(vec![0.0, 0.0, 1.0, 1.0]).unwrap();
        assert!(matches!(basis(&k, 1, 0, 1.5), Err(Error::Domain { .. })));
        assert!(matches!(basis(&k, 1, 0, -0.1), Err(Error::Domain { .. })));
    }

    #[test]
    fn rejects_decreasing_and_short_vectors() {
        assert!(KnotVector::new(vec![0.0, 1.0, 0.5]).is_err());
        assert!(KnotVector::new(vec![0.0]).is_err());
        assert!(KnotVector::new(vec![0.0, 0.0]).is_err());
        assert!(KnotVector::new(vec![0.0, f64::NAN]).is_err());
    }

    #[test]
    fn interior_multiplicity_is_bounded_by_degree() {
        let k = KnotVector::new(vec![0.0, 0.0, 0.0, 0.5, 0.5, 0.5, 1.0, 1.0, 1.0]).unwrap();
        // degree 2, 6 control points: interior knot 0.5 has multiplicity 3
        assert!(matches!(
            k.validate_for(6, 2),
            Err(Error::Multiplicity { multiplicity: 3, .. })
        ));
        let ok = KnotVector::new(vec![0.0, 0.0, 0.0, 0.5, 0.5, 1.0, 1.0, 1.0]).unwrap();
        ok.validate_for(5, 2).unwrap();
        assert!(ok.validate_for(4, 2).is_err());
    }

    #[test]
    fn fast_basis_matches_recursion() {
        let k = KnotVector::new(vec![0.0, 0.0, 0.0, 0.0, 0.2, 0.5, 0.5, 0.9, 1.0, 1.0, 1.0, 1.0]).unwrap();
        let n_ctrl = k.len() - 4;
        for step in 0..=100 {
            let t = step as f64 / 100.0;
            let span = k.span(n_ctrl, 3, t);
            let fast = k.basis_funs(span, 3, t);
            for (r, v) in fast.iter().enumerate() {
                let slow = basis(&k, 3, span - 3 + r, t).unwrap();
                assert!((v - slow).abs() < 1e-14, "t={t} r={r}");
            }
        }
    }

    #[test]
    fn snapping_merges_near_knots() {
        let k = KnotVector::new(vec![0.0, 0.0, 0.5, 0.5 + 1e-13, 1.0, 1.0]).unwrap();
        assert_eq!(k.multiplicity(0.5), 2);
        assert_eq!(k.snapped().as_slice(), &[0.0, 0.0, 0.5, 0.5, 1.0, 1.0]);
        assert_eq!(k.breakpoints(), vec![(0.0, 2), (0.5, 2), (1.0, 2)]);
    }
}
