//! Z-order (Morton) keys and deterministic patch ordering.

use std::cmp::Ordering;
use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spline::BezierTriangle;

/// Deepest level whose interleaved key still fits in a `u64`.
pub const MAX_DEPTH: u32 = 31;

/// Integer quadtree coordinates of a patch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PatchKey {
    pub x: u32,
    pub y: u32,
    pub depth: u32,
}

impl PatchKey {
    pub const fn new(x: u32, y: u32, depth: u32) -> Self {
        Self { x, y, depth }
    }

    /// Child in quadrant `(dx, dy)`, one level deeper.
    pub fn child(&self, dx: u32, dy: u32) -> PatchKey {
        PatchKey::new(2 * self.x + dx, 2 * self.y + dy, self.depth + 1)
    }

    pub fn key(&self) -> Result<u64> {
        zorder_key(self.x as u64, self.y as u64, self.depth)
    }
}

/// Bit-interleaved key `x1 y1 x2 y2 ... xd yd`, most significant level first,
/// with the `x` bit ahead of the `y` bit at every level.
pub fn zorder_key(x: u64, y: u64, depth: u32) -> Result<u64> {
    if depth > MAX_DEPTH || x >> depth != 0 || y >> depth != 0 {
        return Err(Error::Coordinate { x, y, depth });
    }
    let mut key = 0u64;
    for level in (0..depth).rev() {
        key = (key << 2) | (((x >> level) & 1) << 1) | ((y >> level) & 1);
    }
    Ok(key)
}

/// Inverse of [`zorder_key`].
pub fn zorder_decode(key: u64, depth: u32) -> (u64, u64) {
    let (mut x, mut y) = (0, 0);
    for level in 0..depth {
        let pair = (key >> (2 * level)) & 0b11;
        x |= (pair >> 1) << level;
        y |= (pair & 1) << level;
    }
    (x, y)
}

/// Sorts mixed-depth keys by their left-aligned key bit strings; shallower
/// keys sort first on ties. Returns the permutation of input indices.
pub fn sort_patch_keys(keys: &[PatchKey]) -> Result<Vec<usize>> {
    let mut seen = HashSet::with_capacity(keys.len());
    for k in keys {
        if !seen.insert(*k) {
            return Err(Error::DuplicatePatch {
                x: k.x,
                y: k.y,
                depth: k.depth,
            });
        }
    }
    let max_depth = keys.iter().map(|k| k.depth).max().unwrap_or(0);
    let aligned: Vec<(u64, u32)> = keys
        .iter()
        .map(|k| Ok((k.key()? << (2 * (max_depth - k.depth)), k.depth)))
        .collect::<Result<_>>()?;
    let mut order: Vec<usize> = (0..keys.len()).collect();
    order.sort_by(|&a, &b| match aligned[a].0.cmp(&aligned[b].0) {
        Ordering::Equal => aligned[a].1.cmp(&aligned[b].1),
        o => o,
    });
    Ok(order)
}

/// A quadtree leaf and the triangles it produced.
#[derive(Debug, Clone, PartialEq)]
pub struct PatchLeaf {
    pub key: PatchKey,
    pub triangles: Vec<BezierTriangle>,
}

/// Flattens leaves into one triangle sequence in z-order; inside a leaf the
/// lower-left triangle precedes the upper-right one.
pub fn order_patches(leaves: Vec<PatchLeaf>) -> Result<Vec<BezierTriangle>> {
    let keys: Vec<PatchKey> = leaves.iter().map(|l| l.key).collect();
    let order = sort_patch_keys(&keys)?;
    let mut slots: Vec<Option<PatchLeaf>> = leaves.into_iter().map(Some).collect();
    let mut out = Vec::new();
    for i in order {
        let mut leaf = slots[i].take().expect("each index once");
        leaf.triangles.sort_by_key(|t| t.provenance.half);
        out.extend(leaf.triangles);
    }
    Ok(out)
}
