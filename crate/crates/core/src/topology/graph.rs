//! Face adjacency and loop unfolding.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::model::{BRepModel, EdgeId, FaceId, LoopRec};
use super::validate::edge_face_uses;
use crate::error::{Error, Result};

/// Faces sharing at least one edge. Symmetric and irreflexive; every face of
/// the model has an entry, possibly empty.
pub fn face_adjacency(model: &BRepModel) -> BTreeMap<FaceId, BTreeSet<FaceId>> {
    let mut adj: BTreeMap<FaceId, BTreeSet<FaceId>> = model.faces.iter().map(|f| (f.id, BTreeSet::new())).collect();
    for faces in edge_face_uses(model).values() {
        for &a in faces {
            for &b in faces {
                if a != b {
                    adj.entry(a).or_default().insert(b);
                }
            }
        }
    }
    adj
}

/// Breaks the loop at `break_index` and pads it cyclically:
/// `[e_n, e_1, ..., e_n, e_1, e_2]`, indices taken modulo `n`.
pub fn unfold_loop(lp: &LoopRec, break_index: usize) -> Result<Vec<EdgeId>> {
    let n = lp.edges.len();
    if n == 0 {
        return Err(Error::Empty("loop has no edges"));
    }
    if break_index >= n {
        return Err(Error::Topology(format!(
            "break index {break_index} out of range for loop {} with {n} edges",
            lp.id
        )));
    }
    let at = |k: usize| lp.edges[(break_index + k) % n].edge;
    let mut out = Vec::with_capacity(n + 3);
    out.push(at(n - 1));
    out.extend((0..n).map(at));
    out.push(at(0));
    out.push(at(1 % n));
    Ok(out)
}

/// Break position for a loop: seeded pseudo-random when `seed` is given,
/// otherwise the position of the lowest edge id.
///
/// The seeded draw depends only on the seed and the loop length, so
/// identical loops in different parts of a model break identically.
pub fn choose_break(lp: &LoopRec, seed: Option<u64>) -> usize {
    let n = lp.edges.len();
    if n <= 1 {
        return 0;
    }
    match seed {
        Some(s) => {
            let mut rng = ChaCha8Rng::seed_from_u64(s ^ (n as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
            rng.random_range(0..n)
        }
        None => lp
            .edges
            .iter()
            .enumerate()
            .min_by_key(|(_, e)| e.edge)
            .map(|(i, _)| i)
            .unwrap_or(0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::{LoopEdge, LoopId};

    fn lp(ids: &[u32]) -> LoopRec {
        LoopRec {
            id: LoopId(0),
            edges: ids
                .iter()
                .map(|&i| LoopEdge {
                    edge: EdgeId(i),
                    reversed: false,
                })
                .collect(),
            is_outer: true,
        }
    }

    fn ids(v: &[EdgeId]) -> Vec<u32> {
        v.iter().map(|e| e.0).collect()
    }

    #[test]
    fn three_edge_loop() {
        // a=1, b=2, c=3
        assert_eq!(ids(&unfold_loop(&lp(&[1, 2, 3]), 0).unwrap()), vec![3, 1, 2, 3, 1, 2]);
        assert_eq!(ids(&unfold_loop(&lp(&[1, 2, 3]), 1).unwrap()), vec![1, 2, 3, 1, 2, 3]);
    }

    #[test]
    fn short_loops_wrap() {
        assert_eq!(ids(&unfold_loop(&lp(&[7]), 0).unwrap()), vec![7, 7, 7, 7]);
        assert_eq!(ids(&unfold_loop(&lp(&[1, 2]), 1).unwrap()), vec![1, 2, 1, 2, 1]);
    }

    #[test]
    fn bad_inputs() {
        assert!(matches!(unfold_loop(&lp(&[]), 0), Err(Error::Empty(_))));
        assert!(unfold_loop(&lp(&[1, 2]), 2).is_err());
    }

    #[test]
    fn break_choice() {
        assert_eq!(choose_break(&lp(&[5, 3, 9]), None), 1);
        let a = choose_break(&lp(&[5, 3, 9, 4]), Some(11));
        assert_eq!(a, choose_break(&lp(&[50, 30, 90, 40]), Some(11)));
        assert!(a < 4);
    }
}
