mod common;

use std::collections::HashMap;

use breptok::embed::{
    aggregate_edge_loop, aggregate_face_shell, aggregate_loop_face, apply_mask, embed_bezier_triangle, embed_edge,
    embed_face_geometry, embed_vertex, encode_tokens, tokenize_model, triangle_features, EmbedConfig, Tensor,
    TokenSequence, WeightBundle,
};
use breptok::fixtures::{cube, generate_model, FixtureKind, FixtureParams};
use breptok::geom::{Point3, WeightedPoint};
use breptok::spline::{tri_count, BezierTriangle, Diagonal, Half, ParamRect, Provenance};
use breptok::topology::{EdgeId, LoopEdge, LoopId, LoopRec, PatchKey};
use breptok::BRepModel;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;

fn cfg() -> EmbedConfig {
    EmbedConfig::default()
}

fn weights() -> WeightBundle {
    WeightBundle::init(&cfg(), 7)
}

fn random_vec(r: &mut impl Rng, n: usize) -> Tensor {
    Tensor::vector((0..n).map(|_| r.random_range(-1.0f32..1.0)).collect())
}

fn get(w: &WeightBundle, name: &str) -> Vec<f64> {
    w.params[name].data().iter().map(|&v| f64::from(v)).collect()
}

fn affine(w: &WeightBundle, prefix: &str, x: &[f64]) -> Vec<f64> {
    let m = get(w, &format!("{prefix}.weight"));
    let b = get(w, &format!("{prefix}.bias"));
    let n = x.len();
    b.iter()
        .enumerate()
        .map(|(o, bo)| bo + (0..n).map(|k| m[o * n + k] * x[k]).sum::<f64>())
        .collect()
}

fn norm(w: &WeightBundle, prefix: &str, x: &[f64]) -> Vec<f64> {
    let g = get(w, &format!("{prefix}.gamma"));
    let b = get(w, &format!("{prefix}.beta"));
    let d = x.len() as f64;
    let mean = x.iter().sum::<f64>() / d;
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / d;
    x.iter()
        .enumerate()
        .map(|(k, v)| (v - mean) / (var + 1e-5).sqrt() * g[k] + b[k])
        .collect()
}

/// One token through post-norm encoder layers: attention over a single key
/// reduces to the value projection.
fn single_token_encoder(w: &WeightBundle, prefix: &str, layers: usize, x: &[f64]) -> Vec<f64> {
    // position 0 code: sin(0) on even, cos(0) on odd coordinates
    let mut h: Vec<f64> = x.iter().enumerate().map(|(k, v)| v + (k % 2) as f64).collect();
    for l in 0..layers {
        let p = format!("{prefix}.{l}");
        let attn = affine(w, &format!("{p}.out"), &affine(w, &format!("{p}.v"), &h));
        let h1 = norm(
            w,
            &format!("{p}.norm1"),
            &h.iter().zip(&attn).map(|(a, b)| a + b).collect::<Vec<_>>(),
        );
        let hidden: Vec<f64> = affine(w, &format!("{p}.ff1"), &h1)
            .into_iter()
            .map(|v| v.max(0.0))
            .collect();
        let ff = affine(w, &format!("{p}.ff2"), &hidden);
        h = norm(
            w,
            &format!("{p}.norm2"),
            &h1.iter().zip(&ff).map(|(a, b)| a + b).collect::<Vec<_>>(),
        );
    }
    h
}

fn assert_close(got: &Tensor, want: &[f64], tol: f64) {
    assert_eq!(got.len(), want.len());
    for (g, w) in got.data().iter().zip(want) {
        assert!((f64::from(*g) - w).abs() <= tol, "{g} vs {w}");
    }
}

#[test]
fn single_segment_passes_through_the_encoder() {
    let (c, w) = (cfg(), weights());
    let x = random_vec(&mut ChaCha8Rng::seed_from_u64(1), 64);
    let want: Vec<f64> = single_token_encoder(
        &w,
        "edge_seq",
        c.edge_seq.layers,
        &x.data().iter().map(|&v| v.into()).collect::<Vec<_>>(),
    );
    assert_close(&embed_edge(std::slice::from_ref(&x), &w, &c).unwrap(), &want, 1e-4);
    let want: Vec<f64> = single_token_encoder(
        &w,
        "tri_seq",
        c.tri_seq.layers,
        &x.data().iter().map(|&v| v.into()).collect::<Vec<_>>(),
    );
    assert_close(&embed_face_geometry(&[x], &w, &c).unwrap(), &want, 1e-4);
}

#[test]
fn sequence_shapes() {
    let (c, w) = (cfg(), weights());
    let mut r = ChaCha8Rng::seed_from_u64(2);
    for n in [1, 7, 100] {
        let segs: Vec<Tensor> = (0..n).map(|_| random_vec(&mut r, 64)).collect();
        assert_eq!(embed_edge(&segs, &w, &c).unwrap().shape(), [64]);
    }
    let too_many: Vec<Tensor> = (0..101).map(|_| random_vec(&mut r, 64)).collect();
    assert!(embed_edge(&too_many, &w, &c).is_err());
    for n in [2, 16, 64] {
        let tris: Vec<Tensor> = (0..n).map(|_| random_vec(&mut r, 64)).collect();
        assert_eq!(embed_face_geometry(&tris, &w, &c).unwrap().shape(), [64]);
    }
    assert!(embed_face_geometry(&[], &w, &c).is_err());
    for _ in 0..100 {
        let p = random_point(&mut r, 1.0);
        assert_eq!(embed_vertex(p, &w, &c).unwrap().shape(), [64]);
    }
}

fn triangle(degree: usize, r: &mut impl Rng) -> BezierTriangle {
    let cps = (0..tri_count(degree))
        .map(|_| WeightedPoint::from_point(random_point(r, 1.0), r.random_range(0.5..2.0)))
        .collect();
    BezierTriangle::new(
        degree,
        cps,
        Provenance {
            rect: PatchKey::new(0, 0, 0),
            param_rect: ParamRect::unit(),
            half: Half::LowerLeft,
            diagonal: Diagonal::Anti,
        },
    )
    .unwrap()
}

#[test]
fn triangle_input_length() {
    let (c, w) = (cfg(), weights());
    let mut r = ChaCha8Rng::seed_from_u64(3);
    let tri = triangle(6, &mut r);
    assert_eq!(triangle_features(&tri, &c, false).unwrap().len(), 28 * 4 + 3);
    assert_eq!(c.triangle_input(), 115);
    assert_eq!(embed_bezier_triangle(&tri, &w, &c).unwrap().shape(), [64]);
    assert!(embed_bezier_triangle(&triangle(3, &mut r), &w, &c).is_err());

    // every control point at one spot: no normal, still embeds
    let flat = tri.map_points(|_| Point3::new(0.2, 0.2, 0.2));
    let x = triangle_features(&flat, &c, false).unwrap();
    assert_eq!(&x[112..], &[0.0, 0.0, 0.0]);
    assert!(embed_bezier_triangle(&flat, &w, &c)
        .unwrap()
        .data()
        .iter()
        .all(|v| v.is_finite()));
}

#[test]
fn pooled_aggregations_ignore_order() {
    let (c, w) = (cfg(), weights());
    let mut r = ChaCha8Rng::seed_from_u64(4);
    let face = random_vec(&mut r, 64);
    let outer = random_vec(&mut r, 64);
    let mut inner: Vec<Tensor> = (0..5).map(|_| random_vec(&mut r, 64)).collect();
    let a = aggregate_loop_face(&face, &outer, &inner, &w, &c).unwrap();
    inner.shuffle(&mut r);
    let b = aggregate_loop_face(&face, &outer, &inner, &w, &c).unwrap();
    assert_eq!(a.shape(), [128]);
    assert!(a.max_abs_diff(&b) <= 1e-6);

    let f = random_vec(&mut r, 128);
    let mut nbrs: Vec<Tensor> = (0..6).map(|_| random_vec(&mut r, 128)).collect();
    let a = aggregate_face_shell(&f, &nbrs, &w, &c).unwrap();
    nbrs.shuffle(&mut r);
    let b = aggregate_face_shell(&f, &nbrs, &w, &c).unwrap();
    assert_eq!(a.shape(), [192]);
    assert!(a.max_abs_diff(&b) <= 1e-6);
    assert_eq!(&a.data()[..128], f.data());

    // identical neighbours pool to themselves
    let v = random_vec(&mut r, 128);
    let one = aggregate_face_shell(&f, std::slice::from_ref(&v), &w, &c).unwrap();
    let many = aggregate_face_shell(&f, &[v.clone(), v.clone(), v], &w, &c).unwrap();
    assert!(one.max_abs_diff(&many) <= 1e-6);
}

#[test]
fn zero_weights_give_zero_loop() {
    let c = cfg();
    let w = WeightBundle::constant(&c, 0.0);
    let mut r = ChaCha8Rng::seed_from_u64(5);
    let lp = LoopRec {
        id: LoopId(1),
        edges: (0..3)
            .map(|i| LoopEdge {
                edge: EdgeId(i),
                reversed: false,
            })
            .collect(),
        is_outer: true,
    };
    let embs: HashMap<EdgeId, Tensor> = (0..3).map(|i| (EdgeId(i), random_vec(&mut r, 192))).collect();
    let out = aggregate_edge_loop(&lp, &embs, &w, &c, Some(3)).unwrap();
    assert_eq!(out, Tensor::zeros(&[64]));
}

#[test]
fn mask_is_exact_and_ordered() {
    let items: Vec<usize> = (0..8).collect();
    assert_eq!(apply_mask(&items, 0.0, 1).unwrap(), items);
    let half = apply_mask(&items, 0.5, 9).unwrap();
    assert_eq!(half.len(), 4);
    assert!(half.windows(2).all(|p| p[0] < p[1]));
    assert_eq!(half, apply_mask(&items, 0.5, 9).unwrap());
    assert_eq!(apply_mask(&items, 0.25, 9).unwrap().len(), 6);
    assert_eq!(apply_mask(&[1], 0.9, 0).unwrap().len(), 1);
    assert!(apply_mask(&items, 1.0, 0).is_err());
}

/// Second copy of the model with ids shifted, same geometry.
fn doubled(m: &BRepModel) -> BRepModel {
    const SHIFT: u32 = 1000;
    let mut out = m.clone();
    for v in &m.vertices {
        let mut v = v.clone();
        v.id.0 += SHIFT;
        out.vertices.push(v);
    }
    for e in &m.edges {
        let mut e = e.clone();
        e.id.0 += SHIFT;
        e.start.0 += SHIFT;
        e.end.0 += SHIFT;
        out.edges.push(e);
    }
    for l in &m.loops {
        let mut l = l.clone();
        l.id.0 += SHIFT;
        l.edges.iter_mut().for_each(|e| e.edge.0 += SHIFT);
        out.loops.push(l);
    }
    for f in &m.faces {
        let mut f = f.clone();
        f.id.0 += SHIFT;
        f.outer_loop.0 += SHIFT;
        f.inner_loops.iter_mut().for_each(|l| l.0 += SHIFT);
        out.faces.push(f);
    }
    for s in &m.shells {
        let mut s = s.clone();
        s.id.0 += SHIFT;
        s.faces.iter_mut().for_each(|f| f.0 += SHIFT);
        out.shells.push(s);
    }
    out
}

#[test]
fn identical_disjoint_cubes_share_tokens() {
    let (c, w) = (cfg(), weights());
    let m = doubled(&cube(1.0));
    let seq = tokenize_model(&m, &w, &c).unwrap();
    assert_eq!(seq.tokens.shape(), [12, 192]);
    for i in 0..6 {
        assert_eq!(seq.face_ids[i + 6].0, seq.face_ids[i].0 + 1000);
        assert_eq!(seq.tokens.row(i), seq.tokens.row(i + 6));
    }
}

#[test]
fn tokens_are_deterministic_and_fixed_width() {
    let c = EmbedConfig {
        mask_ratio: 0.25,
        ..cfg()
    };
    let w = weights();
    for kind in FixtureKind::ALL {
        let m = generate_model(kind, &FixtureParams::default()).unwrap();
        let a = tokenize_model(&m, &w, &c).unwrap();
        let b = tokenize_model(&m, &w, &c).unwrap();
        assert_eq!(a.tokens.shape(), [m.faces.len(), 192], "{}", kind.name());
        assert_eq!(a, b);
        assert!(a.tokens.data().iter().all(|v| v.is_finite()));
    }
}

#[test]
fn encoder_is_permutation_equivariant() {
    let (c, w) = (cfg(), weights());
    let m = generate_model(FixtureKind::PlateWithHoles, &FixtureParams::default()).unwrap();
    let seq = tokenize_model(&m, &w, &c).unwrap();
    let out = encode_tokens(&seq, &w, &c).unwrap();
    let f = seq.face_ids.len();
    assert_eq!(out.shape(), [f, 192]);

    let mut perm: Vec<usize> = (0..f).collect();
    perm.shuffle(&mut ChaCha8Rng::seed_from_u64(6));
    let rows: Vec<Tensor> = perm.iter().map(|&i| seq.tokens.row_tensor(i)).collect();
    let shuffled = TokenSequence {
        face_ids: perm.iter().map(|&i| seq.face_ids[i]).collect(),
        tokens: Tensor::stack(&rows).unwrap(),
    };
    let out2 = encode_tokens(&shuffled, &w, &c).unwrap();
    for (k, &i) in perm.iter().enumerate() {
        let d = out2.row_tensor(k).max_abs_diff(&out.row_tensor(i));
        assert!(d <= 1e-5, "{d}");
    }

    let single = TokenSequence {
        face_ids: vec![seq.face_ids[0]],
        tokens: Tensor::stack(&[seq.tokens.row_tensor(0)]).unwrap(),
    };
    assert_eq!(encode_tokens(&single, &w, &c).unwrap().shape(), [1, 192]);
}

#[test]
fn mismatched_weights_are_rejected() {
    let c = cfg();
    let small = EmbedConfig { embed_dim: 32, ..cfg() };
    let w = WeightBundle::init(&small, 1);
    assert!(tokenize_model(&cube(1.0), &w, &c).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn mask_keeps_round_ratio(n in 1usize..200, ratio in 0.0f64..0.99, seed in any::<u64>()) {
        let items: Vec<usize> = (0..n).collect();
        let kept = apply_mask(&items, ratio, seed).unwrap();
        let dropped = ((ratio * n as f64).round() as usize).min(n - 1);
        prop_assert_eq!(kept.len(), n - dropped);
        prop_assert!(kept.windows(2).all(|p| p[0] < p[1]));
    }
}
