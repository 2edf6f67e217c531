//! Geometry encoders, the topological aggregation stages and the face-token
//! encoder.

use std::collections::{BTreeMap, HashMap};

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::{EmbedConfig, EncoderConfig};
use super::tensor::{
    add_positional, attention_layer, dense_forward, max_pool, mean_pool, relu, rnn_step, AttentionParams, Tensor,
};
use super::weights::WeightBundle;
use crate::error::{Error, Result};
use crate::geom::Point3;
use crate::spline::{triangle_center_normal, BezierCurve, BezierTriangle};
use crate::topology::{
    choose_break, face_adjacency, unfold_loop, validate_model, BRepModel, EdgeId, EdgeRec, FaceId, LoopRec,
};
use crate::trim::tessellate_trimmed;

/// Face tokens in face-id order.
#[derive(Debug, Clone, PartialEq)]
pub struct TokenSequence {
    pub face_ids: Vec<FaceId>,
    /// `[F, D]`.
    pub tokens: Tensor,
}

fn mlp(w: &WeightBundle, prefix: &str, layers: usize, x: &Tensor) -> Result<Tensor> {
    let mut h = x.clone();
    for i in 0..layers {
        h = dense_forward(
            &h,
            w.get(&format!("{prefix}.{i}.weight"))?,
            w.get(&format!("{prefix}.{i}.bias"))?,
        )?;
        if i + 1 < layers {
            h = relu(&h);
        }
    }
    Ok(h)
}

fn encoder(w: &WeightBundle, prefix: &str, enc: EncoderConfig, x: &Tensor) -> Result<Tensor> {
    let mut h = x.as_matrix();
    for l in 0..enc.layers {
        let g = |s: &str| w.get(&format!("{prefix}.{l}.{s}"));
        let p = AttentionParams {
            heads: enc.heads,
            wq: g("q.weight")?,
            bq: g("q.bias")?,
            wk: g("k.weight")?,
            bk: g("k.bias")?,
            wv: g("v.weight")?,
            bv: g("v.bias")?,
            wo: g("out.weight")?,
            bo: g("out.bias")?,
            norm1: (g("norm1.gamma")?, g("norm1.beta")?),
            ff1: (g("ff1.weight")?, g("ff1.bias")?),
            ff2: (g("ff2.weight")?, g("ff2.bias")?),
            norm2: (g("norm2.gamma")?, g("norm2.beta")?),
        };
        h = attention_layer(&h, &p)?;
    }
    Ok(h)
}

pub fn embed_vertex(point: Point3, w: &WeightBundle, cfg: &EmbedConfig) -> Result<Tensor> {
    mlp(w, "vertex", cfg.vertex_layers, &Tensor::from_f64(&point.to_array()))
}

/// Encoder input for a cubic segment: control points then the unit tangent
/// at `t = 0.5`.
pub fn curve_features(bez: &BezierCurve) -> Result<Vec<f64>> {
    if bez.degree() != 3 {
        return Err(Error::Geometry(format!(
            "curve encoder takes cubic segments, got degree {}",
            bez.degree()
        )));
    }
    let mut x: Vec<f64> = bez.control_points().iter().flat_map(|p| p.to_array()).collect();
    x.extend(bez.unit_tangent(0.5).to_array());
    Ok(x)
}

pub fn embed_bezier_curve(bez: &BezierCurve, w: &WeightBundle, cfg: &EmbedConfig) -> Result<Tensor> {
    mlp(w, "curve", cfg.curve_layers, &Tensor::from_f64(&curve_features(bez)?))
}

fn sequence_embedding(items: &[Tensor], w: &WeightBundle, prefix: &str, enc: EncoderConfig) -> Result<Tensor> {
    let x = add_positional(&Tensor::stack(items)?);
    mean_pool(&encoder(w, prefix, enc, &x)?)
}

/// Positional codes, edge encoder, mean over positions.
pub fn embed_edge(segments: &[Tensor], w: &WeightBundle, cfg: &EmbedConfig) -> Result<Tensor> {
    if segments.is_empty() {
        return Err(Error::Empty("edge has no curve segments"));
    }
    if segments.len() > cfg.max_curve_seq {
        return Err(Error::SequenceTooLong {
            len: segments.len(),
            max: cfg.max_curve_seq,
        });
    }
    sequence_embedding(segments, w, "edge_seq", cfg.edge_seq)
}

/// Encoder input for a triangle: `(x, y, z, w)` of every control point in
/// storage order, then the unit normal at the centre.
pub fn triangle_features(tri: &BezierTriangle, cfg: &EmbedConfig, flip_normal: bool) -> Result<Vec<f64>> {
    if tri.degree() != cfg.triangle_degree() {
        return Err(Error::Geometry(format!(
            "triangle encoder takes degree {}, got {}",
            cfg.triangle_degree(),
            tri.degree()
        )));
    }
    let mut x: Vec<f64> = tri.control_points().iter().flat_map(|p| [p.x, p.y, p.z, p.w]).collect();
    let n = triangle_center_normal(tri).normal;
    let n = if flip_normal { -n } else { n };
    x.extend(n.to_array());
    Ok(x)
}

pub fn embed_bezier_triangle(tri: &BezierTriangle, w: &WeightBundle, cfg: &EmbedConfig) -> Result<Tensor> {
    let x = triangle_features(tri, cfg, false)?;
    mlp(w, "triangle", cfg.triangle_layers, &Tensor::from_f64(&x))
}

/// Positional codes, triangle encoder, mean over positions.
pub fn embed_face_geometry(tris: &[Tensor], w: &WeightBundle, cfg: &EmbedConfig) -> Result<Tensor> {
    if tris.is_empty() {
        return Err(Error::Empty("face has no triangles"));
    }
    sequence_embedding(tris, w, "tri_seq", cfg.tri_seq)
}

/// `[edge, start, end]`.
pub fn aggregate_vertex_edge(edge: &Tensor, start: &Tensor, end: &Tensor) -> Result<Tensor> {
    let d = edge.len();
    for (t, what) in [(edge, "edge"), (start, "start vertex"), (end, "end vertex")] {
        t.expect_shape(&[d], what)?;
    }
    Tensor::concat(&[edge, start, end])
}

/// Runs the loop RNN over the unfolded sequence from a zero state and
/// averages the hidden states of the `n` core positions.
pub fn aggregate_edge_loop(
    lp: &LoopRec,
    edge_embs: &HashMap<EdgeId, Tensor>,
    w: &WeightBundle,
    cfg: &EmbedConfig,
    seed: Option<u64>,
) -> Result<Tensor> {
    let seq = unfold_loop(lp, choose_break(lp, seed))?;
    let (w_he, w_hh, w_h) = (w.get("loop_rnn.w_he")?, w.get("loop_rnn.w_hh")?, w.get("loop_rnn.w_h")?);
    let n = lp.edges.len();
    let mut h = Tensor::zeros(&[cfg.loop_hidden]);
    let mut core = Vec::with_capacity(n);
    for (pos, id) in seq.iter().enumerate() {
        let x = edge_embs
            .get(id)
            .ok_or_else(|| Error::Topology(format!("loop {} uses unembedded edge {id}", lp.id)))?;
        h = rnn_step(x, &h, w_he, w_hh, w_h)?;
        if (1..=n).contains(&pos) {
            core.push(h.clone());
        }
    }
    mean_pool(&Tensor::stack(&core)?)
}

fn pools(items: &[Tensor], dim: usize) -> Result<(Tensor, Tensor)> {
    if items.is_empty() {
        return Ok((Tensor::zeros(&[dim]), Tensor::zeros(&[dim])));
    }
    let m = Tensor::stack(items)?;
    m.expect_shape(&[items.len(), dim], "pooled embeddings")?;
    Ok((mean_pool(&m)?, max_pool(&m)?))
}

/// `[face, MLP(outer, mean(inner), max(inner))]`; no inner loops gives zero
/// pools.
pub fn aggregate_loop_face(
    face: &Tensor,
    outer: &Tensor,
    inner: &[Tensor],
    w: &WeightBundle,
    cfg: &EmbedConfig,
) -> Result<Tensor> {
    let d = cfg.loop_hidden;
    outer.expect_shape(&[d], "outer loop")?;
    face.expect_shape(&[cfg.embed_dim], "face geometry")?;
    let (mean, max) = pools(inner, d)?;
    let x = Tensor::concat(&[outer, &mean, &max])?;
    let y = mlp(w, "loop_face", cfg.loop_face_widths.len(), &x)?;
    Tensor::concat(&[face, &y])
}

/// `[face, MLP(mean(neighbors), max(neighbors))]`; no neighbours gives zero
/// pools.
pub fn aggregate_face_shell(
    face: &Tensor,
    neighbors: &[Tensor],
    w: &WeightBundle,
    cfg: &EmbedConfig,
) -> Result<Tensor> {
    let d = cfg.face_loop_dim();
    face.expect_shape(&[d], "face")?;
    let (mean, max) = pools(neighbors, d)?;
    let x = Tensor::concat(&[&mean, &max])?;
    let y = mlp(w, "face_shell", cfg.face_shell_widths.len(), &x)?;
    Tensor::concat(&[face, &y])
}

/// Drops `round(ratio * n)` items by seeded sampling without replacement,
/// always leaving at least one; survivors keep their order.
pub fn apply_mask<T: Clone>(items: &[T], ratio: f64, seed: u64) -> Result<Vec<T>> {
    if !(0.0..1.0).contains(&ratio) {
        return Err(Error::Config(format!("mask ratio must lie in [0, 1), got {ratio}")));
    }
    let n = items.len();
    let drop = ((ratio * n as f64).round() as usize).min(n.saturating_sub(1));
    if drop == 0 {
        return Ok(items.to_vec());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut dropped = vec![false; n];
    for i in sample(&mut rng, n, drop) {
        dropped[i] = true;
    }
    Ok(items
        .iter()
        .zip(dropped)
        .filter(|(_, d)| !d)
        .map(|(t, _)| t.clone())
        .collect())
}

fn mix(seed: u64, salt: u64) -> u64 {
    seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15).rotate_left(17)
}

fn edge_embedding(
    edge: &EdgeRec,
    verts: &HashMap<crate::topology::VertexId, Tensor>,
    w: &WeightBundle,
    cfg: &EmbedConfig,
) -> Result<Tensor> {
    let segs = edge.curve.decompose_range(edge.t0, edge.t1)?;
    if segs.len() > cfg.max_curve_seq {
        return Err(Error::SequenceTooLong {
            len: segs.len(),
            max: cfg.max_curve_seq,
        });
    }
    let embs = segs
        .iter()
        .map(|s| {
            let d = s.bezier.degree();
            if d > 3 {
                return Err(Error::DegreeTooHigh { found: d, max: 3 });
            }
            embed_bezier_curve(&s.bezier.elevate(3)?, w, cfg)
        })
        .collect::<Result<Vec<_>>>()?;
    let e = embed_edge(&embs, w, cfg)?;
    let vertex = |id| {
        verts
            .get(&id)
            .ok_or_else(|| Error::Topology(format!("edge {} references missing vertex {id}", edge.id)))
    };
    aggregate_vertex_edge(&e, vertex(edge.start)?, vertex(edge.end)?)
}

/// Tessellated, masked and encoded geometry of one face.
pub fn face_geometry_embedding(face: &crate::topology::FaceRec, w: &WeightBundle, cfg: &EmbedConfig) -> Result<Tensor> {
    let tris = tessellate_trimmed(&face.geometry, &cfg.fit)?;
    if tris.is_empty() {
        return Err(Error::Geometry(format!("face {} tessellates to nothing", face.id)));
    }
    let seed = mix(cfg.seed, tris.len() as u64);
    let tris = apply_mask(&tris, cfg.mask_ratio, seed)?;
    let embs = tris
        .iter()
        .map(|t| {
            let x = triangle_features(t, cfg, !face.same_sense)?;
            mlp(w, "triangle", cfg.triangle_layers, &Tensor::from_f64(&x))
        })
        .collect::<Result<Vec<_>>>()?;
    embed_face_geometry(&embs, w, cfg)
}

/// Runs every stage bottom-up and returns one token per face, rows in
/// face-id order.
pub fn tokenize_model(model: &BRepModel, w: &WeightBundle, cfg: &EmbedConfig) -> Result<TokenSequence> {
    cfg.validate()?;
    w.check(cfg)?;
    let report = validate_model(model);
    if let Some(v) = report.hard().next() {
        return Err(Error::Topology(format!("invalid model: {}: {}", v.kind, v.message)));
    }
    if model.faces.is_empty() {
        return Err(Error::Empty("model has no faces"));
    }
    let normalized;
    let model = if cfg.normalize {
        normalized = model.normalized();
        &normalized
    } else {
        model
    };

    let verts: HashMap<_, _> = model
        .vertices
        .iter()
        .map(|v| Ok((v.id, embed_vertex(v.point, w, cfg)?)))
        .collect::<Result<_>>()?;
    let edges: Vec<Result<(EdgeId, Tensor)>> = model
        .edges
        .par_iter()
        .map(|e| Ok((e.id, edge_embedding(e, &verts, w, cfg)?)))
        .collect();
    let edges: HashMap<EdgeId, Tensor> = edges.into_iter().collect::<Result<_>>()?;

    let geometry: Vec<Result<Tensor>> = model
        .faces
        .par_iter()
        .map(|f| face_geometry_embedding(f, w, cfg))
        .collect();
    let geometry: Vec<Tensor> = geometry.into_iter().collect::<Result<_>>()?;

    let index = model.index();
    let loop_emb = |id| -> Result<Tensor> {
        let lp = &model.loops[index.loops[&id]];
        aggregate_edge_loop(lp, &edges, w, cfg, Some(cfg.seed))
    };
    let mut level2: BTreeMap<FaceId, Tensor> = BTreeMap::new();
    for (face, geo) in model.faces.iter().zip(&geometry) {
        let outer = loop_emb(face.outer_loop)?;
        let inner = face
            .inner_loops
            .iter()
            .map(|&id| loop_emb(id))
            .collect::<Result<Vec<_>>>()?;
        level2.insert(face.id, aggregate_loop_face(geo, &outer, &inner, w, cfg)?);
    }

    let adjacency = face_adjacency(model);
    let mut rows = Vec::with_capacity(level2.len());
    let mut face_ids = Vec::with_capacity(level2.len());
    for (id, emb) in &level2 {
        let neighbors: Vec<Tensor> = adjacency[id].iter().map(|n| level2[n].clone()).collect();
        rows.push(aggregate_face_shell(emb, &neighbors, w, cfg)?);
        face_ids.push(*id);
    }
    Ok(TokenSequence {
        face_ids,
        tokens: Tensor::stack(&rows)?,
    })
}

/// Token encoder without position information; equivariant under row
/// permutations.
pub fn encode_tokens(tokens: &TokenSequence, w: &WeightBundle, cfg: &EmbedConfig) -> Result<Tensor> {
    let t = &tokens.tokens;
    if t.shape().len() != 2 || t.shape()[0] == 0 {
        return Err(Error::Empty("no tokens to encode"));
    }
    t.expect_shape(&[t.shape()[0], cfg.token_dim()], "token matrix")?;
    encoder(w, "token_encoder", cfg.token_encoder, t)
}
