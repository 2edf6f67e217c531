//! Forward-only embedding network producing one token per face.

mod config;
mod network;
mod tensor;
mod weights;

pub use config::{EmbedConfig, EncoderConfig};
pub use network::{
    aggregate_edge_loop, aggregate_face_shell, aggregate_loop_face, aggregate_vertex_edge, apply_mask, curve_features,
    embed_bezier_curve, embed_bezier_triangle, embed_edge, embed_face_geometry, embed_vertex, encode_tokens,
    face_geometry_embedding, tokenize_model, triangle_features, TokenSequence,
};
pub use tensor::{
    add_positional, attention_layer, cosine_positional, dense_forward, layer_norm, max_pool, mean_pool, relu, rnn_step,
    AttentionParams, Tensor, LAYER_NORM_EPS,
};
pub use weights::WeightBundle;
