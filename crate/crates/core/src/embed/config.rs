//! Embedder architecture and run-time options.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::spline::tri_count;
use crate::trim::FitConfig;

/// Shape of a stack of post-norm attention layers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncoderConfig {
    pub layers: usize,
    pub heads: usize,
    pub hidden: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbedConfig {
    pub embed_dim: usize,
    pub vertex_layers: usize,
    pub curve_layers: usize,
    pub triangle_layers: usize,
    pub edge_seq: EncoderConfig,
    pub tri_seq: EncoderConfig,
    pub loop_hidden: usize,
    pub loop_face_widths: Vec<usize>,
    pub face_shell_widths: Vec<usize>,
    pub token_encoder: EncoderConfig,
    pub mask_ratio: f64,
    pub max_curve_seq: usize,
    pub seed: u64,
    /// Move each model into the unit cube centred at the origin first.
    pub normalize: bool,
    pub fit: FitConfig,
}

impl Default for EmbedConfig {
    fn default() -> Self {
        Self {
            embed_dim: 64,
            vertex_layers: 2,
            curve_layers: 6,
            triangle_layers: 6,
            edge_seq: EncoderConfig {
                layers: 2,
                heads: 4,
                hidden: 512,
            },
            tri_seq: EncoderConfig {
                layers: 2,
                heads: 8,
                hidden: 512,
            },
            loop_hidden: 64,
            loop_face_widths: vec![256, 64],
            face_shell_widths: vec![512, 64],
            token_encoder: EncoderConfig {
                layers: 2,
                heads: 8,
                hidden: 512,
            },
            mask_ratio: 0.0,
            max_curve_seq: 100,
            seed: 0,
            normalize: true,
            fit: FitConfig::default(),
        }
    }
}

impl EmbedConfig {
    /// Curve encoder input: four control points and the mid tangent.
    pub const CURVE_INPUT: usize = 15;

    pub fn triangle_degree(&self) -> usize {
        2 * self.fit.working_degree
    }

    /// Control data of every triangle point plus the centre normal.
    pub fn triangle_input(&self) -> usize {
        4 * tri_count(self.triangle_degree()) + 3
    }

    /// Edge-level width after concatenating the vertex embeddings.
    pub fn edge_token_dim(&self) -> usize {
        3 * self.embed_dim
    }

    fn last_width(widths: &[usize]) -> usize {
        widths.last().copied().unwrap_or(0)
    }

    /// Width after the loop-to-face stage.
    pub fn face_loop_dim(&self) -> usize {
        self.embed_dim + Self::last_width(&self.loop_face_widths)
    }

    /// Final token width.
    pub fn token_dim(&self) -> usize {
        self.face_loop_dim() + Self::last_width(&self.face_shell_widths)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("embed_dim", self.embed_dim),
            ("vertex_layers", self.vertex_layers),
            ("curve_layers", self.curve_layers),
            ("triangle_layers", self.triangle_layers),
            ("loop_hidden", self.loop_hidden),
            ("max_curve_seq", self.max_curve_seq),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(Error::Config(format!("{name} must be positive")));
            }
        }
        for (name, w) in [
            ("loop_face_widths", &self.loop_face_widths),
            ("face_shell_widths", &self.face_shell_widths),
        ] {
            if w.is_empty() || w.contains(&0) {
                return Err(Error::Config(format!("{name} must be non-empty and positive")));
            }
        }
        for (name, e, d) in [
            ("edge_seq", self.edge_seq, self.embed_dim),
            ("tri_seq", self.tri_seq, self.embed_dim),
            ("token_encoder", self.token_encoder, self.token_dim()),
        ] {
            if e.heads == 0 || e.hidden == 0 || d % e.heads != 0 {
                return Err(Error::Config(format!(
                    "{name}: {} heads must divide width {d} and hidden must be positive",
                    e.heads
                )));
            }
        }
        if !(0.0..1.0).contains(&self.mask_ratio) {
            return Err(Error::Config(format!(
                "mask_ratio must lie in [0, 1), got {}",
                self.mask_ratio
            )));
        }
        self.fit.validate()
    }

    /// Every parameter name with its shape, in a fixed order.
    pub fn parameter_shapes(&self) -> Vec<(String, Vec<usize>)> {
        let d = self.embed_dim;
        let mut out = Vec::new();
        let mut mlp = |prefix: &str, input: usize, widths: &[usize]| {
            let mut fan_in = input;
            for (i, &w) in widths.iter().enumerate() {
                out.push((format!("{prefix}.{i}.weight"), vec![w, fan_in]));
                out.push((format!("{prefix}.{i}.bias"), vec![w]));
                fan_in = w;
            }
        };
        mlp("vertex", 3, &vec![d; self.vertex_layers]);
        mlp("curve", Self::CURVE_INPUT, &vec![d; self.curve_layers]);
        mlp("triangle", self.triangle_input(), &vec![d; self.triangle_layers]);
        mlp("loop_face", 3 * d, &self.loop_face_widths);
        mlp("face_shell", 2 * self.face_loop_dim(), &self.face_shell_widths);
        let h = self.loop_hidden;
        out.push(("loop_rnn.w_he".into(), vec![h, self.edge_token_dim()]));
        out.push(("loop_rnn.w_hh".into(), vec![h, h]));
        out.push(("loop_rnn.w_h".into(), vec![h, h]));
        for (prefix, enc, width) in [
            ("edge_seq", self.edge_seq, d),
            ("tri_seq", self.tri_seq, d),
            ("token_encoder", self.token_encoder, self.token_dim()),
        ] {
            for l in 0..enc.layers {
                let p = format!("{prefix}.{l}");
                for m in ["q", "k", "v", "out"] {
                    out.push((format!("{p}.{m}.weight"), vec![width, width]));
                    out.push((format!("{p}.{m}.bias"), vec![width]));
                }
                out.push((format!("{p}.ff1.weight"), vec![enc.hidden, width]));
                out.push((format!("{p}.ff1.bias"), vec![enc.hidden]));
                out.push((format!("{p}.ff2.weight"), vec![width, enc.hidden]));
                out.push((format!("{p}.ff2.bias"), vec![width]));
                for nrm in ["norm1", "norm2"] {
                    out.push((format!("{p}.{nrm}.gamma"), vec![width]));
                    out.push((format!("{p}.{nrm}.beta"), vec![width]));
                }
            }
        }
        out
    }

    /// SHA-256 over the parameter manifest; identifies the architecture.
    pub fn config_hash(&self) -> String {
        let mut hasher = Sha256::new();
        for (name, shape) in self.parameter_shapes() {
            hasher.update(name.as_bytes());
            for s in shape {
                hasher.update((s as u64).to_le_bytes());
            }
            hasher.update([0u8]);
        }
        hasher.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}
