//! B-rep face tokenization: exact NURBS to Bézier decomposition, trimmed
//! surface tessellation into Bézier triangles, topology queries, a
//! forward-only embedding network and the interchange formats.
//!
//! ```
//! use breptok::embed::{EmbedConfig, WeightBundle, tokenize_model};
//! use breptok::fixtures::cube;
//!
//! let cfg = EmbedConfig::default();
//! let weights = WeightBundle::init(&cfg, 7);
//! let tokens = tokenize_model(&cube(1.0), &weights, &cfg).unwrap();
//! assert_eq!(tokens.tokens.shape(), &[6, 192]);
//! ```

pub mod embed;
pub mod error;
pub mod fixtures;
pub mod geom;
pub mod io;
pub mod spline;
pub mod topology;
pub mod trim;

pub use embed::{encode_tokens, tokenize_model, EmbedConfig, TokenSequence, WeightBundle};
pub use error::{Error, Result};
pub use io::{load_model, load_tokens, load_weights, save_model, save_tokens, save_weights};
pub use topology::{validate_model, BRepModel};
pub use trim::{tessellate_trimmed, FitConfig, TrimmedSurface};
