//! File formats: the JSON model schema, token files and weight files.

mod binary;
mod brep_json;

pub use binary::{
    load_tokens, load_weights, read_weights, save_tokens, save_weights, ParamEntry, WeightManifest, FORMAT_VERSION,
    TOKEN_HEADER_LEN, TOKEN_MAGIC, WEIGHT_MAGIC,
};
pub use brep_json::{
    from_json, load_model, parse_brep_json, save_model, to_json, BrepJson, CurveJson, EdgeJson, FaceJson, LoopJson,
    PCurveJson, ShellJson, SurfaceJson, VertexJson, SCHEMA_VERSION,
};
