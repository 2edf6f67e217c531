//! Little-endian binary token and weight files.
//!
//! Token file:
//!
//! ```text
//! "BRTK" | version u32 | F u32 | D u32 | F x face id u32 | F*D x f32
//! ```
//!
//! Weight file:
//!
//! ```text
//! "BRTW" | version u32 | manifest length u32 | manifest JSON | f32 blob
//! ```
//!
//! Manifest offsets are byte offsets into the blob.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::embed::{EmbedConfig, Tensor, TokenSequence, WeightBundle};
use crate::error::{Error, Result};
use crate::topology::FaceId;

pub const TOKEN_MAGIC: &[u8; 4] = b"BRTK";
pub const WEIGHT_MAGIC: &[u8; 4] = b"BRTW";
pub const FORMAT_VERSION: u32 = 1;
pub const TOKEN_HEADER_LEN: usize = 16;

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
    what: &'static str,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| {
                Error::Format(format!(
                    "{} truncated: need {n} bytes at offset {}, have {}",
                    self.what,
                    self.pos,
                    self.bytes.len() - self.pos
                ))
            })?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn f32s(&mut self, n: usize) -> Result<Vec<f32>> {
        let bytes = self.take(n.checked_mul(4).ok_or_else(|| Error::Format("size overflow".into()))?)?;
        Ok(bytes
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")))
            .collect())
    }

    fn header(&mut self, magic: &[u8; 4]) -> Result<()> {
        let m = self.take(4)?;
        if m != magic {
            return Err(Error::Format(format!(
                "{}: bad magic {:?}, expected {:?}",
                self.what,
                String::from_utf8_lossy(m),
                String::from_utf8_lossy(magic)
            )));
        }
        let v = self.u32()?;
        if v != FORMAT_VERSION {
            return Err(Error::Format(format!(
                "{}: unsupported version {v}, expected {FORMAT_VERSION}",
                self.what
            )));
        }
        Ok(())
    }

    fn finish(&self) -> Result<()> {
        if self.pos != self.bytes.len() {
            return Err(Error::Format(format!(
                "{}: {} trailing bytes",
                self.what,
                self.bytes.len() - self.pos
            )));
        }
        Ok(())
    }
}

fn push_f32s(out: &mut Vec<u8>, data: &[f32]) {
    for v in data {
        out.extend_from_slice(&v.to_le_bytes());
    }
}

pub fn save_tokens(tokens: &TokenSequence) -> Result<Vec<u8>> {
    let f = tokens.face_ids.len();
    let t = &tokens.tokens;
    let d = t.len().checked_div(f).unwrap_or_else(|| t.cols());
    if t.len() != f * d || (f > 0 && t.shape() != [f, d]) {
        return Err(Error::shape(&[f, d], t.shape(), "token matrix vs face table"));
    }
    let mut out = Vec::with_capacity(TOKEN_HEADER_LEN + 4 * f + 4 * f * d);
    out.extend_from_slice(TOKEN_MAGIC);
    for v in [FORMAT_VERSION, f as u32, d as u32] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for id in &tokens.face_ids {
        out.extend_from_slice(&id.0.to_le_bytes());
    }
    push_f32s(&mut out, t.data());
    Ok(out)
}

pub fn load_tokens(bytes: &[u8]) -> Result<TokenSequence> {
    let mut r = Reader {
        bytes,
        pos: 0,
        what: "token file",
    };
    r.header(TOKEN_MAGIC)?;
    let f = r.u32()? as usize;
    let d = r.u32()? as usize;
    let face_ids = (0..f).map(|_| r.u32().map(FaceId)).collect::<Result<Vec<_>>>()?;
    let data = r.f32s(f.checked_mul(d).ok_or_else(|| Error::Format("size overflow".into()))?)?;
    r.finish()?;
    Ok(TokenSequence {
        face_ids,
        tokens: Tensor::new(vec![f, d], data)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamEntry {
    pub name: String,
    pub shape: Vec<usize>,
    /// Byte offset into the blob.
    pub offset: usize,
    /// Element count.
    pub len: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightManifest {
    pub config_hash: String,
    pub seed: u64,
    pub params: Vec<ParamEntry>,
}

pub fn save_weights(w: &WeightBundle) -> Result<Vec<u8>> {
    let mut params = Vec::with_capacity(w.params.len());
    let mut blob = Vec::new();
    for (name, t) in &w.params {
        params.push(ParamEntry {
            name: name.clone(),
            shape: t.shape().to_vec(),
            offset: blob.len(),
            len: t.len(),
        });
        push_f32s(&mut blob, t.data());
    }
    let manifest = WeightManifest {
        config_hash: w.config_hash.clone(),
        seed: w.seed,
        params,
    };
    let json = serde_json::to_vec(&manifest).map_err(|e| Error::Format(e.to_string()))?;
    let mut out = Vec::with_capacity(12 + json.len() + blob.len());
    out.extend_from_slice(WEIGHT_MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(json.len() as u32).to_le_bytes());
    out.extend_from_slice(&json);
    out.extend_from_slice(&blob);
    Ok(out)
}

/// Decodes a weight file without checking it against a configuration.
pub fn read_weights(bytes: &[u8]) -> Result<WeightBundle> {
    let mut r = Reader {
        bytes,
        pos: 0,
        what: "weight file",
    };
    r.header(WEIGHT_MAGIC)?;
    let mlen = r.u32()? as usize;
    let manifest: WeightManifest =
        serde_json::from_slice(r.take(mlen)?).map_err(|e| Error::Format(format!("weight manifest: {e}")))?;
    let blob = &bytes[r.pos..];
    let mut spans: Vec<(usize, usize, &str)> = Vec::new();
    let mut params = BTreeMap::new();
    for p in &manifest.params {
        let n: usize = p.shape.iter().product();
        if n != p.len {
            return Err(Error::Format(format!(
                "parameter {}: shape {:?} has {n} elements but len is {}",
                p.name, p.shape, p.len
            )));
        }
        let end = p.offset + 4 * p.len;
        if p.offset % 4 != 0 || end > blob.len() {
            return Err(Error::Format(format!(
                "parameter {}: bytes {}..{end} outside blob of {} bytes",
                p.name,
                p.offset,
                blob.len()
            )));
        }
        spans.push((p.offset, end, &p.name));
        let data = blob[p.offset..end]
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")))
            .collect();
        if params
            .insert(p.name.clone(), Tensor::new(p.shape.clone(), data)?)
            .is_some()
        {
            return Err(Error::Format(format!("parameter {} listed twice", p.name)));
        }
    }
    spans.sort_unstable();
    for pair in spans.windows(2) {
        if pair[1].0 < pair[0].1 {
            return Err(Error::Format(format!(
                "parameters {} and {} overlap",
                pair[0].2, pair[1].2
            )));
        }
    }
    let used: usize = spans.iter().map(|(a, b, _)| b - a).sum();
    if used != blob.len() {
        return Err(Error::Format(format!(
            "blob holds {} bytes but parameters cover {used}",
            blob.len()
        )));
    }
    Ok(WeightBundle {
        params,
        config_hash: manifest.config_hash,
        seed: manifest.seed,
    })
}

/// Decodes and checks every parameter shape against `cfg`. A config-hash
/// mismatch is reported as a warning only.
pub fn load_weights(bytes: &[u8], cfg: &EmbedConfig) -> Result<(WeightBundle, Vec<String>)> {
    let w = read_weights(bytes)?;
    w.check(cfg)?;
    let mut warnings = Vec::new();
    let expected = cfg.config_hash();
    if w.config_hash != expected {
        let msg = format!("weight file config hash {} differs from {expected}", w.config_hash);
        log::warn!("{msg}");
        warnings.push(msg);
    }
    Ok((w, warnings))
}
