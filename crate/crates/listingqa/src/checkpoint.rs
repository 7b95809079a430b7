//! Binary model checkpoint.
//!
//! Layout, all integers little-endian:
//! `"MQAR"`, `u32` version, `u32` JSON length, JSON `{"model": .., "vocab": ..}`,
//! `u32` tensor count, then per tensor `u16` name length, name, `u8` rank,
//! `u32` per dimension, and the `f64` values in row-major order.

use std::fs;
use std::path::Path;

use listingqa_core::nncore::ParamSet;
use listingqa_core::ranker::{Model, ModelConfig, ModelParams};
use listingqa_core::textproc::NGramVocab;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"MQAR";
pub const VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Header {
    model: ModelConfig,
    vocab: NGramVocab,
}

#[derive(Serialize)]
struct HeaderRef<'a> {
    model: &'a ModelConfig,
    vocab: &'a NGramVocab,
}

pub fn encode(model: &Model) -> Result<Vec<u8>> {
    let json = serde_json::to_vec(&HeaderRef { model: &model.config, vocab: &model.vocab })
        .map_err(|e| Error::Format(format!("cannot encode header: {e}")))?;
    let params = model.params.params();
    let mut out = Vec::with_capacity(16 + json.len() + model.params.num_values() * 8);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&u32::try_from(json.len()).map_err(|_| Error::Format("header too large".into()))?.to_le_bytes());
    out.extend_from_slice(&json);
    out.extend_from_slice(&(params.len() as u32).to_le_bytes());
    for p in &params {
        let name = p.name.as_bytes();
        let len = u16::try_from(name.len()).map_err(|_| Error::Format(format!("tensor name too long: {}", p.name)))?;
        out.extend_from_slice(&len.to_le_bytes());
        out.extend_from_slice(name);
        out.push(p.shape.len() as u8);
        for &d in &p.shape {
            let d = u32::try_from(d).map_err(|_| Error::Format(format!("dimension too large in {}", p.name)))?;
            out.extend_from_slice(&d.to_le_bytes());
        }
        for v in p.data {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    Ok(out)
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        if self.bytes.len() - self.pos < n {
            return Err(Error::Format(format!("file ends inside {what} at byte {}", self.pos)));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u8(&mut self, what: &str) -> Result<u8> {
        Ok(self.take(1, what)?[0])
    }

    fn u16(&mut self, what: &str) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2, what)?.try_into().expect("2 bytes")))
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().expect("4 bytes")))
    }
}

pub fn decode(bytes: &[u8]) -> Result<Model> {
    let mut r = Reader { bytes, pos: 0 };
    let magic = r.take(4, "magic")?;
    if magic != MAGIC {
        return Err(Error::Format(format!("bad magic {magic:?}, expected {MAGIC:?}")));
    }
    let version = r.u32("version")?;
    if version != VERSION {
        return Err(Error::UnsupportedVersion { found: version, supported: VERSION });
    }
    let json_len = r.u32("header length")? as usize;
    let header: Header = serde_json::from_slice(r.take(json_len, "header")?)
        .map_err(|e| Error::Format(format!("bad header: {e}")))?;
    header.model.validate().map_err(|e| Error::Shape(e.to_string()))?;
    let mut params = ModelParams::zeros(&header.model, header.vocab.len()).map_err(|e| Error::Shape(e.to_string()))?;

    let count = r.u32("tensor count")? as usize;
    let mut views = params.params_mut();
    if count != views.len() {
        return Err(Error::Shape(format!(
            "{count} tensors stored, configuration needs {}",
            views.len()
        )));
    }
    for view in views.iter_mut() {
        let name_len = r.u16("tensor name length")? as usize;
        let name = std::str::from_utf8(r.take(name_len, "tensor name")?)
            .map_err(|_| Error::Format("tensor name is not UTF-8".into()))?;
        let rank = r.u8("tensor rank")? as usize;
        let mut shape = Vec::with_capacity(rank);
        for _ in 0..rank {
            shape.push(r.u32("tensor dimension")? as usize);
        }
        if name != view.name || shape != view.shape {
            return Err(Error::Shape(format!(
                "stored tensor {name} {shape:?} where configuration expects {} {:?}",
                view.name, view.shape
            )));
        }
        let raw = r.take(view.data.len() * 8, "tensor data")?;
        for (dst, chunk) in view.data.iter_mut().zip(raw.chunks_exact(8)) {
            *dst = f64::from_le_bytes(chunk.try_into().expect("8 bytes"));
        }
    }
    drop(views);
    if r.pos != bytes.len() {
        return Err(Error::Format(format!("{} trailing bytes", bytes.len() - r.pos)));
    }
    Ok(Model::from_parts(header.model, header.vocab, params)?)
}

pub fn save(path: &Path, model: &Model) -> Result<()> {
    fs::write(path, encode(model)?).map_err(|e| Error::io(path, e))
}

pub fn load(path: &Path) -> Result<Model> {
    decode(&fs::read(path).map_err(|e| Error::io(path, e))?)
}
