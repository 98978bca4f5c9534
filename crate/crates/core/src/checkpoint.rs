//! Binary model container shared by both families.
//!
//! Layout (little-endian):
//!
//! ```text
//! magic "RELCLSCK" | u32 version
//! u64 n | n bytes of `key = value` model settings
//! u64 count | count × (u32 len, token bytes)           vocabulary
//! u64 count | count × (u32 len, name, u32 ndim, u64 dims…, f64 data…)
//! 32 bytes  SHA-256 of everything above
//! ```

use std::fs;
use std::io::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::config::{model_from_kv, model_to_kv, KvMap};
use crate::corpus::Vocabulary;
use crate::error::{Error, Result};
use crate::model::Model;
use crate::numerics::Parameters;

const MAGIC: &[u8; 8] = b"RELCLSCK";
const VERSION: u32 = 1;

/// Writes `bytes` to a sibling temp file, syncs it and renames it over
/// `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| Error::Invalid(format!("{} is not a file path", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    let write = || -> std::io::Result<()> {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    };
    write().map_err(|e| {
        let _ = fs::remove_file(&tmp);
        Error::io(path, e)
    })
}

fn put_u32(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn put_u64(out: &mut Vec<u8>, v: u64) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn put_str(out: &mut Vec<u8>, s: &str) {
    put_u32(out, s.len() as u32);
    out.extend_from_slice(s.as_bytes());
}

pub fn encode(model: &Model) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    put_u32(&mut out, VERSION);
    let settings = model_to_kv(&model.config()).format();
    put_u64(&mut out, settings.len() as u64);
    out.extend_from_slice(settings.as_bytes());
    let tokens = model.vocab().tokens();
    put_u64(&mut out, tokens.len() as u64);
    for t in tokens {
        put_str(&mut out, t);
    }
    let tensors = model.named_tensors();
    put_u64(&mut out, tensors.len() as u64);
    for (name, t) in tensors {
        put_str(&mut out, &name);
        put_u32(&mut out, t.shape().len() as u32);
        for &d in t.shape() {
            put_u64(&mut out, d as u64);
        }
        for v in t.data() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    let digest = Sha256::digest(&out);
    out.extend_from_slice(&digest);
    out
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| Error::Checkpoint("truncated checkpoint".into()))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn len(&mut self) -> Result<usize> {
        usize::try_from(self.u64()?).map_err(|_| Error::Checkpoint("length overflow".into()))
    }

    fn string(&mut self) -> Result<String> {
        let n = self.u32()? as usize;
        String::from_utf8(self.take(n)?.to_vec())
            .map_err(|_| Error::Checkpoint("invalid UTF-8 in checkpoint".into()))
    }
}

pub fn decode(bytes: &[u8]) -> Result<Model> {
    if bytes.len() < MAGIC.len() + 4 + 32 || &bytes[..MAGIC.len()] != MAGIC {
        return Err(Error::Checkpoint("not a checkpoint file".into()));
    }
    let (body, digest) = bytes.split_at(bytes.len() - 32);
    if Sha256::digest(body).as_slice() != digest {
        return Err(Error::Checkpoint("checksum mismatch; file is corrupted".into()));
    }
    let mut r = Reader {
        buf: body,
        pos: MAGIC.len(),
    };
    let version = r.u32()?;
    if version != VERSION {
        return Err(Error::Checkpoint(format!("unsupported checkpoint version {version}")));
    }
    let n = r.len()?;
    let settings = std::str::from_utf8(r.take(n)?)
        .map_err(|_| Error::Checkpoint("invalid UTF-8 in settings".into()))?;
    let config = model_from_kv(&KvMap::parse(settings)?)?;
    let count = r.len()?;
    let mut tokens = Vec::with_capacity(count.min(1 << 24));
    for _ in 0..count {
        tokens.push(r.string()?);
    }
    let vocab = Vocabulary::from_tokens(tokens)?;
    let mut model = Model::new(&config, vocab, None, 0)?;

    let count = r.len()?;
    {
        let mut params = model.params_mut();
        if count != params.len() {
            return Err(Error::Checkpoint(format!(
                "{count} tensors stored, model has {}",
                params.len()
            )));
        }
        for (name, _, t) in params.iter_mut() {
            let stored = r.string()?;
            if stored != *name {
                return Err(Error::Checkpoint(format!("expected tensor `{name}`, found `{stored}`")));
            }
            let ndim = r.u32()? as usize;
            let mut shape = Vec::with_capacity(ndim);
            for _ in 0..ndim {
                shape.push(r.len()?);
            }
            if shape != t.shape() {
                return Err(Error::Checkpoint(format!(
                    "tensor `{name}` has shape {shape:?}, config implies {:?}",
                    t.shape()
                )));
            }
            for v in t.data_mut() {
                *v = f64::from_le_bytes(r.take(8)?.try_into().expect("8 bytes"));
            }
        }
    }
    if r.pos != body.len() {
        return Err(Error::Checkpoint("trailing bytes after tensors".into()));
    }
    model.mark_updated();
    Ok(model)
}

pub fn save(model: &Model, path: &Path) -> Result<()> {
    write_atomic(path, &encode(model))
}

pub fn load(path: &Path) -> Result<Model> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes)
}
