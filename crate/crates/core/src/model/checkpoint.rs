//! Binary checkpoint format, all integers and floats little-endian:
//!
//! ```text
//! magic            6 bytes  "CWSS2S"
//! version          u32      1
//! embedding_dim    u32
//! hidden_dim       u32
//! vocab_size       u32
//! max_out_factor   f64
//! seed             u64
//! vocab hash       32 bytes SHA-256 of the vocabulary file
//! param count      u32
//! per parameter, in registration order:
//!   rank           u32
//!   dims           u32 × rank
//!   values         f64 × product(dims)
//! ```

use std::fs;
use std::path::Path;

use super::{ModelConfig, Seq2Seq};
use crate::error::{CheckpointError, Error, Result};
use crate::vocab::{hex, Vocabulary};

const MAGIC: &[u8; 6] = b"CWSS2S";
const VERSION: u32 = 1;

pub fn write_checkpoint(model: &Seq2Seq, vocab_hash: &[u8; 32]) -> Vec<u8> {
    let c = model.config();
    let mut out = Vec::with_capacity(64 + model.params().num_weights() * 8);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    for dim in [c.embedding_dim, c.hidden_dim, c.vocab_size] {
        out.extend_from_slice(&(dim as u32).to_le_bytes());
    }
    out.extend_from_slice(&c.max_output_factor.to_le_bytes());
    out.extend_from_slice(&c.seed.to_le_bytes());
    out.extend_from_slice(vocab_hash);
    out.extend_from_slice(&(model.params().len() as u32).to_le_bytes());
    for p in model.params().iter() {
        let shape = p.value.shape();
        out.extend_from_slice(&(shape.len() as u32).to_le_bytes());
        for &d in shape {
            out.extend_from_slice(&(d as u32).to_le_bytes());
        }
        for v in p.value.data() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

pub fn save_checkpoint(model: &Seq2Seq, vocab: &Vocabulary, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let bytes = write_checkpoint(model, &vocab.fingerprint());
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

struct Reader<'a> {
    bytes: &'a [u8],
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], CheckpointError> {
        if self.bytes.len() < n {
            return Err(CheckpointError::Truncated);
        }
        let (head, rest) = self.bytes.split_at(n);
        self.bytes = rest;
        Ok(head)
    }

    fn u32(&mut self) -> Result<u32, CheckpointError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, CheckpointError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64, CheckpointError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

/// Parses a checkpoint, returning the model and the vocabulary hash it was
/// saved with. Nothing is returned unless the whole file parses.
pub fn read_checkpoint(bytes: &[u8]) -> Result<(Seq2Seq, [u8; 32]), CheckpointError> {
    let mut r = Reader { bytes };
    // A short file that still starts like a checkpoint is a truncation.
    if bytes.len() < MAGIC.len() && MAGIC.starts_with(bytes) {
        return Err(CheckpointError::Truncated);
    }
    if r.take(MAGIC.len())? != MAGIC {
        return Err(CheckpointError::BadMagic);
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(CheckpointError::UnsupportedVersion(version));
    }
    let config = ModelConfig {
        embedding_dim: r.u32()? as usize,
        hidden_dim: r.u32()? as usize,
        vocab_size: r.u32()? as usize,
        max_output_factor: r.f64()?,
        seed: r.u64()?,
    };
    let mut hash = [0u8; 32];
    hash.copy_from_slice(r.take(32)?);

    let mut model = Seq2Seq::zeros(config).map_err(|e| CheckpointError::Malformed(e.to_string()))?;
    let count = r.u32()? as usize;
    if count != model.params().len() {
        return Err(CheckpointError::Malformed(format!(
            "expected {} parameters, found {count}",
            model.params().len()
        )));
    }
    for p in model.params_mut().iter_mut() {
        let rank = r.u32()? as usize;
        let mut shape = Vec::with_capacity(rank.min(2));
        for _ in 0..rank {
            shape.push(r.u32()? as usize);
        }
        if shape != p.value.shape() {
            return Err(CheckpointError::Malformed(format!(
                "parameter {} has shape {shape:?}, expected {:?}",
                p.name,
                p.value.shape()
            )));
        }
        for w in p.value.data_mut() {
            *w = r.f64()?;
        }
    }
    if !r.bytes.is_empty() {
        return Err(CheckpointError::Malformed(format!(
            "{} unexpected trailing bytes",
            r.bytes.len()
        )));
    }
    Ok((model, hash))
}

/// Loads a checkpoint and checks that it was trained with `vocab`.
pub fn load_checkpoint(path: impl AsRef<Path>, vocab: &Vocabulary) -> Result<Seq2Seq> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let (model, hash) = read_checkpoint(&bytes)?;
    let expected = vocab.fingerprint();
    if hash != expected {
        return Err(CheckpointError::VocabMismatch {
            expected: hex(&expected),
            found: hex(&hash),
        }
        .into());
    }
    Ok(model)
}
