//! Versioned binary model file.
//!
//! All integers and floats are little-endian; floats are IEEE-754 `f64`, so a
//! save/load cycle reproduces every parameter bit for bit. Layout (offsets in
//! bytes):
//!
//! ```text
//!   0  [u8; 8]   magic "OCDGRRBM"
//!   8  u32       format version (1)
//!  12  u64       n_v
//!  20  u64       n_h
//!  28  u64 × 6   gibbs_steps, cd_steps, epochs, batch_size, replay_size,
//!                momentum_warmup_epochs
//!  76  f64 × 5   learning_rate, momentum, weight_decay, init_std, warmup_momentum
//! 116  u8        warmup_scope (0 = per procedure, 1 = global)
//! 117  u8        decay_biases (0/1)
//! 118  [u8; 6]   zero padding
//! 124  f64 × n_h·n_v   W, row-major (row j = hidden unit j)
//!      f64 × n_v       a (visible bias)
//!      f64 × n_h       b (hidden bias)
//!      u8             1 if an observed-count suffix is present, else 0
//!      u64            observed count (0 when absent)
//!      u32            metadata length L
//!      [u8; L]        UTF-8 metadata (resolved experiment config as JSON, or empty)
//! ```

use std::fs;
use std::path::Path;

use ndarray::{Array1, Array2};

use super::{Hyperparameters, RbmParameters, WarmupScope};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"OCDGRRBM";
pub const VERSION: u32 = 1;
const HEADER_LEN: usize = 124;

/// A model together with the meta-parameters that trained it.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelFile {
    pub params: RbmParameters,
    pub hyper: Hyperparameters,
    /// Set for training checkpoints: observations seen when the snapshot was taken.
    pub observed_count: Option<u64>,
    pub metadata: String,
}

impl ModelFile {
    pub fn new(params: RbmParameters, hyper: Hyperparameters) -> Self {
        Self {
            params,
            hyper,
            observed_count: None,
            metadata: String::new(),
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let p = &self.params;
        let h = &self.hyper;
        let mut out = Vec::with_capacity(HEADER_LEN + 8 * p.scalar_count() + 13 + self.metadata.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        for n in [p.n_visible(), p.n_hidden()] {
            out.extend_from_slice(&(n as u64).to_le_bytes());
        }
        for n in [
            h.gibbs_steps,
            h.cd_steps,
            h.epochs,
            h.batch_size,
            h.replay_size,
            h.momentum_warmup_epochs,
        ] {
            out.extend_from_slice(&(n as u64).to_le_bytes());
        }
        for x in [h.learning_rate, h.momentum, h.weight_decay, h.init_std, h.warmup_momentum] {
            out.extend_from_slice(&x.to_le_bytes());
        }
        out.push(match h.warmup_scope {
            WarmupScope::PerProcedure => 0,
            WarmupScope::Global => 1,
        });
        out.push(u8::from(h.decay_biases));
        out.extend_from_slice(&[0; 6]);
        debug_assert_eq!(out.len(), HEADER_LEN);
        for x in p.weights().iter().chain(p.visible_bias()).chain(p.hidden_bias()) {
            out.extend_from_slice(&x.to_le_bytes());
        }
        out.push(u8::from(self.observed_count.is_some()));
        out.extend_from_slice(&self.observed_count.unwrap_or(0).to_le_bytes());
        out.extend_from_slice(&(self.metadata.len() as u32).to_le_bytes());
        out.extend_from_slice(self.metadata.as_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8], path: &Path) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0, path };
        if r.take(8)? != MAGIC {
            return Err(r.error(0, "bad magic, not a model file"));
        }
        let version = r.u32()?;
        if version != VERSION {
            return Err(r.error(8, &format!("unsupported model format version {version}")));
        }
        let n_visible = r.usize()?;
        let n_hidden = r.usize()?;
        if n_visible == 0 || n_hidden == 0 {
            return Err(r.error(12, "layer sizes must be positive"));
        }
        let hyper = Hyperparameters {
            n_visible,
            n_hidden,
            gibbs_steps: r.usize()?,
            cd_steps: r.usize()?,
            epochs: r.usize()?,
            batch_size: r.usize()?,
            replay_size: r.usize()?,
            momentum_warmup_epochs: r.usize()?,
            learning_rate: r.f64()?,
            momentum: r.f64()?,
            weight_decay: r.f64()?,
            init_std: r.f64()?,
            warmup_momentum: r.f64()?,
            warmup_scope: match r.take(1)?[0] {
                0 => WarmupScope::PerProcedure,
                1 => WarmupScope::Global,
                other => return Err(r.error(116, &format!("unknown warmup scope {other}"))),
            },
            decay_biases: r.take(1)?[0] != 0,
        };
        r.take(6)?;
        let n_weights = n_hidden
            .checked_mul(n_visible)
            .ok_or_else(|| r.error(12, "layer sizes overflow"))?;
        let weights = Array2::from_shape_vec((n_hidden, n_visible), r.f64s(n_weights)?)
            .expect("length matches shape");
        let visible_bias = Array1::from(r.f64s(n_visible)?);
        let hidden_bias = Array1::from(r.f64s(n_hidden)?);
        let has_count = r.take(1)?[0] != 0;
        let count = r.u64()?;
        let meta_len = r.u32()? as usize;
        let meta_at = r.pos as u64;
        let metadata = String::from_utf8(r.take(meta_len)?.to_vec())
            .map_err(|_| r.error(meta_at, "metadata is not UTF-8"))?;
        if r.pos != bytes.len() {
            return Err(r.error(r.pos as u64, "trailing bytes after model"));
        }
        let params = RbmParameters::new(weights, visible_bias, hidden_bias)?;
        Ok(Self {
            params,
            hyper,
            observed_count: has_count.then_some(count),
            metadata,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes, path)
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
    path: &'a Path,
}

impl<'a> Reader<'a> {
    fn error(&self, offset: u64, message: &str) -> Error {
        Error::Format {
            path: self.path.to_path_buf(),
            offset: Some(offset),
            line: None,
            message: message.to_string(),
        }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        match end {
            Some(end) => {
                let slice = &self.bytes[self.pos..end];
                self.pos = end;
                Ok(slice)
            }
            None => Err(self.error(
                self.pos as u64,
                &format!(
                    "truncated: need bytes {}..{}, file has {}",
                    self.pos,
                    self.pos.saturating_add(n),
                    self.bytes.len()
                ),
            )),
        }
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn usize(&mut self) -> Result<usize> {
        let at = self.pos as u64;
        usize::try_from(self.u64()?).map_err(|_| self.error(at, "count does not fit in usize"))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        let len = n.checked_mul(8).ok_or_else(|| self.error(self.pos as u64, "length overflow"))?;
        Ok(self
            .take(len)?
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }
}
