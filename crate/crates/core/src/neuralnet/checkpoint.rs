//! `.rism` checkpoints.
//!
//! ```text
//! "RISM"                       4 bytes magic
//! version                      u16 (currently 1)
//! window_len, conv1_filters, conv1_kernel,
//! conv2_filters, conv2_kernel, hidden, classes   7 × u32
//! parameter count              u64
//! parameters                   f64 each, layer order conv1 w/b, conv2 w/b, dense w/b, out w/b
//! ```
//! All little-endian.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::model::{Architecture, CnnModel, NUM_CLASSES};

pub const MODEL_MAGIC: [u8; 4] = *b"RISM";
pub const MODEL_VERSION: u16 = 1;
const HEADER_LEN: usize = 4 + 2 + 7 * 4 + 8;

pub fn model_to_bytes<T: Scalar>(model: &CnnModel<T>) -> Vec<u8> {
    let a = model.architecture();
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * model.param_count());
    out.extend_from_slice(&MODEL_MAGIC);
    out.extend_from_slice(&MODEL_VERSION.to_le_bytes());
    for dim in [
        a.window_len,
        a.conv1_filters,
        a.conv1_kernel,
        a.conv2_filters,
        a.conv2_kernel,
        a.hidden,
        NUM_CLASSES,
    ] {
        out.extend_from_slice(&(dim as u32).to_le_bytes());
    }
    out.extend_from_slice(&(model.param_count() as u64).to_le_bytes());
    for p in model.params() {
        out.extend_from_slice(&p.as_f64().to_le_bytes());
    }
    out
}

pub fn model_from_bytes<T: Scalar>(buf: &[u8]) -> Result<CnnModel<T>> {
    let truncated = |needed: usize| Error::Truncated {
        needed,
        available: buf.len(),
    };
    if buf.len() < 4 {
        return Err(truncated(4));
    }
    let magic: [u8; 4] = buf[..4].try_into().unwrap();
    if magic != MODEL_MAGIC {
        return Err(Error::BadMagic {
            expected: MODEL_MAGIC,
            found: magic,
        });
    }
    if buf.len() < HEADER_LEN {
        return Err(truncated(HEADER_LEN));
    }
    let version = u16::from_le_bytes([buf[4], buf[5]]);
    if version != MODEL_VERSION {
        return Err(Error::VersionMismatch {
            expected: MODEL_VERSION,
            found: version,
        });
    }
    let dims: Vec<usize> = buf[6..34]
        .chunks_exact(4)
        .map(|c| u32::from_le_bytes(c.try_into().unwrap()) as usize)
        .collect();
    if dims[6] != NUM_CLASSES {
        return Err(Error::ShapeMismatch(format!(
            "checkpoint has {} output classes, expected {NUM_CLASSES}",
            dims[6]
        )));
    }
    let arch = Architecture {
        window_len: dims[0],
        conv1_filters: dims[1],
        conv1_kernel: dims[2],
        conv2_filters: dims[3],
        conv2_kernel: dims[4],
        hidden: dims[5],
    };
    arch.validate()?;
    let count = u64::from_le_bytes(buf[34..42].try_into().unwrap());
    if count != arch.param_count() as u64 {
        return Err(Error::ShapeMismatch(format!(
            "header declares {count} parameters, layer shapes imply {}",
            arch.param_count()
        )));
    }
    let payload = &buf[HEADER_LEN..];
    let expected = 8 * arch.param_count();
    if payload.len() < expected {
        return Err(truncated(HEADER_LEN + expected));
    }
    if payload.len() > expected {
        return Err(Error::TrailingBytes(payload.len() - expected));
    }
    let params = payload
        .chunks_exact(8)
        .map(|c| T::of(f64::from_le_bytes(c.try_into().unwrap())))
        .collect();
    CnnModel::from_params(arch, params)
}

pub fn save_model<T: Scalar>(model: &CnnModel<T>, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, model_to_bytes(model))?;
    Ok(())
}

pub fn load_model<T: Scalar>(path: impl AsRef<Path>) -> Result<CnnModel<T>> {
    model_from_bytes(&fs::read(path)?)
}
