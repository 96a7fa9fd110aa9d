//! Versioned, self-describing checkpoint files.
//!
//! Format "ANPW": magic `ANPW` (4 ASCII bytes), little-endian u32
//! version (currently 1), u32 tensor count, then per tensor a u16 name
//! length, the UTF-8 name, u32 rows, u32 cols, and rows*cols
//! little-endian IEEE-754 64-bit reals. Tensors are stored in the
//! model's canonical order; loading validates names and shapes against
//! the target configuration, so a checkpoint from a different variant
//! fails with a mismatch error instead of loading garbage.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{init_params, ModelConfig, ModelParams};
use crate::tensor::Tensor2D;

pub const ANPW_MAGIC: [u8; 4] = *b"ANPW";
pub const ANPW_VERSION: u32 = 1;

pub fn save_params(path: &Path, params: &ModelParams) -> Result<()> {
    let mut file = fs::File::create(path)?;
    file.write_all(&params_bytes(params))?;
    Ok(())
}

pub fn params_bytes(params: &ModelParams) -> Vec<u8> {
    let named = params.named_tensors();
    let mut bytes = Vec::new();
    bytes.extend_from_slice(&ANPW_MAGIC);
    bytes.extend_from_slice(&ANPW_VERSION.to_le_bytes());
    bytes.extend_from_slice(&(named.len() as u32).to_le_bytes());
    for (name, t) in named {
        bytes.extend_from_slice(&(name.len() as u16).to_le_bytes());
        bytes.extend_from_slice(name.as_bytes());
        bytes.extend_from_slice(&(t.rows() as u32).to_le_bytes());
        bytes.extend_from_slice(&(t.cols() as u32).to_le_bytes());
        for &v in t.data() {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
    }
    bytes
}

/// Reads the raw named tensors of a checkpoint without interpreting
/// them against any configuration.
pub fn read_raw(path: &Path) -> Result<Vec<(String, Tensor2D)>> {
    let bytes = fs::read(path)?;
    raw_from_bytes(&bytes, &path.display().to_string())
}

pub fn raw_from_bytes(bytes: &[u8], source: &str) -> Result<Vec<(String, Tensor2D)>> {
    let mut cursor = bytes;

    let magic = take(&mut cursor, 4, source)?;
    if magic != ANPW_MAGIC {
        return Err(Error::BadMagic {
            expected: String::from_utf8_lossy(&ANPW_MAGIC).into_owned(),
            found: String::from_utf8_lossy(magic).into_owned(),
        });
    }
    let version = take_u32(&mut cursor, source)?;
    if version != ANPW_VERSION {
        return Err(Error::BadVersion {
            expected: ANPW_VERSION,
            found: version,
        });
    }
    let count = take_u32(&mut cursor, source)? as usize;

    let mut tensors = Vec::with_capacity(count);
    for _ in 0..count {
        let name_len = take_u16(&mut cursor, source)? as usize;
        let name_bytes = take(&mut cursor, name_len, source)?;
        let name = std::str::from_utf8(name_bytes)
            .map_err(|_| Error::CheckpointMismatch(format!("{source}: tensor name is not UTF-8")))?
            .to_string();
        let rows = take_u32(&mut cursor, source)? as usize;
        let cols = take_u32(&mut cursor, source)? as usize;
        let len = rows
            .checked_mul(cols)
            .ok_or_else(|| Error::CheckpointMismatch(format!("{source}: tensor {name} dimensions overflow")))?;
        let payload = take(&mut cursor, len * 8, source)?;
        let data: Vec<f64> = payload
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
            .collect();
        tensors.push((name, Tensor2D::new(rows, cols, data)?));
    }
    if !cursor.is_empty() {
        return Err(Error::TrailingBytes(cursor.len() as u64));
    }
    Ok(tensors)
}

/// Loads a checkpoint into the parameter structure of `config`. The
/// file must contain exactly the tensors the configuration expects,
/// with matching shapes.
pub fn load_params(path: &Path, config: &ModelConfig) -> Result<ModelParams> {
    let tensors = read_raw(path)?;
    params_from_raw(tensors, config)
}

pub fn params_from_raw(tensors: Vec<(String, Tensor2D)>, config: &ModelConfig) -> Result<ModelParams> {
    // shape skeleton for this configuration
    let mut params = init_params(config)?;
    let expected_len = params.tensor_count();
    if tensors.len() != expected_len {
        return Err(Error::CheckpointMismatch(format!(
            "configuration expects {} tensors, checkpoint has {}",
            expected_len,
            tensors.len()
        )));
    }
    let mut supplied: std::collections::HashMap<String, Tensor2D> = tensors.into_iter().collect();
    if supplied.len() != expected_len {
        return Err(Error::CheckpointMismatch("duplicate tensor names".into()));
    }
    for (name, slot) in params.named_tensors_mut() {
        let t = supplied
            .remove(&name)
            .ok_or_else(|| Error::CheckpointMismatch(format!("checkpoint lacks tensor {name:?}")))?;
        if t.shape() != slot.shape() {
            return Err(Error::CheckpointMismatch(format!(
                "tensor {name:?} is {:?}, configuration expects {:?}",
                t.shape(),
                slot.shape()
            )));
        }
        *slot = t;
    }
    if let Some((name, _)) = supplied.into_iter().next() {
        return Err(Error::CheckpointMismatch(format!(
            "checkpoint holds unexpected tensor {name:?}"
        )));
    }
    Ok(params)
}

fn take<'b>(cursor: &mut &'b [u8], n: usize, source: &str) -> Result<&'b [u8]> {
    if cursor.len() < n {
        return Err(Error::UnexpectedEof(source.into()));
    }
    let (head, tail) = cursor.split_at(n);
    *cursor = tail;
    Ok(head)
}

fn take_u32(cursor: &mut &[u8], source: &str) -> Result<u32> {
    Ok(u32::from_le_bytes(take(cursor, 4, source)?.try_into().expect("4 bytes")))
}

fn take_u16(cursor: &mut &[u8], source: &str) -> Result<u16> {
    Ok(u16::from_le_bytes(take(cursor, 2, source)?.try_into().expect("2 bytes")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Streams;

    fn config() -> ModelConfig {
        ModelConfig { seed: 5, ..ModelConfig::default() }
    }

    #[test]
    fn round_trip_is_bit_identical() {
        let params = init_params(&config()).unwrap();
        let bytes = params_bytes(&params);
        let raw = raw_from_bytes(&bytes, "mem").unwrap();
        let back = params_from_raw(raw, &config()).unwrap();
        assert_eq!(params, back);
    }

    #[test]
    fn corrupted_magic_is_bad_magic() {
        let params = init_params(&config()).unwrap();
        let mut bytes = params_bytes(&params);
        bytes[0] = b'Z';
        let err = raw_from_bytes(&bytes, "mem").unwrap_err();
        assert!(matches!(err, Error::BadMagic { .. }), "{err}");
    }

    #[test]
    fn wrong_version_is_bad_version() {
        let params = init_params(&config()).unwrap();
        let mut bytes = params_bytes(&params);
        bytes[4..8].copy_from_slice(&9u32.to_le_bytes());
        let err = raw_from_bytes(&bytes, "mem").unwrap_err();
        assert!(matches!(err, Error::BadVersion { expected: 1, found: 9 }), "{err}");
    }

    #[test]
    fn truncation_is_eof() {
        let params = init_params(&config()).unwrap();
        let bytes = params_bytes(&params);
        for cut in [3, 6, 11, 64, bytes.len() - 1] {
            let err = raw_from_bytes(&bytes[..cut], "mem").unwrap_err();
            assert!(matches!(err, Error::UnexpectedEof(_)), "cut {cut}: {err}");
        }
    }

    #[test]
    fn trailing_bytes_rejected() {
        let params = init_params(&config()).unwrap();
        let mut bytes = params_bytes(&params);
        bytes.extend_from_slice(&[0, 1, 2]);
        let err = raw_from_bytes(&bytes, "mem").unwrap_err();
        assert!(matches!(err, Error::TrailingBytes(3)), "{err}");
    }

    #[test]
    fn ds_checkpoint_into_ts_config_is_mismatch() {
        let ds = ModelConfig {
            streams: Streams::Ds,
            ..config()
        };
        let params = init_params(&ds).unwrap();
        let bytes = params_bytes(&params);
        let raw = raw_from_bytes(&bytes, "mem").unwrap();
        let err = params_from_raw(raw, &config()).unwrap_err();
        assert!(matches!(err, Error::CheckpointMismatch(_)), "{err}");
    }
}
