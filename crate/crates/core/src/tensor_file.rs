// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! `TACOTNSR` tensor files and raw `f32` dumps.
//!
//! Layout: 8-byte magic, `u32` version (1), `u64` element count, then the
//! elements as little-endian `f32`. Total length is exactly `20 + 4N`.

use std::fs;
use std::path::Path;

use crate::error::{Result, TacoError};

pub const TENSOR_MAGIC: &[u8; 8] = b"TACOTNSR";
pub const TENSOR_VERSION: u32 = 1;
pub const TENSOR_HEADER_BYTES: usize = 20;

pub fn encode(values: &[f32]) -> Vec<u8> {
    let mut out = Vec::with_capacity(TENSOR_HEADER_BYTES + 4 * values.len());
    out.extend_from_slice(TENSOR_MAGIC);
    out.extend_from_slice(&TENSOR_VERSION.to_le_bytes());
    out.extend_from_slice(&(values.len() as u64).to_le_bytes());
    values.iter().for_each(|v| out.extend_from_slice(&v.to_le_bytes()));
    out
}

pub fn decode(bytes: &[u8]) -> Result<Vec<f32>> {
    if bytes.len() < TENSOR_HEADER_BYTES {
        if bytes.len() >= 8 && &bytes[..8] != TENSOR_MAGIC {
            return Err(TacoError::BadMagic { expected: "TACOTNSR" });
        }
        return Err(TacoError::UnexpectedEof { what: "tensor file" });
    }
    if &bytes[..8] != TENSOR_MAGIC {
        return Err(TacoError::BadMagic { expected: "TACOTNSR" });
    }
    let version = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
    if version != TENSOR_VERSION {
        return Err(TacoError::UnsupportedVersion(version));
    }
    let n = u64::from_le_bytes(bytes[12..20].try_into().unwrap());
    let body = &bytes[TENSOR_HEADER_BYTES..];
    let expected = n.checked_mul(4).filter(|&len| len <= usize::MAX as u64);
    match expected {
        Some(len) if (body.len() as u64) < len => Err(TacoError::UnexpectedEof { what: "tensor file" }),
        Some(len) if body.len() as u64 == len => Ok(decode_raw_unchecked(body)),
        _ => Err(TacoError::LengthMismatch {
            expected: TENSOR_HEADER_BYTES.saturating_add(n.saturating_mul(4) as usize),
            actual: bytes.len(),
        }),
    }
}

fn decode_raw_unchecked(body: &[u8]) -> Vec<f32> {
    body.chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect()
}

/// Headerless little-endian `f32` dump.
pub fn decode_raw(bytes: &[u8]) -> Result<Vec<f32>> {
    if bytes.len() % 4 != 0 {
        return Err(TacoError::LengthMismatch {
            expected: bytes.len() / 4 * 4,
            actual: bytes.len(),
        });
    }
    Ok(decode_raw_unchecked(bytes))
}

pub fn read(path: impl AsRef<Path>) -> Result<Vec<f32>> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| TacoError::io(path, e))?;
    decode(&bytes)
}

pub fn read_raw(path: impl AsRef<Path>) -> Result<Vec<f32>> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| TacoError::io(path, e))?;
    decode_raw(&bytes)
}

pub fn write(path: impl AsRef<Path>, values: &[f32]) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode(values)).map_err(|e| TacoError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout() {
        let bytes = encode(&[1.0, -2.5]);
        assert_eq!(bytes.len(), 20 + 8);
        assert_eq!(&bytes[..8], b"TACOTNSR");
        assert_eq!(&bytes[8..12], &1u32.to_le_bytes());
        assert_eq!(&bytes[12..20], &2u64.to_le_bytes());
        assert_eq!(&bytes[20..24], &1.0f32.to_le_bytes());
        assert_eq!(decode(&bytes).unwrap(), vec![1.0, -2.5]);
    }

    #[test]
    fn rejects_malformed() {
        let bytes = encode(&[1.0, 2.0, 3.0]);
        assert!(matches!(
            decode(&bytes[..bytes.len() - 2]),
            Err(TacoError::UnexpectedEof { .. })
        ));
        let mut long = bytes.clone();
        long.extend_from_slice(&[0; 4]);
        assert!(matches!(decode(&long), Err(TacoError::LengthMismatch { .. })));
        let mut bad = bytes.clone();
        bad[0] = b'Z';
        assert!(matches!(decode(&bad), Err(TacoError::BadMagic { .. })));
        let mut v2 = bytes;
        v2[8] = 2;
        assert!(matches!(decode(&v2), Err(TacoError::UnsupportedVersion(2))));
        assert!(matches!(decode_raw(&[0; 7]), Err(TacoError::LengthMismatch { .. })));
        assert_eq!(decode_raw(&1.5f32.to_le_bytes()).unwrap(), vec![1.5]);
    }

    #[test]
    fn missing_file_names_path() {
        let err = read("/definitely/not/here.tnsr").unwrap_err();
        assert!(err.to_string().contains("/definitely/not/here.tnsr"));
    }
}
