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

//! `TACOCMP1` compressed archive.
//!
//! Little-endian layout:
//!
//! ```text
//! magic        8 bytes  "TACOCMP1"
//! codec_kind   u8
//! format id    u8       0=E4M3 1=E5M2 2=INT8 3=identity
//! block_size   u32
//! length N     u64
//! per block:   payload (B bytes, 4B for identity), alpha f32, scale f32
//! ```

use std::fs;
use std::path::Path;

use crate::codec::{CodecKind, CompressedBlock, CompressedTensor, PayloadEncoding, BLOCK_METADATA_BYTES};
use crate::error::{Result, TacoError};
use crate::transform::block_count;

pub const ARCHIVE_MAGIC: &[u8; 8] = b"TACOCMP1";
pub const HEADER_BYTES: usize = 8 + 1 + 1 + 4 + 8;

/// Exact archive size for `n` elements.
pub fn archive_len(encoding: PayloadEncoding, block_size: usize, n: usize) -> usize {
    HEADER_BYTES + block_count(n, block_size) * (block_size * encoding.bytes_per_element() + BLOCK_METADATA_BYTES)
}

pub fn to_bytes(ct: &CompressedTensor) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_BYTES + ct.body_bytes());
    out.extend_from_slice(ARCHIVE_MAGIC);
    out.push(ct.kind.id());
    out.push(ct.encoding.id());
    out.extend_from_slice(&(ct.block_size as u32).to_le_bytes());
    out.extend_from_slice(&(ct.original_length as u64).to_le_bytes());
    for block in &ct.blocks {
        out.extend_from_slice(&block.payload);
        out.extend_from_slice(&block.alpha.to_le_bytes());
        out.extend_from_slice(&block.scale.to_le_bytes());
    }
    out
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.buf.len() - self.pos < n {
            return Err(TacoError::UnexpectedEof { what: "archive" });
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f32(&mut self) -> Result<f32> {
        Ok(f32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
}

/// Parses and validates an archive. Trailing bytes are rejected.
pub fn from_bytes(bytes: &[u8]) -> Result<CompressedTensor> {
    let mut r = Reader { buf: bytes, pos: 0 };
    if r.take(8)? != ARCHIVE_MAGIC {
        return Err(TacoError::BadMagic { expected: "TACOCMP1" });
    }
    let kind_id = r.u8()?;
    let kind =
        CodecKind::from_id(kind_id).ok_or_else(|| TacoError::Corrupt(format!("unknown codec kind {kind_id}")))?;
    let format_id = r.u8()?;
    let encoding = PayloadEncoding::from_id(format_id)
        .ok_or_else(|| TacoError::Corrupt(format!("unknown format id {format_id}")))?;
    let block_size = r.u32()? as usize;
    if !block_size.is_power_of_two() || block_size < 2 {
        return Err(TacoError::Corrupt(format!("invalid block size {block_size}")));
    }
    let n = usize::try_from(r.u64()?).map_err(|_| TacoError::Corrupt("length overflows usize".into()))?;

    let blocks = block_count(n, block_size);
    let payload_len = block_size * encoding.bytes_per_element();
    let expected_body = blocks
        .checked_mul(payload_len + BLOCK_METADATA_BYTES)
        .ok_or_else(|| TacoError::Corrupt("length overflows usize".into()))?;
    let remaining = bytes.len() - r.pos;
    if remaining < expected_body {
        return Err(TacoError::UnexpectedEof { what: "archive" });
    }
    if remaining > expected_body {
        return Err(TacoError::Corrupt(format!(
            "{} trailing bytes after last block",
            remaining - expected_body
        )));
    }

    let mut out = Vec::with_capacity(blocks);
    for _ in 0..blocks {
        let payload = r.take(payload_len)?.to_vec();
        let alpha = r.f32()?;
        let scale = r.f32()?;
        out.push(CompressedBlock { payload, alpha, scale });
    }
    let ct = CompressedTensor {
        kind,
        encoding,
        block_size,
        original_length: n,
        blocks: out,
    };
    ct.validate()?;
    Ok(ct)
}

pub fn write_file(path: impl AsRef<Path>, ct: &CompressedTensor) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, to_bytes(ct)).map_err(|e| TacoError::io(path, e))
}

pub fn read_file(path: impl AsRef<Path>) -> Result<CompressedTensor> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| TacoError::io(path, e))?;
    from_bytes(&bytes)
}
