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

//! Block codecs for flat `f32` tensors.
//!
//! [`CodecKind::Taco`] is the full pipeline. Per block `G_k` it computes
//!
//! ```text
//! sigma_k = sqrt(mean(G_k^2) + eps)      alpha_k = tau / sigma_k
//! Z_k     = H_B (alpha_k * G_k)          s_k     = max|Z_k| / q_max
//! q_k     = fp8(Z_k / s_k)
//! ```
//!
//! and ships `(q_k, alpha_k, s_k)`. Reconstruction runs the same steps
//! backwards: `G'_k = H_B (decode(q_k) * s_k) / alpha_k`.
//!
//! The other kinds are baselines for error comparisons: FP8 with one global
//! scale, FP8 with a per-block scale, an unscaled FP8 cast, uniform INT8 with
//! one global step, and a lossless identity.

use serde::{Deserialize, Serialize};

use crate::error::{Result, TacoError};
use crate::fp8::{Fp8Code, Fp8Format, Fp8Variant, Overflow};
use crate::par::{self, Execution};
use crate::transform::{self, block_count, fwht_in_place};

/// Per-block metadata cost in bytes: `alpha_k` and `s_k` as `f32`.
pub const BLOCK_METADATA_BYTES: usize = 8;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CodecKind {
    /// Adaptive scale, Hadamard rotation, dual-scale FP8.
    #[default]
    Taco,
    /// FP8 with a single tensor-wide scale `max|x| / q_max`.
    DirectFp8,
    /// FP8 with one `max|G_k| / q_max` scale per block, no rotation.
    DirectFp8Block,
    /// `round(x / delta)` with `delta = max|x| / 127`, one delta per tensor.
    #[serde(alias = "int8")]
    Int8Uniform,
    /// Raw `f32` payload.
    Identity,
    /// Element-wise FP8 cast with unit scale.
    Fp8Cast,
}

impl CodecKind {
    pub const ALL: [CodecKind; 6] = [
        CodecKind::Taco,
        CodecKind::DirectFp8,
        CodecKind::DirectFp8Block,
        CodecKind::Int8Uniform,
        CodecKind::Identity,
        CodecKind::Fp8Cast,
    ];

    pub fn id(self) -> u8 {
        match self {
            CodecKind::Taco => 0,
            CodecKind::DirectFp8 => 1,
            CodecKind::DirectFp8Block => 2,
            CodecKind::Int8Uniform => 3,
            CodecKind::Identity => 4,
            CodecKind::Fp8Cast => 5,
        }
    }

    pub fn from_id(id: u8) -> Option<CodecKind> {
        CodecKind::ALL.into_iter().find(|k| k.id() == id)
    }

    pub fn name(self) -> &'static str {
        match self {
            CodecKind::Taco => "taco",
            CodecKind::DirectFp8 => "direct-fp8",
            CodecKind::DirectFp8Block => "direct-fp8-block",
            CodecKind::Int8Uniform => "int8",
            CodecKind::Identity => "identity",
            CodecKind::Fp8Cast => "fp8-cast",
        }
    }

    pub fn is_lossless(self) -> bool {
        self == CodecKind::Identity
    }
}

impl std::fmt::Display for CodecKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for CodecKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "taco" | "ash" => CodecKind::Taco,
            "direct-fp8" | "fp8" => CodecKind::DirectFp8,
            "direct-fp8-block" | "fp8-block" => CodecKind::DirectFp8Block,
            "int8" | "int8-uniform" => CodecKind::Int8Uniform,
            "identity" | "none" => CodecKind::Identity,
            "fp8-cast" | "cast" => CodecKind::Fp8Cast,
            other => return Err(format!("unknown codec `{other}`")),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CodecConfig {
    pub kind: CodecKind,
    pub block_size: usize,
    /// Target RMS `tau` each block is rescaled to before rotation.
    pub target_energy: f32,
    /// `eps` under the square root of the block RMS.
    pub stability_epsilon: f32,
    pub format: Fp8Variant,
    pub overflow: Overflow,
}

impl Default for CodecConfig {
    fn default() -> Self {
        CodecConfig {
            kind: CodecKind::Taco,
            block_size: 256,
            target_energy: 1.0,
            stability_epsilon: 1e-12,
            format: Fp8Variant::E4M3,
            overflow: Overflow::Saturate,
        }
    }
}

impl CodecConfig {
    pub fn new(kind: CodecKind) -> Self {
        CodecConfig {
            kind,
            ..Default::default()
        }
    }

    pub fn with_block_size(mut self, block_size: usize) -> Self {
        self.block_size = block_size;
        self
    }

    pub fn with_format(mut self, format: Fp8Variant) -> Self {
        self.format = format;
        self
    }

    pub fn with_kind(mut self, kind: CodecKind) -> Self {
        self.kind = kind;
        self
    }

    pub fn validate(&self) -> Result<()> {
        transform::validate_block_size(self.block_size)?;
        if !(self.target_energy > 0.0 && self.target_energy.is_finite()) {
            return Err(TacoError::InvalidConfig(format!(
                "target energy must be positive and finite, got {}",
                self.target_energy
            )));
        }
        if !(self.stability_epsilon > 0.0 && self.stability_epsilon.is_finite()) {
            return Err(TacoError::InvalidConfig(format!(
                "stability epsilon must be positive and finite, got {}",
                self.stability_epsilon
            )));
        }
        Ok(())
    }

    pub fn fp8(&self) -> Fp8Format {
        self.format.format()
    }

    pub fn encoding(&self) -> PayloadEncoding {
        match self.kind {
            CodecKind::Int8Uniform => PayloadEncoding::Int8,
            CodecKind::Identity => PayloadEncoding::Raw,
            _ => PayloadEncoding::Fp8(self.format),
        }
    }

    /// Short human label, e.g. `taco-e4m3-b256`.
    pub fn label(&self) -> String {
        match self.kind {
            CodecKind::Int8Uniform | CodecKind::Identity => {
                format!("{}-b{}", self.kind.name(), self.block_size)
            }
            _ => format!("{}-{}-b{}", self.kind.name(), self.format.name(), self.block_size),
        }
    }

    pub fn compress(&self, x: &[f32]) -> Result<CompressedTensor> {
        compress(x, self)
    }
}

/// How the payload bytes of each block are interpreted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PayloadEncoding {
    Fp8(Fp8Variant),
    Int8,
    /// Little-endian `f32`.
    Raw,
}

impl PayloadEncoding {
    pub fn id(self) -> u8 {
        match self {
            PayloadEncoding::Fp8(Fp8Variant::E4M3) => 0,
            PayloadEncoding::Fp8(Fp8Variant::E5M2) => 1,
            PayloadEncoding::Int8 => 2,
            PayloadEncoding::Raw => 3,
        }
    }

    pub fn from_id(id: u8) -> Option<PayloadEncoding> {
        Some(match id {
            0 => PayloadEncoding::Fp8(Fp8Variant::E4M3),
            1 => PayloadEncoding::Fp8(Fp8Variant::E5M2),
            2 => PayloadEncoding::Int8,
            3 => PayloadEncoding::Raw,
            _ => return None,
        })
    }

    pub fn bytes_per_element(self) -> usize {
        match self {
            PayloadEncoding::Raw => 4,
            _ => 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompressedBlock {
    pub payload: Vec<u8>,
    /// Pre-rotation energy scale. 1 for codecs without adaptive rescaling.
    pub alpha: f32,
    /// Dequantization scale. Never 0.
    pub scale: f32,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompressedTensor {
    pub kind: CodecKind,
    pub encoding: PayloadEncoding,
    pub block_size: usize,
    pub original_length: usize,
    pub blocks: Vec<CompressedBlock>,
}

impl CompressedTensor {
    pub fn payload_bytes_per_block(&self) -> usize {
        self.block_size * self.encoding.bytes_per_element()
    }

    /// Payload plus per-block metadata, excluding any container header.
    pub fn body_bytes(&self) -> usize {
        self.blocks.len() * (self.payload_bytes_per_block() + BLOCK_METADATA_BYTES)
    }

    /// Checks every structural invariant `decompress` relies on.
    pub fn validate(&self) -> Result<()> {
        transform::validate_block_size(self.block_size)
            .map_err(|_| TacoError::Corrupt(format!("invalid block size {}", self.block_size)))?;
        let expected = block_count(self.original_length, self.block_size);
        if self.blocks.len() != expected {
            return Err(TacoError::Corrupt(format!(
                "block count {} does not match original length {} (expected {expected} blocks)",
                self.blocks.len(),
                self.original_length
            )));
        }
        let consistent = match (self.kind, self.encoding) {
            (CodecKind::Int8Uniform, PayloadEncoding::Int8) => true,
            (CodecKind::Identity, PayloadEncoding::Raw) => true,
            (CodecKind::Int8Uniform | CodecKind::Identity, _) => false,
            (_, PayloadEncoding::Fp8(_)) => true,
            _ => false,
        };
        if !consistent {
            return Err(TacoError::Corrupt(format!(
                "codec {} cannot use payload encoding {:?}",
                self.kind, self.encoding
            )));
        }
        let payload_len = self.payload_bytes_per_block();
        for (k, block) in self.blocks.iter().enumerate() {
            if block.payload.len() != payload_len {
                return Err(TacoError::Corrupt(format!(
                    "block {k} payload has {} bytes, expected {payload_len}",
                    block.payload.len()
                )));
            }
            if !(block.alpha.is_finite() && block.alpha > 0.0) {
                return Err(TacoError::Corrupt(format!(
                    "block {k} has invalid alpha {}",
                    block.alpha
                )));
            }
            if !(block.scale.is_finite() && block.scale > 0.0) {
                return Err(TacoError::Corrupt(format!(
                    "block {k} has invalid scale {}",
                    block.scale
                )));
            }
            if let PayloadEncoding::Fp8(variant) = self.encoding {
                let fmt = variant.format();
                if let Some(pos) = block.payload.iter().position(|&c| !fmt.is_finite_code(Fp8Code(c))) {
                    return Err(TacoError::Corrupt(format!(
                        "block {k} element {pos} holds non-finite code {:#04x}",
                        block.payload[pos]
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Global INT8 step size.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Int8Params {
    pub delta: f32,
}

impl Int8Params {
    /// `delta = max|x| / 127`; zero for an all-zero tensor.
    pub fn from_tensor(x: &[f32]) -> Int8Params {
        Int8Params {
            delta: max_abs(x) / 127.0,
        }
    }
}

/// `sqrt(mean(g^2) + eps)`, summed in `f64` over every slot including padding.
pub fn block_rms(g: &[f32], eps: f32) -> f32 {
    let sum: f64 = g.iter().map(|&v| (v as f64) * (v as f64)).sum();
    ((sum / g.len() as f64) + eps as f64).sqrt() as f32
}

/// `alpha = tau / sigma`.
pub fn adaptive_scale(sigma: f32, tau: f32) -> f32 {
    tau / sigma
}

/// Rescales `block` to RMS `tau` and rotates it in place. Returns `alpha`.
///
/// `block.len()` must be a power of two.
pub fn ash_forward(block: &mut [f32], tau: f32, eps: f32) -> Result<f32> {
    let alpha = adaptive_scale(block_rms(block, eps), tau);
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(TacoError::InvalidConfig(format!(
            "adaptive scale {alpha} is not a positive finite number"
        )));
    }
    block.iter_mut().for_each(|v| *v *= alpha);
    fwht_in_place(block)?;
    Ok(alpha)
}

pub(crate) fn max_abs(x: &[f32]) -> f32 {
    x.iter().fold(0.0f32, |m, v| m.max(v.abs()))
}

/// `max|z| / q_max`, or 1 for an all-zero block.
fn range_scale(z: &[f32], q_max: f32) -> f32 {
    let m = max_abs(z);
    if m == 0.0 {
        1.0
    } else {
        m / q_max
    }
}

fn check_finite(x: &[f32]) -> Result<()> {
    match x.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(TacoError::NonFiniteInput { index }),
        None => Ok(()),
    }
}

fn encode_fp8(values: &[f32], scale: f32, fmt: &Fp8Format, overflow: Overflow) -> Vec<u8> {
    values.iter().map(|&v| fmt.encode_with(v / scale, overflow).0).collect()
}

pub fn compress(x: &[f32], cfg: &CodecConfig) -> Result<CompressedTensor> {
    compress_with(x, cfg, Execution::default())
}

pub fn compress_with(x: &[f32], cfg: &CodecConfig, exec: Execution) -> Result<CompressedTensor> {
    cfg.validate()?;
    if x.is_empty() {
        return Err(TacoError::EmptyInput);
    }
    check_finite(x)?;

    let b = cfg.block_size;
    let fmt = cfg.fp8();
    let overflow = cfg.overflow;
    // Tensor-wide scales for the global baselines.
    let global_scale = match cfg.kind {
        CodecKind::DirectFp8 => range_scale(x, fmt.q_max),
        CodecKind::Int8Uniform => {
            let delta = Int8Params::from_tensor(x).delta;
            if delta == 0.0 {
                1.0
            } else {
                delta
            }
        }
        _ => 1.0,
    };

    let encode_block = |_: usize, chunk: &[f32]| -> Result<CompressedBlock> {
        let mut buf = vec![0f32; b];
        buf[..chunk.len()].copy_from_slice(chunk);
        Ok(match cfg.kind {
            CodecKind::Taco => {
                let alpha = ash_forward(&mut buf, cfg.target_energy, cfg.stability_epsilon)?;
                let scale = range_scale(&buf, fmt.q_max);
                CompressedBlock {
                    payload: encode_fp8(&buf, scale, &fmt, overflow),
                    alpha,
                    scale,
                }
            }
            CodecKind::DirectFp8 | CodecKind::Fp8Cast => CompressedBlock {
                payload: encode_fp8(&buf, global_scale, &fmt, overflow),
                alpha: 1.0,
                scale: global_scale,
            },
            CodecKind::DirectFp8Block => {
                let scale = range_scale(&buf, fmt.q_max);
                CompressedBlock {
                    payload: encode_fp8(&buf, scale, &fmt, overflow),
                    alpha: 1.0,
                    scale,
                }
            }
            CodecKind::Int8Uniform => CompressedBlock {
                payload: buf
                    .iter()
                    .map(|&v| (v / global_scale).round_ties_even().clamp(-127.0, 127.0) as i8 as u8)
                    .collect(),
                alpha: 1.0,
                scale: global_scale,
            },
            CodecKind::Identity => CompressedBlock {
                payload: buf.iter().flat_map(|v| v.to_le_bytes()).collect(),
                alpha: 1.0,
                scale: 1.0,
            },
        })
    };

    let blocks = par::map_chunks(exec, x, b, encode_block)
        .into_iter()
        .collect::<Result<Vec<_>>>()?;

    Ok(CompressedTensor {
        kind: cfg.kind,
        encoding: cfg.encoding(),
        block_size: b,
        original_length: x.len(),
        blocks,
    })
}

pub fn decompress(ct: &CompressedTensor) -> Result<Vec<f32>> {
    decompress_with(ct, Execution::default())
}

pub fn decompress_with(ct: &CompressedTensor, exec: Execution) -> Result<Vec<f32>> {
    ct.validate()?;
    let b = ct.block_size;
    let mut out = vec![0f32; ct.blocks.len() * b];
    let kind = ct.kind;
    let encoding = ct.encoding;

    par::zip_chunks_mut(exec, &mut out, b, &ct.blocks, |dst, block| {
        match encoding {
            PayloadEncoding::Fp8(variant) => {
                let table = variant.format().decode_table();
                for (d, &c) in dst.iter_mut().zip(&block.payload) {
                    *d = table[c as usize] * block.scale;
                }
            }
            PayloadEncoding::Int8 => {
                for (d, &c) in dst.iter_mut().zip(&block.payload) {
                    *d = (c as i8) as f32 * block.scale;
                }
            }
            PayloadEncoding::Raw => {
                for (d, raw) in dst.iter_mut().zip(block.payload.chunks_exact(4)) {
                    *d = f32::from_le_bytes([raw[0], raw[1], raw[2], raw[3]]);
                }
            }
        }
        if kind == CodecKind::Taco {
            // Length was validated as a power of two.
            let _ = fwht_in_place(dst);
            let inv = block.alpha;
            dst.iter_mut().for_each(|v| *v /= inv);
        }
    });
    out.truncate(ct.original_length);
    Ok(out)
}

/// Uncompressed bytes over compressed payload-plus-metadata bytes,
/// `4N / (ceil(N/B) * (B + 8))`. Identity reports 1.
pub fn compressed_ratio(cfg: &CodecConfig, n: usize) -> f64 {
    if cfg.kind == CodecKind::Identity {
        return 1.0;
    }
    let blocks = block_count(n, cfg.block_size);
    (4 * n) as f64 / (blocks * (cfg.block_size + BLOCK_METADATA_BYTES)) as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn gaussian(n: usize, sigma: f32, seed: u64) -> Vec<f32> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.sample::<f32, _>(StandardNormal) * sigma).collect()
    }

    fn rel_l2(x: &[f32], y: &[f32]) -> f64 {
        let num: f64 = x.iter().zip(y).map(|(a, b)| ((a - b) as f64).powi(2)).sum();
        let den: f64 = x.iter().map(|a| (*a as f64).powi(2)).sum();
        (num / den).sqrt()
    }

    #[test]
    fn rms_and_scale_examples() {
        assert_eq!(block_rms(&[3.0, 4.0, 0.0, 0.0], 0.0), 2.5);
        assert!((block_rms(&[0.0; 4], 1e-12) - 1e-6).abs() < 1e-12);
        assert_eq!(block_rms(&[-1.5; 8], 0.0), 1.5);
        assert!((adaptive_scale(2.5, 1.0) - 0.4).abs() < 1e-7);
        assert_eq!(adaptive_scale(1.0, 1.0), 1.0);
        assert!((adaptive_scale(1e-6, 1.0) - 1e6).abs() < 1.0);
    }

    #[test]
    fn hand_computed_single_block() {
        let cfg = CodecConfig {
            block_size: 4,
            stability_epsilon: f32::MIN_POSITIVE,
            ..Default::default()
        };
        let ct = compress(&[3.0, 4.0, 0.0, 0.0], &cfg).unwrap();
        let block = &ct.blocks[0];
        assert!((block.alpha - 0.4).abs() < 1e-7);
        // Z = (1/2) H_4 [1.2, 1.6, 0, 0] = [1.4, -0.2, 1.4, -0.2]; s = 1.4 / 448.
        assert!((block.scale - 1.4 / 448.0).abs() < 1e-9);
        // 448 -> 0x7E, -64 -> 0xE8.
        assert_eq!(block.payload, vec![0x7E, 0xE8, 0x7E, 0xE8]);
        let back = decompress(&ct).unwrap();
        for (a, b) in back.iter().zip([3.0, 4.0, 0.0, 0.0]) {
            assert!((a - b).abs() < 1e-5, "{back:?}");
        }
    }

    #[test]
    fn all_zero_tensor_is_exact() {
        for kind in CodecKind::ALL {
            let cfg = CodecConfig::new(kind);
            let ct = compress(&[0.0; 700], &cfg).unwrap();
            if kind != CodecKind::Identity {
                assert!(ct.blocks.iter().all(|b| b.payload.iter().all(|&c| c == 0)));
            }
            assert!(ct.blocks.iter().all(|b| b.scale == 1.0));
            assert_eq!(decompress(&ct).unwrap(), vec![0.0; 700]);
        }
    }

    #[test]
    fn identity_is_bit_exact() {
        let x = gaussian(1000, 3.0, 1);
        let ct = compress(&x, &CodecConfig::new(CodecKind::Identity)).unwrap();
        let y = decompress(&ct).unwrap();
        assert!(x.iter().zip(&y).all(|(a, b)| a.to_bits() == b.to_bits()));
    }

    #[test]
    fn rejects_bad_input() {
        let cfg = CodecConfig::default();
        assert!(matches!(compress(&[], &cfg), Err(TacoError::EmptyInput)));
        assert!(matches!(
            compress(&[1.0, f32::NAN], &cfg),
            Err(TacoError::NonFiniteInput { index: 1 })
        ));
        assert!(matches!(
            compress(&[f32::INFINITY], &cfg),
            Err(TacoError::NonFiniteInput { index: 0 })
        ));
        assert!(matches!(
            compress(&[1.0], &cfg.with_block_size(100)),
            Err(TacoError::InvalidBlockSize(100))
        ));
        let bad_tau = CodecConfig {
            target_energy: 0.0,
            ..cfg
        };
        assert!(matches!(compress(&[1.0], &bad_tau), Err(TacoError::InvalidConfig(_))));
    }

    #[test]
    fn decompress_rejects_corruption() {
        let x = gaussian(600, 1.0, 2);
        let ct = compress(&x, &CodecConfig::default()).unwrap();

        let mut short = ct.clone();
        short.original_length = 2000;
        assert!(matches!(decompress(&short), Err(TacoError::Corrupt(_))));

        let mut nan_alpha = ct.clone();
        nan_alpha.blocks[1].alpha = f32::NAN;
        assert!(matches!(decompress(&nan_alpha), Err(TacoError::Corrupt(_))));

        let mut zero_scale = ct.clone();
        zero_scale.blocks[0].scale = 0.0;
        assert!(matches!(decompress(&zero_scale), Err(TacoError::Corrupt(_))));

        let mut nan_code = ct.clone();
        nan_code.blocks[0].payload[3] = 0x7F;
        assert!(matches!(decompress(&nan_code), Err(TacoError::Corrupt(_))));

        let mut wrong_encoding = ct;
        wrong_encoding.encoding = PayloadEncoding::Raw;
        assert!(matches!(decompress(&wrong_encoding), Err(TacoError::Corrupt(_))));
    }

    #[test]
    fn payload_never_holds_nan_or_overflow() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut x = gaussian(1 << 16, 1.0, 4);
        // Mix in widely varying block magnitudes.
        for chunk in x.chunks_mut(256) {
            let s = 10f32.powi(rng.random_range(-8..8));
            chunk.iter_mut().for_each(|v| *v *= s);
        }
        for variant in [Fp8Variant::E4M3, Fp8Variant::E5M2] {
            let ct = compress(&x, &CodecConfig::default().with_format(variant)).unwrap();
            let fmt = variant.format();
            for b in &ct.blocks {
                assert!(b.payload.iter().all(|&c| fmt.is_finite_code(Fp8Code(c))));
                assert!(b.payload.iter().all(|&c| fmt.decode(Fp8Code(c)).abs() <= fmt.q_max));
            }
        }
    }

    #[test]
    fn payload_is_invariant_under_power_of_two_scaling() {
        let x = gaussian(64 * 256, 1.0, 5);
        let cfg = CodecConfig::default();
        let base = compress(&x, &cfg).unwrap();
        for c in [2.0f32, 0.5, 1024.0] {
            let scaled: Vec<f32> = x.iter().map(|v| v * c).collect();
            let ct = compress(&scaled, &cfg).unwrap();
            for (a, b) in base.blocks.iter().zip(&ct.blocks) {
                assert_eq!(a.payload, b.payload);
                assert_eq!(a.scale, b.scale);
                assert!(((b.alpha * c) / a.alpha - 1.0).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn skipping_alpha_breaks_reconstruction() {
        // Blocks with RMS far from tau: ignoring alpha must be caught.
        let x = gaussian(4096, 1e-3, 6);
        let ct = compress(&x, &CodecConfig::default()).unwrap();
        let good = decompress(&ct).unwrap();
        let mut no_alpha = ct.clone();
        no_alpha.blocks.iter_mut().for_each(|b| b.alpha = 1.0);
        let bad = decompress(&no_alpha).unwrap();
        let bound = 2f64.powi(-4) / (1.0 - 2f64.powi(-4));
        assert!(rel_l2(&x, &good) <= bound);
        assert!(rel_l2(&x, &bad) > 10.0 * bound);
    }

    #[test]
    fn round_trip_bound_on_gaussian_blocks() {
        let bound = 2f64.powi(-4) / (1.0 - 2f64.powi(-4));
        for seed in 0..1000u64 {
            let x = gaussian(256, 1.0, 100 + seed);
            let y = decompress(&compress(&x, &CodecConfig::default()).unwrap()).unwrap();
            let err = rel_l2(&x, &y);
            assert!(err <= bound + 1e-6, "seed {seed}: {err}");
        }
    }

    #[test]
    fn baselines_reconstruct_reasonably() {
        let x = gaussian(5000, 2.0, 7);
        for kind in [CodecKind::DirectFp8, CodecKind::DirectFp8Block, CodecKind::Int8Uniform] {
            let ct = compress(&x, &CodecConfig::new(kind)).unwrap();
            let err = rel_l2(&x, &decompress(&ct).unwrap());
            assert!(err < 0.05, "{kind}: {err}");
        }
        let int8 = compress(&x, &CodecConfig::new(CodecKind::Int8Uniform)).unwrap();
        let delta = Int8Params::from_tensor(&x).delta;
        assert!(int8.blocks.iter().all(|b| b.scale == delta));
        let y = decompress(&int8).unwrap();
        assert!(x.iter().zip(&y).all(|(a, b)| (a - b).abs() <= delta / 2.0 * 1.0001));
    }

    #[test]
    fn sequential_and_parallel_agree_bitwise() {
        let x = gaussian(100_003, 1.0, 8);
        for kind in CodecKind::ALL {
            let cfg = CodecConfig::new(kind);
            let a = compress_with(&x, &cfg, Execution::Sequential).unwrap();
            let b = compress_with(&x, &cfg, Execution::Parallel).unwrap();
            assert_eq!(a, b);
            let ya = decompress_with(&a, Execution::Sequential).unwrap();
            let yb = decompress_with(&a, Execution::Parallel).unwrap();
            assert!(ya.iter().zip(&yb).all(|(p, q)| p.to_bits() == q.to_bits()));
        }
    }

    #[test]
    fn ratio_examples() {
        let cfg = CodecConfig::default();
        assert!((compressed_ratio(&cfg, 256 * 1024) - 1024.0 / 264.0).abs() < 1e-12);
        assert!((compressed_ratio(&cfg, 256 * 1024) - 3.879).abs() < 1e-3);
        assert!((compressed_ratio(&cfg.with_block_size(32), 32) - 3.2).abs() < 1e-12);
        assert_eq!(compressed_ratio(&CodecConfig::new(CodecKind::Identity), 1000), 1.0);
    }

    #[test]
    fn kind_ids_round_trip() {
        for kind in CodecKind::ALL {
            assert_eq!(CodecKind::from_id(kind.id()), Some(kind));
            assert_eq!(kind.name().parse::<CodecKind>().unwrap(), kind);
        }
        assert_eq!(CodecKind::from_id(9), None);
    }
}
