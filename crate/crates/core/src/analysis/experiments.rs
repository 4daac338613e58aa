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

use crate::codec::{self, ash_forward, compressed_ratio, CodecConfig};
use crate::error::{Result, TacoError};
use crate::par::{self, Execution};
use crate::transform::{self, fwht_in_place};

use super::metrics::{error_report, excess_kurtosis, ErrorReport};

pub fn round_trip(x: &[f32], cfg: &CodecConfig) -> Result<Vec<f32>> {
    codec::decompress(&codec::compress(x, cfg)?)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CodecRow {
    pub label: String,
    pub config: CodecConfig,
    pub report: ErrorReport,
    pub ratio: f64,
}

/// Round-trips `x` through every config, in the given order.
pub fn compare_codecs(x: &[f32], configs: &[CodecConfig], bins: usize) -> Result<Vec<CodecRow>> {
    if configs.is_empty() {
        return Err(TacoError::InvalidConfig("no codecs to compare".into()));
    }
    configs
        .iter()
        .map(|cfg| {
            let y = round_trip(x, cfg)?;
            Ok(CodecRow {
                label: cfg.label(),
                config: *cfg,
                report: error_report(x, &y, bins)?,
                ratio: compressed_ratio(cfg, x.len()),
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub block_size: usize,
    pub report: ErrorReport,
    pub ratio: f64,
}

/// Round-trip error and compression ratio per block size.
pub fn block_size_sweep(x: &[f32], sizes: &[usize], base: &CodecConfig, bins: usize) -> Result<Vec<SweepRow>> {
    if sizes.is_empty() {
        return Err(TacoError::InvalidConfig("no block sizes to sweep".into()));
    }
    for &b in sizes {
        transform::validate_block_size(b)?;
    }
    par::map(Execution::default(), sizes, |&b| {
        let cfg = base.with_block_size(b);
        let y = round_trip(x, &cfg)?;
        Ok(SweepRow {
            block_size: b,
            report: error_report(x, &y, bins)?,
            ratio: compressed_ratio(&cfg, x.len()),
        })
    })
    .into_iter()
    .collect()
}

/// The values the FP8 encoder sees: `Z_k / s_k` for every (padded) block.
pub fn post_ash_values(x: &[f32], cfg: &CodecConfig) -> Result<Vec<f32>> {
    cfg.validate()?;
    let b = cfg.block_size;
    let q_max = cfg.fp8().q_max;
    let blocks = par::map_chunks(Execution::default(), x, b, |_, chunk| -> Result<Vec<f32>> {
        let mut buf = vec![0f32; b];
        buf[..chunk.len()].copy_from_slice(chunk);
        ash_forward(&mut buf, cfg.target_energy, cfg.stability_epsilon)?;
        let m = codec::max_abs(&buf);
        if m > 0.0 {
            let s = m / q_max;
            buf.iter_mut().for_each(|v| *v /= s);
        }
        Ok(buf)
    });
    flatten(blocks)
}

/// Plain orthonormal Hadamard per block, without any rescaling.
pub fn hadamard_values(x: &[f32], block_size: usize) -> Result<Vec<f32>> {
    transform::validate_block_size(block_size)?;
    let blocks = par::map_chunks(Execution::default(), x, block_size, |_, chunk| -> Result<Vec<f32>> {
        let mut buf = vec![0f32; block_size];
        buf[..chunk.len()].copy_from_slice(chunk);
        fwht_in_place(&mut buf)?;
        Ok(buf)
    });
    flatten(blocks)
}

fn flatten(blocks: Vec<Result<Vec<f32>>>) -> Result<Vec<f32>> {
    let mut out = Vec::new();
    for b in blocks {
        out.extend(b?);
    }
    Ok(out)
}

/// Excess kurtosis before and after each transform stage.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReshapingSummary {
    pub raw: Option<f64>,
    pub hadamard: Option<f64>,
    pub post_ash: Option<f64>,
}

pub fn reshaping_summary(x: &[f32], cfg: &CodecConfig) -> Result<ReshapingSummary> {
    Ok(ReshapingSummary {
        raw: excess_kurtosis(x),
        hadamard: excess_kurtosis(&hadamard_values(x, cfg.block_size)?),
        post_ash: excess_kurtosis(&post_ash_values(x, cfg)?),
    })
}

/// Ablation only: the adaptive rotation followed by per-block symmetric INT8
/// (`max|Z_k| / 127`) instead of FP8.
pub fn ash_int8_round_trip(x: &[f32], cfg: &CodecConfig, bins: usize) -> Result<ErrorReport> {
    cfg.validate()?;
    let b = cfg.block_size;
    let blocks = par::map_chunks(Execution::default(), x, b, |_, chunk| -> Result<Vec<f32>> {
        let mut buf = vec![0f32; b];
        buf[..chunk.len()].copy_from_slice(chunk);
        let alpha = ash_forward(&mut buf, cfg.target_energy, cfg.stability_epsilon)?;
        let m = codec::max_abs(&buf);
        let delta = if m > 0.0 { m / 127.0 } else { 1.0 };
        buf.iter_mut()
            .for_each(|v| *v = (*v / delta).round_ties_even().clamp(-127.0, 127.0) * delta);
        fwht_in_place(&mut buf)?;
        buf.iter_mut().for_each(|v| *v /= alpha);
        buf.truncate(chunk.len());
        Ok(buf)
    });
    let y = flatten(blocks)?;
    error_report(x, &y, bins)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::synthetic::{generate, SyntheticSpec};
    use crate::codec::CodecKind;
    use crate::fp8::Fp8Format;

    #[test]
    fn identity_has_zero_error() {
        let x = generate(&SyntheticSpec::gaussian(3000, 1)).unwrap();
        let rows = compare_codecs(&x, &[CodecConfig::new(CodecKind::Identity)], 16).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].report.mse, 0.0);
        assert_eq!(rows[0].ratio, 1.0);
        assert!(compare_codecs(&x, &[], 16).is_err());
    }

    #[test]
    fn rows_follow_input_order() {
        let x = generate(&SyntheticSpec::gaussian(4096, 2)).unwrap();
        let cfgs = [
            CodecConfig::new(CodecKind::Int8Uniform),
            CodecConfig::new(CodecKind::Taco),
            CodecConfig::new(CodecKind::DirectFp8),
        ];
        let rows = compare_codecs(&x, &cfgs, 8).unwrap();
        let kinds: Vec<_> = rows.iter().map(|r| r.config.kind).collect();
        assert_eq!(
            kinds,
            vec![CodecKind::Int8Uniform, CodecKind::Taco, CodecKind::DirectFp8]
        );
        assert!(rows.iter().all(|r| r.report.histogram.total() == 4096));
    }

    #[test]
    fn e4m3_beats_e5m2() {
        let x = generate(&SyntheticSpec::mixture(1 << 18, 3)).unwrap();
        let base = CodecConfig::default();
        let rows = compare_codecs(&x, &[base, base.with_format(crate::fp8::Fp8Variant::E5M2)], 8).unwrap();
        assert!(rows[0].report.relative_l2 < rows[1].report.relative_l2);
    }

    #[test]
    fn sweep_shape_and_ratio() {
        let x = generate(&SyntheticSpec::gaussian(1 << 14, 4)).unwrap();
        let rows = block_size_sweep(&x, &[32, 64, 128, 256, 512], &CodecConfig::default(), 8).unwrap();
        assert_eq!(rows.len(), 5);
        assert!(rows.windows(2).all(|w| w[0].ratio < w[1].ratio));
        assert!(rows.iter().all(|r| r.ratio < 4.0));
        let single = block_size_sweep(&x, &[64], &CodecConfig::default(), 8).unwrap();
        assert_eq!(single.len(), 1);
        assert!(block_size_sweep(&x, &[48], &CodecConfig::default(), 8).is_err());
    }

    #[test]
    fn post_ash_values_fill_fp8_range() {
        let x = generate(&SyntheticSpec::mixture(1 << 14, 5)).unwrap();
        let z = post_ash_values(&x, &CodecConfig::default()).unwrap();
        assert_eq!(z.len(), x.len());
        for block in z.chunks(256) {
            let m = block.iter().fold(0f32, |m, v| m.max(v.abs()));
            assert!((m - 448.0).abs() < 1e-3);
        }
    }

    #[test]
    fn per_block_fp8_errors_respect_half_ulp() {
        let x = generate(&SyntheticSpec::mixture(1 << 16, 6)).unwrap();
        let cfg = CodecConfig::new(CodecKind::DirectFp8Block);
        let ct = codec::compress(&x, &cfg).unwrap();
        let y = codec::decompress(&ct).unwrap();
        let fmt = Fp8Format::E4M3;
        for (i, (a, b)) in x.iter().zip(&y).enumerate() {
            let s = ct.blocks[i / 256].scale;
            let bound = s * fmt.ulp(a / s) / 2.0 + 1e-7;
            assert!((a - b).abs() <= bound, "element {i}: {a} vs {b}, bound {bound}");
        }
    }

    #[test]
    fn ash_int8_ablation_runs() {
        let x = generate(&SyntheticSpec::gaussian(4096, 7)).unwrap();
        let r = ash_int8_round_trip(&x, &CodecConfig::default(), 8).unwrap();
        assert!(r.relative_l2 < 0.05);
    }
}
