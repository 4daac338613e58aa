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

//! CSV and JSON report emission.
//!
//! CSV uses one header row and RFC 4180 quoting; JSON is an array of objects
//! with the same fields. Undefined values (kurtosis of a constant error,
//! relative error against an all-zero reference) are empty in CSV and `null`
//! in JSON.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::codec::PayloadEncoding;
use crate::collective::FrequencyRow;
use crate::error::{Result, TacoError};

use super::experiments::{CodecRow, SweepRow};
use super::metrics::Histogram;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ReportFormat {
    #[default]
    Csv,
    Json,
}

impl ReportFormat {
    /// `.json` selects JSON, anything else CSV.
    pub fn from_path(path: &Path) -> ReportFormat {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("json") => ReportFormat::Json,
            _ => ReportFormat::Csv,
        }
    }
}

impl std::str::FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(format!("unknown report format `{other}` (expected csv or json)")),
        }
    }
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CodecRecord {
    pub label: String,
    pub codec: String,
    pub format: String,
    pub block_size: usize,
    pub mse: f64,
    pub relative_l2: Option<f64>,
    pub max_abs_error: f64,
    pub zero_collapse_fraction: f64,
    pub error_kurtosis: Option<f64>,
    pub ratio: f64,
}

impl From<&CodecRow> for CodecRecord {
    fn from(row: &CodecRow) -> Self {
        CodecRecord {
            label: row.label.clone(),
            codec: row.config.kind.name().to_string(),
            format: match row.config.encoding() {
                PayloadEncoding::Fp8(v) => v.name(),
                PayloadEncoding::Int8 => "int8",
                PayloadEncoding::Raw => "f32",
            }
            .to_string(),
            block_size: row.config.block_size,
            mse: row.report.mse,
            relative_l2: finite(row.report.relative_l2),
            max_abs_error: row.report.max_abs_error,
            zero_collapse_fraction: row.report.zero_collapse_fraction,
            error_kurtosis: row.report.kurtosis,
            ratio: row.ratio,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRecord {
    pub block_size: usize,
    pub mse: f64,
    pub relative_l2: Option<f64>,
    pub max_abs_error: f64,
    pub zero_collapse_fraction: f64,
    pub error_kurtosis: Option<f64>,
    pub ratio: f64,
}

impl From<&SweepRow> for SweepRecord {
    fn from(row: &SweepRow) -> Self {
        SweepRecord {
            block_size: row.block_size,
            mse: row.report.mse,
            relative_l2: finite(row.report.relative_l2),
            max_abs_error: row.report.max_abs_error,
            zero_collapse_fraction: row.report.zero_collapse_fraction,
            error_kurtosis: row.report.kurtosis,
            ratio: row.ratio,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CollectiveRecord {
    pub algorithm: String,
    pub world_size: usize,
    pub length: usize,
    pub codec: String,
    pub relative_l2: Option<f64>,
    pub max_abs_error: f64,
    pub compress_invocations: usize,
    pub compress_calls: usize,
    pub bytes_on_wire: u64,
}

impl CollectiveRecord {
    pub fn new(row: &FrequencyRow, world_size: usize, length: usize, codec: &str) -> Self {
        CollectiveRecord {
            algorithm: row.algorithm.name().to_string(),
            world_size,
            length,
            codec: codec.to_string(),
            relative_l2: finite(row.relative_l2),
            max_abs_error: row.max_abs_error,
            compress_invocations: row.compress_invocations,
            compress_calls: row.compress_calls,
            bytes_on_wire: row.bytes_on_wire,
        }
    }
}

#[derive(Serialize)]
struct HistogramRecord {
    bin_left_edge: f64,
    count: u64,
}

fn report_err(e: impl std::fmt::Display) -> TacoError {
    TacoError::Report(e.to_string())
}

/// Writes `records` as CSV or a JSON array.
pub fn emit<T: Serialize, W: Write>(records: &[T], format: ReportFormat, mut out: W) -> Result<()> {
    match format {
        ReportFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for r in records {
                w.serialize(r).map_err(report_err)?;
            }
            w.flush().map_err(report_err)?;
        }
        ReportFormat::Json => {
            serde_json::to_writer_pretty(&mut out, records).map_err(report_err)?;
            out.write_all(b"\n").map_err(report_err)?;
        }
    }
    Ok(())
}

/// Two-column `bin_left_edge,count` CSV.
pub fn emit_histogram<W: Write>(hist: &Histogram, out: W) -> Result<()> {
    let rows: Vec<HistogramRecord> = hist
        .rows()
        .map(|(bin_left_edge, count)| HistogramRecord { bin_left_edge, count })
        .collect();
    emit(&rows, ReportFormat::Csv, out)
}

pub fn to_string<T: Serialize>(records: &[T], format: ReportFormat) -> Result<String> {
    let mut buf = Vec::new();
    emit(records, format, &mut buf)?;
    String::from_utf8(buf).map_err(report_err)
}
