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

//! Error metrics, synthetic tensors and the desk-scale experiment harnesses.

pub mod experiments;
pub mod metrics;
pub mod report;
pub mod synthetic;

pub use experiments::{
    ash_int8_round_trip, block_size_sweep, compare_codecs, hadamard_values, post_ash_values, reshaping_summary,
    round_trip, CodecRow, ReshapingSummary, SweepRow,
};
pub use metrics::{
    distribution_stats, error_report, excess_kurtosis, fraction_within, max_abs_error, mse, relative_l2,
    zero_collapse_fraction, DistributionStats, ErrorReport, Histogram,
};
pub use report::ReportFormat;
pub use synthetic::{generate, Distribution, SyntheticSpec};
