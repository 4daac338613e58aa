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

//! TACO: Adaptive Scale-Hadamard transform plus dual-scale FP8 quantization
//! for tensor-parallel communication, with a simulated compressed AllReduce
//! and an error-analysis harness.
//!
//! ```
//! use taco_core::{compress, decompress, CodecConfig};
//!
//! let x: Vec<f32> = (0..1000).map(|i| ((i as f32) * 0.37).sin()).collect();
//! let ct = compress(&x, &CodecConfig::default()).unwrap();
//! let y = decompress(&ct).unwrap();
//! assert_eq!(y.len(), x.len());
//! ```

pub mod analysis;
pub mod archive;
pub mod codec;
pub mod collective;
pub mod error;
pub mod fp8;
pub mod par;
pub mod tensor_file;
pub mod transform;

pub use codec::{
    compress, compress_with, compressed_ratio, decompress, decompress_with, CodecConfig, CodecKind, CompressedBlock,
    CompressedTensor, PayloadEncoding,
};
pub use collective::{allreduce, error_vs_frequency, Algorithm, AllReduceOutcome, RankSet};
pub use error::{Result, TacoError};
pub use fp8::{fp8_decode, fp8_encode, fp8_ulp, Fp8Code, Fp8Format, Fp8Variant, Overflow};
pub use par::Execution;
pub use transform::{fwht_inverse, fwht_orthonormal};
