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

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, TacoError>;

#[derive(Debug, Error)]
pub enum TacoError {
    #[error("block size must be a power of two between 2 and 32768, got {0}")]
    InvalidBlockSize(usize),

    #[error("transform length must be a power of two, got {0}")]
    NonPowerOfTwoLength(usize),

    #[error("input tensor is empty")]
    EmptyInput,

    #[error("input contains a non-finite value at index {index}")]
    NonFiniteInput { index: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("corrupt compressed tensor: {0}")]
    Corrupt(String),

    #[error("bad magic: expected {expected:?}")]
    BadMagic { expected: &'static str },

    #[error("unexpected end of {what}")]
    UnexpectedEof { what: &'static str },

    #[error("unsupported tensor file version {0}")]
    UnsupportedVersion(u32),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid scenario: {0}")]
    Scenario(String),

    #[error("report emission failed: {0}")]
    Report(String),
}

impl TacoError {
    /// Short stable identifier, printed by the CLI as `error[<code>]`.
    pub fn code(&self) -> &'static str {
        match self {
            TacoError::InvalidBlockSize(_) => "block-size",
            TacoError::NonPowerOfTwoLength(_) => "transform-length",
            TacoError::EmptyInput => "empty-input",
            TacoError::NonFiniteInput { .. } => "non-finite",
            TacoError::InvalidConfig(_) => "config",
            TacoError::LengthMismatch { .. } => "length-mismatch",
            TacoError::Corrupt(_) => "corrupt",
            TacoError::BadMagic { .. } => "bad-magic",
            TacoError::UnexpectedEof { .. } => "truncated",
            TacoError::UnsupportedVersion(_) => "version",
            TacoError::Io { .. } => "io",
            TacoError::Scenario(_) => "scenario",
            TacoError::Report(_) => "report",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        TacoError::Io {
            path: path.into(),
            source,
        }
    }
}
