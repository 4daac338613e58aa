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

//! TOML scenario files for collective runs.
//!
//! ```toml
//! world_size = 8
//! tensor_length = 1048576
//! distribution = "gaussian"   # or "mixture", "file:<path>"
//! seed = 42
//! algorithm = "two-shot"      # or "ring", "tree", "all"
//!
//! [codec]
//! kind = "taco"
//! block_size = 256
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analysis::synthetic::{generate, Distribution, SyntheticSpec};
use crate::codec::CodecConfig;
use crate::error::{Result, TacoError};
use crate::tensor_file;

use super::{Algorithm, RankSet};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub world_size: usize,
    pub tensor_length: usize,
    #[serde(default = "default_distribution")]
    pub distribution: String,
    #[serde(default)]
    pub seed: u64,
    /// An algorithm name or `all`.
    #[serde(default = "default_algorithm")]
    pub algorithm: String,
    #[serde(default)]
    pub chunk_bytes: Option<usize>,
    #[serde(default)]
    pub codec: CodecConfig,
}

fn default_distribution() -> String {
    "gaussian".into()
}

fn default_algorithm() -> String {
    "all".into()
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Scenario> {
        let s: Scenario = toml::from_str(text).map_err(|e| TacoError::Scenario(e.message().to_string()))?;
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Scenario> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| TacoError::io(path, e))?;
        Scenario::parse(&text).map_err(|e| match e {
            TacoError::Scenario(msg) => TacoError::Scenario(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.world_size < 2 {
            return Err(TacoError::Scenario(format!(
                "world_size must be at least 2, got {}",
                self.world_size
            )));
        }
        if self.tensor_length == 0 {
            return Err(TacoError::Scenario("tensor_length must be at least 1".into()));
        }
        self.algorithms()?;
        self.codec.validate()
    }

    pub fn algorithms(&self) -> Result<Vec<Algorithm>> {
        if self.algorithm.eq_ignore_ascii_case("all") {
            return Ok(Algorithm::ALL.to_vec());
        }
        self.algorithm.parse().map(|a| vec![a]).map_err(TacoError::Scenario)
    }

    /// One input per rank. Synthetic ranks use `seed + rank`; a file must
    /// hold `world_size * tensor_length` values, split consecutively.
    pub fn inputs(&self) -> Result<Vec<Vec<f32>>> {
        rank_inputs(&self.distribution, self.world_size, self.tensor_length, self.seed)
    }

    pub fn rank_set(&self, algorithm: Algorithm) -> Result<RankSet> {
        Ok(RankSet::new(self.inputs()?, algorithm, self.codec).with_chunk_bytes(self.chunk_bytes))
    }
}

/// Builds per-rank inputs from `gaussian`, `mixture` or `file:<path>`.
pub fn rank_inputs(distribution: &str, world_size: usize, n: usize, seed: u64) -> Result<Vec<Vec<f32>>> {
    if let Some(path) = distribution.strip_prefix("file:") {
        let path = PathBuf::from(path);
        let all = tensor_file::read(&path)?;
        if all.len() != world_size * n {
            return Err(TacoError::Scenario(format!(
                "{} holds {} values, expected world_size * tensor_length = {}",
                path.display(),
                all.len(),
                world_size * n
            )));
        }
        return Ok(all.chunks(n).map(<[f32]>::to_vec).collect());
    }
    let dist = match distribution.to_ascii_lowercase().as_str() {
        "gaussian" => Distribution::Gaussian { sigma: 1.0 },
        "mixture" => Distribution::DEFAULT_MIXTURE,
        other => {
            return Err(TacoError::Scenario(format!(
                "unknown distribution `{other}` (expected gaussian, mixture or file:<path>)"
            )))
        }
    };
    (0..world_size)
        .map(|r| {
            generate(&SyntheticSpec {
                distribution: dist.clone(),
                n,
                seed: seed.wrapping_add(r as u64),
            })
        })
        .collect()
}
