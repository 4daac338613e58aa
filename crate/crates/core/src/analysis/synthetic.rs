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

//! Deterministic synthetic tensors.
//!
//! `NearZeroMixture` stands in for captured tensor-parallel activations: a
//! dense cluster around zero plus a small wide tail.

use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TacoError};
use crate::tensor_file;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Distribution {
    Gaussian {
        sigma: f32,
    },
    NearZeroMixture {
        dense_sigma: f32,
        tail_sigma: f32,
        tail_fraction: f64,
    },
    /// A `TACOTNSR` file, or a headerless `f32` dump when `raw` is set.
    File {
        path: PathBuf,
        #[serde(default)]
        raw: bool,
    },
}

impl Distribution {
    pub const DEFAULT_MIXTURE: Distribution = Distribution::NearZeroMixture {
        dense_sigma: 1e-3,
        tail_sigma: 1.0,
        tail_fraction: 0.01,
    };
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub distribution: Distribution,
    /// Element count; ignored for files.
    pub n: usize,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn gaussian(n: usize, seed: u64) -> Self {
        SyntheticSpec {
            distribution: Distribution::Gaussian { sigma: 1.0 },
            n,
            seed,
        }
    }

    pub fn mixture(n: usize, seed: u64) -> Self {
        SyntheticSpec {
            distribution: Distribution::DEFAULT_MIXTURE,
            n,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(TacoError::InvalidConfig(msg));
        match &self.distribution {
            Distribution::File { .. } => return Ok(()),
            Distribution::Gaussian { sigma } if !(*sigma > 0.0 && sigma.is_finite()) => {
                return bad(format!("sigma must be positive, got {sigma}"));
            }
            Distribution::NearZeroMixture {
                dense_sigma,
                tail_sigma,
                tail_fraction,
            } => {
                if !(*dense_sigma > 0.0 && dense_sigma.is_finite() && *tail_sigma > 0.0 && tail_sigma.is_finite()) {
                    return bad(format!(
                        "mixture sigmas must be positive, got {dense_sigma} and {tail_sigma}"
                    ));
                }
                if !(0.0..=1.0).contains(tail_fraction) {
                    return bad(format!("tail fraction must lie in [0, 1], got {tail_fraction}"));
                }
            }
            _ => {}
        }
        if self.n == 0 {
            return bad("element count must be at least 1".into());
        }
        Ok(())
    }
}

pub fn generate(spec: &SyntheticSpec) -> Result<Vec<f32>> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    fn normal(rng: &mut ChaCha8Rng, sigma: f32) -> f32 {
        rng.sample::<f32, _>(StandardNormal) * sigma
    }
    Ok(match &spec.distribution {
        Distribution::Gaussian { sigma } => (0..spec.n).map(|_| normal(&mut rng, *sigma)).collect(),
        Distribution::NearZeroMixture {
            dense_sigma,
            tail_sigma,
            tail_fraction,
        } => {
            let tail = ((spec.n as f64) * tail_fraction).round() as usize;
            let mut x: Vec<f32> = Vec::with_capacity(spec.n);
            x.extend((0..spec.n - tail).map(|_| normal(&mut rng, *dense_sigma)));
            x.extend((0..tail).map(|_| normal(&mut rng, *tail_sigma)));
            x.shuffle(&mut rng);
            x
        }
        Distribution::File { path, raw } => {
            if *raw {
                tensor_file::read_raw(path)?
            } else {
                tensor_file::read(path)?
            }
        }
    })
}
