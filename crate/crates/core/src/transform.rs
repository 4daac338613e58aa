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

//! Block partitioning and the orthonormal fast Walsh-Hadamard transform.

use crate::error::{Result, TacoError};

pub const MIN_BLOCK_SIZE: usize = 2;
pub const MAX_BLOCK_SIZE: usize = 1 << 15;

/// One contiguous slice of a flat tensor, zero padded to the block size.
#[derive(Clone, Debug, PartialEq)]
pub struct Block {
    pub index: usize,
    pub values: Vec<f32>,
    /// Number of real elements before padding.
    pub valid_length: usize,
}

impl Block {
    pub fn valid(&self) -> &[f32] {
        &self.values[..self.valid_length]
    }
}

pub fn validate_block_size(block_size: usize) -> Result<()> {
    if !block_size.is_power_of_two() || !(MIN_BLOCK_SIZE..=MAX_BLOCK_SIZE).contains(&block_size) {
        return Err(TacoError::InvalidBlockSize(block_size));
    }
    Ok(())
}

/// Number of blocks needed to cover `len` elements.
pub fn block_count(len: usize, block_size: usize) -> usize {
    len.div_ceil(block_size)
}

/// Splits `x` into `ceil(N / B)` blocks; the last one is zero padded.
pub fn partition(x: &[f32], block_size: usize) -> Result<Vec<Block>> {
    validate_block_size(block_size)?;
    if x.is_empty() {
        return Err(TacoError::EmptyInput);
    }
    Ok(x.chunks(block_size)
        .enumerate()
        .map(|(index, chunk)| {
            let mut values = vec![0.0; block_size];
            values[..chunk.len()].copy_from_slice(chunk);
            Block {
                index,
                values,
                valid_length: chunk.len(),
            }
        })
        .collect())
}

/// In-place `(1/sqrt(B)) * H_B * v`.
///
/// Unnormalized radix-2 butterflies followed by a single scaling pass.
pub fn fwht_in_place(v: &mut [f32]) -> Result<()> {
    let n = v.len();
    if !n.is_power_of_two() {
        return Err(TacoError::NonPowerOfTwoLength(n));
    }
    let mut h = 1;
    while h < n {
        for pair in v.chunks_exact_mut(2 * h) {
            let (lo, hi) = pair.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = x + y;
                *b = x - y;
            }
        }
        h *= 2;
    }
    let norm = (1.0 / (n as f64).sqrt()) as f32;
    if n > 1 {
        v.iter_mut().for_each(|x| *x *= norm);
    }
    Ok(())
}

pub fn fwht_orthonormal(v: &[f32]) -> Result<Vec<f32>> {
    let mut out = v.to_vec();
    fwht_in_place(&mut out)?;
    Ok(out)
}

/// The orthonormal Hadamard matrix is symmetric and orthogonal, hence its own
/// inverse.
pub fn fwht_inverse(v: &[f32]) -> Result<Vec<f32>> {
    fwht_orthonormal(v)
}
