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

//! In-process AllReduce simulation with compressed transfers.
//!
//! Ranks are plain vectors advanced in lock-step rounds. Every transfer goes
//! through compress, archive serialization, framing, parsing and
//! decompression. The same schedule run without a codec gives
//! [`AllReduceOutcome::exact`].

pub mod scenario;

use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use crate::analysis::metrics::{max_abs_error, relative_l2};
use crate::archive;
use crate::codec::{self, CodecConfig};
use crate::error::{Result, TacoError};
use crate::par::{self, Execution};

pub use scenario::Scenario;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    /// Compressed AlltoAll, local reduction, compressed AllGather.
    #[default]
    TwoShot,
    /// Ring reduce-scatter then ring allgather.
    Ring,
    /// Recursive halving reduce-scatter then recursive doubling allgather.
    Tree,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::TwoShot, Algorithm::Ring, Algorithm::Tree];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::TwoShot => "two-shot",
            Algorithm::Ring => "ring",
            Algorithm::Tree => "tree",
        }
    }

    /// Compression passes each rank performs for `world_size` ranks.
    pub fn expected_invocations(self, world_size: usize) -> usize {
        match self {
            Algorithm::TwoShot => 2,
            Algorithm::Ring => 2 * (world_size - 1),
            Algorithm::Tree => 2 * world_size.next_power_of_two().trailing_zeros() as usize,
        }
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "two-shot" | "twoshot" | "two_shot" => Ok(Algorithm::TwoShot),
            "ring" => Ok(Algorithm::Ring),
            "tree" => Ok(Algorithm::Tree),
            other => Err(format!("unknown algorithm `{other}` (expected two-shot, ring or tree)")),
        }
    }
}

/// One AllReduce problem: a tensor per rank plus how to reduce it.
#[derive(Clone, Debug)]
pub struct RankSet {
    pub inputs: Vec<Vec<f32>>,
    pub algorithm: Algorithm,
    pub codec: CodecConfig,
    /// Transport frame size in bytes. `None` sends each message as one frame.
    pub chunk_bytes: Option<usize>,
    pub execution: Execution,
}

impl RankSet {
    pub fn new(inputs: Vec<Vec<f32>>, algorithm: Algorithm, codec: CodecConfig) -> Self {
        RankSet {
            inputs,
            algorithm,
            codec,
            chunk_bytes: None,
            execution: Execution::default(),
        }
    }

    pub fn with_algorithm(mut self, algorithm: Algorithm) -> Self {
        self.algorithm = algorithm;
        self
    }

    pub fn with_chunk_bytes(mut self, chunk_bytes: Option<usize>) -> Self {
        self.chunk_bytes = chunk_bytes;
        self
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }

    pub fn world_size(&self) -> usize {
        self.inputs.len()
    }

    pub fn length(&self) -> usize {
        self.inputs.first().map_or(0, Vec::len)
    }

    pub fn validate(&self) -> Result<()> {
        if self.world_size() < 2 {
            return Err(TacoError::InvalidConfig(format!(
                "world size must be at least 2, got {}",
                self.world_size()
            )));
        }
        let n = self.length();
        if n == 0 {
            return Err(TacoError::EmptyInput);
        }
        for input in &self.inputs {
            if input.len() != n {
                return Err(TacoError::LengthMismatch {
                    expected: n,
                    actual: input.len(),
                });
            }
            if let Some(index) = input.iter().position(|v| !v.is_finite()) {
                return Err(TacoError::NonFiniteInput { index });
            }
        }
        if self.chunk_bytes == Some(0) {
            return Err(TacoError::InvalidConfig("chunk size must be at least 1 byte".into()));
        }
        self.codec.validate()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AllReduceOutcome {
    /// Rank 0's copy of the reduced tensor.
    pub result: Vec<f32>,
    /// Every rank's copy. Ring and Tree forward re-compressed data, so copies
    /// can differ under a lossy codec.
    pub per_rank: Vec<Vec<f32>>,
    /// The same schedule with uncompressed transfers.
    pub exact: Vec<f32>,
    /// Compression passes per rank (identical across ranks).
    pub compress_invocations: usize,
    /// Individual tensor compressions across all ranks.
    pub compress_calls: usize,
    /// Serialized bytes that crossed between distinct ranks.
    pub bytes_on_wire: u64,
    pub frames: u64,
}

impl AllReduceOutcome {
    /// Largest relative L2 error of any rank's copy against `exact`.
    pub fn worst_relative_l2(&self) -> f64 {
        self.per_rank
            .iter()
            .map(|r| relative_l2(&self.exact, r))
            .fold(0.0, f64::max)
    }

    pub fn worst_max_abs_error(&self) -> f64 {
        self.per_rank
            .iter()
            .map(|r| max_abs_error(&self.exact, r))
            .fold(0.0, f64::max)
    }
}

/// Elementwise `f32` sum in ascending rank order.
pub fn sequential_sum(inputs: &[Vec<f32>]) -> Vec<f32> {
    let mut acc = inputs.first().cloned().unwrap_or_default();
    for x in &inputs[1.min(inputs.len())..] {
        acc.iter_mut().zip(x).for_each(|(a, b)| *a += b);
    }
    acc
}

enum Packet {
    Plain(Vec<f32>),
    Archive(Vec<u8>),
}

/// Point-to-point transport with traffic counters.
struct Wire<'a> {
    codec: Option<&'a CodecConfig>,
    chunk_bytes: Option<usize>,
    exec: Execution,
    calls: AtomicU64,
    bytes: AtomicU64,
    frames: AtomicU64,
}

impl<'a> Wire<'a> {
    fn new(codec: Option<&'a CodecConfig>, chunk_bytes: Option<usize>, exec: Execution) -> Self {
        Wire {
            codec,
            chunk_bytes,
            exec,
            calls: AtomicU64::new(0),
            bytes: AtomicU64::new(0),
            frames: AtomicU64::new(0),
        }
    }

    fn pack(&self, values: &[f32]) -> Result<Packet> {
        match self.codec {
            None => Ok(Packet::Plain(values.to_vec())),
            Some(cfg) => {
                self.calls.fetch_add(1, Ordering::Relaxed);
                let ct = codec::compress_with(values, cfg, self.exec)?;
                Ok(Packet::Archive(archive::to_bytes(&ct)))
            }
        }
    }

    fn deliver(&self, packet: &Packet, src: usize, dst: usize) -> Result<Vec<f32>> {
        let bytes = match packet {
            Packet::Plain(v) => return Ok(v.clone()),
            Packet::Archive(bytes) => bytes,
        };
        let received = if src == dst {
            bytes.clone()
        } else {
            let frame = self.chunk_bytes.unwrap_or(bytes.len()).max(1);
            let frames: Vec<&[u8]> = bytes.chunks(frame).collect();
            self.bytes.fetch_add(bytes.len() as u64, Ordering::Relaxed);
            self.frames.fetch_add(frames.len() as u64, Ordering::Relaxed);
            frames.concat()
        };
        codec::decompress_with(&archive::from_bytes(&received)?, self.exec)
    }
}

fn collect<T>(items: Vec<Result<T>>) -> Result<Vec<T>> {
    items.into_iter().collect()
}

fn add_into(acc: &mut [f32], x: &[f32]) {
    acc.iter_mut().zip(x).for_each(|(a, b)| *a += b);
}

/// Per-rank tensors padded to a multiple of `parts`, viewed as `parts` chunks.
struct Layout {
    n: usize,
    chunk: usize,
}

impl Layout {
    fn new(n: usize, parts: usize) -> Self {
        Layout {
            n,
            chunk: n.div_ceil(parts),
        }
    }

    fn range(&self, c: usize) -> std::ops::Range<usize> {
        c * self.chunk..(c + 1) * self.chunk
    }

    fn segment(&self, first: usize, count: usize) -> std::ops::Range<usize> {
        first * self.chunk..(first + count) * self.chunk
    }

    fn pad(&self, x: &[f32], parts: usize) -> Vec<f32> {
        let mut v = vec![0f32; self.chunk * parts];
        v[..x.len()].copy_from_slice(x);
        v
    }
}

fn two_shot(inputs: &[Vec<f32>], wire: &Wire) -> Result<(Vec<Vec<f32>>, usize)> {
    let p = inputs.len();
    let layout = Layout::new(inputs[0].len(), p);
    let padded: Vec<Vec<f32>> = inputs.iter().map(|x| layout.pad(x, p)).collect();
    let ranks: Vec<usize> = (0..p).collect();

    // Phase 1: each rank compresses all of its shards in one pass.
    let outgoing = collect(par::map(wire.exec, &ranks, |&r| {
        (0..p)
            .map(|dst| wire.pack(&padded[r][layout.range(dst)]))
            .collect::<Result<Vec<_>>>()
    }))?;
    // Rank `dst` reduces shard `dst` in ascending sender order.
    let reduced = collect(par::map(wire.exec, &ranks, |&dst| -> Result<Vec<f32>> {
        let mut acc = wire.deliver(&outgoing[0][dst], 0, dst)?;
        for (src, packets) in outgoing.iter().enumerate().skip(1) {
            add_into(&mut acc, &wire.deliver(&packets[dst], src, dst)?);
        }
        Ok(acc)
    }))?;

    // Phase 2: compress the reduced shard once, every rank decodes every shard.
    let gathered = collect(par::map(wire.exec, &ranks, |&r| wire.pack(&reduced[r])))?;
    let per_rank = collect(par::map(wire.exec, &ranks, |&dst| -> Result<Vec<f32>> {
        let mut out = Vec::with_capacity(layout.chunk * p);
        for (src, packet) in gathered.iter().enumerate() {
            out.extend(wire.deliver(packet, src, dst)?);
        }
        out.truncate(layout.n);
        Ok(out)
    }))?;
    Ok((per_rank, 2))
}

fn ring(inputs: &[Vec<f32>], wire: &Wire) -> Result<(Vec<Vec<f32>>, usize)> {
    let p = inputs.len();
    let layout = Layout::new(inputs[0].len(), p);
    let mut state: Vec<Vec<f32>> = inputs.iter().map(|x| layout.pad(x, p)).collect();
    let ranks: Vec<usize> = (0..p).collect();

    // Reduce-scatter: at step s rank r forwards chunk (r - s) to rank r + 1.
    for s in 0..p - 1 {
        let sent = collect(par::map(wire.exec, &ranks, |&r| {
            wire.pack(&state[r][layout.range((r + p - s) % p)])
        }))?;
        let next = collect(par::map(wire.exec, &ranks, |&r| -> Result<Vec<f32>> {
            let src = (r + p - 1) % p;
            let c = (src + p - s) % p;
            let mut acc = wire.deliver(&sent[src], src, r)?;
            add_into(&mut acc, &state[r][layout.range(c)]);
            let mut mine = state[r].clone();
            mine[layout.range(c)].copy_from_slice(&acc);
            Ok(mine)
        }))?;
        state = next;
    }
    // Rank r now owns the reduced chunk (r + 1); allgather around the ring.
    for s in 0..p - 1 {
        let sent = collect(par::map(wire.exec, &ranks, |&r| {
            wire.pack(&state[r][layout.range((r + 1 + p - s) % p)])
        }))?;
        let next = collect(par::map(wire.exec, &ranks, |&r| -> Result<Vec<f32>> {
            let src = (r + p - 1) % p;
            let c = (src + 1 + p - s) % p;
            let mut mine = state[r].clone();
            mine[layout.range(c)].copy_from_slice(&wire.deliver(&sent[src], src, r)?);
            Ok(mine)
        }))?;
        state = next;
    }
    for x in &mut state {
        x.truncate(layout.n);
    }
    Ok((state, 2 * (p - 1)))
}

fn tree(inputs: &[Vec<f32>], wire: &Wire) -> Result<(Vec<Vec<f32>>, usize)> {
    let p = inputs.len();
    let q = p.next_power_of_two();
    let layout = Layout::new(inputs[0].len(), q);
    // Ghost ranks beyond `p` contribute zeros.
    let mut state: Vec<Vec<f32>> = (0..q)
        .map(|r| {
            inputs
                .get(r)
                .map_or_else(|| vec![0f32; layout.chunk * q], |x| layout.pad(x, q))
        })
        .collect();
    let ranks: Vec<usize> = (0..q).collect();
    let mut rounds = 0;

    // Recursive halving: with distance d, rank r holds the 2d chunks starting
    // at r & !(2d - 1) and keeps the half containing chunk r.
    let mut d = q / 2;
    while d >= 1 {
        let keep = |r: usize| r & !(d - 1);
        let give = |r: usize| keep(r ^ d);
        let sent = collect(par::map(wire.exec, &ranks, |&r| {
            wire.pack(&state[r][layout.segment(give(r), d)])
        }))?;
        let next = collect(par::map(wire.exec, &ranks, |&r| -> Result<Vec<f32>> {
            let partner = r ^ d;
            let range = layout.segment(keep(r), d);
            let recv = wire.deliver(&sent[partner], partner, r)?;
            let own = &state[r][range.clone()];
            let (lo, hi) = if r < partner {
                (own, &recv[..])
            } else {
                (&recv[..], own)
            };
            let mut mine = state[r].clone();
            mine[range]
                .iter_mut()
                .zip(lo.iter().zip(hi))
                .for_each(|(m, (a, b))| *m = a + b);
            Ok(mine)
        }))?;
        state = next;
        rounds += 1;
        d /= 2;
    }
    // Recursive doubling: rank r holds the d chunks starting at r & !(d - 1).
    let mut d = 1;
    while d < q {
        let held = |r: usize| r & !(d - 1);
        let sent = collect(par::map(wire.exec, &ranks, |&r| {
            wire.pack(&state[r][layout.segment(held(r), d)])
        }))?;
        let next = collect(par::map(wire.exec, &ranks, |&r| -> Result<Vec<f32>> {
            let partner = r ^ d;
            let mut mine = state[r].clone();
            mine[layout.segment(held(partner), d)].copy_from_slice(&wire.deliver(&sent[partner], partner, r)?);
            Ok(mine)
        }))?;
        state = next;
        rounds += 1;
        d *= 2;
    }
    state.truncate(p);
    for x in &mut state {
        x.truncate(layout.n);
    }
    Ok((state, rounds))
}

fn run(inputs: &[Vec<f32>], algorithm: Algorithm, wire: &Wire) -> Result<(Vec<Vec<f32>>, usize)> {
    match algorithm {
        Algorithm::TwoShot => two_shot(inputs, wire),
        Algorithm::Ring => ring(inputs, wire),
        Algorithm::Tree => tree(inputs, wire),
    }
}

/// Runs one AllReduce and its uncompressed reference.
pub fn allreduce(rs: &RankSet) -> Result<AllReduceOutcome> {
    rs.validate()?;
    let reference = Wire::new(None, None, rs.execution);
    let (exact, _) = run(&rs.inputs, rs.algorithm, &reference)?;

    let wire = Wire::new(Some(&rs.codec), rs.chunk_bytes, rs.execution);
    let (per_rank, compress_invocations) = run(&rs.inputs, rs.algorithm, &wire)?;
    Ok(AllReduceOutcome {
        result: per_rank[0].clone(),
        per_rank,
        exact: exact.into_iter().next().unwrap_or_default(),
        compress_invocations,
        compress_calls: wire.calls.load(Ordering::Relaxed) as usize,
        bytes_on_wire: wire.bytes.load(Ordering::Relaxed),
        frames: wire.frames.load(Ordering::Relaxed),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct FrequencyRow {
    pub algorithm: Algorithm,
    /// Worst rank's relative L2 error against `exact`.
    pub relative_l2: f64,
    pub max_abs_error: f64,
    pub compress_invocations: usize,
    pub compress_calls: usize,
    pub bytes_on_wire: u64,
}

/// Runs the same inputs and codec under every algorithm.
pub fn error_vs_frequency(rs: &RankSet) -> Result<Vec<FrequencyRow>> {
    Algorithm::ALL
        .iter()
        .map(|&algorithm| {
            let out = allreduce(&rs.clone().with_algorithm(algorithm))?;
            Ok(FrequencyRow {
                algorithm,
                relative_l2: out.worst_relative_l2(),
                max_abs_error: out.worst_max_abs_error(),
                compress_invocations: out.compress_invocations,
                compress_calls: out.compress_calls,
                bytes_on_wire: out.bytes_on_wire,
            })
        })
        .collect()
}
