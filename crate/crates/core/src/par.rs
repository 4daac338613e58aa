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

//! Block-level data parallelism.
//!
//! Every parallel loop in the crate goes through these helpers so that the
//! `parallel` feature can swap rayon out for plain iterators. Results are
//! always collected in input order.

/// How independent work items are scheduled.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Execution {
    /// Single-threaded, in order. The reference mode.
    Sequential,
    /// Rayon work stealing when the `parallel` feature is enabled,
    /// otherwise identical to `Sequential`.
    #[default]
    Parallel,
}

impl Execution {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

/// Maps `f` over `chunk`-sized pieces of `data` (the last may be shorter).
pub(crate) fn map_chunks<T, R, F>(exec: Execution, data: &[T], chunk: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(usize, &[T]) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        return data.par_chunks(chunk).enumerate().map(|(i, c)| f(i, c)).collect();
    }
    let _ = exec;
    data.chunks(chunk).enumerate().map(|(i, c)| f(i, c)).collect()
}

/// Runs `f` over `chunk`-sized mutable pieces of `out`, zipped with `items`.
pub(crate) fn zip_chunks_mut<T, U, F>(exec: Execution, out: &mut [T], chunk: usize, items: &[U], f: F)
where
    T: Send,
    U: Sync,
    F: Fn(&mut [T], &U) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        out.par_chunks_mut(chunk)
            .zip(items.par_iter())
            .for_each(|(o, it)| f(o, it));
        return;
    }
    let _ = exec;
    out.chunks_mut(chunk).zip(items).for_each(|(o, it)| f(o, it));
}

/// Maps `f` over `items`, preserving order.
pub(crate) fn map<T, R, F>(exec: Execution, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        return items.par_iter().map(f).collect();
    }
    let _ = exec;
    items.iter().map(f).collect()
}
