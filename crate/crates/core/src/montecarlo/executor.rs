//! Replicate scheduling and deterministic, order-fixed aggregation.
//!
//! Replicates are grouped into chunks of consecutive indices whose size depends
//! only on the replicate count ([`chunk_size`]). Each chunk is reduced
//! sequentially in index order, and chunks are merged in chunk order, so
//! results do not depend on the number of workers.

use rayon::prelude::*;

use crate::error::{Error, Result};

const MIN_CHUNK: usize = 32;
const TARGET_CHUNKS: usize = 64;

/// Replicates per chunk; bounded so that at most about 64 partials are alive.
pub fn chunk_size(replicates: usize) -> usize {
    replicates.div_ceil(TARGET_CHUNKS).max(MIN_CHUNK)
}

/// State that can absorb another partial result appended after it.
pub trait Mergeable: Send {
    fn merge(&mut self, later: Self);
}

/// Result of reducing the replicates `start..end`.
#[derive(Debug, Clone)]
pub struct Partial<T> {
    pub start: usize,
    pub end: usize,
    pub value: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Executor {
    workers: usize,
}

impl Default for Executor {
    fn default() -> Self {
        Executor { workers: 1 }
    }
}

impl Executor {
    pub fn new(workers: usize) -> Result<Self> {
        if workers == 0 {
            return Err(Error::setting("workers", "must be at least 1"));
        }
        Ok(Executor { workers })
    }

    pub fn workers(&self) -> usize {
        self.workers
    }

    /// Runs `step(replicate, &mut state)` for every replicate in `0..replicates`
    /// and returns the per-chunk partials in chunk order.
    pub fn run<T, I, F>(&self, replicates: usize, init: I, step: F) -> Result<Vec<Partial<T>>>
    where
        T: Send,
        I: Fn() -> T + Sync,
        F: Fn(usize, &mut T) -> Result<()> + Sync,
    {
        let chunks: Vec<(usize, usize)> = (0..replicates)
            .step_by(chunk_size(replicates))
            .map(|s| (s, (s + chunk_size(replicates)).min(replicates)))
            .collect();
        let work = |&(start, end): &(usize, usize)| -> Result<Partial<T>> {
            let mut value = init();
            for r in start..end {
                step(r, &mut value)?;
            }
            Ok(Partial { start, end, value })
        };
        if self.workers == 1 {
            return chunks.iter().map(work).collect();
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.workers)
            .build()
            .map_err(|e| Error::setting("workers", e.to_string()))?;
        pool.install(|| chunks.par_iter().map(work).collect())
    }
}

/// Merges partials in replicate order after checking that they cover
/// `0..replicates` exactly once. Arrival order does not matter.
pub fn aggregate<T: Mergeable>(mut partials: Vec<Partial<T>>, replicates: usize) -> Result<T> {
    partials.sort_by_key(|p| (p.start, p.end));
    let mut next = 0;
    for p in &partials {
        if p.start != next || p.end < p.start {
            let detail = if p.start < next {
                format!("replicates {}..{} duplicated", p.start, next.min(p.end))
            } else {
                format!("replicates {next}..{} missing", p.start)
            };
            return Err(Error::ReplicateCoverage { expected: replicates, detail });
        }
        next = p.end;
    }
    if next != replicates || partials.is_empty() {
        return Err(Error::ReplicateCoverage {
            expected: replicates,
            detail: format!("replicates {next}..{replicates} missing"),
        });
    }
    let mut iter = partials.into_iter();
    let mut acc = iter.next().expect("non-empty").value;
    for p in iter {
        acc.merge(p.value);
    }
    Ok(acc)
}
