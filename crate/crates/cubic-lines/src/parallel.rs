//! Deterministic parallel reductions.
//!
//! Chunk boundaries depend only on the problem size, and partial results are
//! folded in chunk order on one thread. A reduction therefore returns the
//! same value bit for bit on any worker pool, including floating-point sums.

use std::ops::Range;

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Default chunk length for index-range reductions.
pub const DEFAULT_CHUNK: u64 = 1 << 14;

/// Run `f` on a dedicated pool with `workers` threads; `None` keeps the
/// ambient pool.
pub fn with_workers<R: Send>(workers: Option<usize>, f: impl FnOnce() -> R + Send) -> Result<R> {
    match workers {
        None => Ok(f()),
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w.max(1))
                .build()
                .map_err(|e| Error::Pool(e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}

pub fn chunk_ranges(n: u64, chunk: u64) -> Vec<Range<u64>> {
    let chunk = chunk.max(1);
    let mut out = Vec::with_capacity(n.div_ceil(chunk) as usize);
    let mut lo = 0;
    while lo < n {
        let hi = lo.saturating_add(chunk).min(n);
        out.push(lo..hi);
        lo = hi;
    }
    out
}

/// Sum `f` over fixed chunks of `0..n`, folding partials in chunk order.
pub fn sum_over_chunks<T, F>(n: u64, chunk: u64, f: F) -> T
where
    T: Send + std::iter::Sum<T>,
    F: Fn(Range<u64>) -> T + Sync + Send,
{
    chunk_ranges(n, chunk)
        .into_par_iter()
        .map(f)
        .collect::<Vec<T>>()
        .into_iter()
        .sum()
}

/// Fallible variant of [`sum_over_chunks`]; the first error wins.
pub fn try_sum_over_chunks<T, F>(n: u64, chunk: u64, f: F) -> Result<T>
where
    T: Send + std::iter::Sum<T>,
    F: Fn(Range<u64>) -> Result<T> + Sync + Send,
{
    let parts = chunk_ranges(n, chunk)
        .into_par_iter()
        .map(f)
        .collect::<Result<Vec<T>>>()?;
    Ok(parts.into_iter().sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chunks_cover_range_exactly() {
        let ranges = chunk_ranges(100, 7);
        assert_eq!(ranges.first().unwrap().start, 0);
        assert_eq!(ranges.last().unwrap().end, 100);
        let total: u64 = ranges.iter().map(|r| r.end - r.start).sum();
        assert_eq!(total, 100);
        assert!(chunk_ranges(0, 7).is_empty());
    }

    #[test]
    fn float_sum_is_identical_across_pool_sizes() {
        let f = |r: Range<u64>| r.map(|i| ((i as f64) * 0.1).sin()).sum::<f64>();
        let one = with_workers(Some(1), || sum_over_chunks(100_000, 1 << 10, f)).unwrap();
        let four = with_workers(Some(4), || sum_over_chunks(100_000, 1 << 10, f)).unwrap();
        assert_eq!(one.to_bits(), four.to_bits());
    }
}
