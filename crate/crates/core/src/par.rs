//! Deterministic data-parallel helpers.
//!
//! Every reduction over particles goes through fixed-size row chunks whose
//! partial results are combined left to right, so floating-point results do
//! not depend on how many worker threads rayon happens to use.

use rayon::prelude::*;

/// Rows per work unit. Fixed so reductions are identical for any thread count.
pub const CHUNK: usize = 4096;

pub(crate) fn chunk_ranges(len: usize) -> Vec<std::ops::Range<usize>> {
    (0..len.div_ceil(CHUNK))
        .map(|c| c * CHUNK..((c + 1) * CHUNK).min(len))
        .collect()
}

/// Maps each chunk to a partial result in parallel and returns the partials
/// in chunk order.
pub(crate) fn map_chunks<T, F>(len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(std::ops::Range<usize>) -> T + Sync + Send,
{
    chunk_ranges(len).into_par_iter().map(f).collect()
}

/// Order-stable sum of `f(i)` for `i in 0..len`.
pub(crate) fn sum<F>(len: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    map_chunks(len, |r| r.map(&f).sum::<f64>()).into_iter().sum()
}

/// Fallible variant of [`map_chunks`]; the first error in chunk order wins.
pub(crate) fn try_map_chunks<T, E, F>(len: usize, f: F) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(std::ops::Range<usize>) -> Result<T, E> + Sync + Send,
{
    map_chunks(len, f).into_iter().collect()
}

/// Runs `f` on a dedicated pool with `threads` workers, or on the global pool
/// when `threads` is `None`.
pub fn with_threads<R: Send>(
    threads: Option<usize>,
    f: impl FnOnce() -> R + Send,
) -> crate::Result<R> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| crate::Error::ThreadPool(e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}
