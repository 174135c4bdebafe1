//! Deterministic parallel map helpers.
//!
//! Work is split into units whose random streams depend only on the unit
//! index, and results are collected in index order, so the thread count never
//! changes a result.

use rayon::prelude::*;

use crate::error::Result;
use crate::rng::Stream;

/// Draws per chunk for one-step Monte-Carlo estimators.
pub const CHUNK: u64 = 2048;

/// Splits `total` draws into chunks of [`CHUNK`]; chunk `c` receives the
/// stream `(seed, domain, c)` and the number of draws it owns.
pub fn chunked<T, F>(seed: u64, domain: u64, total: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut Stream, u64) -> T + Sync + Send,
{
    let chunks = total.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let count = CHUNK.min(total - c * CHUNK);
            let mut s = Stream::new(seed, domain, c);
            f(&mut s, count)
        })
        .collect()
}

/// Runs `f(r)` for every replica index and returns results in index order.
/// On failure the error of the lowest failing index is returned.
pub fn replicas<T, F>(count: u64, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    let out: Vec<Result<T>> = (0..count).into_par_iter().map(f).collect();
    out.into_iter().collect()
}

/// Runs `f` inside a pool with the given thread count (0 means rayon's default).
pub fn with_threads<R: Send>(threads: usize, f: impl FnOnce() -> R + Send) -> R {
    if threads == 0 {
        return f();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}
