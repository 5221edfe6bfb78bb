//! Chunked map over sample indices.
//!
//! All point reductions run per-chunk and then merge chunk results in index
//! order. Chunk boundaries depend only on the point count, never on the
//! worker count, so the `parallel` feature reproduces serial results
//! bit-exactly.

use alloc::vec::Vec;
use core::ops::Range;

/// Number of sample points per reduction chunk.
pub(crate) const CHUNK_SIZE: usize = 1024;

#[inline]
pub(crate) fn chunk_range(chunk: usize, len: usize) -> Range<usize> {
    let start = chunk * CHUNK_SIZE;
    start..usize::min(start + CHUNK_SIZE, len)
}

/// Apply `f` to every chunk of `0..len` and collect results in chunk order.
pub(crate) fn map_chunks<T, F>(len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(Range<usize>) -> T + Sync,
{
    if len == 0 {
        return Vec::new();
    }
    let n_chunks = len.div_ceil(CHUNK_SIZE);

    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n_chunks)
            .into_par_iter()
            .map(|c| f(chunk_range(c, len)))
            .collect()
    }

    #[cfg(not(feature = "parallel"))]
    {
        (0..n_chunks).map(|c| f(chunk_range(c, len))).collect()
    }
}
