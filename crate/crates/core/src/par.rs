//! Thin switch between rayon and a sequential fallback. With the default
//! `parallel` feature the helpers fan out over the global rayon pool;
//! without it they run in index order. All call sites compute each output
//! cell independently, so results are identical either way.

#[cfg(feature = "parallel")]
pub(crate) fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}

#[cfg(feature = "parallel")]
pub(crate) fn for_each_chunk_mut<T, F>(data: &mut [T], chunk: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    use rayon::prelude::*;
    data.par_chunks_mut(chunk)
        .enumerate()
        .for_each(|(i, c)| f(i, c));
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn for_each_chunk_mut<T, F>(data: &mut [T], chunk: usize, f: F)
where
    F: Fn(usize, &mut [T]),
{
    for (i, c) in data.chunks_mut(chunk).enumerate() {
        f(i, c);
    }
}

/// Smallest index in `[lo, hi)` whose predicate holds, scanning in blocks
/// so the answer does not depend on thread count.
pub(crate) fn min_matching_in_blocks<F>(lo: u64, hi: u64, block: u64, pred: F) -> Option<u64>
where
    F: Fn(u64) -> bool + Sync + Send,
{
    let mut start = lo;
    while start < hi {
        let end = (start + block).min(hi);
        #[cfg(feature = "parallel")]
        let hit = {
            use rayon::prelude::*;
            (start..end).into_par_iter().filter(|&x| pred(x)).min()
        };
        #[cfg(not(feature = "parallel"))]
        let hit = (start..end).find(|&x| pred(x));
        if hit.is_some() {
            return hit;
        }
        start = end;
    }
    None
}
