//! Data-parallel map helpers.
//!
//! Per-cell and per-edge work is pure with disjoint writes, so it can run on
//! rayon when the `parallel` feature is enabled. Reductions that feed
//! diagnostics stay sequential ascending-j elsewhere, so results are
//! bit-identical across thread counts and with the feature disabled.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Map j = 0..n through `f`, collecting in index order.
#[cfg(feature = "parallel")]
pub(crate) fn map_range<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_range<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T + Sync,
{
    (0..n).map(f).collect()
}

/// Sequential variant, kept separate so benchmarks can compare both paths.
pub(crate) fn map_range_seq<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}
