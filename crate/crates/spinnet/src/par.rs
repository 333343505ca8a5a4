//! Internal scheduling shim: maps `Parallelism` onto rayon when the
//! `parallel` feature is enabled, and onto plain iteration otherwise.
//! Every reduction used here is associative and exact, so results are
//! bit-identical across modes and thread counts.

use crate::Parallelism;

/// Fold `0..n` into an accumulator and merge the partial results.
pub fn fold_range<A, FInit, FFold, FMerge>(
    mode: Parallelism,
    n: u64,
    init: FInit,
    fold: FFold,
    merge: FMerge,
) -> A
where
    A: Send,
    FInit: Fn() -> A + Sync + Send,
    FFold: Fn(A, u64) -> A + Sync + Send,
    FMerge: Fn(A, A) -> A + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if mode == Parallelism::Rayon {
            use rayon::prelude::*;
            return (0..n)
                .into_par_iter()
                .fold(&init, &fold)
                .reduce(&init, &merge);
        }
    }
    let _ = &merge;
    let _ = mode;
    (0..n).fold(init(), fold)
}

/// Map a slice, preserving order.
pub fn map_slice<T, U, F>(mode: Parallelism, items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if mode == Parallelism::Rayon {
            use rayon::prelude::*;
            return items.par_iter().map(f).collect();
        }
    }
    let _ = mode;
    items.iter().map(f).collect()
}
