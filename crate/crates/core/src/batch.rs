//! Runs a verification over a range of seeds, in parallel when the
//! `parallel` feature is enabled.

use std::ops::Range;

pub fn map_sequential<T, F>(seeds: Range<u64>, f: F) -> Vec<T>
where
    F: Fn(u64) -> T,
{
    seeds.map(f).collect()
}

#[cfg(feature = "parallel")]
pub fn map_parallel<T, F>(seeds: Range<u64>, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    use rayon::prelude::*;
    seeds.into_par_iter().map(f).collect()
}

/// Results in seed order.
pub fn map<T, F>(seeds: Range<u64>, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    return map_parallel(seeds, f);
    #[cfg(not(feature = "parallel"))]
    return map_sequential(seeds, f);
}
