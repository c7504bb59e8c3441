//! Data-parallel loops with a sequential fallback.
//!
//! With the `parallel` feature the loops run on rayon; without it, or with
//! `threads == 1`, they run on the calling thread. Results are always
//! returned in index order so callers see identical output either way.

/// Worker count for a parallel loop: `1` runs sequentially, `0` uses the
/// global rayon pool, any other value builds a dedicated pool of that size.
pub type Threads = usize;

/// `(0..n).map(f).collect()`, possibly in parallel.
pub fn map_range<T, F>(n: usize, threads: Threads, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if threads != 1 {
        use rayon::prelude::*;
        let run = || (0..n).into_par_iter().map(&f).collect();
        return with_pool(threads, run);
    }
    let _ = threads;
    (0..n).map(f).collect()
}

/// Maximum of `f(i)` over `0..n`; `-inf` for an empty range.
pub fn max_range<F>(n: usize, threads: Threads, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if threads != 1 {
        use rayon::prelude::*;
        let run = || {
            (0..n)
                .into_par_iter()
                .map(&f)
                .reduce(|| f64::NEG_INFINITY, f64::max)
        };
        return with_pool(threads, run);
    }
    let _ = threads;
    (0..n).map(f).fold(f64::NEG_INFINITY, f64::max)
}

#[cfg(feature = "parallel")]
fn with_pool<R: Send>(threads: Threads, run: impl FnOnce() -> R + Send) -> R {
    if threads == 0 {
        return run();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(pool) => pool.install(run),
        Err(_) => run(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_and_reduction_do_not_depend_on_threads() {
        let f = |i: usize| ((i * 7919) % 1013) as f64 / 3.0;
        let seq = map_range(5000, 1, f);
        assert_eq!(map_range(5000, 4, f), seq);
        assert_eq!(map_range(5000, 0, f), seq);
        let m = seq.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(max_range(5000, 3, f), m);
        assert_eq!(max_range(0, 3, f), f64::NEG_INFINITY);
    }
}
