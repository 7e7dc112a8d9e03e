//! Data-parallel building blocks with a sequential fallback.
//!
//! With the `parallel` feature (on by default) the mapping helpers fan out
//! over the rayon thread pool; without it they run in order on the calling
//! thread. Results are element-wise identical either way: every helper maps
//! an index range through a pure function and collects in index order.
//!
//! The `*_seq` variants are always available; the benchmark suite uses them
//! to compare the parallel and sequential paths on the same build.

use crate::error::Result;

#[cfg(feature = "parallel")]
static POOL: std::sync::OnceLock<rayon::ThreadPool> = std::sync::OnceLock::new();

/// Maps `0..n` through `f`, in parallel when the feature is enabled.
#[cfg(feature = "parallel")]
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    let work = || (0..n).into_par_iter().map(&f).collect();
    match POOL.get() {
        Some(pool) => pool.install(work),
        None => work(),
    }
}

#[cfg(not(feature = "parallel"))]
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    map_indexed_seq(n, f)
}

/// Sequential reference implementation of [`map_indexed`].
pub fn map_indexed_seq<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).map(f).collect()
}

/// Fallible map over `0..n`; returns an error if any element fails.
///
/// Which error surfaces when several indices fail concurrently is
/// unspecified; callers that need the first failing index deterministically
/// should scan flags sequentially instead.
#[cfg(feature = "parallel")]
pub fn try_map_indexed<T, F>(n: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    use rayon::prelude::*;
    let work = || (0..n).into_par_iter().map(&f).collect();
    match POOL.get() {
        Some(pool) => pool.install(work),
        None => work(),
    }
}

#[cfg(not(feature = "parallel"))]
pub fn try_map_indexed<T, F>(n: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    try_map_indexed_seq(n, f)
}

/// Sequential reference implementation of [`try_map_indexed`].
pub fn try_map_indexed_seq<T, F>(n: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    (0..n).map(f).collect()
}

/// Configures the worker pool and returns the effective thread count.
///
/// `None` keeps the default (all cores with the feature, 1 without). A pool
/// is installed at most once per process; later calls report the active
/// width. The pool is private to this module, so earlier incidental parallel
/// work cannot lock the width in before the caller gets here.
pub fn configure_threads(requested: Option<usize>) -> usize {
    #[cfg(feature = "parallel")]
    {
        if let Some(n) = requested {
            let n = n.max(1);
            let _ = POOL.get_or_init(|| {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build()
                    .expect("worker pool construction failed")
            });
        }
        match POOL.get() {
            Some(pool) => pool.current_num_threads(),
            None => rayon::current_num_threads(),
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = requested;
        1
    }
}
