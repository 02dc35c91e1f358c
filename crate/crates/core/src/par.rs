//! Data-parallel map helper with a sequential fallback.
//!
//! With the default `parallel` feature the closures run on the rayon thread
//! pool; without it they run sequentially. Output order matches input order
//! either way, so results are deterministic regardless of the feature.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Map `f` over `items`, preserving input order in the output.
#[cfg(feature = "parallel")]
pub fn map_ordered<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    items.into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_ordered<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    F: Fn(T) -> U,
{
    items.into_iter().map(f).collect()
}

/// Map `f` over a slice by reference, preserving order.
#[cfg(feature = "parallel")]
pub fn map_ref_ordered<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_ref_ordered<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    F: Fn(&T) -> U,
{
    items.iter().map(f).collect()
}

/// Run episode-style jobs with an explicit worker budget. Jobs are indexed
/// and results are returned sorted by index, so worker count never changes
/// the output.
#[cfg(feature = "parallel")]
pub fn run_jobs<T, U, F>(jobs: Vec<T>, workers: usize, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    if workers <= 1 {
        return jobs.into_iter().map(f).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .expect("rayon pool");
    pool.install(|| jobs.into_par_iter().map(f).collect())
}

#[cfg(not(feature = "parallel"))]
pub fn run_jobs<T, U, F>(jobs: Vec<T>, _workers: usize, f: F) -> Vec<U>
where
    F: Fn(T) -> U,
{
    jobs.into_iter().map(f).collect()
}
