//! Task-level parallelism for independent disorder samples.
//!
//! Results are collected in task-index order and reduced sequentially, and
//! every task derives its randomness from (seed, task index), so the output
//! is identical whether the map ran on one thread or many.

/// Map `f` over task indices `0..n`, collecting results in index order.
/// Runs on the rayon pool when the `parallel` feature is enabled.
#[cfg(feature = "parallel")]
pub fn map_tasks<U, F>(n: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_tasks<U, F>(n: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    (0..n).map(f).collect()
}

/// Sequential reference path, always available; used by the determinism
/// tests and the benches that compare the two execution modes.
pub fn map_tasks_seq<U, F>(n: usize, f: F) -> Vec<U>
where
    F: Fn(usize) -> U,
{
    (0..n).map(f).collect()
}

/// Cap the global worker pool (first call wins). No-op without `parallel`.
/// The CLI wires this to the PSPIN_THREADS environment variable.
pub fn configure_threads(threads: usize) {
    #[cfg(feature = "parallel")]
    {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    #[cfg(not(feature = "parallel"))]
    let _ = threads;
}
