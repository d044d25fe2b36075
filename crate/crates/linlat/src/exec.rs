//! Worker-count plumbing shared by the search and the verification sweeps.
//!
//! Every parallel entry point in this crate takes an explicit thread count;
//! `threads <= 1` always runs the plain sequential code path. With the
//! `parallel` feature disabled the sequential path is used regardless of the
//! requested count. Results are merged in task-index order, so the outcome of
//! any completed run is identical for every thread count.

#[cfg(feature = "parallel")]
mod pools {
    use std::collections::HashMap;
    use std::sync::{Arc, Mutex, OnceLock};

    static POOLS: OnceLock<Mutex<HashMap<usize, Arc<rayon::ThreadPool>>>> = OnceLock::new();

    /// Pools are built once per thread count and reused across runs.
    pub fn pool(threads: usize) -> Arc<rayon::ThreadPool> {
        let pools = POOLS.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = pools.lock().expect("pool registry");
        Arc::clone(guard.entry(threads).or_insert_with(|| {
            Arc::new(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .stack_size(8 * 1024 * 1024)
                    .build()
                    .expect("thread pool"),
            )
        }))
    }
}

/// Map `items` through `f`, preserving input order in the output.
pub fn map_collect<T, U, F>(threads: usize, items: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if threads > 1 {
        use rayon::prelude::*;
        return pools::pool(threads).install(|| items.into_par_iter().map(f).collect());
    }
    let _ = threads;
    items.into_iter().map(f).collect()
}
