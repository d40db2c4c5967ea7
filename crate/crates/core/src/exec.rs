//! Execution policy for the data-parallel loops (sweeps, Monte Carlo shards,
//! coherence matrices).
//!
//! With the `parallel` feature the `Parallel` policy runs on the current rayon
//! pool; without it every policy runs sequentially. Results are always
//! collected in index order, so output never depends on the policy.

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// True when this policy actually runs on multiple threads.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

/// Evaluate `f(0..n)` and collect the results in index order.
pub fn map_range<T, F>(n: usize, exec: Execution, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (0..n).map(f).collect()
}

/// Map over a slice, preserving order.
pub fn map_slice<'a, S, T, F>(items: &'a [S], exec: Execution, f: F) -> Vec<T>
where
    S: Sync,
    T: Send,
    F: Fn(&'a S) -> T + Sync + Send,
{
    map_range(items.len(), exec, |i| f(&items[i]))
}
