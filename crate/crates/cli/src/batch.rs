//! Parallel Monte Carlo batches with per-sample seed streams.

use cle_core::rng::stream_seed;
use rayon::prelude::*;

/// Runs `f(i, stream_seed(seed, i))` for `i < count` on `jobs` workers (0 = all cores).
/// Results come back in index order, so output does not depend on the worker count.
pub fn run_batch<T, F>(count: usize, seed: u64, jobs: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, u64) -> T + Sync + Send,
{
    let work = || (0..count).into_par_iter().map(|i| f(i, stream_seed(seed, i as u64))).collect();
    if jobs == 0 {
        return work();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
        Ok(pool) => pool.install(work),
        Err(_) => work(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_and_values_independent_of_jobs() {
        let a = run_batch(100, 5, 1, |i, s| (i, s));
        let b = run_batch(100, 5, 3, |i, s| (i, s));
        assert_eq!(a, b);
        assert!(a.iter().enumerate().all(|(k, &(i, _))| k == i));
    }
}
