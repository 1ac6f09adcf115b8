//! Tiny scoped worker pool.
//!
//! Work is addressed by index and results are returned in index order, so
//! output never depends on the thread schedule. `UCA_THREADS` caps the
//! worker count; `0` forces serial execution.

use std::thread;

pub const THREADS_ENV: &str = "UCA_THREADS";

/// Worker count from `UCA_THREADS`, defaulting to the available parallelism.
/// Returns 1 for serial mode.
pub fn worker_count() -> usize {
    let available = thread::available_parallelism().map_or(1, |n| n.get());
    match std::env::var(THREADS_ENV).ok().and_then(|s| s.trim().parse::<usize>().ok()) {
        Some(0) => 1,
        Some(cap) => cap.min(available).max(1),
        None => available,
    }
}

/// Evaluate `f(0..count)` and collect the results in index order.
pub fn map_indexed<T, F>(count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    let workers = worker_count().min(count.max(1));
    if workers <= 1 {
        return (0..count).map(&f).collect();
    }
    let chunk = count.div_ceil(workers);
    let f = &f;
    thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let start = w * chunk;
                let end = ((w + 1) * chunk).min(count);
                scope.spawn(move || (start..end).map(f).collect::<Vec<T>>())
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("worker panicked"))
            .collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preserves_index_order() {
        let out = map_indexed(1000, |i| i * 2);
        assert_eq!(out, (0..1000).map(|i| i * 2).collect::<Vec<_>>());
        assert!(map_indexed(0, |i| i).is_empty());
    }
}
