//! Data-parallel helpers. With the `parallel` feature (default) these fan
//! out over rayon; without it they run the same code sequentially. Output
//! order always matches input order, so results are identical either way.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Map preserving input order.
#[cfg(feature = "parallel")]
pub fn map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map<T, R>(items: &[T], f: impl Fn(&T) -> R) -> Vec<R> {
    items.iter().map(f).collect()
}

/// Always-sequential map, kept for benchmark comparison against `map`.
pub fn map_seq<T, R>(items: &[T], f: impl Fn(&T) -> R) -> Vec<R> {
    items.iter().map(f).collect()
}

/// Fallible map preserving input order; first error wins.
#[cfg(feature = "parallel")]
pub fn try_map<T: Sync, R: Send, E: Send>(
    items: &[T],
    f: impl Fn(&T) -> Result<R, E> + Sync + Send,
) -> Result<Vec<R>, E> {
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn try_map<T, R, E>(items: &[T], f: impl Fn(&T) -> Result<R, E>) -> Result<Vec<R>, E> {
    items.iter().map(f).collect()
}

/// Configure the worker pool size. 0 leaves the default. Without the
/// `parallel` feature this is a no-op.
#[cfg(feature = "parallel")]
pub fn configure_workers(workers: usize) {
    if workers > 0 {
        // ignore failure when a global pool already exists
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global();
    }
}

#[cfg(not(feature = "parallel"))]
pub fn configure_workers(_workers: usize) {}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_preserves_order() {
        let items: Vec<u64> = (0..1000).collect();
        let par = map(&items, |&x| x * x);
        let seq = map_seq(&items, |&x| x * x);
        assert_eq!(par, seq);
    }
}
