//! Index-ordered parallel map over realizations.

/// `(0..n).map(f)` collected in index order, on the rayon pool when the
/// `parallel` feature is enabled.
#[cfg(feature = "parallel")]
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).map(f).collect()
}

/// Collects `(0..n).map(f)`, stopping at the first error in index order.
pub fn try_map_indexed<T, E, F>(n: usize, f: F) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(usize) -> Result<T, E> + Sync + Send,
{
    map_indexed(n, f).into_iter().collect()
}

/// Sizes the global worker pool; a no-op without the `parallel` feature.
/// Fails if the pool was already started.
#[cfg(feature = "parallel")]
pub fn configure_workers(n: usize) -> crate::Result<()> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| crate::Error::Config(format!("worker pool: {e}")))
}

#[cfg(not(feature = "parallel"))]
pub fn configure_workers(_n: usize) -> crate::Result<()> {
    Ok(())
}
