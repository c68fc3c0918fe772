//! Data-parallel map/reduce over bit ranges and slices.
//!
//! With the `parallel` feature (default) work is spread over a rayon pool;
//! without it, or with [`Execution::Sequential`], the same closures run on
//! the calling thread. Reductions used by the sweeps are associative and
//! commutative, so both paths return identical results.

use std::ops::Range;

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "FISR_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    #[default]
    Parallel,
    Sequential,
}

impl Execution {
    /// `Parallel` degrades to `Sequential` when the crate is built without
    /// the `parallel` feature.
    pub fn effective(self) -> Self {
        if cfg!(feature = "parallel") {
            self
        } else {
            Execution::Sequential
        }
    }
}

/// Thread cap from `FISR_THREADS`, if set to a positive integer.
pub fn thread_cap() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
}

#[cfg(feature = "parallel")]
fn in_pool<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    match thread_cap() {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(f),
            Err(_) => f(),
        },
        None => f(),
    }
}

/// Folds `map(i)` for every `i` in `range` with `combine`.
pub fn map_reduce_range<T, M, C>(
    range: Range<u32>,
    exec: Execution,
    identity: T,
    map: M,
    combine: C,
) -> T
where
    T: Send + Sync + Clone,
    M: Fn(u32) -> T + Send + Sync,
    C: Fn(T, T) -> T + Send + Sync,
{
    match exec.effective() {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            in_pool(|| {
                range
                    .into_par_iter()
                    .fold(|| identity.clone(), |acc, i| combine(acc, map(i)))
                    .reduce(|| identity.clone(), &combine)
            })
        }
        _ => range.fold(identity, |acc, i| combine(acc, map(i))),
    }
}

/// Same as [`map_reduce_range`] over the elements of a slice.
pub fn map_reduce_slice<S, T, M, C>(items: &[S], exec: Execution, identity: T, map: M, combine: C) -> T
where
    S: Sync,
    T: Send + Sync + Clone,
    M: Fn(&S) -> T + Send + Sync,
    C: Fn(T, T) -> T + Send + Sync,
{
    match exec.effective() {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            in_pool(|| {
                items
                    .par_iter()
                    .fold(|| identity.clone(), |acc, s| combine(acc, map(s)))
                    .reduce(|| identity.clone(), &combine)
            })
        }
        _ => items.iter().fold(identity, |acc, s| combine(acc, map(s))),
    }
}

/// Order-preserving map over a slice.
pub fn map_slice<S, T, M>(items: &[S], exec: Execution, map: M) -> Vec<T>
where
    S: Sync,
    T: Send,
    M: Fn(&S) -> T + Send + Sync,
{
    match exec.effective() {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            in_pool(|| items.par_iter().map(&map).collect())
        }
        _ => items.iter().map(map).collect(),
    }
}
