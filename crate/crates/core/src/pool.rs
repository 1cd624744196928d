//! Fixed-size worker pool.
//!
//! Work is split over disjoint index ranges and merged in index order, so
//! results never depend on the number of workers.

use rayon::prelude::*;
use rayon::{ThreadPool, ThreadPoolBuilder};

use crate::error::{BfcError, Result};

/// Environment variable read for the default worker count.
pub const WORKERS_ENV: &str = "BFC_WORKERS";

pub struct WorkerPool {
    workers: usize,
    pool: Option<ThreadPool>,
}

impl WorkerPool {
    pub fn new(workers: usize) -> Result<Self> {
        if workers == 0 {
            return Err(BfcError::InvalidArgument("workers must be >= 1".into()));
        }
        let pool = if workers == 1 {
            None
        } else {
            Some(
                ThreadPoolBuilder::new()
                    .num_threads(workers)
                    .build()
                    .map_err(|e| BfcError::InvalidArgument(format!("thread pool: {e}")))?,
            )
        };
        Ok(Self { workers, pool })
    }

    pub fn single() -> Self {
        Self {
            workers: 1,
            pool: None,
        }
    }

    /// Worker count from [`WORKERS_ENV`], falling back to 1.
    pub fn default_workers() -> usize {
        std::env::var(WORKERS_ENV)
            .ok()
            .and_then(|v| v.trim().parse::<usize>().ok())
            .filter(|&w| w >= 1)
            .unwrap_or(1)
    }

    pub fn workers(&self) -> usize {
        self.workers
    }

    /// Applies `f` to `0..len` and returns the results in index order.
    pub fn map_indexed<T, F>(&self, len: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match &self.pool {
            None => (0..len).map(f).collect(),
            Some(pool) => pool.install(|| (0..len).into_par_iter().map(f).collect()),
        }
    }

    /// Like [`map_indexed`](Self::map_indexed) for fallible closures; the
    /// first error in index order wins.
    pub fn try_map_indexed<T, F>(&self, len: usize, f: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(usize) -> Result<T> + Sync + Send,
    {
        self.map_indexed(len, f).into_iter().collect()
    }
}

impl std::fmt::Debug for WorkerPool {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("WorkerPool")
            .field("workers", &self.workers)
            .finish()
    }
}
