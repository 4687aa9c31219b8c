//! A rayon-backed [`Executor`] for suite construction.

use rayon::prelude::*;
use storyprobe_core::suite::Executor;

use crate::error::{Error, Result};

pub struct RayonExecutor {
    pool: rayon::ThreadPool,
}

impl RayonExecutor {
    /// `jobs == 0` uses one thread per available core.
    pub fn new(jobs: usize) -> Result<RayonExecutor> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Error::Data(format!("cannot start {jobs} worker threads: {e}")))?;
        Ok(RayonExecutor { pool })
    }

    pub fn threads(&self) -> usize {
        self.pool.current_num_threads()
    }
}

impl Executor for RayonExecutor {
    fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        self.pool
            .install(|| (0..n).into_par_iter().map(f).collect())
    }
}
