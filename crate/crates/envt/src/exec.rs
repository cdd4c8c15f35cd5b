//! Thread-pool executor. Work items are written back by index, so results do
//! not depend on the number of threads.

use envt_core::Executor;
use rayon::prelude::*;
use rayon::{ThreadPool, ThreadPoolBuildError, ThreadPoolBuilder};

pub struct Rayon {
    pool: Option<ThreadPool>,
}

impl Rayon {
    /// Uses rayon's global pool.
    pub fn global() -> Self {
        Rayon { pool: None }
    }

    /// A dedicated pool with exactly `threads` workers (`0` means rayon's default).
    pub fn with_threads(threads: usize) -> Result<Self, ThreadPoolBuildError> {
        let pool = ThreadPoolBuilder::new().num_threads(threads).build()?;
        Ok(Rayon { pool: Some(pool) })
    }

    pub fn threads(&self) -> usize {
        match &self.pool {
            Some(p) => p.current_num_threads(),
            None => rayon::current_num_threads(),
        }
    }
}

impl Executor for Rayon {
    fn map_indexed<T, S, I, F>(&self, len: usize, init: I, f: F) -> Vec<T>
    where
        T: Send,
        I: Fn() -> S + Sync + Send,
        F: Fn(&mut S, usize) -> T + Sync + Send,
    {
        let run = || (0..len).into_par_iter().map_init(&init, |s, i| f(s, i)).collect();
        match &self.pool {
            Some(pool) => pool.install(run),
            None => run(),
        }
    }
}
