//! Index-parallel map abstraction so passes can run serially here and on a
//! thread pool in the std companion crate with identical results.

use alloc::vec::Vec;

/// Evaluates `f(scratch, i)` for every `i in 0..len` and collects results in index order.
///
/// Implementations may run items concurrently and may create any number of
/// scratch states via `init`; `f` must not depend on which scratch it receives
/// beyond using it as reusable storage.
pub trait Executor {
    fn map_indexed<T, S, I, F>(&self, len: usize, init: I, f: F) -> Vec<T>
    where
        T: Send,
        I: Fn() -> S + Sync + Send,
        F: Fn(&mut S, usize) -> T + Sync + Send;
}

/// Runs everything on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Serial;

impl Executor for Serial {
    fn map_indexed<T, S, I, F>(&self, len: usize, init: I, f: F) -> Vec<T>
    where
        T: Send,
        I: Fn() -> S + Sync + Send,
        F: Fn(&mut S, usize) -> T + Sync + Send,
    {
        let mut scratch = init();
        (0..len).map(|i| f(&mut scratch, i)).collect()
    }
}
