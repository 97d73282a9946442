//! Execution policy for data-parallel loops.
//!
//! Every parallel loop in the crate writes each output slot independently
//! and performs reductions sequentially afterwards, so results do not depend
//! on the policy or the thread count.

use std::ops::Range;

/// How independent work items are scheduled.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Exec {
    Sequential,
    /// Uses the rayon pool when built with the `parallel` feature; identical
    /// to `Sequential` otherwise.
    #[default]
    Parallel,
}

impl Exec {
    /// True if work will actually be spread over threads.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Exec::Parallel
    }

    /// Maps `f` over `range`, preserving order.
    pub fn map_range<R, F>(self, range: Range<usize>, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            use rayon::prelude::*;
            return range.into_par_iter().map(f).collect();
        }
        range.map(f).collect()
    }

    /// Maps `f` over a slice, preserving order.
    pub fn map<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            use rayon::prelude::*;
            return items.par_iter().map(f).collect();
        }
        items.iter().map(f).collect()
    }

    /// Calls `f(index, item)` on every element of a mutable slice.
    pub fn for_each_mut<T, F>(self, items: &mut [T], f: F)
    where
        T: Send,
        F: Fn(usize, &mut T) + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            use rayon::prelude::*;
            items.par_iter_mut().enumerate().for_each(|(i, x)| f(i, x));
            return;
        }
        items.iter_mut().enumerate().for_each(|(i, x)| f(i, x));
    }

    /// Like [`Exec::for_each_mut`] but with per-worker scratch state built
    /// by `init`.
    pub fn for_each_mut_init<T, S, I, F>(self, items: &mut [T], init: I, f: F)
    where
        T: Send,
        I: Fn() -> S + Sync + Send,
        F: Fn(&mut S, usize, &mut T) + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            use rayon::prelude::*;
            items
                .par_iter_mut()
                .enumerate()
                .for_each_init(&init, |s, (i, x)| f(s, i, x));
            return;
        }
        let mut scratch = init();
        items
            .iter_mut()
            .enumerate()
            .for_each(|(i, x)| f(&mut scratch, i, x));
    }
}
