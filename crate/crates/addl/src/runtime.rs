//! Std execution backends for the core trainer.

use std::time::Instant;

use addl_core::{ClassExecutor, Clock, Hyperparams, LabeledDataset, Serial, TrainOptions, TrainOutcome};
use rayon::prelude::*;

/// Runs per-class solves on the rayon pool. Results are collected in class
/// order, so output matches [`Serial`] bit for bit.
#[derive(Debug, Clone, Copy, Default)]
pub struct RayonExecutor;

impl ClassExecutor for RayonExecutor {
    fn map_classes<T, F>(&self, count: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..count).into_par_iter().map(f).collect()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct StdClock {
    start: Instant,
}

impl Default for StdClock {
    fn default() -> Self {
        Self { start: Instant::now() }
    }
}

impl Clock for StdClock {
    fn now_millis(&self) -> f64 {
        self.start.elapsed().as_secs_f64() * 1e3
    }
}

/// Trains with wall-clock timings, on the rayon pool when
/// `opts.parallel_classes` is set.
pub fn train(ds: &LabeledDataset, hyper: Hyperparams, opts: TrainOptions) -> addl_core::Result<TrainOutcome> {
    let clock = StdClock::default();
    if opts.parallel_classes {
        addl_core::train_with(ds, hyper, opts, &RayonExecutor, &clock)
    } else {
        addl_core::train_with(ds, hyper, opts, &Serial, &clock)
    }
}
