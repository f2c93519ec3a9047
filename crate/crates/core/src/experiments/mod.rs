//! Seeded Monte Carlo experiments.
//!
//! Replicate `r` of an experiment with master seed `m` uses the stream
//! `derive_seed(m, r)`. Replicates run on a rayon pool and are collected in
//! index order, so reports do not depend on the number of workers.

mod config;
mod report;
mod runs;
pub mod suite;

pub use config::{
    apply_override, check_frequency, parse_config, parse_json, reduce_angle, ExperimentConfig,
    ExperimentKind, OutputPaths, ProcessConfig, Tolerances, DEFAULT_GRID, DEFAULT_LADDER,
    DEFAULT_N, DEFAULT_PILOT_FACTOR, DEFAULT_REPLICATES, MIN_LENGTH, MIN_REPLICATES,
    TOLERANCE_DEFAULTS,
};
pub use report::{Relation, Report, Verdict};
pub use runs::{
    grid_frequencies, invariance_ratio, max_functional_row, run_annealed, run_cross_frequency,
    run_experiment, run_fixed_freq_clt, run_invariance_identity, run_periodogram_chi2,
    run_regularity_diag, run_variance_convergence, DEGENERATE_G, THETA_REJECT_RADIUS,
};

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Executes replicates, on a dedicated pool when a worker count is given.
pub struct Harness {
    pool: Option<rayon::ThreadPool>,
}

impl Harness {
    /// `workers == 0` uses rayon's global pool.
    pub fn new(workers: usize) -> Result<Self> {
        if workers == 0 {
            return Ok(Self::global());
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::config(format!("cannot start {workers} workers: {e}")))?;
        Ok(Self { pool: Some(pool) })
    }

    pub fn global() -> Self {
        Self { pool: None }
    }

    pub fn workers(&self) -> usize {
        match &self.pool {
            Some(p) => p.current_num_threads(),
            None => rayon::current_num_threads(),
        }
    }

    /// `f(0..count)` in parallel, results in index order.
    pub fn map<T, F>(&self, count: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        let run = || (0..count).into_par_iter().map(&f).collect();
        match &self.pool {
            Some(p) => p.install(run),
            None => run(),
        }
    }

    /// Like [`Harness::map`] but stops at the first error by index.
    pub fn try_map<T, F>(&self, count: usize, f: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(usize) -> Result<T> + Sync + Send,
    {
        self.map(count, f).into_iter().collect()
    }
}

impl Default for Harness {
    fn default() -> Self {
        Self::global()
    }
}
