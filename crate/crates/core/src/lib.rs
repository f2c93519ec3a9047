//! Fourier transforms of stationary processes.
//!
//! The crate simulates stationary processes (linear filters, reversible
//! Markov chains, functions of Gaussian AR(1)), evaluates
//! `S_n(theta) = sum_{j=1}^n X_j e^{i j theta}` and periodograms, computes
//! closed-form spectral densities and autocovariances, and runs seeded
//! Monte Carlo experiments comparing the empirical law of
//! `S_n(theta) / sqrt(n)` with its Gaussian limit.
//!
//! Modules, bottom up:
//!
//! - [`rng`]: SplitMix64, per-replicate seeds, polar-method normals
//! - [`simulate`]: process specifications and path generators
//! - [`fourier`]: single-frequency transforms, partial-sum paths, FFT grid
//! - [`spectral`]: `g(theta)`, `c_j`, Cesaro variance, conditional norms
//! - [`stats`]: distribution functions, KS statistic, moments
//! - [`experiments`]: replicated Monte Carlo checks producing JSON reports
//! - [`cli`]: command-line front end

pub mod cli;
pub mod error;
pub mod experiments;
pub mod fourier;
pub mod rng;
pub mod simulate;
pub mod spectral;
pub mod stats;

pub use error::{Error, MarkovViolation, Result};
