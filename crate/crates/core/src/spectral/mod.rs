//! Closed-form spectral quantities: `g(theta)` (the spectral density times
//! `2 pi`), autocovariances `c_j`, the exact finite-`n` variance of
//! `S_n(theta)`, and conditional-norm diagnostics `||E(S_n(theta) | F_0)||^2`.

pub mod jacobi;
pub mod linear;
pub mod markov;

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::fourier::ComplexValue;
use crate::simulate::ProcessSpec;

pub use linear::{linear_autocov, linear_condfn_norm, linear_g, linear_transfer};
pub use markov::{markov_condfn_norm, markov_eigen, markov_g, EigenDecomp};

/// Node count of the periodic trapezoid rule on `[0, 2 pi)`.
pub const QUADRATURE_POINTS: usize = 4096;

/// Half-width of the neighbourhood of `theta = 0` skipped when integrating
/// densities with a pole there.
pub const POLE_EXCLUSION: f64 = 1e-3;

/// `int_0^{2 pi} f` by the periodic trapezoid rule with `points` nodes.
pub fn periodic_trapezoid(f: impl Fn(f64) -> f64, points: usize) -> f64 {
    let h = 2.0 * PI / points as f64;
    h * (0..points).map(|k| f(k as f64 * h)).sum::<f64>()
}

/// Same as [`periodic_trapezoid`] but omitting nodes within `radius` of
/// `0` (mod `2 pi`). The omitted mass is not estimated.
pub fn periodic_trapezoid_excluding(f: impl Fn(f64) -> f64, points: usize, radius: f64) -> f64 {
    let h = 2.0 * PI / points as f64;
    h * (0..points)
        .map(|k| k as f64 * h)
        .filter(|&t| t >= radius && 2.0 * PI - t >= radius)
        .map(f)
        .sum::<f64>()
}

/// `(1 / 2 pi) int_0^{2 pi} f(theta) e^{i j theta} d theta` by the periodic
/// trapezoid rule.
pub fn fourier_coefficient(f: impl Fn(f64) -> f64, j: i64, points: usize) -> ComplexValue {
    let h = 2.0 * PI / points as f64;
    let sum: ComplexValue = (0..points)
        .map(|k| {
            let t = k as f64 * h;
            ComplexValue::from_polar(f(t), j as f64 * t)
        })
        .sum();
    sum / points as f64
}

/// `E|S_n(theta)|^2 / n` from the covariances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CesaroVariance {
    pub value: f64,
    /// Set when lags `>= covs.len()` were needed and taken as zero.
    pub missing_lags: bool,
}

/// `sum_{|j| < n} (1 - |j|/n) c_j e^{i j theta}`. The imaginary parts of the
/// `+j` and `-j` terms cancel, so the sum is evaluated in its real form
/// `c_0 + 2 sum_{j=1}^{n-1} (1 - j/n) c_j cos(j theta)`.
pub fn cesaro_variance(covs: &[f64], n: usize, theta: f64) -> Result<CesaroVariance> {
    if n < 1 {
        return Err(Error::param("cesaro_variance needs n >= 1"));
    }
    if covs.is_empty() {
        return Err(Error::param("cesaro_variance needs at least c_0"));
    }
    let nf = n as f64;
    let top = covs.len().min(n);
    let tail: f64 = (1..top)
        .map(|j| (1.0 - j as f64 / nf) * covs[j] * (j as f64 * theta).cos())
        .sum();
    Ok(CesaroVariance {
        value: covs[0] + 2.0 * tail,
        missing_lags: covs.len() < n,
    })
}

/// Source of the closed forms.
#[derive(Debug, Clone, PartialEq)]
pub enum SpectralProvider {
    Linear { coeffs: Vec<f64> },
    Markov(EigenDecomp),
}

/// Analytic spectral description of a process, with autocovariances
/// cached up to a chosen lag.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralModel {
    provider: SpectralProvider,
    covs: Vec<f64>,
}

impl SpectralModel {
    /// Builds the model and caches `c_0..=c_max_lag`. Functions of Gaussian
    /// processes have no closed form here.
    pub fn new(spec: &ProcessSpec, max_lag: usize) -> Result<Self> {
        match spec {
            ProcessSpec::Linear(l) => Self::linear(l.coeffs().to_vec(), max_lag),
            ProcessSpec::Markov(m) => Ok(Self::markov(markov_eigen(m)?, max_lag)),
            ProcessSpec::GaussianFunctional(_) => Err(Error::Unsupported(
                "no closed-form spectral density for functions of Gaussian processes".into(),
            )),
        }
    }

    pub fn linear(coeffs: Vec<f64>, max_lag: usize) -> Result<Self> {
        let covs = linear_autocov(&coeffs, max_lag)?;
        Ok(Self {
            provider: SpectralProvider::Linear { coeffs },
            covs,
        })
    }

    pub fn markov(decomp: EigenDecomp, max_lag: usize) -> Self {
        let covs = decomp.autocov(max_lag);
        Self {
            provider: SpectralProvider::Markov(decomp),
            covs,
        }
    }

    pub fn provider(&self) -> &SpectralProvider {
        &self.provider
    }

    pub fn covs(&self) -> &[f64] {
        &self.covs
    }

    pub fn c0(&self) -> f64 {
        self.covs[0]
    }

    pub fn g(&self, theta: f64) -> Result<f64> {
        match &self.provider {
            SpectralProvider::Linear { coeffs } => linear_g(coeffs, theta),
            SpectralProvider::Markov(d) => markov_g(d, theta),
        }
    }

    pub fn condfn_norm(&self, theta: f64, n: usize) -> Result<f64> {
        match &self.provider {
            SpectralProvider::Linear { coeffs } => linear_condfn_norm(coeffs, theta, n),
            SpectralProvider::Markov(d) => Ok(markov_condfn_norm(d, theta, n)),
        }
    }

    /// Exact `E|S_n(theta)|^2 / n`. Linear models beyond their truncation
    /// lag have zero covariances, so a short cache is exact for them.
    pub fn cesaro_variance(&self, n: usize, theta: f64) -> Result<CesaroVariance> {
        let mut out = cesaro_variance(&self.covs, n, theta)?;
        if let SpectralProvider::Linear { coeffs } = &self.provider {
            if self.covs.len() >= coeffs.len() {
                out.missing_lags = false;
            }
        }
        Ok(out)
    }

    /// Largest lag with a nonzero covariance, if finite.
    pub fn memory(&self) -> Option<usize> {
        match &self.provider {
            SpectralProvider::Linear { coeffs } => Some(coeffs.len() - 1),
            SpectralProvider::Markov(_) => None,
        }
    }
}
