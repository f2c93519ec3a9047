//! Distribution functions, the one-sample Kolmogorov-Smirnov statistic and
//! order-independent moment estimators.

use std::f64::consts::{PI, SQRT_2};

use crate::error::{Error, Result};

/// Asymptotic Kolmogorov quantiles for `D * sqrt(R)`.
pub const KS_CRIT_5: f64 = 1.358;
pub const KS_CRIT_1: f64 = 1.628;

/// Nodes used by [`annealed_mixture_cdf`].
pub const MIXTURE_POINTS: usize = 4096;

/// Below this `g(theta)` a mixture component is treated as a point mass at 0.
pub const DEGENERATE_DENSITY: f64 = 1e-12;

const SERIES_CUTOFF: f64 = 2.5;
const CONTINUED_FRACTION_DEPTH: usize = 120;

/// Complementary error function.
///
/// Power series `erf z = (2/sqrt pi) e^{-z^2} sum 2^k z^{2k+1} / (2k+1)!!`
/// (all terms positive) below `z = 2.5`, Laplace's continued fraction for
/// `erfc` above.
pub fn erfc(z: f64) -> f64 {
    if z.is_nan() {
        return f64::NAN;
    }
    if z < 0.0 {
        return 2.0 - erfc(-z);
    }
    if z < SERIES_CUTOFF {
        return 1.0 - erf_series(z);
    }
    if z > 27.0 {
        return 0.0;
    }
    let mut f = z;
    for k in (1..=CONTINUED_FRACTION_DEPTH).rev() {
        f = z + 0.5 * k as f64 / f;
    }
    (-z * z).exp() / (PI.sqrt() * f)
}

fn erf_series(z: f64) -> f64 {
    let z2 = z * z;
    let mut term = z;
    let mut sum = z;
    let mut k = 0.0;
    while term > 1e-17 * sum {
        k += 1.0;
        term *= 2.0 * z2 / (2.0 * k + 1.0);
        sum += term;
    }
    2.0 / PI.sqrt() * (-z2).exp() * sum
}

/// Standard Gaussian distribution function.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / SQRT_2)
}

/// Chi-square distribution function with two degrees of freedom,
/// `1 - e^{-x/2}`.
pub fn chi2_2_cdf(x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::param(format!(
            "chi-square argument {x} must be nonnegative"
        )));
    }
    Ok(-(-0.5 * x).exp_m1())
}

/// `sup_x |F_emp(x) - F(x)|` for a continuous hypothesised `cdf`.
pub fn ks_statistic(sample: &[f64], cdf: impl Fn(f64) -> f64) -> Result<f64> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut sorted = sample.to_vec();
    sorted.sort_by(f64::total_cmp);
    let r = sorted.len() as f64;
    Ok(sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            let i = i as f64;
            ((i + 1.0) / r - f).max(f - i / r)
        })
        .fold(0.0, f64::max))
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = Self::default();
        iter.into_iter().for_each(|x| s.add(x));
        s
    }
}

/// Compensated sum in iteration order.
pub fn compensated_sum(xs: impl IntoIterator<Item = f64>) -> f64 {
    xs.into_iter().collect::<CompensatedSum>().value()
}

/// Mean and unbiased covariance of a bivariate sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentSummary2D {
    pub count: usize,
    pub mean: [f64; 2],
    pub cov: [[f64; 2]; 2],
}

impl MomentSummary2D {
    /// Pearson correlation; zero when either marginal is degenerate.
    pub fn correlation(&self) -> f64 {
        let d = (self.cov[0][0] * self.cov[1][1]).sqrt();
        if d > 0.0 {
            self.cov[0][1] / d
        } else {
            0.0
        }
    }
}

/// Two-pass moments with compensated accumulation in index order, so the
/// result does not depend on how the samples were produced.
pub fn sample_moments_2d(samples: &[[f64; 2]]) -> Result<MomentSummary2D> {
    let count = samples.len();
    if count < 2 {
        return Err(Error::TooFewSamples {
            needed: 2,
            got: count,
        });
    }
    let n = count as f64;
    let mean = [0, 1].map(|k| compensated_sum(samples.iter().map(|s| s[k])) / n);
    let centered = |a: usize, b: usize| {
        compensated_sum(samples.iter().map(|s| (s[a] - mean[a]) * (s[b] - mean[b]))) / (n - 1.0)
    };
    let c01 = centered(0, 1);
    Ok(MomentSummary2D {
        count,
        mean,
        cov: [[centered(0, 0), c01], [c01, centered(1, 1)]],
    })
}

/// Mean and unbiased variance of a univariate sample, compensated.
pub fn sample_mean_var(xs: &[f64]) -> Result<(f64, f64)> {
    if xs.len() < 2 {
        return Err(Error::TooFewSamples {
            needed: 2,
            got: xs.len(),
        });
    }
    let n = xs.len() as f64;
    let mean = compensated_sum(xs.iter().copied()) / n;
    let var = compensated_sum(xs.iter().map(|x| (x - mean) * (x - mean))) / (n - 1.0);
    Ok((mean, var))
}

/// Scale mixture `(1/2pi) int_0^{2pi} Phi(x / sqrt(g(theta)/2)) d theta`,
/// discretised once so it can be evaluated at many `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnealedMixture {
    scales: Vec<f64>,
}

impl AnnealedMixture {
    pub fn new(g: impl Fn(f64) -> f64, points: usize) -> Self {
        let h = 2.0 * PI / points as f64;
        let scales = (0..points)
            .map(|k| {
                let v = g(k as f64 * h);
                if v < DEGENERATE_DENSITY {
                    0.0
                } else {
                    (0.5 * v).sqrt()
                }
            })
            .collect();
        Self { scales }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let step = if x >= 0.0 { 1.0 } else { 0.0 };
        let total: f64 = self
            .scales
            .iter()
            .map(|&s| if s == 0.0 { step } else { normal_cdf(x / s) })
            .sum();
        total / self.scales.len() as f64
    }
}

/// Limit law of `Re S_n(U) / sqrt(n)` for `U` uniform on `[0, 2 pi]`,
/// by a 4096-node periodic trapezoid rule.
pub fn annealed_mixture_cdf(g: impl Fn(f64) -> f64, x: f64) -> f64 {
    AnnealedMixture::new(g, MIXTURE_POINTS).cdf(x)
}
