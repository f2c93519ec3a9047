//! Closed forms for `X_k = sum_j a_j eps_{k-j}`.

use crate::error::{Error, Result};
use crate::fourier::ComplexValue;

fn check(coeffs: &[f64]) -> Result<()> {
    if coeffs.is_empty() {
        Err(Error::EmptyCoefficients)
    } else {
        Ok(())
    }
}

/// Transfer function `A(e^{i theta}) = sum_{j=0}^{J} a_j e^{i j theta}`
/// by Horner's rule.
pub fn linear_transfer(coeffs: &[f64], theta: f64) -> Result<ComplexValue> {
    check(coeffs)?;
    let (s, c) = theta.sin_cos();
    let z = ComplexValue::new(c, s);
    let mut acc = ComplexValue::new(0.0, 0.0);
    for &a in coeffs.iter().rev() {
        acc = acc * z + a;
    }
    Ok(acc)
}

/// `g(theta) = |A(e^{i theta})|^2`; the spectral density is `g / (2 pi)`.
pub fn linear_g(coeffs: &[f64], theta: f64) -> Result<f64> {
    Ok(linear_transfer(coeffs, theta)?.norm_sqr())
}

/// Autocovariances `c_j = sum_k a_k a_{k+j}` for `j = 0..=maxlag`; zero past
/// the truncation lag.
pub fn linear_autocov(coeffs: &[f64], maxlag: usize) -> Result<Vec<f64>> {
    check(coeffs)?;
    Ok((0..=maxlag)
        .map(|j| {
            if j >= coeffs.len() {
                0.0
            } else {
                coeffs.iter().zip(&coeffs[j..]).map(|(a, b)| a * b).sum()
            }
        })
        .collect())
}

/// `||E(S_n(theta) | F_0)||^2` for the truncated filter:
///
/// ```text
/// sum_{m >= 0} | sum_{l=1}^{min(n, J-m)} e^{i l theta} a_{l+m} |^2
/// ```
///
/// Each inner sum is `e^{-i m theta} (P(min(m+n, J)) - P(m))` with
/// `P(t) = sum_{k=1}^{t} a_k e^{i k theta}`, so the whole norm costs O(J).
pub fn linear_condfn_norm(coeffs: &[f64], theta: f64, n: usize) -> Result<f64> {
    check(coeffs)?;
    let lag = coeffs.len() - 1;
    let mut prefix = Vec::with_capacity(lag + 1);
    let mut acc = ComplexValue::new(0.0, 0.0);
    prefix.push(acc);
    for (k, &a) in coeffs.iter().enumerate().skip(1) {
        let (s, c) = (k as f64 * theta).sin_cos();
        acc += ComplexValue::new(a * c, a * s);
        prefix.push(acc);
    }
    Ok((0..lag)
        .map(|m| (prefix[(m + n).min(lag)] - prefix[m]).norm_sqr())
        .sum())
}
