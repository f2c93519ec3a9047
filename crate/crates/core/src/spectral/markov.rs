//! Spectral calculus for observables of finite reversible Markov chains.
//!
//! For a reversible `Q` the matrix `D^{1/2} Q D^{-1/2}` (`D = diag(pi)`) is
//! symmetric. Its eigenpairs `(lambda_i, v_i)` give the spectral measure of
//! `f` as point masses `w_i = <f, D^{-1/2} v_i>_pi^2` at `lambda_i`, and
//! then
//!
//! ```text
//! c_j      = sum_i w_i lambda_i^|j|
//! g(theta) = sum_i w_i (1 - lambda_i^2) / (1 - 2 lambda_i cos theta + lambda_i^2)
//! ```

use crate::error::{Error, MarkovViolation, Result};
use crate::fourier::ComplexValue;
use crate::simulate::MarkovSpec;

use super::jacobi::jacobi_eigen;

pub const MAX_STATES: usize = 64;

/// Eigenvalues within this distance of +-1 count as unit eigenvalues.
pub const UNIT_EIGENVALUE_TOL: f64 = 1e-9;

/// Spectral weight below this (relative to `c_0`) is treated as zero.
pub const NEGLIGIBLE_WEIGHT: f64 = 1e-12;

/// Point-mass spectral measure of an observable.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomp {
    eigenvalues: Vec<f64>,
    weights: Vec<f64>,
}

impl EigenDecomp {
    pub fn new(eigenvalues: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if eigenvalues.len() != weights.len() {
            return Err(Error::param("eigenvalue and weight lists differ in length"));
        }
        if let Some(l) = eigenvalues.iter().find(|l| !(l.abs() <= 1.0 + 1e-12)) {
            return Err(Error::param(format!("eigenvalue {l} outside [-1, 1]")));
        }
        if let Some(w) = weights.iter().find(|w| !(**w >= 0.0) || !w.is_finite()) {
            return Err(Error::param(format!(
                "spectral weight {w} is negative or not finite"
            )));
        }
        let eigenvalues = eigenvalues
            .into_iter()
            .map(|l| l.clamp(-1.0, 1.0))
            .collect();
        Ok(Self {
            eigenvalues,
            weights,
        })
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Total spectral mass, `c_0 = Var X_0`.
    pub fn c0(&self) -> f64 {
        self.weights.iter().sum()
    }

    fn pairs(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.eigenvalues
            .iter()
            .copied()
            .zip(self.weights.iter().copied())
    }

    fn negligible(&self) -> f64 {
        NEGLIGIBLE_WEIGHT * self.c0().max(f64::MIN_POSITIVE)
    }

    /// Autocovariances `c_0..=c_maxlag`.
    pub fn autocov(&self, maxlag: usize) -> Vec<f64> {
        let mut powers: Vec<f64> = vec![1.0; self.eigenvalues.len()];
        (0..=maxlag)
            .map(|_| {
                let c = powers.iter().zip(&self.weights).map(|(p, w)| p * w).sum();
                powers
                    .iter_mut()
                    .zip(&self.eigenvalues)
                    .for_each(|(p, l)| *p *= l);
                c
            })
            .collect()
    }
}

/// Symmetrises `Q`, diagonalises it with Jacobi rotations and projects `f`
/// onto the eigenvectors.
pub fn markov_eigen(spec: &MarkovSpec) -> Result<EigenDecomp> {
    let s = spec.states();
    if s > MAX_STATES {
        return Err(MarkovViolation::TooManyStates {
            states: s,
            max: MAX_STATES,
        }
        .into());
    }
    let pi = spec.stationary();
    if let Some(i) = pi.iter().position(|&p| p <= 0.0) {
        return Err(Error::param(format!("state {i} has zero stationary mass")));
    }
    let root: Vec<f64> = pi.iter().map(|p| p.sqrt()).collect();
    let q = spec.transition();
    let sym: Vec<Vec<f64>> = (0..s)
        .map(|i| (0..s).map(|j| root[i] * q[i][j] / root[j]).collect())
        .collect();
    let eig = jacobi_eigen(&sym);
    let f = spec.observable();
    let weights = eig
        .vectors
        .iter()
        .map(|v| {
            let proj: f64 = (0..s).map(|k| root[k] * f[k] * v[k]).sum();
            proj * proj
        })
        .collect();
    EigenDecomp::new(eig.values, weights)
}

/// Closed-form `g(theta)` for a Markov observable.
pub fn markov_g(decomp: &EigenDecomp, theta: f64) -> Result<f64> {
    let cos_t = theta.cos();
    let tiny = decomp.negligible();
    let mut g = 0.0;
    for (l, w) in decomp.pairs() {
        if w <= tiny {
            continue;
        }
        if l.abs() >= 1.0 - UNIT_EIGENVALUE_TOL {
            return Err(Error::UnitEigenvalueWeight {
                eigenvalue: l,
                weight: w,
            });
        }
        g += w * (1.0 - l * l) / (1.0 - 2.0 * l * cos_t + l * l);
    }
    Ok(g)
}

/// `sum_{k=1}^{n} z^k`.
fn geometric_partial_sum(z: ComplexValue, n: usize) -> ComplexValue {
    let one = ComplexValue::new(1.0, 0.0);
    if (one - z).norm() < 1e-6 {
        let mut acc = ComplexValue::new(0.0, 0.0);
        let mut p = one;
        for _ in 0..n {
            p *= z;
            acc += p;
        }
        return acc;
    }
    let zn = ComplexValue::from_polar(z.norm().powi(n as i32), z.arg() * n as f64);
    z * (one - zn) / (one - z)
}

/// `||E(S_n(theta) | F_0)||^2 = sum_i w_i |sum_{k=1}^{n} (lambda_i e^{i theta})^k|^2`.
pub fn markov_condfn_norm(decomp: &EigenDecomp, theta: f64, n: usize) -> f64 {
    let tiny = decomp.negligible();
    decomp
        .pairs()
        .filter(|&(_, w)| w > tiny)
        .map(|(l, w)| {
            let z = ComplexValue::new(l * theta.cos(), l * theta.sin());
            w * geometric_partial_sum(z, n).norm_sqr()
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn direct_condfn(d: &EigenDecomp, theta: f64, n: usize) -> f64 {
        d.pairs()
            .map(|(l, w)| {
                let z = ComplexValue::from_polar(1.0, theta) * l;
                let mut p = ComplexValue::new(1.0, 0.0);
                let mut s = ComplexValue::new(0.0, 0.0);
                for _ in 0..n {
                    p *= z;
                    s += p;
                }
                w * s.norm_sqr()
            })
            .sum()
    }

    #[test]
    fn two_state_eigenvalues() {
        for p in [0.1, 0.25, 0.5, 0.9] {
            let d = markov_eigen(&MarkovSpec::two_state(p).unwrap()).unwrap();
            assert_abs_diff_eq!(d.eigenvalues()[0], 1.0, epsilon = 1e-14);
            assert_abs_diff_eq!(d.eigenvalues()[1], 1.0 - 2.0 * p, epsilon = 1e-14);
            // f = (+1, -1) is the second eigenvector
            assert!(d.weights()[0] < 1e-28);
            assert_abs_diff_eq!(d.weights()[1], 1.0, epsilon = 1e-14);
            assert_abs_diff_eq!(d.c0(), 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn weights_sum_to_variance() {
        let q = vec![
            vec![0.7, 0.3, 0.0, 0.0],
            vec![0.2, 0.5, 0.3, 0.0],
            vec![0.0, 0.4, 0.2, 0.4],
            vec![0.0, 0.0, 0.5, 0.5],
        ];
        let pi_raw = [1.0, 1.5, 1.125, 0.9];
        let z: f64 = pi_raw.iter().sum();
        let pi: Vec<f64> = pi_raw.iter().map(|p| p / z).collect();
        let raw = [0.3, -1.0, 2.0, 0.7];
        let m: f64 = pi.iter().zip(raw).map(|(p, v)| p * v).sum();
        let f: Vec<f64> = raw.iter().map(|v| v - m).collect();
        let spec = MarkovSpec::new(q, pi, f).unwrap();
        let d = markov_eigen(&spec).unwrap();
        assert!((d.c0() - spec.variance()).abs() < 1e-10);
        assert!(d.eigenvalues().iter().all(|l| l.abs() <= 1.0));
        let c = d.autocov(3);
        assert_abs_diff_eq!(c[0], spec.variance(), epsilon = 1e-10);
    }

    #[test]
    fn reducible_chain_is_caught_before_spectral_use() {
        let spec = MarkovSpec::two_state(0.0).unwrap();
        assert!(spec.check_irreducible().is_err());
        let d = markov_eigen(&spec).unwrap();
        assert!(matches!(
            markov_g(&d, 1.0),
            Err(Error::UnitEigenvalueWeight { .. })
        ));
    }

    #[test]
    fn periodic_chain_g_rejected() {
        let d = markov_eigen(&MarkovSpec::two_state(1.0).unwrap()).unwrap();
        assert!(matches!(
            markov_g(&d, 1.0),
            Err(Error::UnitEigenvalueWeight { .. })
        ));
    }

    #[test]
    fn g_examples() {
        let white = EigenDecomp::new(vec![0.0], vec![1.0]).unwrap();
        for theta in [0.0, 1.0, 3.0] {
            assert_abs_diff_eq!(markov_g(&white, theta).unwrap(), 1.0);
        }
        let half = EigenDecomp::new(vec![0.5], vec![1.0]).unwrap();
        assert_abs_diff_eq!(markov_g(&half, 0.0).unwrap(), 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(markov_g(&half, PI / 2.0).unwrap(), 0.6, epsilon = 1e-14);
    }

    #[test]
    fn condfn_examples() {
        let white = EigenDecomp::new(vec![0.0], vec![1.0]).unwrap();
        assert_eq!(markov_condfn_norm(&white, 1.0, 10), 0.0);
        let half = EigenDecomp::new(vec![0.5], vec![1.0]).unwrap();
        for theta in [0.2, 1.0, 2.5] {
            assert_abs_diff_eq!(markov_condfn_norm(&half, theta, 1), 0.25, epsilon = 1e-15);
        }
        for n in 1..=4096 {
            assert!(markov_condfn_norm(&half, PI / 2.0, n) <= 4.0);
        }
    }

    #[test]
    fn decomp_validation() {
        assert!(EigenDecomp::new(vec![1.5], vec![1.0]).is_err());
        assert!(EigenDecomp::new(vec![0.5], vec![-1.0]).is_err());
        assert!(EigenDecomp::new(vec![0.5, 0.1], vec![1.0]).is_err());
    }

    proptest! {
        #[test]
        fn condfn_closed_form_matches_direct(
            ls in prop::collection::vec(-0.999f64..0.999, 1..5),
            ws in prop::collection::vec(0.0f64..2.0, 5),
            theta in 0.0f64..(2.0 * PI),
            n in 1usize..300,
        ) {
            let d = EigenDecomp::new(ls.clone(), ws[..ls.len()].to_vec()).unwrap();
            let a = markov_condfn_norm(&d, theta, n);
            let b = direct_condfn(&d, theta, n);
            prop_assert!((a - b).abs() <= 1e-9 * (1.0 + b), "{a} vs {b}");
        }

        #[test]
        fn condfn_bound(ls in prop::collection::vec(-1.0f64..1.0, 1..5),
                        theta in 0.05f64..3.09, n in 1usize..5000) {
            let w = vec![1.0 / ls.len() as f64; ls.len()];
            let d = EigenDecomp::new(ls, w).unwrap();
            let bound = 4.0 * d.c0() / (1.0 - theta.cos().powi(2));
            prop_assert!(markov_condfn_norm(&d, theta, n) <= bound * (1.0 + 1e-12));
        }
    }
}
