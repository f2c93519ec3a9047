//! Seeded generators for stationary processes: truncated linear filters of
//! i.i.d. innovations, functions of finite reversible Markov chains, and
//! instantaneous functions of a stationary Gaussian AR(1).
//!
//! Every generator starts in its exact stationary law (J pre-innovations
//! for a filter, `pi` for a chain, `N(0, 1/(1-phi^2))` for AR(1)), so no
//! warm-up is discarded. A generator is a pure function of
//! `(spec, n, seed)`.

use std::fmt::Write as _;
use std::io;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, MarkovViolation, Result};
use crate::fourier::{fft_in_place, Direction};
use crate::rng::{NormalStream, SplitMix64};

pub const ROW_SUM_TOL: f64 = 1e-12;
pub const STATIONARY_TOL: f64 = 1e-10;
pub const BALANCE_TOL: f64 = 1e-10;
pub const CENTERING_TOL: f64 = 1e-10;

/// Default truncation for the slowly decaying coefficient example.
pub const SLOW_DECAY_DEFAULT_TRUNCATION: usize = 100_000;

/// Filters with more taps than this are applied by FFT convolution.
const DIRECT_CONVOLUTION_MAX_TAPS: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Innovation {
    #[default]
    Gaussian,
    Rademacher,
}

/// `X_k = sum_{j=0}^{J} a_j eps_{k-j}` with i.i.d. mean-zero, unit-variance
/// innovations.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSpec {
    coeffs: Vec<f64>,
    innovation: Innovation,
    tail_energy: f64,
}

impl LinearSpec {
    pub fn new(coeffs: Vec<f64>, innovation: Innovation) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::EmptyCoefficients);
        }
        if let Some(i) = coeffs.iter().position(|a| !a.is_finite()) {
            return Err(Error::param(format!("coefficient a_{i} is not finite")));
        }
        if coeffs.iter().all(|&a| a == 0.0) {
            return Err(Error::param("at least one coefficient must be nonzero"));
        }
        Ok(Self {
            coeffs,
            innovation,
            tail_energy: 0.0,
        })
    }

    /// Gaussian white noise, `a = (1)`.
    pub fn iid_gauss() -> Self {
        Self::new(vec![1.0], Innovation::Gaussian).expect("valid preset")
    }

    /// MA(1) with `a = (1, 0.5)`.
    pub fn ma1() -> Self {
        Self::new(vec![1.0, 0.5], Innovation::Gaussian).expect("valid preset")
    }

    /// `a_0 = a_1 = 1`, `a_j = j^{-1/2} / ln j` for `2 <= j <= truncation`.
    /// The squared coefficients are summable but the covariances decay like
    /// `1 / ln j`, and `g` has a pole at zero.
    pub fn slow_decay(truncation: usize) -> Result<Self> {
        if truncation < 1 {
            return Err(Error::param("slow_decay truncation must be at least 1"));
        }
        let mut coeffs = Vec::with_capacity(truncation + 1);
        coeffs.extend([1.0, 1.0]);
        coeffs.extend((2..=truncation).map(|j| {
            let j = j as f64;
            1.0 / (j.sqrt() * j.ln())
        }));
        let mut spec = Self::new(coeffs, Innovation::Gaussian)?;
        spec.tail_energy = slow_decay_tail_energy(truncation);
        Ok(spec)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn innovation(&self) -> Innovation {
        self.innovation
    }

    /// Truncation lag `J` (index of the last coefficient).
    pub fn truncation(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Energy `sum_{j>J} a_j^2` dropped by truncation; zero for finite filters.
    pub fn tail_energy(&self) -> f64 {
        self.tail_energy
    }

    pub fn with_innovation(mut self, innovation: Innovation) -> Self {
        self.innovation = innovation;
        self
    }
}

/// Approximates `sum_{j>J} 1/(j ln^2 j)` by the midpoint integral
/// `1 / ln(J + 1/2)`.
pub fn slow_decay_tail_energy(truncation: usize) -> f64 {
    1.0 / (truncation as f64 + 0.5).ln()
}

/// Observable `f` of a finite reversible Markov chain with transition
/// matrix `Q` and stationary law `pi`.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovSpec {
    transition: Vec<Vec<f64>>,
    stationary: Vec<f64>,
    f: Vec<f64>,
}

impl MarkovSpec {
    /// Checks row-stochasticity, stationarity of `pi`, detailed balance and
    /// centering of `f`. Irreducibility is not required here; see
    /// [`MarkovSpec::check_irreducible`].
    pub fn new(transition: Vec<Vec<f64>>, stationary: Vec<f64>, f: Vec<f64>) -> Result<Self> {
        check_stochastic(&transition)?;
        let s = transition.len();
        if stationary.len() != s {
            return Err(MarkovViolation::StationaryLength {
                len: stationary.len(),
                expected: s,
            }
            .into());
        }
        if f.len() != s {
            return Err(MarkovViolation::ObservableLength {
                len: f.len(),
                expected: s,
            }
            .into());
        }
        let total: f64 = stationary.iter().sum();
        if let Some((index, &value)) = stationary
            .iter()
            .enumerate()
            .find(|(_, p)| !p.is_finite() || **p < 0.0)
        {
            return Err(MarkovViolation::NotDistribution {
                index,
                value,
                total,
            }
            .into());
        }
        if (total - 1.0).abs() > STATIONARY_TOL {
            return Err(MarkovViolation::NotDistribution {
                index: 0,
                value: stationary[0],
                total,
            }
            .into());
        }
        for j in 0..s {
            let pq: f64 = (0..s).map(|i| stationary[i] * transition[i][j]).sum();
            let residual = (pq - stationary[j]).abs();
            if residual > STATIONARY_TOL {
                return Err(MarkovViolation::NotStationary { index: j, residual }.into());
            }
        }
        for i in 0..s {
            for j in (i + 1)..s {
                let residual =
                    (stationary[i] * transition[i][j] - stationary[j] * transition[j][i]).abs();
                if residual > BALANCE_TOL {
                    return Err(MarkovViolation::NotReversible { i, j, residual }.into());
                }
            }
        }
        if let Some(i) = f.iter().position(|v| !v.is_finite()) {
            return Err(Error::param(format!("observable f_{i} is not finite")));
        }
        let mean: f64 = stationary.iter().zip(&f).map(|(p, v)| p * v).sum();
        if mean.abs() > CENTERING_TOL {
            return Err(MarkovViolation::Uncentered { mean }.into());
        }
        Ok(Self {
            transition,
            stationary,
            f,
        })
    }

    /// Builds a spec from `Q` and `f`, solving for the unique stationary
    /// law. The chain must be irreducible.
    pub fn from_transition(transition: Vec<Vec<f64>>, f: Vec<f64>) -> Result<Self> {
        check_stochastic(&transition)?;
        check_irreducible(&transition)?;
        let stationary = solve_stationary(&transition)?;
        Self::new(transition, stationary, f)
    }

    /// Symmetric two-state chain switching with probability `p`, observable
    /// `f = (+1, -1)`. Its autocovariances are `(1 - 2p)^|j|`.
    pub fn two_state(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::param(format!(
                "two_state switch probability {p} not in [0, 1]"
            )));
        }
        Self::new(
            vec![vec![1.0 - p, p], vec![p, 1.0 - p]],
            vec![0.5, 0.5],
            vec![1.0, -1.0],
        )
    }

    pub fn transition(&self) -> &[Vec<f64>] {
        &self.transition
    }

    pub fn stationary(&self) -> &[f64] {
        &self.stationary
    }

    pub fn observable(&self) -> &[f64] {
        &self.f
    }

    pub fn states(&self) -> usize {
        self.transition.len()
    }

    pub fn check_irreducible(&self) -> Result<()> {
        Ok(check_irreducible(&self.transition)?)
    }

    /// `c_0 = sum_i pi_i f_i^2`.
    pub fn variance(&self) -> f64 {
        self.stationary
            .iter()
            .zip(&self.f)
            .map(|(p, v)| p * v * v)
            .sum()
    }
}

fn check_stochastic(q: &[Vec<f64>]) -> Result<(), MarkovViolation> {
    let s = q.len();
    if s == 0 {
        return Err(MarkovViolation::Empty);
    }
    for (row, r) in q.iter().enumerate() {
        if r.len() != s {
            return Err(MarkovViolation::NotSquare {
                row,
                len: r.len(),
                expected: s,
            });
        }
        if let Some((col, &value)) = r
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || **v < 0.0)
        {
            return Err(MarkovViolation::NegativeEntry { row, col, value });
        }
        let sum: f64 = r.iter().sum();
        if (sum - 1.0).abs() > ROW_SUM_TOL {
            return Err(MarkovViolation::RowNotStochastic { row, sum });
        }
    }
    Ok(())
}

fn reachable(q: &[Vec<f64>], start: usize, forward: bool) -> Vec<bool> {
    let s = q.len();
    let mut seen = vec![false; s];
    let mut stack = vec![start];
    seen[start] = true;
    while let Some(i) = stack.pop() {
        for j in 0..s {
            let w = if forward { q[i][j] } else { q[j][i] };
            if w > 0.0 && !seen[j] {
                seen[j] = true;
                stack.push(j);
            }
        }
    }
    seen
}

fn check_irreducible(q: &[Vec<f64>]) -> Result<(), MarkovViolation> {
    for (forward, seen) in [
        (true, reachable(q, 0, true)),
        (false, reachable(q, 0, false)),
    ] {
        if let Some(k) = seen.iter().position(|v| !v) {
            let (from, to) = if forward { (0, k) } else { (k, 0) };
            return Err(MarkovViolation::Reducible { from, to });
        }
    }
    Ok(())
}

/// Solves `pi (Q - I) = 0`, `sum pi = 1` by Gaussian elimination with
/// partial pivoting.
fn solve_stationary(q: &[Vec<f64>]) -> Result<Vec<f64>, MarkovViolation> {
    let s = q.len();
    // row i of the system: sum_k pi_k (Q_ki - delta_ki) = 0, last row replaced by normalisation
    let mut a: Vec<Vec<f64>> = (0..s)
        .map(|i| {
            let mut row: Vec<f64> = (0..s)
                .map(|k| q[k][i] - if k == i { 1.0 } else { 0.0 })
                .collect();
            row.push(0.0);
            row
        })
        .collect();
    a[s - 1] = vec![1.0; s + 1];
    for col in 0..s {
        let pivot = (col..s)
            .max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))
            .expect("non-empty range");
        if a[pivot][col].abs() < 1e-14 {
            return Err(MarkovViolation::NoUniqueStationary);
        }
        a.swap(col, pivot);
        for r in 0..s {
            if r != col {
                let factor = a[r][col] / a[col][col];
                if factor != 0.0 {
                    for c in col..=s {
                        a[r][c] -= factor * a[col][c];
                    }
                }
            }
        }
    }
    Ok((0..s).map(|i| a[i][s] / a[i][i]).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Nonlinearity {
    Sign,
    Cube,
}

impl Nonlinearity {
    #[inline]
    pub fn apply(self, y: f64) -> f64 {
        match self {
            Nonlinearity::Sign => {
                if y > 0.0 {
                    1.0
                } else if y < 0.0 {
                    -1.0
                } else {
                    0.0
                }
            }
            Nonlinearity::Cube => y * y * y,
        }
    }

    /// Mean of `h(Y)` for `Y ~ N(0, variance)`. Both nonlinearities are odd.
    pub fn gaussian_mean(self, _variance: f64) -> f64 {
        match self {
            Nonlinearity::Sign | Nonlinearity::Cube => 0.0,
        }
    }
}

/// `X_k = h(Y_k) - centering` for a stationary AR(1) `Y_k = phi Y_{k-1} + eps_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianFunctionalSpec {
    phi: f64,
    h: Nonlinearity,
    centering: f64,
}

impl GaussianFunctionalSpec {
    pub fn new(phi: f64, h: Nonlinearity) -> Result<Self> {
        if !phi.is_finite() || phi.abs() >= 1.0 {
            return Err(Error::param(format!(
                "AR(1) coefficient phi={phi} must satisfy |phi| < 1"
            )));
        }
        let centering = h.gaussian_mean(1.0 / (1.0 - phi * phi));
        Ok(Self { phi, h, centering })
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn nonlinearity(&self) -> Nonlinearity {
        self.h
    }

    pub fn centering(&self) -> f64 {
        self.centering
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProcessSpec {
    Linear(LinearSpec),
    Markov(MarkovSpec),
    GaussianFunctional(GaussianFunctionalSpec),
}

impl ProcessSpec {
    pub fn kind_name(&self) -> &'static str {
        match self {
            ProcessSpec::Linear(_) => "linear",
            ProcessSpec::Markov(_) => "markov",
            ProcessSpec::GaussianFunctional(_) => "gaussian_functional",
        }
    }

    /// Prepares a generator for paths of length `n`.
    pub fn sampler(self: &Arc<Self>, n: usize) -> Result<Sampler> {
        if n == 0 {
            return Err(Error::param("path length n must be at least 1"));
        }
        let engine = match self.as_ref() {
            ProcessSpec::Linear(spec) => Engine::Linear(LinearEngine::new(spec, n)?),
            ProcessSpec::Markov(spec) => Engine::Markov(MarkovEngine::new(spec)),
            ProcessSpec::GaussianFunctional(_) => Engine::Gaussian,
        };
        Ok(Sampler {
            spec: Arc::clone(self),
            n,
            engine,
        })
    }
}

impl From<LinearSpec> for ProcessSpec {
    fn from(s: LinearSpec) -> Self {
        ProcessSpec::Linear(s)
    }
}

impl From<MarkovSpec> for ProcessSpec {
    fn from(s: MarkovSpec) -> Self {
        ProcessSpec::Markov(s)
    }
}

impl From<GaussianFunctionalSpec> for ProcessSpec {
    fn from(s: GaussianFunctionalSpec) -> Self {
        ProcessSpec::GaussianFunctional(s)
    }
}

/// A realisation `X_1..X_n` with its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    pub values: Vec<f64>,
    pub spec: Arc<ProcessSpec>,
    pub seed: u64,
}

impl Path {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// CSV with header `index,value`, one row per `k = 1..n`.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(24 * self.values.len() + 12);
        out.push_str("index,value\n");
        for (k, v) in self.values.iter().enumerate() {
            writeln!(out, "{},{}", k + 1, v).expect("writing to a String cannot fail");
        }
        out
    }

    pub fn write_csv<W: io::Write>(&self, mut w: W) -> io::Result<()> {
        w.write_all(self.to_csv().as_bytes())
    }
}

/// Generator prepared for one `(spec, n)`; cheap to call per seed and safe
/// to share across threads.
#[derive(Debug)]
pub struct Sampler {
    spec: Arc<ProcessSpec>,
    n: usize,
    engine: Engine,
}

#[derive(Debug)]
enum Engine {
    Linear(LinearEngine),
    Markov(MarkovEngine),
    Gaussian,
}

impl Sampler {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn spec(&self) -> &Arc<ProcessSpec> {
        &self.spec
    }

    pub fn values(&self, seed: u64) -> Vec<f64> {
        match (&self.engine, self.spec.as_ref()) {
            (Engine::Linear(e), ProcessSpec::Linear(spec)) => e.generate(spec, self.n, seed),
            (Engine::Markov(e), ProcessSpec::Markov(spec)) => e.generate(spec, self.n, seed),
            (Engine::Gaussian, ProcessSpec::GaussianFunctional(spec)) => {
                generate_gaussian_functional(spec, self.n, seed)
            }
            _ => unreachable!("engine always matches its spec"),
        }
    }

    pub fn path(&self, seed: u64) -> Path {
        Path {
            values: self.values(seed),
            spec: Arc::clone(&self.spec),
            seed,
        }
    }
}

#[derive(Debug)]
enum LinearEngine {
    Direct,
    Fft { size: usize, kernel: Vec<Complex64> },
}

impl LinearEngine {
    fn new(spec: &LinearSpec, n: usize) -> Result<Self> {
        let taps = spec.coeffs.len();
        if taps <= DIRECT_CONVOLUTION_MAX_TAPS {
            return Ok(LinearEngine::Direct);
        }
        // circular wrap-around only touches outputs before index J
        let size = (n + taps - 1).next_power_of_two();
        let mut kernel = vec![Complex64::new(0.0, 0.0); size];
        for (k, &a) in kernel.iter_mut().zip(&spec.coeffs) {
            k.re = a;
        }
        fft_in_place(&mut kernel, Direction::Forward)?;
        let scale = 1.0 / size as f64;
        kernel.iter_mut().for_each(|z| *z *= scale);
        Ok(LinearEngine::Fft { size, kernel })
    }

    fn generate(&self, spec: &LinearSpec, n: usize, seed: u64) -> Vec<f64> {
        let lag = spec.truncation();
        // innov[i] holds eps_{i + 1 - J}
        let innov = draw_innovations(spec.innovation, n + lag, seed);
        match self {
            LinearEngine::Direct => (0..n)
                .map(|k| {
                    spec.coeffs
                        .iter()
                        .enumerate()
                        .map(|(j, a)| a * innov[k + lag - j])
                        .sum()
                })
                .collect(),
            LinearEngine::Fft { size, kernel } => {
                let mut buf = vec![Complex64::new(0.0, 0.0); *size];
                for (b, &e) in buf.iter_mut().zip(&innov) {
                    b.re = e;
                }
                fft_in_place(&mut buf, Direction::Forward).expect("power-of-two buffer");
                buf.iter_mut().zip(kernel).for_each(|(b, k)| *b *= k);
                fft_in_place(&mut buf, Direction::Inverse).expect("power-of-two buffer");
                buf[lag..lag + n].iter().map(|z| z.re).collect()
            }
        }
    }
}

fn draw_innovations(kind: Innovation, count: usize, seed: u64) -> Vec<f64> {
    match kind {
        Innovation::Gaussian => {
            let mut out = vec![0.0; count];
            NormalStream::new(seed).fill(&mut out);
            out
        }
        Innovation::Rademacher => {
            let mut rng = SplitMix64::new(seed);
            (0..count).map(|_| rng.next_sign()).collect()
        }
    }
}

#[derive(Debug)]
struct MarkovEngine {
    initial_cdf: Vec<f64>,
    row_cdfs: Vec<Vec<f64>>,
}

fn cumulative(p: &[f64]) -> Vec<f64> {
    p.iter()
        .scan(0.0, |acc, &v| {
            *acc += v;
            Some(*acc)
        })
        .collect()
}

#[inline]
fn inverse_cdf(cdf: &[f64], u: f64) -> usize {
    cdf.iter().position(|&c| u < c).unwrap_or(cdf.len() - 1)
}

impl MarkovEngine {
    fn new(spec: &MarkovSpec) -> Self {
        Self {
            initial_cdf: cumulative(&spec.stationary),
            row_cdfs: spec.transition.iter().map(|r| cumulative(r)).collect(),
        }
    }

    fn generate(&self, spec: &MarkovSpec, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = SplitMix64::new(seed);
        let mut state = inverse_cdf(&self.initial_cdf, rng.next_f64());
        (0..n)
            .map(|_| {
                state = inverse_cdf(&self.row_cdfs[state], rng.next_f64());
                spec.f[state]
            })
            .collect()
    }
}

fn generate_gaussian_functional(spec: &GaussianFunctionalSpec, n: usize, seed: u64) -> Vec<f64> {
    let mut eps = NormalStream::new(seed);
    let mut y = eps.next_normal() / (1.0 - spec.phi * spec.phi).sqrt();
    (0..n)
        .map(|_| {
            y = spec.phi * y + eps.next_normal();
            spec.h.apply(y) - spec.centering
        })
        .collect()
}

pub fn gen_linear(spec: &LinearSpec, n: usize, seed: u64) -> Result<Path> {
    Ok(Arc::new(ProcessSpec::Linear(spec.clone()))
        .sampler(n)?
        .path(seed))
}

pub fn gen_markov(spec: &MarkovSpec, n: usize, seed: u64) -> Result<Path> {
    Ok(Arc::new(ProcessSpec::Markov(spec.clone()))
        .sampler(n)?
        .path(seed))
}

pub fn gen_gaussian_functional(spec: &GaussianFunctionalSpec, n: usize, seed: u64) -> Result<Path> {
    Ok(Arc::new(ProcessSpec::GaussianFunctional(spec.clone()))
        .sampler(n)?
        .path(seed))
}
