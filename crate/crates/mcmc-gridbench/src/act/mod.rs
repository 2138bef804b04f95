//! Autocorrelation-time estimation for scalar time series.
//!
//! A chain coordinate is modeled as an AR(p) process fit by Yule–Walker,
//! with the order chosen by AIC. The autocorrelation time of the fitted
//! process is
//!
//! ```text
//! tau = (1 - rho' pi) / (1 - sum(pi))^2
//! ```
//!
//! where `pi` are the AR coefficients and `rho` the autocorrelations at lags
//! `1..p`. Confidence intervals come from simulating coefficient vectors
//! from the asymptotic Gaussian of the Yule–Walker estimator and screening
//! each draw for stationarity; nonstationary draws count as `tau = +inf`, so
//! enough of them makes the upper limit unbounded. An independent
//! initial-convex-sequence estimator ([`act_ics`]) is provided as a
//! cross-check.
//!
//! All operations are pure given their inputs; the CI random stream is an
//! explicit argument, so everything here is safe to call from any number of
//! worker threads.

mod ci;
mod ics;
mod roots;

pub use ci::act_ci;
pub use ics::act_ics;
pub use roots::{ar_to_acf, is_stationary};

use nalgebra::DMatrix;
use rand_chacha::ChaCha8Rng;
use std::collections::HashSet;
use thiserror::Error;

/// Minimum number of distinct values a series needs before an AR model is
/// even attempted; below this the estimate is reported as degenerate.
pub const UNIQUE_MIN: usize = 10;

/// Roots of the AR characteristic polynomial with modulus at most
/// `1 + ROOT_TOL` count as nonstationary.
pub const ROOT_TOL: f64 = 1e-8;

/// Innovation-variance ratios at or below this are treated as a singular
/// correlation matrix.
const SINGULAR_TOL: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum ActError {
    #[error("series variance is zero")]
    ZeroVariance,
    #[error("max lag {max_lag} out of range for series of length {n}")]
    BadLag { max_lag: usize, n: usize },
    #[error("sample correlation matrix is singular (near-deterministic series)")]
    SingularToeplitz,
    #[error("too few distinct values to identify an AR model")]
    Degenerate,
    #[error("coefficients do not define a stationary process")]
    NonstationaryInput,
    #[error("series must hold at least 2 finite values")]
    InvalidSeries,
}

/// How the series mean enters the autocorrelation computation.
///
/// Test distributions usually have a known mean; using it avoids the bias
/// from centering on the sample mean of a short, correlated chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeanMode {
    Known(f64),
    Estimate,
}

/// A borrowed scalar series plus its mean handling.
#[derive(Debug, Clone, Copy)]
pub struct SeriesView<'a> {
    values: &'a [f64],
    mean_mode: MeanMode,
}

impl<'a> SeriesView<'a> {
    pub fn new(values: &'a [f64], mean_mode: MeanMode) -> Result<Self, ActError> {
        if values.len() < 2 || values.iter().any(|v| !v.is_finite()) {
            return Err(ActError::InvalidSeries);
        }
        Ok(Self { values, mean_mode })
    }

    pub fn values(&self) -> &'a [f64] {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean_mode(&self) -> MeanMode {
        self.mean_mode
    }

    /// The centering value: the known mean if declared, else the sample mean.
    pub fn mean(&self) -> f64 {
        match self.mean_mode {
            MeanMode::Known(m) => m,
            MeanMode::Estimate => self.values.iter().sum::<f64>() / self.values.len() as f64,
        }
    }
}

/// An AR(p) fit in correlation units.
#[derive(Debug, Clone)]
pub struct ArFit {
    pub order: usize,
    /// AR coefficients `pi_1..pi_p`.
    pub coeffs: Vec<f64>,
    /// Sample autocorrelations at lags `1..p`.
    pub acf: Vec<f64>,
    /// Asymptotic covariance of the coefficient estimator, symmetrized.
    pub cov: DMatrix<f64>,
    /// Series length the fit came from.
    pub n: usize,
    /// `1 - rho' pi`, the innovation variance over the series variance.
    pub innovation_ratio: f64,
}

impl ArFit {
    /// The order-zero (white noise) fit.
    pub fn white_noise(n: usize) -> Self {
        ArFit {
            order: 0,
            coeffs: Vec::new(),
            acf: Vec::new(),
            cov: DMatrix::zeros(0, 0),
            n,
            innovation_ratio: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActMethod {
    Ar,
    Ics,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActStatus {
    Ok,
    Degenerate,
    Nonstationary,
}

impl std::fmt::Display for ActStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ActStatus::Ok => "ok",
            ActStatus::Degenerate => "degenerate",
            ActStatus::Nonstationary => "nonstationary",
        })
    }
}

impl std::str::FromStr for ActStatus {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "ok" => Ok(ActStatus::Ok),
            "degenerate" => Ok(ActStatus::Degenerate),
            "nonstationary" => Ok(ActStatus::Nonstationary),
            _ => Err(()),
        }
    }
}

/// An autocorrelation-time estimate with its confidence bounds.
///
/// When `status` is `Degenerate` the numeric fields are NaN and carry no
/// meaning; when it is `Nonstationary` they are `+inf`.
#[derive(Debug, Clone)]
pub struct ActEstimate {
    pub tau: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub method: ActMethod,
    pub status: ActStatus,
    /// AR order used; 0 for the initial-convex-sequence estimator.
    pub order: usize,
}

impl ActEstimate {
    pub fn degenerate(method: ActMethod) -> Self {
        ActEstimate {
            tau: f64::NAN,
            ci_low: f64::NAN,
            ci_high: f64::NAN,
            method,
            status: ActStatus::Degenerate,
            order: 0,
        }
    }

    pub fn nonstationary(order: usize) -> Self {
        ActEstimate {
            tau: f64::INFINITY,
            ci_low: f64::INFINITY,
            ci_high: f64::INFINITY,
            method: ActMethod::Ar,
            status: ActStatus::Nonstationary,
            order,
        }
    }
}

/// Options for [`estimate_act`].
#[derive(Debug, Clone)]
pub struct ActOptions {
    /// Maximum AR order for the AIC sweep; `None` uses [`default_p_max`].
    pub p_max: Option<usize>,
    pub ci_draws: usize,
    pub ci_level: f64,
}

impl Default for ActOptions {
    fn default() -> Self {
        ActOptions {
            p_max: None,
            ci_draws: 1000,
            ci_level: 0.95,
        }
    }
}

/// Conventional cap on the AR order sweep: `min(50, ceil(10 log10 n))`.
pub fn default_p_max(n: usize) -> usize {
    let by_len = (10.0 * (n as f64).log10()).ceil() as usize;
    by_len.min(50)
}

/// Sample autocorrelations at lags `1..=max_lag`.
///
/// Element `k-1` is `(1/(n s^2)) * sum_{i=1}^{n-k} (x_i - m)(x_{i+k} - m)`
/// with `m` taken from the series' mean mode and `s^2` the divisor-`n`
/// variance around `m`. The divisor-`n` convention keeps the implied
/// correlation matrix positive semidefinite.
pub fn sample_acf(series: &SeriesView<'_>, max_lag: usize) -> Result<Vec<f64>, ActError> {
    let n = series.len();
    if max_lag < 1 || max_lag > n - 1 {
        return Err(ActError::BadLag { max_lag, n });
    }
    let m = series.mean();
    let vals = series.values();
    let s2 = vals.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n as f64;
    if s2 <= 0.0 {
        return Err(ActError::ZeroVariance);
    }
    let denom = n as f64 * s2;
    let mut acf = Vec::with_capacity(max_lag);
    for k in 1..=max_lag {
        let mut sum = 0.0;
        for i in 0..n - k {
            sum += (vals[i] - m) * (vals[i + k] - m);
        }
        acf.push(sum / denom);
    }
    Ok(acf)
}

/// One step of the Levinson recursion per order: coefficients and the
/// explicit innovation ratio `1 - rho' pi`. Stops early when the implied
/// correlation matrix becomes singular.
fn levinson_sweep(acf: &[f64]) -> Vec<(Vec<f64>, f64)> {
    let p = acf.len();
    let mut out: Vec<(Vec<f64>, f64)> = Vec::with_capacity(p);
    let mut phi: Vec<f64> = Vec::with_capacity(p);
    let mut err = 1.0_f64; // prediction error in correlation units
    for m in 1..=p {
        if err <= SINGULAR_TOL {
            break;
        }
        let mut acc = acf[m - 1];
        for (j, &c) in phi.iter().enumerate() {
            acc -= c * acf[m - 2 - j];
        }
        let k = acc / err;
        let prev = phi.clone();
        phi.push(0.0);
        for j in 0..m - 1 {
            phi[j] = prev[j] - k * prev[m - 2 - j];
        }
        phi[m - 1] = k;
        err *= 1.0 - k * k;

        let ratio = 1.0 - phi.iter().zip(acf).map(|(c, r)| c * r).sum::<f64>();
        if ratio <= SINGULAR_TOL {
            break;
        }
        out.push((phi.clone(), ratio));
    }
    out
}

fn toeplitz(acf: &[f64], p: usize) -> DMatrix<f64> {
    DMatrix::from_fn(p, p, |i, j| {
        let lag = i.abs_diff(j);
        if lag == 0 {
            1.0
        } else {
            acf[lag - 1]
        }
    })
}

fn make_fit(acf: &[f64], coeffs: Vec<f64>, innovation_ratio: f64, n: usize) -> Result<ArFit, ActError> {
    let p = coeffs.len();
    if p == 0 {
        return Ok(ArFit::white_noise(n));
    }
    let r = toeplitz(acf, p);
    let r_inv = r.try_inverse().ok_or(ActError::SingularToeplitz)?;
    let mut cov = r_inv * (innovation_ratio / n as f64);
    // symmetrize; inversion leaves 1e-16-scale asymmetry behind
    let cov_t = cov.transpose();
    cov = (cov + cov_t) * 0.5;
    Ok(ArFit {
        order: p,
        coeffs,
        acf: acf[..p].to_vec(),
        cov,
        n,
        innovation_ratio,
    })
}

/// Fit AR(p) coefficients to the given sample autocorrelations by solving
/// the Yule–Walker system `R pi = rho`, where `R` is the correlation
/// Toeplitz matrix. The covariance of the estimator is
/// `(1 - rho' pi) R^{-1} / n`.
pub fn yule_walker(acf: &[f64], n: usize) -> Result<ArFit, ActError> {
    assert!(!acf.is_empty(), "yule_walker needs at least one lag");
    let steps = levinson_sweep(acf);
    if steps.len() < acf.len() {
        return Err(ActError::SingularToeplitz);
    }
    let (coeffs, ratio) = steps.into_iter().last().expect("nonempty");
    make_fit(acf, coeffs, ratio, n)
}

fn distinct_values(values: &[f64]) -> usize {
    let mut seen = HashSet::new();
    for v in values {
        seen.insert(v.to_bits());
        if seen.len() >= UNIQUE_MIN {
            return seen.len();
        }
    }
    seen.len()
}

/// Fit AR(p) for every order `0..=p_max` and keep the fit minimizing
/// `AIC(p) = n ln(sigma_a^2(p)) + 2p`, where `sigma_a^2(p)` is the fitted
/// innovation variance. Order zero is always a candidate, so white-noise
/// series resolve to an empty fit rather than a forced AR(1).
pub fn select_order(series: &SeriesView<'_>, p_max: usize) -> Result<ArFit, ActError> {
    let n = series.len();
    if distinct_values(series.values()) < UNIQUE_MIN {
        return Err(ActError::Degenerate);
    }
    let m = series.mean();
    let s2 = series.values().iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n as f64;
    if s2 <= 0.0 {
        return Err(ActError::Degenerate);
    }

    let nf = n as f64;
    let mut best_order = 0usize;
    let mut best_aic = nf * s2.ln();
    let p_hi = p_max.min(n - 1);
    if p_hi == 0 {
        return Ok(ArFit::white_noise(n));
    }
    let acf = match sample_acf(series, p_hi) {
        Ok(a) => a,
        Err(ActError::ZeroVariance) => return Err(ActError::Degenerate),
        Err(e) => return Err(e),
    };
    let steps = levinson_sweep(&acf);
    for (idx, (_, ratio)) in steps.iter().enumerate() {
        let p = idx + 1;
        let aic = nf * (s2 * ratio).ln() + 2.0 * p as f64;
        if aic < best_aic {
            best_aic = aic;
            best_order = p;
        }
    }
    if best_order == 0 {
        return Ok(ArFit::white_noise(n));
    }
    let (coeffs, ratio) = steps[best_order - 1].clone();
    make_fit(&acf[..best_order], coeffs, ratio, n)
}

/// Autocorrelation time of a fitted AR(p) process:
/// `(1 - rho' pi) / (1 - sum(pi))^2`. Exactly 1 for order zero.
///
/// Callers screen stationarity first; a fit with roots on or inside the
/// unit circle has no finite autocorrelation time.
pub fn act_point(fit: &ArFit) -> f64 {
    if fit.order == 0 {
        return 1.0;
    }
    let num = 1.0 - fit.coeffs.iter().zip(&fit.acf).map(|(c, r)| c * r).sum::<f64>();
    let den = 1.0 - fit.coeffs.iter().sum::<f64>();
    num / (den * den)
}

/// Full pipeline for one series: order selection, stationarity screen,
/// point estimate, and simulated confidence interval.
///
/// Failures surface through `status`, never as errors: degenerate series
/// yield `Degenerate`, and a selected fit with roots inside or on the unit
/// circle yields `Nonstationary` with `tau = +inf`.
pub fn estimate_act(series: &SeriesView<'_>, opts: &ActOptions, rng: &mut ChaCha8Rng) -> ActEstimate {
    let p_max = opts.p_max.unwrap_or_else(|| default_p_max(series.len()));
    let fit = match select_order(series, p_max) {
        Ok(fit) => fit,
        Err(_) => return ActEstimate::degenerate(ActMethod::Ar),
    };
    if !is_stationary(&fit.coeffs) {
        return ActEstimate::nonstationary(fit.order);
    }
    let tau = act_point(&fit);
    let (lo, hi) = act_ci(&fit, opts.ci_draws, opts.ci_level, rng);
    ActEstimate {
        tau,
        ci_low: lo.min(tau),
        ci_high: hi.max(tau),
        method: ActMethod::Ar,
        status: ActStatus::Ok,
        order: fit.order,
    }
}

#[cfg(test)]
pub(crate) mod testutil {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use crate::rng::RandomSource;

    /// Simulates a stationary AR(1) chain with unit innovation variance,
    /// started from the stationary distribution.
    pub fn simulate_ar1(pi: f64, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::with_capacity(n);
        let mut x = rng.normal() / (1.0 - pi * pi).sqrt();
        out.push(x);
        for _ in 1..n {
            x = pi * x + rng.normal();
            out.push(x);
        }
        out
    }

    pub fn white_noise(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.normal()).collect()
    }
}
