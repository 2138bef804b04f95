//! Simulation-based confidence intervals for the autocorrelation time.

use nalgebra::{DMatrix, DVector};
use rand_chacha::ChaCha8Rng;

use super::roots::ar_to_acf_unchecked;
use super::{is_stationary, ArFit};
use crate::rng::RandomSource;

/// Symmetric square root via eigendecomposition, clipping negative
/// eigenvalues at zero. The covariance can be indefinite at the 1e-12
/// scale after inversion and rescaling.
fn symmetric_sqrt(v: &DMatrix<f64>) -> DMatrix<f64> {
    let sym = (v + v.transpose()) * 0.5;
    let eig = nalgebra::SymmetricEigen::new(sym);
    let roots = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
    &eig.eigenvectors * DMatrix::from_diagonal(&roots) * eig.eigenvectors.transpose()
}

/// Order statistic at quantile `q` of an ascending-sorted slice.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let m = sorted.len();
    let idx = ((q * m as f64).ceil() as usize).clamp(1, m);
    sorted[idx - 1]
}

/// Equal-tailed confidence interval for the autocorrelation time of `fit`.
///
/// Draws coefficient vectors from a Gaussian centered at the fitted
/// coefficients with the fit's asymptotic covariance (through a symmetric
/// square-root factor). Stationary draws map to an autocorrelation time via
/// their implied autocorrelations; nonstationary draws count as `+inf`.
/// Returns the `(1-level)/2` and `1-(1-level)/2` empirical quantiles, so
/// the upper limit is unbounded whenever more than `(1-level)/2` of the
/// draws are nonstationary. An order-zero fit has no coefficient
/// uncertainty to propagate and returns `(1, 1)`.
pub fn act_ci(fit: &ArFit, draws: usize, level: f64, rng: &mut ChaCha8Rng) -> (f64, f64) {
    assert!(draws >= 100, "need at least 100 draws");
    assert!(level > 0.0 && level < 1.0, "level must be in (0, 1)");
    let p = fit.order;
    if p == 0 {
        return (1.0, 1.0);
    }
    let factor = symmetric_sqrt(&fit.cov);
    let center = DVector::from_column_slice(&fit.coeffs);
    let mut taus = Vec::with_capacity(draws);
    let mut infinite = 0usize;
    for _ in 0..draws {
        let z = DVector::from_fn(p, |_, _| rng.normal());
        let cand = &center + &factor * z;
        let coeffs = cand.as_slice();
        let tau = if is_stationary(coeffs) {
            match ar_to_acf_unchecked(coeffs, p) {
                Some(rho) => {
                    let num = 1.0 - rho.iter().zip(coeffs).map(|(r, c)| r * c).sum::<f64>();
                    let den = 1.0 - coeffs.iter().sum::<f64>();
                    num / (den * den)
                }
                None => f64::INFINITY,
            }
        } else {
            f64::INFINITY
        };
        if tau.is_infinite() {
            infinite += 1;
        }
        taus.push(tau);
    }
    taus.sort_by(f64::total_cmp);
    let alpha = (1.0 - level) / 2.0;
    let lo = quantile(&taus, alpha);
    let mut hi = quantile(&taus, 1.0 - alpha);
    if infinite as f64 / draws as f64 > alpha {
        hi = f64::INFINITY;
    }
    (lo, hi)
}
