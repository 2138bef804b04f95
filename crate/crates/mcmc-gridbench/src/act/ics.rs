//! Initial-convex-sequence estimator of the autocorrelation time.
//!
//! Adjacent autocorrelation pairs `Gamma_m = rho_{2m} + rho_{2m+1}` are
//! computed until one goes nonpositive, the kept prefix is replaced by its
//! greatest nonincreasing convex minorant, and the estimate is
//! `2 * sum(Gamma) - 1`. This shares nothing with the AR route past the
//! definition of the sample autocorrelation, which makes it a useful
//! cross-check; it carries no confidence interval.

use super::{ActEstimate, ActMethod, ActStatus, SeriesView};

/// Biased (divisor n) autocovariance of centered values at one lag.
fn autocov(centered: &[f64], lag: usize) -> f64 {
    let n = centered.len();
    centered[..n - lag]
        .iter()
        .zip(&centered[lag..])
        .map(|(a, b)| a * b)
        .sum::<f64>()
        / n as f64
}

/// Largest prefix of pair sums that stays strictly positive. Lags are
/// computed one at a time so well-mixed series stop after a handful of
/// dot products instead of a full O(n^2) autocorrelation pass.
fn positive_pair_sums(centered: &[f64], gamma0: f64) -> Vec<f64> {
    let n = centered.len();
    let mut out = Vec::new();
    let mut m = 0usize;
    while 2 * m + 1 <= n - 1 {
        let even = if m == 0 { gamma0 } else { autocov(centered, 2 * m) };
        let odd = autocov(centered, 2 * m + 1);
        let pair = (even + odd) / gamma0;
        if pair <= 0.0 {
            break;
        }
        out.push(pair);
        m += 1;
    }
    out
}

/// In-place greatest convex minorant of a nonincreasing sequence:
/// pool-adjacent-violators on the first differences, anchored at the first
/// element.
fn convex_minorant(g: &mut [f64]) {
    let m = g.len();
    if m < 2 {
        return;
    }
    let k = m - 1;
    let mut sums: Vec<f64> = (1..m).map(|i| g[i] - g[i - 1]).collect();
    let mut widths: Vec<f64> = vec![1.0; k];
    let mut top = 0usize;
    for i in 0..k {
        sums[top] = sums[i];
        widths[top] = 1.0;
        top += 1;
        while top > 1 && sums[top - 1] / widths[top - 1] < sums[top - 2] / widths[top - 2] {
            sums[top - 2] += sums[top - 1];
            widths[top - 2] += widths[top - 1];
            top -= 1;
        }
    }
    let mut idx = 1usize;
    for b in 0..top {
        let slope = sums[b] / widths[b];
        for _ in 0..widths[b] as usize {
            g[idx] = g[idx - 1] + slope;
            idx += 1;
        }
    }
}

/// Autocorrelation-time estimate from the initial convex sequence.
///
/// Needs at least 4 values and nonzero variance; otherwise the estimate is
/// degenerate. The returned bounds equal the point estimate (no interval is
/// modeled for this method).
pub fn act_ics(series: &SeriesView<'_>) -> ActEstimate {
    let n = series.len();
    if n < 4 {
        return ActEstimate::degenerate(ActMethod::Ics);
    }
    let m = series.mean();
    let centered: Vec<f64> = series.values().iter().map(|v| v - m).collect();
    let gamma0 = centered.iter().map(|v| v * v).sum::<f64>() / n as f64;
    if gamma0 <= 0.0 {
        return ActEstimate::degenerate(ActMethod::Ics);
    }

    let mut pairs = positive_pair_sums(&centered, gamma0);
    // running minimum, then convexify; Gamma_0 = 1 + rho_1 > 0 for any
    // non-constant series, so the prefix is never empty
    let mut min = f64::MAX;
    for g in pairs.iter_mut() {
        if *g > min {
            *g = min;
        } else {
            min = *g;
        }
    }
    convex_minorant(&mut pairs);

    let tau = 2.0 * pairs.iter().sum::<f64>() - 1.0;
    ActEstimate {
        tau,
        ci_low: tau,
        ci_high: tau,
        method: ActMethod::Ics,
        status: ActStatus::Ok,
        order: 0,
    }
}
