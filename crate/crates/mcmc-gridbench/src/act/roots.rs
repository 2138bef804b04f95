//! Stationarity screening and the coefficient-to-autocorrelation map for
//! AR(p) processes.

use nalgebra::DMatrix;

use super::{ActError, ROOT_TOL};

// Trailing coefficients smaller than this are dropped before building the
// companion matrix; dividing by them would overflow without changing the
// stationarity verdict.
const TRIM_EPS: f64 = 1e-300;

/// Whether `1 - pi_1 z - ... - pi_p z^p` has all roots strictly outside the
/// unit circle (with tolerance [`ROOT_TOL`]). Any root with modulus at most
/// `1 + ROOT_TOL` makes the process nonstationary, including exact unit
/// roots. Order zero is stationary.
///
/// Roots are computed as the eigenvalues of the companion matrix of the
/// monic form of the polynomial, which stays robust for orders up to the
/// cap used by order selection.
pub fn is_stationary(coeffs: &[f64]) -> bool {
    let p = coeffs
        .iter()
        .rposition(|c| c.abs() > TRIM_EPS)
        .map_or(0, |i| i + 1);
    if p == 0 {
        return true;
    }
    if coeffs[..p].iter().any(|c| !c.is_finite()) {
        return false;
    }
    let lead = coeffs[p - 1];
    let mut companion = DMatrix::<f64>::zeros(p, p);
    for i in 1..p {
        companion[(i, i - 1)] = 1.0;
    }
    companion[(0, p - 1)] = 1.0 / lead;
    for i in 1..p {
        companion[(i, p - 1)] = -coeffs[i - 1] / lead;
    }
    let eigenvalues = companion.complex_eigenvalues();
    eigenvalues.iter().all(|z| z.norm() > 1.0 + ROOT_TOL)
}

/// Theoretical autocorrelations `rho_1..rho_lags` of a stationary AR(p)
/// process: the first `p` values solve the linear system implied by
/// `rho_k = sum_j pi_j rho_{k-j}` with `rho_0 = 1` and `rho_{-k} = rho_k`,
/// and later lags extend by the same recursion.
pub fn ar_to_acf(coeffs: &[f64], lags: usize) -> Result<Vec<f64>, ActError> {
    if !is_stationary(coeffs) {
        return Err(ActError::NonstationaryInput);
    }
    ar_to_acf_unchecked(coeffs, lags).ok_or(ActError::NonstationaryInput)
}

/// Same as [`ar_to_acf`] but skips the stationarity screen; callers that
/// already screened (the CI simulation) use this. Returns `None` when the
/// linear solve fails.
pub(crate) fn ar_to_acf_unchecked(coeffs: &[f64], lags: usize) -> Option<Vec<f64>> {
    if lags == 0 {
        return Some(Vec::new());
    }
    let p = coeffs.len();
    if p == 0 {
        return Some(vec![0.0; lags]);
    }
    let mut a = DMatrix::<f64>::zeros(p, p);
    let mut b = nalgebra::DVector::<f64>::zeros(p);
    for k in 1..=p {
        a[(k - 1, k - 1)] += 1.0;
        for j in 1..=p {
            let lag = k.abs_diff(j);
            if lag == 0 {
                b[k - 1] += coeffs[j - 1];
            } else {
                a[(k - 1, lag - 1)] -= coeffs[j - 1];
            }
        }
    }
    let head = a.lu().solve(&b)?;
    let mut rho: Vec<f64> = head.iter().copied().collect();
    for k in p + 1..=lags {
        let next: f64 = (1..=p).map(|j| coeffs[j - 1] * rho[k - 1 - j]).sum();
        rho.push(next);
    }
    rho.truncate(lags);
    Some(rho)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn unit_root_is_nonstationary() {
        assert!(!is_stationary(&[1.0]));
    }

    #[test]
    fn ar1_half_is_stationary() {
        assert!(is_stationary(&[0.5]));
        assert!(is_stationary(&[-0.5]));
    }

    #[test]
    fn order_two_with_inside_root_is_nonstationary() {
        // roots of 0.6 z^2 + 0.5 z - 1 are about 0.9399 and -1.7733
        assert!(!is_stationary(&[0.5, 0.6]));
    }

    #[test]
    fn empty_and_zero_coefficients_are_stationary() {
        assert!(is_stationary(&[]));
        assert!(is_stationary(&[0.0, 0.0]));
    }

    #[test]
    fn near_boundary_respects_tolerance() {
        assert!(!is_stationary(&[1.0 - 1e-12]));
        assert!(is_stationary(&[1.0 - 1e-6]));
    }

    #[test]
    fn trailing_zeros_are_trimmed() {
        assert!(is_stationary(&[0.5, 0.0, 0.0]));
        assert!(!is_stationary(&[1.0, 0.0]));
    }

    #[test]
    fn ar1_acf_is_geometric() {
        let rho = ar_to_acf(&[0.5], 3).unwrap();
        assert_relative_eq!(rho[0], 0.5, epsilon = 1e-12);
        assert_relative_eq!(rho[1], 0.25, epsilon = 1e-12);
        assert_relative_eq!(rho[2], 0.125, epsilon = 1e-12);
    }

    #[test]
    fn ar2_first_lag_closed_form() {
        // rho_1 = pi_1 / (1 - pi_2)
        let rho = ar_to_acf(&[0.5, 0.25], 1).unwrap();
        assert_relative_eq!(rho[0], 2.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn white_noise_acf_is_zero() {
        assert_eq!(ar_to_acf(&[], 2).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn nonstationary_inputs_are_rejected() {
        assert_eq!(ar_to_acf(&[1.2], 3).unwrap_err(), ActError::NonstationaryInput);
    }
}
