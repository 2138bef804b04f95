//! Four-dimensional equicorrelated Gaussian with correlation 0.999.
//!
//! The covariance has eigenvalues `1 + 3*0.999 = 3.997` and `1 - 0.999 =
//! 0.001` (multiplicity 3), so draws live almost entirely on the long
//! diagonal direction.

use nalgebra::{Cholesky, Const, Matrix4, Vector4};

use super::TargetDistribution;

const RHO: f64 = 0.999;

#[derive(Debug, Clone)]
pub struct Gaussian4 {
    mean: [f64; 4],
    chol: Cholesky<f64, Const<4>>,
    log_norm: f64,
}

/// Exact (normalized) multivariate normal log-density with mean
/// `(1, 2, 3, 4)` and unit variances with all pairwise correlations 0.999.
pub fn gaussian4_equicorrelated() -> Gaussian4 {
    let cov = Matrix4::from_fn(|i, j| if i == j { 1.0 } else { RHO });
    let chol = Cholesky::new(cov).expect("equicorrelation matrix with rho < 1 is positive definite");
    let log_det: f64 = 2.0 * chol.l().diagonal().iter().map(|v| v.ln()).sum::<f64>();
    let log_norm = -2.0 * (2.0 * std::f64::consts::PI).ln() - 0.5 * log_det;
    Gaussian4 {
        mean: [1.0, 2.0, 3.0, 4.0],
        chol,
        log_norm,
    }
}

impl Gaussian4 {
    fn delta(&self, x: &[f64]) -> Vector4<f64> {
        Vector4::new(
            x[0] - self.mean[0],
            x[1] - self.mean[1],
            x[2] - self.mean[2],
            x[3] - self.mean[3],
        )
    }
}

impl TargetDistribution for Gaussian4 {
    fn name(&self) -> &str {
        "gaussian4"
    }

    fn dim(&self) -> usize {
        4
    }

    fn log_density(&self, x: &[f64]) -> f64 {
        let delta = self.delta(x);
        let solved = self.chol.solve(&delta);
        self.log_norm - 0.5 * delta.dot(&solved)
    }

    fn has_gradient(&self) -> bool {
        true
    }

    fn gradient(&self, x: &[f64], out: &mut [f64]) -> bool {
        let solved = self.chol.solve(&self.delta(x));
        for (o, v) in out.iter_mut().zip(solved.iter()) {
            *o = -v;
        }
        true
    }

    fn known_mean(&self) -> Option<&[f64]> {
        Some(&self.mean)
    }

    fn default_initial_point(&self) -> Vec<f64> {
        self.mean.to_vec()
    }
}
