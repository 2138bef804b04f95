//! Ten-component spherical Gaussian mixture in R^10.
//!
//! Mode locations are drawn uniformly from the `[0, 10]^10` hypercube using
//! a seeded stream, so a mixture is fully reproducible from its seed. All
//! components have unit variance and equal weight.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::TargetDistribution;

const DIM: usize = 10;
const COMPONENTS: usize = 10;
const EDGE: f64 = 10.0;

#[derive(Debug, Clone)]
pub struct MixtureTen {
    modes: Vec<[f64; DIM]>,
    mean: Vec<f64>,
    log_component_norm: f64,
}

/// Builds the mixture for a given mode seed. Modes are drawn mode-major:
/// all ten coordinates of mode 0, then mode 1, and so on.
pub fn mixture_ten(mode_seed: u64) -> MixtureTen {
    let mut rng = ChaCha8Rng::seed_from_u64(mode_seed);
    let mut modes = Vec::with_capacity(COMPONENTS);
    for _ in 0..COMPONENTS {
        let mut m = [0.0; DIM];
        for v in m.iter_mut() {
            *v = EDGE * rng.random::<f64>();
        }
        modes.push(m);
    }
    let mut mean = vec![0.0; DIM];
    for m in &modes {
        for (acc, v) in mean.iter_mut().zip(m) {
            *acc += v / COMPONENTS as f64;
        }
    }
    let log_component_norm =
        -(COMPONENTS as f64).ln() - (DIM as f64) / 2.0 * (2.0 * std::f64::consts::PI).ln();
    MixtureTen {
        modes,
        mean,
        log_component_norm,
    }
}

impl MixtureTen {
    pub fn modes(&self) -> &[[f64; DIM]] {
        &self.modes
    }

    fn component_logs(&self, x: &[f64]) -> [f64; COMPONENTS] {
        let mut logs = [0.0; COMPONENTS];
        for (l, m) in logs.iter_mut().zip(&self.modes) {
            let mut sq = 0.0;
            for (xi, mi) in x.iter().zip(m) {
                let d = xi - mi;
                sq += d * d;
            }
            *l = self.log_component_norm - 0.5 * sq;
        }
        logs
    }
}

impl TargetDistribution for MixtureTen {
    fn name(&self) -> &str {
        "mixture_ten"
    }

    fn dim(&self) -> usize {
        DIM
    }

    fn log_density(&self, x: &[f64]) -> f64 {
        let logs = self.component_logs(x);
        let max = logs.iter().fold(f64::NEG_INFINITY, |a, b| a.max(*b));
        let sum: f64 = logs.iter().map(|l| (l - max).exp()).sum();
        max + sum.ln()
    }

    fn has_gradient(&self) -> bool {
        true
    }

    fn gradient(&self, x: &[f64], out: &mut [f64]) -> bool {
        let logs = self.component_logs(x);
        let max = logs.iter().fold(f64::NEG_INFINITY, |a, b| a.max(*b));
        let mut total = 0.0;
        let mut weights = [0.0; COMPONENTS];
        for (w, l) in weights.iter_mut().zip(&logs) {
            *w = (l - max).exp();
            total += *w;
        }
        out.fill(0.0);
        for (w, m) in weights.iter().zip(&self.modes) {
            let resp = w / total;
            for (o, (xi, mi)) in out.iter_mut().zip(x.iter().zip(m)) {
                *o += resp * (mi - xi);
            }
        }
        true
    }

    fn known_mean(&self) -> Option<&[f64]> {
        Some(&self.mean)
    }

    fn default_initial_point(&self) -> Vec<f64> {
        self.mean.clone()
    }
}
