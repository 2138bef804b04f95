//! Test distributions: named log-densities on R^d with gradients and, where
//! available, known means.
//!
//! Log-densities return `-inf` outside their support and never panic.
//! Values are immutable after construction and evaluation is pure, so a
//! single instance can serve any number of concurrent chains. Evaluation
//! counting lives in the harness wrappers, not here.

mod eight_schools;
mod gaussian4;
mod mixture;

pub use eight_schools::{eight_schools, eight_schools_from_path, EightSchools};
pub use gaussian4::{gaussian4_equicorrelated, Gaussian4};
pub use mixture::{mixture_ten, MixtureTen};

pub trait TargetDistribution: Send + Sync {
    fn name(&self) -> &str;

    fn dim(&self) -> usize;

    /// Log of the (possibly unnormalized) density; `-inf` outside support.
    fn log_density(&self, x: &[f64]) -> f64;

    fn has_gradient(&self) -> bool {
        false
    }

    /// Writes the gradient of the log density into `out` and returns `true`
    /// when the distribution provides one.
    fn gradient(&self, x: &[f64], out: &mut [f64]) -> bool {
        let _ = (x, out);
        false
    }

    fn known_mean(&self) -> Option<&[f64]> {
        None
    }

    fn default_initial_point(&self) -> Vec<f64>;
}

/// Gamma(2,1): density proportional to `x e^{-x}` on the positive half
/// line, mean 2. Kept unnormalized; no estimator or sampler in this crate
/// depends on the constant.
#[derive(Debug, Clone)]
pub struct Gamma21 {
    mean: [f64; 1],
}

/// One-dimensional Gamma(2,1) test distribution.
pub fn gamma21() -> Gamma21 {
    Gamma21 { mean: [2.0] }
}

impl TargetDistribution for Gamma21 {
    fn name(&self) -> &str {
        "gamma21"
    }

    fn dim(&self) -> usize {
        1
    }

    fn log_density(&self, x: &[f64]) -> f64 {
        let v = x[0];
        if v > 0.0 {
            v.ln() - v
        } else {
            f64::NEG_INFINITY
        }
    }

    fn has_gradient(&self) -> bool {
        true
    }

    fn gradient(&self, x: &[f64], out: &mut [f64]) -> bool {
        // defined on the support; zero outside so the slice samplers'
        // angle tests degrade gracefully there
        out[0] = if x[0] > 0.0 { 1.0 / x[0] - 1.0 } else { 0.0 };
        true
    }

    fn known_mean(&self) -> Option<&[f64]> {
        Some(&self.mean)
    }

    fn default_initial_point(&self) -> Vec<f64> {
        self.mean.to_vec()
    }
}

/// Independent-coordinate Gaussian centered at zero with variance 1000 in
/// the first coordinate and 1 in the rest.
#[derive(Debug, Clone)]
pub struct ScaledGaussian {
    mean: Vec<f64>,
    log_norm: f64,
}

/// Badly scaled diagonal Gaussian in `d >= 2` dimensions.
pub fn scaled_gaussian(d: usize) -> ScaledGaussian {
    assert!(d >= 2, "scaled_gaussian needs d >= 2");
    let log_norm = -(d as f64) / 2.0 * (2.0 * std::f64::consts::PI).ln() - 0.5 * 1000f64.ln();
    ScaledGaussian {
        mean: vec![0.0; d],
        log_norm,
    }
}

impl TargetDistribution for ScaledGaussian {
    fn name(&self) -> &str {
        "scaled_gaussian"
    }

    fn dim(&self) -> usize {
        self.mean.len()
    }

    fn log_density(&self, x: &[f64]) -> f64 {
        let mut quad = x[0] * x[0] / 1000.0;
        for v in &x[1..] {
            quad += v * v;
        }
        self.log_norm - 0.5 * quad
    }

    fn has_gradient(&self) -> bool {
        true
    }

    fn gradient(&self, x: &[f64], out: &mut [f64]) -> bool {
        out[0] = -x[0] / 1000.0;
        for (o, v) in out[1..].iter_mut().zip(&x[1..]) {
            *o = -v;
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

/// Construction parameters for one named distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionSpec {
    pub name: String,
    pub dim: Option<usize>,
    pub mode_seed: Option<u64>,
}

impl DistributionSpec {
    pub fn named(name: &str) -> Self {
        DistributionSpec {
            name: name.to_string(),
            dim: None,
            mode_seed: None,
        }
    }
}

pub const KNOWN_DISTRIBUTIONS: [&str; 5] = [
    "gamma21",
    "gaussian4",
    "eight_schools",
    "mixture_ten",
    "scaled_gaussian",
];

/// Builds a distribution from its spec, validating the parameters it takes.
pub fn build_target(spec: &DistributionSpec) -> Result<Box<dyn TargetDistribution>, String> {
    let reject_dim = |what: &str| -> Result<(), String> {
        if spec.dim.is_some() {
            Err(format!("distribution {what} does not take a dim parameter"))
        } else {
            Ok(())
        }
    };
    let reject_mode_seed = |what: &str| -> Result<(), String> {
        if spec.mode_seed.is_some() {
            Err(format!("distribution {what} does not take a mode_seed parameter"))
        } else {
            Ok(())
        }
    };
    match spec.name.as_str() {
        "gamma21" => {
            reject_dim("gamma21")?;
            reject_mode_seed("gamma21")?;
            Ok(Box::new(gamma21()))
        }
        "gaussian4" => {
            reject_dim("gaussian4")?;
            reject_mode_seed("gaussian4")?;
            Ok(Box::new(gaussian4_equicorrelated()))
        }
        "eight_schools" => {
            reject_dim("eight_schools")?;
            reject_mode_seed("eight_schools")?;
            Ok(Box::new(eight_schools()))
        }
        "mixture_ten" => {
            reject_dim("mixture_ten")?;
            Ok(Box::new(mixture_ten(spec.mode_seed.unwrap_or(1))))
        }
        "scaled_gaussian" => {
            reject_mode_seed("scaled_gaussian")?;
            let d = spec
                .dim
                .ok_or_else(|| "scaled_gaussian requires a dim parameter".to_string())?;
            if d < 2 {
                return Err(format!("scaled_gaussian requires dim >= 2, got {d}"));
            }
            Ok(Box::new(scaled_gaussian(d)))
        }
        other => Err(format!("unknown distribution: {other}")),
    }
}
