//! Instrumented MCMC transition kernels.
//!
//! Every kernel takes a chain state, a target, its tuning parameters, and a
//! random stream, and returns the next state plus exact counts of the
//! log-density and gradient evaluations the transition performed. The
//! current point's log-density is always carried in the state, so a
//! Metropolis proposal costs exactly one evaluation and drawing a slice
//! level costs none.
//!
//! Kernels are single-threaded per chain. Distinct chains with distinct
//! random streams (and, for the adaptive kernel, distinct adaptation
//! states) run concurrently without coordination.

mod metropolis;
mod shrinking_rank;
mod slice;

pub use metropolis::{
    adaptive_metropolis_transition, univariate_metropolis_transition, AdaptState,
    AdaptiveMetropolis, UnivariateMetropolis,
};
pub use shrinking_rank::{shrinking_rank_transition, ShrinkingRank};
pub use slice::{step_out_slice_transition, StepOutSlice};

use rand_chacha::ChaCha8Rng;

use crate::targets::TargetDistribution;

/// Current chain position with its cached log-density.
#[derive(Debug, Clone)]
pub struct ChainState {
    pub x: Vec<f64>,
    pub cached_logp: f64,
    pub iteration: u64,
}

impl ChainState {
    /// Evaluates the target once to prime the cache.
    pub fn at(x: Vec<f64>, target: &dyn TargetDistribution) -> Self {
        let cached_logp = target.log_density(&x);
        ChainState {
            x,
            cached_logp,
            iteration: 0,
        }
    }
}

/// Principal tuning parameter plus the adaptive kernel's mixture fraction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TuningParams {
    /// Proposal standard deviation, initial slice width, or initial crumb
    /// standard deviation, depending on the kernel.
    pub scale: f64,
    /// Fraction of adaptive-Metropolis proposals drawn from the fixed
    /// spherical component. Ignored by the other kernels.
    pub beta: f64,
}

pub const DEFAULT_BETA: f64 = 0.05;

impl TuningParams {
    pub fn new(scale: f64) -> Self {
        assert!(scale > 0.0, "scale must be positive");
        TuningParams {
            scale,
            beta: DEFAULT_BETA,
        }
    }

    pub fn with_beta(scale: f64, beta: f64) -> Self {
        assert!(scale > 0.0, "scale must be positive");
        assert!(beta > 0.0 && beta < 1.0, "beta must be in (0, 1)");
        TuningParams { scale, beta }
    }
}

/// Next state plus the exact evaluation counts of one transition.
#[derive(Debug, Clone)]
pub struct TransitionResult {
    pub next: ChainState,
    pub logp_evals: u64,
    pub grad_evals: u64,
}

/// One MCMC update step. Implementations leave the target distribution
/// invariant and must be deterministic given `(state, tuning, rng)`.
pub trait TransitionKernel: Send {
    fn name(&self) -> &'static str;

    fn requires_gradient(&self) -> bool {
        false
    }

    fn transition(
        &mut self,
        state: ChainState,
        target: &dyn TargetDistribution,
        tuning: &TuningParams,
        rng: &mut ChaCha8Rng,
    ) -> TransitionResult;

    /// Stops any covariance learning; the kernel is a fixed Markov kernel
    /// afterwards. A no-op for non-adaptive kernels.
    fn freeze_adaptation(&mut self) {}
}

pub const KNOWN_SAMPLERS: [&str; 4] = [
    "adaptive_metropolis",
    "univariate_metropolis",
    "shrinking_rank",
    "step_out_slice",
];

/// Whether a sampler interprets the `beta` tuning field.
pub fn sampler_uses_beta(name: &str) -> bool {
    name == "adaptive_metropolis"
}

/// Builds a fresh kernel for a chain of the given dimension.
pub fn build_kernel(name: &str, dim: usize) -> Result<Box<dyn TransitionKernel>, String> {
    match name {
        "adaptive_metropolis" => Ok(Box::new(AdaptiveMetropolis::new(dim))),
        "univariate_metropolis" => Ok(Box::new(UnivariateMetropolis)),
        "shrinking_rank" => Ok(Box::new(ShrinkingRank)),
        "step_out_slice" => Ok(Box::new(StepOutSlice)),
        other => Err(format!("unknown sampler: {other}")),
    }
}

#[cfg(test)]
pub(crate) mod testsupport {
    use crate::rng::RandomSource;
    use crate::targets::TargetDistribution;
    use std::collections::VecDeque;

    /// Draw source with prescribed outputs, for hand-traced kernel tests.
    pub struct ScriptedSource {
        pub uniforms: VecDeque<f64>,
        pub normals: VecDeque<f64>,
    }

    impl ScriptedSource {
        pub fn new(uniforms: &[f64], normals: &[f64]) -> Self {
            ScriptedSource {
                uniforms: uniforms.iter().copied().collect(),
                normals: normals.iter().copied().collect(),
            }
        }
    }

    impl RandomSource for ScriptedSource {
        fn uniform(&mut self) -> f64 {
            self.uniforms.pop_front().expect("scripted uniforms exhausted")
        }

        fn normal(&mut self) -> f64 {
            self.normals.pop_front().expect("scripted normals exhausted")
        }
    }

    /// Flat density over all of R^d.
    pub struct Flat {
        pub dim: usize,
    }

    impl TargetDistribution for Flat {
        fn name(&self) -> &str {
            "flat"
        }
        fn dim(&self) -> usize {
            self.dim
        }
        fn log_density(&self, _x: &[f64]) -> f64 {
            0.0
        }
        fn default_initial_point(&self) -> Vec<f64> {
            vec![0.0; self.dim]
        }
    }

    /// Standard normal in d dimensions, with gradient.
    pub struct StdNormal {
        pub dim: usize,
    }

    impl TargetDistribution for StdNormal {
        fn name(&self) -> &str {
            "std_normal"
        }
        fn dim(&self) -> usize {
            self.dim
        }
        fn log_density(&self, x: &[f64]) -> f64 {
            -0.5 * x.iter().map(|v| v * v).sum::<f64>()
        }
        fn has_gradient(&self) -> bool {
            true
        }
        fn gradient(&self, x: &[f64], out: &mut [f64]) -> bool {
            for (o, v) in out.iter_mut().zip(x) {
                *o = -v;
            }
            true
        }
        fn default_initial_point(&self) -> Vec<f64> {
            vec![0.0; self.dim]
        }
    }

    /// Uniform on the open unit interval (one dimension).
    pub struct UnitInterval;

    impl TargetDistribution for UnitInterval {
        fn name(&self) -> &str {
            "unit_interval"
        }
        fn dim(&self) -> usize {
            1
        }
        fn log_density(&self, x: &[f64]) -> f64 {
            if x[0] > 0.0 && x[0] < 1.0 {
                0.0
            } else {
                f64::NEG_INFINITY
            }
        }
        fn default_initial_point(&self) -> Vec<f64> {
            vec![0.5]
        }
    }
}
