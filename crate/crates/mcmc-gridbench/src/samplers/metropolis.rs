//! Metropolis kernels: coordinate-wise random walk and the adaptive
//! mixture-proposal variant.

use nalgebra::{DMatrix, DVector};
use rand_chacha::ChaCha8Rng;

use super::{ChainState, TransitionKernel, TransitionResult, TuningParams};
use crate::rng::RandomSource;
use crate::targets::TargetDistribution;

/// One sweep of coordinate-wise Metropolis: each coordinate in ascending
/// order gets a Gaussian proposal with standard deviation `scale` and an
/// accept/reject using one fresh log-density evaluation, so a sweep over a
/// d-dimensional target costs exactly d evaluations. Each coordinate
/// consumes one normal and one uniform draw, in that order.
pub fn univariate_metropolis_transition<S: RandomSource>(
    mut state: ChainState,
    target: &dyn TargetDistribution,
    tuning: &TuningParams,
    rng: &mut S,
) -> TransitionResult {
    let d = state.x.len();
    let mut proposal = state.x.clone();
    let mut logp_evals = 0;
    for i in 0..d {
        let old = proposal[i];
        proposal[i] = old + tuning.scale * rng.normal();
        let lp = target.log_density(&proposal);
        logp_evals += 1;
        let u = rng.uniform();
        if u.ln() < lp - state.cached_logp {
            state.x[i] = proposal[i];
            state.cached_logp = lp;
        } else {
            proposal[i] = old;
        }
    }
    state.iteration += 1;
    TransitionResult {
        next: state,
        logp_evals,
        grad_evals: 0,
    }
}

pub struct UnivariateMetropolis;

impl TransitionKernel for UnivariateMetropolis {
    fn name(&self) -> &'static str {
        "univariate_metropolis"
    }

    fn transition(
        &mut self,
        state: ChainState,
        target: &dyn TargetDistribution,
        tuning: &TuningParams,
        rng: &mut ChaCha8Rng,
    ) -> TransitionResult {
        univariate_metropolis_transition(state, target, tuning, rng)
    }
}

/// Running mean and scatter of the states a chain has visited, plus the
/// cached proposal factor derived from them.
#[derive(Debug, Clone)]
pub struct AdaptState {
    pub count: u64,
    pub running_mean: DVector<f64>,
    pub running_scatter: DMatrix<f64>,
    pub frozen: bool,
    factor: Option<(u64, DMatrix<f64>)>,
    delta_old: DVector<f64>,
    delta_new: DVector<f64>,
}

impl AdaptState {
    pub fn new(dim: usize) -> Self {
        AdaptState {
            count: 0,
            running_mean: DVector::zeros(dim),
            running_scatter: DMatrix::zeros(dim, dim),
            frozen: false,
            factor: None,
            delta_old: DVector::zeros(dim),
            delta_new: DVector::zeros(dim),
        }
    }

    /// Welford update; the scatter accumulates the symmetrized outer
    /// product so `running_scatter / (count - 1)` is the batch sample
    /// covariance of everything seen.
    pub fn update(&mut self, x: &[f64]) {
        self.count += 1;
        let c = self.count as f64;
        for (d, (xi, m)) in self.delta_old.iter_mut().zip(x.iter().zip(self.running_mean.iter())) {
            *d = xi - m;
        }
        for (m, d) in self.running_mean.iter_mut().zip(self.delta_old.iter()) {
            *m += d / c;
        }
        for (d, (xi, m)) in self.delta_new.iter_mut().zip(x.iter().zip(self.running_mean.iter())) {
            *d = xi - m;
        }
        let dim = self.running_mean.len();
        for i in 0..dim {
            for j in 0..dim {
                self.running_scatter[(i, j)] += 0.5
                    * (self.delta_old[i] * self.delta_new[j] + self.delta_new[i] * self.delta_old[j]);
            }
        }
    }

    /// Sample covariance of the states seen so far.
    pub fn covariance(&self) -> DMatrix<f64> {
        assert!(self.count >= 2, "covariance needs at least 2 states");
        &self.running_scatter / (self.count - 1) as f64
    }

    /// Cholesky factor of the adapted proposal covariance
    /// `(2.38^2 / d) * (cov + jitter * I)`, cached until the next update.
    fn proposal_factor(&mut self) -> &DMatrix<f64> {
        let stale = match &self.factor {
            Some((at, _)) => *at != self.count,
            None => true,
        };
        if stale {
            let dim = self.running_mean.len();
            let cov = self.covariance();
            let trace: f64 = cov.diagonal().iter().sum();
            // early-phase scatter matrices are rank deficient; a chain that
            // never moved has zero trace and gets the smallest jitter that
            // factorizes, so it stays essentially (but not exactly) stuck
            let mut add = if trace > 0.0 {
                1e-10 * trace / dim as f64
            } else {
                1e-300
            };
            let s = 2.38 * 2.38 / dim as f64;
            let factor = loop {
                let mut m = cov.clone();
                for i in 0..dim {
                    m[(i, i)] += add;
                }
                if let Some(chol) = nalgebra::Cholesky::new(m * s) {
                    break chol.unpack();
                }
                add = (add * 10.0).max(1e-300);
                if add > 1e280 {
                    // unreachable with finite states; degrade to spherical
                    break DMatrix::from_diagonal_element(dim, dim, (s * add).sqrt());
                }
            };
            self.factor = Some((self.count, factor));
        }
        &self.factor.as_ref().expect("factor just set").1
    }
}

/// Adaptive Metropolis with a two-component Gaussian proposal: with
/// probability `beta` (or always, while fewer than `2d + 1` states have
/// been seen) a spherical component with covariance `(scale^2 / d) I`, and
/// otherwise a learned component with covariance `(2.38^2 / d)` times the
/// running sample covariance of the chain. One log-density evaluation per
/// transition. The accepted-or-retained state updates the running moments
/// until adaptation is frozen, after which the proposal never changes.
///
/// Draw order: one mixture uniform (only once the learned component is
/// available), then d proposal normals, then one acceptance uniform.
pub fn adaptive_metropolis_transition<S: RandomSource>(
    mut state: ChainState,
    target: &dyn TargetDistribution,
    tuning: &TuningParams,
    rng: &mut S,
    adapt: &mut AdaptState,
) -> TransitionResult {
    let d = state.x.len();
    let initial_phase = adapt.count <= 2 * d as u64;
    let spherical = initial_phase || rng.uniform() < tuning.beta;

    let mut proposal = state.x.clone();
    if spherical {
        let sd = tuning.scale / (d as f64).sqrt();
        for p in proposal.iter_mut() {
            *p += sd * rng.normal();
        }
    } else {
        let z = DVector::from_fn(d, |_, _| rng.normal());
        let step = adapt.proposal_factor() * z;
        for (p, s) in proposal.iter_mut().zip(step.iter()) {
            *p += s;
        }
    }

    let lp = target.log_density(&proposal);
    let u = rng.uniform();
    if u.ln() < lp - state.cached_logp {
        state.x = proposal;
        state.cached_logp = lp;
    }
    state.iteration += 1;
    if !adapt.frozen {
        let x = std::mem::take(&mut state.x);
        adapt.update(&x);
        state.x = x;
    }
    TransitionResult {
        next: state,
        logp_evals: 1,
        grad_evals: 0,
    }
}

pub struct AdaptiveMetropolis {
    adapt: AdaptState,
}

impl AdaptiveMetropolis {
    pub fn new(dim: usize) -> Self {
        AdaptiveMetropolis {
            adapt: AdaptState::new(dim),
        }
    }

    pub fn adapt_state(&self) -> &AdaptState {
        &self.adapt
    }
}

impl TransitionKernel for AdaptiveMetropolis {
    fn name(&self) -> &'static str {
        "adaptive_metropolis"
    }

    fn transition(
        &mut self,
        state: ChainState,
        target: &dyn TargetDistribution,
        tuning: &TuningParams,
        rng: &mut ChaCha8Rng,
    ) -> TransitionResult {
        adaptive_metropolis_transition(state, target, tuning, rng, &mut self.adapt)
    }

    fn freeze_adaptation(&mut self) {
        self.adapt.frozen = true;
    }
}
