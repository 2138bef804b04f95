//! Coordinate-wise slice sampling with stepping out and shrinkage.

use rand_chacha::ChaCha8Rng;

use super::{ChainState, TransitionKernel, TransitionResult, TuningParams};
use crate::rng::RandomSource;
use crate::targets::TargetDistribution;

/// One sweep of single-variable slice sampling over the coordinates in
/// ascending order. For each coordinate: draw the slice level
/// `y = cached_logp + ln(u)` (no evaluation; the level is always below the
/// current point's log-density), place an interval of width `scale`
/// uniformly around the current value, expand each end in steps of `scale`
/// until its log-density drops below `y`, then sample uniformly inside the
/// interval, shrinking toward the current point after each rejection. There
/// is no cap on the number of expansion steps. Every log-density call is
/// counted.
pub fn step_out_slice_transition<S: RandomSource>(
    mut state: ChainState,
    target: &dyn TargetDistribution,
    tuning: &TuningParams,
    rng: &mut S,
) -> TransitionResult {
    let d = state.x.len();
    let w = tuning.scale;
    let mut logp_evals = 0u64;
    let mut probe = state.x.clone();
    for i in 0..d {
        let current = state.x[i];
        let level = state.cached_logp + rng.uniform().ln();

        let mut left = current - rng.uniform() * w;
        let mut right = left + w;
        loop {
            probe[i] = left;
            logp_evals += 1;
            if target.log_density(&probe) < level {
                break;
            }
            left -= w;
        }
        loop {
            probe[i] = right;
            logp_evals += 1;
            if target.log_density(&probe) < level {
                break;
            }
            right += w;
        }

        loop {
            let candidate = left + rng.uniform() * (right - left);
            probe[i] = candidate;
            let lp = target.log_density(&probe);
            logp_evals += 1;
            if lp >= level {
                state.x[i] = candidate;
                state.cached_logp = lp;
                break;
            }
            if candidate < current {
                left = candidate;
            } else {
                right = candidate;
            }
        }
        probe[i] = state.x[i];
    }
    state.iteration += 1;
    TransitionResult {
        next: state,
        logp_evals,
        grad_evals: 0,
    }
}

pub struct StepOutSlice;

impl TransitionKernel for StepOutSlice {
    fn name(&self) -> &'static str {
        "step_out_slice"
    }

    fn transition(
        &mut self,
        state: ChainState,
        target: &dyn TargetDistribution,
        tuning: &TuningParams,
        rng: &mut ChaCha8Rng,
    ) -> TransitionResult {
        step_out_slice_transition(state, target, tuning, rng)
    }
}
