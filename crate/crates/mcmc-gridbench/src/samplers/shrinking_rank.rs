//! Shrinking-rank slice sampling: a multivariate crumb method that lowers
//! the dimension of its proposal subspace using gradient information from
//! rejected proposals.

use rand_chacha::ChaCha8Rng;

use super::{ChainState, TransitionKernel, TransitionResult, TuningParams};
use crate::rng::RandomSource;
use crate::targets::TargetDistribution;

/// Off-diagonal cosine threshold for the rank-reduction test: reduce when
/// the projected gradient keeps an angle under 60 degrees with the full
/// gradient.
const COS_60: f64 = 0.5;

fn project_out(basis: &[Vec<f64>], v: &mut [f64]) {
    for b in basis {
        let dot: f64 = b.iter().zip(v.iter()).map(|(a, c)| a * c).sum();
        for (vi, bi) in v.iter_mut().zip(b) {
            *vi -= dot * bi;
        }
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

/// One multivariate update. A slice level is drawn from the cached
/// log-density; Gaussian crumbs centered at the current point are drawn in
/// the active subspace, with the first crumb's standard deviation equal to
/// `scale` and the variance halving on each successive crumb. Each proposal
/// is drawn from the Gaussian the crumbs imply and projected into the
/// active subspace; the first proposal whose log-density reaches the level
/// is accepted. After a rejection (while more than one direction remains)
/// the gradient at the rejected point is evaluated, and if its projection
/// keeps an angle under 60 degrees with the gradient itself, that direction
/// is removed from the subspace. When no direction can be removed the
/// crumbs simply keep tightening, so the update always terminates.
///
/// Costs one log-density evaluation per proposal and one gradient
/// evaluation per rejected proposal that runs the angle test.
pub fn shrinking_rank_transition<S: RandomSource>(
    mut state: ChainState,
    target: &dyn TargetDistribution,
    tuning: &TuningParams,
    rng: &mut S,
) -> TransitionResult {
    let d = state.x.len();
    let level = state.cached_logp + rng.uniform().ln();

    let mut removed: Vec<Vec<f64>> = Vec::new();
    let mut sigma = tuning.scale;
    let mut precision_sum = 0.0;
    let mut weighted_crumbs = vec![0.0; d]; // sum of crumb offsets / sigma_k^2
    let mut logp_evals = 0u64;
    let mut grad_evals = 0u64;

    let mut crumb = vec![0.0; d];
    let mut offset = vec![0.0; d];
    let mut proposal = vec![0.0; d];
    let mut grad = vec![0.0; d];

    loop {
        for c in crumb.iter_mut() {
            *c = sigma * rng.normal();
        }
        project_out(&removed, &mut crumb);
        let prec = 1.0 / (sigma * sigma);
        precision_sum += prec;
        for (w, c) in weighted_crumbs.iter_mut().zip(&crumb) {
            *w += c * prec;
        }
        let post_var = 1.0 / precision_sum;
        let post_sd = post_var.sqrt();
        for (o, w) in offset.iter_mut().zip(&weighted_crumbs) {
            *o = w * post_var + post_sd * rng.normal();
        }
        project_out(&removed, &mut offset);
        for ((p, xi), o) in proposal.iter_mut().zip(&state.x).zip(&offset) {
            *p = xi + o;
        }

        let lp = target.log_density(&proposal);
        logp_evals += 1;
        if lp >= level {
            state.x.copy_from_slice(&proposal);
            state.cached_logp = lp;
            break;
        }

        let rank = d - removed.len();
        let mut reduced = false;
        if rank > 1 {
            target.gradient(&proposal, &mut grad);
            grad_evals += 1;
            let full_norm = norm(&grad);
            project_out(&removed, &mut grad);
            let proj_norm = norm(&grad);
            // cos(angle(Pg, g)) = |Pg| / |g| because g - Pg is orthogonal to Pg
            if full_norm > 0.0 && proj_norm > COS_60 * full_norm {
                for g in grad.iter_mut() {
                    *g /= proj_norm;
                }
                removed.push(grad.clone());
                reduced = true;
            }
        }
        if !reduced {
            sigma *= std::f64::consts::FRAC_1_SQRT_2;
        }
    }
    state.iteration += 1;
    TransitionResult {
        next: state,
        logp_evals,
        grad_evals,
    }
}

pub struct ShrinkingRank;

impl TransitionKernel for ShrinkingRank {
    fn name(&self) -> &'static str {
        "shrinking_rank"
    }

    fn requires_gradient(&self) -> bool {
        true
    }

    fn transition(
        &mut self,
        state: ChainState,
        target: &dyn TargetDistribution,
        tuning: &TuningParams,
        rng: &mut ChaCha8Rng,
    ) -> TransitionResult {
        shrinking_rank_transition(state, target, tuning, rng)
    }
}

#[cfg(test)]
mod tests {
    use super::super::testsupport::{ScriptedSource, StdNormal};
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;

    #[test]
    fn accepted_first_proposal_costs_one_eval_and_no_gradients() {
        let target = StdNormal { dim: 2 };
        let tuning = TuningParams::new(0.05);
        // level well below cached logp, tiny crumbs: first proposal lands
        // inside the slice
        let mut rng = ScriptedSource::new(&[0.9], &[0.1, -0.2, 0.05, 0.02]);
        let state = ChainState::at(vec![0.0, 0.0], &target);
        let res = shrinking_rank_transition(state, &target, &tuning, &mut rng);
        assert_eq!(res.logp_evals, 1);
        assert_eq!(res.grad_evals, 0);
        assert!(res.next.x != vec![0.0, 0.0]);
    }

    #[test]
    fn doubling_scale_doubles_first_crumb_offset() {
        // with identical draws, the first proposal offset scales with the
        // first crumb: mean = crumb, sd = sigma; both linear in scale
        let target = StdNormal { dim: 2 };
        let draws_u = [0.9];
        let draws_n = [0.4, -0.3, 0.2, 0.1];
        let state = || ChainState::at(vec![0.0, 0.0], &target);

        let mut rng1 = ScriptedSource::new(&draws_u, &draws_n);
        let r1 = shrinking_rank_transition(state(), &target, &TuningParams::new(0.01), &mut rng1);
        let mut rng2 = ScriptedSource::new(&draws_u, &draws_n);
        let r2 = shrinking_rank_transition(state(), &target, &TuningParams::new(0.02), &mut rng2);
        assert_eq!(r1.logp_evals, 1);
        assert_eq!(r2.logp_evals, 1);
        for (a, b) in r1.next.x.iter().zip(&r2.next.x) {
            assert_abs_diff_eq!(2.0 * a, *b, epsilon = 1e-14);
        }
    }

    #[test]
    fn proposals_collapse_to_a_line_after_rank_reduction() {
        // strongly anisotropic Gaussian: huge crumbs get rejected and the
        // gradient is nearly axis-aligned, forcing a reduction
        struct Anisotropic;
        impl TargetDistribution for Anisotropic {
            fn name(&self) -> &str {
                "aniso"
            }
            fn dim(&self) -> usize {
                2
            }
            fn log_density(&self, x: &[f64]) -> f64 {
                -0.5 * (x[0] * x[0] / 1e-6 + x[1] * x[1])
            }
            fn has_gradient(&self) -> bool {
                true
            }
            fn gradient(&self, x: &[f64], out: &mut [f64]) -> bool {
                out[0] = -x[0] / 1e-6;
                out[1] = -x[1];
                true
            }
            fn default_initial_point(&self) -> Vec<f64> {
                vec![0.0, 0.0]
            }
        }
        let target = Anisotropic;
        let tuning = TuningParams::new(50.0);
        let mut rng = ChaCha8Rng::seed_from_u64(20);
        let mut reduced_seen = false;
        let mut state = ChainState::at(vec![0.0, 0.0], &target);
        for _ in 0..50 {
            let res = shrinking_rank_transition(state, &target, &tuning, &mut rng);
            if res.grad_evals > 0 && res.logp_evals > 2 {
                reduced_seen = true;
            }
            state = res.next;
        }
        assert!(reduced_seen, "no transition ever ran the gradient test");
    }

    #[test]
    fn collinearity_of_proposals_in_reduced_subspace() {
        // after projecting out g, repeated proposal offsets stay orthogonal
        // to g within 1e-10
        let g = vec![3.0 / 5.0, 4.0 / 5.0];
        let removed = vec![g.clone()];
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..100 {
            let mut v = [rng.normal(), rng.normal()];
            project_out(&removed, &mut v);
            let dot = v[0] * g[0] + v[1] * g[1];
            assert!(dot.abs() < 1e-10);
        }
    }

    #[test]
    fn one_dimensional_targets_never_request_gradients() {
        let target = StdNormal { dim: 1 };
        let tuning = TuningParams::new(5.0);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut state = ChainState::at(vec![0.3], &target);
        for _ in 0..200 {
            let res = shrinking_rank_transition(state, &target, &tuning, &mut rng);
            assert_eq!(res.grad_evals, 0);
            state = res.next;
        }
    }

    #[test]
    fn chain_moments_converge_on_standard_normal() {
        let target = StdNormal { dim: 2 };
        let tuning = TuningParams::new(1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let mut state = ChainState::at(vec![0.0, 0.0], &target);
        let n = 20_000;
        let mut sum = [0.0; 2];
        let mut sumsq = [0.0; 2];
        for _ in 0..n {
            let res = shrinking_rank_transition(state, &target, &tuning, &mut rng);
            state = res.next;
            for i in 0..2 {
                sum[i] += state.x[i];
                sumsq[i] += state.x[i] * state.x[i];
            }
        }
        for i in 0..2 {
            let mean = sum[i] / n as f64;
            let var = sumsq[i] / n as f64 - mean * mean;
            assert!(mean.abs() < 0.06, "mean[{i}] = {mean}");
            assert!((var - 1.0).abs() < 0.12, "var[{i}] = {var}");
        }
    }
}
