//! Runs (distribution × sampler × tuning × replicate) grids.
//!
//! Each grid cell runs one chain behind an evaluation-counting proxy,
//! discards the burn-in prefix, estimates the autocorrelation time of every
//! coordinate with both the AR and initial-convex-sequence methods, reduces
//! to the slowest-mixing coordinate, and multiplies by the post-burn-in
//! log-density evaluations per iteration to get the figure of merit.
//!
//! Cells are independent work units: each owns its kernel, random streams,
//! and chain storage, and cell seeds are pure functions of the master seed
//! and the cell's indices. Output order is row-major over the configured
//! factors regardless of how many workers execute the grid, so a run is
//! reproducible field-for-field (timings aside) under any schedule.

use std::sync::atomic::{AtomicU64, Ordering};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::act::{act_ics, estimate_act, ActEstimate, ActOptions, ActStatus, MeanMode, SeriesView};
use crate::rng::mix64;
use crate::samplers::{
    build_kernel, sampler_uses_beta, ChainState, TransitionKernel, TransitionResult, TuningParams,
};
use crate::targets::{build_target, DistributionSpec, TargetDistribution};

/// Stream-separation salt so estimation draws never reuse chain draws.
const ACT_STREAM_SALT: u64 = 0x9e37_79b9_7f4a_7c15;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("{0}")]
    Invalid(String),
}

fn invalid<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError::Invalid(msg.into()))
}

/// Tuning grid for one sampler. `betas` applies only to samplers that use
/// the mixture fraction; it must be empty for the rest.
#[derive(Debug, Clone)]
pub struct SamplerGrid {
    pub name: String,
    pub scales: Vec<f64>,
    pub betas: Vec<f64>,
}

impl SamplerGrid {
    pub fn new(name: &str, scales: Vec<f64>) -> Self {
        SamplerGrid {
            name: name.to_string(),
            scales,
            betas: Vec::new(),
        }
    }

    /// The flattened tuning list, beta-major: all scales for the first
    /// beta, then all scales for the next.
    fn tuning_list(&self) -> Vec<(TuningParams, Option<f64>)> {
        if sampler_uses_beta(&self.name) {
            let betas: &[f64] = if self.betas.is_empty() {
                &[crate::samplers::DEFAULT_BETA]
            } else {
                &self.betas
            };
            betas
                .iter()
                .flat_map(|&b| {
                    self.scales
                        .iter()
                        .map(move |&s| (TuningParams::with_beta(s, b), Some(b)))
                })
                .collect()
        } else {
            self.scales
                .iter()
                .map(|&s| (TuningParams::new(s), None))
                .collect()
        }
    }
}

/// Everything a grid run needs besides the registries themselves.
#[derive(Debug, Clone)]
pub struct GridConfig {
    pub chain_length: usize,
    pub burn_in_fraction: f64,
    pub replicates: u32,
    pub master_seed: u64,
    pub ci_draws: usize,
    pub ci_level: f64,
    pub p_max_override: Option<usize>,
    pub distributions: Vec<DistributionSpec>,
    pub samplers: Vec<SamplerGrid>,
}

impl GridConfig {
    pub fn new(distributions: Vec<DistributionSpec>, samplers: Vec<SamplerGrid>) -> Self {
        GridConfig {
            chain_length: 50_000,
            burn_in_fraction: 0.2,
            replicates: 1,
            master_seed: 0,
            ci_draws: 1000,
            ci_level: 0.95,
            p_max_override: None,
            distributions,
            samplers,
        }
    }
}

/// Nine log-spaced tuning values spanning 0.1 to 1000.
pub fn default_tuning_grid() -> Vec<f64> {
    (0..9).map(|i| 10f64.powf(-1.0 + 0.5 * i as f64)).collect()
}

/// Stable 64-bit seed for one cell. Packs the four indices (each below
/// 2^16) into one word and passes it through the SplitMix64 finalizer
/// alongside the master seed; the finalizer is bijective, so distinct index
/// tuples always get distinct seeds under a fixed master seed.
pub fn derive_cell_seed(
    master_seed: u64,
    dist_index: usize,
    sampler_index: usize,
    tuning_index: usize,
    replicate: u32,
) -> u64 {
    assert!(
        dist_index < (1 << 16)
            && sampler_index < (1 << 16)
            && tuning_index < (1 << 16)
            && (replicate as usize) < (1 << 16),
        "grid indices must stay below 2^16"
    );
    let packed = ((dist_index as u64) << 48)
        | ((sampler_index as u64) << 32)
        | ((tuning_index as u64) << 16)
        | replicate as u64;
    mix64(mix64(master_seed) ^ packed)
}

/// Target proxy that counts every log-density and gradient call.
pub struct CountingTarget<'a> {
    inner: &'a dyn TargetDistribution,
    logp_calls: AtomicU64,
    grad_calls: AtomicU64,
}

impl<'a> CountingTarget<'a> {
    pub fn new(inner: &'a dyn TargetDistribution) -> Self {
        CountingTarget {
            inner,
            logp_calls: AtomicU64::new(0),
            grad_calls: AtomicU64::new(0),
        }
    }

    pub fn logp_calls(&self) -> u64 {
        self.logp_calls.load(Ordering::Relaxed)
    }

    pub fn grad_calls(&self) -> u64 {
        self.grad_calls.load(Ordering::Relaxed)
    }
}

impl TargetDistribution for CountingTarget<'_> {
    fn name(&self) -> &str {
        self.inner.name()
    }

    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn log_density(&self, x: &[f64]) -> f64 {
        self.logp_calls.fetch_add(1, Ordering::Relaxed);
        self.inner.log_density(x)
    }

    fn has_gradient(&self) -> bool {
        self.inner.has_gradient()
    }

    fn gradient(&self, x: &[f64], out: &mut [f64]) -> bool {
        self.grad_calls.fetch_add(1, Ordering::Relaxed);
        self.inner.gradient(x, out)
    }

    fn known_mean(&self) -> Option<&[f64]> {
        self.inner.known_mean()
    }

    fn default_initial_point(&self) -> Vec<f64> {
        self.inner.default_initial_point()
    }
}

fn thread_cpu_seconds() -> f64 {
    let mut ts = libc::timespec {
        tv_sec: 0,
        tv_nsec: 0,
    };
    let rc = unsafe { libc::clock_gettime(libc::CLOCK_THREAD_CPUTIME_ID, &mut ts) };
    if rc != 0 {
        return 0.0;
    }
    ts.tv_sec as f64 + ts.tv_nsec as f64 * 1e-9
}

/// Scalar parameters for one chain.
#[derive(Debug, Clone, Copy)]
pub struct ChainRunParams {
    pub chain_length: usize,
    pub burn_in_fraction: f64,
    pub seed: u64,
}

/// Full output of one chain: the per-coordinate series over the whole run
/// plus evaluation counters and timings split at the burn-in boundary.
#[derive(Debug, Clone)]
pub struct SimulationRecord {
    pub seed: u64,
    pub chain_length: usize,
    pub burn_in_len: usize,
    /// Coordinate-major: `series[c][t]` is coordinate `c` after transition
    /// `t + 1`.
    pub series: Vec<Vec<f64>>,
    pub logp_evals_pre: u64,
    pub logp_evals_post: u64,
    pub grad_evals_pre: u64,
    pub grad_evals_post: u64,
    pub cpu_seconds: f64,
    pub wall_seconds: f64,
    pub cpu_seconds_post: f64,
    pub wall_seconds_post: f64,
}

impl SimulationRecord {
    pub fn post_iterations(&self) -> usize {
        self.chain_length - self.burn_in_len
    }

    pub fn logp_evals_total(&self) -> u64 {
        self.logp_evals_pre + self.logp_evals_post
    }

    pub fn grad_evals_total(&self) -> u64 {
        self.grad_evals_pre + self.grad_evals_post
    }

    /// Post-burn-in log-density evaluations per iteration.
    pub fn evals_per_iter(&self) -> f64 {
        self.logp_evals_post as f64 / self.post_iterations() as f64
    }

    pub fn grad_evals_per_iter(&self) -> f64 {
        self.grad_evals_post as f64 / self.post_iterations() as f64
    }
}

/// Runs one chain from the target's default initial point.
///
/// The target is wrapped in a counting proxy for the whole loop; the
/// initial cache-priming evaluation happens outside the proxy, so a
/// coordinate-sweep Metropolis chain of length L over d dimensions counts
/// exactly `L * d` evaluations. Adaptation (for kernels that adapt) freezes
/// exactly at the burn-in boundary.
pub fn run_chain(
    target: &dyn TargetDistribution,
    kernel: &mut dyn TransitionKernel,
    tuning: &TuningParams,
    params: &ChainRunParams,
) -> Result<SimulationRecord, ConfigError> {
    if kernel.requires_gradient() && !target.has_gradient() {
        return invalid(format!(
            "sampler {} requires a gradient but distribution {} provides none",
            kernel.name(),
            target.name()
        ));
    }
    let d = target.dim();
    let chain_length = params.chain_length;
    assert!(chain_length >= 1, "chain_length must be positive");
    assert!(
        params.burn_in_fraction > 0.0 && params.burn_in_fraction < 1.0,
        "burn_in_fraction must lie in (0, 1)"
    );
    let burn_in_len = (params.burn_in_fraction * chain_length as f64).floor() as usize;

    let counting = CountingTarget::new(target);
    let x0 = target.default_initial_point();
    let mut state = ChainState::at(x0, target); // priming eval is not counted
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut series: Vec<Vec<f64>> = (0..d).map(|_| Vec::with_capacity(chain_length)).collect();

    let mut kernel_logp: u64 = 0;
    let mut kernel_grad: u64 = 0;
    let mut logp_pre = 0;
    let mut grad_pre = 0;
    let cpu0 = thread_cpu_seconds();
    let wall0 = Instant::now();
    let mut cpu_boundary = cpu0;
    let mut wall_boundary = 0.0;

    for t in 0..chain_length {
        if t == burn_in_len {
            kernel.freeze_adaptation();
            logp_pre = counting.logp_calls();
            grad_pre = counting.grad_calls();
            cpu_boundary = thread_cpu_seconds();
            wall_boundary = wall0.elapsed().as_secs_f64();
        }
        let TransitionResult {
            next,
            logp_evals,
            grad_evals,
        } = kernel.transition(state, &counting, tuning, &mut rng);
        state = next;
        kernel_logp += logp_evals;
        kernel_grad += grad_evals;
        for (c, v) in series.iter_mut().zip(&state.x) {
            c.push(*v);
        }
    }

    let cpu1 = thread_cpu_seconds();
    let wall1 = wall0.elapsed().as_secs_f64();
    if burn_in_len == 0 {
        cpu_boundary = cpu0;
        wall_boundary = 0.0;
    }
    let logp_total = counting.logp_calls();
    let grad_total = counting.grad_calls();
    debug_assert_eq!(kernel_logp, logp_total, "kernel counters diverged from proxy");
    debug_assert_eq!(kernel_grad, grad_total, "kernel counters diverged from proxy");

    Ok(SimulationRecord {
        seed: params.seed,
        chain_length,
        burn_in_len,
        series,
        logp_evals_pre: logp_pre,
        logp_evals_post: logp_total - logp_pre,
        grad_evals_pre: grad_pre,
        grad_evals_post: grad_total - grad_pre,
        cpu_seconds: cpu1 - cpu0,
        wall_seconds: wall1,
        cpu_seconds_post: cpu1 - cpu_boundary,
        wall_seconds_post: wall1 - wall_boundary,
    })
}

/// Drops the first `floor(fraction * chain_length)` states and returns one
/// view per coordinate, centered on the known mean where the distribution
/// declares one.
pub fn apply_burn_in<'a>(
    record: &'a SimulationRecord,
    burn_in_fraction: f64,
    known_mean: Option<&[f64]>,
) -> Vec<SeriesView<'a>> {
    assert!(burn_in_fraction > 0.0 && burn_in_fraction < 1.0);
    let drop = (burn_in_fraction * record.chain_length as f64).floor() as usize;
    record
        .series
        .iter()
        .enumerate()
        .map(|(c, values)| {
            let mean_mode = match known_mean {
                Some(mean) => MeanMode::Known(mean[c]),
                None => MeanMode::Estimate,
            };
            SeriesView::new(&values[drop..], mean_mode).expect("post-burn-in series is finite")
        })
        .collect()
}

/// Reduces per-coordinate estimates to the slowest-mixing component: any
/// nonstationary coordinate dominates, a fully degenerate set stays
/// degenerate, and otherwise the Ok estimate with the largest
/// autocorrelation time wins (ties keep the lowest coordinate index).
pub fn slowest_component(estimates: &[ActEstimate]) -> ActEstimate {
    assert!(!estimates.is_empty(), "need at least one coordinate");
    if let Some(ns) = estimates.iter().find(|e| e.status == ActStatus::Nonstationary) {
        return ns.clone();
    }
    let mut best: Option<&ActEstimate> = None;
    for est in estimates.iter().filter(|e| e.status == ActStatus::Ok) {
        match best {
            None => best = Some(est),
            Some(cur) if est.tau > cur.tau => best = Some(est),
            _ => {}
        }
    }
    match best {
        Some(est) => est.clone(),
        None => estimates[0].clone(), // all degenerate
    }
}

/// Figure of merit: evaluations per iteration times the autocorrelation
/// time, with the confidence bounds scaled the same way. Nonstationary
/// estimates map to infinities; degenerate ones to NaN, which downstream
/// encodes as not-applicable.
pub fn figure_of_merit(act: &ActEstimate, evals_per_iter: f64) -> (f64, f64, f64) {
    assert!(evals_per_iter > 0.0, "evals_per_iter must be positive");
    match act.status {
        ActStatus::Ok => (
            evals_per_iter * act.tau,
            evals_per_iter * act.ci_low,
            evals_per_iter * act.ci_high,
        ),
        ActStatus::Nonstationary => (f64::INFINITY, f64::INFINITY, f64::INFINITY),
        ActStatus::Degenerate => (f64::NAN, f64::NAN, f64::NAN),
    }
}

/// One finished grid cell.
#[derive(Debug, Clone)]
pub struct CellResult {
    pub distribution: String,
    pub dim: usize,
    pub sampler: String,
    pub scale: f64,
    pub beta: Option<f64>,
    pub replicate: u32,
    pub seed: u64,
    pub chain_length: usize,
    pub burn_in_fraction: f64,
    pub evals_per_iter: f64,
    pub grad_evals_per_iter: f64,
    pub cpu_seconds: f64,
    pub wall_seconds: f64,
    pub act_ar: ActEstimate,
    pub act_ics: ActEstimate,
    pub fom: f64,
    pub fom_lo: f64,
    pub fom_hi: f64,
    pub status: ActStatus,
}

struct CellPlan {
    dist_index: usize,
    sampler_index: usize,
    tuning_index: usize,
    replicate: u32,
    tuning: TuningParams,
    beta: Option<f64>,
}

fn validate(config: &GridConfig) -> Result<(), ConfigError> {
    if config.chain_length < 100 {
        return invalid("chain_length must be at least 100");
    }
    if !(config.burn_in_fraction > 0.0 && config.burn_in_fraction < 1.0) {
        return invalid("burn_in_fraction must lie in (0, 1)");
    }
    if config.replicates < 1 {
        return invalid("replicates must be at least 1");
    }
    if config.ci_draws < 100 {
        return invalid("ci_draws must be at least 100");
    }
    if !(config.ci_level > 0.0 && config.ci_level < 1.0) {
        return invalid("ci_level must lie in (0, 1)");
    }
    if config.distributions.is_empty() {
        return invalid("no distributions configured");
    }
    if config.samplers.is_empty() {
        return invalid("no samplers configured");
    }
    for sampler in &config.samplers {
        if sampler.scales.is_empty() {
            return invalid(format!("sampler {} has an empty scale grid", sampler.name));
        }
        if sampler.scales.iter().any(|s| !(*s > 0.0)) {
            return invalid(format!("sampler {} has a non-positive scale", sampler.name));
        }
        if !sampler.betas.is_empty() && !sampler_uses_beta(&sampler.name) {
            return invalid(format!(
                "sampler {} does not take a beta parameter",
                sampler.name
            ));
        }
        if sampler.betas.iter().any(|b| !(*b > 0.0 && *b < 1.0)) {
            return invalid(format!("sampler {} has a beta outside (0, 1)", sampler.name));
        }
        crate::samplers::build_kernel(&sampler.name, 1).map_err(ConfigError::Invalid)?;
    }
    Ok(())
}

fn run_cell(
    config: &GridConfig,
    target: &dyn TargetDistribution,
    sampler_name: &str,
    plan: &CellPlan,
) -> CellResult {
    let seed = derive_cell_seed(
        config.master_seed,
        plan.dist_index,
        plan.sampler_index,
        plan.tuning_index,
        plan.replicate,
    );
    let dim = target.dim();
    let mut kernel = build_kernel(sampler_name, dim).expect("validated sampler name");
    let params = ChainRunParams {
        chain_length: config.chain_length,
        burn_in_fraction: config.burn_in_fraction,
        seed,
    };
    let record = run_chain(target, kernel.as_mut(), &plan.tuning, &params)
        .expect("validated sampler/target pairing");

    let views = apply_burn_in(&record, config.burn_in_fraction, target.known_mean());
    let opts = ActOptions {
        p_max: config.p_max_override,
        ci_draws: config.ci_draws,
        ci_level: config.ci_level,
    };
    let mut act_rng = ChaCha8Rng::seed_from_u64(mix64(seed ^ ACT_STREAM_SALT));
    let ar_estimates: Vec<ActEstimate> = views
        .iter()
        .map(|v| estimate_act(v, &opts, &mut act_rng))
        .collect();
    let ics_estimates: Vec<ActEstimate> = views.iter().map(act_ics).collect();

    let act_ar = slowest_component(&ar_estimates);
    let act_ics_slowest = slowest_component(&ics_estimates);
    let evals_per_iter = record.evals_per_iter();
    let (fom, fom_lo, fom_hi) = figure_of_merit(&act_ar, evals_per_iter);

    CellResult {
        distribution: target.name().to_string(),
        dim,
        sampler: sampler_name.to_string(),
        scale: plan.tuning.scale,
        beta: plan.beta,
        replicate: plan.replicate,
        seed,
        chain_length: config.chain_length,
        burn_in_fraction: config.burn_in_fraction,
        evals_per_iter,
        grad_evals_per_iter: record.grad_evals_per_iter(),
        cpu_seconds: record.cpu_seconds,
        wall_seconds: record.wall_seconds,
        status: act_ar.status,
        act_ar,
        act_ics: act_ics_slowest,
        fom,
        fom_lo,
        fom_hi,
    }
}

/// Runs the whole grid on the default worker pool (or sequentially without
/// the `parallel` feature).
pub fn run_grid(config: &GridConfig) -> Result<Vec<CellResult>, ConfigError> {
    run_grid_with_threads(config, None, None)
}

/// Runs the grid with an explicit worker count. `Some(1)` forces the
/// sequential path even when the `parallel` feature is on; the results are
/// identical either way. The progress callback fires once per finished
/// cell, in completion order.
pub fn run_grid_with_threads(
    config: &GridConfig,
    threads: Option<usize>,
    progress: Option<&(dyn Fn(&CellResult) + Sync)>,
) -> Result<Vec<CellResult>, ConfigError> {
    validate(config)?;
    let targets: Vec<Box<dyn TargetDistribution>> = config
        .distributions
        .iter()
        .map(build_target)
        .collect::<Result<_, _>>()
        .map_err(ConfigError::Invalid)?;

    let mut plans: Vec<(usize, CellPlan)> = Vec::new();
    for (dist_index, _) in config.distributions.iter().enumerate() {
        for (sampler_index, sampler) in config.samplers.iter().enumerate() {
            for (tuning_index, (tuning, beta)) in sampler.tuning_list().into_iter().enumerate() {
                for replicate in 0..config.replicates {
                    plans.push((
                        sampler_index,
                        CellPlan {
                            dist_index,
                            sampler_index,
                            tuning_index,
                            replicate,
                            tuning,
                            beta,
                        },
                    ));
                }
            }
        }
    }

    let execute = |(sampler_index, plan): &(usize, CellPlan)| -> CellResult {
        let target = targets[plan.dist_index].as_ref();
        let name = &config.samplers[*sampler_index].name;
        let cell = run_cell(config, target, name, plan);
        if let Some(cb) = progress {
            cb(&cell);
        }
        cell
    };

    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        match threads {
            Some(1) => Ok(plans.iter().map(execute).collect()),
            Some(n) => {
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build()
                    .map_err(|e| ConfigError::Invalid(format!("worker pool: {e}")))?;
                Ok(pool.install(|| plans.par_iter().map(execute).collect()))
            }
            None => Ok(plans.par_iter().map(execute).collect()),
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        Ok(plans.iter().map(execute).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::act::ActMethod;
    use crate::targets::{gamma21, scaled_gaussian};
    use approx::assert_abs_diff_eq;
    use std::collections::HashSet;

    fn small_config() -> GridConfig {
        let mut um = SamplerGrid::new("univariate_metropolis", vec![1.0, 10.0]);
        um.betas = Vec::new();
        let slice = SamplerGrid::new("step_out_slice", vec![2.0]);
        let mut config = GridConfig::new(
            vec![
                DistributionSpec::named("gamma21"),
                DistributionSpec {
                    name: "scaled_gaussian".into(),
                    dim: Some(2),
                    mode_seed: None,
                },
            ],
            vec![um, slice],
        );
        config.chain_length = 600;
        config.ci_draws = 200;
        config.master_seed = 99;
        config
    }

    #[test]
    fn cell_seeds_are_stable_and_distinct() {
        assert_eq!(derive_cell_seed(1, 2, 3, 4, 5), derive_cell_seed(1, 2, 3, 4, 5));
        assert_ne!(derive_cell_seed(1, 2, 3, 4, 5), derive_cell_seed(1, 2, 3, 4, 6));

        let mut seen = HashSet::new();
        for d in 0..10 {
            for s in 0..10 {
                for t in 0..10 {
                    for r in 0..10 {
                        seen.insert(derive_cell_seed(42, d, s, t, r));
                    }
                }
            }
        }
        assert_eq!(seen.len(), 10_000);
    }

    #[test]
    fn univariate_metropolis_eval_count_is_exact() {
        let target = scaled_gaussian(4);
        let mut kernel = build_kernel("univariate_metropolis", 4).unwrap();
        let params = ChainRunParams {
            chain_length: 500,
            burn_in_fraction: 0.2,
            seed: 7,
        };
        let record = run_chain(&target, kernel.as_mut(), &TuningParams::new(1.0), &params).unwrap();
        assert_eq!(record.logp_evals_total(), 4 * 500);
        assert_eq!(record.logp_evals_pre, 4 * 100);
        assert_eq!(record.logp_evals_post, 4 * 400);
        assert_eq!(record.post_iterations(), 400);
        assert_abs_diff_eq!(record.evals_per_iter(), 4.0, epsilon = 1e-15);
    }

    #[test]
    fn rerunning_a_chain_reproduces_it_exactly() {
        let target = gamma21();
        let params = ChainRunParams {
            chain_length: 300,
            burn_in_fraction: 0.2,
            seed: 21,
        };
        let run = || {
            let mut kernel = build_kernel("step_out_slice", 1).unwrap();
            run_chain(&target, kernel.as_mut(), &TuningParams::new(2.0), &params).unwrap()
        };
        let a = run();
        let b = run();
        assert_eq!(a.series, b.series);
        assert_eq!(a.logp_evals_total(), b.logp_evals_total());
    }

    #[test]
    fn counter_totals_match_the_proxy_for_every_sampler() {
        let target = scaled_gaussian(3);
        for name in crate::samplers::KNOWN_SAMPLERS {
            let counting = CountingTarget::new(&target);
            let mut kernel = build_kernel(name, 3).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(3);
            let mut state = ChainState::at(target.default_initial_point(), &target);
            let tuning = TuningParams::new(1.0);
            let mut logp = 0;
            let mut grad = 0;
            for _ in 0..400 {
                let res = kernel.transition(state, &counting, &tuning, &mut rng);
                state = res.next;
                logp += res.logp_evals;
                grad += res.grad_evals;
            }
            assert_eq!(logp, counting.logp_calls(), "{name} logp counters");
            assert_eq!(grad, counting.grad_calls(), "{name} gradient counters");
        }
    }

    #[test]
    fn gradient_free_target_rejects_gradient_sampler() {
        struct NoGrad;
        impl TargetDistribution for NoGrad {
            fn name(&self) -> &str {
                "no_grad"
            }
            fn dim(&self) -> usize {
                1
            }
            fn log_density(&self, x: &[f64]) -> f64 {
                -x[0] * x[0]
            }
            fn default_initial_point(&self) -> Vec<f64> {
                vec![0.0]
            }
        }
        let target = NoGrad;
        let mut kernel = build_kernel("shrinking_rank", 1).unwrap();
        let params = ChainRunParams {
            chain_length: 100,
            burn_in_fraction: 0.2,
            seed: 3,
        };
        let err = run_chain(&target, kernel.as_mut(), &TuningParams::new(1.0), &params)
            .err()
            .unwrap();
        let ConfigError::Invalid(msg) = err;
        assert!(msg.contains("shrinking_rank"), "{msg}");
    }

    #[test]
    fn burn_in_split_counts_and_lengths() {
        let target = gamma21();
        let mut kernel = build_kernel("univariate_metropolis", 1).unwrap();
        let params = ChainRunParams {
            chain_length: 50,
            burn_in_fraction: 0.2,
            seed: 5,
        };
        let record = run_chain(&target, kernel.as_mut(), &TuningParams::new(1.0), &params).unwrap();
        assert_eq!(record.burn_in_len, 10);
        assert_eq!(
            record.logp_evals_pre + record.logp_evals_post,
            record.logp_evals_total()
        );
        let views = apply_burn_in(&record, 0.2, target.known_mean());
        assert_eq!(views.len(), 1);
        assert_eq!(views[0].len(), 40);
        assert_eq!(views[0].values(), &record.series[0][10..]);
        assert_eq!(views[0].mean_mode(), MeanMode::Known(2.0));
    }

    #[test]
    fn burn_in_floor_arithmetic() {
        let target = gamma21();
        let mut kernel = build_kernel("univariate_metropolis", 1).unwrap();
        let params = ChainRunParams {
            chain_length: 10,
            burn_in_fraction: 0.2,
            seed: 5,
        };
        let record = run_chain(&target, kernel.as_mut(), &TuningParams::new(1.0), &params).unwrap();
        let views = apply_burn_in(&record, 0.2, None);
        assert_eq!(views[0].len(), 8);
        assert_eq!(views[0].mean_mode(), MeanMode::Estimate);
    }

    fn ok_estimate(tau: f64) -> ActEstimate {
        ActEstimate {
            tau,
            ci_low: tau * 0.8,
            ci_high: tau * 1.3,
            method: ActMethod::Ar,
            status: ActStatus::Ok,
            order: 1,
        }
    }

    #[test]
    fn slowest_component_rules() {
        let slow = slowest_component(&[ok_estimate(3.0), ok_estimate(19.0)]);
        assert_eq!(slow.tau, 19.0);
        assert_eq!(slow.ci_high, 19.0 * 1.3);

        let ns = slowest_component(&[ok_estimate(5.0), ActEstimate::nonstationary(2)]);
        assert_eq!(ns.status, ActStatus::Nonstationary);
        assert!(ns.tau.is_infinite());

        let single = slowest_component(&[ok_estimate(7.0)]);
        assert_eq!(single.tau, 7.0);

        let deg = slowest_component(&[
            ActEstimate::degenerate(ActMethod::Ar),
            ActEstimate::degenerate(ActMethod::Ar),
        ]);
        assert_eq!(deg.status, ActStatus::Degenerate);

        let mixed = slowest_component(&[ActEstimate::degenerate(ActMethod::Ar), ok_estimate(2.0)]);
        assert_eq!(mixed.status, ActStatus::Ok);
        assert_eq!(mixed.tau, 2.0);
    }

    #[test]
    fn figure_of_merit_rules() {
        let (fom, lo, hi) = figure_of_merit(&ok_estimate(10.0), 2.0);
        assert_eq!(fom, 20.0);
        assert_eq!(lo, 16.0);
        assert_eq!(hi, 26.0);

        let (fom, lo, hi) = figure_of_merit(&ActEstimate::nonstationary(1), 2.0);
        assert!(fom.is_infinite() && lo.is_infinite() && hi.is_infinite());

        let (fom, _, _) = figure_of_merit(&ok_estimate(1.0), 1.0);
        assert_eq!(fom, 1.0);

        let (fom, _, _) = figure_of_merit(&ActEstimate::degenerate(ActMethod::Ar), 2.0);
        assert!(fom.is_nan());
    }

    #[test]
    fn grid_shape_and_order_are_deterministic() {
        let config = small_config();
        let cells = run_grid(&config).unwrap();
        // 2 distributions x (2 + 1) tunings x 1 replicate
        assert_eq!(cells.len(), 6);
        assert_eq!(cells[0].distribution, "gamma21");
        assert_eq!(cells[0].sampler, "univariate_metropolis");
        assert_eq!(cells[0].scale, 1.0);
        assert_eq!(cells[1].scale, 10.0);
        assert_eq!(cells[2].sampler, "step_out_slice");
        assert_eq!(cells[3].distribution, "scaled_gaussian");
        for c in &cells {
            assert!(c.evals_per_iter > 0.0);
        }
    }

    #[test]
    fn one_worker_and_many_workers_agree() {
        let config = small_config();
        let a = run_grid_with_threads(&config, Some(1), None).unwrap();
        let b = run_grid_with_threads(&config, Some(4), None).unwrap();
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.seed, y.seed);
            assert_eq!(x.scale, y.scale);
            assert_eq!(x.fom.to_bits(), y.fom.to_bits());
            assert_eq!(x.act_ar.tau.to_bits(), y.act_ar.tau.to_bits());
            assert_eq!(x.act_ics.tau.to_bits(), y.act_ics.tau.to_bits());
            assert_eq!(x.evals_per_iter.to_bits(), y.evals_per_iter.to_bits());
        }
    }

    #[test]
    fn replicates_get_distinct_seeds() {
        let mut config = small_config();
        config.replicates = 3;
        config.samplers.truncate(1);
        config.samplers[0].scales.truncate(1);
        config.distributions.truncate(1);
        let cells = run_grid(&config).unwrap();
        assert_eq!(cells.len(), 3);
        let seeds: HashSet<u64> = cells.iter().map(|c| c.seed).collect();
        assert_eq!(seeds.len(), 3);
        for (i, c) in cells.iter().enumerate() {
            assert_eq!(c.replicate, i as u32);
            assert_eq!(c.distribution, cells[0].distribution);
            assert_eq!(c.scale, cells[0].scale);
        }
    }

    #[test]
    fn config_validation_catches_the_obvious() {
        let mut config = small_config();
        config.chain_length = 10;
        assert!(run_grid(&config).is_err());

        let mut config = small_config();
        config.samplers[0].name = "gibbs".into();
        let ConfigError::Invalid(msg) = run_grid(&config).err().unwrap();
        assert_eq!(msg, "unknown sampler: gibbs");

        let mut config = small_config();
        config.distributions[0].name = "nope".into();
        let ConfigError::Invalid(msg) = run_grid(&config).err().unwrap();
        assert_eq!(msg, "unknown distribution: nope");

        let mut config = small_config();
        config.samplers[0].scales.clear();
        assert!(run_grid(&config).is_err());

        let mut config = small_config();
        config.samplers[0].betas = vec![0.5];
        let ConfigError::Invalid(msg) = run_grid(&config).err().unwrap();
        assert!(msg.contains("beta"), "{msg}");
    }

    #[test]
    fn default_grid_is_nine_log_spaced_values() {
        let grid = default_tuning_grid();
        assert_eq!(grid.len(), 9);
        assert_abs_diff_eq!(grid[0], 0.1, epsilon = 1e-12);
        assert_abs_diff_eq!(grid[8], 1000.0, epsilon = 1e-9);
        for w in grid.windows(2) {
            assert_abs_diff_eq!(w[1] / w[0], 10f64.sqrt(), epsilon = 1e-9);
        }
    }

    #[test]
    fn adaptive_freeze_happens_at_burn_in_boundary() {
        use crate::samplers::AdaptiveMetropolis;
        let target = scaled_gaussian(2);
        let mut kernel = AdaptiveMetropolis::new(2);
        let params = ChainRunParams {
            chain_length: 200,
            burn_in_fraction: 0.2,
            seed: 11,
        };
        let record = {
            let k: &mut dyn TransitionKernel = &mut kernel;
            run_chain(&target, k, &TuningParams::new(1.0), &params).unwrap()
        };
        assert_eq!(record.burn_in_len, 40);
        // adaptation saw exactly the burn-in states
        assert_eq!(kernel.adapt_state().count, 40);
        assert!(kernel.adapt_state().frozen);
    }
}
