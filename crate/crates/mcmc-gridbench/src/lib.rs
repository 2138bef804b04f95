//! Grid benchmarking of MCMC samplers.
//!
//! The figure of merit is log-density evaluations per independent
//! observation: the autocorrelation time of the slowest-mixing coordinate
//! multiplied by the average number of log-density evaluations per
//! iteration. Smaller is better. The crate provides
//!
//! * [`act`] — autocorrelation-time estimation for scalar series: an AR(p)
//!   model fit by Yule–Walker with AIC order selection, simulation-based
//!   confidence intervals, and an independent initial-convex-sequence
//!   estimator;
//! * [`targets`] — a suite of test distributions with log-densities,
//!   gradients, and (where available) known means;
//! * [`samplers`] — four instrumented transition kernels, each with a single
//!   principal tuning parameter;
//! * [`harness`] — runs (distribution × sampler × tuning × replicate) grids
//!   with deterministic per-cell seeding and optional data-parallel
//!   execution;
//! * [`report`] — results CSV and deterministic SVG renderings (small
//!   multiples of the figure of merit, and a CPU-per-evaluation ratio plot);
//! * [`config`] / [`cli`] — the `mcmc-gridbench` command-line front end.
//!
//! Grid cells are embarrassingly parallel; with the default `parallel`
//! feature they run on a rayon worker pool, and without it the same code
//! paths run sequentially with identical output.

pub mod act;
pub mod cli;
pub mod config;
pub mod harness;
pub mod report;
pub mod rng;
pub mod samplers;
pub mod targets;
