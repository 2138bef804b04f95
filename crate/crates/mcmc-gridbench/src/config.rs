//! Experiment configuration files (TOML).
//!
//! A config names the distributions and samplers to cross, the per-sampler
//! tuning grids, chain-level parameters, and (optionally) which three
//! factors the resulting figure should spread over rows, columns, and the
//! x axis. See `configs/` for annotated examples.

use std::path::Path;

use serde::Deserialize;
use thiserror::Error;

use crate::harness::{default_tuning_grid, GridConfig, SamplerGrid};
use crate::targets::DistributionSpec;

#[derive(Debug, Error)]
pub enum ConfigFileError {
    #[error("{path}: {source}")]
    Io {
        path: std::path::PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Invalid(String),
}

/// Which factors a figure spreads over rows, columns, and the x axis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridAxes {
    pub rows: String,
    pub cols: String,
    pub x: String,
}

/// A parsed and validated experiment.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub grid: GridConfig,
    pub threads: Option<usize>,
    pub grid_axes: Option<GridAxes>,
}

fn default_chain_length() -> usize {
    50_000
}
fn default_burn_in() -> f64 {
    0.2
}
fn default_replicates() -> u32 {
    1
}
fn default_ci_draws() -> usize {
    1000
}
fn default_ci_level() -> f64 {
    0.95
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default = "default_chain_length")]
    chain_length: usize,
    #[serde(default = "default_burn_in")]
    burn_in_fraction: f64,
    #[serde(default)]
    master_seed: u64,
    #[serde(default = "default_replicates")]
    replicates: u32,
    #[serde(default = "default_ci_draws")]
    ci_draws: usize,
    #[serde(default = "default_ci_level")]
    ci_level: f64,
    #[serde(default)]
    p_max: Option<usize>,
    #[serde(default)]
    threads: Option<usize>,
    #[serde(default)]
    grid: Option<RawAxes>,
    distributions: Vec<RawDistribution>,
    samplers: Vec<RawSampler>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAxes {
    rows: String,
    cols: String,
    x: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDistribution {
    name: String,
    #[serde(default)]
    dim: Option<usize>,
    #[serde(default)]
    mode_seed: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSampler {
    name: String,
    #[serde(default)]
    scale: Option<ScaleSpec>,
    #[serde(default)]
    beta: Option<Vec<f64>>,
}

/// Either an explicit list of tuning values or a log-spaced range.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum ScaleSpec {
    List(Vec<f64>),
    Log { min: f64, max: f64, count: usize },
}

fn log_spaced(min: f64, max: f64, count: usize) -> Result<Vec<f64>, ConfigFileError> {
    if !(min > 0.0 && max > min) {
        return Err(ConfigFileError::Invalid(
            "scale range needs 0 < min < max".to_string(),
        ));
    }
    if count < 2 {
        return Err(ConfigFileError::Invalid(
            "scale range needs count >= 2".to_string(),
        ));
    }
    let lo = min.log10();
    let hi = max.log10();
    Ok((0..count)
        .map(|i| 10f64.powf(lo + (hi - lo) * i as f64 / (count - 1) as f64))
        .collect())
}

const AXIS_NAMES: [&str; 5] = ["distribution", "sampler", "scale", "beta", "dim"];

fn validate_axes(raw: &RawAxes) -> Result<GridAxes, ConfigFileError> {
    for name in [&raw.rows, &raw.cols, &raw.x] {
        if !AXIS_NAMES.contains(&name.as_str()) {
            return Err(ConfigFileError::Invalid(format!(
                "grid axis names one of {AXIS_NAMES:?}, got {name:?}"
            )));
        }
    }
    if raw.rows == raw.cols || raw.rows == raw.x || raw.cols == raw.x {
        return Err(ConfigFileError::Invalid(
            "grid axes rows/cols/x must name three distinct factors".to_string(),
        ));
    }
    Ok(GridAxes {
        rows: raw.rows.clone(),
        cols: raw.cols.clone(),
        x: raw.x.clone(),
    })
}

/// Parses a config from TOML text.
pub fn parse_experiment_config(text: &str) -> Result<ExperimentConfig, ConfigFileError> {
    let raw: RawConfig =
        toml::from_str(text).map_err(|e| ConfigFileError::Invalid(e.to_string()))?;

    let distributions = raw
        .distributions
        .iter()
        .map(|d| DistributionSpec {
            name: d.name.clone(),
            dim: d.dim,
            mode_seed: d.mode_seed,
        })
        .collect();

    let mut samplers = Vec::with_capacity(raw.samplers.len());
    for s in &raw.samplers {
        let scales = match &s.scale {
            None => default_tuning_grid(),
            Some(ScaleSpec::List(values)) => values.clone(),
            Some(ScaleSpec::Log { min, max, count }) => log_spaced(*min, *max, *count)?,
        };
        let mut grid = SamplerGrid::new(&s.name, scales);
        if let Some(betas) = &s.beta {
            grid.betas = betas.clone();
        }
        samplers.push(grid);
    }

    let mut grid = GridConfig::new(distributions, samplers);
    grid.chain_length = raw.chain_length;
    grid.burn_in_fraction = raw.burn_in_fraction;
    grid.master_seed = raw.master_seed;
    grid.replicates = raw.replicates;
    grid.ci_draws = raw.ci_draws;
    grid.ci_level = raw.ci_level;
    grid.p_max_override = raw.p_max;

    let grid_axes = raw.grid.as_ref().map(validate_axes).transpose()?;

    Ok(ExperimentConfig {
        grid,
        threads: raw.threads,
        grid_axes,
    })
}

/// Loads and parses a config file.
pub fn load_experiment_config(path: &Path) -> Result<ExperimentConfig, ConfigFileError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigFileError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_experiment_config(&text)
}
