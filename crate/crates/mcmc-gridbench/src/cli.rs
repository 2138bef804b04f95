//! Command-line front end.
//!
//! Three subcommands: `run` executes an experiment config and writes the
//! results CSV, `plot` renders a results CSV to SVG, and `act` estimates
//! the autocorrelation time of a standalone series. Exit codes are stable:
//! 0 success, 1 runtime or I/O failure, 2 usage or configuration error.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::act::{act_ics, estimate_act, ActOptions, MeanMode, SeriesView};
use crate::config::{load_experiment_config, ConfigFileError};
use crate::harness::run_grid_with_threads;
use crate::report::{
    read_results, render_grid_svg, render_ratio_svg, write_results, ReportError, ResultsTable,
};

pub const THREADS_ENV_VAR: &str = "MCMC_GRIDBENCH_THREADS";

const EXIT_OK: i32 = 0;
const EXIT_RUNTIME: i32 = 1;
const EXIT_USAGE: i32 = 2;

#[derive(Parser)]
#[command(
    name = "mcmc-gridbench",
    version,
    about = "Benchmark MCMC samplers: run tuning grids, estimate autocorrelation times, render comparison figures"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment config and write the results CSV
    Run {
        /// Experiment config file (TOML)
        #[arg(long)]
        config: PathBuf,
        /// Destination results CSV
        #[arg(long)]
        out: PathBuf,
        /// Worker threads (default: machine parallelism, or MCMC_GRIDBENCH_THREADS)
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Render a results CSV as an SVG figure
    Plot {
        /// Results CSV produced by `run`
        #[arg(long)]
        results: PathBuf,
        /// Destination SVG
        #[arg(long)]
        out: PathBuf,
        /// Figure style
        #[arg(long, value_enum)]
        style: PlotStyle,
        /// Row factor (grid style)
        #[arg(long, default_value = "distribution")]
        rows: String,
        /// Column factor (grid style)
        #[arg(long, default_value = "sampler")]
        cols: String,
        /// X-axis factor (grid style)
        #[arg(long, default_value = "scale")]
        x: String,
    },
    /// Estimate the autocorrelation time of a single series
    Act {
        /// Single-column CSV of reals (optional header `x`)
        #[arg(long)]
        input: PathBuf,
        /// Known series mean; omitted means estimate it from the series
        #[arg(long)]
        mean: Option<f64>,
        /// Confidence level for the simulated interval
        #[arg(long, default_value_t = 0.95)]
        level: f64,
        /// Seed for the confidence-interval simulation
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum PlotStyle {
    Grid,
    Ratio,
}

/// Parses argv and dispatches; returns the process exit code.
pub fn main_entry() -> i32 {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            config,
            out,
            threads,
        } => cmd_run(&config, &out, threads),
        Command::Plot {
            results,
            out,
            style,
            rows,
            cols,
            x,
        } => cmd_plot(&results, &out, style, &rows, &cols, &x),
        Command::Act {
            input,
            mean,
            level,
            seed,
        } => cmd_act(&input, mean, level, seed),
    }
}

fn threads_from_env() -> Option<usize> {
    std::env::var(THREADS_ENV_VAR)
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|n| *n > 0)
}

/// Executes a grid config, streaming one summary line per finished cell to
/// standard error.
pub fn cmd_run(config_path: &Path, out_path: &Path, threads_flag: Option<usize>) -> i32 {
    let experiment = match load_experiment_config(config_path) {
        Ok(c) => c,
        Err(e @ ConfigFileError::Io { .. }) => {
            eprintln!("error: {e}");
            return EXIT_RUNTIME;
        }
        Err(ConfigFileError::Invalid(msg)) => {
            eprintln!("error: {msg}");
            return EXIT_USAGE;
        }
    };
    let threads = threads_flag.or(experiment.threads).or_else(threads_from_env);

    let total: usize = experiment
        .grid
        .distributions
        .len()
        .saturating_mul(experiment.grid.replicates as usize)
        .saturating_mul(
            experiment
                .grid
                .samplers
                .iter()
                .map(|s| s.scales.len() * s.betas.len().max(1))
                .sum::<usize>(),
        );
    let done = AtomicUsize::new(0);
    let progress = move |cell: &crate::harness::CellResult| {
        let k = done.fetch_add(1, Ordering::Relaxed) + 1;
        eprintln!(
            "[{k}/{total}] {} {} scale={:.4} rep={} status={} fom={:.4}",
            cell.distribution, cell.sampler, cell.scale, cell.replicate, cell.status, cell.fom
        );
    };

    let cells = match run_grid_with_threads(&experiment.grid, threads, Some(&progress)) {
        Ok(cells) => cells,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };

    let table = ResultsTable::from_cells(&cells);
    if let Err(e) = write_results(&table, out_path) {
        eprintln!("error: {e}");
        return EXIT_RUNTIME;
    }
    EXIT_OK
}

fn report_exit_code(err: &ReportError) -> i32 {
    match err {
        ReportError::UnknownFactor(_) | ReportError::DuplicateFactor(_) => EXIT_USAGE,
        _ => EXIT_RUNTIME,
    }
}

/// Renders a results CSV to SVG.
pub fn cmd_plot(
    results_path: &Path,
    out_path: &Path,
    style: PlotStyle,
    rows: &str,
    cols: &str,
    x: &str,
) -> i32 {
    // factor validation is usage-level; check before touching the file
    if let PlotStyle::Grid = style {
        if let Err(e) = crate::report::grid_figure(&ResultsTable::default(), rows, cols, x) {
            if matches!(
                e,
                ReportError::UnknownFactor(_) | ReportError::DuplicateFactor(_)
            ) {
                eprintln!("error: {e}");
                return EXIT_USAGE;
            }
        }
    }
    let table = match read_results(results_path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_RUNTIME;
        }
    };
    let rendered = match style {
        PlotStyle::Grid => render_grid_svg(&table, rows, cols, x, out_path),
        PlotStyle::Ratio => render_ratio_svg(&table, out_path),
    };
    match rendered {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            report_exit_code(&e)
        }
    }
}

fn parse_series_file(path: &Path) -> Result<Vec<f64>, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut values = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if idx == 0 && line == "x" {
            continue;
        }
        let v: f64 = line
            .parse()
            .map_err(|_| format!("{}: line {}: not a number: {line:?}", path.display(), idx + 1))?;
        values.push(v);
    }
    if values.len() < 2 {
        return Err(format!("{}: need at least 2 values", path.display()));
    }
    Ok(values)
}

/// Prints `method,tau,ci_low,ci_high,order,status` for the AR and
/// initial-convex-sequence estimators. Degenerate and nonstationary are
/// valid answers and still exit 0.
pub fn cmd_act(input: &Path, mean: Option<f64>, level: f64, seed: u64) -> i32 {
    if !(level > 0.0 && level < 1.0) {
        eprintln!("error: --level must lie in (0, 1)");
        return EXIT_USAGE;
    }
    let values = match parse_series_file(input) {
        Ok(v) => v,
        Err(msg) => {
            eprintln!("error: {msg}");
            return EXIT_RUNTIME;
        }
    };
    let mean_mode = match mean {
        Some(m) => MeanMode::Known(m),
        None => MeanMode::Estimate,
    };
    let series = match SeriesView::new(&values, mean_mode) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {}: {e}", input.display());
            return EXIT_RUNTIME;
        }
    };
    let opts = ActOptions {
        ci_level: level,
        ..ActOptions::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ar = estimate_act(&series, &opts, &mut rng);
    let ics = act_ics(&series);
    println!(
        "ar,{},{},{},{},{}",
        ar.tau, ar.ci_low, ar.ci_high, ar.order, ar.status
    );
    println!(
        "ics,{},{},{},{},{}",
        ics.tau, ics.ci_low, ics.ci_high, ics.order, ics.status
    );
    EXIT_OK
}
