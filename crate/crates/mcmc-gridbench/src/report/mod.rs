//! Results persistence and rendering.
//!
//! A grid run flattens to a fixed 22-column CSV schema ([`SCHEMA_COLUMNS`]),
//! with infinities written as the literal `inf` and not-applicable fields
//! left empty. The two renderers emit deterministic SVG: a small-multiples
//! lattice of the figure of merit against tuning ([`render_grid_svg`]) and
//! a per-distribution-normalized CPU-per-evaluation ratio plot
//! ([`render_ratio_svg`]).

mod csv;
mod svg;

pub use csv::{parse_results, read_results, results_to_string, write_results};
pub use svg::{
    grid_figure, normalized_cost_ratios, ratio_figure, render_grid_svg, render_ratio_svg,
    svg_string, FigureCell, FigurePoint, GridFigure,
};

use std::path::PathBuf;

use thiserror::Error;

use crate::act::ActStatus;
use crate::harness::CellResult;

/// Column order of the results schema, version 1.
pub const SCHEMA_COLUMNS: [&str; 22] = [
    "distribution",
    "dim",
    "sampler",
    "scale",
    "beta",
    "replicate",
    "seed",
    "chain_length",
    "burn_in_fraction",
    "evals_per_iter",
    "grad_evals_per_iter",
    "cpu_seconds",
    "wall_seconds",
    "tau_ar",
    "tau_ar_lo",
    "tau_ar_hi",
    "order",
    "tau_ics",
    "status",
    "fom",
    "fom_lo",
    "fom_hi",
];

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: String,
        message: String,
    },
    #[error("unrecognized results schema (expected version {SCHEMA_VERSION} header)")]
    Version,
    #[error("cpu_seconds missing from at least one row; the ratio plot needs timings")]
    MissingTiming,
    #[error("unknown factor: {0}")]
    UnknownFactor(String),
    #[error("factors must be distinct: {0}")]
    DuplicateFactor(String),
}

/// One results row, mirroring the CSV schema field for field. `None`
/// encodes an empty (not-applicable) field.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub distribution: String,
    pub dim: u32,
    pub sampler: String,
    pub scale: f64,
    pub beta: Option<f64>,
    pub replicate: u32,
    pub seed: u64,
    pub chain_length: u64,
    pub burn_in_fraction: f64,
    pub evals_per_iter: f64,
    pub grad_evals_per_iter: f64,
    pub cpu_seconds: Option<f64>,
    pub wall_seconds: Option<f64>,
    pub tau_ar: Option<f64>,
    pub tau_ar_lo: Option<f64>,
    pub tau_ar_hi: Option<f64>,
    pub order: Option<u32>,
    pub tau_ics: Option<f64>,
    pub status: ActStatus,
    pub fom: Option<f64>,
    pub fom_lo: Option<f64>,
    pub fom_hi: Option<f64>,
}

/// An ordered set of result rows.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ResultsTable {
    pub rows: Vec<ResultRow>,
}

fn keep_finite_or_inf(v: f64) -> Option<f64> {
    if v.is_nan() {
        None
    } else {
        Some(v)
    }
}

impl ResultsTable {
    pub fn from_cells(cells: &[CellResult]) -> Self {
        let rows = cells
            .iter()
            .map(|c| {
                let degenerate_ar = c.act_ar.status == ActStatus::Degenerate;
                ResultRow {
                    distribution: c.distribution.clone(),
                    dim: c.dim as u32,
                    sampler: c.sampler.clone(),
                    scale: c.scale,
                    beta: c.beta,
                    replicate: c.replicate,
                    seed: c.seed,
                    chain_length: c.chain_length as u64,
                    burn_in_fraction: c.burn_in_fraction,
                    evals_per_iter: c.evals_per_iter,
                    grad_evals_per_iter: c.grad_evals_per_iter,
                    cpu_seconds: Some(c.cpu_seconds),
                    wall_seconds: Some(c.wall_seconds),
                    tau_ar: if degenerate_ar { None } else { keep_finite_or_inf(c.act_ar.tau) },
                    tau_ar_lo: if degenerate_ar {
                        None
                    } else {
                        keep_finite_or_inf(c.act_ar.ci_low)
                    },
                    tau_ar_hi: if degenerate_ar {
                        None
                    } else {
                        keep_finite_or_inf(c.act_ar.ci_high)
                    },
                    order: if degenerate_ar {
                        None
                    } else {
                        Some(c.act_ar.order as u32)
                    },
                    tau_ics: if c.act_ics.status == ActStatus::Degenerate {
                        None
                    } else {
                        keep_finite_or_inf(c.act_ics.tau)
                    },
                    status: c.status,
                    fom: keep_finite_or_inf(c.fom),
                    fom_lo: keep_finite_or_inf(c.fom_lo),
                    fom_hi: keep_finite_or_inf(c.fom_hi),
                }
            })
            .collect();
        ResultsTable { rows }
    }
}
