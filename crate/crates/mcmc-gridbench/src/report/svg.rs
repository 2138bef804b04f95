//! Deterministic SVG small multiples.
//!
//! Both renderers share one lattice layout: rows and columns are factor
//! levels in table order, every panel shares the same log10 axes, and all
//! coordinates are written with fixed two-decimal formatting so identical
//! input produces byte-identical output. Markers carry class names
//! (`fom-dot`, `fom-ci`, `ics-cross`, `degenerate-mark`, `inf-arrow`,
//! `ratio-dot`, `ref-line`) so structure is checkable without a rasterizer.

use std::path::Path;

use super::{ReportError, ResultRow, ResultsTable};
use crate::act::ActStatus;

const CELL_W: f64 = 170.0;
const CELL_H: f64 = 130.0;
const GAP: f64 = 12.0;
const MARGIN_L: f64 = 88.0;
const MARGIN_T: f64 = 48.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_B: f64 = 58.0;

/// One plotted tuning level inside one panel, in log10 data units.
#[derive(Debug, Clone)]
pub struct FigurePoint {
    pub x_log: f64,
    /// Figure-of-merit dot; `None` when the value is missing or infinite.
    pub fom_log: Option<f64>,
    pub fom_infinite: bool,
    pub lo_log: Option<f64>,
    pub hi_log: Option<f64>,
    pub hi_infinite: bool,
    /// Cross marker for the alternative estimator's figure of merit.
    pub ics_log: Option<f64>,
    pub degenerate: bool,
    /// More than one row shares this x level (replicates): draw
    /// partially transparent.
    pub crowded: bool,
}

#[derive(Debug, Clone, Default)]
pub struct FigureCell {
    pub points: Vec<FigurePoint>,
}

/// Layout-ready description of a small-multiples figure.
#[derive(Debug, Clone)]
pub struct GridFigure {
    pub row_levels: Vec<String>,
    pub col_levels: Vec<String>,
    /// Row-major cells; `cells[r * col_levels.len() + c]`.
    pub cells: Vec<FigureCell>,
    pub x_log_range: (f64, f64),
    pub y_log_range: (f64, f64),
    pub x_label: String,
    pub y_label: String,
    /// Horizontal dashed reference, in log10 y units.
    pub reference_y_log: Option<f64>,
}

const LABEL_FACTORS: [&str; 5] = ["distribution", "sampler", "dim", "scale", "beta"];
const NUMERIC_FACTORS: [&str; 3] = ["scale", "beta", "dim"];

fn factor_label(row: &ResultRow, factor: &str) -> String {
    match factor {
        "distribution" => row.distribution.clone(),
        "sampler" => row.sampler.clone(),
        "dim" => row.dim.to_string(),
        "scale" => trim_number(row.scale),
        "beta" => row.beta.map(trim_number).unwrap_or_default(),
        _ => unreachable!("validated factor"),
    }
}

fn factor_numeric(row: &ResultRow, factor: &str) -> Option<f64> {
    match factor {
        "scale" => Some(row.scale),
        "beta" => row.beta,
        "dim" => Some(row.dim as f64),
        _ => unreachable!("validated factor"),
    }
}

/// Short human formatting for factor levels (axis and header labels only).
fn trim_number(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e6 {
        format!("{}", v as i64)
    } else {
        let s = format!("{v:.4}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

fn validate_factor(factor: &str, allowed: &[&str]) -> Result<(), ReportError> {
    if allowed.contains(&factor) {
        Ok(())
    } else {
        Err(ReportError::UnknownFactor(factor.to_string()))
    }
}

fn levels_in_order(table: &ResultsTable, factor: &str) -> Vec<String> {
    let mut levels = Vec::new();
    for row in &table.rows {
        let label = factor_label(row, factor);
        if !levels.contains(&label) {
            levels.push(label);
        }
    }
    levels
}

fn log10_pos(v: f64) -> Option<f64> {
    (v.is_finite() && v > 0.0).then(|| v.log10())
}

/// Builds the figure-of-merit lattice: dots with confidence segments,
/// crosses for the alternative estimator, question marks on degenerate
/// cells, and top-clipped arrows for infinite values.
pub fn grid_figure(
    table: &ResultsTable,
    row_factor: &str,
    col_factor: &str,
    x_factor: &str,
) -> Result<GridFigure, ReportError> {
    validate_factor(row_factor, &LABEL_FACTORS)?;
    validate_factor(col_factor, &LABEL_FACTORS)?;
    validate_factor(x_factor, &NUMERIC_FACTORS)?;
    for (a, b) in [
        (row_factor, col_factor),
        (row_factor, x_factor),
        (col_factor, x_factor),
    ] {
        if a == b {
            return Err(ReportError::DuplicateFactor(a.to_string()));
        }
    }

    let row_levels = levels_in_order(table, row_factor);
    let col_levels = levels_in_order(table, col_factor);
    let mut cells = vec![FigureCell::default(); row_levels.len() * col_levels.len()];

    let mut x_values: Vec<f64> = Vec::new();
    let mut y_values: Vec<f64> = Vec::new();

    for (r, row_level) in row_levels.iter().enumerate() {
        for (c, col_level) in col_levels.iter().enumerate() {
            let members: Vec<&ResultRow> = table
                .rows
                .iter()
                .filter(|row| {
                    factor_label(row, row_factor) == *row_level
                        && factor_label(row, col_factor) == *col_level
                })
                .collect();
            let mut points: Vec<FigurePoint> = Vec::new();
            for row in &members {
                let Some(x) = factor_numeric(row, x_factor).and_then(log10_pos) else {
                    continue;
                };
                let shared = members
                    .iter()
                    .filter(|m| factor_numeric(m, x_factor).and_then(log10_pos) == Some(x))
                    .count();
                let fom_log = row.fom.and_then(log10_pos);
                let ics_fom = row.tau_ics.map(|t| t * row.evals_per_iter);
                let point = FigurePoint {
                    x_log: x,
                    fom_log,
                    fom_infinite: row.fom == Some(f64::INFINITY),
                    lo_log: row.fom_lo.and_then(log10_pos),
                    hi_log: row.fom_hi.and_then(log10_pos),
                    hi_infinite: row.fom_hi == Some(f64::INFINITY),
                    ics_log: ics_fom.and_then(log10_pos),
                    degenerate: row.status == ActStatus::Degenerate,
                    crowded: shared > 1,
                };
                x_values.push(x);
                y_values.extend(point.fom_log);
                y_values.extend(point.lo_log);
                y_values.extend(point.hi_log);
                y_values.extend(point.ics_log);
                points.push(point);
            }
            points.sort_by(|a, b| a.x_log.total_cmp(&b.x_log));
            cells[r * col_levels.len() + c] = FigureCell { points };
        }
    }

    Ok(GridFigure {
        row_levels,
        col_levels,
        cells,
        x_log_range: padded_range(&x_values),
        y_log_range: decade_range(&y_values),
        x_label: format!("{x_factor} (log scale)"),
        y_label: "evaluations per independent draw (log scale)".to_string(),
        reference_y_log: None,
    })
}

fn padded_range(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 1.0);
    }
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = (max - min).max(0.5);
    (min - 0.08 * span, max + 0.08 * span)
}

fn decade_range(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 1.0);
    }
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = min.floor();
    let hi = max.ceil();
    if lo == hi {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

fn fmt(v: f64) -> String {
    format!("{v:.2}")
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn decade_label(k: i64) -> String {
    if (-3..=5).contains(&k) {
        trim_number(10f64.powi(k as i32))
    } else {
        format!("1e{k}")
    }
}

struct PanelGeom {
    x0: f64,
    y0: f64,
    x_range: (f64, f64),
    y_range: (f64, f64),
}

impl PanelGeom {
    fn px(&self, x_log: f64) -> f64 {
        let (lo, hi) = self.x_range;
        self.x0 + (x_log - lo) / (hi - lo) * CELL_W
    }

    fn py(&self, y_log: f64) -> f64 {
        let (lo, hi) = self.y_range;
        let raw = self.y0 + CELL_H - (y_log - lo) / (hi - lo) * CELL_H;
        raw.clamp(self.y0, self.y0 + CELL_H)
    }
}

/// Renders a figure to SVG 1.1 text. Pure function of its input; identical
/// figures produce byte-identical markup.
pub fn svg_string(figure: &GridFigure) -> String {
    let nrows = figure.row_levels.len().max(1);
    let ncols = figure.col_levels.len().max(1);
    let width = MARGIN_L + ncols as f64 * CELL_W + (ncols as f64 - 1.0) * GAP + MARGIN_R;
    let height = MARGIN_T + nrows as f64 * CELL_H + (nrows as f64 - 1.0) * GAP + MARGIN_B;

    let mut out = String::with_capacity(1 << 16);
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">\n",
        fmt(width),
        fmt(height),
        fmt(width),
        fmt(height)
    ));
    out.push_str(&format!(
        "<rect x=\"0\" y=\"0\" width=\"{}\" height=\"{}\" fill=\"#ffffff\"/>\n",
        fmt(width),
        fmt(height)
    ));

    // column headers
    for (c, label) in figure.col_levels.iter().enumerate() {
        let cx = MARGIN_L + c as f64 * (CELL_W + GAP) + CELL_W / 2.0;
        out.push_str(&format!(
            "<text class=\"col-label\" x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">{}</text>\n",
            fmt(cx),
            fmt(MARGIN_T - 12.0),
            escape(label)
        ));
    }
    // row headers, rotated
    for (r, label) in figure.row_levels.iter().enumerate() {
        let cy = MARGIN_T + r as f64 * (CELL_H + GAP) + CELL_H / 2.0;
        let x = 16.0;
        out.push_str(&format!(
            "<text class=\"row-label\" x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\" transform=\"rotate(-90 {} {})\">{}</text>\n",
            fmt(x),
            fmt(cy),
            fmt(x),
            fmt(cy),
            escape(label)
        ));
    }
    // axis captions
    out.push_str(&format!(
        "<text class=\"x-caption\" x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">{}</text>\n",
        fmt(MARGIN_L + (width - MARGIN_L - MARGIN_R) / 2.0),
        fmt(height - 10.0),
        escape(&figure.x_label)
    ));
    out.push_str(&format!(
        "<text class=\"y-caption\" x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\" transform=\"rotate(-90 {} {})\">{}</text>\n",
        fmt(38.0),
        fmt(MARGIN_T + (height - MARGIN_T - MARGIN_B) / 2.0),
        fmt(38.0),
        fmt(MARGIN_T + (height - MARGIN_T - MARGIN_B) / 2.0),
        escape(&figure.y_label)
    ));

    let x_ticks: Vec<i64> =
        (figure.x_log_range.0.ceil() as i64..=figure.x_log_range.1.floor() as i64).collect();
    let y_ticks: Vec<i64> =
        (figure.y_log_range.0.ceil() as i64..=figure.y_log_range.1.floor() as i64).collect();

    for r in 0..nrows {
        for c in 0..ncols {
            let geom = PanelGeom {
                x0: MARGIN_L + c as f64 * (CELL_W + GAP),
                y0: MARGIN_T + r as f64 * (CELL_H + GAP),
                x_range: figure.x_log_range,
                y_range: figure.y_log_range,
            };
            out.push_str(&format!(
                "<rect class=\"panel\" x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#666666\" stroke-width=\"0.8\"/>\n",
                fmt(geom.x0),
                fmt(geom.y0),
                fmt(CELL_W),
                fmt(CELL_H)
            ));

            // decade ticks: labels only on the outer edge panels
            for &k in &x_ticks {
                let px = geom.px(k as f64);
                out.push_str(&format!(
                    "<line class=\"x-tick\" x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#666666\" stroke-width=\"0.6\"/>\n",
                    fmt(px),
                    fmt(geom.y0 + CELL_H),
                    fmt(px),
                    fmt(geom.y0 + CELL_H + 3.0)
                ));
                if r == nrows - 1 {
                    out.push_str(&format!(
                        "<text class=\"x-tick-label\" x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"9\">{}</text>\n",
                        fmt(px),
                        fmt(geom.y0 + CELL_H + 14.0),
                        decade_label(k)
                    ));
                }
            }
            for &k in &y_ticks {
                let py = geom.py(k as f64);
                out.push_str(&format!(
                    "<line class=\"y-tick\" x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#666666\" stroke-width=\"0.6\"/>\n",
                    fmt(geom.x0 - 3.0),
                    fmt(py),
                    fmt(geom.x0),
                    fmt(py)
                ));
                if c == 0 {
                    out.push_str(&format!(
                        "<text class=\"y-tick-label\" x=\"{}\" y=\"{}\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"9\">{}</text>\n",
                        fmt(geom.x0 - 6.0),
                        fmt(py + 3.0),
                        decade_label(k)
                    ));
                }
            }

            if let Some(ref_y) = figure.reference_y_log {
                let py = geom.py(ref_y);
                out.push_str(&format!(
                    "<line class=\"ref-line\" x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#333333\" stroke-width=\"0.8\" stroke-dasharray=\"5 4\"/>\n",
                    fmt(geom.x0),
                    fmt(py),
                    fmt(geom.x0 + CELL_W),
                    fmt(py)
                ));
            }

            let cell = &figure.cells[r * ncols + c];
            for point in &cell.points {
                let px = geom.px(point.x_log);
                let opacity = if point.crowded { "0.55" } else { "1" };

                if point.degenerate {
                    out.push_str(&format!(
                        "<text class=\"degenerate-mark\" x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">?</text>\n",
                        fmt(px),
                        fmt(geom.y0 + CELL_H / 2.0)
                    ));
                    continue;
                }

                // confidence segment, clipped at the panel top when the
                // upper limit is unbounded
                if let Some(lo) = point.lo_log {
                    let y_hi = if point.hi_infinite {
                        geom.y0
                    } else if let Some(hi) = point.hi_log {
                        geom.py(hi)
                    } else {
                        geom.py(lo)
                    };
                    out.push_str(&format!(
                        "<line class=\"fom-ci\" x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#000000\" stroke-width=\"1\" stroke-opacity=\"{}\"/>\n",
                        fmt(px),
                        fmt(geom.py(lo)),
                        fmt(px),
                        fmt(y_hi),
                        opacity
                    ));
                }

                if let Some(y) = point.fom_log {
                    out.push_str(&format!(
                        "<circle class=\"fom-dot\" cx=\"{}\" cy=\"{}\" r=\"2.4\" fill=\"#000000\" fill-opacity=\"{}\"/>\n",
                        fmt(px),
                        fmt(geom.py(y)),
                        opacity
                    ));
                }

                if point.fom_infinite || point.hi_infinite {
                    out.push_str(&format!(
                        "<path class=\"inf-arrow\" d=\"M {} {} l -3.2 7 l 6.4 0 Z\" fill=\"#000000\" fill-opacity=\"{}\"/>\n",
                        fmt(px),
                        fmt(geom.y0),
                        opacity
                    ));
                }

                if let Some(y) = point.ics_log {
                    let cy = geom.py(y);
                    out.push_str(&format!(
                        "<path class=\"ics-cross\" d=\"M {} {} L {} {} M {} {} L {} {}\" stroke=\"#000000\" stroke-width=\"1\" stroke-opacity=\"{}\" fill=\"none\"/>\n",
                        fmt(px - 3.0),
                        fmt(cy - 3.0),
                        fmt(px + 3.0),
                        fmt(cy + 3.0),
                        fmt(px - 3.0),
                        fmt(cy + 3.0),
                        fmt(px + 3.0),
                        fmt(cy - 3.0),
                        opacity
                    ));
                }
            }
        }
    }
    out.push_str("</svg>\n");
    out
}

/// Per-row cost per log-density evaluation, normalized by the median over
/// each distribution: `cpu_seconds / (evals_per_iter * chain_length)`,
/// divided by that distribution's median of the same quantity. Output is
/// aligned with `table.rows`.
pub fn normalized_cost_ratios(table: &ResultsTable) -> Result<Vec<f64>, ReportError> {
    let mut cost = Vec::with_capacity(table.rows.len());
    for row in &table.rows {
        let cpu = row.cpu_seconds.filter(|c| c.is_finite()).ok_or(ReportError::MissingTiming)?;
        let evals = row.evals_per_iter * row.chain_length as f64;
        if !(evals > 0.0) {
            return Err(ReportError::MissingTiming);
        }
        cost.push(cpu / evals);
    }
    let mut ratios = vec![0.0; table.rows.len()];
    let mut dists: Vec<&str> = Vec::new();
    for row in &table.rows {
        if !dists.contains(&row.distribution.as_str()) {
            dists.push(&row.distribution);
        }
    }
    for dist in dists {
        let idx: Vec<usize> = table
            .rows
            .iter()
            .enumerate()
            .filter(|(_, r)| r.distribution == dist)
            .map(|(i, _)| i)
            .collect();
        let mut values: Vec<f64> = idx.iter().map(|&i| cost[i]).collect();
        values.sort_by(f64::total_cmp);
        let m = values.len();
        let median = if m % 2 == 1 {
            values[m / 2]
        } else {
            0.5 * (values[m / 2 - 1] + values[m / 2])
        };
        for &i in &idx {
            ratios[i] = cost[i] / median;
        }
    }
    Ok(ratios)
}

/// Builds the CPU-to-evaluations ratio lattice: distributions as rows,
/// samplers as columns, the normalized ratio against the tuning parameter,
/// and a dashed reference at ratio one.
pub fn ratio_figure(table: &ResultsTable) -> Result<GridFigure, ReportError> {
    let ratios = normalized_cost_ratios(table)?;
    let row_levels = levels_in_order(table, "distribution");
    let col_levels = levels_in_order(table, "sampler");
    let mut cells = vec![FigureCell::default(); row_levels.len() * col_levels.len()];
    let mut x_values = Vec::new();
    let mut y_values = vec![0.0]; // keep the reference line in range

    for (r, row_level) in row_levels.iter().enumerate() {
        for (c, col_level) in col_levels.iter().enumerate() {
            let mut points = Vec::new();
            let members: Vec<(usize, &ResultRow)> = table
                .rows
                .iter()
                .enumerate()
                .filter(|(_, row)| row.distribution == *row_level && row.sampler == *col_level)
                .collect();
            for (i, row) in &members {
                let Some(x) = log10_pos(row.scale) else { continue };
                let Some(y) = log10_pos(ratios[*i]) else { continue };
                let shared = members
                    .iter()
                    .filter(|(_, m)| log10_pos(m.scale) == Some(x))
                    .count();
                x_values.push(x);
                y_values.push(y);
                points.push(FigurePoint {
                    x_log: x,
                    fom_log: Some(y),
                    fom_infinite: false,
                    lo_log: None,
                    hi_log: None,
                    hi_infinite: false,
                    ics_log: None,
                    degenerate: false,
                    crowded: shared > 1,
                });
            }
            points.sort_by(|a, b| a.x_log.total_cmp(&b.x_log));
            cells[r * col_levels.len() + c] = FigureCell { points };
        }
    }

    Ok(GridFigure {
        row_levels,
        col_levels,
        cells,
        x_log_range: padded_range(&x_values),
        y_log_range: decade_range(&y_values),
        x_label: "scale (log scale)".to_string(),
        y_label: "cpu per evaluation / distribution median (log scale)".to_string(),
        reference_y_log: Some(0.0),
    })
}

fn write_svg(text: &str, destination: &Path) -> Result<(), ReportError> {
    std::fs::write(destination, text).map_err(|source| ReportError::Io {
        path: destination.to_path_buf(),
        source,
    })
}

/// Renders the figure-of-merit lattice to an SVG file.
pub fn render_grid_svg(
    table: &ResultsTable,
    row_factor: &str,
    col_factor: &str,
    x_factor: &str,
    destination: &Path,
) -> Result<(), ReportError> {
    let figure = grid_figure(table, row_factor, col_factor, x_factor)?;
    write_svg(&svg_string(&figure), destination)
}

/// Renders the CPU-to-evaluations ratio lattice to an SVG file.
pub fn render_ratio_svg(table: &ResultsTable, destination: &Path) -> Result<(), ReportError> {
    let figure = ratio_figure(table)?;
    write_svg(&svg_string(&figure), destination)
}
