//! The results CSV format.
//!
//! Floats are written with 17 significant digits (`{:.16e}`), which
//! round-trips every finite f64 exactly; infinities are the literals `inf`
//! and `-inf`; empty fields mean not-applicable. The header is the schema
//! version check: an exactly matching header is version 1, a missing column
//! is a parse error, and any other well-formed header is a version
//! mismatch.

use std::path::Path;

use super::{ReportError, ResultRow, ResultsTable, SCHEMA_COLUMNS};
use crate::act::ActStatus;

fn fmt_f64(v: f64) -> String {
    debug_assert!(!v.is_nan(), "NaN must be encoded as an empty field");
    if v == f64::INFINITY {
        "inf".to_string()
    } else if v == f64::NEG_INFINITY {
        "-inf".to_string()
    } else {
        format!("{v:.16e}")
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

fn push_row(out: &mut String, row: &ResultRow) {
    let fields = [
        row.distribution.clone(),
        row.dim.to_string(),
        row.sampler.clone(),
        fmt_f64(row.scale),
        fmt_opt(row.beta),
        row.replicate.to_string(),
        row.seed.to_string(),
        row.chain_length.to_string(),
        fmt_f64(row.burn_in_fraction),
        fmt_f64(row.evals_per_iter),
        fmt_f64(row.grad_evals_per_iter),
        fmt_opt(row.cpu_seconds),
        fmt_opt(row.wall_seconds),
        fmt_opt(row.tau_ar),
        fmt_opt(row.tau_ar_lo),
        fmt_opt(row.tau_ar_hi),
        row.order.map(|o| o.to_string()).unwrap_or_default(),
        fmt_opt(row.tau_ics),
        row.status.to_string(),
        fmt_opt(row.fom),
        fmt_opt(row.fom_lo),
        fmt_opt(row.fom_hi),
    ];
    out.push_str(&fields.join(","));
    out.push('\n');
}

/// Serializes a table to the schema, header included.
pub fn results_to_string(table: &ResultsTable) -> String {
    let mut out = String::with_capacity(64 + table.rows.len() * 256);
    out.push_str(&SCHEMA_COLUMNS.join(","));
    out.push('\n');
    for row in &table.rows {
        push_row(&mut out, row);
    }
    out
}

/// Writes the table to `destination`.
pub fn write_results(table: &ResultsTable, destination: &Path) -> Result<(), ReportError> {
    std::fs::write(destination, results_to_string(table)).map_err(|source| ReportError::Io {
        path: destination.to_path_buf(),
        source,
    })
}

struct FieldParser<'a> {
    line: usize,
    fields: Vec<&'a str>,
}

impl<'a> FieldParser<'a> {
    fn get(&self, column: &str) -> &'a str {
        let idx = SCHEMA_COLUMNS
            .iter()
            .position(|c| *c == column)
            .expect("column is part of the schema");
        self.fields[idx]
    }

    fn err(&self, column: &str, message: impl Into<String>) -> ReportError {
        ReportError::Parse {
            line: self.line,
            column: column.to_string(),
            message: message.into(),
        }
    }

    fn f64_required(&self, column: &str) -> Result<f64, ReportError> {
        self.f64_opt(column)?
            .ok_or_else(|| self.err(column, "field must not be empty"))
    }

    fn f64_opt(&self, column: &str) -> Result<Option<f64>, ReportError> {
        let raw = self.get(column);
        match raw {
            "" => Ok(None),
            "inf" => Ok(Some(f64::INFINITY)),
            "-inf" => Ok(Some(f64::NEG_INFINITY)),
            other => other
                .parse::<f64>()
                .map(Some)
                .map_err(|_| self.err(column, format!("not a number: {other:?}"))),
        }
    }

    fn int<T: std::str::FromStr>(&self, column: &str) -> Result<T, ReportError> {
        self.get(column)
            .parse::<T>()
            .map_err(|_| self.err(column, format!("not an integer: {:?}", self.get(column))))
    }

    fn int_opt<T: std::str::FromStr>(&self, column: &str) -> Result<Option<T>, ReportError> {
        match self.get(column) {
            "" => Ok(None),
            _ => self.int(column).map(Some),
        }
    }
}

fn check_header(line: &str) -> Result<(), ReportError> {
    if line == SCHEMA_COLUMNS.join(",") {
        return Ok(());
    }
    let seen: Vec<&str> = line.split(',').collect();
    for required in SCHEMA_COLUMNS {
        if !seen.contains(&required) {
            return Err(ReportError::Parse {
                line: 1,
                column: required.to_string(),
                message: "missing header column".to_string(),
            });
        }
    }
    // same columns, different arrangement (or extras): a different schema
    Err(ReportError::Version)
}

/// Parses the CSV text form of a table; the inverse of
/// [`results_to_string`].
pub fn parse_results(text: &str) -> Result<ResultsTable, ReportError> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(ReportError::Parse {
        line: 1,
        column: "header".to_string(),
        message: "empty file".to_string(),
    })?;
    check_header(header.trim_end_matches('\r'))?;

    let mut rows = Vec::new();
    for (idx, raw) in lines {
        let line_no = idx + 1;
        let raw = raw.trim_end_matches('\r');
        if raw.is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw.split(',').collect();
        if fields.len() != SCHEMA_COLUMNS.len() {
            return Err(ReportError::Parse {
                line: line_no,
                column: "row".to_string(),
                message: format!("expected {} fields, found {}", SCHEMA_COLUMNS.len(), fields.len()),
            });
        }
        let p = FieldParser {
            line: line_no,
            fields,
        };
        let status: ActStatus = p
            .get("status")
            .parse()
            .map_err(|_| p.err("status", format!("unknown status: {:?}", p.get("status"))))?;
        rows.push(ResultRow {
            distribution: p.get("distribution").to_string(),
            dim: p.int("dim")?,
            sampler: p.get("sampler").to_string(),
            scale: p.f64_required("scale")?,
            beta: p.f64_opt("beta")?,
            replicate: p.int("replicate")?,
            seed: p.int("seed")?,
            chain_length: p.int("chain_length")?,
            burn_in_fraction: p.f64_required("burn_in_fraction")?,
            evals_per_iter: p.f64_required("evals_per_iter")?,
            grad_evals_per_iter: p.f64_required("grad_evals_per_iter")?,
            cpu_seconds: p.f64_opt("cpu_seconds")?,
            wall_seconds: p.f64_opt("wall_seconds")?,
            tau_ar: p.f64_opt("tau_ar")?,
            tau_ar_lo: p.f64_opt("tau_ar_lo")?,
            tau_ar_hi: p.f64_opt("tau_ar_hi")?,
            order: p.int_opt("order")?,
            tau_ics: p.f64_opt("tau_ics")?,
            status,
            fom: p.f64_opt("fom")?,
            fom_lo: p.f64_opt("fom_lo")?,
            fom_hi: p.f64_opt("fom_hi")?,
        });
    }
    Ok(ResultsTable { rows })
}

/// Reads a results file.
pub fn read_results(source: &Path) -> Result<ResultsTable, ReportError> {
    let text = std::fs::read_to_string(source).map_err(|source_err| ReportError::Io {
        path: source.to_path_buf(),
        source: source_err,
    })?;
    parse_results(&text)
}
