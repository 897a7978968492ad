//! CSV ingestion, JSON report emission and closed-form curve tables.
//!
//! Channel files are rows = time, columns = channels, with a header of
//! channel names; `transpose` accepts rows = channels with the name in the
//! first cell. Divergent values are written as `inf` in CSV and as a tagged
//! object in JSON.

use crate::channels::{ChannelMatrix, MIN_CHANNEL_SAMPLES};
use crate::error::{HociError, Result};
use crate::gaussian::{self, GaussianEnsembleSpec};
use crate::info::Info;
use crate::pipeline::CommonInfoReport;
use serde::{Deserialize, Serialize};
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

fn io_err(path: &Path, e: impl std::fmt::Display) -> HociError {
    HociError::Io {
        path: path.display().to_string(),
        reason: e.to_string(),
    }
}

fn ingest_err(location: impl Into<String>, reason: impl Into<String>) -> HociError {
    HociError::Ingestion {
        location: location.into(),
        reason: reason.into(),
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct IngestOptions {
    /// Rows are channels instead of time.
    pub transpose: bool,
    pub sample_rate_hz: Option<f64>,
}

/// Reads a channel file and standardizes every channel.
pub fn ingest_csv(path: &Path, opts: &IngestOptions) -> Result<ChannelMatrix> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    ingest_reader(file, opts)
}

/// Parsed cell grid with its 1-based line numbers.
struct Grid {
    header: Vec<String>,
    rows: Vec<(usize, Vec<String>)>,
}

fn read_grid<R: Read>(reader: R, has_header: bool) -> Result<Grid> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut header = Vec::new();
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            ingest_err(format!("line {line}"), e.to_string())
        })?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
        let cells: Vec<String> = rec.iter().map(str::to_string).collect();
        if has_header && header.is_empty() && rows.is_empty() {
            header = cells;
        } else {
            rows.push((line, cells));
        }
    }
    Ok(Grid { header, rows })
}

fn parse_cell(cell: &str, line: usize, column: usize, name: &str) -> Result<f64> {
    let at = || format!("line {line}, column {column} ('{name}')");
    let v: f64 = cell
        .parse()
        .map_err(|_| ingest_err(at(), format!("non-numeric cell '{cell}'")))?;
    if !v.is_finite() {
        return Err(ingest_err(at(), format!("non-finite cell '{cell}'")));
    }
    Ok(v)
}

/// [`ingest_csv`] over any reader.
pub fn ingest_reader<R: Read>(reader: R, opts: &IngestOptions) -> Result<ChannelMatrix> {
    let (names, data) = if opts.transpose {
        let grid = read_grid(reader, false)?;
        let width = grid.rows.first().map(|(_, r)| r.len()).unwrap_or(0);
        let mut names = Vec::new();
        let mut data = Vec::new();
        for (line, row) in &grid.rows {
            if row.len() != width {
                return Err(ingest_err(
                    format!("line {line}"),
                    format!("ragged row: {} cells, expected {width}", row.len()),
                ));
            }
            let name = row[0].clone();
            let values = row[1..]
                .iter()
                .enumerate()
                .map(|(c, cell)| parse_cell(cell, *line, c + 2, &name))
                .collect::<Result<Vec<_>>>()?;
            names.push(name);
            data.push(values);
        }
        (names, data)
    } else {
        let grid = read_grid(reader, true)?;
        let names = grid.header;
        let mut data = vec![Vec::with_capacity(grid.rows.len()); names.len()];
        for (line, row) in &grid.rows {
            if row.len() != names.len() {
                return Err(ingest_err(
                    format!("line {line}"),
                    format!("ragged row: {} cells, expected {}", row.len(), names.len()),
                ));
            }
            for (c, cell) in row.iter().enumerate() {
                data[c].push(parse_cell(cell, *line, c + 1, &names[c])?);
            }
        }
        (names, data)
    };

    if names.is_empty() {
        return Err(ingest_err("header", "no channels"));
    }
    let mut seen = std::collections::HashSet::new();
    for (c, name) in names.iter().enumerate() {
        if name.is_empty() {
            return Err(ingest_err(format!("column {}", c + 1), "empty channel name"));
        }
        if !seen.insert(name) {
            return Err(ingest_err(format!("column {}", c + 1), format!("duplicate channel name '{name}'")));
        }
    }
    let len = data[0].len();
    if len < MIN_CHANNEL_SAMPLES {
        return Err(ingest_err(
            "file",
            format!("{len} samples per channel, need at least {MIN_CHANNEL_SAMPLES}"),
        ));
    }
    for (c, (name, col)) in names.iter().zip(&data).enumerate() {
        if col.iter().all(|v| *v == col[0]) {
            return Err(ingest_err(
                format!("column {} ('{name}')", c + 1),
                "constant channel cannot be standardized",
            ));
        }
    }
    let raw = ChannelMatrix::new(names, data, opts.sample_rate_hz).map_err(|e| ingest_err("file", e.to_string()))?;
    raw.standardized().map_err(|e| ingest_err("file", e.to_string()))
}

/// Writes a matrix as rows = time with a header of channel names.
pub fn write_channels_csv(matrix: &ChannelMatrix, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    w.write_record(matrix.names()).map_err(|e| io_err(path, e))?;
    for t in 0..matrix.num_samples() {
        let row: Vec<String> = matrix.channels().iter().map(|c| c.values()[t].to_string()).collect();
        w.write_record(&row).map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

pub fn report_to_json(report: &CommonInfoReport) -> Result<String> {
    let mut s = serde_json::to_string_pretty(report).map_err(|e| HociError::Pipeline(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn parse_report(json: &str) -> Result<CommonInfoReport> {
    serde_json::from_str(json).map_err(|e| ingest_err("report", e.to_string()))
}

/// Writes the report as pretty JSON; identical reports give identical bytes.
pub fn emit_report(report: &CommonInfoReport, path: &Path) -> Result<()> {
    std::fs::write(path, report_to_json(report)?).map_err(|e| io_err(path, e))
}

/// Any serializable value as pretty JSON with a trailing newline.
pub fn emit_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| HociError::Pipeline(e.to_string()))?;
    s.push('\n');
    std::fs::write(path, s).map_err(|e| io_err(path, e))
}

/// Grid for closed-form curves at fixed `σ_X²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianSweep {
    pub sigma_x2: f64,
    pub sigma_n2: Vec<f64>,
    pub rho: Vec<f64>,
}

/// One row of the curve table. `None` in `cond_mi` means no valid
/// three-channel covariance exists at that point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub rho: f64,
    pub sigma_n2: f64,
    pub mi_x_xi: Info,
    pub mi_xi_xj: Info,
    pub cond_mi: Option<Info>,
    pub r2: Info,
    pub r3_lower: Info,
    pub r4_lower: Info,
}

pub const CURVE_COLUMNS: [&str; 8] = [
    "rho",
    "sigma_n2",
    "I(X;Xi)",
    "I(Xi;Xj)",
    "I(Xi;Xj|Xk)",
    "R2",
    "R3_lower",
    "R4_lower",
];

/// Evaluates every closed form over `ρ × σ_N²`, `ρ` varying slowest.
///
/// Rows use a two-channel model, which admits any `ρ ∈ [−1, 1]`.
pub fn gaussian_curves(sweep: &GaussianSweep) -> Result<Vec<CurveRow>> {
    if sweep.rho.is_empty() || sweep.sigma_n2.is_empty() {
        return Err(HociError::domain("empty sweep grid"));
    }
    let mut rows = Vec::with_capacity(sweep.rho.len() * sweep.sigma_n2.len());
    for &rho in &sweep.rho {
        for &sn in &sweep.sigma_n2 {
            let spec = GaussianEnsembleSpec::new(sweep.sigma_x2, sn, rho, 2)?;
            let cond_mi = match gaussian::cond_mi_xi_xj_given_xk(&spec) {
                Ok(v) => Some(v),
                Err(HociError::ParameterDomain(_)) => None,
                Err(e) => return Err(e),
            };
            let r2 = gaussian::mi_xi_xj(&spec);
            rows.push(CurveRow {
                rho,
                sigma_n2: sn,
                mi_x_xi: gaussian::mi_x_xi(&spec),
                mi_xi_xj: r2,
                cond_mi,
                r2,
                r3_lower: gaussian::r3_lower(&spec),
                r4_lower: gaussian::r4_lower(&spec),
            });
        }
    }
    Ok(rows)
}

fn cell(v: Info) -> String {
    match v {
        Info::Infinite => "inf".into(),
        Info::Finite { bits } => format!("{bits:e}"),
    }
}

/// Writes the curve table. The first line is a `#` comment echoing the grid.
pub fn write_gaussian_curves<W: Write>(sweep: &GaussianSweep, out: W) -> Result<usize> {
    let rows = gaussian_curves(sweep)?;
    let mut out = out;
    let echo = serde_json::to_string(sweep).map_err(|e| HociError::Pipeline(e.to_string()))?;
    let wrap = |e: std::io::Error| HociError::Io {
        path: "<curves>".into(),
        reason: e.to_string(),
    };
    writeln!(out, "# {echo}").map_err(wrap)?;
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| HociError::Io {
        path: "<curves>".into(),
        reason: e.to_string(),
    };
    w.write_record(CURVE_COLUMNS).map_err(csv_err)?;
    for r in &rows {
        w.write_record([
            format!("{:e}", r.rho),
            format!("{:e}", r.sigma_n2),
            cell(r.mi_x_xi),
            cell(r.mi_xi_xj),
            r.cond_mi.map(cell).unwrap_or_else(|| "nan".into()),
            cell(r.r2),
            cell(r.r3_lower),
            cell(r.r4_lower),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(wrap)?;
    Ok(rows.len())
}

pub fn emit_gaussian_curves(sweep: &GaussianSweep, path: &Path) -> Result<usize> {
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    write_gaussian_curves(sweep, BufWriter::new(file))
}

/// Parses a grid given either as a comma list (`0,0.3,0.6`) or as
/// `lin:start:stop:count` / `log:start:stop:count`.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let bad = |why: &str| HociError::Configuration(format!("invalid grid '{spec}': {why}"));
    let num = |s: &str| -> Result<f64> {
        let v: f64 = s.trim().parse().map_err(|_| bad(&format!("'{s}' is not a number")))?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(bad("non-finite value"))
        }
    };
    let parts: Vec<&str> = spec.split(':').collect();
    match parts.as_slice() {
        [kind @ ("lin" | "log"), a, b, n] => {
            let count: usize = n.trim().parse().map_err(|_| bad("count must be an integer"))?;
            if count == 0 {
                return Err(bad("count must be positive"));
            }
            let (a, b) = (num(a)?, num(b)?);
            if *kind == "log" {
                if a <= 0.0 || b <= 0.0 {
                    return Err(bad("log grid bounds must be positive"));
                }
                Ok(crate::numeric::logspace(a, b, count))
            } else {
                Ok(crate::numeric::linspace(a, b, count))
            }
        }
        [list] => {
            let v = list.split(',').map(num).collect::<Result<Vec<_>>>()?;
            if v.is_empty() {
                return Err(bad("empty list"));
            }
            Ok(v)
        }
        _ => Err(bad("expected a list or lin:/log:start:stop:count")),
    }
}
