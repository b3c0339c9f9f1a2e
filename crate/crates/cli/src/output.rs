//! Artifact writers. Every float in a CSV is printed with 17 significant
//! digits; JSON floats use the shortest representation that round-trips.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use nehari_core::{ContinuationTrace, Field, ScanReport, SolveResult};
use serde::{Deserialize, Serialize};

pub const TOOL: &str = "nehari";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Provenance recorded at the top of every artifact.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Meta {
    pub tool: String,
    pub version: String,
    pub mode: String,
    pub config_sha256: String,
    pub seed: u64,
}

impl Meta {
    pub fn new(mode: &str, config_sha256: &str, seed: u64) -> Meta {
        Meta {
            tool: TOOL.into(),
            version: VERSION.into(),
            mode: mode.into(),
            config_sha256: config_sha256.into(),
            seed,
        }
    }

    pub fn comment_line(&self) -> String {
        format!(
            "# {} {} mode={} config_sha256={} seed={}",
            self.tool, self.version, self.mode, self.config_sha256, self.seed
        )
    }
}

pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_float).unwrap_or_default()
}

fn create(path: &Path, meta: Option<&Meta>) -> io::Result<BufWriter<File>> {
    let mut w = BufWriter::new(File::create(path)?);
    if let Some(meta) = meta {
        writeln!(w, "{}", meta.comment_line())?;
    }
    Ok(w)
}

/// Columns `t, u1, ..., uN`, one row per node.
pub fn emit_profile_csv(field: &Field, meta: Option<&Meta>, path: &Path) -> io::Result<()> {
    let mut w = create(path, meta)?;
    let n = field.n_components();
    let header: Vec<String> = std::iter::once("t".to_string())
        .chain((1..=n).map(|j| format!("u{j}")))
        .collect();
    writeln!(w, "{}", header.join(","))?;
    let grid = field.grid();
    for i in 0..grid.len() {
        let mut row = fmt_float(grid.node(i));
        for j in 0..n {
            row.push(',');
            row.push_str(&fmt_float(field.values()[[j, i]]));
        }
        writeln!(w, "{row}")?;
    }
    w.flush()
}

/// Columns `R, d_R, M_R, el_residual_norm, profile_diff, converged`.
pub fn emit_trace_csv(trace: &ContinuationTrace, meta: Option<&Meta>, path: &Path) -> io::Result<()> {
    let mut w = create(path, meta)?;
    writeln!(w, "R,d_R,M_R,el_residual_norm,profile_diff,converged")?;
    for e in &trace.entries {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            fmt_float(e.radius),
            fmt_float(e.level),
            fmt_float(e.peak),
            fmt_float(e.el_residual_norm),
            fmt_opt(e.profile_diff),
            e.converged
        )?;
    }
    w.flush()
}

/// Columns `s0, exit_forward, exit_backward, slope_max, classification`,
/// then a `verdict` row. A missing exit time is left empty.
pub fn emit_liouville_csv(report: &ScanReport, meta: Option<&Meta>, path: &Path) -> io::Result<()> {
    let mut w = create(path, meta)?;
    writeln!(w, "s0,exit_forward,exit_backward,slope_max,classification")?;
    for r in &report.rows {
        writeln!(
            w,
            "{},{},{},{},{}",
            fmt_float(r.s0),
            fmt_opt(r.exit_forward),
            fmt_opt(r.exit_backward),
            fmt_float(r.slope_max),
            r.classification.as_str()
        )?;
    }
    writeln!(w, "verdict,,,,{}", report.verdict.as_str())?;
    w.flush()
}

/// On-disk form of a [`SolveResult`]. Component indices are one-based to
/// match the `u1..uN` profile columns.
#[allow(non_snake_case)]
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub d_R: f64,
    pub M_R: f64,
    pub peak_component: usize,
    pub peak_location: f64,
    pub A: f64,
    pub B: f64,
    pub nehari_residual: f64,
    pub el_residual_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    pub dropped_components: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<Meta>,
}

impl ResultRecord {
    pub fn new(result: &SolveResult, meta: Option<&Meta>) -> ResultRecord {
        ResultRecord {
            d_R: result.level,
            M_R: result.peak,
            peak_component: result.peak_component + 1,
            peak_location: result.peak_location,
            A: result.breakdown.quadratic,
            B: result.breakdown.nonlinear,
            nehari_residual: result.nehari_residual,
            el_residual_norm: result.el_residual_norm,
            iterations: result.iterations,
            converged: result.converged,
            dropped_components: result.dropped_components.iter().map(|j| j + 1).collect(),
            meta: meta.cloned(),
        }
    }
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> io::Result<T> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(io::Error::from)
}

pub fn emit_result_json(result: &SolveResult, meta: Option<&Meta>, path: &Path) -> io::Result<()> {
    write_json(&ResultRecord::new(result, meta), path)
}

pub fn read_result_json(path: &Path) -> io::Result<ResultRecord> {
    read_json(path)
}
