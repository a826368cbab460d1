//! CSV and summary files written by `run`, and the readers `compare` uses.
//!
//! Column contracts:
//!
//! * `timeseries.csv`: `t,I_u,I_v,max_abs_u,max_abs_v`, then
//!   `error_l2,error_max` when the run has an oracle, then `iterations` for
//!   the implicit scheme.
//! * `snapshot_t<time>.csv`: `x,re_u,im_u,abs_u,re_v,im_v,abs_v`, one row per
//!   interior node.
//!
//! Numbers are written in scientific notation with a fixed number of
//! significant digits so that repeated runs produce identical bytes.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use cnlse_core::{FieldState, Grid, RunRecord};

use crate::error::{CliError, CliResult};

pub const DEFAULT_PRECISION: usize = 12;
pub const DEFAULT_SNAPSHOTS_PER_RUN: u64 = 50;
pub const TIMESERIES_FILE: &str = "timeseries.csv";
pub const SUMMARY_FILE: &str = "run_summary.txt";
/// Wall-clock time lives apart from the summary so that the summary stays
/// reproducible byte for byte.
pub const TIMING_FILE: &str = "run_timing.txt";
pub const SNAPSHOT_COLUMNS: [&str; 7] = ["x", "re_u", "im_u", "abs_u", "re_v", "im_v", "abs_v"];

/// Where and how a run's files are written.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputPlan {
    pub directory: PathBuf,
    /// Observations between snapshots; `None` spreads
    /// [`DEFAULT_SNAPSHOTS_PER_RUN`] snapshots over the run.
    pub snapshot_every: Option<u64>,
    /// Significant digits.
    pub precision: usize,
}

impl OutputPlan {
    pub fn new(directory: impl Into<PathBuf>) -> Self {
        OutputPlan {
            directory: directory.into(),
            snapshot_every: None,
            precision: DEFAULT_PRECISION,
        }
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.snapshot_every == Some(0) {
            return Err(CliError::Config("snapshot cadence must be at least 1".into()));
        }
        if !(6..=17).contains(&self.precision) {
            return Err(CliError::Config(format!(
                "precision must lie in 6..=17 digits (got {})",
                self.precision
            )));
        }
        Ok(())
    }

    /// Snapshot cadence for a run with `n_time` steps observed every
    /// `observe_every` steps.
    pub fn cadence(&self, n_time: u64, observe_every: u64) -> u64 {
        self.snapshot_every.unwrap_or_else(|| {
            let intervals = n_time.div_ceil(observe_every.max(1));
            intervals.div_ceil(DEFAULT_SNAPSHOTS_PER_RUN).max(1)
        })
    }
}

pub fn fmt_num(x: f64, precision: usize) -> String {
    format!("{:.*e}", precision - 1, x)
}

/// File name of the snapshot taken at time `t`.
pub fn snapshot_name(t: f64) -> String {
    format!("snapshot_t{t:.6}.csv")
}

fn parse_snapshot_name(name: &str) -> Option<f64> {
    name.strip_prefix("snapshot_t")?.strip_suffix(".csv")?.parse().ok()
}

fn write(path: &Path, contents: &str) -> CliResult<()> {
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

pub fn timeseries_csv(record: &RunRecord, precision: usize) -> String {
    let with_errors = !record.errors.is_empty();
    let with_iterations = record.scheme == cnlse_core::Scheme::Implicit;
    let mut out = String::from("t,I_u,I_v,max_abs_u,max_abs_v");
    if with_errors {
        out.push_str(",error_l2,error_max");
    }
    if with_iterations {
        out.push_str(",iterations");
    }
    out.push('\n');
    let f = |x: f64| fmt_num(x, precision);
    for i in 0..record.times.len() {
        let inv = record.invariants[i];
        let (mu, mv) = record.max_amplitudes[i];
        let _ = write!(
            out,
            "{},{},{},{},{}",
            f(record.times[i]),
            f(inv.i_u),
            f(inv.i_v),
            f(mu),
            f(mv)
        );
        if with_errors {
            let e = record.errors[i];
            let _ = write!(out, ",{},{}", f(e.l2), f(e.max));
        }
        if with_iterations {
            let _ = write!(out, ",{}", record.iterations[i]);
        }
        out.push('\n');
    }
    out
}

pub fn snapshot_csv(grid: &Grid, state: &FieldState, precision: usize) -> String {
    let mut out = SNAPSHOT_COLUMNS.join(",");
    out.push('\n');
    let f = |x: f64| fmt_num(x, precision);
    for (i, (u, v)) in state.u.iter().zip(&state.v).enumerate() {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            f(grid.x(i)),
            f(u.re),
            f(u.im),
            f(u.norm()),
            f(v.re),
            f(v.im),
            f(v.norm())
        );
    }
    out
}

pub fn write_timeseries(dir: &Path, record: &RunRecord, precision: usize) -> CliResult<()> {
    write(&dir.join(TIMESERIES_FILE), &timeseries_csv(record, precision))
}

pub fn write_snapshot(dir: &Path, grid: &Grid, state: &FieldState, precision: usize) -> CliResult<PathBuf> {
    let path = dir.join(snapshot_name(state.time));
    write(&path, &snapshot_csv(grid, state, precision))?;
    Ok(path)
}

/// Ordered `key = value` pairs.
pub fn write_key_values(path: &Path, pairs: &[(String, String)]) -> CliResult<()> {
    let mut out = String::new();
    for (k, v) in pairs {
        let _ = writeln!(out, "{k}={v}");
    }
    write(path, &out)
}

/// Moduli of both modes read back from a snapshot file.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotModuli {
    pub time: f64,
    pub x: Vec<f64>,
    pub abs_u: Vec<f64>,
    pub abs_v: Vec<f64>,
}

/// Snapshot files in `dir`, sorted by time.
pub fn list_snapshots(dir: &Path) -> CliResult<Vec<(f64, PathBuf)>> {
    let entries = fs::read_dir(dir).map_err(|e| CliError::io(dir, e))?;
    let mut out = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| CliError::io(dir, e))?;
        let name = entry.file_name();
        if let Some(t) = name.to_str().and_then(parse_snapshot_name) {
            out.push((t, entry.path()));
        }
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(out)
}

pub fn read_snapshot(path: &Path, time: f64) -> CliResult<SnapshotModuli> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let bad = |message: String| CliError::Format {
        path: path.to_path_buf(),
        message,
    };
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| bad("empty file".into()))?;
    if header.split(',').ne(SNAPSHOT_COLUMNS) {
        return Err(bad(format!("unexpected header '{header}'")));
    }
    let mut snap = SnapshotModuli {
        time,
        x: Vec::new(),
        abs_u: Vec::new(),
        abs_v: Vec::new(),
    };
    for (i, line) in lines.enumerate() {
        let row: Vec<f64> = line
            .split(',')
            .map(str::parse)
            .collect::<Result<_, _>>()
            .map_err(|e| bad(format!("row {}: {e}", i + 2)))?;
        if row.len() != SNAPSHOT_COLUMNS.len() {
            return Err(bad(format!("row {} has {} columns", i + 2, row.len())));
        }
        snap.x.push(row[0]);
        snap.abs_u.push(row[3]);
        snap.abs_v.push(row[6]);
    }
    Ok(snap)
}
