//! Output artifacts: CSV series and snapshots, and a JSON manifest. Every
//! file is written to a temporary sibling and renamed into place.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::RunConfig;
use crate::diagnostics::EstimateReport;
use crate::error::Result;
use crate::grid::Trajectory;

pub const SERIES_HEADER: &str = "t,front,mass_u,mass_v_or_chi,umin,umax";
pub const SNAPSHOT_HEADER: &str = "t,x,u,aux";

/// Shortest representation that parses back to the same double; NaN (and a
/// missing front) is written as `nan`.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else {
        format!("{v}")
    }
}

pub fn series_csv(traj: &Trajectory) -> String {
    let mut out = String::with_capacity(64 * (traj.series.len() + 1));
    out.push_str(SERIES_HEADER);
    out.push('\n');
    for p in &traj.series {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            fmt_f64(p.t),
            fmt_f64(p.front.unwrap_or(f64::NAN)),
            fmt_f64(p.mass_u),
            fmt_f64(p.mass_aux),
            fmt_f64(p.umin),
            fmt_f64(p.umax)
        );
    }
    out
}

pub fn snapshots_csv(traj: &Trajectory) -> String {
    let xs = traj.domain.coordinates();
    let mut out = String::new();
    out.push_str(SNAPSHOT_HEADER);
    out.push('\n');
    for s in &traj.snapshots {
        let t = fmt_f64(s.t);
        for ((x, u), a) in xs.iter().zip(&s.u).zip(&s.aux) {
            let _ = writeln!(out, "{t},{},{},{}", fmt_f64(*x), fmt_f64(*u), fmt_f64(*a));
        }
    }
    out
}

/// Two-column (or wider) numeric table.
pub fn table_csv(header: &str, rows: &[Vec<f64>]) -> String {
    let mut out = String::from(header);
    out.push('\n');
    for row in rows {
        let line: Vec<String> = row.iter().map(|&v| fmt_f64(v)).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

pub fn write_atomic(dir: &Path, name: &str, contents: &[u8]) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    let target = dir.join(name);
    tmp.persist(&target).map_err(|e| e.error)?;
    Ok(target)
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub config: RunConfig,
    pub reports: Vec<EstimateReport>,
    /// Experiment-specific results and verdicts.
    pub results: serde_json::Value,
    pub verdict: Option<bool>,
    /// True when every report passed.
    pub passed: bool,
    pub wall_clock_seconds: f64,
}

impl Manifest {
    pub fn new(config: RunConfig, reports: Vec<EstimateReport>, results: serde_json::Value) -> Self {
        let passed = reports.iter().all(|r| r.passed);
        Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            config,
            reports,
            results,
            verdict: None,
            passed,
            wall_clock_seconds: 0.0,
        }
    }
}

/// Writes `series[_tag].csv` and `snapshots[_tag].csv` for each trajectory
/// (an empty tag gives the plain names), then `manifest.json`.
pub fn emit_outputs(dir: &Path, runs: &[(String, &Trajectory)], manifest: &Manifest) -> Result<()> {
    for (tag, traj) in runs {
        let suffix = if tag.is_empty() { String::new() } else { format!("_{tag}") };
        write_atomic(dir, &format!("series{suffix}.csv"), series_csv(traj).as_bytes())?;
        write_atomic(dir, &format!("snapshots{suffix}.csv"), snapshots_csv(traj).as_bytes())?;
    }
    let json = serde_json::to_string_pretty(manifest).map_err(std::io::Error::other)?;
    write_atomic(dir, "manifest.json", json.as_bytes())?;
    Ok(())
}
