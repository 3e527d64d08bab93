//! Executes one configured experiment and writes its artifacts. Shared by
//! the command-line tool and the integration tests.

use std::path::Path;
use std::time::Instant;

use serde_json::json;

use crate::config::{Experiment, RunConfig};
use crate::diagnostics::{EstimateReport, HysteresisTracker, ESTIMATE_SLACK};
use crate::error::{Error, Result};
use crate::experiments::{
    convergence_study, epsilon_suite, limit_suite, ode_selection, ode_trajectory, peaking_probe,
    pulsating_wave_study, traveling_wave_study, ProbeSetup, PulseSetup, WaveSetup,
};
use crate::grid::{ScalarField, Trajectory};
use crate::kinetics::{verify_assumption_cold, verify_assumption_hot, KineticsFamily};
use crate::limit::{apply_initial_jump, run_limit_observed};
use crate::output::{emit_outputs, series_csv, table_csv, write_atomic, Manifest};
use crate::profile::Profile;
use crate::shs::{run_heat, run_shs};

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const CONFIG: i32 = 1;
    pub const NUMERICAL: i32 = 2;
    pub const DIAGNOSTIC: i32 = 3;
}

/// Result of a completed run.
#[derive(Debug)]
pub struct RunOutcome {
    pub manifest: Manifest,
    pub verdict: Option<bool>,
}

impl RunOutcome {
    /// Every report passed and no verdict came out negative.
    pub fn passed(&self) -> bool {
        self.manifest.passed && self.verdict != Some(false)
    }
}

/// Re-grades the estimate reports against the configured slack.
fn with_slack(reports: Vec<EstimateReport>, tol: f64) -> Vec<EstimateReport> {
    reports
        .into_iter()
        .map(|r| {
            if r.tol == ESTIMATE_SLACK {
                EstimateReport::new(r.name, r.lhs, r.rhs, tol)
            } else {
                r
            }
        })
        .collect()
}

fn initial_fields(cfg: &RunConfig) -> Result<(ScalarField, ScalarField)> {
    let d = cfg.domain()?;
    Ok((cfg.initial.u0.sample(d)?, cfg.initial.v0.sample(d)?))
}

struct Artifacts {
    reports: Vec<EstimateReport>,
    results: serde_json::Value,
    verdict: Option<bool>,
    trajectories: Vec<(String, Trajectory)>,
    tables: Vec<(String, String)>,
}

impl Artifacts {
    fn new(reports: Vec<EstimateReport>, results: serde_json::Value, verdict: Option<bool>) -> Self {
        Self { reports, results, verdict, trajectories: Vec::new(), tables: Vec::new() }
    }
}

fn to_json<T: serde::Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).unwrap_or(serde_json::Value::Null)
}

fn simulate_shs(cfg: &RunConfig) -> Result<Artifacts> {
    let (u0, v0) = initial_fields(cfg)?;
    let time = cfg.time_grid()?;
    let kin = cfg.family()?;
    let traj = run_shs(&u0, &v0, &kin, time)?;
    let heat = run_heat(&u0, time)?;
    let reports = epsilon_suite(&traj, &u0, v0.max(), &heat, "shs")?;
    let results = json!({
        "clamp_events": traj.clamp_events,
        "final_front": traj.series.last().and_then(|p| p.front),
        "steps": time.steps(),
        "dt": time.step_size(),
    });
    let mut a = Artifacts::new(reports, results, None);
    a.trajectories.push((String::new(), traj));
    Ok(a)
}

fn simulate_limit(cfg: &RunConfig) -> Result<Artifacts> {
    let (u0, v0) = initial_fields(cfg)?;
    let time = cfg.time_grid()?;
    let mut tracker = HysteresisTracker::new();
    let traj = run_limit_observed(apply_initial_jump(&u0, &v0)?, time, |s| tracker.observe(&s.u, &s.chi))?;
    let start = ScalarField::new(traj.domain, traj.initial().u.clone())?;
    let heat = run_heat(&start, time)?;
    let reports = limit_suite(&traj, &u0, v0.max(), &heat, "limit")?;
    let hysteresis = tracker.report();
    let verdict = Some(hysteresis.passed);
    let results = json!({
        "hysteresis": hysteresis,
        "final_front": traj.series.last().and_then(|p| p.front),
        "steps": time.steps(),
        "dt": time.step_size(),
    });
    let mut a = Artifacts::new(reports, results, verdict);
    a.trajectories.push((String::new(), traj));
    Ok(a)
}

fn converge(cfg: &RunConfig) -> Result<Artifacts> {
    let setup = crate::experiments::ConvergenceSetup {
        domain: cfg.domain()?,
        time: cfg.time_grid()?,
        u0: cfg.initial.u0.clone(),
        v0: cfg.initial.v0.clone(),
        kinetics: cfg.family()?,
        eps_list: cfg.eps_list(),
        p: cfg.tolerances.p,
    };
    let out = convergence_study(&setup)?;
    let sweep = out.sweep;
    let mut a = Artifacts::new(sweep.diagnostics.clone(), to_json(&sweep), sweep.verdict);
    a.trajectories.push(("limit".into(), out.limit));
    for (traj, eps) in out.runs.into_iter().zip(&sweep.eps_values) {
        a.trajectories.push((format!("eps_{eps}"), traj));
    }
    Ok(a)
}

fn ode_select(cfg: &RunConfig) -> Result<Artifacts> {
    let ode = cfg.ode.as_ref().ok_or_else(|| Error::Config("ode: section required".into()))?;
    let eps = cfg.eps_list();
    let sweep = ode_selection(ode.kappa, &eps, cfg.time.horizon, ode.dt)?;
    let mut a = Artifacts::new(Vec::new(), to_json(&sweep), sweep.verdict);
    for &e in &eps {
        let traj = ode_trajectory(ode.kappa - 1.0, &KineticsFamily::matkowsky_sivashinsky(e)?, cfg.time.horizon, ode.dt)?;
        let rows: Vec<Vec<f64>> = traj.iter().map(|&(t, u)| vec![t, u]).collect();
        a.tables.push((format!("ode_eps_{e}.csv"), table_csv("t,u", &rows)));
    }
    Ok(a)
}

fn wave(cfg: &RunConfig) -> Result<Artifacts> {
    let w = cfg.wave.as_ref().ok_or_else(|| Error::Config("wave: section required".into()))?;
    let Profile::Constant { value } = cfg.initial.v0 else {
        return Err(Error::Config("initial.v0: the wave experiment needs a constant v0".into()));
    };
    let mut setup = WaveSetup::new(cfg.family()?, w.u_infinity, value, cfg.domain()?, cfg.time_grid()?);
    setup.ignition_fraction = w.ignition_fraction;
    setup.plateau_tol = w.plateau_tol;
    if let Some(win) = w.window {
        setup.window = win;
    }
    let (report, traj) = traveling_wave_study(&setup)?;
    let mut a = Artifacts::new(report.diagnostics.clone(), to_json(&report), report.passed);
    a.trajectories.push((String::new(), traj));
    Ok(a)
}

fn pulsate(cfg: &RunConfig) -> Result<Artifacts> {
    let w = cfg.wave.as_ref().ok_or_else(|| Error::Config("wave: section required".into()))?;
    let mut setup = PulseSetup::new(
        cfg.initial.v0.clone(),
        w.u_infinity,
        cfg.family()?,
        cfg.domain()?,
        cfg.time_grid()?,
    );
    setup.ignition_fraction = w.ignition_fraction;
    if let Some(win) = w.window {
        setup.window = win;
    }
    if let Some(s) = w.speed_stride {
        setup.speed_stride = s;
    }
    if let Some(f) = w.decel_fraction {
        setup.decel_fraction = f;
    }
    let (report, traj) = pulsating_wave_study(&setup)?;
    let rows: Vec<Vec<f64>> = report.speed_series.iter().map(|&(t, s)| vec![t, s]).collect();
    let mut a = Artifacts::new(report.diagnostics.clone(), to_json(&report), None);
    a.tables.push(("speed.csv".into(), table_csv("t,speed", &rows)));
    a.trajectories.push((String::new(), traj));
    Ok(a)
}

fn peak_probe(cfg: &RunConfig) -> Result<Artifacts> {
    let p = cfg.probe.as_ref().ok_or_else(|| Error::Config("probe: section required".into()))?;
    let setup = ProbeSetup {
        length: cfg.domain.length,
        nodes: p.nodes.clone(),
        horizon: cfg.time.horizon,
        u0: cfg.initial.u0.clone(),
        v0: cfg.initial.v0.clone(),
        kinetics: cfg.family()?,
        unignited_threshold: p.unignited_threshold,
    };
    let report = peaking_probe(&setup)?;
    let reports = report.runs.iter().flat_map(|r| r.diagnostics.clone()).collect();
    let mut a = Artifacts::new(reports, to_json(&report), None);
    for run in &report.runs {
        let rows: Vec<Vec<f64>> = run.series.iter().map(|&(t, m)| vec![t, m]).collect();
        a.tables.push((format!("probe_nodes_{}.csv", run.nodes), table_csv("t,unignited_max", &rows)));
    }
    Ok(a)
}

fn validate_assumptions(cfg: &RunConfig) -> Result<Artifacts> {
    let s = cfg
        .assumptions
        .as_ref()
        .ok_or_else(|| Error::Config("assumptions: section required".into()))?;
    let family = cfg.family()?;
    let eps = cfg.eps_list();
    let cold = verify_assumption_cold(&family, &eps, s.cold, s.tol)?;
    let hot = verify_assumption_hot(&family, &eps, s.hot, s.c_k, s.tol)?;
    let verdict = Some(cold.passed && hot.passed);
    Ok(Artifacts::new(Vec::new(), json!({ "cold": cold, "hot": hot }), verdict))
}

fn dispatch(cfg: &RunConfig) -> Result<Artifacts> {
    match cfg.experiment {
        Experiment::SimulateShs => simulate_shs(cfg),
        Experiment::SimulateLimit => simulate_limit(cfg),
        Experiment::Converge => converge(cfg),
        Experiment::OdeSelect => ode_select(cfg),
        Experiment::Wave => wave(cfg),
        Experiment::Pulsate => pulsate(cfg),
        Experiment::PeakProbe => peak_probe(cfg),
        Experiment::ValidateAssumptions => validate_assumptions(cfg),
    }
}

/// Runs the configured experiment and writes every artifact into `out`.
///
/// A numerical failure still writes the series recorded up to the last
/// finite step before the error is returned.
pub fn execute(cfg: &RunConfig, out: &Path) -> Result<RunOutcome> {
    let started = Instant::now();
    let artifacts = match dispatch(cfg) {
        Ok(a) => a,
        Err(Error::NumericalFailure { node, t, last_good }) => {
            write_atomic(out, "series.csv", series_csv(&last_good).as_bytes())?;
            let mut manifest = Manifest::new(
                cfg.clone(),
                Vec::new(),
                json!({ "failure": { "node": node, "t": t } }),
            );
            manifest.passed = false;
            manifest.wall_clock_seconds = started.elapsed().as_secs_f64();
            let text = serde_json::to_string_pretty(&manifest).map_err(std::io::Error::other)?;
            write_atomic(out, "manifest.json", text.as_bytes())?;
            return Err(Error::NumericalFailure { node, t, last_good });
        }
        Err(e) => return Err(e),
    };
    let reports = with_slack(artifacts.reports, cfg.tolerances.tol);
    let mut manifest = Manifest::new(cfg.clone(), reports, artifacts.results);
    manifest.verdict = artifacts.verdict;
    for (name, body) in &artifacts.tables {
        write_atomic(out, name, body.as_bytes())?;
    }
    manifest.wall_clock_seconds = started.elapsed().as_secs_f64();
    let runs: Vec<(String, &Trajectory)> =
        artifacts.trajectories.iter().map(|(tag, t)| (tag.clone(), t)).collect();
    emit_outputs(out, &runs, &manifest)?;
    Ok(RunOutcome { manifest, verdict: artifacts.verdict })
}

/// Maps a run result to the process exit code. Diagnostic failures only
/// change the code under `strict`.
pub fn exit_code(result: &Result<RunOutcome>, strict: bool) -> i32 {
    match result {
        Ok(o) if strict && !o.passed() => exit::DIAGNOSTIC,
        Ok(_) => exit::OK,
        Err(Error::NumericalFailure { .. } | Error::NonFinite { .. }) => exit::NUMERICAL,
        Err(_) => exit::CONFIG,
    }
}
