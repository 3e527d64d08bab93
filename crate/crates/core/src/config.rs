//! JSON run configuration: strict schema, documented defaults, and
//! semantic validation at parse time.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Domain1D, TimeGrid};
use crate::kinetics::{KineticsFamily, Variant, DEFAULT_EXP_CLAMP};
use crate::profile::Profile;

/// Snapshot budget used when `record_every` is not given.
pub const DEFAULT_SNAPSHOTS: usize = 200;
pub const DEFAULT_HORIZON: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    SimulateShs,
    SimulateLimit,
    Converge,
    OdeSelect,
    Wave,
    Pulsate,
    PeakProbe,
    ValidateAssumptions,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::SimulateShs => "simulate-shs",
            Experiment::SimulateLimit => "simulate-limit",
            Experiment::Converge => "converge",
            Experiment::OdeSelect => "ode-select",
            Experiment::Wave => "wave",
            Experiment::Pulsate => "pulsate",
            Experiment::PeakProbe => "peak-probe",
            Experiment::ValidateAssumptions => "validate-assumptions",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    pub length: f64,
    pub nodes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    /// Defaults to `h²/2`.
    pub dt: Option<f64>,
    #[serde(default = "default_horizon")]
    pub horizon: f64,
    /// Defaults to about [`DEFAULT_SNAPSHOTS`] snapshots per run.
    pub record_every: Option<usize>,
}

fn default_horizon() -> f64 {
    DEFAULT_HORIZON
}

impl Default for TimeConfig {
    fn default() -> Self {
        Self { dt: None, horizon: DEFAULT_HORIZON, record_every: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VariantName {
    MatkowskySivashinsky,
    Threshold,
    Tabulated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KineticsConfig {
    pub variant: VariantName,
    pub epsilon: Option<f64>,
    pub eps_list: Option<Vec<f64>>,
    pub kappa: Option<f64>,
    pub theta_bar: Option<f64>,
    /// `(z, g)` knots for the tabulated variant.
    pub table: Option<Vec<(f64, f64)>>,
    pub exp_clamp: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    pub u0: Profile,
    pub v0: Profile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Exponent of the space-time distance.
    #[serde(default = "default_p")]
    pub p: f64,
    /// Slack for the proof estimates.
    #[serde(default = "default_tol")]
    pub tol: f64,
}

fn default_p() -> f64 {
    1.0
}

fn default_tol() -> f64 {
    0.05
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { p: default_p(), tol: default_tol() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub directory: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OdeConfig {
    pub kappa: f64,
    pub dt: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveConfig {
    pub u_infinity: f64,
    #[serde(default = "default_ignition")]
    pub ignition_fraction: f64,
    pub window: Option<(f64, f64)>,
    #[serde(default = "default_plateau_tol")]
    pub plateau_tol: f64,
    /// Pulsating runs only.
    pub speed_stride: Option<usize>,
    pub decel_fraction: Option<f64>,
}

fn default_ignition() -> f64 {
    0.1
}

fn default_plateau_tol() -> f64 {
    0.02
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeConfig {
    pub nodes: Vec<usize>,
    #[serde(default = "default_unignited")]
    pub unignited_threshold: f64,
}

fn default_unignited() -> f64 {
    1e-3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssumptionConfig {
    pub cold: (f64, f64),
    pub hot: (f64, f64),
    #[serde(default = "default_c_k")]
    pub c_k: f64,
    #[serde(default = "default_assumption_tol")]
    pub tol: f64,
}

fn default_c_k() -> f64 {
    1.0
}

fn default_assumption_tol() -> f64 {
    1e-2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub domain: DomainConfig,
    #[serde(default)]
    pub time: TimeConfig,
    pub kinetics: KineticsConfig,
    pub initial: InitialConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
    pub output: Option<OutputConfig>,
    pub ode: Option<OdeConfig>,
    pub wave: Option<WaveConfig>,
    pub probe: Option<ProbeConfig>,
    pub assumptions: Option<AssumptionConfig>,
}

fn bad(key: &str, msg: impl std::fmt::Display) -> Error {
    Error::Config(format!("{key}: {msg}"))
}

fn positive(key: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(bad(key, format!("must be positive and finite, got {v}")))
    }
}

/// Parses and validates a JSON document. Syntax errors carry line and
/// column; semantic errors name the offending key.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let cfg: RunConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &std::path::Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text)
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.domain.nodes < 3 {
            return Err(bad("domain.nodes", format!("must be at least 3, got {}", self.domain.nodes)));
        }
        positive("domain.length", self.domain.length)?;
        if let Some(dt) = self.time.dt {
            positive("time.dt", dt)?;
        }
        positive("time.horizon", self.time.horizon)?;
        if self.time.record_every == Some(0) {
            return Err(bad("time.record_every", "must be at least 1"));
        }

        let k = &self.kinetics;
        if let Some(e) = k.epsilon {
            positive("kinetics.epsilon", e)?;
        }
        if let Some(list) = &k.eps_list {
            if list.is_empty() {
                return Err(bad("kinetics.eps_list", "must not be empty"));
            }
            for &e in list {
                positive("kinetics.eps_list", e)?;
            }
        }
        if let Some(kappa) = k.kappa {
            if !(kappa > 0.0 && kappa <= 1.0) {
                return Err(bad("kinetics.kappa", format!("must lie in (0, 1], got {kappa}")));
            }
        }
        if let Some(tb) = k.theta_bar {
            if !(tb > 0.0 && tb < 1.0) {
                return Err(bad("kinetics.theta_bar", format!("must lie in (0, 1), got {tb}")));
            }
        }
        if let Some(c) = k.exp_clamp {
            positive("kinetics.exp_clamp", c)?;
        }
        match k.variant {
            VariantName::Threshold if k.kappa.is_none() || k.theta_bar.is_none() => {
                return Err(bad("kinetics", "threshold variant needs kappa and theta_bar"))
            }
            VariantName::Tabulated if k.table.is_none() => {
                return Err(bad("kinetics.table", "tabulated variant needs a table"))
            }
            _ => {}
        }
        // Build the family once so that table errors surface here.
        self.family_at(self.reference_epsilon()?)
            .map_err(|e| bad("kinetics", e))?;

        self.initial.u0.validate().map_err(|e| bad("initial.u0", e))?;
        self.initial.v0.validate().map_err(|e| bad("initial.v0", e))?;
        if self.initial.v0.lower_bound() < 0.0 {
            return Err(bad("initial.v0", "v0 must be nonnegative"));
        }
        if !(self.tolerances.p >= 1.0 && self.tolerances.p.is_finite()) {
            return Err(bad("tolerances.p", "must be at least 1"));
        }
        if self.tolerances.tol.is_nan() || self.tolerances.tol < 0.0 {
            return Err(bad("tolerances.tol", "must be nonnegative"));
        }
        self.validate_sections()
    }

    fn validate_sections(&self) -> Result<()> {
        let needs_list = matches!(
            self.experiment,
            Experiment::Converge | Experiment::OdeSelect | Experiment::ValidateAssumptions
        );
        if needs_list && self.kinetics.eps_list.is_none() {
            return Err(bad("kinetics.eps_list", format!("required by {}", self.experiment.name())));
        }
        if !needs_list && self.kinetics.epsilon.is_none() {
            return Err(bad("kinetics.epsilon", format!("required by {}", self.experiment.name())));
        }
        match self.experiment {
            Experiment::OdeSelect => {
                let ode = self.ode.as_ref().ok_or_else(|| bad("ode", "section required"))?;
                if !(ode.kappa > 0.0 && ode.kappa < 1.0) {
                    return Err(bad("ode.kappa", format!("must lie in (0, 1), got {}", ode.kappa)));
                }
                positive("ode.dt", ode.dt)?;
            }
            Experiment::Wave | Experiment::Pulsate => {
                let w = self.wave.as_ref().ok_or_else(|| bad("wave", "section required"))?;
                if !(w.ignition_fraction > 0.0 && w.ignition_fraction < 0.5) {
                    return Err(bad("wave.ignition_fraction", "must lie in (0, 0.5)"));
                }
                if let Some((a, b)) = w.window {
                    if !(0.0 <= a && a < b && b <= 1.0) {
                        return Err(bad("wave.window", "must satisfy 0 <= start < end <= 1"));
                    }
                }
                if w.speed_stride == Some(0) {
                    return Err(bad("wave.speed_stride", "must be at least 1"));
                }
                if self.experiment == Experiment::Wave
                    && !matches!(self.initial.v0, Profile::Constant { .. })
                {
                    return Err(bad("initial.v0", "the wave experiment needs a constant v0"));
                }
            }
            Experiment::PeakProbe => {
                let p = self.probe.as_ref().ok_or_else(|| bad("probe", "section required"))?;
                if p.nodes.is_empty() || p.nodes.iter().any(|&n| n < 3) {
                    return Err(bad("probe.nodes", "needs at least one grid, each with >= 3 nodes"));
                }
            }
            Experiment::ValidateAssumptions if self.assumptions.is_none() => {
                return Err(bad("assumptions", "section required"));
            }
            _ => {}
        }
        Ok(())
    }

    fn reference_epsilon(&self) -> Result<f64> {
        self.kinetics
            .epsilon
            .or_else(|| self.kinetics.eps_list.as_ref().and_then(|l| l.first().copied()))
            .ok_or_else(|| bad("kinetics", "needs epsilon or eps_list"))
    }

    pub fn domain(&self) -> Result<Domain1D> {
        Domain1D::new(self.domain.length, self.domain.nodes)
    }

    /// Time grid with defaults filled: `dt = h²/2` and roughly
    /// [`DEFAULT_SNAPSHOTS`] snapshots.
    pub fn time_grid(&self) -> Result<TimeGrid> {
        let h = self.domain()?.spacing();
        let dt = self.time.dt.unwrap_or(0.5 * h * h).min(self.time.horizon);
        let steps = (self.time.horizon / dt).ceil() as usize;
        let every = self
            .time
            .record_every
            .unwrap_or_else(|| steps.div_ceil(DEFAULT_SNAPSHOTS).max(1));
        TimeGrid::new(dt, self.time.horizon, every)
    }

    pub fn family_at(&self, epsilon: f64) -> Result<KineticsFamily> {
        let k = &self.kinetics;
        let variant = match k.variant {
            VariantName::MatkowskySivashinsky => Variant::MatkowskySivashinsky,
            VariantName::Threshold => Variant::Threshold {
                kappa: k.kappa.unwrap_or(1.0),
                theta_bar: k.theta_bar.unwrap_or(0.5),
            },
            VariantName::Tabulated => Variant::Tabulated { knots: k.table.clone().unwrap_or_default() },
        };
        Ok(KineticsFamily::new(variant, epsilon)?.with_exp_clamp(k.exp_clamp.unwrap_or(DEFAULT_EXP_CLAMP)))
    }

    /// Family at the configured `epsilon` (or the first list entry).
    pub fn family(&self) -> Result<KineticsFamily> {
        self.family_at(self.reference_epsilon()?)
    }

    pub fn eps_list(&self) -> Vec<f64> {
        self.kinetics
            .eps_list
            .clone()
            .or_else(|| self.kinetics.epsilon.map(|e| vec![e]))
            .unwrap_or_default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "experiment": "simulate-shs",
        "domain": {"length": 4.0, "nodes": 401},
        "kinetics": {"variant": "matkowsky_sivashinsky", "epsilon": 0.02},
        "initial": {
            "u0": {"step": {"left_value": 0.5, "right_value": -0.25, "split_fraction": 0.25}},
            "v0": {"constant": {"value": 1.0}}
        }
    }"#;

    #[test]
    fn minimal_document_gets_defaults() {
        let cfg = parse_config(MINIMAL).unwrap();
        assert_eq!(cfg.tolerances, Tolerances { p: 1.0, tol: 0.05 });
        let tg = cfg.time_grid().unwrap();
        assert_eq!(tg.dt(), 0.5 * 0.01 * 0.01);
        assert_eq!(tg.horizon(), DEFAULT_HORIZON);
        assert_eq!(tg.record_every(), 100);
        assert_eq!(cfg.family().unwrap().epsilon(), 0.02);
    }

    #[test]
    fn negative_v0_rejected() {
        let text = MINIMAL.replace(r#""value": 1.0"#, r#""value": -0.5"#);
        let err = parse_config(&text).unwrap_err().to_string();
        assert!(err.contains("v0 must be nonnegative"), "{err}");
        assert!(err.contains("initial.v0"), "{err}");
    }

    #[test]
    fn threshold_ranges() {
        let th = |k: f64, tb: f64| {
            MINIMAL.replace(
                r#""variant": "matkowsky_sivashinsky""#,
                &format!(r#""variant": "threshold", "kappa": {k}, "theta_bar": {tb}"#),
            )
        };
        assert!(parse_config(&th(0.5, 0.5)).is_ok());
        assert!(parse_config(&th(1.0, 0.5)).is_ok());
        let e = parse_config(&th(0.5, 1.0)).unwrap_err().to_string();
        assert!(e.contains("theta_bar"), "{e}");
        assert!(parse_config(&th(0.5, 0.0)).is_err());
        let e = parse_config(&th(0.0, 0.5)).unwrap_err().to_string();
        assert!(e.contains("kappa"), "{e}");
        assert!(parse_config(&th(1.5, 0.5)).is_err());
    }

    #[test]
    fn unknown_and_duplicate_keys_rejected() {
        let unknown = MINIMAL.replace(r#""nodes": 401"#, r#""nodes": 401, "spacing": 0.01"#);
        let e = parse_config(&unknown).unwrap_err().to_string();
        assert!(e.contains("spacing"), "{e}");
        let dup = MINIMAL.replace(r#""nodes": 401"#, r#""nodes": 401, "nodes": 5"#);
        let e = parse_config(&dup).unwrap_err().to_string();
        assert!(e.contains("duplicate") && e.contains("nodes"), "{e}");
        let bad_profile = MINIMAL.replace(r#"{"value": 1.0}"#, r#"{"value": 1.0, "slope": 2}"#);
        assert!(parse_config(&bad_profile).is_err());
    }

    #[test]
    fn syntax_error_reports_position() {
        let e = parse_config("{\n  \"experiment\": ,\n}").unwrap_err().to_string();
        assert!(e.contains("line 2"), "{e}");
        assert!(e.contains("column"), "{e}");
    }

    #[test]
    fn numeric_gates() {
        let few = MINIMAL.replace(r#""nodes": 401"#, r#""nodes": 2"#);
        assert!(parse_config(&few).unwrap_err().to_string().contains("domain.nodes"));
        let neg_dt = MINIMAL.replace(
            r#""kinetics""#,
            r#""time": {"dt": -1.0, "horizon": 1.0}, "kinetics""#,
        );
        assert!(parse_config(&neg_dt).unwrap_err().to_string().contains("time.dt"));
    }

    #[test]
    fn sweep_needs_eps_list() {
        let text = MINIMAL.replace("simulate-shs", "converge");
        assert!(parse_config(&text).unwrap_err().to_string().contains("eps_list"));
    }
}
