//! Discrete versions of the a-priori estimates behind the ε → 0 limit,
//! plus conservation, comparison and hysteresis checks on trajectories.
//!
//! Time integrals use the right-endpoint rule over recorded snapshots
//! (see [`Trajectory::time_integral`]); space integrals use the trapezoid
//! rule; gradients are forward differences on cell edges with weight `h`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{Domain1D, Level, ScalarField, Trajectory};

/// Relative slack granted to the analytic inequalities.
pub const ESTIMATE_SLACK: f64 = 0.05;
/// Relative drift allowed for quantities conserved by construction.
pub const CONSERVATION_TOL: f64 = 1e-8;
pub const SUPERCALORIC_TOL: f64 = 1e-10;
pub const LOWER_BOUND_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateReport {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub tol: f64,
    pub passed: bool,
}

impl EstimateReport {
    pub fn new(name: impl Into<String>, lhs: f64, rhs: f64, tol: f64) -> Self {
        Self {
            name: name.into(),
            lhs,
            rhs,
            slack: rhs - lhs,
            tol,
            passed: lhs <= rhs * (1.0 + tol),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConservationKind {
    /// `∫(u + v)`
    EpsilonLevel,
    /// `∫(u − v⁰χ)`
    LimitLevel,
}

fn check_initial(traj: &Trajectory, u0: &ScalarField) -> Result<()> {
    if u0.domain() != traj.domain {
        return Err(Error::Comparison("initial data and trajectory grids differ".into()));
    }
    if traj.snapshots.is_empty() {
        return Err(Error::Domain("trajectory has no snapshots".into()));
    }
    Ok(())
}

/// `∫₀ᵀ∫u² ≤ T ∫(C + |u⁰|)²`. The trajectory is truncated at `horizon`.
pub fn check_l2_bound(
    traj: &Trajectory,
    u0: &ScalarField,
    c_bound: f64,
    horizon: f64,
) -> Result<EstimateReport> {
    check_initial(traj, u0)?;
    let traj = traj.truncated(horizon);
    let d = traj.domain;
    let lhs = traj.time_integral(|s| {
        let sq: Vec<f64> = s.u.iter().map(|u| u * u).collect();
        d.integrate_slice(&sq)
    });
    let rhs_density: Vec<f64> = u0.values().iter().map(|u| (c_bound + u.abs()).powi(2)).collect();
    let rhs = horizon * d.integrate_slice(&rhs_density);
    Ok(EstimateReport::new("l2_bound", lhs, rhs, ESTIMATE_SLACK))
}

/// The auxiliary convex function: `z²/2` below `M`, linear continuation above.
pub fn g_m(z: f64, m: f64) -> f64 {
    if z < m {
        0.5 * z * z
    } else {
        m * z - 0.5 * m * m
    }
}

/// `Σ_edges h·((m_{i+1} − m_i)/h)²` for `m = min(u, M)`.
pub fn truncated_dirichlet_energy(domain: Domain1D, u: &[f64], m: f64) -> f64 {
    let h = domain.spacing();
    u.windows(2)
        .map(|w| {
            let g = (w[1].min(m) - w[0].min(m)) / h;
            h * g * g
        })
        .sum()
}

/// `∫G_M(u(T)) − ∫G_M(u⁰) + ∫₀ᵀ∫|∇min(u,M)|² ≤ C·M·L`.
pub fn check_gradient_bound(
    traj: &Trajectory,
    u0: &ScalarField,
    c_bound: f64,
    m: f64,
) -> Result<EstimateReport> {
    check_initial(traj, u0)?;
    if m.is_nan() || m < 1.0 {
        return Err(Error::Domain(format!("M must be at least 1, got {m}")));
    }
    let d = traj.domain;
    let g_int = |u: &[f64]| {
        let g: Vec<f64> = u.iter().map(|&z| g_m(z, m)).collect();
        d.integrate_slice(&g)
    };
    let energy = traj.time_integral(|s| truncated_dirichlet_energy(d, &s.u, m));
    let lhs = g_int(&traj.last().u) - g_int(u0.values()) + energy;
    let rhs = c_bound * m * d.length();
    Ok(EstimateReport::new("gradient_bound", lhs, rhs, ESTIMATE_SLACK))
}

/// Maximal drift of the conserved quantity over every recorded step.
pub fn check_conservation(traj: &Trajectory, kind: ConservationKind) -> Result<EstimateReport> {
    let level = match kind {
        ConservationKind::EpsilonLevel => Level::Epsilon,
        ConservationKind::LimitLevel => Level::Limit,
    };
    let compatible = matches!(
        (kind, traj.level),
        (ConservationKind::EpsilonLevel, Level::Epsilon | Level::Heat)
            | (ConservationKind::LimitLevel, Level::Limit)
    );
    if !compatible {
        return Err(Error::Domain(format!(
            "{kind:?} conservation does not apply to a {:?} trajectory",
            traj.level
        )));
    }
    let first = traj
        .series
        .first()
        .ok_or_else(|| Error::Domain("trajectory has no series".into()))?
        .conserved(level);
    let drift = traj
        .series
        .iter()
        .map(|p| (p.conserved(level) - first).abs())
        .fold(0.0, f64::max);
    let name = match kind {
        ConservationKind::EpsilonLevel => "conservation_u_plus_v",
        ConservationKind::LimitLevel => "conservation_enthalpy",
    };
    Ok(EstimateReport::new(name, drift, CONSERVATION_TOL * (1.0 + first.abs()), 0.0))
}

/// `max (u_heat − u)` over all nodes and snapshots; must not exceed 1e-10.
pub fn check_supercaloric(traj: &Trajectory, heat_twin: &Trajectory) -> Result<EstimateReport> {
    if traj.domain != heat_twin.domain || traj.snapshots.len() != heat_twin.snapshots.len() {
        return Err(Error::Comparison("heat twin is not on the same grid and schedule".into()));
    }
    let mut gap = f64::NEG_INFINITY;
    for (s, h) in traj.snapshots.iter().zip(&heat_twin.snapshots) {
        if (s.t - h.t).abs() > 1e-12 * s.t.abs().max(1.0) {
            return Err(Error::Comparison(format!("snapshot times differ: {} vs {}", s.t, h.t)));
        }
        for (u, uh) in s.u.iter().zip(&h.u) {
            gap = gap.max(uh - u);
        }
    }
    Ok(EstimateReport::new("supercaloric", gap, SUPERCALORIC_TOL, 0.0))
}

/// `min u ≥ u_min − 1e-12` over every recorded step.
pub fn check_lower_bound(traj: &Trajectory, u_min: f64) -> EstimateReport {
    let observed = traj.series.iter().map(|p| p.umin).fold(f64::INFINITY, f64::min);
    EstimateReport::new("lower_bound", u_min - observed, LOWER_BOUND_TOL, 0.0)
}

/// Violation counts of the hysteresis rules on a limit trajectory.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct HysteresisReport {
    /// `chi` decreased somewhere between consecutive records.
    pub monotonicity: usize,
    /// `chi` outside `{0, 1, chi(0)}` after `t = 0`.
    pub binary: usize,
    /// `u > 0` with `chi < 1`.
    pub graph: usize,
    /// `chi = 1` disagrees with "initially burned or history max of `u` > 0".
    pub history: usize,
    pub passed: bool,
}

/// Streaming form of [`check_hysteresis`]: feed every state of a limit run
/// in order, starting with the initial one.
#[derive(Debug, Clone, Default)]
pub struct HysteresisTracker {
    initial_chi: Vec<f64>,
    prev_chi: Vec<f64>,
    history: Vec<f64>,
    report: HysteresisReport,
}

impl HysteresisTracker {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn observe(&mut self, u: &[f64], chi: &[f64]) {
        let rep = &mut self.report;
        if self.initial_chi.is_empty() {
            self.initial_chi = chi.to_vec();
            self.prev_chi = chi.to_vec();
            self.history = u.to_vec();
        } else {
            for i in 0..u.len() {
                self.history[i] = self.history[i].max(u[i]);
                if chi[i] < self.prev_chi[i] {
                    rep.monotonicity += 1;
                }
                if chi[i] != 0.0 && chi[i] != 1.0 && chi[i] != self.initial_chi[i] {
                    rep.binary += 1;
                }
            }
            self.prev_chi.copy_from_slice(chi);
        }
        for i in 0..u.len() {
            if u[i] > 0.0 && chi[i] < 1.0 {
                rep.graph += 1;
            }
            let expected = self.initial_chi[i] == 1.0 || self.history[i] > 0.0;
            if (chi[i] == 1.0) != expected {
                rep.history += 1;
            }
        }
    }

    pub fn report(&self) -> HysteresisReport {
        let mut rep = self.report.clone();
        rep.passed = rep.monotonicity + rep.binary + rep.graph + rep.history == 0;
        rep
    }
}

/// Needs every step recorded so that the history maximum is exact.
pub fn check_hysteresis(traj: &Trajectory) -> Result<HysteresisReport> {
    if traj.level != Level::Limit {
        return Err(Error::Domain("hysteresis check applies to limit trajectories".into()));
    }
    if traj.time.record_every() != 1 {
        return Err(Error::Domain(
            "hysteresis check needs record_every = 1 to see the full history".into(),
        ));
    }
    let mut tracker = HysteresisTracker::new();
    for s in &traj.snapshots {
        tracker.observe(&s.u, &s.aux);
    }
    Ok(tracker.report())
}
