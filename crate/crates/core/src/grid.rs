//! Uniform 1D Neumann grids, nodal fields, trapezoid quadrature and the
//! recorded trajectories shared by both solvers.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform grid on `(0, length)` with homogeneous Neumann data at both ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Domain1D {
    length: f64,
    nodes: usize,
}

impl Domain1D {
    pub fn new(length: f64, nodes: usize) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::Domain(format!("domain length must be positive, got {length}")));
        }
        if nodes < 3 {
            return Err(Error::Domain(format!("a grid needs at least 3 nodes, got {nodes}")));
        }
        Ok(Self { length, nodes })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    /// Grid spacing `h = L / (nodes - 1)`.
    pub fn spacing(&self) -> f64 {
        self.length / (self.nodes - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.spacing()
    }

    pub fn coordinates(&self) -> Vec<f64> {
        (0..self.nodes).map(|i| self.x(i)).collect()
    }

    /// Trapezoid weight of node `i`.
    pub fn weight(&self, i: usize) -> f64 {
        let h = self.spacing();
        if i == 0 || i + 1 == self.nodes {
            0.5 * h
        } else {
            h
        }
    }

    /// Composite trapezoid rule over raw nodal data.
    pub fn integrate_slice(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.nodes);
        let n = values.len();
        let interior: f64 = values[1..n - 1].iter().sum();
        self.spacing() * (interior + 0.5 * (values[0] + values[n - 1]))
    }

    /// Samples `f(x)` at every node.
    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Result<ScalarField> {
        ScalarField::new(*self, self.coordinates().into_iter().map(f).collect())
    }
}

/// Nodal values of one scalar quantity on a [`Domain1D`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    domain: Domain1D,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(domain: Domain1D, values: Vec<f64>) -> Result<Self> {
        if values.len() != domain.nodes() {
            return Err(Error::Domain(format!(
                "field has {} values but the grid has {} nodes",
                values.len(),
                domain.nodes()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { node: i, t: 0.0 });
        }
        Ok(Self { domain, values })
    }

    pub fn constant(domain: Domain1D, value: f64) -> Result<Self> {
        Self::new(domain, vec![value; domain.nodes()])
    }

    pub fn domain(&self) -> Domain1D {
        self.domain
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Node-wise map; the result is validated like any other field.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.domain, self.values.iter().map(|&v| f(v)).collect())
    }
}

/// Discrete stand-in for the integral over the domain: composite trapezoid,
/// exact for affine nodal data.
pub fn integrate(f: &ScalarField) -> f64 {
    f.domain.integrate_slice(&f.values)
}

/// Time discretization of a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    dt: f64,
    horizon: f64,
    record_every: usize,
}

impl TimeGrid {
    pub fn new(dt: f64, horizon: f64, record_every: usize) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::Domain(format!("dt must be positive, got {dt}")));
        }
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::Domain(format!("horizon must be positive, got {horizon}")));
        }
        if dt > horizon {
            return Err(Error::Domain(format!("dt = {dt} exceeds the horizon {horizon}")));
        }
        if record_every == 0 {
            return Err(Error::Domain("record_every must be at least 1".into()));
        }
        Ok(Self { dt, horizon, record_every })
    }

    /// Requested step size.
    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn record_every(&self) -> usize {
        self.record_every
    }

    pub fn steps(&self) -> usize {
        // Guard against `ceil` rounding an exact quotient up by one ulp.
        let q = self.horizon / self.dt;
        let r = q.round();
        if (q - r).abs() <= 1e-9 * r.max(1.0) {
            r as usize
        } else {
            q.ceil() as usize
        }
    }

    /// Step size actually taken: the horizon split into `steps()` equal steps.
    pub fn step_size(&self) -> f64 {
        self.horizon / self.steps() as f64
    }

    pub fn time_of(&self, step: usize) -> f64 {
        step as f64 * self.step_size()
    }

    /// Whether step `k` produces a snapshot (the first and last always do).
    pub fn records(&self, step: usize) -> bool {
        step.is_multiple_of(self.record_every) || step == self.steps()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Level {
    /// ε-level combustion run; `aux` holds the reactant `v`.
    Epsilon,
    /// Limit hysteresis run; `aux` holds the burned fraction `chi`.
    Limit,
    /// Pure heat equation; `aux` is zero.
    Heat,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub u: Vec<f64>,
    pub aux: Vec<f64>,
}

/// Per-step scalar record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesPoint {
    pub t: f64,
    pub front: Option<f64>,
    pub mass_u: f64,
    /// `∫v` for ε-runs, `∫v⁰χ` for limit runs, zero for heat runs.
    pub mass_aux: f64,
    pub umin: f64,
    pub umax: f64,
}

impl SeriesPoint {
    /// The quantity conserved by the run: `∫(u+v)` or `∫(u − v⁰χ)`.
    pub fn conserved(&self, level: Level) -> f64 {
        match level {
            Level::Epsilon | Level::Heat => self.mass_u + self.mass_aux,
            Level::Limit => self.mass_u - self.mass_aux,
        }
    }
}

/// Recorded output of one run: snapshots every `record_every` steps plus a
/// scalar series at every step. Immutable once a run returns.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub domain: Domain1D,
    pub level: Level,
    pub time: TimeGrid,
    pub v0: Vec<f64>,
    pub snapshots: Vec<Snapshot>,
    pub series: Vec<SeriesPoint>,
    /// Number of kinetics evaluations whose exponent hit the clamp.
    pub clamp_events: u64,
}

impl Trajectory {
    pub fn horizon(&self) -> f64 {
        self.snapshots.last().map_or(0.0, |s| s.t)
    }

    pub fn initial(&self) -> &Snapshot {
        &self.snapshots[0]
    }

    pub fn last(&self) -> &Snapshot {
        self.snapshots.last().expect("trajectory has at least one snapshot")
    }

    /// Copy restricted to records with `t <= t_end`.
    pub fn truncated(&self, t_end: f64) -> Trajectory {
        let keep = |t: f64| t <= t_end * (1.0 + 1e-12);
        Trajectory {
            snapshots: self.snapshots.iter().filter(|s| keep(s.t)).cloned().collect(),
            series: self.series.iter().filter(|s| keep(s.t)).copied().collect(),
            ..self.clone()
        }
    }

    /// Right-endpoint rule in time over snapshots: `Σ_k (t_k − t_{k−1}) f(snapshot_k)`.
    /// The step-0 record is the initial condition and carries no weight.
    pub fn time_integral(&self, mut f: impl FnMut(&Snapshot) -> f64) -> f64 {
        self.snapshots
            .windows(2)
            .map(|pair| (pair[1].t - pair[0].t) * f(&pair[1]))
            .sum()
    }
}

/// `L^p((0,T)×Ω)` distance between the `u` components of two trajectories
/// recorded on the same grid at the same snapshot times.
pub fn lp_space_time_distance(a: &Trajectory, b: &Trajectory, p: f64) -> Result<f64> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::Domain(format!("p must be a finite real >= 1, got {p}")));
    }
    if a.domain != b.domain {
        return Err(Error::Comparison(format!(
            "grids differ: {:?} vs {:?}",
            a.domain, b.domain
        )));
    }
    if a.snapshots.len() != b.snapshots.len() {
        return Err(Error::Comparison(format!(
            "snapshot counts differ: {} vs {}",
            a.snapshots.len(),
            b.snapshots.len()
        )));
    }
    let scale = a.horizon().abs().max(1.0);
    for (sa, sb) in a.snapshots.iter().zip(&b.snapshots) {
        if (sa.t - sb.t).abs() > 1e-12 * scale {
            return Err(Error::Comparison(format!(
                "snapshot times differ: {} vs {}",
                sa.t, sb.t
            )));
        }
    }
    let domain = a.domain;
    let mut total = 0.0;
    for k in 1..a.snapshots.len() {
        let dt = a.snapshots[k].t - a.snapshots[k - 1].t;
        let (ua, ub) = (&a.snapshots[k].u, &b.snapshots[k].u);
        let space: f64 = (0..domain.nodes())
            .map(|i| domain.weight(i) * (ua[i] - ub[i]).abs().powf(p))
            .sum();
        total += dt * space;
    }
    Ok(total.powf(1.0 / p))
}
