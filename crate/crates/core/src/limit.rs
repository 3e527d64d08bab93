//! Limit problem `∂t u − v⁰ ∂t χ = Δu` with the irreversible hysteresis
//! `χ`, in enthalpy form.
//!
//! The conserved enthalpy is `e = u − v⁰χ`. A node with `χ < 1` ignites the
//! first time its temperature is strictly positive: `χ` jumps to 1 and `u`
//! jumps by `v⁰(1 − χ_old)`, leaving `e` unchanged. Since the jump only
//! raises `u`, one sweep per step settles every node.

use crate::diffusion::HeatOperator;
use crate::error::{Error, Result};
use crate::grid::{Domain1D, Level, ScalarField, SeriesPoint, Snapshot, TimeGrid, Trajectory};
use crate::shs::{min_max, Recorder};

#[derive(Debug, Clone, PartialEq)]
pub struct LimitState {
    pub t: f64,
    domain: Domain1D,
    pub u: Vec<f64>,
    /// Burned fraction in `[0, 1]`.
    pub chi: Vec<f64>,
    /// Latent heat density.
    pub v0: Vec<f64>,
}

impl LimitState {
    /// Arbitrary admissible state; fractional `chi` is allowed here and only here.
    pub fn from_parts(u: &ScalarField, chi: &ScalarField, v0: &ScalarField) -> Result<Self> {
        let domain = u.domain();
        if chi.domain() != domain || v0.domain() != domain {
            return Err(Error::Domain("u, chi and v0 live on different grids".into()));
        }
        if chi.values().iter().any(|&c| !(0.0..=1.0).contains(&c)) {
            return Err(Error::Domain("chi must lie in [0, 1]".into()));
        }
        if let Some(i) = v0.values().iter().position(|&v| v < 0.0) {
            return Err(Error::Domain(format!("v0 must be nonnegative (node {i})")));
        }
        Ok(Self {
            t: 0.0,
            domain,
            u: u.values().to_vec(),
            chi: chi.values().to_vec(),
            v0: v0.values().to_vec(),
        })
    }

    pub fn domain(&self) -> Domain1D {
        self.domain
    }

    /// Node-wise enthalpy `u − v⁰χ`.
    pub fn enthalpy(&self) -> Vec<f64> {
        self.u
            .iter()
            .zip(&self.chi)
            .zip(&self.v0)
            .map(|((u, c), v)| u - v * c)
            .collect()
    }

    /// Ignites every node with `chi < 1` and `u > 0`.
    pub fn ignition_sweep(&mut self) {
        for i in 0..self.u.len() {
            if self.chi[i] < 1.0 && self.u[i] > 0.0 {
                self.u[i] += self.v0[i] * (1.0 - self.chi[i]);
                self.chi[i] = 1.0;
            }
        }
    }

    /// Heat step (χ frozen), then ignition.
    pub fn step(&mut self, dt: f64, heat: &HeatOperator) -> Result<()> {
        heat.apply(&mut self.u);
        if let Some(node) = self.u.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { node, t: self.t });
        }
        self.ignition_sweep();
        self.t += dt;
        Ok(())
    }

    /// Midpoint of the rightmost burned-to-unburned transition interval.
    pub fn front(&self) -> Option<f64> {
        let h = self.domain.spacing();
        (0..self.chi.len() - 1)
            .rev()
            .find(|&i| self.chi[i] == 1.0 && self.chi[i + 1] < 1.0)
            .map(|i| self.domain.x(i) + 0.5 * h)
    }

    fn snapshot(&self) -> Snapshot {
        Snapshot { t: self.t, u: self.u.clone(), aux: self.chi.clone() }
    }

    fn series_point(&self) -> SeriesPoint {
        let latent: Vec<f64> = self.v0.iter().zip(&self.chi).map(|(v, c)| v * c).collect();
        let (umin, umax) = min_max(&self.u);
        SeriesPoint {
            t: self.t,
            front: self.front(),
            mass_u: self.domain.integrate_slice(&self.u),
            mass_aux: self.domain.integrate_slice(&latent),
            umin,
            umax,
        }
    }
}

/// `u(0) = u⁰ + v⁰H(u⁰)` with the selection `H(0) = 0`.
pub fn apply_initial_jump(u0: &ScalarField, v0: &ScalarField) -> Result<LimitState> {
    let chi = u0.map(|u| if u > 0.0 { 1.0 } else { 0.0 })?;
    let mut state = LimitState::from_parts(u0, &chi, v0)?;
    for i in 0..state.u.len() {
        state.u[i] += state.v0[i] * state.chi[i];
    }
    Ok(state)
}

/// Continues `state` over `time` (times are offset by `state.t`). Nodes that
/// are already hot are ignited before the first record.
pub fn run_limit_from(state: LimitState, time: TimeGrid) -> Result<Trajectory> {
    run_limit_observed(state, time, |_| {})
}

/// [`run_limit_from`] with `observer` called on the initial state and after
/// every step.
pub fn run_limit_observed(
    state: LimitState,
    time: TimeGrid,
    mut observer: impl FnMut(&LimitState),
) -> Result<Trajectory> {
    let mut state = state;
    state.ignition_sweep();
    let t0 = state.t;
    let domain = state.domain;
    let dt = time.step_size();
    let heat = HeatOperator::new(domain, dt)?;
    let mut rec = Recorder::new(domain, Level::Limit, time, state.v0.clone());
    rec.record(0, || state.snapshot(), state.series_point());
    observer(&state);
    for k in 1..=time.steps() {
        let last_good = state.snapshot();
        if let Err(e) = state.step(dt, &heat) {
            return Err(rec.fail(e, last_good));
        }
        state.t = t0 + time.time_of(k);
        rec.record(k, || state.snapshot(), state.series_point());
        observer(&state);
    }
    Ok(rec.finish(0))
}

pub fn run_limit(u0: &ScalarField, v0: &ScalarField, time: TimeGrid) -> Result<Trajectory> {
    run_limit_from(apply_initial_jump(u0, v0)?, time)
}
