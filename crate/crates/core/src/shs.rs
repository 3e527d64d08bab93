//! ε-level SHS system
//!
//! `∂t u − Δu = −v⁰ ∂t exp(−w/ε)`, `w(t,x) = ∫₀ᵗ g_ε(u(s,x)) ds`, with
//! homogeneous Neumann data, integrated by Lie splitting: an exact
//! exponential reaction update with `u` frozen, then an implicit heat step.
//! Only `w` is stored; the reactant is derived as `v = v⁰·exp(−w/ε)`.

use crate::diffusion::HeatOperator;
use crate::error::{Error, Result};
use crate::grid::{Domain1D, Level, ScalarField, SeriesPoint, Snapshot, TimeGrid, Trajectory};
use crate::kinetics::{ClampCounter, KineticsFamily};

/// `w/ε` beyond which `exp(−w/ε)` is exactly zero in double precision;
/// `w` saturates at `ε` times this value.
const SATURATED_EXPONENT: f64 = 800.0;

#[derive(Debug, Clone)]
pub struct ShsState {
    pub t: f64,
    domain: Domain1D,
    pub u: Vec<f64>,
    /// Accumulated reaction integral, saturated once the reactant is gone.
    pub w: Vec<f64>,
    /// Frozen initial reactant `v⁰`.
    pub v0: Vec<f64>,
    /// Cached `exp(−w/ε)`.
    remaining: Vec<f64>,
    kinetics: KineticsFamily,
    clamps: ClampCounter,
}

impl ShsState {
    pub fn new(u0: &ScalarField, v0: &ScalarField, kinetics: KineticsFamily) -> Result<Self> {
        if u0.domain() != v0.domain() {
            return Err(Error::Domain("u0 and v0 live on different grids".into()));
        }
        if let Some(i) = v0.values().iter().position(|&v| v < 0.0) {
            return Err(Error::Domain(format!("v0 must be nonnegative (node {i})")));
        }
        let n = u0.domain().nodes();
        Ok(Self {
            t: 0.0,
            domain: u0.domain(),
            u: u0.values().to_vec(),
            w: vec![0.0; n],
            v0: v0.values().to_vec(),
            remaining: vec![1.0; n],
            kinetics,
            clamps: ClampCounter::default(),
        })
    }

    pub fn domain(&self) -> Domain1D {
        self.domain
    }

    pub fn kinetics(&self) -> &KineticsFamily {
        &self.kinetics
    }

    pub fn clamp_events(&self) -> u64 {
        self.clamps.0
    }

    /// Fraction `exp(−w/ε)` of the initial reactant left at each node.
    pub fn remaining_fraction(&self) -> &[f64] {
        &self.remaining
    }

    /// Derived reactant `v = v⁰·exp(−w/ε)`.
    pub fn reactant(&self) -> Vec<f64> {
        self.v0.iter().zip(&self.remaining).map(|(a, b)| a * b).collect()
    }

    /// Reaction with `u` frozen over `dt`. The source is integrated exactly,
    /// so `u + v` is preserved node-wise.
    pub fn reaction_substep(&mut self, dt: f64) -> Result<()> {
        if dt.is_nan() || dt <= 0.0 {
            return Err(Error::Domain(format!("dt must be positive, got {dt}")));
        }
        let eps = self.kinetics.epsilon();
        let cap = eps * SATURATED_EXPONENT;
        for i in 0..self.u.len() {
            let rate = self.kinetics.eval_tracked(self.u[i], &mut self.clamps);
            if rate == 0.0 || self.w[i] >= cap {
                continue;
            }
            let w_new = (self.w[i] + dt * rate).min(cap);
            let remaining_new = (-w_new / eps).exp();
            let released = self.v0[i] * (self.remaining[i] - remaining_new);
            let u_new = self.u[i] + released;
            if !(u_new.is_finite() && w_new.is_finite()) {
                return Err(Error::NonFinite { node: i, t: self.t });
            }
            self.w[i] = w_new;
            self.remaining[i] = remaining_new;
            self.u[i] = u_new;
        }
        Ok(())
    }

    pub fn diffusion_substep(&mut self, heat: &HeatOperator) -> Result<()> {
        heat.apply(&mut self.u);
        match self.u.iter().position(|v| !v.is_finite()) {
            Some(node) => Err(Error::NonFinite { node, t: self.t }),
            None => Ok(()),
        }
    }

    /// One Lie step: reaction, then diffusion.
    pub fn step(&mut self, dt: f64, heat: &HeatOperator) -> Result<()> {
        self.reaction_substep(dt)?;
        self.diffusion_substep(heat)?;
        self.t += dt;
        Ok(())
    }

    /// Rightmost crossing of the half-depletion level `v = v⁰/2`, linearly
    /// interpolated between nodes.
    pub fn front(&self) -> Option<f64> {
        front_of_remaining(self.domain, &self.remaining)
    }

    fn snapshot(&self) -> Snapshot {
        Snapshot { t: self.t, u: self.u.clone(), aux: self.reactant() }
    }

    fn series_point(&self) -> SeriesPoint {
        let v = self.reactant();
        let (umin, umax) = min_max(&self.u);
        SeriesPoint {
            t: self.t,
            front: self.front(),
            mass_u: self.domain.integrate_slice(&self.u),
            mass_aux: self.domain.integrate_slice(&v),
            umin,
            umax,
        }
    }
}

pub(crate) fn min_max(values: &[f64]) -> (f64, f64) {
    values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
}

pub(crate) fn front_of_remaining(domain: Domain1D, remaining: &[f64]) -> Option<f64> {
    let h = domain.spacing();
    (0..remaining.len() - 1).rev().find_map(|i| {
        let (a, b) = (remaining[i], remaining[i + 1]);
        (a < 0.5 && b >= 0.5).then(|| domain.x(i) + h * (0.5 - a) / (b - a))
    })
}

/// Builds a trajectory step by step and keeps it intact on failure.
pub(crate) struct Recorder {
    traj: Trajectory,
}

impl Recorder {
    pub(crate) fn new(domain: Domain1D, level: Level, time: TimeGrid, v0: Vec<f64>) -> Self {
        Self {
            traj: Trajectory {
                domain,
                level,
                time,
                v0,
                snapshots: Vec::new(),
                series: Vec::new(),
                clamp_events: 0,
            },
        }
    }

    pub(crate) fn record(&mut self, step: usize, snapshot: impl FnOnce() -> Snapshot, point: SeriesPoint) {
        self.traj.series.push(point);
        if self.traj.time.records(step) {
            self.traj.snapshots.push(snapshot());
        }
    }

    /// Abort with the last good state appended as a final snapshot.
    pub(crate) fn fail(mut self, err: Error, last_good: Snapshot) -> Error {
        let (node, t) = match err {
            Error::NonFinite { node, t } => (node, t),
            other => return other,
        };
        if self.traj.snapshots.last().map(|s| s.t) != Some(last_good.t) {
            self.traj.snapshots.push(last_good);
        }
        Error::NumericalFailure { node, t, last_good: Box::new(self.traj) }
    }

    pub(crate) fn finish(mut self, clamp_events: u64) -> Trajectory {
        self.traj.clamp_events = clamp_events;
        self.traj
    }
}

/// Runs the ε-level system over `time`, calling `observer` on the initial
/// state and after every step.
pub fn run_shs_observed(
    u0: &ScalarField,
    v0: &ScalarField,
    kinetics: &KineticsFamily,
    time: TimeGrid,
    mut observer: impl FnMut(&ShsState),
) -> Result<Trajectory> {
    let mut state = ShsState::new(u0, v0, kinetics.clone())?;
    let domain = state.domain;
    let dt = time.step_size();
    let heat = HeatOperator::new(domain, dt)?;
    let mut rec = Recorder::new(domain, Level::Epsilon, time, state.v0.clone());
    rec.record(0, || state.snapshot(), state.series_point());
    observer(&state);
    for k in 1..=time.steps() {
        let last_good = state.clone();
        if let Err(e) = state.step(dt, &heat) {
            return Err(rec.fail(e, last_good.snapshot()));
        }
        state.t = time.time_of(k);
        rec.record(k, || state.snapshot(), state.series_point());
        observer(&state);
    }
    Ok(rec.finish(state.clamp_events()))
}

pub fn run_shs(
    u0: &ScalarField,
    v0: &ScalarField,
    kinetics: &KineticsFamily,
    time: TimeGrid,
) -> Result<Trajectory> {
    run_shs_observed(u0, v0, kinetics, time, |_| {})
}

/// Heat-only twin: same grid, same schedule, no source.
pub fn run_heat(u0: &ScalarField, time: TimeGrid) -> Result<Trajectory> {
    let domain = u0.domain();
    let dt = time.step_size();
    let heat = HeatOperator::new(domain, dt)?;
    let zeros = vec![0.0; domain.nodes()];
    let mut u = u0.values().to_vec();
    let point = |t: f64, u: &[f64]| {
        let (umin, umax) = min_max(u);
        SeriesPoint { t, front: None, mass_u: domain.integrate_slice(u), mass_aux: 0.0, umin, umax }
    };
    let mut rec = Recorder::new(domain, Level::Heat, time, zeros.clone());
    rec.record(0, || Snapshot { t: 0.0, u: u.clone(), aux: zeros.clone() }, point(0.0, &u));
    for k in 1..=time.steps() {
        heat.apply(&mut u);
        let t = time.time_of(k);
        if let Some(node) = u.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { node, t });
        }
        rec.record(k, || Snapshot { t, u: u.clone(), aux: zeros.clone() }, point(t, &u));
    }
    Ok(rec.finish(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::integrate;

    fn domain() -> Domain1D {
        Domain1D::new(1.0, 11).unwrap()
    }

    fn state(u: f64, v0: f64, kin: KineticsFamily) -> ShsState {
        let d = domain();
        ShsState::new(
            &ScalarField::constant(d, u).unwrap(),
            &ScalarField::constant(d, v0).unwrap(),
            kin,
        )
        .unwrap()
    }

    #[test]
    fn reaction_below_cut_is_identity() {
        let mut s = state(-1.5, 1.0, KineticsFamily::matkowsky_sivashinsky(0.1).unwrap());
        let before = s.clone();
        s.reaction_substep(0.5).unwrap();
        assert_eq!(s.u, before.u);
        assert_eq!(s.w, before.w);
    }

    #[test]
    fn reaction_without_reactant_only_advances_w() {
        let mut s = state(0.2, 0.0, KineticsFamily::matkowsky_sivashinsky(0.1).unwrap());
        s.reaction_substep(0.01).unwrap();
        assert!(s.u.iter().all(|&u| u == 0.2));
        assert!(s.w.iter().all(|&w| w > 0.0));
    }

    #[test]
    fn exact_exponential_release() {
        // g ≡ 1 through a flat table, ε = 1, dt = 1: Δu = 1 − 1/e.
        let kin = KineticsFamily::tabulated(1.0, vec![(-10.0, 1.0), (10.0, 1.0)]).unwrap();
        let mut s = state(0.0, 1.0, kin);
        s.reaction_substep(1.0).unwrap();
        let e_inv = (-1.0f64).exp();
        assert!((s.u[3] - (1.0 - e_inv)).abs() < 1e-15);
        assert!((s.u[3] - 0.632121).abs() < 1e-6);
        assert!((s.reactant()[3] - 0.367879).abs() < 1e-6);
    }

    #[test]
    fn nodewise_conservation_of_u_plus_v() {
        let kin = KineticsFamily::matkowsky_sivashinsky(0.05).unwrap();
        let d = domain();
        let u0 = d.sample(|x| x - 0.4).unwrap();
        let v0 = d.sample(|x| 0.5 + x).unwrap();
        let mut s = ShsState::new(&u0, &v0, kin).unwrap();
        for _ in 0..50 {
            let before: Vec<f64> = s.u.iter().zip(s.reactant()).map(|(u, v)| u + v).collect();
            s.reaction_substep(1e-3).unwrap();
            let after: Vec<f64> = s.u.iter().zip(s.reactant()).map(|(u, v)| u + v).collect();
            for (a, b) in before.iter().zip(&after) {
                assert!((a - b).abs() <= 4.0 * f64::EPSILON * a.abs().max(1.0));
            }
        }
    }

    #[test]
    fn saturation_keeps_state_finite() {
        let kin = KineticsFamily::matkowsky_sivashinsky(1e-3).unwrap();
        let mut s = state(5.0, 1.0, kin);
        for _ in 0..1000 {
            s.reaction_substep(1e3).unwrap();
        }
        assert!(s.w.iter().all(|w| w.is_finite()));
        assert!(s.reactant().iter().all(|&v| v == 0.0));
        assert!(s.u.iter().all(|&u| (u - 6.0).abs() < 1e-12));
        assert!(s.clamp_events() > 0);
    }

    #[test]
    fn rejects_negative_reactant_and_bad_dt() {
        let d = domain();
        let kin = KineticsFamily::matkowsky_sivashinsky(0.1).unwrap();
        let u0 = ScalarField::constant(d, 0.0).unwrap();
        let v0 = ScalarField::constant(d, -0.1).unwrap();
        assert!(ShsState::new(&u0, &v0, kin.clone()).is_err());
        let mut s = state(0.0, 1.0, kin);
        assert!(s.reaction_substep(0.0).is_err());
    }

    #[test]
    fn reactant_free_run_matches_heat_twin_bitwise() {
        let d = Domain1D::new(2.0, 41).unwrap();
        let u0 = d.sample(|x| (3.0 * x).sin()).unwrap();
        let v0 = ScalarField::constant(d, 0.0).unwrap();
        let kin = KineticsFamily::matkowsky_sivashinsky(0.02).unwrap();
        let tg = TimeGrid::new(1e-3, 0.2, 7).unwrap();
        let a = run_shs(&u0, &v0, &kin, tg).unwrap();
        let b = run_heat(&u0, tg).unwrap();
        assert_eq!(a.snapshots.len(), b.snapshots.len());
        for (sa, sb) in a.snapshots.iter().zip(&b.snapshots) {
            assert_eq!(sa.t, sb.t);
            assert_eq!(sa.u, sb.u);
        }
    }

    #[test]
    fn dormant_run_stays_put() {
        let d = Domain1D::new(1.0, 51).unwrap();
        let u0 = ScalarField::constant(d, -0.5).unwrap();
        let v0 = ScalarField::constant(d, 1.0).unwrap();
        let kin = KineticsFamily::matkowsky_sivashinsky(0.02).unwrap();
        let h = d.spacing();
        let tg = TimeGrid::new(h * h / 2.0, 1.0, 100).unwrap();
        let traj = run_shs(&u0, &v0, &kin, tg).unwrap();
        for s in &traj.snapshots {
            assert!(s.u.iter().all(|&u| (u + 0.5).abs() < 1e-6));
            assert!(s.aux.iter().all(|&v| v > 1.0 - 1e-6));
        }
        assert!(traj.series.iter().all(|p| p.front.is_none()));
    }

    #[test]
    fn step_data_front_is_monotone_and_mass_conserved() {
        let d = Domain1D::new(4.0, 201).unwrap();
        let u0 = d.sample(|x| if x <= 1.0 { 0.5 } else { -0.25 }).unwrap();
        let v0 = ScalarField::constant(d, 1.0).unwrap();
        let kin = KineticsFamily::matkowsky_sivashinsky(0.02).unwrap();
        let h = d.spacing();
        let tg = TimeGrid::new(h * h / 2.0, 0.5, 50).unwrap();
        let traj = run_shs(&u0, &v0, &kin, tg).unwrap();
        let fronts: Vec<f64> = traj.series.iter().filter_map(|p| p.front).collect();
        assert!(!fronts.is_empty());
        assert!(fronts.windows(2).all(|w| w[1] >= w[0]));
        let m0 = traj.series[0].conserved(Level::Epsilon);
        for p in &traj.series {
            assert!((p.conserved(Level::Epsilon) - m0).abs() <= 1e-10 * m0.abs());
        }
        let last = traj.last();
        let total = integrate(&ScalarField::new(d, last.u.clone()).unwrap())
            + integrate(&ScalarField::new(d, last.aux.clone()).unwrap());
        assert!((total - m0).abs() < 1e-10 * m0.abs());
    }

    #[test]
    fn w_monotone_and_u_bounded_below() {
        let d = Domain1D::new(2.0, 81).unwrap();
        let u0 = d.sample(|x| if x < 0.5 { 0.4 } else { -0.3 }).unwrap();
        let v0 = d.sample(|x| 0.8 + 0.2 * (5.0 * x).cos()).unwrap();
        let kin = KineticsFamily::threshold(0.05, 0.5, 0.5).unwrap();
        let h = d.spacing();
        let tg = TimeGrid::new(h * h / 2.0, 0.3, 1).unwrap();
        let mut prev_w: Option<Vec<f64>> = None;
        let umin0 = u0.min();
        run_shs_observed(&u0, &v0, &kin, tg, |s| {
            if let Some(pw) = &prev_w {
                assert!(s.w.iter().zip(pw).all(|(a, b)| a >= b));
            }
            assert!(s.u.iter().all(|&u| u >= umin0 - 1e-12));
            prev_w = Some(s.w.clone());
        })
        .unwrap();
    }

    #[test]
    fn numerical_failure_keeps_last_good_state() {
        let d = domain();
        let u0 = ScalarField::constant(d, 1.5e308).unwrap();
        let v0 = ScalarField::constant(d, 1e308).unwrap();
        let kin = KineticsFamily::tabulated(1.0, vec![(-10.0, 1.0), (10.0, 1.0)]).unwrap();
        let tg = TimeGrid::new(0.1, 1.0, 1).unwrap();
        match run_shs(&u0, &v0, &kin, tg) {
            Err(Error::NumericalFailure { last_good, .. }) => {
                assert!(!last_good.snapshots.is_empty());
                assert!(last_good.last().u.iter().all(|u| u.is_finite()));
            }
            other => panic!("expected numerical failure, got {other:?}"),
        }
    }
}
