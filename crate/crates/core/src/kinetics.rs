//! Reaction-rate families `g_ε` and validators for their structural
//! assumptions (single jump with linear growth, cold-side vanishing,
//! hot-side saturation).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_EXP_CLAMP: f64 = 700.0;

/// Sample count used by the assumption validators (plus both endpoints).
const VALIDATOR_SAMPLES: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum Variant {
    /// `g(z) = exp((1 − 1/(z+1))/ε)` for `z > −1`, zero otherwise.
    MatkowskySivashinsky,
    /// `g(z) = exp((z/(κz+1))/ε)` for `z > θ̄ − 1`, zero otherwise.
    Threshold { kappa: f64, theta_bar: f64 },
    /// Piecewise-linear through `(z, g)` knots; zero at and left of the first
    /// knot, constant right of the last.
    Tabulated { knots: Vec<(f64, f64)> },
}

/// One member `g_ε` of a kinetics family. Immutable after construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KineticsFamily {
    variant: Variant,
    epsilon: f64,
    exp_clamp: f64,
}

/// Per-run tally of evaluations whose exponent was clamped.
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct ClampCounter(pub u64);

impl KineticsFamily {
    pub fn matkowsky_sivashinsky(epsilon: f64) -> Result<Self> {
        Self::new(Variant::MatkowskySivashinsky, epsilon)
    }

    pub fn threshold(epsilon: f64, kappa: f64, theta_bar: f64) -> Result<Self> {
        Self::new(Variant::Threshold { kappa, theta_bar }, epsilon)
    }

    pub fn tabulated(epsilon: f64, knots: Vec<(f64, f64)>) -> Result<Self> {
        Self::new(Variant::Tabulated { knots }, epsilon)
    }

    pub fn new(variant: Variant, epsilon: f64) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(Error::Domain(format!("epsilon must be positive, got {epsilon}")));
        }
        match &variant {
            Variant::MatkowskySivashinsky => {}
            Variant::Threshold { kappa, theta_bar } => {
                if !(*kappa > 0.0 && *kappa <= 1.0) {
                    return Err(Error::Domain(format!("kappa must lie in (0, 1], got {kappa}")));
                }
                if !(*theta_bar > 0.0 && *theta_bar < 1.0) {
                    return Err(Error::Domain(format!(
                        "theta_bar must lie in (0, 1), got {theta_bar}"
                    )));
                }
            }
            Variant::Tabulated { knots } => {
                if knots.len() < 2 {
                    return Err(Error::Domain("a kinetics table needs at least two knots".into()));
                }
                if knots.iter().any(|&(z, g)| !z.is_finite() || !g.is_finite() || g < 0.0) {
                    return Err(Error::Domain(
                        "kinetics table values must be finite and nonnegative".into(),
                    ));
                }
                if knots.windows(2).any(|w| w[1].0 <= w[0].0) {
                    return Err(Error::Domain(
                        "kinetics table abscissae must be strictly increasing".into(),
                    ));
                }
            }
        }
        Ok(Self { variant, epsilon, exp_clamp: DEFAULT_EXP_CLAMP })
    }

    pub fn with_exp_clamp(mut self, exp_clamp: f64) -> Self {
        self.exp_clamp = exp_clamp;
        self
    }

    /// Same family at a different ε (κ and θ̄ stay fixed).
    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        Ok(Self::new(self.variant.clone(), epsilon)?.with_exp_clamp(self.exp_clamp))
    }

    pub fn variant(&self) -> &Variant {
        &self.variant
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn exp_clamp(&self) -> f64 {
        self.exp_clamp
    }

    /// Location `z₀` of the only jump: `g` vanishes on `(−∞, z₀]`.
    pub fn cutoff(&self) -> f64 {
        match &self.variant {
            Variant::MatkowskySivashinsky => -1.0,
            Variant::Threshold { theta_bar, .. } => theta_bar - 1.0,
            Variant::Tabulated { knots } => knots[0].0,
        }
    }

    /// Reported `C_ε` in `g_ε(z) ≤ C_ε (1 + |z|)`.
    pub fn growth_constant(&self) -> f64 {
        let clamp = |e: f64| e.min(self.exp_clamp).exp();
        match &self.variant {
            Variant::MatkowskySivashinsky => clamp(1.0 / self.epsilon),
            Variant::Threshold { kappa, .. } => clamp(1.0 / (kappa * self.epsilon)),
            Variant::Tabulated { knots } => knots
                .iter()
                .map(|&(z, g)| g / (1.0 + z.abs()))
                .fold(0.0, f64::max)
                .max(knots.last().map_or(0.0, |k| k.1)),
        }
    }

    /// Exponent of the Arrhenius factor, or `None` at and below the cutoff.
    fn exponent(&self, z: f64) -> Option<f64> {
        match &self.variant {
            Variant::MatkowskySivashinsky => {
                (z > -1.0).then(|| (1.0 - 1.0 / (z + 1.0)) / self.epsilon)
            }
            Variant::Threshold { kappa, theta_bar } => {
                (z > theta_bar - 1.0).then(|| (z / (kappa * z + 1.0)) / self.epsilon)
            }
            Variant::Tabulated { .. } => None,
        }
    }

    /// Evaluates `g_ε(z)`, counting clamp events.
    pub fn eval_tracked(&self, z: f64, counter: &mut ClampCounter) -> f64 {
        if let Variant::Tabulated { knots } = &self.variant {
            return table_lookup(knots, z);
        }
        match self.exponent(z) {
            None => 0.0,
            Some(e) if e > self.exp_clamp => {
                counter.0 += 1;
                self.exp_clamp.exp()
            }
            Some(e) => e.exp(),
        }
    }

    pub fn eval_g(&self, z: f64) -> f64 {
        self.eval_tracked(z, &mut ClampCounter::default())
    }
}

fn table_lookup(knots: &[(f64, f64)], z: f64) -> f64 {
    let (z_first, _) = knots[0];
    let (z_last, g_last) = knots[knots.len() - 1];
    if z <= z_first {
        return 0.0;
    }
    if z >= z_last {
        return g_last;
    }
    let j = knots.partition_point(|&(zk, _)| zk <= z);
    let (z0, g0) = knots[j - 1];
    let (z1, g1) = knots[j];
    g0 + (g1 - g0) * (z - z0) / (z1 - z0)
}

/// Outcome of one assumption check along an ε sequence.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssumptionReport {
    pub name: String,
    pub interval: (f64, f64),
    pub eps: Vec<f64>,
    /// `s_ε` (cold) or `d_ε` (hot), aligned with `eps`.
    pub values: Vec<f64>,
    pub tol: f64,
    pub passed: bool,
}

fn sample_interval(a: f64, b: f64) -> impl Iterator<Item = f64> {
    (0..=VALIDATOR_SAMPLES + 1).map(move |k| {
        if k == VALIDATOR_SAMPLES + 1 {
            b
        } else {
            a + (b - a) * k as f64 / (VALIDATOR_SAMPLES + 1) as f64
        }
    })
}

fn check_eps_sequence(eps: &[f64]) -> Result<()> {
    if eps.is_empty() {
        return Err(Error::Domain("epsilon sequence is empty".into()));
    }
    if eps.iter().any(|&e| !(e > 0.0 && e.is_finite())) {
        return Err(Error::Domain("epsilon sequence must be positive".into()));
    }
    if eps.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Domain("epsilon sequence must be strictly decreasing".into()));
    }
    Ok(())
}

fn last_three_non_increasing(values: &[f64]) -> bool {
    let tail = &values[values.len().saturating_sub(3)..];
    tail.windows(2).all(|w| w[1] <= w[0])
}

/// Cold-side check: `max_K g_ε/ε` must vanish along the ε sequence on a
/// compact `K = [a, b]` with `b < 0`.
pub fn verify_assumption_cold(
    family: &KineticsFamily,
    eps_sequence: &[f64],
    interval: (f64, f64),
    tol: f64,
) -> Result<AssumptionReport> {
    let (a, b) = interval;
    if !(a.is_finite() && b.is_finite() && a <= b && b < 0.0) {
        return Err(Error::Domain(format!(
            "cold interval [{a}, {b}] must be a compact subset of (-inf, 0)"
        )));
    }
    check_eps_sequence(eps_sequence)?;
    let values = eps_sequence
        .iter()
        .map(|&eps| {
            let g = family.with_epsilon(eps)?;
            Ok(sample_interval(a, b).map(|z| g.eval_g(z) / eps).fold(0.0, f64::max))
        })
        .collect::<Result<Vec<_>>>()?;
    let passed = values.last().is_some_and(|&s| s < tol) && last_three_non_increasing(&values);
    Ok(AssumptionReport {
        name: "cold".into(),
        interval,
        eps: eps_sequence.to_vec(),
        values,
        tol,
        passed,
    })
}

/// Hot-side check: `max_K (c_K − min(g_ε, c_K))` must vanish on a compact
/// `K = [a, b]` with `a > 0`.
pub fn verify_assumption_hot(
    family: &KineticsFamily,
    eps_sequence: &[f64],
    interval: (f64, f64),
    c_k: f64,
    tol: f64,
) -> Result<AssumptionReport> {
    let (a, b) = interval;
    if !(a.is_finite() && b.is_finite() && a <= b && a > 0.0) {
        return Err(Error::Domain(format!(
            "hot interval [{a}, {b}] must be a compact subset of (0, +inf)"
        )));
    }
    if !(c_k >= 0.0 && c_k.is_finite()) {
        return Err(Error::Domain(format!("c_K must be nonnegative, got {c_k}")));
    }
    check_eps_sequence(eps_sequence)?;
    let values = eps_sequence
        .iter()
        .map(|&eps| {
            let g = family.with_epsilon(eps)?;
            Ok(sample_interval(a, b)
                .map(|z| c_k - g.eval_g(z).min(c_k))
                .fold(0.0, f64::max))
        })
        .collect::<Result<Vec<_>>>()?;
    let passed = values.last().is_some_and(|&d| d < tol);
    Ok(AssumptionReport {
        name: "hot".into(),
        interval,
        eps: eps_sequence.to_vec(),
        values,
        tol,
        passed,
    })
}

/// ε sequence used by the hot-side growth property.
pub const DEFAULT_EPS_SEQUENCE: [f64; 7] = [0.1, 0.05, 0.02, 0.01, 0.005, 0.002, 0.001];
