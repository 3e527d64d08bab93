//! Initial-data shapes, sampled onto whatever grid a run uses.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::{Domain1D, ScalarField};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Profile {
    Constant {
        value: f64,
    },
    /// `left_value` on `[0, split_fraction·L]`, `right_value` beyond.
    Step {
        left_value: f64,
        right_value: f64,
        split_fraction: f64,
    },
    /// `mean + amplitude·cos(2πx/period)`.
    Cosine {
        mean: f64,
        amplitude: f64,
        period: f64,
    },
    /// `base − depth·exp(−((x − center)/width)²)`.
    Bump {
        base: f64,
        depth: f64,
        center: f64,
        width: f64,
    },
    /// Piecewise-linear through `(x, value)` points, constant outside.
    Table {
        points: Vec<(f64, f64)>,
    },
}

impl Profile {
    pub fn validate(&self) -> Result<()> {
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        let ok = match self {
            Profile::Constant { value } => finite(&[*value]),
            Profile::Step { left_value, right_value, split_fraction } => {
                finite(&[*left_value, *right_value]) && (0.0..=1.0).contains(split_fraction)
            }
            Profile::Cosine { mean, amplitude, period } => {
                finite(&[*mean, *amplitude]) && *period > 0.0 && period.is_finite()
            }
            Profile::Bump { base, depth, center, width } => {
                finite(&[*base, *depth, *center]) && *width > 0.0 && width.is_finite()
            }
            Profile::Table { points } => {
                !points.is_empty()
                    && points.iter().all(|&(x, v)| x.is_finite() && v.is_finite())
                    && points.windows(2).all(|w| w[1].0 > w[0].0)
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Domain(format!("malformed profile {self:?}")))
        }
    }

    /// Infimum over the real line (exact for every variant).
    pub fn lower_bound(&self) -> f64 {
        match self {
            Profile::Constant { value } => *value,
            Profile::Step { left_value, right_value, .. } => left_value.min(*right_value),
            Profile::Cosine { mean, amplitude, .. } => mean - amplitude.abs(),
            Profile::Bump { base, depth, .. } => base - depth.max(0.0),
            Profile::Table { points } => points.iter().map(|p| p.1).fold(f64::INFINITY, f64::min),
        }
    }

    pub fn upper_bound(&self) -> f64 {
        match self {
            Profile::Constant { value } => *value,
            Profile::Step { left_value, right_value, .. } => left_value.max(*right_value),
            Profile::Cosine { mean, amplitude, .. } => mean + amplitude.abs(),
            Profile::Bump { base, depth, .. } => base - depth.min(0.0),
            Profile::Table { points } => {
                points.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max)
            }
        }
    }

    pub fn eval(&self, x: f64, length: f64) -> f64 {
        match self {
            Profile::Constant { value } => *value,
            Profile::Step { left_value, right_value, split_fraction } => {
                if x <= split_fraction * length {
                    *left_value
                } else {
                    *right_value
                }
            }
            Profile::Cosine { mean, amplitude, period } => {
                mean + amplitude * (2.0 * PI * x / period).cos()
            }
            Profile::Bump { base, depth, center, width } => {
                let s = (x - center) / width;
                base - depth * (-s * s).exp()
            }
            Profile::Table { points } => {
                let (x_first, v_first) = points[0];
                let (x_last, v_last) = points[points.len() - 1];
                if x <= x_first {
                    return v_first;
                }
                if x >= x_last {
                    return v_last;
                }
                let j = points.partition_point(|p| p.0 <= x);
                let (x0, v0) = points[j - 1];
                let (x1, v1) = points[j];
                v0 + (v1 - v0) * (x - x0) / (x1 - x0)
            }
        }
    }

    pub fn sample(&self, domain: Domain1D) -> Result<ScalarField> {
        self.validate()?;
        domain.sample(|x| self.eval(x, domain.length()))
    }
}
