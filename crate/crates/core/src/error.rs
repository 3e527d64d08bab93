use thiserror::Error;

use crate::grid::Trajectory;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    /// Two trajectories cannot be compared without interpolation.
    #[error("comparison error: {0}")]
    Comparison(String),

    #[error("non-finite value at node {node}, t = {t}")]
    NonFinite { node: usize, t: f64 },

    /// A run produced a non-finite state; `last_good` holds everything
    /// recorded up to the final finite step.
    #[error("numerical failure at node {node}, t = {t}")]
    NumericalFailure {
        node: usize,
        t: f64,
        last_good: Box<Trajectory>,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
