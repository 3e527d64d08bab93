//! Simulation laboratory for the SHS solid-combustion system at finite
//! activation energy and for its high-activation-energy limit, a
//! supercooled Stefan problem with an irreversible hysteresis term.

pub mod config;
pub mod diagnostics;
pub mod diffusion;
pub mod error;
pub mod experiments;
pub mod grid;
pub mod kinetics;
pub mod limit;
pub mod output;
pub mod profile;
pub mod runner;
pub mod shs;

pub use error::{Error, Result};
pub use grid::{integrate, lp_space_time_distance, Domain1D, Level, ScalarField, TimeGrid, Trajectory};
pub use kinetics::KineticsFamily;
