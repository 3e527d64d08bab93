#![allow(dead_code)]

use std::path::PathBuf;

use shs_core::config::{load_config, RunConfig};
use shs_core::grid::ScalarField;

pub fn config_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(format!("{name}.json"))
}

pub fn load(name: &str) -> RunConfig {
    load_config(&config_path(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn fields(cfg: &RunConfig) -> (ScalarField, ScalarField) {
    let d = cfg.domain().unwrap();
    (cfg.initial.u0.sample(d).unwrap(), cfg.initial.v0.sample(d).unwrap())
}
