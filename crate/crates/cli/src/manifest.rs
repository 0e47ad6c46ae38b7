//! Batch manifests.
//!
//! ```toml
//! cases = ["case9", "grids/feeder.m"]
//! relaxations = ["socr", "sdr"]
//! objectives = ["cost", "loss"]
//! csv = "results.csv"
//!
//! [[bounds]]
//! case = "feeder"
//! objective = "cost"
//! value = 1234.5
//! ```
//!
//! Relative paths are resolved against the manifest's directory.

use std::path::PathBuf;

use serde::Deserialize;

use opf_relax::network_model::ObjectiveMode;
use opf_relax::relaxations::RelaxationKind;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    #[serde(default)]
    pub cases: Vec<String>,
    #[serde(default = "all_kinds")]
    pub relaxations: Vec<RelaxationKind>,
    #[serde(default = "cost_only")]
    pub objectives: Vec<ObjectiveMode>,
    #[serde(default)]
    pub socr_3x3: bool,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    pub time_limit_s: Option<f64>,
    pub csv: Option<PathBuf>,
    #[serde(default)]
    pub bounds: Vec<Bound>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bound {
    pub case: String,
    pub objective: ObjectiveMode,
    pub value: f64,
}

fn all_kinds() -> Vec<RelaxationKind> {
    RelaxationKind::ALL.to_vec()
}

fn cost_only() -> Vec<ObjectiveMode> {
    vec![ObjectiveMode::Cost]
}

fn default_tol() -> f64 {
    1.49e-8
}

fn default_max_iter() -> usize {
    200
}
