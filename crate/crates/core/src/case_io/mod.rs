//! MATPOWER case files: raw tables and their validation into a per-unit [`Network`].

mod parse;
mod validate;

pub use parse::parse_case;
pub use validate::validate;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CaseError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("missing required table `{0}`")]
    MissingTable(&'static str),
    #[error("invalid case: {0}")]
    Invalid(String),
    #[error("unsupported feature: {0}")]
    Unsupported(String),
    #[error("I/O error: {0}")]
    Io(String),
}

/// Raw bus row. Quantities are in MW, MVAr and p.u. as in the file.
#[derive(Debug, Clone, PartialEq)]
pub struct RawBus {
    pub line: usize,
    pub id: f64,
    pub kind: f64,
    pub pd: f64,
    pub qd: f64,
    pub gs: f64,
    pub bs: f64,
    pub area: f64,
    pub vm: f64,
    pub va: f64,
    pub base_kv: f64,
    pub zone: f64,
    pub vmax: f64,
    pub vmin: f64,
    pub extra: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawGen {
    pub line: usize,
    pub bus: f64,
    pub pg: f64,
    pub qg: f64,
    pub qmax: f64,
    pub qmin: f64,
    pub vg: f64,
    pub mbase: f64,
    pub status: f64,
    pub pmax: f64,
    pub pmin: f64,
    pub extra: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawBranch {
    pub line: usize,
    pub from: f64,
    pub to: f64,
    pub r: f64,
    pub x: f64,
    pub b: f64,
    pub rate_a: f64,
    pub rate_b: f64,
    pub rate_c: f64,
    /// Off-nominal turns ratio; `0` means `1`.
    pub ratio: f64,
    /// Phase shift in degrees.
    pub angle: f64,
    pub status: f64,
    pub extra: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawGenCost {
    pub line: usize,
    /// `1` piecewise linear, `2` polynomial.
    pub model: f64,
    pub startup: f64,
    pub shutdown: f64,
    /// Polynomial coefficients, highest degree first.
    pub coefficients: Vec<f64>,
    pub extra: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawCase {
    pub name: Option<String>,
    pub base_mva: f64,
    pub bus: Vec<RawBus>,
    pub gen: Vec<RawGen>,
    pub branch: Vec<RawBranch>,
    pub gencost: Vec<RawGenCost>,
}

/// A bus with per-unit demand, shunt and voltage bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bus {
    /// Bus number in the source file.
    pub id: usize,
    pub p_demand: f64,
    pub q_demand: f64,
    pub shunt_g: f64,
    pub shunt_b: f64,
    pub v_min: f64,
    pub v_max: f64,
}

/// An in-service generator with per-unit limits and per-unit cost coefficients
/// (`c2 p² + c1 p + c0` in $/h with `p` in p.u.).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Generator {
    /// Internal bus index.
    pub bus: usize,
    pub p_min: f64,
    pub p_max: f64,
    pub q_min: f64,
    pub q_max: f64,
    pub c2: f64,
    pub c1: f64,
    pub c0: f64,
}

/// An in-service branch between internal bus indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub from: usize,
    pub to: usize,
    /// `1 / (r + jx)`
    pub series_admittance: Complex64,
    /// Total line charging susceptance.
    pub charging_b: f64,
    /// Complex turns ratio `ratio · e^{j·shift}`.
    pub tap: Complex64,
    /// Apparent-power limit; `None` when unlimited.
    pub s_limit: Option<f64>,
}

/// Validated per-unit network. Bus `0` is the reference bus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Network {
    pub name: String,
    pub base_mva: f64,
    pub buses: Vec<Bus>,
    pub generators: Vec<Generator>,
    pub branches: Vec<Branch>,
    /// Internal index of the reference bus; always `0` after validation.
    pub reference_bus: usize,
    pub warnings: Vec<String>,
}

impl Network {
    pub fn num_buses(&self) -> usize {
        self.buses.len()
    }

    /// Re-checks the per-unit invariants, e.g. after deserializing.
    pub fn check(&self) -> Result<(), CaseError> {
        validate::check_network(self)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("network serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, CaseError> {
        let net: Network = serde_json::from_str(text).map_err(|e| CaseError::Invalid(e.to_string()))?;
        net.check()?;
        Ok(net)
    }
}

/// Reads and validates a case file from disk.
pub fn load_case(path: &std::path::Path) -> Result<Network, CaseError> {
    let text = std::fs::read_to_string(path).map_err(|e| CaseError::Io(format!("{}: {e}", path.display())))?;
    let mut raw = parse_case(&text)?;
    if raw.name.is_none() {
        raw.name = path.file_stem().map(|s| s.to_string_lossy().into_owned());
    }
    validate(&raw)
}

/// The MATPOWER cases shipped with the crate.
pub mod bundled {
    use super::{parse_case, validate, CaseError, Network};

    pub const CASE5: &str = include_str!("../../data/case5.m");
    pub const CASE6WW: &str = include_str!("../../data/case6ww.m");
    pub const CASE9: &str = include_str!("../../data/case9.m");
    pub const CASE14: &str = include_str!("../../data/case14.m");
    pub const CASE30: &str = include_str!("../../data/case30.m");
    pub const CASE57: &str = include_str!("../../data/case57.m");
    pub const CASE118: &str = include_str!("../../data/case118.m");

    pub const NAMES: [&str; 7] = ["case5", "case6ww", "case9", "case14", "case30", "case57", "case118"];

    pub fn text(name: &str) -> Option<&'static str> {
        Some(match name {
            "case5" => CASE5,
            "case6ww" => CASE6WW,
            "case9" => CASE9,
            "case14" => CASE14,
            "case30" => CASE30,
            "case57" => CASE57,
            "case118" => CASE118,
            _ => return None,
        })
    }

    pub fn load(name: &str) -> Result<Network, CaseError> {
        let text = text(name).ok_or_else(|| CaseError::Invalid(format!("no bundled case `{name}`")))?;
        validate(&parse_case(text)?)
    }
}
