//! Electrical coefficients shared by all relaxations.
//!
//! Branch flows are linear in the lifted matrix `V = v vᴴ`:
//!
//! ```text
//! p_f + j q_f = c_ff · V_kk + c_ft · V_km
//! p_t + j q_t = c_tf · V_mk + c_tt · V_mm
//! ```

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::case_io::{Branch, Network};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NetworkError {
    #[error("branch has zero series admittance")]
    DegenerateBranch,
    #[error("branch has zero tap magnitude")]
    ZeroTap,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchCoefficients {
    pub c_ff: Complex64,
    pub c_ft: Complex64,
    pub c_tf: Complex64,
    pub c_tt: Complex64,
}

pub fn branch_coefficients(branch: &Branch) -> Result<BranchCoefficients, NetworkError> {
    let y = branch.series_admittance;
    let t = branch.tap;
    if y.norm() == 0.0 || !y.is_finite() {
        return Err(NetworkError::DegenerateBranch);
    }
    if t.norm() == 0.0 {
        return Err(NetworkError::ZeroTap);
    }
    let half_b = Complex64::new(0.0, -branch.charging_b / 2.0);
    let yc = y.conj();
    Ok(BranchCoefficients {
        c_ff: (half_b + yc) / t.norm_sqr(),
        c_ft: -yc / t,
        c_tf: -yc / t.conj(),
        c_tt: half_b + yc,
    })
}

/// Generators and branch ends attached to each bus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IncidenceMaps {
    pub generators: Vec<Vec<usize>>,
    pub from_branches: Vec<Vec<usize>>,
    pub to_branches: Vec<Vec<usize>>,
}

pub fn incidence(network: &Network) -> IncidenceMaps {
    let n = network.num_buses();
    let mut maps = IncidenceMaps {
        generators: vec![Vec::new(); n],
        from_branches: vec![Vec::new(); n],
        to_branches: vec![Vec::new(); n],
    };
    for (g, gen) in network.generators.iter().enumerate() {
        maps.generators[gen.bus].push(g);
    }
    for (l, br) in network.branches.iter().enumerate() {
        maps.from_branches[br.from].push(l);
        maps.to_branches[br.to].push(l);
    }
    maps
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjectiveMode {
    /// Quadratic generation cost in $/h.
    Cost,
    /// Total active generation, i.e. demand plus losses, in MW.
    Loss,
}

impl ObjectiveMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            ObjectiveMode::Cost => "cost",
            ObjectiveMode::Loss => "loss",
        }
    }

    pub fn unit(&self) -> &'static str {
        match self {
            ObjectiveMode::Cost => "$/h",
            ObjectiveMode::Loss => "MW",
        }
    }
}

impl std::fmt::Display for ObjectiveMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ObjectiveMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "cost" => Ok(ObjectiveMode::Cost),
            "loss" => Ok(ObjectiveMode::Loss),
            other => Err(format!("unknown objective `{other}` (expected cost or loss)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostCoefficients {
    pub c2: f64,
    pub c1: f64,
    pub c0: f64,
}

/// Per-generator cost coefficients in effect, in per-unit power.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveSpec {
    pub mode: ObjectiveMode,
    pub costs: Vec<CostCoefficients>,
    /// Factor converting the per-unit objective to reporting units.
    pub report_scale: f64,
}

pub fn apply_objective(network: &Network, mode: ObjectiveMode) -> ObjectiveSpec {
    let costs = network
        .generators
        .iter()
        .map(|g| match mode {
            ObjectiveMode::Cost => CostCoefficients {
                c2: g.c2,
                c1: g.c1,
                c0: g.c0,
            },
            ObjectiveMode::Loss => CostCoefficients {
                c2: 0.0,
                c1: 1.0,
                c0: 0.0,
            },
        })
        .collect();
    ObjectiveSpec {
        mode,
        costs,
        report_scale: match mode {
            ObjectiveMode::Cost => 1.0,
            ObjectiveMode::Loss => network.base_mva,
        },
    }
}
