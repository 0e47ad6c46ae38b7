//! The six relaxations as [`ConicProgram`]s over shared lifted variables.
//!
//! `V_kk` is a real variable per bus. Each constrained pair `k < m` gets
//! `Re V_km` and `Im V_km`; the opposite orientation is the conjugate.

mod shared;
mod lift;

pub use shared::{build_shared_core, LiftedVariables};
pub use lift::lift_sdr_to_nsdr;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::case_io::Network;
use crate::chordal::{self, CliqueDecomposition};
use crate::conic_form::{
    add_hermitian_psd, add_rotated_2x2, add_socr_3x3, BlockId, ConicProgram, EqualityId, HermitianBlockMap,
    HermitianEntry, LinExpr, ModelError,
};
use crate::network_model::{self, ObjectiveSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RelaxationKind {
    Sdr,
    Chr,
    Socr,
    Nsdr,
    Tcr,
    Stcr,
}

impl RelaxationKind {
    pub const ALL: [RelaxationKind; 6] = [
        RelaxationKind::Socr,
        RelaxationKind::Tcr,
        RelaxationKind::Stcr,
        RelaxationKind::Chr,
        RelaxationKind::Sdr,
        RelaxationKind::Nsdr,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            RelaxationKind::Sdr => "sdr",
            RelaxationKind::Chr => "chr",
            RelaxationKind::Socr => "socr",
            RelaxationKind::Nsdr => "nsdr",
            RelaxationKind::Tcr => "tcr",
            RelaxationKind::Stcr => "stcr",
        }
    }

    /// Whether the relaxation carries the voltage vector `v`.
    pub fn has_voltages(&self) -> bool {
        matches!(self, RelaxationKind::Nsdr | RelaxationKind::Tcr)
    }
}

impl fmt::Display for RelaxationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.as_str().to_ascii_uppercase())
    }
}

impl FromStr for RelaxationKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "sdr" => RelaxationKind::Sdr,
            "chr" => RelaxationKind::Chr,
            "socr" => RelaxationKind::Socr,
            "nsdr" => RelaxationKind::Nsdr,
            "tcr" => RelaxationKind::Tcr,
            "stcr" => RelaxationKind::Stcr,
            other => return Err(format!("unknown relaxation `{other}`")),
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RelaxationOptions {
    /// Write each SOCR pair as the equivalent 3×3 Hermitian block.
    pub socr_3x3: bool,
}

/// A built relaxation plus what is needed to interpret its solution.
#[derive(Debug, Clone)]
pub struct Relaxation {
    pub kind: RelaxationKind,
    pub options: RelaxationOptions,
    pub program: ConicProgram,
    pub vars: LiftedVariables,
    pub objective: ObjectiveSpec,
    /// Hermitian submatrices of `V` whose rank is reported.
    pub rank_blocks: Vec<HermitianBlockMap>,
    pub psd_blocks: Vec<BlockId>,
    pub cliques: Option<CliqueDecomposition>,
}

impl Relaxation {
    /// Objective in reporting units ($/h or MW).
    pub fn report_value(&self, program_value: f64) -> f64 {
        program_value * self.objective.report_scale
    }

    /// Program point for the voltage profile `v` with the given dispatch. Flows
    /// and cost auxiliaries are filled in from the lifted matrix `v vᴴ`.
    pub fn lifted_point(&self, network: &Network, v: &[Complex64], pg: &[f64], qg: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.program.num_vars()];
        let vars = &self.vars;
        for (k, &d) in vars.v_diag.iter().enumerate() {
            x[d] = v[k].norm_sqr();
        }
        for (&(k, m), &(re, im)) in &vars.pairs {
            let z = v[k] * v[m].conj();
            x[re] = z.re;
            x[im] = z.im;
        }
        if let Some(vv) = &vars.v {
            for (k, &(re, im)) in vv.iter().enumerate() {
                x[re] = v[k].re;
                x[im] = v[k].im;
            }
        }
        for (l, br) in network.branches.iter().enumerate() {
            let c = network_model::branch_coefficients(br).expect("validated branch");
            let (vk, vm) = (v[br.from], v[br.to]);
            let sf = c.c_ff * vk.norm_sqr() + c.c_ft * vk * vm.conj();
            let st = c.c_tf * vm * vk.conj() + c.c_tt * vm.norm_sqr();
            x[vars.pf[l]] = sf.re;
            x[vars.qf[l]] = sf.im;
            x[vars.pt[l]] = st.re;
            x[vars.qt[l]] = st.im;
        }
        for (g, cost) in self.objective.costs.iter().enumerate() {
            x[vars.pg[g]] = pg[g];
            x[vars.qg[g]] = qg[g];
            if let Some(s) = vars.cost_aux[g] {
                x[s] = cost.c2 * pg[g] * pg[g];
            }
        }
        x
    }
}

fn all_pairs(n: usize) -> BTreeSet<(usize, usize)> {
    (0..n).flat_map(|k| (k + 1..n).map(move |m| (k, m))).collect()
}

fn branch_pairs(network: &Network) -> BTreeSet<(usize, usize)> {
    network
        .branches
        .iter()
        .map(|b| (b.from.min(b.to), b.from.max(b.to)))
        .collect()
}

/// Hermitian submatrix of `V` on `buses`.
fn submatrix(vars: &LiftedVariables, buses: &[usize]) -> Result<HermitianBlockMap, ModelError> {
    let mut err = None;
    let map = HermitianBlockMap::from_fn(buses.len(), |i, j| {
        vars.entry(buses[i], buses[j]).unwrap_or_else(|e| {
            err = Some(e);
            HermitianEntry {
                re: LinExpr::zero(),
                im: None,
            }
        })
    });
    err.map_or(Ok(map), Err)
}

/// `[[1, vᴴ], [v, V]]` restricted to `buses`.
fn bordered(vars: &LiftedVariables, buses: &[usize]) -> Result<HermitianBlockMap, ModelError> {
    let v = vars
        .v
        .as_ref()
        .ok_or_else(|| ModelError::Argument("voltage variables are not registered".into()))?;
    let mut err = None;
    let map = HermitianBlockMap::from_fn(buses.len() + 1, |i, j| match (i, j) {
        (0, 0) => HermitianEntry {
            re: LinExpr::constant(1.0),
            im: None,
        },
        (i, 0) => {
            let (re, im) = v[buses[i - 1]];
            HermitianEntry {
                re: LinExpr::var(re),
                im: Some(LinExpr::var(im)),
            }
        }
        (i, j) => vars.entry(buses[i - 1], buses[j - 1]).unwrap_or_else(|e| {
            err = Some(e);
            HermitianEntry {
                re: LinExpr::zero(),
                im: None,
            }
        }),
    });
    err.map_or(Ok(map), Err)
}

/// `(v̲ + v̄)·Re v_ref − V_ref,ref ≥ v̲·v̄` and `Im v_ref = 0` for the reference bus.
pub fn reference_bus_rlt(
    prog: &mut ConicProgram,
    vars: &LiftedVariables,
    v_min: f64,
    v_max: f64,
) -> Result<(BlockId, EqualityId), ModelError> {
    if !(v_min > 0.0 && v_min <= v_max && v_max.is_finite()) {
        return Err(ModelError::Argument(format!(
            "reference bus needs 0 < Vmin <= Vmax, got [{v_min}, {v_max}]"
        )));
    }
    let (re, im) = vars
        .v
        .as_ref()
        .ok_or_else(|| ModelError::Argument("voltage variables are not registered".into()))?[0];
    let secant = LinExpr::term(re, v_min + v_max) - LinExpr::var(vars.v_diag[0]) - v_min * v_max;
    let ineq = prog.add_nonnegative(secant, "rlt reference magnitude")?;
    let eq = prog.add_equality(LinExpr::var(im), "rlt reference angle")?;
    Ok((ineq, eq))
}

/// Builds `kind` for `network`. The chordal relaxation computes its own clique
/// decomposition unless one is supplied.
pub fn build(
    kind: RelaxationKind,
    network: &Network,
    objective: &ObjectiveSpec,
    cliques: Option<&CliqueDecomposition>,
    options: RelaxationOptions,
) -> Result<Relaxation, ModelError> {
    let n = network.num_buses();
    let lines = branch_pairs(network);
    let cliques = match (kind, cliques) {
        (RelaxationKind::Chr, Some(c)) => Some(c.clone()),
        (RelaxationKind::Chr, None) => Some(chordal::decompose(&chordal::build_graph(network))),
        _ => None,
    };
    let pairs = match kind {
        RelaxationKind::Sdr | RelaxationKind::Nsdr => all_pairs(n),
        RelaxationKind::Socr | RelaxationKind::Tcr => lines.clone(),
        RelaxationKind::Stcr => {
            let mut p = lines.clone();
            for &(k, m) in &lines {
                p.extend([k, m].into_iter().filter(|&b| b != 0).map(|b| (0, b)));
            }
            p
        }
        RelaxationKind::Chr => {
            let dec = cliques.as_ref().expect("set above");
            let mut p = BTreeSet::new();
            for c in &dec.cliques {
                for (a, &k) in c.iter().enumerate() {
                    p.extend(c[a + 1..].iter().map(|&m| (k.min(m), k.max(m))));
                }
            }
            p
        }
    };
    let (mut prog, vars) = build_shared_core(network, objective, &pairs, kind.has_voltages())?;
    let mut rank_blocks = Vec::new();
    let mut psd_blocks = Vec::new();
    match kind {
        RelaxationKind::Sdr => {
            let buses: Vec<usize> = (0..n).collect();
            let map = submatrix(&vars, &buses)?;
            rank_blocks.push(map.clone());
            psd_blocks.push(add_hermitian_psd(&mut prog, map, "V")?);
        }
        RelaxationKind::Chr => {
            for (i, c) in cliques.as_ref().expect("set above").cliques.iter().enumerate() {
                let map = submatrix(&vars, c)?;
                rank_blocks.push(map.clone());
                psd_blocks.push(add_hermitian_psd(&mut prog, map, format!("clique {}", i + 1))?);
            }
        }
        RelaxationKind::Socr => {
            for &(k, m) in &lines {
                let (re, im) = vars.pairs[&(k, m)];
                let (dk, dm) = (vars.v_diag[k], vars.v_diag[m]);
                let label = format!("pair {}-{}", network.buses[k].id, network.buses[m].id);
                if options.socr_3x3 {
                    psd_blocks.push(add_socr_3x3(&mut prog, dk, dm, re, im, label)?);
                } else {
                    add_rotated_2x2(&mut prog, dk, dm, re, im, label)?;
                }
                rank_blocks.push(submatrix(&vars, &[k, m])?);
            }
        }
        RelaxationKind::Nsdr => {
            let bus0 = &network.buses[0];
            reference_bus_rlt(&mut prog, &vars, bus0.v_min, bus0.v_max)?;
            let buses: Vec<usize> = (0..n).collect();
            rank_blocks.push(submatrix(&vars, &buses)?);
            psd_blocks.push(add_hermitian_psd(&mut prog, bordered(&vars, &buses)?, "[1 v^H; v V]")?);
        }
        RelaxationKind::Tcr => {
            let bus0 = &network.buses[0];
            reference_bus_rlt(&mut prog, &vars, bus0.v_min, bus0.v_max)?;
            for (l, br) in network.branches.iter().enumerate() {
                let map = bordered(&vars, &[br.from, br.to])?;
                rank_blocks.push(map.clone());
                psd_blocks.push(add_hermitian_psd(&mut prog, map, format!("branch {}", l + 1))?);
            }
        }
        RelaxationKind::Stcr => {
            for (l, br) in network.branches.iter().enumerate() {
                let buses: Vec<usize> = BTreeSet::from([0, br.from, br.to]).into_iter().collect();
                let map = submatrix(&vars, &buses)?;
                rank_blocks.push(map.clone());
                psd_blocks.push(add_hermitian_psd(&mut prog, map, format!("branch {}", l + 1))?);
            }
        }
    }
    Ok(Relaxation {
        kind,
        options,
        program: prog,
        vars,
        objective: objective.clone(),
        rank_blocks,
        psd_blocks,
        cliques,
    })
}
