use std::collections::{BTreeMap, BTreeSet};

use crate::case_io::Network;
use crate::conic_form::{
    add_apparent_power_limit, add_quadratic_cost_epigraph, ConicProgram, HermitianEntry, LinExpr, ModelError,
};
use crate::network_model::{branch_coefficients, incidence, ObjectiveSpec};

/// Variable indices of the lifted model.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftedVariables {
    pub v_diag: Vec<usize>,
    /// `(k, m)` with `k < m` to the indices of `(Re V_km, Im V_km)`.
    pub pairs: BTreeMap<(usize, usize), (usize, usize)>,
    pub pg: Vec<usize>,
    pub qg: Vec<usize>,
    pub pf: Vec<usize>,
    pub qf: Vec<usize>,
    pub pt: Vec<usize>,
    pub qt: Vec<usize>,
    /// `(Re v_k, Im v_k)` when the relaxation carries voltages.
    pub v: Option<Vec<(usize, usize)>>,
    pub cost_aux: Vec<Option<usize>>,
}

impl LiftedVariables {
    /// `V_km` as real and imaginary expressions, for either orientation.
    pub fn complex(&self, k: usize, m: usize) -> Result<(LinExpr, LinExpr), ModelError> {
        if k == m {
            return Ok((LinExpr::var(self.v_diag[k]), LinExpr::zero()));
        }
        let &(re, im) = self
            .pairs
            .get(&(k.min(m), k.max(m)))
            .ok_or(ModelError::MissingPair(k, m))?;
        let sign = if k < m { 1.0 } else { -1.0 };
        Ok((LinExpr::var(re), LinExpr::term(im, sign)))
    }

    /// `V_km` as a Hermitian matrix entry.
    pub fn entry(&self, k: usize, m: usize) -> Result<HermitianEntry, ModelError> {
        let (re, im) = self.complex(k, m)?;
        Ok(HermitianEntry {
            re,
            im: (k != m).then_some(im),
        })
    }
}

/// `Re(c·z)` and `Im(c·z)` for `z = (re, im)`.
fn cmul(c: num_complex::Complex64, re: &LinExpr, im: &LinExpr) -> (LinExpr, LinExpr) {
    (
        re.clone() * c.re - im.clone() * c.im,
        re.clone() * c.im + im.clone() * c.re,
    )
}

/// Variables, power balance, branch flows, operating limits and the objective
/// shared by every relaxation, with `V_km` registered for each of `pairs`.
pub fn build_shared_core(
    network: &Network,
    objective: &ObjectiveSpec,
    pairs: &BTreeSet<(usize, usize)>,
    with_voltages: bool,
) -> Result<(ConicProgram, LiftedVariables), ModelError> {
    let mut prog = ConicProgram::new();
    let id = |k: usize| network.buses[k].id;
    let n = network.num_buses();

    let v_diag = (0..n)
        .map(|k| prog.add_var(format!("V[{},{}]", id(k), id(k))))
        .collect::<Result<Vec<_>, _>>()?;
    let mut pair_vars = BTreeMap::new();
    for &(k, m) in pairs {
        if k >= m || m >= n {
            return Err(ModelError::Argument(format!("invalid bus pair ({k}, {m})")));
        }
        let re = prog.add_var(format!("ReV[{},{}]", id(k), id(m)))?;
        let im = prog.add_var(format!("ImV[{},{}]", id(k), id(m)))?;
        pair_vars.insert((k, m), (re, im));
    }
    let v = if with_voltages {
        let mut v = Vec::with_capacity(n);
        for k in 0..n {
            v.push((
                prog.add_var(format!("Rev[{}]", id(k)))?,
                prog.add_var(format!("Imv[{}]", id(k)))?,
            ));
        }
        Some(v)
    } else {
        None
    };
    let ng = network.generators.len();
    let nl = network.branches.len();
    let mut vars = LiftedVariables {
        v_diag,
        pairs: pair_vars,
        pg: Vec::with_capacity(ng),
        qg: Vec::with_capacity(ng),
        pf: Vec::with_capacity(nl),
        qf: Vec::with_capacity(nl),
        pt: Vec::with_capacity(nl),
        qt: Vec::with_capacity(nl),
        v,
        cost_aux: Vec::with_capacity(ng),
    };
    for g in 0..ng {
        vars.pg.push(prog.add_var(format!("pG[{}]", g + 1))?);
        vars.qg.push(prog.add_var(format!("qG[{}]", g + 1))?);
    }
    for l in 0..nl {
        vars.pf.push(prog.add_var(format!("pf[{}]", l + 1))?);
        vars.qf.push(prog.add_var(format!("qf[{}]", l + 1))?);
        vars.pt.push(prog.add_var(format!("pt[{}]", l + 1))?);
        vars.qt.push(prog.add_var(format!("qt[{}]", l + 1))?);
    }

    // Branch flows, linear in V.
    for (l, br) in network.branches.iter().enumerate() {
        let c = branch_coefficients(br).map_err(|e| ModelError::Argument(format!("branch {}: {e}", l + 1)))?;
        let (k, m) = (br.from, br.to);
        let (km_re, km_im) = vars.complex(k, m)?;
        let (mk_re, mk_im) = vars.complex(m, k)?;
        let vkk = LinExpr::var(vars.v_diag[k]);
        let vmm = LinExpr::var(vars.v_diag[m]);
        let (fr, fi) = cmul(c.c_ft, &km_re, &km_im);
        let (tr, ti) = cmul(c.c_tf, &mk_re, &mk_im);
        let label = |s: &str| format!("{s} flow {}-{} #{}", id(k), id(m), l + 1);
        prog.add_equality(
            (vkk.clone() * c.c_ff.re + fr - LinExpr::var(vars.pf[l])).simplified(),
            label("p_from"),
        )?;
        prog.add_equality(
            (vkk * c.c_ff.im + fi - LinExpr::var(vars.qf[l])).simplified(),
            label("q_from"),
        )?;
        prog.add_equality(
            (vmm.clone() * c.c_tt.re + tr - LinExpr::var(vars.pt[l])).simplified(),
            label("p_to"),
        )?;
        prog.add_equality(
            (vmm * c.c_tt.im + ti - LinExpr::var(vars.qt[l])).simplified(),
            label("q_to"),
        )?;
        if let Some(s) = br.s_limit {
            add_apparent_power_limit(&mut prog, vars.pf[l], vars.qf[l], s, label("limit"))?;
            add_apparent_power_limit(&mut prog, vars.pt[l], vars.qt[l], s, label("limit"))?;
        }
    }

    // Power balance: generation − demand − shunt − outgoing flows = 0.
    let inc = incidence(network);
    for (k, bus) in network.buses.iter().enumerate() {
        let mut p = LinExpr::constant(-bus.p_demand) - LinExpr::term(vars.v_diag[k], bus.shunt_g);
        let mut q = LinExpr::constant(-bus.q_demand) + LinExpr::term(vars.v_diag[k], bus.shunt_b);
        for &g in &inc.generators[k] {
            p = p + LinExpr::var(vars.pg[g]);
            q = q + LinExpr::var(vars.qg[g]);
        }
        for &l in &inc.from_branches[k] {
            p = p - LinExpr::var(vars.pf[l]);
            q = q - LinExpr::var(vars.qf[l]);
        }
        for &l in &inc.to_branches[k] {
            p = p - LinExpr::var(vars.pt[l]);
            q = q - LinExpr::var(vars.qt[l]);
        }
        prog.add_equality(p.simplified(), format!("p balance {}", bus.id))?;
        prog.add_equality(q.simplified(), format!("q balance {}", bus.id))?;
    }

    // Voltage magnitude bounds on V_kk.
    for (k, bus) in network.buses.iter().enumerate() {
        add_range(
            &mut prog,
            vars.v_diag[k],
            bus.v_min * bus.v_min,
            bus.v_max * bus.v_max,
            &format!("V bounds {}", bus.id),
        )?;
    }

    // Generator limits and cost.
    if objective.costs.len() != ng {
        return Err(ModelError::Argument(format!(
            "objective has {} cost entries for {ng} generators",
            objective.costs.len()
        )));
    }
    for (g, gen) in network.generators.iter().enumerate() {
        add_range(&mut prog, vars.pg[g], gen.p_min, gen.p_max, &format!("pG bounds {}", g + 1))?;
        add_range(&mut prog, vars.qg[g], gen.q_min, gen.q_max, &format!("qG bounds {}", g + 1))?;
        let c = objective.costs[g];
        let aux = add_quadratic_cost_epigraph(&mut prog, vars.pg[g], c.c2, c.c1, c.c0, &format!("cost[{}]", g + 1))?;
        vars.cost_aux.push(aux);
    }
    Ok((prog, vars))
}

/// `lo ≤ x ≤ hi`; infinite sides are skipped and equal bounds become an equality.
fn add_range(prog: &mut ConicProgram, x: usize, lo: f64, hi: f64, label: &str) -> Result<(), ModelError> {
    if lo == hi {
        prog.add_equality(LinExpr::var(x) - lo, label)?;
        return Ok(());
    }
    if lo.is_finite() {
        prog.add_nonnegative(LinExpr::var(x) - lo, format!("{label} lower"))?;
    }
    if hi.is_finite() {
        prog.add_nonnegative(LinExpr::constant(hi) - LinExpr::var(x), format!("{label} upper"))?;
    }
    Ok(())
}
