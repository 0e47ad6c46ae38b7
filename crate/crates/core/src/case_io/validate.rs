use std::collections::HashMap;

use num_complex::Complex64;

use super::{Branch, Bus, CaseError, Generator, Network, RawCase, RawGenCost};

const REFERENCE: f64 = 3.0;

fn invalid(msg: impl Into<String>) -> CaseError {
    CaseError::Invalid(msg.into())
}

fn bus_number(v: f64, line: usize) -> Result<usize, CaseError> {
    if v >= 1.0 && v.fract() == 0.0 && v < u32::MAX as f64 {
        Ok(v as usize)
    } else {
        Err(CaseError::Parse {
            line,
            message: format!("invalid bus number {v}"),
        })
    }
}

/// `(c2, c1, c0)` in MW-based units from a polynomial gencost row.
fn quadratic(cost: &RawGenCost) -> Result<(f64, f64, f64), CaseError> {
    if cost.model != 2.0 {
        return Err(CaseError::Unsupported(format!(
            "gencost model {} on line {} (only polynomial costs are supported)",
            cost.model, cost.line
        )));
    }
    let k = cost.coefficients.len();
    let (high, low) = cost.coefficients.split_at(k.saturating_sub(3));
    if high.iter().any(|&c| c != 0.0) {
        return Err(CaseError::Unsupported(format!(
            "polynomial cost of degree {} on line {}",
            k - 1,
            cost.line
        )));
    }
    let mut c = [0.0; 3];
    c[3 - low.len()..].copy_from_slice(low);
    Ok((c[0], c[1], c[2]))
}

/// Converts raw tables to a per-unit network with the reference bus at index 0.
pub fn validate(raw: &RawCase) -> Result<Network, CaseError> {
    let base = raw.base_mva;
    if !(base > 0.0 && base.is_finite()) {
        return Err(invalid(format!("baseMVA must be positive, got {base}")));
    }
    let refs: Vec<_> = raw.bus.iter().filter(|b| b.kind == REFERENCE).collect();
    let reference = match refs.as_slice() {
        [one] => bus_number(one.id, one.line)?,
        [] => return Err(invalid("no reference bus (type 3)")),
        _ => return Err(invalid(format!("{} reference buses; exactly one expected", refs.len()))),
    };

    // Reference bus first, then file order.
    let mut order: Vec<&super::RawBus> = Vec::with_capacity(raw.bus.len());
    order.extend(refs.iter().copied());
    order.extend(raw.bus.iter().filter(|b| b.kind != REFERENCE));
    let mut index = HashMap::new();
    let mut buses = Vec::with_capacity(order.len());
    for b in order {
        let id = bus_number(b.id, b.line)?;
        if index.insert(id, buses.len()).is_some() {
            return Err(CaseError::Parse {
                line: b.line,
                message: format!("duplicate bus number {id}"),
            });
        }
        buses.push(Bus {
            id,
            p_demand: b.pd / base,
            q_demand: b.qd / base,
            shunt_g: b.gs / base,
            shunt_b: b.bs / base,
            v_min: b.vmin,
            v_max: b.vmax,
        });
    }
    debug_assert_eq!(index[&reference], 0);
    let resolve = |v: f64, line: usize| -> Result<usize, CaseError> {
        let id = bus_number(v, line)?;
        index
            .get(&id)
            .copied()
            .ok_or_else(|| invalid(format!("line {line}: unknown bus {id}")))
    };

    if raw.gencost.len() < raw.gen.len() {
        return Err(invalid(format!(
            "{} generators but only {} gencost rows",
            raw.gen.len(),
            raw.gencost.len()
        )));
    }
    let mut generators = Vec::new();
    for (g, cost) in raw.gen.iter().zip(&raw.gencost) {
        let bus = resolve(g.bus, g.line)?;
        if g.status <= 0.0 {
            continue;
        }
        let (c2, c1, c0) = quadratic(cost)?;
        generators.push(Generator {
            bus,
            p_min: g.pmin / base,
            p_max: g.pmax / base,
            q_min: g.qmin / base,
            q_max: g.qmax / base,
            c2: c2 * base * base,
            c1: c1 * base,
            c0,
        });
    }

    let mut branches = Vec::new();
    for br in &raw.branch {
        let from = resolve(br.from, br.line)?;
        let to = resolve(br.to, br.line)?;
        if br.status <= 0.0 {
            continue;
        }
        let z = Complex64::new(br.r, br.x);
        if z.norm() == 0.0 {
            return Err(invalid(format!("line {}: branch with zero series impedance", br.line)));
        }
        if from == to {
            return Err(invalid(format!("line {}: branch connects bus {} to itself", br.line, br.from)));
        }
        let ratio = if br.ratio == 0.0 { 1.0 } else { br.ratio };
        branches.push(Branch {
            from,
            to,
            series_admittance: z.inv(),
            charging_b: br.b,
            tap: Complex64::from_polar(ratio, br.angle.to_radians()),
            s_limit: if br.rate_a == 0.0 { None } else { Some(br.rate_a / base) },
        });
    }

    let mut net = Network {
        name: raw.name.clone().unwrap_or_else(|| "case".to_string()),
        base_mva: base,
        buses,
        generators,
        branches,
        reference_bus: 0,
        warnings: Vec::new(),
    };
    check_network(&net)?;
    net.warnings = isolated_bus_warnings(&net);
    Ok(net)
}

fn isolated_bus_warnings(net: &Network) -> Vec<String> {
    let mut connected = vec![false; net.num_buses()];
    for br in &net.branches {
        connected[br.from] = true;
        connected[br.to] = true;
    }
    let mut has_gen = vec![false; net.num_buses()];
    for g in &net.generators {
        has_gen[g.bus] = true;
    }
    net.buses
        .iter()
        .enumerate()
        .filter(|&(k, b)| !connected[k] && !has_gen[k] && b.p_demand > 0.0)
        .map(|(_, b)| format!("bus {} has demand but no branch or generator", b.id))
        .collect()
}

pub(super) fn check_network(net: &Network) -> Result<(), CaseError> {
    if !(net.base_mva > 0.0) {
        return Err(invalid("baseMVA must be positive"));
    }
    if net.buses.is_empty() {
        return Err(invalid("network has no buses"));
    }
    if net.reference_bus != 0 {
        return Err(invalid("reference bus must have internal index 0"));
    }
    let n = net.num_buses();
    for b in &net.buses {
        if !(b.v_min > 0.0) {
            return Err(invalid(format!("bus {}: Vmin must be positive, got {}", b.id, b.v_min)));
        }
        if !(b.v_min <= b.v_max) {
            return Err(invalid(format!("bus {}: Vmin {} exceeds Vmax {}", b.id, b.v_min, b.v_max)));
        }
    }
    for (i, g) in net.generators.iter().enumerate() {
        if g.bus >= n {
            return Err(invalid(format!("generator {i} references a missing bus")));
        }
        if !(g.p_min <= g.p_max) || !(g.q_min <= g.q_max) {
            return Err(invalid(format!("generator {i} at bus {}: inverted limits", net.buses[g.bus].id)));
        }
        if g.c2 < 0.0 {
            return Err(invalid(format!(
                "generator {i} at bus {}: negative quadratic cost makes the objective nonconvex",
                net.buses[g.bus].id
            )));
        }
    }
    for (i, br) in net.branches.iter().enumerate() {
        if br.from >= n || br.to >= n {
            return Err(invalid(format!("branch {i} references a missing bus")));
        }
        if br.series_admittance.norm() == 0.0 || !br.series_admittance.is_finite() {
            return Err(invalid(format!("branch {i}: degenerate series admittance")));
        }
        if !(br.tap.norm() > 0.0) {
            return Err(invalid(format!("branch {i}: tap magnitude must be positive")));
        }
        if let Some(s) = br.s_limit {
            if !(s > 0.0) {
                return Err(invalid(format!("branch {i}: apparent-power limit must be positive")));
            }
        }
    }
    Ok(())
}
