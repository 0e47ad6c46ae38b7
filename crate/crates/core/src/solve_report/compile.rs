//! Reduction of a [`ConicProgram`] to `min cᵀz, Az = b, z ∈ K` over cone slots only.
//!
//! Program variables are free, so each one is removed:
//!
//! * the first cone output that is exactly `a·x + c` owns `x`, which becomes a
//!   linear function of that block's slots;
//! * the rest are eliminated by pivoting on the sparsest equality containing them.
//!
//! Hermitian blocks expose each complex entry as the average over the two
//! symmetric copies in the real embedding. Averaging a PSD embedding over that
//! symmetry keeps it PSD, so no rows are needed to tie the copies together.

use std::collections::HashSet;

use conic_ipm::svec::svec_index;
use conic_ipm::{Cone, Problem};

use crate::conic_form::{ConeBlock, ConeKind, ConicProgram, LinExpr};

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Sparse row over program variables `0..nx` followed by slots `nx..`.
type Row = Vec<(usize, f64)>;

#[derive(Debug, Clone)]
struct Constraint {
    row: Row,
    rhs: f64,
    label: String,
}

/// Pivot row `coef·x + rest = rhs` kept for back-substitution.
#[derive(Debug, Clone)]
struct Eliminated {
    var: usize,
    coef: f64,
    row: Row,
    rhs: f64,
}

#[derive(Debug, Clone)]
pub(crate) enum Outcome {
    Ready,
    /// A free variable with a cost appears in no constraint.
    Unbounded(String),
    /// A constraint reduced to `0 = rhs` with `rhs ≠ 0`.
    Infeasible(String),
}

#[derive(Debug, Clone)]
pub(crate) struct Compiled {
    pub problem: Problem,
    pub offset: f64,
    pub outcome: Outcome,
    pub row_labels: Vec<String>,
    /// Slot range of each program block.
    pub block_slots: Vec<std::ops::Range<usize>>,
    nx: usize,
    owned: Vec<Option<(Row, f64, f64)>>,
    eliminated: Vec<Eliminated>,
}

/// Linear functionals of a block's slots, one per cone entry to be matched.
fn outputs(block: &ConeBlock, start: usize) -> Vec<(Row, LinExpr)> {
    let e = &block.entries;
    match block.kind {
        ConeKind::Nonnegative | ConeKind::SecondOrder => {
            e.iter().enumerate().map(|(i, x)| (vec![(start + i, 1.0)], x.clone())).collect()
        }
        ConeKind::RotatedSecondOrder => {
            // u = (z0 + z1)/√2, v = (z0 − z1)/√2 turns 2uv ≥ ‖x‖² into z0 ≥ ‖(z1, x)‖.
            let mut out = vec![
                (vec![(start, FRAC_1_SQRT_2), (start + 1, FRAC_1_SQRT_2)], e[0].clone()),
                (vec![(start, FRAC_1_SQRT_2), (start + 1, -FRAC_1_SQRT_2)], e[1].clone()),
            ];
            out.extend(e[2..].iter().enumerate().map(|(i, x)| (vec![(start + 2 + i, 1.0)], x.clone())));
            out
        }
        ConeKind::Psd { side } => {
            let slot = |i: usize, j: usize| {
                let k = start + svec_index(side, i, j);
                (k, if i == j { 1.0 } else { FRAC_1_SQRT_2 })
            };
            match &block.hermitian {
                None => (0..side)
                    .flat_map(|j| (j..side).map(move |i| (i, j)))
                    .zip(e.iter())
                    .map(|((i, j), x)| (vec![slot(i, j)], x.clone()))
                    .collect(),
                Some(map) => {
                    let n = map.side();
                    let mut out = Vec::new();
                    for ((i, j), h) in map.iter() {
                        let (a, ca) = slot(i, j);
                        let (b, cb) = slot(n + i, n + j);
                        out.push((vec![(a, 0.5 * ca), (b, 0.5 * cb)], h.re.clone()));
                        if i != j {
                            let (a, ca) = slot(n + i, j);
                            let (b, cb) = slot(n + j, i);
                            out.push((
                                vec![(a, 0.5 * ca), (b, -0.5 * cb)],
                                h.im.clone().unwrap_or_default(),
                            ));
                        }
                    }
                    out
                }
            }
        }
    }
}

fn normalize(mut row: Row) -> Row {
    row.sort_unstable_by_key(|&(k, _)| k);
    let mut out: Row = Vec::with_capacity(row.len());
    for (k, v) in row {
        match out.last_mut() {
            Some((j, w)) if *j == k => *w += v,
            _ => out.push((k, v)),
        }
    }
    out.retain(|&(_, v)| v != 0.0);
    out
}

/// `a + f·b` for sorted rows, dropping `var` and round-off cancellations.
fn axpy(a: &Row, f: f64, b: &Row, var: usize) -> Row {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let (k, v, scale) = match (a.get(i), b.get(j)) {
            (Some(&(ka, va)), Some(&(kb, vb))) if ka == kb => {
                i += 1;
                j += 1;
                (ka, va + f * vb, va.abs() + (f * vb).abs())
            }
            (Some(&(ka, va)), Some(&(kb, _))) if ka < kb => {
                i += 1;
                (ka, va, va.abs())
            }
            (Some(&(ka, va)), None) => {
                i += 1;
                (ka, va, va.abs())
            }
            (_, Some(&(kb, vb))) => {
                j += 1;
                (kb, f * vb, (f * vb).abs())
            }
            (None, None) => unreachable!(),
        };
        if k != var && v.abs() > 1e-14 * scale {
            out.push((k, v));
        }
    }
    out
}

fn coef(row: &Row, var: usize) -> f64 {
    row.binary_search_by_key(&var, |&(k, _)| k).map_or(0.0, |p| row[p].1)
}

pub(crate) fn compile(prog: &ConicProgram) -> Compiled {
    let nx = prog.num_vars();

    // Nonnegative entries share one orthant at the front.
    let mut block_slots = vec![0..0; prog.blocks().len()];
    let mut cones = Vec::new();
    let mut next = 0;
    for (b, block) in prog.blocks().iter().enumerate() {
        if block.kind == ConeKind::Nonnegative {
            block_slots[b] = next..next + block.entries.len();
            next += block.entries.len();
        }
    }
    if next > 0 {
        cones.push(Cone::Nonnegative(next));
    }
    for (b, block) in prog.blocks().iter().enumerate() {
        let cone = match block.kind {
            ConeKind::Nonnegative => continue,
            ConeKind::SecondOrder | ConeKind::RotatedSecondOrder => Cone::SecondOrder(block.entries.len()),
            ConeKind::Psd { side } => Cone::Psd(side),
        };
        block_slots[b] = next..next + cone.dim();
        next += cone.dim();
        cones.push(cone);
    }
    let nz = next;

    // Cone outputs: the first bare occurrence owns a variable, the rest are rows.
    let mut owned: Vec<Option<(Row, f64, f64)>> = vec![None; nx];
    let mut constraints: Vec<Constraint> = Vec::new();
    for (b, block) in prog.blocks().iter().enumerate() {
        for (k, (f, expr)) in outputs(block, block_slots[b].start).into_iter().enumerate() {
            let f: Row = f.into_iter().map(|(s, c)| (nx + s, c)).collect();
            let expr = expr.simplified();
            if let Some((v, a)) = expr.single() {
                if owned[v].is_none() {
                    owned[v] = Some((f, a, expr.constant));
                    continue;
                }
            }
            let mut row = f;
            row.extend(expr.terms.iter().map(|&(v, c)| (v, -c)));
            constraints.push(Constraint {
                row,
                rhs: expr.constant,
                label: format!("{} [{}]", block.label, k),
            });
        }
    }
    for eq in prog.equalities() {
        constraints.push(Constraint {
            row: eq.expr.terms.clone(),
            rhs: -eq.expr.constant,
            label: eq.label.clone(),
        });
    }

    // Substitute owned variables: x = (f·z − c)/a.
    let substitute = |row: &Row, rhs: &mut f64| -> Row {
        let mut out = Vec::with_capacity(row.len());
        for &(k, v) in row {
            match owned.get(k).and_then(Option::as_ref) {
                Some((f, a, c)) => {
                    out.extend(f.iter().map(|&(s, w)| (s, v * w / a)));
                    *rhs += v * c / a;
                }
                None => out.push((k, v)),
            }
        }
        normalize(out)
    };
    for c in &mut constraints {
        c.row = substitute(&c.row, &mut c.rhs);
    }
    let mut offset = prog.objective().constant;
    let mut obj_rhs = 0.0;
    let mut objective = substitute(&prog.objective().clone().simplified().terms, &mut obj_rhs);
    offset -= obj_rhs;

    // Eliminate the remaining free variables.
    let mut cols: Vec<HashSet<usize>> = vec![HashSet::new(); nx];
    for (r, c) in constraints.iter().enumerate() {
        for &(k, _) in &c.row {
            if k < nx {
                cols[k].insert(r);
            }
        }
    }
    let mut live = vec![true; constraints.len()];
    let mut order: Vec<usize> = (0..nx).filter(|&v| owned[v].is_none()).collect();
    order.sort_by_key(|&v| (cols[v].len(), v));
    let mut eliminated = Vec::new();
    let mut outcome = Outcome::Ready;
    for &var in &order {
        let mut rows: Vec<usize> = cols[var]
            .iter()
            .copied()
            .filter(|&r| live[r] && coef(&constraints[r].row, var) != 0.0)
            .collect();
        rows.sort_unstable();
        if rows.is_empty() {
            if coef(&objective, var) != 0.0 {
                outcome = Outcome::Unbounded(format!("`{}` is free and has a cost", prog.var_name(var)));
            }
            continue;
        }
        let big = rows
            .iter()
            .map(|&r| coef(&constraints[r].row, var).abs())
            .fold(0.0, f64::max);
        let pivot = *rows
            .iter()
            .filter(|&&r| coef(&constraints[r].row, var).abs() >= 0.01 * big)
            .min_by_key(|&&r| (constraints[r].row.len(), r))
            .expect("largest coefficient qualifies");
        live[pivot] = false;
        let p = constraints[pivot].clone();
        let a = coef(&p.row, var);
        for &r in rows.iter().filter(|&&r| r != pivot) {
            let f = -coef(&constraints[r].row, var) / a;
            let c = &mut constraints[r];
            c.row = axpy(&c.row, f, &p.row, var);
            c.rhs += f * p.rhs;
            for &(k, _) in &p.row {
                if k < nx && k != var {
                    cols[k].insert(r);
                }
            }
        }
        let cv = coef(&objective, var);
        if cv != 0.0 {
            objective = axpy(&objective, -cv / a, &p.row, var);
            offset += cv / a * p.rhs;
        }
        eliminated.push(Eliminated {
            var,
            coef: a,
            row: p.row,
            rhs: p.rhs,
        });
    }

    // Whatever is left references slots only.
    let mut entries = Vec::new();
    let mut b = Vec::new();
    let mut row_labels = Vec::new();
    for (r, c) in constraints.into_iter().enumerate() {
        if !live[r] {
            continue;
        }
        debug_assert!(c.row.iter().all(|&(k, _)| k >= nx));
        if c.row.is_empty() {
            if c.rhs.abs() > 1e-9 * (1.0 + c.rhs.abs()) && matches!(outcome, Outcome::Ready) {
                outcome = Outcome::Infeasible(format!("`{}` reduces to 0 = {}", c.label, c.rhs));
            }
            continue;
        }
        let i = b.len();
        entries.extend(c.row.iter().map(|&(k, v)| (i, k - nx, v)));
        b.push(c.rhs);
        row_labels.push(c.label);
    }
    let mut cz = vec![0.0; nz];
    for &(k, v) in &objective {
        if k >= nx {
            cz[k - nx] += v;
        }
    }
    Compiled {
        problem: Problem {
            num_rows: b.len(),
            entries,
            b,
            c: cz,
            cones,
        },
        offset,
        outcome,
        row_labels,
        block_slots,
        nx,
        owned,
        eliminated,
    }
}

impl Compiled {
    /// Program variables from cone slots `z`.
    pub fn recover(&self, z: &[f64]) -> Vec<f64> {
        let nx = self.nx;
        let mut x = vec![0.0; nx];
        for (v, def) in self.owned.iter().enumerate() {
            if let Some((f, a, c)) = def {
                x[v] = (f.iter().map(|&(s, w)| w * z[s - nx]).sum::<f64>() - c) / a;
            }
        }
        for e in self.eliminated.iter().rev() {
            let rest: f64 = e
                .row
                .iter()
                .filter(|&&(k, _)| k != e.var)
                .map(|&(k, w)| w * if k < nx { x[k] } else { z[k - nx] })
                .sum();
            x[e.var] = (e.rhs - rest) / e.coef;
        }
        x
    }
}
