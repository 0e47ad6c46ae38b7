use std::collections::HashMap;

use conic_ipm::svec::svec_dim;

use super::{BlockId, ConeBlock, ConeKind, ConicProgram, HermitianBlockMap, HermitianEntry, LinExpr, ModelError};

/// Constrains the Hermitian matrix described by `map` to be PSD through its real
/// embedding `[X, -Y; Y, X]` of twice the side.
pub fn add_hermitian_psd(
    prog: &mut ConicProgram,
    map: HermitianBlockMap,
    label: impl Into<String>,
) -> Result<BlockId, ModelError> {
    let label = label.into();
    let bad = |message: String| ModelError::InconsistentPlacement {
        block: label.clone(),
        message,
    };
    let n = map.side();
    if n == 0 {
        return Err(bad("empty Hermitian block".into()));
    }
    // A bare variable may sit at only one position of the block.
    let mut seen: HashMap<usize, (usize, usize)> = HashMap::new();
    for ((i, j), e) in map.iter() {
        if i == j && e.im.is_some() {
            return Err(bad(format!("diagonal entry ({i}, {i}) has an imaginary part")));
        }
        for part in std::iter::once(&e.re).chain(e.im.as_ref()) {
            if let Some((v, _)) = part.single() {
                if let Some(prev) = seen.insert(v, (i, j)) {
                    return Err(bad(format!(
                        "variable `{}` placed at ({}, {}) and ({i}, {j})",
                        prog.var_name(v),
                        prev.0,
                        prev.1
                    )));
                }
            }
        }
    }
    let side = 2 * n;
    let mut entries = Vec::with_capacity(svec_dim(side));
    for c in 0..side {
        for r in c..side {
            let (i, j) = (r % n, c % n);
            let e = if (r < n) == (c < n) {
                map.entry(i.max(j), i.min(j)).re.clone()
            } else if i == j {
                LinExpr::zero()
            } else {
                // Lower-left quadrant holds Y = Im H.
                let im = map.entry(i.max(j), i.min(j)).im.clone().unwrap_or_default();
                if i > j {
                    im
                } else {
                    -im
                }
            };
            entries.push(e);
        }
    }
    prog.add_block(ConeBlock {
        kind: ConeKind::Psd { side },
        entries,
        hermitian: Some(map),
        label,
    })
}

/// Adds `c2 p² + c1 p + c0` to the objective. A positive `c2` introduces an
/// auxiliary `s ≥ c2 p²` written as `(s, ½, √c2 p)` in a rotated cone.
pub fn add_quadratic_cost_epigraph(
    prog: &mut ConicProgram,
    p: usize,
    c2: f64,
    c1: f64,
    c0: f64,
    name: &str,
) -> Result<Option<usize>, ModelError> {
    if c2 < 0.0 {
        return Err(ModelError::NonConvexCost(c2));
    }
    if p >= prog.num_vars() {
        return Err(ModelError::UnknownVariable(p));
    }
    let mut obj = LinExpr::term(p, c1) + c0;
    let aux = if c2 > 0.0 {
        let s = prog.add_var(name)?;
        prog.add_block(ConeBlock {
            kind: ConeKind::RotatedSecondOrder,
            entries: vec![LinExpr::var(s), LinExpr::constant(0.5), LinExpr::term(p, c2.sqrt())],
            hermitian: None,
            label: name.to_string(),
        })?;
        obj = obj + LinExpr::var(s);
        Some(s)
    } else {
        None
    };
    prog.add_objective(&obj.simplified())?;
    Ok(aux)
}

/// `‖(p, q)‖ ≤ s_limit`; nothing is added for an infinite limit.
pub fn add_apparent_power_limit(
    prog: &mut ConicProgram,
    p: usize,
    q: usize,
    s_limit: f64,
    label: impl Into<String>,
) -> Result<Option<BlockId>, ModelError> {
    if s_limit == f64::INFINITY {
        return Ok(None);
    }
    if !(s_limit > 0.0) {
        return Err(ModelError::NonPositiveLimit(s_limit));
    }
    prog.add_block(ConeBlock {
        kind: ConeKind::SecondOrder,
        entries: vec![LinExpr::constant(s_limit), LinExpr::var(p), LinExpr::var(q)],
        hermitian: None,
        label: label.into(),
    })
    .map(Some)
}

/// `V_kk V_mm ≥ (Re V_km)² + (Im V_km)²` with `V_kk, V_mm ≥ 0`, i.e. the 2×2
/// Hermitian block `[V_kk, V_km; V_mk, V_mm] ⪰ 0`.
pub fn add_rotated_2x2(
    prog: &mut ConicProgram,
    vkk: usize,
    vmm: usize,
    re: usize,
    im: usize,
    label: impl Into<String>,
) -> Result<BlockId, ModelError> {
    prog.add_block(ConeBlock {
        kind: ConeKind::RotatedSecondOrder,
        entries: vec![
            LinExpr::var(vkk),
            LinExpr::term(vmm, 0.5),
            LinExpr::var(re),
            LinExpr::var(im),
        ],
        hermitian: None,
        label: label.into(),
    })
}

/// The same set as [`add_rotated_2x2`] written as the 3×3 Hermitian block
///
/// ```text
/// [ a       0   2V_km ]
/// [ 0       a   d     ]    a = V_kk + V_mm,  d = V_kk - V_mm
/// [ 2V_mk   d   a     ]
/// ```
pub fn add_socr_3x3(
    prog: &mut ConicProgram,
    vkk: usize,
    vmm: usize,
    re: usize,
    im: usize,
    label: impl Into<String>,
) -> Result<BlockId, ModelError> {
    let a = LinExpr::var(vkk) + LinExpr::var(vmm);
    let d = LinExpr::var(vkk) - LinExpr::var(vmm);
    let map = HermitianBlockMap::from_fn(3, |i, j| match (i, j) {
        (0, 0) | (1, 1) | (2, 2) => HermitianEntry { re: a.clone(), im: None },
        (1, 0) => HermitianEntry {
            re: LinExpr::zero(),
            im: Some(LinExpr::zero()),
        },
        (2, 0) => HermitianEntry {
            re: LinExpr::term(re, 2.0),
            im: Some(LinExpr::term(im, -2.0)),
        },
        _ => HermitianEntry {
            re: d.clone(),
            im: Some(LinExpr::zero()),
        },
    });
    add_hermitian_psd(prog, map, label)
}
