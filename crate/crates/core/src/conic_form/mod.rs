//! Solver-agnostic conic programs over named scalar variables.
//!
//! Variables are free reals. Every cone entry is an affine expression of them,
//! so a block can carry constants (the `1` in a bordered matrix) and negated
//! entries (the `-Y` quadrant of a Hermitian embedding) without extra rows.
//! The solver backend turns this into standard form.
//!
//! Rotated cones follow `2uv ≥ ‖x‖²`, `u, v ≥ 0`.

mod expr;
mod gadgets;

pub use expr::LinExpr;
pub use gadgets::{
    add_apparent_power_limit, add_hermitian_psd, add_quadratic_cost_epigraph, add_rotated_2x2, add_socr_3x3,
};

use std::collections::HashMap;
use std::fmt::Write as _;

use conic_ipm::svec::{svec_dim, svec_index};
use faer::{Mat, Side};
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("variable index {0} does not exist")]
    UnknownVariable(usize),
    #[error("variable `{0}` registered twice")]
    DuplicateName(String),
    #[error("negative quadratic cost coefficient {0}")]
    NonConvexCost(f64),
    #[error("apparent-power limit must be positive, got {0}")]
    NonPositiveLimit(f64),
    #[error("block `{block}`: {message}")]
    InconsistentPlacement { block: String, message: String },
    #[error("non-finite coefficient in `{0}`")]
    NonFinite(String),
    #[error("missing lifted entry for bus pair ({0}, {1})")]
    MissingPair(usize, usize),
    #[error("{0}")]
    Argument(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConeKind {
    Nonnegative,
    /// `(t, x)` with `t ≥ ‖x‖`.
    SecondOrder,
    /// `(u, v, x)` with `2uv ≥ ‖x‖²`, `u, v ≥ 0`.
    RotatedSecondOrder,
    /// Real symmetric PSD matrix; entries hold the lower triangle in packed order.
    Psd { side: usize },
}

/// Complex entry `(i, j)`, `i ≥ j`, of a Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianEntry {
    pub re: LinExpr,
    /// Always `None` on the diagonal.
    pub im: Option<LinExpr>,
}

/// Maps each lower-triangle entry of a Hermitian matrix to affine expressions.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianBlockMap {
    side: usize,
    entries: Vec<HermitianEntry>,
}

impl HermitianBlockMap {
    /// Builds the map from `entry(i, j)` for `i ≥ j`.
    pub fn from_fn(side: usize, mut entry: impl FnMut(usize, usize) -> HermitianEntry) -> Self {
        let mut entries = Vec::with_capacity(svec_dim(side));
        for j in 0..side {
            for i in j..side {
                entries.push(entry(i, j));
            }
        }
        Self { side, entries }
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn entry(&self, i: usize, j: usize) -> &HermitianEntry {
        &self.entries[svec_index(self.side, i, j)]
    }

    /// Entries with their `(i, j)` positions, `i ≥ j`.
    pub fn iter(&self) -> impl Iterator<Item = ((usize, usize), &HermitianEntry)> {
        let n = self.side;
        (0..n)
            .flat_map(move |j| (j..n).map(move |i| (i, j)))
            .zip(self.entries.iter())
    }

    /// Hermitian matrix at a point, as `(re, im)` dense parts.
    pub fn evaluate(&self, x: &[f64]) -> (Mat<f64>, Mat<f64>) {
        let n = self.side;
        let mut re = Mat::<f64>::zeros(n, n);
        let mut im = Mat::<f64>::zeros(n, n);
        for ((i, j), e) in self.iter() {
            let r = e.re.eval(x);
            re[(i, j)] = r;
            re[(j, i)] = r;
            if let Some(y) = &e.im {
                let y = y.eval(x);
                im[(i, j)] = y;
                im[(j, i)] = -y;
            }
        }
        (re, im)
    }

    /// Complex entry `(i, j)` at a point, for any `i, j`.
    pub fn value(&self, x: &[f64], i: usize, j: usize) -> Complex64 {
        let e = self.entry(i, j);
        let im = e.im.as_ref().map_or(0.0, |y| y.eval(x));
        if i >= j {
            Complex64::new(e.re.eval(x), im)
        } else {
            Complex64::new(e.re.eval(x), -im)
        }
    }
}

/// Eigenvalues, ascending, of the Hermitian matrix `re + j·im` (each listed once).
pub fn hermitian_eigenvalues(re: &Mat<f64>, im: &Mat<f64>) -> Vec<f64> {
    let emb = real_embedding(re, im);
    let eig = symmetric_eigenvalues(&emb);
    // The real embedding doubles every eigenvalue.
    eig.chunks(2).map(|c| c.iter().sum::<f64>() / c.len() as f64).collect()
}

/// `[X, -Y; Y, X]` for `H = X + jY`.
pub fn real_embedding(re: &Mat<f64>, im: &Mat<f64>) -> Mat<f64> {
    let n = re.nrows();
    Mat::from_fn(2 * n, 2 * n, |r, c| {
        let (bi, i) = (r / n, r % n);
        let (bj, j) = (c / n, c % n);
        match (bi, bj) {
            (0, 0) | (1, 1) => re[(i, j)],
            (1, 0) => im[(i, j)],
            _ => -im[(i, j)],
        }
    })
}

/// Ascending eigenvalues of a dense symmetric matrix.
pub fn symmetric_eigenvalues(m: &Mat<f64>) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let mut eig = m
        .self_adjoint_eigenvalues(Side::Lower)
        .unwrap_or_else(|_| vec![f64::NAN; m.nrows()]);
    eig.sort_by(f64::total_cmp);
    eig
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConeBlock {
    pub kind: ConeKind,
    pub entries: Vec<LinExpr>,
    /// Set for PSD blocks that embed a Hermitian matrix.
    pub hermitian: Option<HermitianBlockMap>,
    pub label: String,
}

impl ConeBlock {
    /// How far `x` is from the cone, `0` when inside.
    pub fn violation(&self, x: &[f64]) -> f64 {
        let v: Vec<f64> = self.entries.iter().map(|e| e.eval(x)).collect();
        match self.kind {
            ConeKind::Nonnegative => v.iter().fold(0.0, |m, &a| m.max(-a)),
            ConeKind::SecondOrder => {
                let norm = v[1..].iter().map(|a| a * a).sum::<f64>().sqrt();
                (norm - v[0]).max(0.0)
            }
            ConeKind::RotatedSecondOrder => {
                // Same cone after the change (u + v, u - v)/√2.
                let t = (v[0] + v[1]) / std::f64::consts::SQRT_2;
                let d = (v[0] - v[1]) / std::f64::consts::SQRT_2;
                let norm = (d * d + v[2..].iter().map(|a| a * a).sum::<f64>()).sqrt();
                (norm - t).max(0.0)
            }
            ConeKind::Psd { side } => {
                let m = Mat::from_fn(side, side, |i, j| v[svec_index(side, i, j)]);
                symmetric_eigenvalues(&m).first().map_or(0.0, |&l| (-l).max(0.0))
            }
        }
    }
}

/// Where an equality came from, for reporting.
#[derive(Debug, Clone, PartialEq)]
pub struct Equality {
    pub expr: LinExpr,
    pub label: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BlockId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EqualityId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Violation {
    pub equality: f64,
    pub cone: f64,
}

impl Violation {
    pub fn max(&self) -> f64 {
        self.equality.max(self.cone)
    }
}

/// `minimize objective(x)` subject to `expr(x) = 0` for every equality and
/// cone membership of every block.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConicProgram {
    names: Vec<String>,
    lookup: HashMap<String, usize>,
    objective: LinExpr,
    equalities: Vec<Equality>,
    blocks: Vec<ConeBlock>,
}

impl ConicProgram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_var(&mut self, name: impl Into<String>) -> Result<usize, ModelError> {
        let name = name.into();
        if self.lookup.contains_key(&name) {
            return Err(ModelError::DuplicateName(name));
        }
        let id = self.names.len();
        self.lookup.insert(name.clone(), id);
        self.names.push(name);
        Ok(id)
    }

    pub fn num_vars(&self) -> usize {
        self.names.len()
    }

    pub fn var_name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn find(&self, name: &str) -> Option<usize> {
        self.lookup.get(name).copied()
    }

    pub fn objective(&self) -> &LinExpr {
        &self.objective
    }

    pub fn equalities(&self) -> &[Equality] {
        &self.equalities
    }

    pub fn blocks(&self) -> &[ConeBlock] {
        &self.blocks
    }

    pub fn block(&self, id: BlockId) -> &ConeBlock {
        &self.blocks[id.0]
    }

    fn check_expr(&self, e: &LinExpr, what: &str) -> Result<(), ModelError> {
        for &(v, c) in &e.terms {
            if v >= self.num_vars() {
                return Err(ModelError::UnknownVariable(v));
            }
            if !c.is_finite() {
                return Err(ModelError::NonFinite(what.to_string()));
            }
        }
        if !e.constant.is_finite() {
            return Err(ModelError::NonFinite(what.to_string()));
        }
        Ok(())
    }

    /// Adds `expr` to the objective.
    pub fn add_objective(&mut self, expr: &LinExpr) -> Result<(), ModelError> {
        self.check_expr(expr, "objective")?;
        self.objective += expr;
        Ok(())
    }

    /// Adds the constraint `expr = 0`.
    pub fn add_equality(&mut self, expr: LinExpr, label: impl Into<String>) -> Result<EqualityId, ModelError> {
        let label = label.into();
        self.check_expr(&expr, &label)?;
        self.equalities.push(Equality { expr, label });
        Ok(EqualityId(self.equalities.len() - 1))
    }

    /// Adds the constraint `expr ≥ 0`.
    pub fn add_nonnegative(&mut self, expr: LinExpr, label: impl Into<String>) -> Result<BlockId, ModelError> {
        self.add_block(ConeBlock {
            kind: ConeKind::Nonnegative,
            entries: vec![expr],
            hermitian: None,
            label: label.into(),
        })
    }

    pub fn add_block(&mut self, block: ConeBlock) -> Result<BlockId, ModelError> {
        for e in &block.entries {
            self.check_expr(e, &block.label)?;
        }
        let bad = |message: &str| ModelError::InconsistentPlacement {
            block: block.label.clone(),
            message: message.to_string(),
        };
        match block.kind {
            ConeKind::Nonnegative if block.entries.is_empty() => return Err(bad("empty block")),
            ConeKind::SecondOrder if block.entries.is_empty() => return Err(bad("empty block")),
            ConeKind::RotatedSecondOrder if block.entries.len() < 2 => return Err(bad("needs u and v")),
            ConeKind::Psd { side } if side == 0 || block.entries.len() != svec_dim(side) => {
                return Err(bad("entry count does not match the side"))
            }
            _ => {}
        }
        if let Some(map) = &block.hermitian {
            if block.kind != (ConeKind::Psd { side: 2 * map.side() }) {
                return Err(bad("Hermitian map requires a PSD block of twice its side"));
            }
        }
        self.blocks.push(block);
        Ok(BlockId(self.blocks.len() - 1))
    }

    /// Variables referenced by neither the objective, an equality nor a cone.
    pub fn orphans(&self) -> Vec<usize> {
        let mut used = vec![false; self.num_vars()];
        let exprs = std::iter::once(&self.objective)
            .chain(self.equalities.iter().map(|e| &e.expr))
            .chain(self.blocks.iter().flat_map(|b| b.entries.iter()));
        for e in exprs {
            for &(v, _) in &e.terms {
                used[v] = true;
            }
        }
        (0..self.num_vars()).filter(|&v| !used[v]).collect()
    }

    pub fn evaluate_objective(&self, x: &[f64]) -> f64 {
        self.objective.eval(x)
    }

    /// Largest equality residual and largest cone violation at `x`.
    pub fn max_violation(&self, x: &[f64]) -> Violation {
        Violation {
            equality: self.equalities.iter().fold(0.0, |m, e| m.max(e.expr.eval(x).abs())),
            cone: self.blocks.iter().fold(0.0, |m, b| m.max(b.violation(x))),
        }
    }

    /// Plain-text listing of variables, objective, equalities and cones.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "variables {}", self.num_vars());
        for (i, n) in self.names.iter().enumerate() {
            let _ = writeln!(out, "var {i} {n}");
        }
        let _ = writeln!(out, "objective {}", self.objective);
        let _ = writeln!(out, "equalities {}", self.equalities.len());
        for e in &self.equalities {
            let _ = writeln!(out, "eq {} = 0  # {}", e.expr, e.label);
        }
        let _ = writeln!(out, "cones {}", self.blocks.len());
        for b in &self.blocks {
            let kind = match b.kind {
                ConeKind::Nonnegative => "nonneg".to_string(),
                ConeKind::SecondOrder => "soc".to_string(),
                ConeKind::RotatedSecondOrder => "rsoc".to_string(),
                ConeKind::Psd { side } => format!("psd {side}"),
            };
            let _ = writeln!(out, "cone {kind} {}  # {}", b.entries.len(), b.label);
            for e in &b.entries {
                let _ = writeln!(out, "  {e}");
            }
        }
        out
    }
}
