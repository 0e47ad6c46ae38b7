use thiserror::Error;

use crate::svec::svec_dim;

/// A convex cone block. Variables are laid out block after block in the order given.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cone {
    /// `n` nonnegative scalars.
    Nonnegative(usize),
    /// `(t, x)` of total length `n` with `t ≥ ‖x‖₂`.
    SecondOrder(usize),
    /// Symmetric PSD matrix of the given side, in packed storage (see [`crate::svec`]).
    Psd(usize),
}

impl Cone {
    /// Number of scalar variables in the block.
    pub fn dim(&self) -> usize {
        match *self {
            Cone::Nonnegative(n) | Cone::SecondOrder(n) => n,
            Cone::Psd(n) => svec_dim(n),
        }
    }
}

/// `minimize cᵀx  subject to  A x = b,  x ∈ K₁ × … × K_p`.
///
/// `A` is given as `(row, column, value)` triplets; duplicates are summed.
#[derive(Debug, Clone, Default)]
pub struct Problem {
    pub num_rows: usize,
    pub entries: Vec<(usize, usize, f64)>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub cones: Vec<Cone>,
}

#[derive(Debug, Error, PartialEq)]
pub enum ProblemError {
    #[error("cone dimensions sum to {cones} but the objective has {vars} entries")]
    ConeMismatch { cones: usize, vars: usize },
    #[error("right-hand side has {got} entries, expected {expected}")]
    RhsLength { got: usize, expected: usize },
    #[error("matrix entry ({row}, {col}) is out of range")]
    EntryOutOfRange { row: usize, col: usize },
    #[error("non-finite value in problem data")]
    NonFinite,
    #[error("second-order cone of dimension zero")]
    EmptyCone,
}

impl Problem {
    pub fn num_vars(&self) -> usize {
        self.c.len()
    }

    pub fn validate(&self) -> Result<(), ProblemError> {
        let total: usize = self.cones.iter().map(Cone::dim).sum();
        if total != self.c.len() {
            return Err(ProblemError::ConeMismatch {
                cones: total,
                vars: self.c.len(),
            });
        }
        if self.b.len() != self.num_rows {
            return Err(ProblemError::RhsLength {
                got: self.b.len(),
                expected: self.num_rows,
            });
        }
        if self.cones.iter().any(|c| matches!(c, Cone::SecondOrder(0))) {
            return Err(ProblemError::EmptyCone);
        }
        for &(row, col, v) in &self.entries {
            if row >= self.num_rows || col >= self.c.len() {
                return Err(ProblemError::EntryOutOfRange { row, col });
            }
            if !v.is_finite() {
                return Err(ProblemError::NonFinite);
            }
        }
        if self.b.iter().chain(&self.c).any(|v| !v.is_finite()) {
            return Err(ProblemError::NonFinite);
        }
        Ok(())
    }
}

/// Compressed storage of `A` kept both row- and column-wise.
#[derive(Debug, Clone)]
pub(crate) struct Matrix {
    pub nrows: usize,
    pub ncols: usize,
    pub row_ptr: Vec<usize>,
    pub row_col: Vec<usize>,
    pub row_val: Vec<f64>,
    pub col_ptr: Vec<usize>,
    pub col_row: Vec<usize>,
    pub col_val: Vec<f64>,
}

impl Matrix {
    pub fn from_triplets(nrows: usize, ncols: usize, entries: &[(usize, usize, f64)]) -> Self {
        let mut sorted: Vec<(usize, usize, f64)> = entries.to_vec();
        sorted.sort_by_key(|&(r, c, _)| (r, c));
        let mut merged: Vec<(usize, usize, f64)> = Vec::with_capacity(sorted.len());
        for (r, c, v) in sorted {
            match merged.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 += v,
                _ => merged.push((r, c, v)),
            }
        }
        merged.retain(|e| e.2 != 0.0);

        let mut row_ptr = vec![0; nrows + 1];
        for &(r, _, _) in &merged {
            row_ptr[r + 1] += 1;
        }
        for i in 0..nrows {
            row_ptr[i + 1] += row_ptr[i];
        }
        let row_col = merged.iter().map(|e| e.1).collect();
        let row_val = merged.iter().map(|e| e.2).collect();

        let mut col_ptr = vec![0; ncols + 1];
        for &(_, c, _) in &merged {
            col_ptr[c + 1] += 1;
        }
        for j in 0..ncols {
            col_ptr[j + 1] += col_ptr[j];
        }
        let mut next = col_ptr.clone();
        let mut col_row = vec![0; merged.len()];
        let mut col_val = vec![0.0; merged.len()];
        for &(r, c, v) in &merged {
            col_row[next[c]] = r;
            col_val[next[c]] = v;
            next[c] += 1;
        }
        Self {
            nrows,
            ncols,
            row_ptr,
            row_col,
            row_val,
            col_ptr,
            col_row,
            col_val,
        }
    }

    /// `out = A x`
    pub fn mul(&self, x: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate().take(self.nrows) {
            let mut acc = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.row_val[k] * x[self.row_col[k]];
            }
            *o = acc;
        }
    }

    /// `out = Aᵀ y`
    pub fn mul_t(&self, y: &[f64], out: &mut [f64]) {
        for (j, o) in out.iter_mut().enumerate().take(self.ncols) {
            let mut acc = 0.0;
            for k in self.col_ptr[j]..self.col_ptr[j + 1] {
                acc += self.col_val[k] * y[self.col_row[k]];
            }
            *o = acc;
        }
    }

    pub fn scale_rows(&mut self, d: &[f64]) {
        for i in 0..self.nrows {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                self.row_val[k] *= d[i];
            }
        }
        for k in 0..self.col_row.len() {
            self.col_val[k] *= d[self.col_row[k]];
        }
    }

    pub fn row_inf_norm(&self, i: usize) -> f64 {
        self.row_val[self.row_ptr[i]..self.row_ptr[i + 1]]
            .iter()
            .fold(0.0, |m, v| m.max(v.abs()))
    }
}
